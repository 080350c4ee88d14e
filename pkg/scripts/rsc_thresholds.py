"""
rsc_thresholds.py - Shared constants for the rotated-surface-code memory tools.

These constants configure noise presets, decoder weight discretisation,
Monte-Carlo budgets, frequency-plan conventions and CLI exit codes.
"""

# =============================================================================
# CLI EXIT CODES
# =============================================================================

# Run completed
EXIT_OK = 0

# Bad flags or bad configuration file
EXIT_USAGE = 2

# Simulation, decoding or I/O failure
EXIT_RUNTIME = 3

# Threshold fit found no crossing in the scanned window
EXIT_NO_CROSSING = 4

# =============================================================================
# NOISE PRESETS (circuit-level physical error rates)
# =============================================================================

# Circuit-level threshold the memory is measured against
THRESHOLD_REFERENCE = 6.7e-3

# Named presets: gate error figures quoted for the hardware
NOISE_PRESETS = {
    "single-qubit-gate": 5e-4,
    "dp-gate": 6e-3,
    "cr-gate": 1.4e-2,
    "rip-gate": 2.3e-2,
}

# =============================================================================
# CIRCUIT
# =============================================================================

# Time steps in one extraction cycle: prep, four CNOT layers, measure
CYCLE_TIME_STEPS = 6

# =============================================================================
# DECODER
# =============================================================================

# Integer weight units per unit of log-likelihood weight
WEIGHT_RESOLUTION = 1000

# Largest defect count accepted by the brute-force matching oracle
BRUTE_FORCE_MAX_DEFECTS = 10

# =============================================================================
# MONTE-CARLO EXPERIMENTS
# =============================================================================

# Default shots per (d, p) point
DEFAULT_SHOTS = 10_000

# Shots per worker task; chunk boundaries fix the per-shot streams
SHOT_CHUNK = 256

# Fewer failures than this flags the point as low statistics
LOW_STATISTICS_FAILURES = 10

# Two-sided 95% normal quantile for Wilson intervals
WILSON_Z = 1.959963984540054

# =============================================================================
# FREQUENCY PLAN
# =============================================================================

# Number of distinct frequency classes
FREQUENCY_CLASSES = 5

# Class base frequencies (GHz), evenly spaced over the design range
CLASS_BASE_GHZ = (5.0, 5.1, 5.2, 5.3, 5.4)

# Transmon anharmonicity (GHz)
ANHARMONICITY_GHZ = -0.346

# Junction-disorder frequency scale (MHz)
DISORDER_SIGMA_MHZ = 280.0

# Collision windows (MHz): degenerate 0-1, 0-1 vs 1-2, two-photon 0-2
COLLISION_WINDOWS_MHZ = {"C1": 17.0, "C2": 4.0, "C3": 4.0}

# Default Monte-Carlo samples for collision yield
DEFAULT_FREQ_SAMPLES = 10_000

# =============================================================================
# LOGGING
# =============================================================================

# Log retention in days (RSC_LOG_RETENTION_DAYS overrides)
LOG_RETENTION_DAYS = 7
