#!/usr/bin/env python3
"""
RSC Validation - Common Module

Shared invariant-checking infrastructure for the lattice, schedule, matching
graph and frequency-plan validators. This module contains:
- Type definitions (Level, ValidationResult, ValidationReport)
- Formatting helpers for terminal output

Validators never raise on a violated invariant: they collect every violation
into a ValidationReport so one pass lists all of them.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

# =============================================================================
# Type Definitions
# =============================================================================

# Severity levels
# - CRITICAL: structure unusable (wrong counts, broken commutation)
# - MAJOR: an operator or layout violates its contract
# - WARNING: never blocks, always reported
Level = Literal["CRITICAL", "MAJOR", "WARNING"]

BLOCKING_LEVELS: frozenset[str] = frozenset({"CRITICAL", "MAJOR"})


@dataclass(frozen=True)
class ValidationResult:
    """Single violated invariant.

    Attributes:
        level: Severity level
        check: Short identifier of the invariant (e.g. "commutation")
        message: Human-readable description of the violation
    """

    level: Level
    check: str
    message: str

    def to_dict(self) -> dict[str, str]:
        """Convert to dictionary for JSON serialization."""
        return {"level": self.level, "check": self.check, "message": self.message}


@dataclass
class ValidationReport:
    """Collection of violated invariants.

    An empty report means the validated object satisfies every invariant.
    """

    subject: str = ""
    results: list[ValidationResult] = field(default_factory=list)

    def add(self, level: Level, check: str, message: str) -> None:
        """Add a violation."""
        self.results.append(ValidationResult(level, check, message))

    def critical(self, check: str, message: str) -> None:
        """Add a critical violation."""
        self.add("CRITICAL", check, message)

    def major(self, check: str, message: str) -> None:
        """Add a major violation."""
        self.add("MAJOR", check, message)

    def warning(self, check: str, message: str) -> None:
        """Add a warning; reported, but never makes the subject invalid."""
        self.add("WARNING", check, message)

    def extend(self, other: ValidationReport) -> None:
        """Append every result of another report."""
        self.results.extend(other.results)

    @property
    def is_empty(self) -> bool:
        return not self.results

    @property
    def is_valid(self) -> bool:
        """True when no blocking violation is present."""
        return not any(r.level in BLOCKING_LEVELS for r in self.results)

    def checks(self) -> set[str]:
        """Identifiers of every violated invariant."""
        return {r.check for r in self.results}

    def count_by_level(self) -> dict[str, int]:
        counts = {"CRITICAL": 0, "MAJOR": 0, "WARNING": 0}
        for r in self.results:
            counts[r.level] += 1
        return counts

    def to_dict(self) -> dict[str, object]:
        """Convert to dictionary for JSON serialization."""
        return {
            "subject": self.subject,
            "valid": self.is_valid,
            "counts": self.count_by_level(),
            "results": [r.to_dict() for r in self.results],
        }


# =============================================================================
# Formatting
# =============================================================================


def format_report(report: ValidationReport) -> str:
    """Format a report as plain text, one violation per line."""
    if report.is_empty:
        return f"{report.subject}: valid"
    lines = [f"{report.subject}: {len(report.results)} violation(s)"]
    for r in report.results:
        lines.append(f"  [{r.level}] {r.check}: {r.message}")
    return "\n".join(lines)
