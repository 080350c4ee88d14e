#!/usr/bin/env python3
"""
rsc_output_utils.py - Shared output utility for the RSC memory tools.

Provides the RscOutput class that redirects verbose output to timestamped
log files while printing only a 2-3 line summary to stderr. stdout is left
to the machine-readable payload (JSON or CSV) of each subcommand.

Usage:
    from rsc_output_utils import RscOutput

    def main() -> int:
        with RscOutput("rsc_threshold") as out:
            out.log("Scanning d=3 ...")
            out.log_json({"p_th": 0.0071}, label="fit")
            out.summary("DONE", "Threshold scan finished")
        return 0
"""

from __future__ import annotations

import json
import logging
import os
import re
import sys
from datetime import datetime, timezone
from pathlib import Path
from typing import Any

from rsc_thresholds import LOG_RETENTION_DAYS

# ANSI escape code pattern for stripping terminal colors from log output
_ANSI_RE = re.compile(r"\x1b\[[0-9;]*[a-zA-Z]")

_LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


class RscOutput:
    """Context-managed output handler that writes verbose output to log files.

    All detailed output goes to a timestamped log file under .rsc-logs/.
    Library loggers (``logging.getLogger(__name__)`` in every module) are
    routed to the same file while the handler is open.
    """

    def __init__(self, script_name: str, log_dir: Path | None = None) -> None:
        # Log directory: explicit > RSC_LOG_DIR > cwd > home fallback
        if log_dir is not None:
            base = log_dir
        else:
            env_dir = os.environ.get("RSC_LOG_DIR", "")
            if env_dir:
                base = Path(env_dir)
            else:
                cwd_logs = Path.cwd() / ".rsc-logs"
                base = cwd_logs if cwd_logs.parent.exists() else Path.home() / ".rsc-logs"

        self._script_name = script_name
        self._log_dir = base / script_name
        self._log_dir.mkdir(parents=True, exist_ok=True)

        ts = datetime.now(timezone.utc).strftime("%Y%m%d_%H%M%S")
        self._log_path = self._log_dir / f"{ts}_{os.getpid()}.log"
        self._log_file = open(self._log_path, "w", encoding="utf-8")

        self._log_file.write(f"# {script_name} - {ts} UTC\n")
        self._log_file.write(f"# PID: {os.getpid()}\n\n")
        self._log_file.flush()

        self._handler = logging.FileHandler(self._log_path, encoding="utf-8")
        self._handler.setFormatter(logging.Formatter(_LOG_FORMAT))
        root = logging.getLogger()
        root.addHandler(self._handler)
        if root.level == logging.NOTSET or root.level > logging.INFO:
            root.setLevel(logging.INFO)

        self._cleanup_old_logs()

    @property
    def log_path(self) -> str:
        """Return the path to the current log file."""
        return str(self._log_path)

    def log(self, msg: str) -> None:
        """Write a message to the log file."""
        self._log_file.write(self.strip_ansi(msg) + "\n")
        self._log_file.flush()

    def log_json(self, data: Any, label: str = "") -> None:
        """Write JSON data to the log file with indent=0 (compact but readable)."""
        if label:
            self._log_file.write(f"\n--- {label} ---\n")
        self._log_file.write(json.dumps(data, indent=0, default=str) + "\n")
        self._log_file.flush()

    def summary(self, status: str, message: str, extra: str = "") -> None:
        """Print a concise 2-3 line summary to stderr.

        Format:
            [{STATUS}] script_name - message
            Log: /path/to/logfile.log
            extra (optional third line)
        """
        print(f"[{status}] {self._script_name} - {message}", file=sys.stderr)
        print(f"Log: {self._log_path}", file=sys.stderr)
        if extra:
            print(extra, file=sys.stderr)

    def close(self) -> None:
        """Detach the logging handler and close the log file."""
        handler = getattr(self, "_handler", None)
        if handler is not None:
            logging.getLogger().removeHandler(handler)
            handler.close()
            self._handler = None
        log_file = getattr(self, "_log_file", None)
        if log_file is not None and not log_file.closed:
            log_file.close()

    def __del__(self) -> None:
        self.close()

    def __enter__(self) -> RscOutput:
        return self

    def __exit__(self, *args: Any) -> None:
        self.close()

    @staticmethod
    def strip_ansi(text: str) -> str:
        """Remove ANSI escape codes from text."""
        return _ANSI_RE.sub("", text)

    def _cleanup_old_logs(self) -> None:
        """Remove log files older than the retention period (best-effort)."""
        try:
            retention_days = int(os.environ.get("RSC_LOG_RETENTION_DAYS", str(LOG_RETENTION_DAYS)))
            cutoff = datetime.now(timezone.utc).timestamp() - (retention_days * 86400)
            for log_file in self._log_dir.glob("*.log"):
                if log_file.stat().st_mtime < cutoff:
                    log_file.unlink(missing_ok=True)
        except (OSError, ValueError):
            pass  # Non-critical cleanup failure
