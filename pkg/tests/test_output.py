"""Log-file output and validation reports."""

from __future__ import annotations

import logging
import os
import time

from rsc_output_utils import RscOutput
from rsc_validation_common import ValidationReport, format_report


def test_output_writes_log_and_short_summary(tmp_path, capsys):
    with RscOutput("rsc_test", log_dir=tmp_path) as out:
        out.log("\x1b[31mred\x1b[0m text")
        out.log_json({"p_th": 0.007}, label="fit")
        logging.getLogger("rsc_decoder").warning("routed to the file")
        out.summary("DONE", "finished", "Manifest: x.json")
        path = out.log_path
    err = capsys.readouterr().err.splitlines()
    assert err[0] == "[DONE] rsc_test - finished"
    assert err[1] == f"Log: {path}"
    assert err[2] == "Manifest: x.json"
    text = open(path, encoding="utf-8").read()
    assert "red text" in text and "\x1b" not in text
    assert "--- fit ---" in text
    assert "routed to the file" in text


def test_output_env_dir_and_retention(tmp_path, monkeypatch):
    monkeypatch.setenv("RSC_LOG_DIR", str(tmp_path))
    stale = tmp_path / "rsc_test" / "old.log"
    stale.parent.mkdir(parents=True)
    stale.write_text("old", encoding="utf-8")
    past = time.time() - 30 * 86400
    os.utime(stale, (past, past))
    with RscOutput("rsc_test") as out:
        assert out.log_path.startswith(str(tmp_path / "rsc_test"))
    assert not stale.exists()


def test_report_levels():
    report = ValidationReport(subject="lattice d=3")
    assert report.is_empty and report.is_valid
    assert format_report(report) == "lattice d=3: valid"
    report.warning("style", "noted")
    assert report.is_valid and not report.is_empty
    other = ValidationReport()
    other.critical("commutation", "stabilizers 1 and 2 anticommute")
    report.extend(other)
    assert not report.is_valid
    assert report.checks() == {"style", "commutation"}
    assert report.count_by_level()["CRITICAL"] == 1
    assert report.to_dict()["valid"] is False
    assert "[CRITICAL] commutation" in format_report(report)
