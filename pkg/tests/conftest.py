"""Shared fixtures for the RSC memory test suite."""

from __future__ import annotations

import sys
from pathlib import Path

import pytest

SCRIPTS = Path(__file__).resolve().parent.parent / "scripts"
if str(SCRIPTS) not in sys.path:
    sys.path.insert(0, str(SCRIPTS))

from rsc_circuit import build_round_schedule  # noqa: E402
from rsc_lattice import build_bus_layout, build_lattice  # noqa: E402


@pytest.fixture(autouse=True)
def _log_dir(tmp_path_factory: pytest.TempPathFactory, monkeypatch: pytest.MonkeyPatch) -> None:
    monkeypatch.setenv("RSC_LOG_DIR", str(tmp_path_factory.mktemp("logs")))


@pytest.fixture
def lattice3():
    return build_lattice(3)


@pytest.fixture
def lattice5():
    return build_lattice(5)


@pytest.fixture
def schedule3(lattice3):
    return build_round_schedule(lattice3)


@pytest.fixture
def layout5(lattice5):
    return build_bus_layout(lattice5)


def face_stabilizer(lattice, face):
    """The stabilizer whose plaquette has north-west corner ``face``."""
    return next(s for s in lattice.stabilizers if s.face == face)
