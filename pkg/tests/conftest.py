from __future__ import annotations

from pathlib import Path

import pytest

from core.instance_io import load, load_matrix

INSTANCE_DIR = Path(__file__).resolve().parent.parent / "instances"


@pytest.fixture
def instance_dir() -> Path:
    return INSTANCE_DIR


@pytest.fixture
def eq12():
    return load(INSTANCE_DIR / "eq12.dmip")


@pytest.fixture
def misl_small():
    return load(INSTANCE_DIR / "misl_small.dmip")


@pytest.fixture
def cfl_small():
    return load(INSTANCE_DIR / "cfl_small.dmip")


@pytest.fixture
def matrix():
    def _load(name: str):
        return load_matrix(INSTANCE_DIR / f"{name}.mat")

    return _load
