"""Shared fixtures for the ehmec test suite."""

import logging
import os
from pathlib import Path

import pytest

from ehmec.core.dual_solver import SolveOptions
from ehmec.core.model import Instance
from ehmec.experiments.generation import GenParams, generate_instance
from ehmec.io.files import load_instance

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(autouse=True)
def clean_environment(monkeypatch):
    """Keep local ``EHMEC_*`` variables out of the tests and reset logging after each one."""
    for key in list(os.environ):
        if key.startswith("EHMEC_"):
            monkeypatch.delenv(key, raising=False)
    yield
    root = logging.getLogger()
    for handler in list(root.handlers):
        if type(handler) in (logging.StreamHandler, logging.FileHandler):
            root.removeHandler(handler)
            handler.close()


@pytest.fixture
def fixture_dir() -> Path:
    return FIXTURES


@pytest.fixture
def tiny_instance() -> Instance:
    """One user, two slots, 0.3 J at the start and 0.5 J harvested after slot 1."""
    return load_instance(FIXTURES / "k1n2.json")


@pytest.fixture
def zero_instance() -> Instance:
    """One user, one slot, no energy at all."""
    return load_instance(FIXTURES / "zero.json")


@pytest.fixture
def random_instance() -> Instance:
    return generate_instance(GenParams(seed=7), num_users=3, num_slots=6, slot_seconds=0.02)


@pytest.fixture
def options() -> SolveOptions:
    return SolveOptions(max_iters=5000)
