"""Shared fixtures for the lab tests."""

import json
from pathlib import Path

import numpy as np
import pytest

from mullab.base_space import SpaceModel
from mullab.mulop import MulOperator
from mullab.phi_dsl import PhiSpec, build_phi, build_section
from mullab.semigroup import SemigroupEvaluator

EXPECTED_DIR = Path(__file__).parent / "expected"


def make_operator(entries, space):
    """MulOperator for expression entries on a space."""
    return MulOperator(phi=build_phi(PhiSpec(entries=tuple(entries)), space))


def make_evaluator(entries, space):
    return SemigroupEvaluator.from_operator(make_operator(entries, space))


def load_expected(name):
    return json.loads((EXPECTED_DIR / f"{name}.json").read_text(encoding="utf-8"))


@pytest.fixture
def naturals():
    """The first hundred naturals."""
    return SpaceModel.truncated_naturals(100)


@pytest.fixture
def rotation_grid():
    return SpaceModel.interval_grid(0.0, 20.0, 0.5)


@pytest.fixture
def compact():
    return SpaceModel.finite(5)


@pytest.fixture
def naturals_evaluator(naturals):
    """Semigroup of diag(i·n, -n^2) on the first hundred naturals."""
    return make_evaluator(("i*x", "-x^2"), naturals)


@pytest.fixture
def naturals_section(naturals):
    return build_section(("1/x^2", "1/x^2"), naturals)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
