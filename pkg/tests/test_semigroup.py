"""Tests for the multiplication semigroup."""

import math

import numpy as np
import pytest
from hypothesis import given, seed, settings
from hypothesis import strategies as st

from mullab.base_space import SpaceModel, restrict_support, section_norm
from mullab.errors import CocycleViolationError, RecoveryError
from mullab.mulop import GrowthFlag
from mullab.phi_dsl import build_section
from mullab.scenarios import BUILTINS, get_builtin
from mullab.semigroup import (
    SemigroupEvaluator,
    SemigroupKind,
    check_power_decomposition,
    check_semigroup_law,
    check_t0_condition,
    continuity_profiles,
    decompose_time,
    evolve,
    generator_diff_quotient,
    norm_by_blocks,
    recover_phi_from_semigroup,
    sample_semigroup,
    semigroup_kind,
    semigroup_norm,
    uniform_continuity_witness,
    uniform_profile,
)
from tests.conftest import make_evaluator, make_operator


def _builtin_setup(name):
    scenario = get_builtin(name)
    S = SemigroupEvaluator.from_operator(make_operator(scenario.phi.entries, scenario.space))
    s = build_section(scenario.section.entries, scenario.space, scenario.norm)
    return scenario, S, s


def test_evolve_at_zero_is_identity(naturals_evaluator, naturals_section):
    """Test T(0) = I exactly."""
    assert evolve(naturals_evaluator, naturals_section, 0.0) is naturals_section


def test_evolve_rejects_negative_time(naturals_evaluator, naturals_section):
    """Test that only nonnegative times are accepted."""
    with pytest.raises(ValueError):
        evolve(naturals_evaluator, naturals_section, -1.0)


@pytest.mark.parametrize("t", [0.1, 1.0, 10.0])
def test_evolve_matches_closed_form(naturals_evaluator, naturals_section, naturals, t):
    """Test (e^{int}/n^2, e^{-n^2 t}/n^2) on the first hundred naturals."""
    n = naturals.coordinates
    evolved = evolve(naturals_evaluator, naturals_section, t).values
    assert np.allclose(evolved[:, 0], np.exp(1j * n * t) / n**2, rtol=0, atol=1e-12)
    assert np.allclose(evolved[:, 1], np.exp(-(n**2) * t) / n**2, rtol=0, atol=1e-12)


def test_evolve_where_multiplier_overflows():
    """Test that e^{tφ} = inf at a zero of s still gives 0 there."""
    space = SpaceModel.truncated_naturals(1000)
    S = make_evaluator(("x",), space)
    decaying = build_section(("exp(-2*x)",), space)
    evolved = evolve(S, decaying, 1.0)
    assert np.all(np.isfinite(evolved.values))
    assert section_norm(evolved) == pytest.approx(math.exp(-1.0), rel=1e-12)
    assert check_semigroup_law(S, decaying, 0.5, 0.5) <= 1e-12

    window = restrict_support(build_section(("1",), space), 0, 4)
    evolved = evolve(S, window, 1.0)
    assert evolved.support == (0, 4)
    assert np.allclose(evolved.values[:5, 0], np.exp(np.arange(1.0, 6.0)), rtol=1e-12, atol=0)
    assert np.all(evolved.values[5:] == 0)


@pytest.mark.parametrize("entry,w", [("i*x", 0.0), ("1+i*x", 1.0)])
def test_semigroup_norm_is_growth_bound(entry, w):
    """Test ||T(t)|| = e^{wt} on [0, 10]."""
    S = make_evaluator((entry,), SpaceModel.interval_grid(0.0, 10.0, 0.1))
    assert S.growth_bound.w == w
    for t in map(float, np.linspace(0.0, 5.0, 20)):
        assert semigroup_norm(S, t) == pytest.approx(math.exp(w * t), rel=1e-13)
        assert norm_by_blocks(S, t) == pytest.approx(math.exp(w * t), rel=1e-13)


@pytest.mark.parametrize("name", sorted(BUILTINS))
def test_semigroup_law_on_builtins(name, rng):
    """Test T(t1 + t2) = T(t1)T(t2) on random times."""
    _, S, s = _builtin_setup(name)
    for t1, t2 in rng.uniform(0.0, 10.0, (100, 2)):
        scale = semigroup_norm(S, t1 + t2) * section_norm(s)
        assert check_semigroup_law(S, s, t1, t2) <= 1e-12 * scale


def test_decompose_time_examples():
    """Test t = k·t0 + r with r in (0, t0]."""
    assert decompose_time(2.5, 1.0) == (2, 0.5)
    assert decompose_time(3.0, 1.0) == (2, 1.0)
    assert decompose_time(0.0, 0.5) == (0, 0.0)
    with pytest.raises(ValueError):
        decompose_time(1.0, 1.5)


@seed(1)
@settings(max_examples=100, deadline=None)
@given(
    t=st.floats(min_value=0.0, max_value=100.0),
    t0=st.floats(min_value=0.01, max_value=1.0),
)
def test_decompose_time_property(t, t0):
    """Test the remainder bounds and reconstruction of t."""
    k, r = decompose_time(t, t0)
    assert k >= 0
    assert k * t0 + r == pytest.approx(t, abs=1e-9)
    if t > 0:
        assert 0 < r <= t0


def test_power_decomposition(naturals_evaluator, naturals_section):
    """Test T(t) = T(t0)^k T(r)."""
    for t in (0.35, 2.0, 7.3):
        assert check_power_decomposition(naturals_evaluator, naturals_section, t, 0.25) <= 1e-12


@pytest.mark.parametrize("name", sorted(BUILTINS))
def test_generator_error_halves_with_h(name):
    """Test first-order convergence of the difference quotient on compact support."""
    scenario, S, s = _builtin_setup(name)
    support = scenario.analyses.generator.support
    if support is not None:
        s = restrict_support(s, *support)
    errors = [generator_diff_quotient(S, s, h).error for h in (1e-2, 5e-3, 2.5e-3, 1.25e-3)]
    for coarse, fine in zip(errors, errors[1:]):
        assert 1.7 <= coarse / fine <= 2.3


def test_generator_requires_domain_and_positive_h(naturals):
    """Test rejection of h <= 0 and of sections outside the domain."""
    S = make_evaluator(("exp(x)",), naturals)
    s = build_section(("exp(-x)",), naturals)
    with pytest.raises(ValueError, match="domain"):
        generator_diff_quotient(S, s, 1e-3)
    with pytest.raises(ValueError, match="positive"):
        generator_diff_quotient(S, restrict_support(s, 0, 3), 0.0)


def test_t0_condition(naturals, rotation_grid, compact):
    """Test the t0 check and its growth flag."""
    rotation = check_t0_condition(make_evaluator(("i*x",), rotation_grid), 1.0)
    assert rotation.finite
    assert rotation.value == 1.0
    assert rotation.growth_flag is GrowthFlag.SATURATING

    growing = check_t0_condition(make_evaluator(("x",), naturals), 0.5)
    assert growing.value == pytest.approx(math.exp(50.0))
    assert growing.growth_flag is GrowthFlag.INCREASING

    assert check_t0_condition(make_evaluator(("x",), compact), 1.0).growth_flag is GrowthFlag.SATURATING
    with pytest.raises(ValueError):
        check_t0_condition(make_evaluator(("x",), compact), 0.0)


def test_uniform_continuity_witness_on_first_naturals():
    """Test δ >= 1 - 1/e at t_n = 1/n^2 for every n <= 10."""
    space = SpaceModel.truncated_naturals(10)
    witness = uniform_continuity_witness(make_evaluator(("i*x", "-x^2"), space))
    assert witness is not None
    assert witness.obstruction
    assert sorted(p.coordinate for p in witness.points) == list(range(1, 11))
    assert witness.delta >= 0.63
    for p in witness.points:
        assert p.t == pytest.approx(1 / p.coordinate**2)
        assert p.lower_bound >= witness.delta


def test_strong_profile_is_small_where_uniform_is_not(naturals_evaluator, naturals_section):
    """Test strong continuity without uniform continuity."""
    report = continuity_profiles(naturals_evaluator, naturals_section, [1e-7, 1e-6, 5e-6, 1e-2])
    assert all(v < 1e-3 for t, v in zip(report.t_grid, report.strong_profile) if t < 1e-5)
    assert report.kind is SemigroupKind.STRONGLY_CONTINUOUS
    assert report.witness is not None and report.witness.obstruction
    assert report.witness.delta >= 0.63


def test_uniform_profile_bound_for_bounded_symbol(compact):
    """Test ||T(t) - I|| <= e^{tB} - 1 for entries of modulus at most B."""
    S = make_evaluator(("5*exp(i*x)", "-3", "2*i"), compact)
    for t in np.linspace(0.0, 1.0, 100):
        assert uniform_profile(S, t) <= math.expm1(5.0 * t) + 1e-12
    assert semigroup_kind(S) is SemigroupKind.UNIFORMLY_CONTINUOUS


def test_constant_symbol_has_no_obstruction(compact):
    """Test that a witness with a repeated time is not an obstruction."""
    witness = uniform_continuity_witness(make_evaluator(("5",), compact))
    assert witness is not None
    assert witness.constant_time
    assert not witness.obstruction
    assert witness.points[0].t == pytest.approx(0.2)
    assert witness.delta == pytest.approx(math.e - 1)


def test_zero_symbol_has_no_witness(compact):
    """Test that φ = 0 yields no witness."""
    assert uniform_continuity_witness(make_evaluator(("0",), compact)) is None


def test_continuity_profiles_validate_grid(naturals_evaluator, naturals_section):
    """Test rejection of a non-increasing time grid."""
    with pytest.raises(ValueError):
        continuity_profiles(naturals_evaluator, naturals_section, [0.1, 0.1])


@pytest.mark.parametrize("name", sorted(BUILTINS))
def test_recover_phi_on_builtins(name):
    """Test recovery of φ from sampled multipliers."""
    _, S, _ = _builtin_setup(name)
    h_seq = (1e-2, 5e-3, 2.5e-3)
    samples = sample_semigroup(S, h_seq + (2e-2,))
    recovered = recover_phi_from_semigroup(samples, h_seq)
    assert np.max(np.abs(recovered.diag - S.phi.diag)) <= 1e-6


def test_recover_phi_across_branches(naturals):
    """Test that rotations past π are unwound from the smallest h."""
    S = make_evaluator(("i*x",), naturals)
    h_seq = (0.1, 0.05, 0.025)
    recovered = recover_phi_from_semigroup(sample_semigroup(S, h_seq), h_seq)
    assert np.allclose(recovered.diag, S.phi.diag, rtol=0, atol=1e-9)


def test_recover_phi_by_difference_quotients(compact):
    """Test extrapolated difference quotients on a small symbol."""
    S = make_evaluator(("0.1*x", "-0.05*i"), compact)
    h_seq = (1e-2, 5e-3, 2.5e-3)
    recovered = recover_phi_from_semigroup(sample_semigroup(S, h_seq), h_seq, method="difference")
    assert np.allclose(recovered.diag, S.phi.diag, rtol=0, atol=1e-8)


def test_recover_phi_detects_cocycle_violation(naturals_evaluator):
    """Test that corrupted samples are rejected."""
    h_seq = (1e-2, 5e-3, 2.5e-3)
    samples = sample_semigroup(naturals_evaluator, h_seq)
    samples[1e-2] = samples[1e-2].with_diag(samples[1e-2].diag * 1.01)
    with pytest.raises(CocycleViolationError) as excinfo:
        recover_phi_from_semigroup(samples, h_seq)
    assert excinfo.value.defect > 1e-8


def test_recover_phi_requires_samples_at_h(naturals_evaluator):
    """Test that every h of the sequence must be sampled."""
    samples = sample_semigroup(naturals_evaluator, (1e-2, 5e-3))
    with pytest.raises(ValueError, match="no sample"):
        recover_phi_from_semigroup(samples, (1e-2, 5e-3, 2.5e-3))
    with pytest.raises(ValueError):
        recover_phi_from_semigroup(samples, (5e-3, 1e-2))


def test_recover_phi_rejects_vanishing_multiplier(compact):
    """Test the log method on a multiplier that underflows to zero."""
    S = make_evaluator(("-1000000*x",), compact)
    with pytest.raises(RecoveryError):
        recover_phi_from_semigroup(sample_semigroup(S, (1e-2,)), (1e-2,))
