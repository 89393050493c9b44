"""Runs the analyses requested by a scenario."""

import logging
import time
from typing import Callable, Dict, List, NamedTuple, Optional

import numpy as np

from .base_space import Section, SpaceKind, restrict_support, section_norm
from .config import settings
from .errors import AnalysisError, LabError, NotInvertibleError
from .models import (
    AnalysisResult,
    ContinuityAnalysis,
    EvolveAnalysis,
    GeneratorAnalysis,
    InvertAnalysis,
    NormAnalysis,
    RecoverAnalysis,
    RunReport,
    Scenario,
    SpectrumAnalysis,
    T0Analysis,
)
from .mulop import (
    MulOperator,
    apply_mulop,
    exact_spectrum,
    invert,
    is_bounded,
    norm_attaining_section,
    operator_norm,
    spectrum_scan,
)
from .phi_dsl import build_phi, build_section
from .scenarios import dump_scenario
from .semigroup import (
    SemigroupEvaluator,
    check_semigroup_law,
    check_t0_condition,
    continuity_profiles,
    evolve,
    generator_diff_quotient,
    norm_by_blocks,
    recover_phi_from_semigroup,
    sample_semigroup,
    semigroup_norm,
)

logger = logging.getLogger(__name__)


class _Context(NamedTuple):
    scenario: Scenario
    operator: MulOperator
    evaluator: SemigroupEvaluator
    section: Optional[Section]


def _norm(ctx: _Context, params: NormAnalysis) -> AnalysisResult:
    M = ctx.operator
    report = is_bounded(M)
    moduli = np.abs(M.phi.diag)
    point, entry = np.unravel_index(int(np.argmax(moduli)), moduli.shape)
    attaining = norm_attaining_section(M, ctx.scenario.norm)
    attained = section_norm(apply_mulop(M, attaining))
    return AnalysisResult(
        name="norm",
        columns=["operator_norm", "growth_flag", "argmax_point", "argmax_entry", "attained_norm"],
        rows=[[operator_norm(M), report.growth_flag.value, int(point), int(entry), attained]],
        summary={
            "operator_norm": operator_norm(M),
            "growth_flag": report.growth_flag.value,
            "attained_norm": attained,
        },
    )


def _invert(ctx: _Context, params: InvertAnalysis) -> AnalysisResult:
    M = ctx.operator
    min_modulus = float(np.min(np.abs(M.phi.diag)))
    columns = ["invertible", "inverse_norm", "point", "entry", "min_modulus"]
    try:
        inverse = invert(M, params.tol)
    except NotInvertibleError as e:
        logger.warning(f"Symbol is not invertible: {e}")
        return AnalysisResult(
            name="invert",
            columns=columns,
            rows=[[False, None, e.point, e.entry, e.modulus]],
            summary={"invertible": False, "inverse_norm": None, "min_modulus": e.modulus},
        )
    inverse_norm = operator_norm(inverse)
    return AnalysisResult(
        name="invert",
        columns=columns,
        rows=[[True, inverse_norm, None, None, min_modulus]],
        summary={"invertible": True, "inverse_norm": inverse_norm, "min_modulus": min_modulus},
    )


def _spectrum(ctx: _Context, params: SpectrumAnalysis) -> AnalysisResult:
    M = ctx.operator
    report = spectrum_scan(M, params.grid(), params.threshold, params.pole_tol)
    rows = [
        [p.lambda_re, p.lambda_im, p.min_distance, p.resolvent_sup, p.classification]
        for p in report.points
    ]
    summary: Dict[str, object] = {
        "points": len(report.points),
        "spectrum_count": len(report.spectrum),
        "resolvent_count": len(report.resolvent_set),
        "threshold": report.threshold,
    }
    if M.space.kind is SpaceKind.FINITE:
        eigenvalues = np.round(exact_spectrum(M), 9)
        summary["distinct_eigenvalues"] = int(np.unique(eigenvalues).size)
    return AnalysisResult(
        name="spectrum",
        columns=["lambda_re", "lambda_im", "min_distance", "resolvent_sup", "class"],
        rows=rows,
        summary=summary,
    )


def _evolve(ctx: _Context, params: EvolveAnalysis) -> AnalysisResult:
    S, s = ctx.evaluator, ctx.section
    rows = []
    for t in params.times:
        evolved = evolve(S, s, t)
        rows.append(
            [
                t,
                semigroup_norm(S, t),
                norm_by_blocks(S, t),
                section_norm(evolved),
                check_semigroup_law(S, s, t / 2, t / 2),
            ]
        )
    return AnalysisResult(
        name="evolve",
        columns=["t", "semigroup_norm", "block_norm", "section_norm", "law_defect"],
        rows=rows,
        summary={
            "growth_bound": S.growth_bound.w,
            "initial_norm": section_norm(s),
            "max_law_defect": max(row[4] for row in rows),
        },
    )


def _continuity(ctx: _Context, params: ContinuityAnalysis) -> AnalysisResult:
    report = continuity_profiles(ctx.evaluator, ctx.section, params.times)
    rows = [
        [t, strong, uniform]
        for t, strong, uniform in zip(report.t_grid, report.strong_profile, report.uniform_profile)
    ]
    witness = report.witness
    return AnalysisResult(
        name="continuity",
        columns=["t", "strong_profile", "uniform_profile"],
        rows=rows,
        summary={
            "kind": report.kind.value,
            "witness_points": len(witness.points) if witness else 0,
            "witness_delta": witness.delta if witness else None,
            "obstruction": witness.obstruction if witness else False,
        },
    )


def _generator(ctx: _Context, params: GeneratorAnalysis) -> AnalysisResult:
    s = ctx.section
    if params.support is not None:
        s = restrict_support(s, *params.support)
    rows: List[list] = []
    previous = None
    for h in params.h:
        report = generator_diff_quotient(ctx.evaluator, s, h)
        ratio = previous / report.error if previous is not None and report.error > 0 else None
        rows.append([h, report.error, ratio])
        previous = report.error
    return AnalysisResult(
        name="generator",
        columns=["h", "error", "ratio"],
        rows=rows,
        summary={"first_error": rows[0][1], "last_error": rows[-1][1]},
    )


def _t0(ctx: _Context, params: T0Analysis) -> AnalysisResult:
    report = check_t0_condition(ctx.evaluator, params.t0)
    return AnalysisResult(
        name="t0",
        columns=["t0", "value", "finite", "growth_flag"],
        rows=[[report.t0, report.value, report.finite, report.growth_flag.value]],
        summary={"value": report.value, "finite": report.finite, "growth_flag": report.growth_flag.value},
    )


def _recover(ctx: _Context, params: RecoverAnalysis) -> AnalysisResult:
    S = ctx.evaluator
    h_seq = list(params.h)
    samples = sample_semigroup(S, h_seq + [2 * h_seq[0]])
    recovered = recover_phi_from_semigroup(samples, h_seq, method=params.method)
    error = float(np.max(np.abs(recovered.diag - S.phi.diag)))
    scale = max(S.phi.sampled_sup_norm, 1.0)
    return AnalysisResult(
        name="recover",
        columns=["method", "levels", "max_abs_error", "relative_error"],
        rows=[[params.method, len(h_seq), error, error / scale]],
        summary={"method": params.method, "max_abs_error": error, "relative_error": error / scale},
    )


_HANDLERS: Dict[str, Callable[[_Context, object], AnalysisResult]] = {
    "norm": _norm,
    "invert": _invert,
    "spectrum": _spectrum,
    "evolve": _evolve,
    "continuity": _continuity,
    "generator": _generator,
    "t0": _t0,
    "recover": _recover,
}


def _prepare(scenario: Scenario) -> _Context:
    try:
        phi = build_phi(scenario.phi, scenario.space)
    except LabError as e:
        raise AnalysisError("phi", e) from e
    operator = MulOperator(phi=phi)
    section = None
    if scenario.section is not None:
        try:
            section = build_section(
                scenario.section.entries, scenario.space, scenario.norm, scenario.section.support
            )
        except LabError as e:
            raise AnalysisError("section", e) from e
    return _Context(scenario, operator, SemigroupEvaluator.from_operator(operator), section)


def run(scenario: Scenario) -> RunReport:
    """
    Run every requested analysis in order.

    Args:
        scenario: A validated scenario

    Returns:
        The report with one result per analysis

    Raises:
        AnalysisError: If building φ or the section fails, or an analysis fails
    """
    logger.info(f"Running scenario '{scenario.name}'")
    ctx = _prepare(scenario)
    results = []
    for name, params in scenario.analyses.items():
        start = time.perf_counter()
        try:
            result = _HANDLERS[name](ctx, params)
        except (LabError, ValueError) as e:
            logger.error(f"Analysis '{name}' failed: {e}")
            raise AnalysisError(name, e) from e
        result.elapsed_seconds = time.perf_counter() - start
        logger.info(f"Analysis '{name}' finished in {result.elapsed_seconds:.3f}s")
        results.append(result)
    return RunReport(
        scenario=scenario,
        scenario_text=dump_scenario(scenario),
        tool_version=settings.app_version,
        results=results,
    )
