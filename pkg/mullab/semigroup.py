"""The multiplication semigroup T_φ(t) = e^{tφ(·)} and its diagnostics."""

import logging
import math
from enum import Enum
from typing import Any, Dict, List, Literal, Mapping, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field, field_validator

from .base_space import Section, SpaceKind, section_norm
from .config import settings
from .errors import CocycleViolationError, DimensionMismatchError, RecoveryError
from .lattice_core import ArrayModel, CentralOperator, central_exp, central_op_norm
from .mulop import (
    GrowthFlag,
    MulOperator,
    PhiField,
    apply_mulop,
    growth_flag,
    in_domain,
    is_bounded,
)

logger = logging.getLogger(__name__)


class GrowthBound(BaseModel):
    """w = max over points and entries of Re φ_i(x); ||T(t)|| = e^{wt}."""

    w: float

    def norm_at(self, t: float) -> float:
        with np.errstate(over="ignore"):
            return float(np.exp(t * self.w))


class SemigroupEvaluator(ArrayModel):
    """Evaluates T_φ(t) with the per-point growth rates w(x) = max_i Re φ_i(x) cached."""

    operator: MulOperator
    growth_rates: np.ndarray

    @field_validator("growth_rates", mode="before")
    @classmethod
    def _freeze_rates(cls, value: Any) -> np.ndarray:
        rates = np.array(value, dtype=np.float64, copy=True)
        rates.setflags(write=False)
        return rates

    @classmethod
    def from_operator(cls, M: MulOperator) -> "SemigroupEvaluator":
        return cls(operator=M, growth_rates=np.max(M.phi.diag.real, axis=1))

    @property
    def phi(self) -> PhiField:
        return self.operator.phi

    @property
    def growth_bound(self) -> GrowthBound:
        return GrowthBound(w=float(np.max(self.growth_rates)))

    def multipliers(self, t: float) -> np.ndarray:
        """e^{tφ(x)} at every point, as diagonals of shape (points, n)."""
        with np.errstate(over="ignore", invalid="ignore"):
            return np.exp(t * self.phi.diag)


class T0Report(BaseModel):
    t0: float
    finite: bool
    value: float
    growth_flag: GrowthFlag


class DiffQuotientReport(BaseModel):
    h: float
    quotient: Section
    error: float = Field(..., ge=0.0)


class WitnessPoint(BaseModel):
    point: int
    coordinate: float
    t: float = Field(..., gt=0.0, description="t_n = 1 / ||φ(x_n)||")
    lower_bound: float = Field(..., ge=0.0, description="||e^{t_n φ(x_n)} - I||")


class ContinuityWitness(BaseModel):
    """Points x_n and times t_n along which ||T(t_n) - I|| stays above δ."""

    points: List[WitnessPoint]
    delta: float
    constant_time: bool = Field(
        ..., description="All t_n coincide; the symbol is bounded and there is no obstruction"
    )
    growing: bool = Field(
        default=True, description="Per-point norm of the symbol is flagged as increasing"
    )

    @property
    def obstruction(self) -> bool:
        return self.growing and not self.constant_time


class SemigroupKind(str, Enum):
    UNIFORMLY_CONTINUOUS = "uniformly_continuous"
    STRONGLY_CONTINUOUS = "strongly_continuous"


class ContinuityReport(BaseModel):
    t_grid: List[float]
    strong_profile: List[float]
    uniform_profile: List[float]
    witness: Optional[ContinuityWitness] = None
    kind: SemigroupKind


def _check_time(t: float) -> None:
    if not t >= 0:
        raise ValueError(f"time must be nonnegative, got {t}")


def evolve(S: SemigroupEvaluator, s: Section, t: float) -> Section:
    """T_φ(t)s = e^{tφ(·)} s(·); T_φ(0) = I exactly."""
    _check_time(t)
    S.operator.check_section(s)
    if t == 0:
        return s
    with np.errstate(invalid="ignore"):
        product = S.multipliers(t) * s.values
    # an overflowing multiplier still maps a zero value to zero
    return s.with_values(np.where(s.values == 0, 0, product), s.support)


def semigroup_norm(S: SemigroupEvaluator, t: float) -> float:
    """||T_φ(t)|| = sup_x ||e^{tφ(x)}|| = e^{t·w}."""
    _check_time(t)
    return S.growth_bound.norm_at(t)


def norm_by_blocks(S: SemigroupEvaluator, t: float) -> float:
    """max_j ||e^{tφ(x_j)}||, evaluated operator by operator in Z(E)."""
    _check_time(t)
    return max(central_op_norm(central_exp(float(t) * op)) for op in S.phi.ops)


def check_t0_condition(S: SemigroupEvaluator, t0: float) -> T0Report:
    """
    Evaluate sup_x ||e^{t0 φ(x)}|| for some t0 in (0, 1].

    On a truncated model the value is always a finite max; the growth flag of
    the positive part of Re φ tells whether it would blow up without truncation.
    """
    if not 0 < t0 <= 1:
        raise ValueError(f"t0 must lie in (0, 1], got {t0}")
    value = semigroup_norm(S, t0)
    if S.phi.space.kind is SpaceKind.FINITE:
        flag = GrowthFlag.SATURATING
    else:
        flag = growth_flag(np.maximum(S.growth_rates, 0.0))
    return T0Report(t0=t0, finite=math.isfinite(value), value=value, growth_flag=flag)


def check_semigroup_law(S: SemigroupEvaluator, s: Section, t1: float, t2: float) -> float:
    """Defect ||T(t1 + t2)s - T(t1)T(t2)s||."""
    combined = evolve(S, s, t1 + t2)
    stepped = evolve(S, evolve(S, s, t2), t1)
    return section_norm(combined - stepped)


def decompose_time(t: float, t0: float) -> Tuple[int, float]:
    """Write t = k·t0 + r with r in (0, t0] (k = 0, r = 0 for t = 0)."""
    _check_time(t)
    if not 0 < t0 <= 1:
        raise ValueError(f"t0 must lie in (0, 1], got {t0}")
    if t == 0:
        return 0, 0.0
    k = max(0, math.ceil(t / t0) - 1)
    r = t - k * t0
    if r <= 0:
        k, r = k - 1, r + t0
    elif r > t0:
        k, r = k + 1, r - t0
    return k, r


def check_power_decomposition(S: SemigroupEvaluator, s: Section, t: float, t0: float) -> float:
    """Defect ||T(t)s - T(t0)^k T(r)s|| for t = k·t0 + r."""
    k, r = decompose_time(t, t0)
    stepped = evolve(S, s, r)
    for _ in range(k):
        stepped = evolve(S, stepped, t0)
    return section_norm(evolve(S, s, t) - stepped)


def generator_diff_quotient(S: SemigroupEvaluator, s: Section, h: float) -> DiffQuotientReport:
    """
    Difference quotient (T(h)s - s) / h and its distance to M_φ s.

    Raises:
        ValueError: If h <= 0 or s is not in the domain of M_φ
    """
    if not h > 0:
        raise ValueError(f"h must be positive, got {h}")
    if not in_domain(S.operator, s).member:
        raise ValueError("section is not in the domain of the generator")
    quotient = (evolve(S, s, h) - s) * (1.0 / h)
    error = section_norm(quotient - apply_mulop(S.operator, s))
    return DiffQuotientReport(h=h, quotient=quotient, error=error)


def uniform_profile(S: SemigroupEvaluator, t: float) -> float:
    """||T(t) - I|| = max over points and entries of |e^{tφ_i(x)} - 1|."""
    return float(np.max(np.abs(S.multipliers(t) - 1.0)))


def uniform_continuity_witness(
    S: SemigroupEvaluator,
    limit: Optional[int] = None,
    cutoff: Optional[float] = None,
) -> Optional[ContinuityWitness]:
    """
    Points x_n of largest ||φ(x_n)|| with t_n = 1/||φ(x_n)|| and the bound ||e^{t_n φ(x_n)} - I||.

    Returns None when every bound is below `cutoff`.
    """
    limit = limit if limit is not None else settings.witness_limit
    cutoff = cutoff if cutoff is not None else settings.witness_cutoff
    norms = S.phi.point_norms()
    coordinates = S.phi.space.coordinates
    order = np.argsort(-norms, kind="stable")[:limit]

    identity = CentralOperator.identity(S.phi.dimension)
    points = []
    for k in order:
        if norms[k] == 0:
            continue
        t = 1.0 / float(norms[k])
        bound = central_op_norm(central_exp(t * S.phi[int(k)]) - identity)
        points.append(
            WitnessPoint(point=int(k), coordinate=float(coordinates[k]), t=t, lower_bound=bound)
        )

    if not points or all(p.lower_bound < cutoff for p in points):
        logger.info("No uniform-continuity obstruction found")
        return None
    times = np.array([p.t for p in points])
    constant_time = bool(np.allclose(times, times[0], rtol=1e-12, atol=0.0))
    return ContinuityWitness(
        points=points,
        delta=min(p.lower_bound for p in points),
        constant_time=constant_time,
        growing=is_bounded(S.operator).growth_flag is GrowthFlag.INCREASING,
    )


def semigroup_kind(S: SemigroupEvaluator) -> SemigroupKind:
    """Uniformly continuous iff the generator is bounded (judged on the truncation)."""
    if is_bounded(S.operator).growth_flag is GrowthFlag.SATURATING:
        return SemigroupKind.UNIFORMLY_CONTINUOUS
    return SemigroupKind.STRONGLY_CONTINUOUS


def continuity_profiles(
    S: SemigroupEvaluator, s: Section, t_grid: Sequence[float]
) -> ContinuityReport:
    """Strong profile ||T(t)s - s|| and uniform profile ||T(t) - I|| over t_grid."""
    times = [float(t) for t in t_grid]
    if not times or any(t <= 0 for t in times) or any(b <= a for a, b in zip(times, times[1:])):
        raise ValueError("t_grid must be positive and strictly increasing")
    strong = [section_norm(evolve(S, s, t) - s) for t in times]
    uniform = [uniform_profile(S, t) for t in times]
    return ContinuityReport(
        t_grid=times,
        strong_profile=strong,
        uniform_profile=uniform,
        witness=uniform_continuity_witness(S),
        kind=semigroup_kind(S),
    )


def _neville_at_zero(hs: Sequence[float], values: Sequence[np.ndarray]) -> np.ndarray:
    """Polynomial extrapolation of values(h) to h = 0 (Richardson over the whole sequence)."""
    table = [np.asarray(v) for v in values]
    for level in range(1, len(hs)):
        table = [
            (hs[i] * table[i + 1] - hs[i + level] * table[i]) / (hs[i] - hs[i + level])
            for i in range(len(table) - 1)
        ]
    return table[0]


def _lookup(samples: Dict[float, np.ndarray], t: float) -> Optional[np.ndarray]:
    for key, value in samples.items():
        if math.isclose(key, t, rel_tol=1e-12, abs_tol=1e-15):
            return value
    return None


def sample_semigroup(S: SemigroupEvaluator, times: Sequence[float]) -> Dict[float, PhiField]:
    """Multiplier fields m_t = e^{tφ} for each t."""
    return {float(t): S.phi.with_diag(S.multipliers(float(t))) for t in times}


def recover_phi_from_semigroup(
    samples: Mapping[float, PhiField],
    h_seq: Optional[Sequence[float]] = None,
    method: Literal["log", "difference"] = "log",
    tol: Optional[float] = None,
) -> PhiField:
    """
    Recover φ(x) = lim (m_h(x) - 1) / h from pointwise semigroup samples.

    The `log` method uses log(m_h)/h, continued on the branch fixed by the
    smallest h; `difference` uses the quotient as written. Either is
    extrapolated to h = 0 over h_seq.

    Raises:
        CocycleViolationError: If m_{t+s} != m_t m_s beyond tol for sampled t, s
        RecoveryError: If the recovered field does not reproduce the samples
    """
    h_seq = tuple(float(h) for h in (h_seq or settings.recovery_h))
    tol = tol if tol is not None else settings.cocycle_tol
    if not h_seq or any(h <= 0 for h in h_seq) or any(b >= a for a, b in zip(h_seq, h_seq[1:])):
        raise ValueError("h_seq must be positive and strictly decreasing")
    if not samples:
        raise ValueError("no semigroup samples given")

    fields = list(samples.values())
    space = fields[0].space
    for field in fields:
        if field.space != space or field.dimension != fields[0].dimension:
            raise DimensionMismatchError("samples live on different spaces or dimensions")
    multipliers = {float(t): field.diag for t, field in samples.items()}

    times = sorted(multipliers)
    for i, t in enumerate(times):
        for s in times[i:]:
            target = _lookup(multipliers, t + s)
            if target is None:
                continue
            product = multipliers[t] * multipliers[s]
            defect = float(np.max(np.abs(target - product) / (1.0 + np.abs(target))))
            if defect > tol:
                logger.error(f"Cocycle violated at t={t}, s={s}: defect {defect:.3e}")
                raise CocycleViolationError(
                    f"samples violate m(t+s) = m(t)m(s) at t={t}, s={s} (defect {defect:.3e})",
                    t=t,
                    s=s,
                    defect=defect,
                )

    sampled = []
    for h in h_seq:
        m = _lookup(multipliers, h)
        if m is None:
            raise ValueError(f"no sample at h = {h}")
        sampled.append(m)

    if method == "log":
        if any(np.any(m == 0) for m in sampled):
            raise RecoveryError("a sampled multiplier vanishes; its logarithm is undefined")
        reference = np.log(sampled[-1]) / h_seq[-1]
        quotients = []
        for h, m in zip(h_seq, sampled):
            log_m = np.log(m)
            winding = np.round((h * reference - log_m).imag / (2 * np.pi))
            quotients.append((log_m + 2j * np.pi * winding) / h)
    else:
        quotients = [(m - 1.0) / h for h, m in zip(h_seq, sampled)]

    estimate = _neville_at_zero(h_seq, quotients)
    reproduction = max(
        float(np.max(np.abs(np.exp(h * estimate) - m))) for h, m in zip(h_seq, sampled)
    )
    if reproduction > tol:
        raise RecoveryError(
            f"recovered symbol reproduces the samples only to {reproduction:.3e} (> {tol:.1e})"
        )
    logger.info(f"Recovered symbol from {len(samples)} samples; reproduction error {reproduction:.3e}")
    return PhiField(space=space, diag=estimate)
