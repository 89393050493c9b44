"""The multiplication operator M_φ on C0(Ω, E)."""

import logging
from enum import Enum
from typing import Any, List, Literal, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .base_space import (
    Section,
    SpaceKind,
    SpaceModel,
    VanishingReport,
    peak_function,
    tensor_section,
    vanishing_check,
)
from .config import settings
from .errors import DimensionMismatchError, NotInvertibleError, SpaceMismatchError
from .lattice_core import ArrayModel, CentralOperator, LatticeVector, NormSpec, as_frozen_array
from .phi_dsl import PhiSpec

logger = logging.getLogger(__name__)


class PhiField(ArrayModel):
    """
    The symbol φ : Ω → Z(E) sampled on a space model.

    Row k of `diag` is the diagonal of the central operator φ(x_k).
    """

    space: SpaceModel
    diag: np.ndarray
    source: Optional[PhiSpec] = None

    @field_validator("diag", mode="before")
    @classmethod
    def _freeze_diag(cls, value: Any) -> np.ndarray:
        return as_frozen_array(value, 2, "diag")

    @model_validator(mode="after")
    def _check_shape(self) -> "PhiField":
        if self.diag.shape[0] != self.space.num_points:
            raise DimensionMismatchError(
                f"symbol has {self.diag.shape[0]} points, space has {self.space.num_points}"
            )
        if self.source is not None and self.source.dimension != self.dimension:
            raise DimensionMismatchError(
                f"source has {self.source.dimension} entries, field has dimension {self.dimension}"
            )
        return self

    @property
    def dimension(self) -> int:
        return int(self.diag.shape[1])

    def __getitem__(self, index: int) -> CentralOperator:
        return CentralOperator(diag=self.diag[index])

    @property
    def ops(self) -> List[CentralOperator]:
        return [self[k] for k in range(self.space.num_points)]

    def point_norms(self) -> np.ndarray:
        """central_op_norm(φ(x)) at every point."""
        return np.max(np.abs(self.diag), axis=1)

    @property
    def sampled_sup_norm(self) -> float:
        return float(np.max(self.point_norms()))

    def with_diag(self, diag: np.ndarray) -> "PhiField":
        return PhiField(space=self.space, diag=diag)


class MulOperator(BaseModel):
    """(M_φ, D(M_φ)) with the tolerance used to decide domain membership."""

    model_config = ConfigDict(frozen=True)

    phi: PhiField
    domain_tolerance: float = Field(default_factory=lambda: settings.domain_tolerance, gt=0)

    @property
    def space(self) -> SpaceModel:
        return self.phi.space

    @property
    def dimension(self) -> int:
        return self.phi.dimension

    def check_section(self, s: Section) -> None:
        if s.space != self.space:
            raise SpaceMismatchError("section and symbol live on different spaces")
        if s.dimension != self.dimension:
            raise DimensionMismatchError(
                f"section has dimension {s.dimension}, symbol has dimension {self.dimension}"
            )


class GrowthFlag(str, Enum):
    INCREASING = "increasing"
    SATURATING = "saturating"


class DomainReport(BaseModel):
    member: bool
    evidence: VanishingReport


class BoundednessReport(BaseModel):
    """Sampled norm plus a heuristic on whether the untruncated symbol grows."""

    sampled_norm: float = Field(..., ge=0.0)
    growth_flag: GrowthFlag


class ResolventReport(BaseModel):
    sup: float = Field(..., description="sup_x ||R(λ, φ(x))||, infinite at a pole")
    min_distance: float = Field(..., ge=0.0, description="Distance from λ to the entries of φ")


class SpectrumPoint(BaseModel):
    lambda_re: float
    lambda_im: float
    min_distance: float
    resolvent_sup: float
    classification: Literal["spectrum", "resolvent_set"]

    @property
    def lam(self) -> complex:
        return complex(self.lambda_re, self.lambda_im)


class SpectrumReport(BaseModel):
    """Classification of a λ-grid into spectrum and resolvent set."""

    points: List[SpectrumPoint]
    threshold: float
    pole_tol: float

    @property
    def lambda_grid(self) -> List[complex]:
        return [p.lam for p in self.points]

    @property
    def spectrum(self) -> List[complex]:
        return [p.lam for p in self.points if p.classification == "spectrum"]

    @property
    def resolvent_set(self) -> List[complex]:
        return [p.lam for p in self.points if p.classification == "resolvent_set"]


def apply_mulop(M: MulOperator, s: Section) -> Section:
    """(M_φ s)(x) = φ(x) s(x)."""
    M.check_section(s)
    return s.with_values(M.phi.diag * s.values, s.support)


def in_domain(M: MulOperator, s: Section, epsilon: Optional[float] = None) -> DomainReport:
    """Membership in the maximal domain: φ·s must still vanish at infinity."""
    epsilon = epsilon if epsilon is not None else M.domain_tolerance
    evidence = vanishing_check(apply_mulop(M, s), epsilon)
    return DomainReport(member=evidence.vanishes, evidence=evidence)


def operator_norm(M: MulOperator) -> float:
    """||M_φ|| = sup_x ||φ(x)||."""
    return M.phi.sampled_sup_norm


def is_bounded(M: MulOperator) -> BoundednessReport:
    """
    Sampled norm of M_φ with a growth heuristic.

    The flag is `increasing` when the per-point norm over the trailing half
    of the points is non-decreasing and grows by at least `growth_ratio`
    overall. Finite spaces are compact, so their symbols are always bounded.

    Raises:
        ValueError: If a non-compact model has fewer than 10 points
    """
    norms = M.phi.point_norms()
    sampled_norm = float(np.max(norms))
    if M.space.kind is SpaceKind.FINITE:
        return BoundednessReport(sampled_norm=sampled_norm, growth_flag=GrowthFlag.SATURATING)
    return BoundednessReport(sampled_norm=sampled_norm, growth_flag=growth_flag(norms))


def growth_flag(norms: np.ndarray) -> GrowthFlag:
    if norms.size < 10:
        raise ValueError(f"growth heuristic needs at least 10 points, got {norms.size}")
    tail = norms[norms.size // 2 :]
    monotone = bool(np.all(np.diff(tail) >= 0))
    grows = tail[-1] > 0 and tail[-1] >= settings.growth_ratio * tail[0]
    if monotone and grows:
        logger.warning(
            f"Per-point norm grows from {tail[0]:.3e} to {tail[-1]:.3e}; "
            "the untruncated symbol is likely unbounded"
        )
        return GrowthFlag.INCREASING
    return GrowthFlag.SATURATING


def _min_modulus(M: MulOperator) -> Tuple[float, int, int]:
    moduli = np.abs(M.phi.diag)
    point, entry = np.unravel_index(int(np.argmin(moduli)), moduli.shape)
    return float(moduli[point, entry]), int(point), int(entry)


def invert(M: MulOperator, tol: Optional[float] = None) -> MulOperator:
    """
    M_φ^-1 = M_{φ^-1}.

    Raises:
        NotInvertibleError: If some |φ_i(x)| <= tol, with the minimizing point and entry
    """
    tol = tol if tol is not None else settings.default_tol
    smallest, point, entry = _min_modulus(M)
    if smallest <= tol:
        logger.error(f"Symbol not invertible at point {point}, entry {entry}: |φ| = {smallest:.3e}")
        raise NotInvertibleError(
            f"multiplication operator has no bounded inverse: |φ_{entry}(x_{point})| = "
            f"{smallest:.3e} <= {tol:.1e}",
            entry=entry,
            modulus=smallest,
            point=point,
        )
    return MulOperator(phi=M.phi.with_diag(1.0 / M.phi.diag), domain_tolerance=M.domain_tolerance)


def _distances(M: MulOperator, lambdas: np.ndarray) -> np.ndarray:
    """Distance from each λ to the nearest entry of φ, shape (len(lambdas),)."""
    entries = M.phi.diag.ravel()
    result = np.empty(lambdas.shape[0])
    # chunked to bound memory on large grids
    chunk = max(1, 2_000_000 // max(1, entries.size))
    for start in range(0, lambdas.shape[0], chunk):
        block = lambdas[start : start + chunk]
        result[start : start + chunk] = np.min(np.abs(block[:, None] - entries[None, :]), axis=1)
    return result


def resolvent_sup(M: MulOperator, lam: complex, pole_tol: Optional[float] = None) -> ResolventReport:
    """sup_x ||R(λ, φ(x))|| = 1 / dist(λ, entries of φ), infinite at a pole."""
    pole_tol = pole_tol if pole_tol is not None else settings.pole_tol
    distance = float(_distances(M, np.array([complex(lam)]))[0])
    sup = float("inf") if distance <= pole_tol else 1.0 / distance
    return ResolventReport(sup=sup, min_distance=distance)


def spectrum_scan(
    M: MulOperator,
    grid: Sequence[complex],
    threshold: Optional[float] = None,
    pole_tol: Optional[float] = None,
) -> SpectrumReport:
    """Classify each λ as spectrum (pole or resolvent sup >= threshold) or resolvent set."""
    threshold = threshold if threshold is not None else settings.spectrum_threshold
    pole_tol = pole_tol if pole_tol is not None else settings.pole_tol
    if threshold <= 0:
        raise ValueError("threshold must be positive")

    lambdas = np.asarray(list(grid), dtype=np.complex128).reshape(-1)
    distances = _distances(M, lambdas)
    with np.errstate(divide="ignore"):
        sups = np.where(distances <= pole_tol, np.inf, 1.0 / distances)
    in_spectrum = (distances <= pole_tol) | (sups >= threshold)

    points = [
        SpectrumPoint(
            lambda_re=float(lam.real),
            lambda_im=float(lam.imag),
            min_distance=float(distance),
            resolvent_sup=float(sup),
            classification="spectrum" if hit else "resolvent_set",
        )
        for lam, distance, sup, hit in zip(lambdas, distances, sups, in_spectrum)
    ]
    logger.info(
        f"Spectrum scan over {len(points)} points: {int(np.sum(in_spectrum))} in spectrum"
    )
    return SpectrumReport(points=points, threshold=threshold, pole_tol=pole_tol)


def block_matrix(M: MulOperator) -> np.ndarray:
    """Dense block-diagonal matrix diag(φ(x_1), ..., φ(x_m)) of M_φ on a finite space."""
    if M.space.kind is not SpaceKind.FINITE:
        raise ValueError("block matrix representation requires a finite space")
    return np.diag(M.phi.diag.ravel())


def exact_spectrum(M: MulOperator) -> np.ndarray:
    """Eigenvalues of the block matrix, i.e. the union of the spectra of the φ(x_j)."""
    return np.linalg.eigvals(block_matrix(M))


def norm_attaining_section(M: MulOperator, norm_spec: Optional[NormSpec] = None) -> Section:
    """Peak function at the maximizing point tensored with the maximizing coordinate vector."""
    moduli = np.abs(M.phi.diag)
    point, entry = np.unravel_index(int(np.argmax(moduli)), moduli.shape)
    spec = norm_spec or NormSpec.sup()
    unit = np.zeros(M.dimension)
    unit[entry] = 1.0
    z = LatticeVector(coords=unit, norm_spec=spec)
    z = (1.0 / float(spec.evaluate(np.abs(z.coords)))) * z
    return tensor_section(peak_function(M.space, int(point)), z, M.space)
