"""Discretized base spaces Ω and sections of C0(Ω, E)."""

import logging
import math
from enum import Enum
from typing import Any, List, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .config import settings
from .errors import DimensionMismatchError, SpaceMismatchError
from .lattice_core import ArrayModel, LatticeVector, NormSpec, as_frozen_array

logger = logging.getLogger(__name__)


class SpaceKind(str, Enum):
    FINITE = "finite"
    TRUNCATED_NATURALS = "truncated_naturals"
    INTERVAL_GRID = "interval_grid"


class SpaceModel(BaseModel):
    """
    A finite model of the locally compact space Ω.

    Finite sets are compact. Truncated naturals and interval grids stand for
    ℕ and [a, ∞) cut off at N and b; `unbounded` marks that the last points
    are the direction in which sections must vanish.
    """

    model_config = ConfigDict(frozen=True)

    kind: SpaceKind
    size: Optional[int] = Field(
        default=None, ge=1, description="Number of points (finite) or N (truncated_naturals)"
    )
    a: Optional[float] = Field(default=None, description="Left end of the interval grid")
    b: Optional[float] = Field(default=None, description="Right end of the interval grid")
    step: Optional[float] = Field(default=None, gt=0, description="Grid spacing")
    unbounded: bool = Field(default=True, description="Trailing points model infinity")
    labels: Optional[Tuple[str, ...]] = Field(default=None, description="Point labels of a finite set")

    @model_validator(mode="after")
    def _check_kind_parameters(self) -> "SpaceModel":
        if self.kind is SpaceKind.INTERVAL_GRID:
            if self.a is None or self.b is None or self.step is None:
                raise ValueError("interval_grid requires a, b and step")
            if not self.a < self.b:
                raise ValueError(f"interval_grid requires a < b, got a={self.a}, b={self.b}")
        elif self.size is None:
            raise ValueError(f"{self.kind.value} requires size")
        if self.labels is not None:
            if self.kind is not SpaceKind.FINITE:
                raise ValueError("only finite spaces carry point labels")
            if len(self.labels) != self.size:
                raise ValueError(f"expected {self.size} labels, got {len(self.labels)}")
        return self

    @classmethod
    def finite(cls, m: int, labels: Optional[Sequence[str]] = None) -> "SpaceModel":
        return cls(
            kind=SpaceKind.FINITE,
            size=m,
            unbounded=False,
            labels=tuple(labels) if labels is not None else None,
        )

    @classmethod
    def truncated_naturals(cls, n: int) -> "SpaceModel":
        return cls(kind=SpaceKind.TRUNCATED_NATURALS, size=n)

    @classmethod
    def interval_grid(
        cls, a: float, b: float, step: float, unbounded: bool = True
    ) -> "SpaceModel":
        return cls(kind=SpaceKind.INTERVAL_GRID, a=a, b=b, step=step, unbounded=unbounded)

    @property
    def num_points(self) -> int:
        if self.kind is SpaceKind.INTERVAL_GRID:
            # a, a + step, ... up to b; the slack absorbs rounding of (b - a) / step
            return int(math.floor((self.b - self.a) / self.step + 1e-9)) + 1
        return int(self.size)

    def __len__(self) -> int:
        return self.num_points

    @property
    def coordinates(self) -> np.ndarray:
        """Value of the variable x at each point, in point order."""
        if self.kind is SpaceKind.INTERVAL_GRID:
            return self.a + self.step * np.arange(self.num_points, dtype=np.float64)
        # ℕ models and finite sets are both indexed 1, 2, ...
        return np.arange(1, self.num_points + 1, dtype=np.float64)

    @property
    def point_labels(self) -> List[str]:
        if self.labels is not None:
            return list(self.labels)
        return [format(x, "g") for x in self.coordinates]

    @property
    def has_unbounded_direction(self) -> bool:
        return self.kind is not SpaceKind.FINITE and self.unbounded

    def tail_start(self, fraction: float) -> int:
        """First index of the trailing `fraction` of points (at least one point)."""
        count = max(1, int(math.ceil(fraction * self.num_points - 1e-9)))
        return self.num_points - min(count, self.num_points)


class Section(ArrayModel):
    """
    An element s of C0(Ω, E): one vector of E per point of Ω.

    `values` has shape (points, n). `support` is an inclusive window
    (first, last) of point indices outside of which the section is exactly 0.
    """

    space: SpaceModel
    values: np.ndarray
    norm_spec: NormSpec = Field(default_factory=NormSpec.sup)
    support: Optional[Tuple[int, int]] = None

    @field_validator("values", mode="before")
    @classmethod
    def _freeze_values(cls, value: Any) -> np.ndarray:
        return as_frozen_array(value, 2, "values")

    @model_validator(mode="after")
    def _check_shape(self) -> "Section":
        if self.values.shape[0] != self.space.num_points:
            raise DimensionMismatchError(
                f"section has {self.values.shape[0]} values, space has {self.space.num_points} points"
            )
        self.norm_spec.check_dimension(self.dimension)
        if self.support is not None:
            first, last = self.support
            if not 0 <= first <= last < self.space.num_points:
                raise ValueError(f"support window {self.support} outside the space")
            outside = np.ones(self.space.num_points, dtype=bool)
            outside[first : last + 1] = False
            if np.any(self.values[outside] != 0):
                raise ValueError(f"section is not zero outside its support window {self.support}")
        return self

    @classmethod
    def zeros(cls, space: SpaceModel, n: int, norm_spec: Optional[NormSpec] = None) -> "Section":
        return cls(
            space=space,
            values=np.zeros((space.num_points, n)),
            norm_spec=norm_spec or NormSpec.sup(),
        )

    @property
    def dimension(self) -> int:
        return int(self.values.shape[1])

    def __getitem__(self, index: int) -> LatticeVector:
        return LatticeVector(coords=self.values[index], norm_spec=self.norm_spec)

    def point_norms(self) -> np.ndarray:
        return np.asarray(self.norm_spec.evaluate(np.abs(self.values)))

    def check_compatible(self, other: "Section") -> None:
        if other.space != self.space:
            raise SpaceMismatchError("sections live on different spaces")
        if other.dimension != self.dimension or other.norm_spec != self.norm_spec:
            raise DimensionMismatchError(
                f"sections have dimensions {self.dimension} and {other.dimension}"
            )

    def with_values(self, values: np.ndarray, support: Optional[Tuple[int, int]] = None) -> "Section":
        return Section(space=self.space, values=values, norm_spec=self.norm_spec, support=support)

    def _joint_support(self, other: "Section") -> Optional[Tuple[int, int]]:
        if self.support is None or other.support is None:
            return None
        return (min(self.support[0], other.support[0]), max(self.support[1], other.support[1]))

    def __add__(self, other: "Section") -> "Section":
        self.check_compatible(other)
        return self.with_values(self.values + other.values, self._joint_support(other))

    def __sub__(self, other: "Section") -> "Section":
        self.check_compatible(other)
        return self.with_values(self.values - other.values, self._joint_support(other))

    def __mul__(self, scalar: Union[int, float, complex]) -> "Section":
        return self.with_values(complex(scalar) * self.values, self.support)

    __rmul__ = __mul__


class VanishingReport(BaseModel):
    """Outcome of the vanishing-at-infinity check on a truncated model."""

    vanishes: bool
    tail_sup: float = Field(..., ge=0.0, description="Largest point norm in the tail window")
    tail_start: int = Field(..., description="First point index of the tail window")
    tail_fraction: float
    epsilon: float


def section_norm(s: Section) -> float:
    """Sup norm max_x ||s(x)||_E."""
    return float(np.max(s.point_norms()))


def vanishing_check(
    s: Section,
    epsilon: Optional[float] = None,
    tail_fraction: Optional[float] = None,
) -> VanishingReport:
    """
    Check whether `s` vanishes at infinity on its truncated model.

    Finite spaces are compact and compactly supported sections lie in
    C_c(Ω, E); both always vanish. Otherwise the sup over the trailing
    window of points must not exceed epsilon.
    """
    epsilon = epsilon if epsilon is not None else settings.vanishing_epsilon
    tail_fraction = tail_fraction if tail_fraction is not None else settings.tail_fraction
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")

    if not s.space.has_unbounded_direction:
        return VanishingReport(
            vanishes=True,
            tail_sup=0.0,
            tail_start=s.space.num_points,
            tail_fraction=tail_fraction,
            epsilon=epsilon,
        )

    start = s.space.tail_start(tail_fraction)
    tail_sup = float(np.max(s.point_norms()[start:]))
    vanishes = s.support is not None or tail_sup <= epsilon
    if not vanishes:
        logger.debug(f"Section does not vanish: tail sup {tail_sup:.3e} > {epsilon:.1e}")
    return VanishingReport(
        vanishes=vanishes,
        tail_sup=tail_sup,
        tail_start=start,
        tail_fraction=tail_fraction,
        epsilon=epsilon,
    )


def tensor_section(f: Sequence[complex], z: LatticeVector, space: SpaceModel) -> Section:
    """The section f ⊗ z : x ↦ f(x) z."""
    f = np.asarray(f, dtype=np.complex128)
    if f.shape != (space.num_points,):
        raise DimensionMismatchError(
            f"scalar function has {f.size} values, space has {space.num_points} points"
        )
    if not np.all(np.isfinite(f)):
        raise ValueError("scalar function values must be finite")
    return Section(space=space, values=np.outer(f, z.coords), norm_spec=z.norm_spec)


def peak_function(space: SpaceModel, index: int) -> np.ndarray:
    """A continuous bump of height 1 supported at a single point of the model."""
    f = np.zeros(space.num_points)
    f[index] = 1.0
    return f


def restrict_support(s: Section, first: int, last: int) -> Section:
    """Compactly supported approximant of `s`: zero outside points first..last."""
    if not 0 <= first <= last < s.space.num_points:
        raise ValueError(f"support window ({first}, {last}) outside the space")
    values = np.zeros_like(s.values)
    values[first : last + 1] = s.values[first : last + 1]
    return s.with_values(values, (first, last))
