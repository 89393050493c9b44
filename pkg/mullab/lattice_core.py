"""The lattice E = C^n with its lattice norms, and the centre Z(E) as diagonal operators."""

import logging
from enum import Enum
from typing import Any, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .config import settings
from .errors import DimensionMismatchError, LambdaInPointSpectrumError, NotInvertibleError

logger = logging.getLogger(__name__)

Scalar = Union[int, float, complex]


def as_frozen_array(value: Any, ndim: int, name: str) -> np.ndarray:
    """Copy `value` into a read-only complex array of the given rank."""
    array = np.array(value, dtype=np.complex128, copy=True)
    if array.ndim != ndim:
        raise ValueError(f"{name} must have {ndim} dimension(s), got {array.ndim}")
    if array.size == 0:
        raise ValueError(f"{name} must not be empty")
    array.setflags(write=False)
    return array


class ArrayModel(BaseModel):
    """Immutable pydantic model holding numpy arrays; equality is exact array equality."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    def __eq__(self, other: object) -> bool:
        if type(other) is not type(self):
            return NotImplemented
        for name in type(self).model_fields:
            mine, theirs = getattr(self, name), getattr(other, name)
            if isinstance(mine, np.ndarray) or isinstance(theirs, np.ndarray):
                if not np.array_equal(mine, theirs):
                    return False
            elif mine != theirs:
                return False
        return True


class NormKind(str, Enum):
    SUP = "sup"
    P = "p"
    WEIGHTED_SUP = "weighted_sup"


class NormSpec(BaseModel):
    """An absolute, monotone lattice norm on C^n."""

    model_config = ConfigDict(frozen=True)

    kind: NormKind = Field(default=NormKind.SUP, description="Norm family")
    p: Optional[float] = Field(default=None, ge=1.0, description="Exponent of the p-norm")
    weights: Optional[Tuple[float, ...]] = Field(
        default=None, description="Positive weights of the weighted sup norm"
    )

    @model_validator(mode="after")
    def _check_parameters(self) -> "NormSpec":
        if self.kind is NormKind.P:
            if self.p is None or not np.isfinite(self.p):
                raise ValueError("p-norm requires a finite exponent p >= 1")
        elif self.p is not None:
            raise ValueError(f"exponent p is only meaningful for the p-norm, not {self.kind.value}")
        if self.kind is NormKind.WEIGHTED_SUP:
            if not self.weights:
                raise ValueError("weighted_sup norm requires weights")
            if any(not w > 0 for w in self.weights):
                raise ValueError("weights must be strictly positive")
        elif self.weights is not None:
            raise ValueError(f"weights are only meaningful for weighted_sup, not {self.kind.value}")
        return self

    @classmethod
    def sup(cls) -> "NormSpec":
        return cls(kind=NormKind.SUP)

    @classmethod
    def lp(cls, p: float) -> "NormSpec":
        return cls(kind=NormKind.P, p=p)

    @classmethod
    def weighted_sup(cls, weights: Tuple[float, ...]) -> "NormSpec":
        return cls(kind=NormKind.WEIGHTED_SUP, weights=tuple(float(w) for w in weights))

    @classmethod
    def from_label(cls, label: str) -> "NormSpec":
        """Parse `sup`, `p:<p>` or `weighted_sup:<w1>,<w2>,...`."""
        kind, _, argument = label.strip().partition(":")
        kind = kind.strip()
        if kind == NormKind.SUP.value and not argument:
            return cls.sup()
        if kind == NormKind.P.value:
            return cls.lp(float(argument))
        if kind == NormKind.WEIGHTED_SUP.value:
            return cls.weighted_sup(tuple(float(w) for w in argument.split(",")))
        raise ValueError(f"Unknown norm label: '{label}'")

    @property
    def label(self) -> str:
        if self.kind is NormKind.P:
            return f"p:{self.p!r}"
        if self.kind is NormKind.WEIGHTED_SUP:
            return "weighted_sup:" + ",".join(repr(w) for w in self.weights or ())
        return NormKind.SUP.value

    def check_dimension(self, n: int) -> None:
        if self.weights is not None and len(self.weights) != n:
            raise DimensionMismatchError(
                f"weighted_sup norm has {len(self.weights)} weights, vectors have dimension {n}"
            )

    def evaluate(self, moduli: np.ndarray) -> Any:
        """Norm of nonnegative coordinate moduli along the last axis."""
        moduli = np.asarray(moduli, dtype=np.float64)
        self.check_dimension(moduli.shape[-1])
        if self.kind is NormKind.SUP:
            return np.max(moduli, axis=-1)
        if self.kind is NormKind.WEIGHTED_SUP:
            return np.max(np.asarray(self.weights) * moduli, axis=-1)
        # scaled to avoid overflow of |v_i|^p
        scale = np.max(moduli, axis=-1, keepdims=True)
        safe = np.where(scale > 0, scale, 1.0)
        total = np.sum((moduli / safe) ** self.p, axis=-1) ** (1.0 / self.p)
        return np.squeeze(scale, axis=-1) * total


class LatticeVector(ArrayModel):
    """An element z of E = C^n together with the norm it is measured in."""

    coords: np.ndarray
    norm_spec: NormSpec = Field(default_factory=NormSpec.sup)

    @field_validator("coords", mode="before")
    @classmethod
    def _freeze_coords(cls, value: Any) -> np.ndarray:
        return as_frozen_array(value, 1, "coords")

    @model_validator(mode="after")
    def _check_weights(self) -> "LatticeVector":
        self.norm_spec.check_dimension(self.dimension)
        return self

    @property
    def dimension(self) -> int:
        return int(self.coords.shape[0])

    def _check_combinable(self, other: "LatticeVector") -> None:
        if other.dimension != self.dimension or other.norm_spec != self.norm_spec:
            raise DimensionMismatchError(
                f"cannot combine vectors of dimension {self.dimension} ({self.norm_spec.label}) "
                f"and {other.dimension} ({other.norm_spec.label})"
            )

    def __add__(self, other: "LatticeVector") -> "LatticeVector":
        self._check_combinable(other)
        return LatticeVector(coords=self.coords + other.coords, norm_spec=self.norm_spec)

    def __sub__(self, other: "LatticeVector") -> "LatticeVector":
        self._check_combinable(other)
        return LatticeVector(coords=self.coords - other.coords, norm_spec=self.norm_spec)

    def __mul__(self, scalar: Scalar) -> "LatticeVector":
        return LatticeVector(coords=complex(scalar) * self.coords, norm_spec=self.norm_spec)

    __rmul__ = __mul__


class CentralOperator(ArrayModel):
    """A complex diagonal operator, i.e. an element of Z(E) for atomic E = C^n."""

    diag: np.ndarray

    @field_validator("diag", mode="before")
    @classmethod
    def _freeze_diag(cls, value: Any) -> np.ndarray:
        return as_frozen_array(value, 1, "diag")

    @classmethod
    def identity(cls, n: int) -> "CentralOperator":
        return cls(diag=np.ones(n))

    @property
    def dimension(self) -> int:
        return int(self.diag.shape[0])

    def _check_dimension(self, n: int) -> None:
        if n != self.dimension:
            raise DimensionMismatchError(
                f"operator has dimension {self.dimension}, operand has dimension {n}"
            )

    def __add__(self, other: "CentralOperator") -> "CentralOperator":
        self._check_dimension(other.dimension)
        return CentralOperator(diag=self.diag + other.diag)

    def __sub__(self, other: "CentralOperator") -> "CentralOperator":
        self._check_dimension(other.dimension)
        return CentralOperator(diag=self.diag - other.diag)

    def __mul__(self, other: Union["CentralOperator", Scalar]) -> "CentralOperator":
        """Composition with another central operator, or scaling by a number."""
        if isinstance(other, CentralOperator):
            self._check_dimension(other.dimension)
            return CentralOperator(diag=self.diag * other.diag)
        return CentralOperator(diag=complex(other) * self.diag)

    def __rmul__(self, scalar: Scalar) -> "CentralOperator":
        return CentralOperator(diag=complex(scalar) * self.diag)


def modulus(v: LatticeVector) -> LatticeVector:
    """Lattice modulus |v|, taken coordinatewise."""
    return LatticeVector(coords=np.abs(v.coords), norm_spec=v.norm_spec)


def vec_norm(v: LatticeVector) -> float:
    return float(v.norm_spec.evaluate(np.abs(v.coords)))


def apply_central(T: CentralOperator, v: LatticeVector) -> LatticeVector:
    T._check_dimension(v.dimension)
    return LatticeVector(coords=T.diag * v.coords, norm_spec=v.norm_spec)


def central_op_norm(T: CentralOperator) -> float:
    """
    Operator norm of a diagonal operator.

    For absolute monotone norms the infimum of all λ with |Tz| <= λ|z| is
    max_i |diag_i|, attained on the coordinate vector of the largest entry.
    """
    return float(np.max(np.abs(T.diag)))


def central_exp(T: CentralOperator) -> CentralOperator:
    return CentralOperator(diag=np.exp(T.diag))


def central_inverse(T: CentralOperator, tol: Optional[float] = None) -> CentralOperator:
    """
    Entrywise reciprocal of a diagonal operator.

    Raises:
        NotInvertibleError: If some |diag_i| <= tol
    """
    tol = tol if tol is not None else settings.default_tol
    moduli = np.abs(T.diag)
    entry = int(np.argmin(moduli))
    if moduli[entry] <= tol:
        raise NotInvertibleError(
            f"central operator is not invertible: |diag[{entry}]| = {moduli[entry]:.3e} <= {tol:.1e}",
            entry=entry,
            modulus=float(moduli[entry]),
        )
    return CentralOperator(diag=1.0 / T.diag)


def resolvent_central(
    T: CentralOperator, lam: complex, tol: Optional[float] = None
) -> CentralOperator:
    """
    Resolvent R(λ, T) = (λ - T)^-1, entrywise 1 / (λ - diag_i).

    Raises:
        LambdaInPointSpectrumError: If λ lies within tol of a diagonal entry
    """
    tol = tol if tol is not None else settings.default_tol
    gaps = complex(lam) - T.diag
    distances = np.abs(gaps)
    entry = int(np.argmin(distances))
    if distances[entry] <= tol:
        raise LambdaInPointSpectrumError(
            f"lambda = {complex(lam)} is within {tol:.1e} of diagonal entry {entry}",
            lam=complex(lam),
            entry=entry,
        )
    return CentralOperator(diag=1.0 / gaps)
