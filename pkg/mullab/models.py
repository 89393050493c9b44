"""Pydantic models for scenarios and run reports."""

from typing import Any, Dict, Iterator, List, Literal, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .base_space import SpaceModel
from .config import settings
from .errors import EvaluationError
from .lattice_core import NormSpec
from .phi_dsl import PhiSpec, evaluate, parse, uses_variable

Cell = Union[bool, int, float, str, None]


class _Spec(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


def _check_parses(entries: Tuple[str, ...]) -> Tuple[str, ...]:
    for text in entries:
        parse(text)
    return entries


class NormAnalysis(_Spec):
    """Operator norm, growth heuristic and a norm-attaining section."""


class InvertAnalysis(_Spec):
    tol: Optional[float] = Field(default=None, gt=0, description="Invertibility tolerance")


class SpectrumAnalysis(_Spec):
    points: Tuple[str, ...] = Field(
        default=(), description="λ values as constant expressions, e.g. \"0.5+0.5*i\""
    )
    re_range: Optional[Tuple[float, float, int]] = Field(
        default=None, description="Real axis of a λ box: start, stop, count"
    )
    im_range: Optional[Tuple[float, float, int]] = Field(
        default=None, description="Imaginary axis of a λ box: start, stop, count"
    )
    threshold: Optional[float] = Field(default=None, gt=0)
    pole_tol: Optional[float] = Field(default=None, gt=0)

    @field_validator("points")
    @classmethod
    def _constant_points(cls, value: Tuple[str, ...]) -> Tuple[str, ...]:
        for text in value:
            expr = parse(text)
            if uses_variable(expr):
                raise ValueError(f"λ point '{text}' must be a constant, not depend on x")
            try:
                lam = complex(evaluate(expr, 0.0))
            except EvaluationError as e:
                raise ValueError(f"λ point '{text}' cannot be evaluated: {e}") from e
            if not np.isfinite(lam):
                raise ValueError(f"λ point '{text}' is not finite")
        return value

    @model_validator(mode="after")
    def _check_grid(self) -> "SpectrumAnalysis":
        if (self.re_range is None) != (self.im_range is None):
            raise ValueError("a λ box needs both re_range and im_range")
        for axis in (self.re_range, self.im_range):
            if axis is not None and axis[2] < 1:
                raise ValueError("box axes need at least one point")
        if not self.points and self.re_range is None:
            raise ValueError("spectrum analysis needs points or a λ box")
        return self

    def grid(self) -> List[complex]:
        """The explicit λ grid: listed points first, then the box row by row."""
        lambdas = [complex(evaluate(parse(text), 0.0)) for text in self.points]
        if self.re_range is not None and self.im_range is not None:
            re = np.linspace(self.re_range[0], self.re_range[1], self.re_range[2])
            im = np.linspace(self.im_range[0], self.im_range[1], self.im_range[2])
            lambdas.extend(complex(a, b) for b in im for a in re)
        return lambdas


class EvolveAnalysis(_Spec):
    times: Tuple[float, ...] = Field(..., min_length=1)

    @field_validator("times")
    @classmethod
    def _nonnegative(cls, value: Tuple[float, ...]) -> Tuple[float, ...]:
        if any(t < 0 for t in value):
            raise ValueError("times must be nonnegative")
        return value


class ContinuityAnalysis(_Spec):
    times: Tuple[float, ...] = Field(..., min_length=1)

    @field_validator("times")
    @classmethod
    def _increasing(cls, value: Tuple[float, ...]) -> Tuple[float, ...]:
        if value[0] <= 0 or any(b <= a for a, b in zip(value, value[1:])):
            raise ValueError("times must be positive and strictly increasing")
        return value


class GeneratorAnalysis(_Spec):
    h: Tuple[float, ...] = Field(default=(1e-2, 5e-3, 2.5e-3, 1.25e-3), min_length=1)
    support: Optional[Tuple[int, int]] = Field(
        default=None, description="Restrict the section to these point indices first"
    )

    @field_validator("h")
    @classmethod
    def _positive(cls, value: Tuple[float, ...]) -> Tuple[float, ...]:
        if any(h <= 0 for h in value):
            raise ValueError("h values must be positive")
        return value


class T0Analysis(_Spec):
    t0: float = Field(default=1.0, gt=0, le=1)


class RecoverAnalysis(_Spec):
    h: Tuple[float, ...] = Field(default_factory=lambda: tuple(settings.recovery_h), min_length=1)
    method: Literal["log", "difference"] = "log"

    @field_validator("h")
    @classmethod
    def _decreasing(cls, value: Tuple[float, ...]) -> Tuple[float, ...]:
        if any(h <= 0 for h in value) or any(b >= a for a, b in zip(value, value[1:])):
            raise ValueError("h values must be positive and strictly decreasing")
        return value


class Analyses(_Spec):
    """Requested analyses; run order is the field order."""

    norm: Optional[NormAnalysis] = None
    invert: Optional[InvertAnalysis] = None
    spectrum: Optional[SpectrumAnalysis] = None
    evolve: Optional[EvolveAnalysis] = None
    continuity: Optional[ContinuityAnalysis] = None
    generator: Optional[GeneratorAnalysis] = None
    t0: Optional[T0Analysis] = None
    recover: Optional[RecoverAnalysis] = None

    def items(self) -> Iterator[Tuple[str, _Spec]]:
        for name in type(self).model_fields:
            params = getattr(self, name)
            if params is not None:
                yield name, params

    def requested(self) -> List[str]:
        return [name for name, _ in self.items()]


ANALYSIS_NAMES = tuple(Analyses.model_fields)
SECTION_ANALYSES = ("evolve", "continuity", "generator")


class SectionSpec(_Spec):
    entries: Tuple[str, ...] = Field(..., min_length=1, description="Coordinate expressions")
    support: Optional[Tuple[int, int]] = Field(
        default=None, description="Inclusive window of point indices carrying the section"
    )

    _check_entries = field_validator("entries")(_check_parses)


class OutputSpec(_Spec):
    format: Literal["csv", "json"] = "csv"
    path: Optional[str] = None


class Scenario(_Spec):
    """A fully validated experiment on one symbol φ."""

    name: str = Field(..., min_length=1)
    dimension: int = Field(..., ge=1, description="n, the dimension of E = C^n")
    norm: NormSpec = Field(default_factory=NormSpec.sup)
    space: SpaceModel
    phi: PhiSpec
    section: Optional[SectionSpec] = None
    analyses: Analyses = Field(default_factory=Analyses)
    output: OutputSpec = Field(default_factory=OutputSpec)

    @field_validator("norm", mode="before")
    @classmethod
    def _norm_from_label(cls, value: Any) -> Any:
        if isinstance(value, str):
            return NormSpec.from_label(value)
        return value

    @model_validator(mode="after")
    def _check_consistency(self) -> "Scenario":
        if self.phi.dimension != self.dimension:
            raise ValueError(f"phi has {self.phi.dimension} entries, dimension is {self.dimension}")
        if self.norm.weights is not None and len(self.norm.weights) != self.dimension:
            raise ValueError(f"norm has {len(self.norm.weights)} weights, dimension is {self.dimension}")
        if self.section is not None and len(self.section.entries) != self.dimension:
            raise ValueError(
                f"section has {len(self.section.entries)} entries, dimension is {self.dimension}"
            )
        missing = [name for name in SECTION_ANALYSES if getattr(self.analyses, name) is not None]
        if missing and self.section is None:
            raise ValueError(f"analyses {missing} need a [section]")
        windows = [self.section.support if self.section else None]
        if self.analyses.generator is not None:
            windows.append(self.analyses.generator.support)
        for window in windows:
            if window is not None and not 0 <= window[0] <= window[1] < self.space.num_points:
                raise ValueError(f"support window {window} outside the {self.space.num_points} points")
        return self


class AnalysisResult(BaseModel):
    """Tabular outcome of one analysis."""

    name: str
    columns: List[str]
    rows: List[List[Cell]] = Field(default_factory=list)
    summary: Dict[str, Cell] = Field(default_factory=dict)
    elapsed_seconds: float = Field(default=0.0, description="Wall clock; never written to files")


class RunReport(BaseModel):
    scenario: Scenario
    scenario_text: str = Field(..., description="Scenario echo in file format")
    tool_version: str
    results: List[AnalysisResult] = Field(default_factory=list)

    def result(self, name: str) -> AnalysisResult:
        for result in self.results:
            if result.name == name:
                return result
        raise KeyError(name)
