"""Scenario files: loading, dumping and the built-in examples."""

import configparser
import csv
import logging
import re
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

from pydantic import ValidationError

from .base_space import SpaceModel
from .errors import ConfigError
from .lattice_core import NormSpec
from .models import (
    ANALYSIS_NAMES,
    Analyses,
    ContinuityAnalysis,
    EvolveAnalysis,
    GeneratorAnalysis,
    InvertAnalysis,
    NormAnalysis,
    RecoverAnalysis,
    Scenario,
    SectionSpec,
    SpectrumAnalysis,
    T0Analysis,
)
from .phi_dsl import PhiSpec
from .templates import get_scenario_text

logger = logging.getLogger(__name__)

ANALYSIS_PREFIX = "analysis."
_BODY_SECTIONS = ("space", "phi", "section", "output")
_LIST_KEYS = {"entries", "labels", "support", "times", "h", "points", "re_range", "im_range"}

_HEADER = re.compile(r"^\[([^\]]+)\]")
_KEY = re.compile(r"^([^=:#;\s]+)\s*[=:]")


def _split(value: str) -> List[str]:
    """Comma-separated values; double quotes protect commas inside an item."""
    rows = list(csv.reader([value], skipinitialspace=True))
    if not rows:
        return []
    return [item.strip() for item in rows[0]]


def _convert(items: Dict[str, str]) -> Dict[str, Any]:
    converted: Dict[str, Any] = {}
    for key, value in items.items():
        parts = _split(value)
        if key in _LIST_KEYS:
            converted[key] = parts
        else:
            converted[key] = parts[0] if len(parts) == 1 else value.strip()
    return converted


def _line_index(text: str) -> Dict[Tuple[str, Optional[str]], int]:
    """1-based line of every section header (key None) and every key."""
    lines: Dict[Tuple[str, Optional[str]], int] = {}
    section = None
    for number, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        header = _HEADER.match(stripped)
        if header:
            section = header.group(1).strip()
            lines.setdefault((section, None), number)
            continue
        key = _KEY.match(stripped)
        if key and section is not None:
            lines.setdefault((section, key.group(1)), number)
    return lines


def _locate(loc: Sequence[Union[int, str]], lines: Dict[Tuple[str, Optional[str]], int]) -> Optional[int]:
    parts = [str(part) for part in loc]
    if not parts:
        return None
    if parts[0] == "analyses" and len(parts) > 1:
        section = ANALYSIS_PREFIX + parts[1]
        key = parts[2] if len(parts) > 2 else None
    elif parts[0] in _BODY_SECTIONS:
        section = parts[0]
        key = parts[1] if len(parts) > 1 else None
    else:
        section, key = "scenario", parts[0]
    return lines.get((section, key)) or lines.get((section, None))


def loads_scenario(text: str, source: str = "<string>") -> Scenario:
    """
    Parse and fully validate a scenario given as INI text.

    Args:
        text: Scenario file contents
        source: Name used in error messages

    Returns:
        A validated scenario with every expression already parsed

    Raises:
        ConfigError: On malformed INI, unknown sections or invalid values
        ExpressionSyntaxError: If a symbol, section or λ expression does not parse
    """
    parser = configparser.ConfigParser(interpolation=None, comment_prefixes=("#", ";"))
    parser.optionxform = str  # type: ignore[assignment]
    try:
        parser.read_string(text, source=source)
    except configparser.MissingSectionHeaderError as e:
        raise ConfigError(f"{source}: expected a [section] header", line=e.lineno) from e
    except configparser.ParsingError as e:
        raise ConfigError(f"{source}: malformed line {e.errors[0][1]}", line=e.errors[0][0]) from e
    except configparser.Error as e:
        raise ConfigError(f"{source}: {e.message}", line=getattr(e, "lineno", None)) from e

    lines = _line_index(text)
    raw: Dict[str, Any] = {}
    analyses: Dict[str, Any] = {}
    for section in parser.sections():
        items = _convert(dict(parser.items(section)))
        if section == "scenario":
            raw.update(items)
        elif section in _BODY_SECTIONS:
            raw[section] = items
        elif section.startswith(ANALYSIS_PREFIX):
            name = section[len(ANALYSIS_PREFIX) :]
            if name not in ANALYSIS_NAMES:
                raise ConfigError(
                    f"{source}: unknown analysis '{name}', expected one of {', '.join(ANALYSIS_NAMES)}",
                    line=lines.get((section, None)),
                    field=section,
                )
            analyses[name] = items
        else:
            raise ConfigError(
                f"{source}: unknown section [{section}]", line=lines.get((section, None)), field=section
            )
    raw["analyses"] = analyses

    try:
        scenario = Scenario.model_validate(raw)
    except ValidationError as e:
        error = e.errors()[0]
        field = ".".join(str(part) for part in error["loc"]) or None
        logger.error(f"Invalid scenario {source}: {error['msg']} at {field}")
        raise ConfigError(f"{source}: {error['msg']}", line=_locate(error["loc"], lines), field=field) from e

    logger.info(f"Loaded scenario '{scenario.name}' from {source}: analyses {scenario.analyses.requested()}")
    return scenario


def load_scenario(path: Union[str, Path]) -> Scenario:
    """Read a scenario file from disk."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read scenario file {path}: {e}") from e
    return loads_scenario(text, source=str(path))


def dump_scenario(scenario: Scenario) -> str:
    """Scenario in file format; `loads_scenario(dump_scenario(s)) == s`."""
    sections: List[Tuple[str, Dict[str, Any]]] = [
        ("space", scenario.space.model_dump(mode="json", exclude_none=True)),
        ("phi", {"entries": list(scenario.phi.entries)}),
    ]
    if scenario.section is not None:
        sections.append(("section", scenario.section.model_dump(mode="json", exclude_none=True)))
    for name, params in scenario.analyses.items():
        sections.append((ANALYSIS_PREFIX + name, params.model_dump(mode="json", exclude_none=True)))
    sections.append(("output", scenario.output.model_dump(mode="json", exclude_none=True)))
    return get_scenario_text(scenario, sections)


# =================
# Built-in examples
# =================


def example_compact() -> Scenario:
    """Diagonal symbol on a five point compact set with a p-norm on C^3."""
    return Scenario(
        name="example_5_i",
        dimension=3,
        norm=NormSpec.lp(2.0),
        space=SpaceModel.finite(5),
        phi=PhiSpec(entries=("i*x", "-x/2", "1")),
        section=SectionSpec(entries=("1", "1/x", "exp(-x)")),
        analyses=Analyses(
            norm=NormAnalysis(),
            invert=InvertAnalysis(),
            spectrum=SpectrumAnalysis(re_range=(-3.0, 2.0, 11), im_range=(-1.0, 6.0, 15)),
            evolve=EvolveAnalysis(times=(0.0, 0.5, 1.0, 2.0)),
            continuity=ContinuityAnalysis(times=(0.001, 0.01, 0.1, 1.0)),
            generator=GeneratorAnalysis(),
            t0=T0Analysis(t0=1.0),
            recover=RecoverAnalysis(),
        ),
    )


def example_rotation() -> Scenario:
    """Rotation symbol i·x on [0, 20]: unbounded generator, isometric semigroup."""
    return Scenario(
        name="example_5_ii",
        dimension=1,
        space=SpaceModel.interval_grid(0.0, 20.0, 0.5),
        phi=PhiSpec(entries=("i*x",)),
        section=SectionSpec(entries=("exp(-x)",)),
        analyses=Analyses(
            norm=NormAnalysis(),
            spectrum=SpectrumAnalysis(
                points=("0", "2.5*i", "5*i", "10*i", "20*i", "1", "1+5*i", "-1")
            ),
            evolve=EvolveAnalysis(times=(0.0, 0.5, 1.0, 2.0, 5.0)),
            continuity=ContinuityAnalysis(times=(1e-06, 0.0001, 0.01, 1.0)),
            # x <= 5
            generator=GeneratorAnalysis(support=(0, 10)),
            t0=T0Analysis(t0=1.0),
            recover=RecoverAnalysis(),
        ),
    )


def _naturals_spectrum_points() -> Tuple[str, ...]:
    rotations = [f"{n}*i" for n in range(1, 11)]
    decays = [f"-{n * n}" for n in range(1, 11)]
    return tuple(rotations + decays + ["1", "0.5+0.5*i"])


def example_naturals() -> Scenario:
    """diag(i·n, -n^2) on the first hundred naturals."""
    return Scenario(
        name="example_5_iii",
        dimension=2,
        space=SpaceModel.truncated_naturals(100),
        phi=PhiSpec(entries=("i*x", "-x^2")),
        section=SectionSpec(entries=("1/x^2", "1/x^2")),
        analyses=Analyses(
            norm=NormAnalysis(),
            invert=InvertAnalysis(),
            spectrum=SpectrumAnalysis(points=_naturals_spectrum_points()),
            evolve=EvolveAnalysis(times=(0.1, 1.0, 10.0)),
            continuity=ContinuityAnalysis(
                times=(1e-06, 1e-05, 0.0001, 0.001, 0.01, 0.1, 1.0)
            ),
            generator=GeneratorAnalysis(support=(0, 4)),
            t0=T0Analysis(t0=1.0),
            recover=RecoverAnalysis(),
        ),
    )


def example_block() -> Scenario:
    """Two-dimensional symbol on four points, scanned over a λ box."""
    return Scenario(
        name="example_5_iv",
        dimension=2,
        space=SpaceModel.finite(4, labels=("a", "b", "c", "d")),
        phi=PhiSpec(entries=("exp(i*x)", "-x+2*i")),
        section=SectionSpec(entries=("1", "x")),
        analyses=Analyses(
            norm=NormAnalysis(),
            invert=InvertAnalysis(),
            spectrum=SpectrumAnalysis(
                points=("exp(i)", "-1+2*i", "-4+2*i"),
                re_range=(-5.0, 1.0, 25),
                im_range=(-1.0, 3.0, 17),
            ),
            evolve=EvolveAnalysis(times=(0.0, 0.25, 1.0, 3.0)),
            continuity=ContinuityAnalysis(times=(0.001, 0.01, 0.1, 1.0)),
            generator=GeneratorAnalysis(),
            t0=T0Analysis(t0=0.5),
            recover=RecoverAnalysis(),
        ),
    )


BUILTINS: Dict[str, Callable[[], Scenario]] = {
    "example_5_i": example_compact,
    "example_5_ii": example_rotation,
    "example_5_iii": example_naturals,
    "example_5_iv": example_block,
}


def list_builtins() -> List[str]:
    return sorted(BUILTINS)


def get_builtin(name: str) -> Scenario:
    """Built-in scenario by name; raises ConfigError for unknown names."""
    try:
        factory = BUILTINS[name]
    except KeyError:
        raise ConfigError(
            f"unknown built-in scenario '{name}', expected one of {', '.join(list_builtins())}",
            field="builtin",
        ) from None
    return factory()
