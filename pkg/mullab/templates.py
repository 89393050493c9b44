"""Text templates for scenario files and console summaries."""

import math
from typing import Any, Dict, List, Sequence, Tuple

from jinja2 import Environment

from .config import settings


# Scenario files are INI; values are written so the loader reads them back unchanged
SCENARIO_TEMPLATE = """# {{ app_name }} scenario, tool version {{ version }}
[scenario]
name = {{ scenario.name | value }}
dimension = {{ scenario.dimension }}
norm = {{ scenario.norm.label | value }}
{% for title, fields in sections %}

[{{ title }}]
{% for key, field in fields.items() %}
{{ key }} = {{ field | value }}
{% endfor %}
{% endfor %}
"""

SUMMARY_TEMPLATE = """{{ app_name }} {{ version }}
Scenario: {{ scenario.name }} ({{ scenario.space.kind.value }}, {{ scenario.space.num_points }} points, n = {{ scenario.dimension }})
{% if not results %}
No analyses requested.
{% endif %}
{% for result in results %}

[{{ result.name }}] {{ result.rows | length }} row{{ "" if result.rows | length == 1 else "s" }} in {{ "%.3f" | format(result.elapsed_seconds) }} s
{% for key, cell in result.summary.items() %}
  {{ key }}: {{ cell | cell }}
{% endfor %}
{% endfor %}
"""


def format_cell(value: Any) -> str:
    """Render one table cell: shortest round-trip floats, lower-case booleans, empty for None."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return repr(value)
    return str(value)


def format_value(value: Any) -> str:
    """Render a scenario value; strings are double-quoted, sequences comma-separated."""
    if isinstance(value, str):
        return '"' + value.replace('"', '""') + '"'
    if isinstance(value, (list, tuple)):
        return ", ".join(format_value(item) for item in value)
    return format_cell(value)


_environment = Environment(trim_blocks=True, lstrip_blocks=True, keep_trailing_newline=True)
_environment.filters["value"] = format_value
_environment.filters["cell"] = format_cell


def get_scenario_text(scenario: Any, sections: Sequence[Tuple[str, Dict[str, Any]]]) -> str:
    """
    Render a scenario in file format.

    Args:
        scenario: The scenario; supplies the [scenario] header fields
        sections: (section title, key/value mapping) pairs in file order

    Returns:
        Scenario text that loads back to an equal scenario
    """
    template = _environment.from_string(SCENARIO_TEMPLATE)
    return template.render(
        app_name=settings.app_name,
        version=settings.app_version,
        scenario=scenario,
        sections=list(sections),
    )


def get_summary_text(scenario: Any, results: List[Any]) -> str:
    """Console summary of a run: one block per analysis with its summary values."""
    template = _environment.from_string(SUMMARY_TEMPLATE)
    return template.render(
        app_name=settings.app_name,
        version=settings.app_version,
        scenario=scenario,
        results=results,
    )
