"""Writes run reports as CSV tables or a single JSON document."""

import csv
import io
import json
import logging
import math
from pathlib import Path
from typing import Any, Dict, List, Union

from .config import settings
from .models import AnalysisResult, RunReport
from .templates import format_cell, get_summary_text

logger = logging.getLogger(__name__)

SCENARIO_FILE = "scenario.ini"


def _json_value(value: Any) -> Any:
    if isinstance(value, float) and not math.isfinite(value):
        return format_cell(value)
    return value


def _write(target: Path, text: str) -> None:
    with target.open("w", encoding="utf-8", newline="") as handle:
        handle.write(text)


def csv_text(result: AnalysisResult) -> str:
    """One analysis as CSV with a header row and LF line endings."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(result.columns)
    for row in result.rows:
        writer.writerow([format_cell(cell) for cell in row])
    return buffer.getvalue()


def json_document(report: RunReport) -> Dict[str, Any]:
    """Run metadata followed by one object per analysis, keyed by analysis name."""
    document: Dict[str, Any] = {
        "tool": settings.app_name,
        "tool_version": report.tool_version,
        "scenario": report.scenario_text,
    }
    for result in report.results:
        document[result.name] = {
            "columns": result.columns,
            "rows": [[_json_value(cell) for cell in row] for row in result.rows],
            "summary": {key: _json_value(cell) for key, cell in result.summary.items()},
        }
    return document


def json_text(report: RunReport) -> str:
    return json.dumps(json_document(report), indent=2, ensure_ascii=False) + "\n"


def emit(report: RunReport, output_format: str, path: Union[str, Path]) -> List[Path]:
    """
    Write a report to disk.

    `csv` writes `<path>/<analysis>.csv` per analysis plus the scenario echo
    in `<path>/scenario.ini`; `json` writes one document to `path`. Output
    depends only on the scenario and the tool version.

    Returns:
        The files written
    """
    path = Path(path)
    written: List[Path] = []
    if output_format == "csv":
        path.mkdir(parents=True, exist_ok=True)
        for result in report.results:
            target = path / f"{result.name}.csv"
            _write(target, csv_text(result))
            written.append(target)
        target = path / SCENARIO_FILE
        _write(target, report.scenario_text)
        written.append(target)
    elif output_format == "json":
        if path.parent != Path(""):
            path.parent.mkdir(parents=True, exist_ok=True)
        _write(path, json_text(report))
        written.append(path)
    else:
        raise ValueError(f"Unknown output format: '{output_format}'")
    logger.info(f"Wrote {len(written)} file(s) to {path}")
    return written


def summary_text(report: RunReport) -> str:
    return get_summary_text(report.scenario, report.results)
