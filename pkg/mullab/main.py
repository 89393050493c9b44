"""Command-line entry point."""

import logging
import sys
from pathlib import Path
from typing import Optional

import click

from .config import settings
from .errors import AnalysisError, ConfigError, ExpressionSyntaxError
from .report import emit, summary_text
from .runner import run
from .scenarios import get_builtin, load_scenario
from .scenarios import list_builtins as builtin_names

logger = logging.getLogger(__name__)

EXIT_CONFIG = 2
EXIT_ANALYSIS = 3


def configure_logging(level: Optional[str] = None) -> None:
    """Log to stderr so stdout carries only the run summary."""
    logging.basicConfig(
        level=getattr(logging, (level or settings.log_level).upper()),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        stream=sys.stderr,
        force=True,
    )


@click.command(name="mullab")
@click.option(
    "--scenario",
    "scenario_path",
    type=click.Path(dir_okay=False, path_type=Path),
    help="Scenario file to run.",
)
@click.option("--builtin", "builtin_name", help="Name of a built-in scenario to run.")
@click.option(
    "--out",
    "out_path",
    type=click.Path(path_type=Path),
    help="Output directory (csv) or file (json); overrides the scenario's [output] path.",
)
@click.option(
    "--format",
    "output_format",
    type=click.Choice(["csv", "json"]),
    help="Output format; overrides the scenario's [output] format.",
)
@click.option("--list-builtins", is_flag=True, help="List built-in scenarios and exit.")
@click.option(
    "--log-level",
    type=click.Choice(["DEBUG", "INFO", "WARNING", "ERROR"], case_sensitive=False),
    help="Logging level (default from MULLAB_LOG_LEVEL).",
)
@click.version_option(settings.app_version, prog_name=settings.app_name)
def cli(
    scenario_path: Optional[Path],
    builtin_name: Optional[str],
    out_path: Optional[Path],
    output_format: Optional[str],
    list_builtins: bool,
    log_level: Optional[str],
) -> None:
    """Run a multiplication semigroup scenario and write its analyses."""
    configure_logging(log_level)

    if list_builtins:
        for name in builtin_names():
            click.echo(name)
        return

    if (scenario_path is None) == (builtin_name is None):
        click.echo("Error: give exactly one of --scenario or --builtin", err=True)
        sys.exit(EXIT_CONFIG)

    try:
        scenario = load_scenario(scenario_path) if scenario_path else get_builtin(builtin_name)
    except (ConfigError, ExpressionSyntaxError) as e:
        logger.error(f"Scenario rejected: {e}")
        click.echo(f"Configuration error: {e}", err=True)
        sys.exit(EXIT_CONFIG)

    try:
        report = run(scenario)
    except AnalysisError as e:
        click.echo(f"Analysis error: {e}", err=True)
        sys.exit(EXIT_ANALYSIS)

    fmt = output_format or scenario.output.format or settings.output_format
    target = out_path or (Path(scenario.output.path) if scenario.output.path else None)
    if target is not None:
        try:
            emit(report, fmt, target)
        except OSError as e:
            logger.error(f"Cannot write report to {target}: {e}")
            click.echo(
                f"Output error: cannot write report to {target}: {e.strerror or e}", err=True
            )
            sys.exit(EXIT_CONFIG)
    click.echo(summary_text(report), nl=False)


if __name__ == "__main__":
    cli()
