import argparse
import json
import logging
import sys
from datetime import datetime, timezone
from typing import List, Optional, Sequence

from pydantic import ValidationError

from g2torus.cli.router import cli_router
from g2torus.cli.routing import CommandResult, RunContext, load_scenario_config
from g2torus.core.config import settings, tolerances
from g2torus.core.exceptions import (
    BalanceError,
    G2TorusError,
    NotDualizableError,
    ObstructedSourceError,
)
from g2torus.schemas.report import ResidualEntry, RunReport
from g2torus.schemas.scenario import RunConfig
from g2torus.utils.logging import log_error, log_residual, setup_logging

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_RESIDUAL_FAILURE = 1
EXIT_INVALID_INPUT = 2

# mathematically valid input whose equations cannot be satisfied
UNSATISFIABLE = {
    ObstructedSourceError: ("solvability", "∫(t²Σ|β_j|² + *₄⟨F ∧ F⟩) = 0"),
    BalanceError: ("balance", "t²Σ Q(β_j/2π) = (α/4) Σ w_i Q(F_i/2π)"),
    NotDualizableError: ("tdual_integrality", "t²·[β_j/2π] integral"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=settings.PROJECT_NAME,
        description="Verification suites for G2-Strominger solutions on torus bundles over T^4",
    )
    parser.add_argument("command", choices=sorted(cli_router.commands))
    parser.add_argument("--config", help="Scenario JSON file")
    parser.add_argument("--grid", type=int, help="Override the grid resolution (power of two)")
    parser.add_argument("--seed", type=int, default=0, help="Seed for randomized suites")
    parser.add_argument("--tol-scale", type=float, default=1.0, help="Multiply every tolerance")
    parser.add_argument("--out", help="Report path (stdout when omitted)")
    parser.add_argument("--samples", type=int, help="Sample count for randomized suites")
    parser.add_argument("--field-out", help="Binary dump of the solved h (solve only)")
    return parser


def parse_args(argv: Optional[Sequence[str]] = None) -> RunConfig:
    """
    Raises:
        SystemExit: argparse usage errors (exit code 2)
        ValidationError: values rejected by RunConfig
    """
    namespace = build_parser().parse_args(argv)
    return RunConfig(**{key: value for key, value in vars(namespace).items() if value is not None})


def _unsatisfiable_entry(error: G2TorusError, tolerance: float) -> ResidualEntry:
    name, anchor = next(entry for kind, entry in UNSATISFIABLE.items() if isinstance(error, kind))
    value = abs(float(getattr(error, "mismatch", 1.0)))
    return ResidualEntry(name=name, value=value, tolerance=tolerance, passed=False, anchor=anchor)


def worst_offender(residuals: List[ResidualEntry]) -> Optional[ResidualEntry]:
    failed = [entry for entry in residuals if not entry.passed]
    if not failed:
        return None
    return max(failed, key=lambda entry: entry.value / entry.tolerance if entry.tolerance else float("inf"))


def write_report(report: RunReport, out: Optional[str]):
    text = json.dumps(report.model_dump(mode="json"), indent=2, sort_keys=True)
    if out:
        with open(out, "w", encoding="utf-8") as handle:
            handle.write(text + "\n")
        logger.info(f"Report written to {out}")
    else:
        sys.stdout.write(text + "\n")


def run(config: RunConfig) -> int:
    """
    Execute one command and write its report.

    Returns:
        int: 0 when every residual passes, 1 on residual failures, 2 on invalid input
    """
    command = cli_router.get(config.command)
    tol = tolerances.scaled(config.tol_scale)

    scenario_config = None
    if command.needs_scenario or config.config:
        if not config.config:
            logger.error(f"Command {config.command!r} needs --config")
            return EXIT_INVALID_INPUT
        try:
            scenario_config = load_scenario_config(config.config)
        except (OSError, json.JSONDecodeError, ValidationError) as exc:
            log_error(logger, exc, {"config": config.config})
            return EXIT_INVALID_INPUT

    ctx = RunContext(config=config, tolerances=tol, scenario_config=scenario_config)
    exit_code = EXIT_OK
    sections = {}
    try:
        result = command.handler(ctx)
    except tuple(UNSATISFIABLE) as exc:
        log_error(logger, exc, {"command": config.command})
        result = CommandResult([_unsatisfiable_entry(exc, tol.SOLVABILITY)])
        sections["error"] = {"type": type(exc).__name__, "message": str(exc)}
    except G2TorusError as exc:
        log_error(logger, exc, {"command": config.command})
        exit_code = EXIT_INVALID_INPUT
        result = CommandResult()
        sections["error"] = {"type": type(exc).__name__, "message": str(exc)}

    for entry in result.residuals:
        log_residual(logger, entry.model_dump())
    sections.update(result.sections)
    offender = worst_offender(result.residuals)
    passed = offender is None and exit_code == EXIT_OK
    if offender is not None:
        logger.error(f"Worst offender: {offender.name} ({offender.anchor}) = {offender.value:.3e}, "
                     f"tolerance {offender.tolerance:.1e}")
        exit_code = exit_code or EXIT_RESIDUAL_FAILURE

    report = RunReport(
        schema_version=settings.REPORT_SCHEMA_VERSION,
        command=config.command,
        seed=config.seed,
        generated_at=datetime.now(timezone.utc),
        config=config.model_dump(),
        residuals=result.residuals,
        sections=sections,
        passed=passed,
        worst_offender=offender,
    )
    write_report(report, config.out)
    return exit_code


def main(argv: Optional[Sequence[str]] = None) -> int:
    setup_logging(settings.LOG_LEVEL)
    try:
        config = parse_args(argv)
    except ValidationError as exc:
        log_error(logger, exc)
        return EXIT_INVALID_INPUT
    return run(config)
