import logging

from g2torus.cli.routing import CommandResult, CommandRouter, RunContext
from g2torus.services.tduality import duality_report, dualize

logger = logging.getLogger(__name__)
router = CommandRouter()


@router.command("tdual")
def tdual(ctx: RunContext) -> CommandResult:
    """Dualize the scenario and check the correspondence-space identity."""
    pair = dualize(ctx.scenario())
    report = duality_report(pair, ctx.tolerances)
    result = CommandResult(list(report.identity), {"duality": report.model_dump(mode="json")})
    result.extend(CommandResult(list(report.original.residuals)), prefix="original.")
    result.extend(CommandResult(list(report.dual.residuals)), prefix="dual.")
    if not report.pairing_nondegenerate:
        logger.warning("Fiber pairing is degenerate")
    return result
