import logging

from g2torus.cli.commands.lattice import lattice_check
from g2torus.cli.commands.tdual import tdual
from g2torus.cli.commands.verify import verify
from g2torus.cli.routing import CommandResult, CommandRouter, RunContext
from g2torus.core.exceptions import NotDualizableError

logger = logging.getLogger(__name__)
router = CommandRouter()


@router.command("report")
def full_report(ctx: RunContext) -> CommandResult:
    """Solution, lattice certificate and (when integral) the T-dual, in one report."""
    result = CommandResult()
    result.extend(verify(ctx))
    result.extend(lattice_check(ctx), prefix="lattice.")
    try:
        result.extend(tdual(ctx), prefix="tdual.")
    except NotDualizableError as exc:
        logger.info(f"T-dual skipped: {exc}")
        result.sections["duality"] = {"skipped": str(exc), "index": exc.index}
    return result
