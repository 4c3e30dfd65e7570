from g2torus.cli.routing import CommandResult, CommandRouter, RunContext
from g2torus.services.ansatz import verify_solution

router = CommandRouter()


@router.command("verify")
def verify(ctx: RunContext) -> CommandResult:
    """Evaluate every equation of the system on the configured scenario."""
    report = verify_solution(ctx.scenario(), ctx.tolerances)
    return CommandResult(list(report.residuals), {"solution": report.model_dump(mode="json")})
