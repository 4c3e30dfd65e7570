import logging

from g2torus.cli.routing import CommandResult, CommandRouter, RunContext
from g2torus.schemas.report import ResidualEntry
from g2torus.services.ansatz import bianchi_residual, obstruction_integral

logger = logging.getLogger(__name__)
router = CommandRouter()


@router.command("solve")
def solve(ctx: RunContext) -> CommandResult:
    """Build the scenario (solving Δh = ρ in solved mode) and report the dilaton."""
    s = ctx.scenario()
    residual = bianchi_residual(s)
    entries = [
        ResidualEntry.check("poisson", residual.norm(), ctx.tolerances.FIELD, "Δh = t²Σ|β_j|² + *₄⟨F ∧ F⟩"),
    ]
    if ctx.config.field_out:
        with open(ctx.config.field_out, "wb") as handle:
            handle.write(s.h.to_bytes())
        logger.info(f"Wrote h to {ctx.config.field_out}")
    return CommandResult(entries, {
        "solve": {
            "scenario": s.name,
            "u_mode": s.u_mode.value,
            "min_h": float(s.h.values.min()),
            "obstruction_integral": obstruction_integral(s),
            "h": s.h.summary(),
        }
    })
