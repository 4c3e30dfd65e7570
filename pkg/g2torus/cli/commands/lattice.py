import logging
from math import pi

from g2torus.cli.routing import CommandResult, CommandRouter, RunContext
from g2torus.core.exceptions import DomainError
from g2torus.schemas.report import ResidualEntry
from g2torus.services.lattice import (
    duality_ratio_invariant,
    lattice_for,
    non_integral_rows,
    t4_q_values,
)

logger = logging.getLogger(__name__)
router = CommandRouter()

# constant forms only; the grid size does not matter
LATTICE_GRID = 4


@router.command("lattice-check")
def lattice_check(ctx: RunContext) -> CommandResult:
    """Integrality and rank window of the configured classes."""
    s = ctx.scenario(grid=LATTICE_GRID)
    tol = ctx.tolerances
    certificate = s.certificate
    if certificate is None:
        raise DomainError("the scenario carries no constraint certificate (alpha undetermined)")

    ratio = float(certificate.ratio)
    entries = [
        ResidualEntry.check("integrality", 0.0 if certificate.integrality_ok else abs(ratio - round(ratio)),
                            tol.INTEGRALITY, "(2t²/α) Σ Q(β_j/2π) ∈ ℤ"),
    ]
    if certificate.rank_bound_enforced:
        entries.append(ResidualEntry.check("rank_bound", max(0.0, certificate.r - float(certificate.c2_target)),
                                           0.5, "r ≤ c₂(base) + (2t²/α) Σ Q(β_j/2π)"))

    periods = s.beta.periods
    for j, q in enumerate(t4_q_values(periods)):
        integral = s.base.integrate(s.beta[j].pointwise_norm_squared())
        entries.append(ResidualEntry.check(f"quadrature_beta_{j + 1}", abs(integral + 4.0 * pi ** 2 * q),
                                           tol.FIELD * (1.0 + abs(integral)), "∫|β_j|² = -4π² Q(β_j/2π)"))

    failing = non_integral_rows(None, periods, t_squared=s.t_squared)
    entries.append(ResidualEntry.check("tdual_integrality", float(len(failing)), 0.5, "t²·[β_j/2π] integral"))
    if not failing:
        invariant = duality_ratio_invariant(s.t_squared, certificate.alpha, periods)
        entries.append(ResidualEntry.check("duality_ratio_invariant", 0.0 if invariant else 1.0, 0.5,
                                           "(2t²/α)ΣQ unchanged by (t², β) ↦ (1/t², -t²β)"))

    lattice = lattice_for(certificate.lattice)
    return CommandResult(entries, {
        "lattice": {
            "name": lattice.name,
            "rank": lattice.rank,
            "signature": list(lattice.signature),
            "certificate": certificate.to_report().model_dump(mode="json"),
            "inexact": certificate.inexact_warning,
        }
    })
