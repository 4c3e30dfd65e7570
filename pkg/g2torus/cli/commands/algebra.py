import logging
from typing import Dict

import numpy as np

from g2torus.cli.routing import CommandResult, CommandRouter, RunContext
from g2torus.schemas.report import ResidualEntry
from g2torus.services.exterior import AlternatingForm, hodge_star, inner_product, wedge
from g2torus.services.g2_algebra import G2Point, random_g2_point
from g2torus.services.symbols import verify_bryant_symbol_identities

logger = logging.getLogger(__name__)
router = CommandRouter()

DEFAULT_POINTS = 50
TYPE_DIMENSIONS = {(2, 7): 7, (2, 14): 14, (3, 1): 1, (3, 7): 7, (3, 27): 27}
J_SPECTRUM = np.array([-1.0] * 27 + [1.0] * 7 + [4.0 / 3.0])


def algebra_residuals(p: G2Point, rng: np.random.Generator) -> Dict[str, float]:
    """Worst deviation of each algebraic identity at one G2 point."""
    ranks = max(abs(np.trace(p.projector(d, k)) - dim) for (d, k), dim in TYPE_DIMENSIONS.items())
    idempotence = max(
        float(np.abs(p.projector(d, k) @ p.projector(d, k) - p.projector(d, k)).max())
        for d, k in TYPE_DIMENSIONS
    )
    completeness = max(
        float(np.abs(p.projector(2, 7) + p.projector(2, 14) - np.eye(21)).max()),
        float(np.abs(p.projector(3, 1) + p.projector(3, 7) + p.projector(3, 27) - np.eye(35)).max()),
    )

    beta = AlternatingForm(7, 2, rng.standard_normal(21))
    closed_form = (2.0 * beta - hodge_star(wedge(p.phi, beta), p.metric)) * (1.0 / 3.0)
    pi14 = float(np.abs(p.project(beta, 14).coefficients - closed_form.coefficients).max())

    eigenvalues = np.sort(np.linalg.eigvals(p.j_matrix).real)
    spectrum = float(np.abs(eigenvalues - J_SPECTRUM).max())

    phi_norm = abs(inner_product(p.phi, p.phi, p.metric) - 7.0)
    return {
        "projector_ranks": float(ranks),
        "idempotence": idempotence,
        "completeness": completeness,
        "pi14_closed_form": pi14,
        "j_spectrum": spectrum,
        "phi_norm": float(phi_norm),
    }


ANCHORS = {
    "projector_ranks": "rank π on Λ²₇, Λ²₁₄, Λ³₁, Λ³₇, Λ³₂₇ = 7, 14, 1, 7, 27",
    "idempotence": "π² = π",
    "completeness": "π₇ + π₁₄ = 1 on Λ²,  π₁ + π₇ + π₂₇ = 1 on Λ³",
    "pi14_closed_form": "π₁₄β = (2β - *(φ ∧ β))/3",
    "j_spectrum": "spec J = {4/3, 1, -1} with multiplicities 1, 7, 27",
    "phi_norm": "|φ|² = 7",
}


@router.command("verify-algebra", needs_scenario=False)
def verify_algebra(ctx: RunContext) -> CommandResult:
    """G2 representation theory and symbol identities at random positive 3-forms."""
    rng = ctx.rng
    count = ctx.config.samples or DEFAULT_POINTS
    worst: Dict[str, float] = {name: 0.0 for name in ANCHORS}
    symbol_worst: Dict[str, float] = {}
    symbol_anchors: Dict[str, str] = {}

    for _ in range(count):
        p = random_g2_point(rng)
        for name, value in algebra_residuals(p, rng).items():
            worst[name] = max(worst[name], value)
        v = rng.standard_normal(7)
        for residual in verify_bryant_symbol_identities(p, v / np.linalg.norm(v), rng):
            symbol_worst[residual.name] = max(symbol_worst.get(residual.name, 0.0), residual.value)
            symbol_anchors[residual.name] = residual.anchor

    tol = ctx.tolerances
    residuals = [ResidualEntry.check(name, worst[name], tol.ALGEBRA, anchor) for name, anchor in ANCHORS.items()]
    residuals += [
        ResidualEntry.check(name, value, tol.SYMBOL, symbol_anchors[name]) for name, value in symbol_worst.items()
    ]
    logger.info(f"Algebra suite: {count} points")
    return CommandResult(residuals, {"algebra": {"points": count}})
