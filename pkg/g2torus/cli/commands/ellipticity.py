import logging
from typing import Dict, List, Set

import numpy as np

from g2torus.cli.routing import CommandResult, CommandRouter, RunContext
from g2torus.core.config import settings
from g2torus.schemas.report import ExactnessEntry, ResidualEntry
from g2torus.services.g2_algebra import random_g2_point
from g2torus.services.symbols import ellipticity_sweep

logger = logging.getLogger(__name__)
router = CommandRouter()

DEFAULT_COVECTORS = 100
POINTS = 5
ADJOINT_DIMS = (1, 2, 3)


@router.command("ellipticity", needs_scenario=False)
def ellipticity(ctx: RunContext) -> CommandResult:
    """Exactness of the linearized symbol complexes at random covectors."""
    rng = ctx.rng
    count = ctx.config.samples or DEFAULT_COVECTORS
    points = [random_g2_point(rng) for _ in range(POINTS)]
    covectors = [v / np.linalg.norm(v) for v in rng.standard_normal((count, 7))]
    samples = ellipticity_sweep(points, covectors, ADJOINT_DIMS, threads=settings.THREADS)

    tol = ctx.tolerances
    residuals: List[ResidualEntry] = []
    summary: Dict[str, dict] = {}
    for label in samples[0]:
        reports = [sample[label] for sample in samples]
        kernels: Set[int] = {report.dim_ker_out for report in reports}
        mismatched = sum(report.rank_in != report.dim_ker_out for report in reports)
        defect = max(report.containment_defect for report in reports)
        composition = max(report.composition_norm for report in reports)
        logger.info(f"Ellipticity {label}: kernel dimensions {sorted(kernels)}, worst defect {defect:.3e}")

        residuals.append(ResidualEntry.check(f"{label}.containment", defect, tol.CONTAINMENT,
                                             "ker σ(L) = im σ(P)"))
        residuals.append(ResidualEntry.check(f"{label}.rank_mismatch", float(mismatched), 0.5,
                                             "dim ker σ(L) = rank σ(P)"))
        residuals.append(ResidualEntry.check(f"{label}.kernel_variation", float(len(kernels) - 1), 0.5,
                                             "dim ker σ(L) constant in v"))
        worst = max(reports, key=lambda report: report.containment_defect)
        summary[label] = {
            "kernel_dimensions": sorted(kernels),
            "composition_norm": composition,
            "worst": ExactnessEntry(label=label, rank_in=worst.rank_in, dim_ker_out=worst.dim_ker_out,
                                    containment_defect=worst.containment_defect,
                                    composition_norm=worst.composition_norm, exact=worst.exact).model_dump(),
        }
    return CommandResult(residuals, {"ellipticity": {"points": POINTS, "covectors": count, "complexes": summary}})
