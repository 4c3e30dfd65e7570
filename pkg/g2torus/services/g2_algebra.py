import logging
from dataclasses import dataclass
from itertools import combinations
from typing import Dict, Sequence, Tuple, Union

import numpy as np

from g2torus.core.config import tolerances
from g2torus.core.exceptions import DomainError, InconsistentTorsionError
from g2torus.services.exterior import (
    AlternatingForm,
    MetricData,
    basis_covector,
    contract,
    hodge_star,
    inner_product,
    metric_from_positive3form,
    norm,
    wedge,
)

logger = logging.getLogger(__name__)

# φ₀ = e^{012} - e^0(e^{34}+e^{56}) - e^1(e^{35}+e^{64}) - e^2(e^{36}+e^{45})
PHI0_TERMS: Dict[Tuple[int, ...], float] = {
    (0, 1, 2): 1.0,
    (0, 3, 4): -1.0,
    (0, 5, 6): -1.0,
    (1, 3, 5): -1.0,
    (1, 6, 4): -1.0,
    (2, 3, 6): -1.0,
    (2, 4, 5): -1.0,
}

TWO_FORM_TYPES = (7, 14)
THREE_FORM_TYPES = (1, 7, 27)


def phi0() -> AlternatingForm:
    """The standard positive 3-form on R^7."""
    return AlternatingForm.from_terms(7, 3, PHI0_TERMS)


def _orthogonal_projector(generators: np.ndarray, gram: np.ndarray) -> np.ndarray:
    # columns of `generators` span the subspace; orthonormalize in the gram inner product
    overlap = generators.T @ gram @ generators
    cholesky = np.linalg.cholesky(overlap)
    orthonormal = np.linalg.solve(cholesky, generators.T).T
    return orthonormal @ orthonormal.T @ gram


@dataclass(frozen=True)
class TorsionComponents:
    """Torsion forms of a G2-structure at a point, with the reconstruction residual."""

    tau1: float
    tau2: AlternatingForm
    tau3: AlternatingForm
    tau4: AlternatingForm
    residual: float

    def norms(self, metric: MetricData) -> Dict[str, float]:
        return {
            "tau1": abs(self.tau1),
            "tau2": norm(self.tau2, metric),
            "tau3": norm(self.tau3, metric),
            "tau4": norm(self.tau4, metric),
        }


class G2Point:
    """
    A positive 3-form at a point together with everything it determines.

    The metric, *φ and the type-projection matrices on Λ² and Λ³ are built once in the
    constructor; the object is not mutated afterwards.
    """

    def __init__(self, phi: AlternatingForm):
        """
        Args:
            phi (AlternatingForm): 3-form on R^7; must be positive

        Raises:
            NotPositiveError: phi is not a positive 3-form
        """
        self.phi = phi
        self.metric = metric_from_positive3form(phi)
        self.star_phi = hodge_star(phi, self.metric)

        gram2 = self.metric.form_gram(2)
        gram3 = self.metric.form_gram(3)

        covectors = [basis_covector(7, i) for i in range(7)]
        lambda2_7 = np.column_stack([
            hodge_star(wedge(a, self.star_phi), self.metric).coefficients for a in covectors
        ])
        lambda3_7 = np.column_stack([
            hodge_star(wedge(a, phi), self.metric).coefficients for a in covectors
        ])

        p2_7 = _orthogonal_projector(lambda2_7, gram2)
        p3_1 = _orthogonal_projector(phi.coefficients[:, None], gram3)
        p3_7 = _orthogonal_projector(lambda3_7, gram3)
        self.projectors: Dict[Tuple[int, int], np.ndarray] = {
            (2, 7): p2_7,
            (2, 14): np.eye(21) - p2_7,
            (3, 1): p3_1,
            (3, 7): p3_7,
            (3, 27): np.eye(35) - p3_1 - p3_7,
        }
        self.j_matrix = (4.0 / 3.0) * p3_1 + p3_7 - self.projectors[(3, 27)]

    @classmethod
    def standard(cls) -> "G2Point":
        return cls(phi0())

    def projector(self, degree: int, kind: int) -> np.ndarray:
        """
        Projection matrix onto Λ^degree_kind.

        Degrees 4 and 5 are handled through Λ^i_k = *Λ^{7-i}_k.
        """
        if degree in (4, 5):
            star_in = self.metric.star_matrix(degree)
            star_out = self.metric.star_matrix(7 - degree)
            return star_out @ self.projector(7 - degree, kind) @ star_in
        try:
            return self.projectors[(degree, kind)]
        except KeyError:
            raise DomainError(f"no component Λ^{degree}_{kind}") from None

    def project(self, form: AlternatingForm, kind: int) -> AlternatingForm:
        if form.n != 7:
            raise DomainError(f"G2 projections act on forms in dimension 7, got {form.n}")
        return AlternatingForm(7, form.degree, self.projector(form.degree, kind) @ form.coefficients)

    def evaluate(self, u: Sequence[float], v: Sequence[float], w: Sequence[float]) -> float:
        """φ(u, v, w)."""
        return float(contract(w, contract(v, contract(u, self.phi))).coefficients[0])


def project_two_form(p: G2Point, beta: AlternatingForm) -> Tuple[AlternatingForm, AlternatingForm]:
    """Split β into its Λ²₇ and Λ²₁₄ components."""
    if beta.degree != 2:
        raise DomainError(f"expected a 2-form, got degree {beta.degree}")
    return p.project(beta, 7), p.project(beta, 14)


def project_three_form(
    p: G2Point, gamma: AlternatingForm
) -> Tuple[AlternatingForm, AlternatingForm, AlternatingForm]:
    """Split γ into its Λ³₁, Λ³₇ and Λ³₂₇ components."""
    if gamma.degree != 3:
        raise DomainError(f"expected a 3-form, got degree {gamma.degree}")
    return p.project(gamma, 1), p.project(gamma, 7), p.project(gamma, 27)


def project_four_form(p: G2Point, chi: AlternatingForm) -> Tuple[AlternatingForm, AlternatingForm, AlternatingForm]:
    if chi.degree != 4:
        raise DomainError(f"expected a 4-form, got degree {chi.degree}")
    return p.project(chi, 1), p.project(chi, 7), p.project(chi, 27)


def project_five_form(p: G2Point, chi: AlternatingForm) -> Tuple[AlternatingForm, AlternatingForm]:
    if chi.degree != 5:
        raise DomainError(f"expected a 5-form, got degree {chi.degree}")
    return p.project(chi, 7), p.project(chi, 14)


def j_operator(p: G2Point, xi: AlternatingForm) -> AlternatingForm:
    """J = 4/3 π₁ + π₇ - π₂₇ on 3-forms."""
    if xi.degree != 3 or xi.n != 7:
        raise DomainError(f"J acts on 3-forms in dimension 7, got degree {xi.degree}")
    return AlternatingForm(7, 3, p.j_matrix @ xi.coefficients)


def torsion_components(
    p: G2Point,
    dphi: AlternatingForm,
    dstarphi: AlternatingForm,
    tol: float = None,
) -> TorsionComponents:
    """
    Solve dφ = τ₁*φ + 3τ₄∧φ + *τ₃ and d*φ = 4τ₄∧*φ + *τ₂ for the torsion forms.

    τ₁, τ₂, τ₃ are read off from type projections of *dφ and *d*φ; τ₄ is the least-squares
    solution of the two Λ_7 equations.

    Args:
        p (G2Point): Point carrying φ
        dphi (AlternatingForm): 4-form dφ at the point
        dstarphi (AlternatingForm): 5-form d*φ at the point
        tol (float, optional): Reconstruction tolerance, relative to 1 + |dφ| + |d*φ|

    Returns:
        TorsionComponents: τ₁..τ₄ and the reconstruction residual

    Raises:
        InconsistentTorsionError: the reconstruction residual exceeds tol
    """
    if dphi.degree != 4 or dstarphi.degree != 5:
        raise DomainError(f"expected degrees (4, 5), got ({dphi.degree}, {dstarphi.degree})")
    tol = tolerances.TORSION if tol is None else tol
    metric = p.metric

    star_dphi = hodge_star(dphi, metric)
    star_dpsi = hodge_star(dstarphi, metric)

    tau1 = inner_product(star_dphi, p.phi, metric) / inner_product(p.phi, p.phi, metric)
    tau3 = p.project(star_dphi, 27)
    tau2 = p.project(star_dpsi, 14)

    covectors = [basis_covector(7, i) for i in range(7)]
    design = np.vstack([
        np.column_stack([3.0 * hodge_star(wedge(a, p.phi), metric).coefficients for a in covectors]),
        np.column_stack([4.0 * hodge_star(wedge(a, p.star_phi), metric).coefficients for a in covectors]),
    ])
    target = np.concatenate([p.project(star_dphi, 7).coefficients, p.project(star_dpsi, 7).coefficients])
    tau4_coefficients, *_ = np.linalg.lstsq(design, target, rcond=None)
    tau4 = AlternatingForm(7, 1, tau4_coefficients)

    rebuilt_dphi = tau1 * p.star_phi + 3.0 * wedge(tau4, p.phi) + hodge_star(tau3, metric)
    rebuilt_dpsi = 4.0 * wedge(tau4, p.star_phi) + hodge_star(tau2, metric)
    residual = norm(dphi - rebuilt_dphi, metric) + norm(dstarphi - rebuilt_dpsi, metric)

    scale = 1.0 + norm(dphi, metric) + norm(dstarphi, metric)
    if residual > tol * scale:
        raise InconsistentTorsionError(
            f"dφ, d*φ admit no torsion decomposition (residual {residual:.3e})", residual
        )
    logger.debug(f"Torsion extracted: tau1={tau1:.3e}, residual={residual:.3e}")
    return TorsionComponents(tau1=float(tau1), tau2=tau2, tau3=tau3, tau4=tau4, residual=float(residual))


def instanton_defect(p: G2Point, curvature: Union[AlternatingForm, Sequence[AlternatingForm]]) -> float:
    """
    |F ∧ *φ|, zero exactly when F lies in Λ²₁₄.

    A sequence of 2-forms is read as the components of an ℝ^m-valued curvature.
    """
    components = [curvature] if isinstance(curvature, AlternatingForm) else list(curvature)
    total = 0.0
    for component in components:
        if component.degree != 2:
            raise DomainError(f"curvature components must be 2-forms, got degree {component.degree}")
        total += norm(wedge(component, p.star_phi), p.metric) ** 2
    return float(np.sqrt(total))


def _orthonormal_frame(p: G2Point, vectors: Sequence[Sequence[float]], size: int) -> np.ndarray:
    frame = np.asarray(vectors, dtype=float)
    if frame.shape != (size, 7):
        raise DomainError(f"expected {size} vectors in R^7, got array of shape {frame.shape}")
    overlap = frame @ p.metric.gram @ frame.T
    eigenvalues = np.linalg.eigvalsh(overlap)
    if eigenvalues.min() <= 1e-12 * max(eigenvalues.max(), 1.0):
        raise DomainError("vectors are linearly dependent")
    return np.linalg.solve(np.linalg.cholesky(overlap), frame)


def coassociative_defect(p: G2Point, plane: Sequence[Sequence[float]]) -> float:
    """
    Norm of φ restricted to a 4-plane, after orthonormalizing the plane in g_φ.

    Zero exactly when the plane is coassociative.
    """
    frame = _orthonormal_frame(p, plane, 4)
    values = [p.evaluate(*frame[list(triple)]) for triple in combinations(range(4), 3)]
    return float(np.sqrt(np.sum(np.square(values))))


def associative_defect(p: G2Point, plane: Sequence[Sequence[float]]) -> float:
    """
    1 - |φ(e₁, e₂, e₃)| for an orthonormal frame of a 3-plane.

    φ is a calibration, so this is non-negative and vanishes exactly on associative planes.
    """
    frame = _orthonormal_frame(p, plane, 3)
    return float(1.0 - abs(p.evaluate(*frame)))


def random_positive_form(rng: np.random.Generator, scale: float = 0.05) -> AlternatingForm:
    """φ₀ plus a small random 3-form; positivity is an open condition."""
    return phi0() + AlternatingForm(7, 3, scale * rng.standard_normal(35))


def random_g2_point(rng: np.random.Generator, scale: float = 0.05) -> G2Point:
    return G2Point(random_positive_form(rng, scale))
