import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import null_space, orth

from g2torus.core.config import settings, tolerances
from g2torus.core.exceptions import DomainError, NotAComplexError
from g2torus.services.exterior import (
    AlternatingForm,
    contract,
    hodge_star,
    norm,
    unit_vector,
    wedge,
    wedge_matrix,
)
from g2torus.services.g2_algebra import G2Point, j_operator

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GradedSpace:
    """Direct sum of named blocks; basis order is the concatenation order."""

    label: str
    summands: Tuple[Tuple[str, int], ...]

    @property
    def dimension(self) -> int:
        return sum(size for _, size in self.summands)

    def block(self, name: str) -> slice:
        start = 0
        for summand, size in self.summands:
            if summand == name:
                return slice(start, start + size)
            start += size
        raise DomainError(f"{self.label} has no summand {name!r}")


@dataclass(frozen=True)
class SymbolMap:
    """
    Principal symbol at a covector as a dense matrix.

    ``orders`` gives the homogeneity degree in v of each codomain block.
    """

    domain: GradedSpace
    codomain: GradedSpace
    matrix: np.ndarray
    covector: np.ndarray
    orders: Tuple[int, ...]

    def __post_init__(self):
        expected = (self.codomain.dimension, self.domain.dimension)
        if self.matrix.shape != expected:
            raise DomainError(f"symbol matrix has shape {self.matrix.shape}, expected {expected}")
        if len(self.orders) != len(self.codomain.summands):
            raise DomainError("one homogeneity order per codomain summand is required")

    def rows(self, name: str) -> np.ndarray:
        return self.matrix[self.codomain.block(name)]


@dataclass(frozen=True)
class ExactnessReport:
    rank_in: int
    dim_ker_out: int
    containment_defect: float
    composition_norm: float
    exact: bool

    def to_dict(self) -> Dict[str, object]:
        return {
            "rank_in": self.rank_in,
            "dim_ker_out": self.dim_ker_out,
            "containment_defect": self.containment_defect,
            "composition_norm": self.composition_norm,
            "exact": self.exact,
        }


@dataclass(frozen=True)
class SymbolIdentityResidual:
    name: str
    value: float
    anchor: str


def _covector(v: Sequence[float]) -> Tuple[np.ndarray, AlternatingForm]:
    vector = np.asarray(v, dtype=float)
    if vector.shape != (7,):
        raise DomainError(f"covector must have 7 components, got shape {vector.shape}")
    if not np.any(vector):
        raise DomainError("symbols are taken at a non-zero covector")
    return vector, AlternatingForm(7, 1, vector)


def symbol_PM(p: G2Point, v: Sequence[float]) -> SymbolMap:
    """Symbol of the diffeomorphism action: V ↦ (v∧ι_Vφ, 0)."""
    vector, v_form = _covector(v)
    matrix = np.zeros((36, 7))
    for i in range(7):
        matrix[:35, i] = wedge(v_form, contract(unit_vector(7, i), p.phi)).coefficients
    return SymbolMap(
        domain=GradedSpace("T_pM", (("T", 7),)),
        codomain=GradedSpace("Λ3⊕R", (("L3", 35), ("R", 1))),
        matrix=matrix,
        covector=vector,
        orders=(1, 1),
    )


def symbol_LM(p: G2Point, v: Sequence[float]) -> SymbolMap:
    """
    Symbol of the linearized system at (φ, f).

    (φ̇, ḟ) ↦ (v∧φ̇∧φ,  v∧*Jφ̇ + 4ḟ v∧*φ,  -v∧*(v∧(φ̇ + 4ḟφ)))
    """
    vector, v_form = _covector(v)
    metric = p.metric
    wedge_v3 = wedge_matrix(v_form, 3)
    wedge_v4 = wedge_matrix(v_form, 4)
    star3 = metric.star_matrix(3)
    star4 = metric.star_matrix(4)

    v_phi = wedge(v_form, p.phi).coefficients
    v_star_phi = wedge(v_form, p.star_phi).coefficients

    top = np.column_stack([wedge_matrix(p.phi, 4) @ wedge_v3, np.zeros(1)])
    five = np.column_stack([wedge_v4 @ star3 @ p.j_matrix, 4.0 * v_star_phi])
    second_order = -wedge_v3 @ star4
    four = np.column_stack([second_order @ wedge_v3, 4.0 * second_order @ v_phi])

    return SymbolMap(
        domain=GradedSpace("Λ3⊕R", (("L3", 35), ("R", 1))),
        codomain=GradedSpace("Λ7⊕Λ5⊕Λ4", (("L7", 1), ("L5", 21), ("L4", 35))),
        matrix=np.vstack([top, five, four]),
        covector=vector,
        orders=(1, 1, 2),
    )


def symbol_instanton_complex(p: G2Point, v: Sequence[float], m: int) -> Tuple[SymbolMap, SymbolMap]:
    """
    Symbols of the deformation complex of a G2-instanton with Lie algebra ℝ^m.

    S0: r ↦ (v⊗r, 0);  S1: (θ̇, s) ↦ *φ∧v∧θ̇ + s *v.
    Each ℝ^m component occupies its own contiguous block.
    """
    vector, v_form = _covector(v)
    if m < 1:
        raise DomainError(f"adjoint dimension must be >= 1, got {m}")
    identity = np.eye(m)

    algebra = GradedSpace("g", (("g", m),))
    middle = GradedSpace("Λ1⊗g⊕Λ0⊗g", (("L1g", 7 * m), ("L0g", m)))
    top = GradedSpace("Λ6⊗g", (("L6g", 7 * m),))

    s0 = np.vstack([np.kron(identity, vector[:, None]), np.zeros((m, m))])
    one_form_block = wedge_matrix(p.star_phi, 2) @ wedge_matrix(v_form, 1)
    scalar_block = hodge_star(v_form, p.metric).coefficients[:, None]
    s1 = np.hstack([np.kron(identity, one_form_block), np.kron(identity, scalar_block)])

    return (
        SymbolMap(algebra, middle, s0, vector, (1, 1)),
        SymbolMap(middle, top, s1, vector, (1,)),
    )


def _rank(matrix: np.ndarray, rtol: float) -> int:
    if matrix.size == 0:
        return 0
    singular = np.linalg.svd(matrix, compute_uv=False)
    if singular.size == 0 or singular[0] == 0.0:
        return 0
    return int(np.sum(singular > rtol * singular[0]))


def check_exactness(
    s_in: SymbolMap,
    s_out: SymbolMap,
    tol: Optional[float] = None,
    rank_rtol: Optional[float] = None,
) -> ExactnessReport:
    """
    Check that im S_in = ker S_out.

    Args:
        s_in (SymbolMap): Incoming map
        s_out (SymbolMap): Outgoing map, composable with s_in
        tol (float, optional): Containment tolerance
        rank_rtol (float, optional): Singular-value cut relative to the largest

    Returns:
        ExactnessReport: ranks, containment defect |(I - P_im)K| and the verdict

    Raises:
        DomainError: the maps are not composable
        NotAComplexError: S_out ∘ S_in does not vanish
    """
    tol = tolerances.CONTAINMENT if tol is None else tol
    rank_rtol = tolerances.RANK_RTOL if rank_rtol is None else rank_rtol
    if s_in.codomain.dimension != s_out.domain.dimension:
        raise DomainError(
            f"cannot compose {s_in.codomain.label} ({s_in.codomain.dimension}) "
            f"with {s_out.domain.label} ({s_out.domain.dimension})"
        )

    composition = float(np.linalg.norm(s_out.matrix @ s_in.matrix))
    scale = max(1.0, float(np.linalg.norm(s_out.matrix) * np.linalg.norm(s_in.matrix)))
    if composition > tol * scale:
        raise NotAComplexError(f"S_out ∘ S_in has norm {composition:.3e}", composition)

    rank_in = _rank(s_in.matrix, rank_rtol)
    kernel = null_space(s_out.matrix, rcond=rank_rtol)
    dim_ker = kernel.shape[1]

    if dim_ker == 0:
        defect = 0.0
    elif rank_in == 0:
        defect = float(np.linalg.norm(kernel, 2))
    else:
        image = orth(s_in.matrix, rcond=rank_rtol)
        defect = float(np.linalg.norm(kernel - image @ (image.T @ kernel), 2))

    exact = rank_in == dim_ker and defect < tol
    logger.debug(f"Exactness: rank_in={rank_in}, dim_ker_out={dim_ker}, defect={defect:.3e}")
    return ExactnessReport(rank_in, dim_ker, defect, composition, exact)


def homogeneity_residual(
    builder: Callable[[G2Point, np.ndarray], SymbolMap],
    p: G2Point,
    v: Sequence[float],
    factors: Sequence[float] = (2.0, -1.0, 0.5),
) -> float:
    """Largest deviation of S(λv) from λ^order S(v), block by block."""
    base = builder(p, np.asarray(v, dtype=float))
    worst = 0.0
    for factor in factors:
        scaled = builder(p, factor * np.asarray(v, dtype=float))
        for (name, _), order in zip(base.codomain.summands, base.orders):
            expected = factor ** order * base.rows(name)
            worst = max(worst, float(np.abs(scaled.rows(name) - expected).max(initial=0.0)))
    return worst


def verify_bryant_symbol_identities(
    p: G2Point,
    v: Sequence[float],
    rng: Optional[np.random.Generator] = None,
    beta7: Optional[AlternatingForm] = None,
    beta14: Optional[AlternatingForm] = None,
) -> List[SymbolIdentityResidual]:
    """
    Symbol-level identities for the operator d*Jd on the two types of 2-forms.

    With x = v∧*J(v∧β):
      - x = 0 for β ∈ Λ²₇;
      - π₇ x = 0 for β ∈ Λ²₁₄;
      - -π₁₄(*x) = |v|²β - (3/2) π₁₄(v∧ι_{v♯}β) for β ∈ Λ²₁₄, where
        |v|²β = v∧ι_{v♯}β + ι_{v♯}(v∧β) and
        π₁₄(v∧ι_{v♯}β) = 2/3 v∧ι_{v♯}β + 1/3 ι_{v♯}*(φ∧ι_{v♯}β).

    Random β are drawn from ``rng`` when not supplied.
    """
    _, v_form = _covector(v)
    rng = rng if rng is not None else np.random.default_rng(0)
    metric = p.metric

    if beta7 is None:
        beta7 = p.project(AlternatingForm(7, 2, rng.standard_normal(21)), 7)
    if beta14 is None:
        beta14 = p.project(AlternatingForm(7, 2, rng.standard_normal(21)), 14)

    def second_order(beta: AlternatingForm) -> AlternatingForm:
        return wedge(v_form, hodge_star(j_operator(p, wedge(v_form, beta)), metric))

    v_sharp = metric.sharp(v_form.coefficients)
    x14 = second_order(beta14)
    lhs = -p.project(hodge_star(x14, metric), 14)

    i_beta = contract(v_sharp, beta14)
    a_term = wedge(v_form, i_beta)
    b_term = contract(v_sharp, wedge(v_form, beta14))
    c_term = contract(v_sharp, hodge_star(wedge(p.phi, i_beta), metric))
    pi14_a = (2.0 / 3.0) * a_term + (1.0 / 3.0) * c_term
    rhs = a_term + b_term - 1.5 * pi14_a

    return [
        SymbolIdentityResidual(
            "d*Jd_on_L2_7", norm(second_order(beta7), metric), "v^*J(v^b7) = 0"
        ),
        SymbolIdentityResidual(
            "pi7_d*Jd_on_L2_14", norm(p.project(x14, 7), metric), "pi7(v^*J(v^b14)) = 0"
        ),
        SymbolIdentityResidual(
            "pi14_d*Jd_on_L2_14",
            norm(lhs - rhs, metric),
            "-pi14 *(v^*J(v^b14)) = |v|^2 b14 - 3/2 pi14(v^i_v b14)",
        ),
    ]


def ellipticity_sample(p: G2Point, v: Sequence[float], adjoint_dims: Sequence[int] = (1,)) -> Dict[str, ExactnessReport]:
    """Exactness reports of the manifold complex and the instanton complexes at one (p, v)."""
    reports = {"manifold": check_exactness(symbol_PM(p, v), symbol_LM(p, v))}
    for m in adjoint_dims:
        s0, s1 = symbol_instanton_complex(p, v, m)
        reports[f"instanton_m{m}"] = check_exactness(s0, s1)
    return reports


def ellipticity_sweep(
    points: Sequence[G2Point],
    covectors: Sequence[Sequence[float]],
    adjoint_dims: Sequence[int] = (1, 2, 3),
    threads: Optional[int] = None,
) -> List[Dict[str, ExactnessReport]]:
    """Run :func:`ellipticity_sample` over every (point, covector) pair."""
    threads = settings.THREADS if threads is None else threads
    jobs = [(p, v) for p in points for v in covectors]
    logger.info(f"Ellipticity sweep: {len(jobs)} samples on {threads} thread(s)")
    if threads == 1:
        return [ellipticity_sample(p, v, adjoint_dims) for p, v in jobs]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda job: ellipticity_sample(job[0], job[1], adjoint_dims), jobs))
