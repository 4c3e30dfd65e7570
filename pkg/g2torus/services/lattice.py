import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import isclose, sqrt
from numbers import Integral, Rational
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
import sympy
from scipy.linalg import block_diag

from g2torus.core.config import tolerances
from g2torus.core.exceptions import DomainError
from g2torus.schemas.report import ConstraintCertificateReport

logger = logging.getLogger(__name__)

Number = Union[int, float, Fraction]

# Bourbaki labelling: chain 1-3-4-5-6-7-8 with node 2 attached to node 4
E8_EDGES = ((0, 2), (2, 3), (3, 4), (4, 5), (5, 6), (6, 7), (1, 3))
HYPERBOLIC_PLANE = np.array([[0, 1], [1, 0]], dtype=np.int64)
K3_C2 = 24


def e8_cartan() -> np.ndarray:
    cartan = 2 * np.eye(8, dtype=np.int64)
    for i, j in E8_EDGES:
        cartan[i, j] = cartan[j, i] = -1
    return cartan


@dataclass(frozen=True, eq=False)
class IntersectionLattice:
    """Even unimodular lattice given by its Gram matrix."""

    name: str
    gram: np.ndarray

    def __post_init__(self):
        gram = np.asarray(self.gram, dtype=np.int64)
        if gram.ndim != 2 or gram.shape[0] != gram.shape[1] or not np.array_equal(gram, gram.T):
            raise DomainError(f"{self.name}: Gram matrix must be square and symmetric")
        if np.any(np.diag(gram) % 2):
            raise DomainError(f"{self.name}: lattice is not even")
        det = sympy.Matrix(gram.tolist()).det()
        if abs(int(det)) != 1:
            raise DomainError(f"{self.name}: lattice is not unimodular (det = {det})")
        object.__setattr__(self, "gram", gram)

    @property
    def rank(self) -> int:
        return self.gram.shape[0]

    @property
    def signature(self) -> Tuple[int, int]:
        eigenvalues = np.linalg.eigvalsh(self.gram.astype(float))
        return int(np.sum(eigenvalues > 0)), int(np.sum(eigenvalues < 0))


@lru_cache(maxsize=None)
def t4_lattice() -> IntersectionLattice:
    """H²(T⁴, ℤ) = U ⊕ U ⊕ U in the basis (dx⁰¹, dx²³), (dx⁰², dx³¹), (dx⁰³, dx¹²)."""
    return IntersectionLattice("T4", block_diag(*[HYPERBOLIC_PLANE] * 3))


@lru_cache(maxsize=None)
def k3_lattice() -> IntersectionLattice:
    """H²(K3, ℤ) = E8(-1) ⊕ E8(-1) ⊕ U ⊕ U ⊕ U."""
    negative_e8 = -e8_cartan()
    return IntersectionLattice("K3", block_diag(negative_e8, negative_e8, *[HYPERBOLIC_PLANE] * 3))


def lattice_for(name: str) -> IntersectionLattice:
    lattices = {"T4": t4_lattice, "K3": k3_lattice}
    try:
        return lattices[name]()
    except KeyError:
        raise DomainError(f"unknown lattice {name!r}; expected one of {sorted(lattices)}") from None


def _integer_vector(c: Sequence[int], length: int) -> List[int]:
    values = list(c.tolist() if isinstance(c, np.ndarray) else c)
    if len(values) != length:
        raise DomainError(f"class vector has length {len(values)}, lattice rank is {length}")
    if not all(isinstance(value, Integral) for value in values):
        raise DomainError("class vectors must have integer entries")
    return [int(value) for value in values]


def q_value(lattice: IntersectionLattice, c: Sequence[int]) -> int:
    """Q(c, c) = cᵀ·gram·c, in exact integer arithmetic."""
    vector = _integer_vector(c, lattice.rank)
    gram = lattice.gram.tolist()
    return sum(vector[i] * gram[i][j] * vector[j]
               for i in range(lattice.rank) for j in range(lattice.rank) if gram[i][j])


def pairing(lattice: IntersectionLattice, a: Sequence[int], b: Sequence[int]) -> int:
    left, right = _integer_vector(a, lattice.rank), _integer_vector(b, lattice.rank)
    gram = lattice.gram.tolist()
    return sum(left[i] * gram[i][j] * right[j]
               for i in range(lattice.rank) for j in range(lattice.rank) if gram[i][j])


def _is_exact(value: Number) -> bool:
    return isinstance(value, Rational)


def _square(t: Number, t_squared: Optional[Number]) -> Number:
    if t_squared is not None:
        return Fraction(t_squared) if _is_exact(t_squared) else float(t_squared)
    return Fraction(t) ** 2 if _is_exact(t) else float(t) ** 2


@dataclass(frozen=True)
class ConstraintCertificate:
    """
    Arithmetic window for the existence of the bundle data.

    ratio = (2t²/α) Σ_j Q([β_j/2π]); integrality needs ratio ∈ ℤ, the rank bound needs
    r ≤ c2_base + ratio, and c₂(V) = c2_base + ratio.
    """

    t_squared: Number
    alpha: Number
    r: int
    q_values: Tuple[int, ...]
    c2_base: int = K3_C2
    lattice: str = "K3"
    rank_bound_enforced: bool = True

    @property
    def t(self) -> float:
        return sqrt(float(self.t_squared))

    @property
    def exact(self) -> bool:
        return _is_exact(self.t_squared) and _is_exact(self.alpha)

    @property
    def ratio(self) -> Number:
        total = sum(self.q_values)
        if self.exact:
            return 2 * Fraction(self.t_squared) * total / Fraction(self.alpha)
        return 2.0 * float(self.t_squared) * total / float(self.alpha)

    @property
    def integrality_ok(self) -> bool:
        ratio = self.ratio
        if self.exact:
            return ratio.denominator == 1
        return isclose(ratio, round(ratio), rel_tol=0.0, abs_tol=tolerances.INTEGRALITY)

    @property
    def inexact_warning(self) -> bool:
        return not self.exact

    @property
    def c2_target(self) -> Number:
        return self.c2_base + self.ratio

    @property
    def rank_ok(self) -> bool:
        return self.r <= self.c2_target

    @property
    def passed(self) -> bool:
        return self.integrality_ok and (self.rank_ok or not self.rank_bound_enforced)

    def to_report(self) -> ConstraintCertificateReport:
        return ConstraintCertificateReport(
            lattice=self.lattice,
            t_squared=str(self.t_squared),
            alpha=str(self.alpha),
            r=self.r,
            q_values=list(self.q_values),
            ratio=str(self.ratio),
            integrality_ok=self.integrality_ok,
            rank_ok=self.rank_ok,
            rank_bound_enforced=self.rank_bound_enforced,
            c2_base=self.c2_base,
            c2_target=str(self.c2_target),
            exact=self.exact,
        )


def check_constraints(
    t: Optional[Number],
    alpha: Number,
    r: int,
    q_values: Sequence[int],
    c2_base: int = K3_C2,
    *,
    t_squared: Optional[Number] = None,
    c1: int = 0,
    lattice: str = "K3",
    rank_bound_enforced: bool = True,
) -> ConstraintCertificate:
    """
    Build the constraint certificate for (t, α, r) and the classes' Q-values.

    Args:
        t (Number): Fiber scale; ignored when ``t_squared`` is given
        alpha (Number): Coupling constant, non-zero
        r (int): Rank of the bundle
        q_values (Sequence[int]): Q([β_j/2π]) for j = 1, 2, 3
        c2_base (int): c₂ of the base (24 for K3, 0 on the flat torus)
        t_squared (Number, optional): Exact t² when t itself is irrational
        c1 (int): First Chern class degree of the bundle; only 0 is supported

    Returns:
        ConstraintCertificate: Verdicts are exact when t² and α are rational
    """
    if alpha == 0:
        raise DomainError("alpha must be non-zero")
    if r < 1:
        raise DomainError(f"rank must be positive, got {r}")
    if len(q_values) != 3:
        raise DomainError(f"expected three Q-values, got {len(q_values)}")
    if c1 != 0:
        raise DomainError("only bundles with c1 = 0 are supported")
    if t_squared is None and t is None:
        raise DomainError("either t or t_squared is required")
    t_sq = _square(t, t_squared)
    if t_sq <= 0:
        raise DomainError("t must be positive")
    alpha_value = Fraction(alpha) if _is_exact(alpha) else float(alpha)
    certificate = ConstraintCertificate(
        t_squared=t_sq,
        alpha=alpha_value,
        r=int(r),
        q_values=tuple(int(q) for q in q_values),
        c2_base=int(c2_base),
        lattice=lattice,
        rank_bound_enforced=rank_bound_enforced,
    )
    if certificate.inexact_warning:
        logger.warning("Constraint check in floating point: integrality judged to within tolerance")
    logger.debug(f"Constraint certificate: ratio={certificate.ratio}, integral={certificate.integrality_ok}, "
                 f"rank_ok={certificate.rank_ok}")
    return certificate


def _is_integral(value: Number) -> bool:
    if isinstance(value, Fraction):
        return value.denominator == 1
    return isclose(value, round(value), rel_tol=0.0, abs_tol=tolerances.INTEGRALITY)


def non_integral_rows(t: Optional[Number], periods: Sequence[Sequence[int]], *,
                      t_squared: Optional[Number] = None) -> List[int]:
    """Indices j for which t²·periods[j] is not an integer vector."""
    t_sq = _square(t, t_squared)
    return [
        j for j, row in enumerate(np.asarray(periods).tolist())
        if not all(_is_integral(t_sq * int(n)) for n in row)
    ]


def tdual_integrality(t: Optional[Number], periods: Sequence[Sequence[int]], *,
                      t_squared: Optional[Number] = None) -> bool:
    """
    True iff every t²-scaled period is an integer.

    Periods are already (1/2π)∫β over the coordinate 2-tori, so the side lengths of the
    torus do not enter.
    """
    return not non_integral_rows(t, periods, t_squared=t_squared)


def duality_ratio_invariant(t_squared: Number, alpha: Number, periods: Sequence[Sequence[int]]) -> bool:
    """
    (2t²/α)ΣQ is unchanged by (t², β) ↦ (1/t², -t²β); exact for rational inputs.

    Raises:
        DomainError: the dual periods are not integral
    """
    lattice = t4_lattice()
    t_sq = Fraction(t_squared) if _is_exact(t_squared) else float(t_squared)
    rows = non_integral_rows(None, periods, t_squared=t_sq)
    if rows:
        raise DomainError(f"dual periods of beta_{rows[0] + 1} are not integral")
    original = [q_value(lattice, row) for row in np.asarray(periods).tolist()]
    dual_periods = [[int(round(-t_sq * n)) for n in row] for row in np.asarray(periods).tolist()]
    dual = [q_value(lattice, row) for row in dual_periods]
    before = check_constraints(None, alpha, 1, original, 0, t_squared=t_sq, lattice="T4").ratio
    after = check_constraints(None, alpha, 1, dual, 0, t_squared=1 / t_sq, lattice="T4").ratio
    if isinstance(before, Fraction) and isinstance(after, Fraction):
        return before == after
    return isclose(float(before), float(after), rel_tol=1e-12, abs_tol=tolerances.INTEGRALITY)


def t4_class_of_periods(periods: Sequence[Sequence[int]]) -> List[List[int]]:
    """
    Class vectors in H²(T⁴, ℤ) for a 3 x 6 (or m x 6) period matrix.

    Period rows are already laid out in the U ⊕ U ⊕ U basis, so this only validates them.
    """
    rows = np.asarray(periods)
    if rows.ndim != 2 or rows.shape[1] != 6:
        raise DomainError(f"period matrix must have 6 columns, got shape {rows.shape}")
    if not np.issubdtype(rows.dtype, np.integer):
        raise DomainError("periods must be integers")
    return [[int(n) for n in row] for row in rows.tolist()]


def t4_q_values(periods: Sequence[Sequence[int]]) -> List[int]:
    lattice = t4_lattice()
    return [q_value(lattice, row) for row in t4_class_of_periods(periods)]


def instanton_charge(weights: Sequence[Number], periods: Sequence[Sequence[int]]) -> Number:
    """κ = ½ Σ_i w_i Q([F_i/2π]) for abelian curvatures with T⁴ periods."""
    q_values = t4_q_values(periods)
    if len(weights) != len(q_values):
        raise DomainError(f"{len(weights)} weights for {len(q_values)} curvatures")
    exact = all(_is_exact(w) for w in weights)
    total = sum((Fraction(w) if exact else float(w)) * q for w, q in zip(weights, q_values))
    return Fraction(total, 2) if exact else total / 2.0
