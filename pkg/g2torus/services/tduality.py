"""
T-duality on the correspondence space of two T³-bundles over the same base.

Invariant forms are written in the generators σ₁, σ₂, σ₃ (fiber of P), σ′₁, σ′₂, σ′₃
(fiber of P′) and the period-normalized base coframe ê^a = (√(2π)/L_a) dx^a, in which a
curvature with integer periods has integer coefficients. Coefficients are Fractions
(exact mode), floats, or grid arrays (pipeline mode).
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from math import isclose, pi, sqrt
from numbers import Rational
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import sympy

from g2torus.core.config import Tolerances, tolerances
from g2torus.core.exceptions import DomainError, NotDualizableError
from g2torus.schemas.report import DualityReport, ResidualEntry
from g2torus.services.ansatz import Scenario, t4_certificate, torsion_H, verify_solution
from g2torus.services.exterior import basis, permutation_sign
from g2torus.services.fibered_calculus import PERIOD_PLANES, BetaTriple, FiberedForm
from g2torus.services.lattice import check_constraints, non_integral_rows

logger = logging.getLogger(__name__)

Coefficient = Union[Fraction, float, np.ndarray]
# (fiber generators 0..5, base indices 0..3, symbol name or "")
Key = Tuple[Tuple[int, ...], Tuple[int, ...], str]

DUAL_OFFSET = 3


def _sorted_with_sign(indices: Sequence[int]) -> Tuple[int, Tuple[int, ...]]:
    return permutation_sign(indices), tuple(sorted(indices))


def _magnitude(value: Coefficient) -> Union[Fraction, float]:
    if isinstance(value, np.ndarray):
        return float(np.max(np.abs(value))) if value.size else 0.0
    return abs(value)


class CorrespondenceAlgebra:
    """
    Differential graded algebra of invariant forms on P ×_M P′.

    dσ_j = β_j, dσ′_j = β′_j, d of a constant base form is zero, and symbolic generators
    (Chern-Simons and dilaton terms) carry a registered differential.
    """

    def __init__(self, beta: Sequence[Dict[Tuple[int, ...], Coefficient]],
                 beta_dual: Sequence[Dict[Tuple[int, ...], Coefficient]], exact: bool = True):
        if len(beta) != 3 or len(beta_dual) != 3:
            raise DomainError("need three curvature forms on each side")
        self.exact = exact
        self.curvatures = tuple(dict(terms) for terms in beta) + tuple(dict(terms) for terms in beta_dual)
        self.symbol_degrees: Dict[str, int] = {}
        self.symbol_differentials: Dict[str, Optional["CorrespondenceElement"]] = {}

    def scalar(self, value: Coefficient) -> Coefficient:
        if isinstance(value, np.ndarray):
            return value
        return Fraction(value) if self.exact else float(value)

    def register_symbol(self, name: str, degree: int,
                        differential: Optional["CorrespondenceElement"] = None):
        """``differential = None`` marks a generator whose d is not available in this mode."""
        if differential is not None and differential.degree != degree + 1:
            raise DomainError(f"d({name}) must have degree {degree + 1}")
        self.symbol_degrees[name] = degree
        self.symbol_differentials[name] = differential

    def zero(self, degree: int) -> "CorrespondenceElement":
        return CorrespondenceElement(self, degree, {})

    def generator(self, index: int) -> "CorrespondenceElement":
        if not 0 <= index < 6:
            raise DomainError(f"fiber generator index must lie in 0..5, got {index}")
        return CorrespondenceElement(self, 1, {((index,), (), ""): self.scalar(1)})

    def sigma(self, j: int) -> "CorrespondenceElement":
        return self.generator(j)

    def sigma_dual(self, j: int) -> "CorrespondenceElement":
        return self.generator(DUAL_OFFSET + j)

    def base(self, degree: int, terms: Dict[Sequence[int], Coefficient]) -> "CorrespondenceElement":
        result: Dict[Key, Coefficient] = {}
        for indices, value in terms.items():
            if len(indices) != degree:
                raise DomainError(f"base term {tuple(indices)} does not have degree {degree}")
            sign, ordered = _sorted_with_sign(indices)
            if sign:
                _accumulate(result, ((), ordered, ""), sign * self.scalar(value))
        return CorrespondenceElement(self, degree, result)

    def symbol(self, name: str) -> "CorrespondenceElement":
        if name not in self.symbol_degrees:
            raise DomainError(f"unknown symbolic generator {name!r}")
        return CorrespondenceElement(self, self.symbol_degrees[name], {((), (), name): self.scalar(1)})

    def curvature(self, index: int) -> "CorrespondenceElement":
        """dσ for generator ``index`` as a base 2-form."""
        return self.base(2, self.curvatures[index])

    def pull_back(self, terms: Dict[Tuple[Tuple[int, ...], Tuple[int, ...]], Coefficient], degree: int,
                  primed: bool = False) -> "CorrespondenceElement":
        """
        q* (or q′* when ``primed``): fiber generators of one bundle go to σ (or σ′), base
        forms pull back identically.
        """
        offset = DUAL_OFFSET if primed else 0
        result: Dict[Key, Coefficient] = {}
        for (fiber, base_indices), value in terms.items():
            if any(not 0 <= i < 3 for i in fiber):
                raise DomainError(f"bundle fiber indices must lie in 0..2, got {fiber}")
            fiber_sign, fiber_sorted = _sorted_with_sign([i + offset for i in fiber])
            base_sign, base_sorted = _sorted_with_sign(base_indices)
            if fiber_sign and base_sign:
                _accumulate(result, (fiber_sorted, base_sorted, ""), fiber_sign * base_sign * self.scalar(value))
        element = CorrespondenceElement(self, degree, result)
        element.check_degrees()
        return element


def _accumulate(terms: Dict[Key, Coefficient], key: Key, value: Coefficient):
    terms[key] = terms[key] + value if key in terms else value


@dataclass(frozen=True, eq=False)
class CorrespondenceElement:
    algebra: CorrespondenceAlgebra
    degree: int
    terms: Dict[Key, Coefficient] = field(default_factory=dict)

    __array_ufunc__ = None

    def _key_degree(self, key: Key) -> int:
        fiber, base_indices, symbol = key
        return len(fiber) + len(base_indices) + (self.algebra.symbol_degrees[symbol] if symbol else 0)

    def check_degrees(self):
        for key in self.terms:
            if self._key_degree(key) != self.degree:
                raise DomainError(f"term {key} does not have degree {self.degree}")

    def _combine(self, other: "CorrespondenceElement", sign: int) -> "CorrespondenceElement":
        if other.algebra is not self.algebra or other.degree != self.degree:
            raise DomainError("elements live in different algebras or have different degrees")
        terms = dict(self.terms)
        for key, value in other.terms.items():
            _accumulate(terms, key, sign * value)
        return CorrespondenceElement(self.algebra, self.degree, terms)

    def __add__(self, other: "CorrespondenceElement") -> "CorrespondenceElement":
        return self._combine(other, 1)

    def __sub__(self, other: "CorrespondenceElement") -> "CorrespondenceElement":
        return self._combine(other, -1)

    def __neg__(self) -> "CorrespondenceElement":
        return self * -1

    def __mul__(self, factor: Union[int, Fraction, float]) -> "CorrespondenceElement":
        factor = self.algebra.scalar(factor)
        return CorrespondenceElement(self.algebra, self.degree, {k: factor * v for k, v in self.terms.items()})

    __rmul__ = __mul__

    def wedge(self, other: "CorrespondenceElement") -> "CorrespondenceElement":
        if other.algebra is not self.algebra:
            raise DomainError("elements live in different algebras")
        result: Dict[Key, Coefficient] = {}
        for (left_fiber, left_base, left_symbol), a in self.terms.items():
            for (right_fiber, right_base, right_symbol), b in other.terms.items():
                if left_symbol or right_symbol:
                    raise DomainError("symbolic generators do not enter products")
                fiber_sign, fiber = _sorted_with_sign(left_fiber + right_fiber)
                base_sign, base_indices = _sorted_with_sign(left_base + right_base)
                if not (fiber_sign and base_sign):
                    continue
                sign = fiber_sign * base_sign * (-1) ** (len(left_base) * len(right_fiber))
                _accumulate(result, (fiber, base_indices, ""), sign * (a * b))
        return CorrespondenceElement(self.algebra, self.degree + other.degree, result)

    def d(self) -> "CorrespondenceElement":
        """
        d(σ_I ∧ ê^A) = Σ_r (-1)^r σ_{I∖i_r} ∧ dσ_{i_r} ∧ ê^A; base coefficients must be constant.

        Raises:
            DomainError: a symbolic generator without a differential, or a varying grid coefficient
        """
        algebra = self.algebra
        result = algebra.zero(self.degree + 1)
        for (fiber, base_indices, symbol), value in self.terms.items():
            if symbol:
                differential = algebra.symbol_differentials[symbol]
                if differential is None:
                    raise DomainError(f"d({symbol}) is not available for this pair")
                result = result + differential * value if not isinstance(value, np.ndarray) \
                    else result + _scaled(differential, value)
                continue
            if isinstance(value, np.ndarray) and np.ptp(value) > 0:
                raise DomainError("exterior derivative of a varying grid coefficient")
            terms: Dict[Key, Coefficient] = {}
            for position, index in enumerate(fiber):
                rest = fiber[:position] + fiber[position + 1:]
                for plane, coefficient in algebra.curvatures[index].items():
                    sign, ordered = _sorted_with_sign(tuple(plane) + base_indices)
                    if sign:
                        _accumulate(terms, (rest, ordered, ""),
                                    (-1) ** position * sign * algebra.scalar(coefficient) * value)
            result = result + CorrespondenceElement(algebra, self.degree + 1, terms)
        return result

    def norm(self) -> Union[Fraction, float]:
        """Largest coefficient magnitude; an exact Fraction in exact mode."""
        return max((_magnitude(value) for value in self.terms.values()), default=self.algebra.scalar(0))

    def is_zero(self) -> bool:
        return self.norm() == 0

    def coefficient(self, fiber: Sequence[int], base_indices: Sequence[int] = (), symbol: str = "") -> Coefficient:
        fiber_sign, fiber_sorted = _sorted_with_sign(fiber)
        base_sign, base_sorted = _sorted_with_sign(base_indices)
        if not (fiber_sign and base_sign):
            return self.algebra.scalar(0)
        return fiber_sign * base_sign * self.terms.get((fiber_sorted, base_sorted, symbol), self.algebra.scalar(0))


def _scaled(element: CorrespondenceElement, factor: np.ndarray) -> CorrespondenceElement:
    return CorrespondenceElement(element.algebra, element.degree, {k: v * factor for k, v in element.terms.items()})


def _plane_terms(row: Sequence[Coefficient]) -> Dict[Tuple[int, int], Coefficient]:
    return {plane: value for plane, value in zip(PERIOD_PLANES, row)}


@dataclass(frozen=True, eq=False)
class DualPair:
    """A scenario and its T-dual, sharing u, α and the instanton data."""

    scenario: Scenario
    dual_scenario: Scenario
    _algebras: Dict[bool, CorrespondenceAlgebra] = field(default_factory=dict, repr=False)

    def same_dilaton(self) -> bool:
        return np.array_equal(self.scenario.u.values, self.dual_scenario.u.values)

    def algebra(self, exact: bool = True) -> CorrespondenceAlgebra:
        if exact not in self._algebras:
            self._algebras[exact] = _build_algebra(self, exact)
        return self._algebras[exact]


def _build_algebra(pair: DualPair, exact: bool) -> CorrespondenceAlgebra:
    s, dual = pair.scenario, pair.dual_scenario
    if s.beta.periods is None or dual.beta.periods is None:
        raise DomainError("the correspondence algebra needs integer periods on both sides")
    algebra = CorrespondenceAlgebra(
        [_plane_terms(row) for row in s.beta.periods.tolist()],
        [_plane_terms(row) for row in dual.beta.periods.tolist()],
        exact=exact,
    )
    pairing = algebra.zero(4)
    instantons = s.instantons
    if instantons.curvatures:
        if instantons.periods is None:
            raise DomainError("instanton curvatures need integer periods")
        alpha = algebra.scalar(instantons.alpha)
        for weight, row in zip(instantons.weights, instantons.periods.tolist()):
            curvature = algebra.base(2, _plane_terms(row))
            pairing = pairing + (alpha * algebra.scalar(weight) / 4) * curvature.wedge(curvature)
    algebra.register_symbol("CS", 3, pairing)
    # dD = -Δh dvol vanishes for a constant dilaton
    constant_u = np.ptp(s.u.values) <= tolerances.IDENTITY
    algebra.register_symbol("D", 3, algebra.zero(4) if constant_u else None)
    return algebra


def dualize(s: Scenario) -> DualPair:
    """
    (t², β) ↦ (1/t², -t²β) with the same u, α and instanton data.

    Raises:
        NotDualizableError: some t²β_j has non-integral periods, or the original
            certificate fails
    """
    if s.beta.periods is None:
        raise NotDualizableError("T-duality needs the integer periods of beta")
    rows = non_integral_rows(None, s.beta.periods, t_squared=s.t_squared)
    if rows:
        raise NotDualizableError(
            f"t²·[β_{rows[0] + 1}/2π] is not integral for t² = {s.t_squared}", index=rows[0]
        )
    if s.certificate is not None and not s.certificate.passed:
        raise NotDualizableError(f"constraint certificate of {s.name!r} fails")

    t_squared = s.t_squared
    dual_t_squared = 1 / t_squared if isinstance(t_squared, Fraction) else 1.0 / float(t_squared)
    dual_periods = np.array([[int(round(-t_squared * n)) for n in row] for row in s.beta.periods.tolist()])
    dual_beta = BetaTriple.from_periods(s.base, dual_periods)
    certificate = _dual_certificate(s, dual_beta, dual_t_squared)

    name = s.name[:-5] if s.name.endswith("_dual") else f"{s.name}_dual"
    dual = Scenario(s.base, dual_beta, dual_t_squared, s.instantons, s.u_mode, s.u, s.h, name, certificate)
    logger.info(f"Dualized {s.name!r}: t'² = {dual_t_squared}, beta' periods = {dual_periods.tolist()}")
    return DualPair(s, dual)


def _dual_certificate(s: Scenario, dual_beta: BetaTriple, dual_t_squared):
    certificate = s.certificate
    if certificate is None:
        return None
    if certificate.lattice == "T4":
        return t4_certificate(dual_beta, dual_t_squared, s.instantons, certificate.r)
    scale = Fraction(s.t_squared) ** 2 if isinstance(s.t_squared, Rational) else float(s.t_squared) ** 2
    q_values = [scale * q for q in certificate.q_values]
    if any(isinstance(q, Fraction) and q.denominator != 1 for q in q_values):
        raise NotDualizableError("dual classes are not integral")
    return check_constraints(
        None, certificate.alpha, certificate.r, [int(round(q)) for q in q_values], certificate.c2_base,
        t_squared=dual_t_squared, lattice=certificate.lattice,
        rank_bound_enforced=certificate.rank_bound_enforced,
    )


def _closed_form_torsion_terms(s: Scenario, algebra: CorrespondenceAlgebra):
    """t²Σ σ_j ∧ β_j in bundle generators (dilaton term handled separately)."""
    t_squared = algebra.scalar(s.t_squared)
    terms = {}
    for j, row in enumerate(s.beta.periods.tolist()):
        for plane, n in _plane_terms(row).items():
            terms[((j,), plane)] = terms.get(((j,), plane), 0) + t_squared * n
    return terms


def _pipeline_torsion_terms(s: Scenario, H: FiberedForm):
    # dx^A = Π_a (L_a/√(2π)) ê^A
    sides = s.base.side_lengths
    terms = {}
    for fiber, field_ in H.terms.items():
        for position, base_indices in enumerate(basis(4, field_.degree)):
            factor = float(np.prod([sides[a] / sqrt(2.0 * pi) for a in base_indices]))
            terms[(fiber, base_indices)] = factor * field_.coefficients[position]
    return terms


def string_representative(pair: DualPair, primed: bool = False, exact: bool = True) -> CorrespondenceElement:
    """
    Ĥ = -q*H + CS (or -q′*H′ + CS for the dual), with the common Chern-Simons generator.

    Exact mode uses H = t²Σσ_j∧β_j - D with a symbolic dilaton term D; pipeline mode
    pulls back the numerically computed -*(dφ - du∧φ).
    """
    algebra = pair.algebra(exact)
    s = pair.dual_scenario if primed else pair.scenario
    if exact:
        H = algebra.pull_back(_closed_form_torsion_terms(s, algebra), 3, primed) - algebra.symbol("D")
    else:
        H = algebra.pull_back(_pipeline_torsion_terms(s, torsion_H(s)), 3, primed)
    return -H + algebra.symbol("CS")


def fiber_pairing_form(pair: DualPair, exact: bool = True,
                       permutation: Sequence[int] = (0, 1, 2)) -> CorrespondenceElement:
    """F = -Σ σ_j ∧ σ′_{π(j)}."""
    algebra = pair.algebra(exact)
    result = algebra.zero(2)
    for j, k in enumerate(permutation):
        result = result - algebra.sigma(j).wedge(algebra.sigma_dual(k))
    return result


def verify_duality_identity(pair: DualPair, exact: bool = True) -> Union[Fraction, float]:
    """
    |q*Ĥ - q′*Ĥ′ + d Σ σ_j ∧ σ′_j|, exactly zero in exact mode.

    Raises:
        DomainError: the pair does not share its dilaton
    """
    if not pair.same_dilaton():
        raise DomainError("the scenarios of a dual pair must share u")
    lhs = string_representative(pair, False, exact) - string_representative(pair, True, exact)
    rhs = fiber_pairing_form(pair, exact).d()
    residual = (lhs - rhs).norm()
    logger.info(f"Duality identity ({'exact' if exact else 'pipeline'}): residual = {residual}")
    return residual


def verify_string_class_closed(pair: DualPair) -> Tuple[Union[Fraction, float], Union[Fraction, float]]:
    """
    |dĤ| and |dĤ′|; dĤ = -dH + ⟨F ∧ F⟩ vanishes on solutions.

    Raises:
        DomainError: the dilaton is not constant, so dD has no exact representative
    """
    return tuple(string_representative(pair, primed).d().norm() for primed in (False, True))


def pairing_matrix(pair: DualPair, form: Optional[CorrespondenceElement] = None) -> List[List[Coefficient]]:
    """Matrix F(∂_{σ_j}, ∂_{σ′_k}) of a 2-form on Ker dq ⊗ Ker dq′."""
    form = fiber_pairing_form(pair) if form is None else form
    if form.degree != 2:
        raise DomainError(f"the pairing must be a 2-form, got degree {form.degree}")
    return [[form.coefficient((j, DUAL_OFFSET + k)) for k in range(3)] for j in range(3)]


def verify_pairing_nondegeneracy(pair: DualPair, form: Optional[CorrespondenceElement] = None) -> bool:
    matrix = pairing_matrix(pair, form)
    if all(isinstance(value, Rational) for row in matrix for value in row):
        return sympy.Matrix(matrix).det() != 0
    return not isclose(float(np.linalg.det(np.array(matrix, dtype=float))), 0.0, abs_tol=tolerances.ALGEBRA)


def duality_report(pair: DualPair, tol: Optional[Tolerances] = None) -> DualityReport:
    tol = tolerances if tol is None else tol
    identity = [
        ResidualEntry.check("duality_exact", float(verify_duality_identity(pair, exact=True)), tol.IDENTITY,
                            "q*Ĥ - q′*Ĥ′ = -d Σ σ_j ∧ σ′_j"),
        ResidualEntry.check("duality_pipeline", float(verify_duality_identity(pair, exact=False)), tol.FIELD,
                            "q*Ĥ - q′*Ĥ′ = -d Σ σ_j ∧ σ′_j with H = -*(dφ - du∧φ)"),
    ]
    try:
        closed, closed_dual = verify_string_class_closed(pair)
    except DomainError as exc:
        logger.warning(f"String class check skipped: {exc}")
    else:
        identity.append(ResidualEntry.check("string_class", float(closed), tol.IDENTITY, "d(-q*H + CS) = 0"))
        identity.append(ResidualEntry.check("string_class_dual", float(closed_dual), tol.IDENTITY,
                                            "d(-q′*H′ + CS) = 0"))
    matrix = pairing_matrix(pair)
    return DualityReport(
        original=verify_solution(pair.scenario, tol),
        dual=verify_solution(pair.dual_scenario, tol),
        identity=identity,
        pairing_matrix=[[str(value) for value in row] for row in matrix],
        pairing_nondegenerate=verify_pairing_nondegeneracy(pair),
    )
