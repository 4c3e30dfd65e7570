import logging
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from g2torus.core.exceptions import DomainError
from g2torus.services.lattice import (
    IntersectionLattice,
    check_constraints,
    duality_ratio_invariant,
    e8_cartan,
    instanton_charge,
    k3_lattice,
    lattice_for,
    non_integral_rows,
    pairing,
    q_value,
    t4_class_of_periods,
    t4_lattice,
    t4_q_values,
    tdual_integrality,
)

from tests.conftest import UNIT_PERIODS


@pytest.mark.unit
class TestLattices:
    def test_k3(self):
        lattice = k3_lattice()
        assert lattice.rank == 22
        assert lattice.signature == (3, 19)

    def test_t4(self):
        lattice = lattice_for("T4")
        assert lattice.rank == 6
        assert lattice.signature == (3, 3)

    def test_t4_is_three_hyperbolic_planes(self):
        gram = t4_lattice().gram
        assert np.array_equal(gram[:2, :2], [[0, 1], [1, 0]])
        assert np.count_nonzero(gram) == 6

    def test_t4_class_of_periods(self):
        assert t4_class_of_periods(UNIT_PERIODS) == UNIT_PERIODS
        with pytest.raises(DomainError):
            t4_class_of_periods([[1, 0, 0, 0]])
        with pytest.raises(DomainError):
            t4_class_of_periods([[0.5, 0, 0, 0, 0, 0]])

    def test_e8_is_unimodular(self):
        assert round(np.linalg.det(e8_cartan().astype(float))) == 1

    def test_unknown_lattice(self):
        with pytest.raises(DomainError):
            lattice_for("Enriques")

    def test_rejects_odd_or_degenerate(self):
        with pytest.raises(DomainError):
            IntersectionLattice("odd", np.array([[1, 0], [0, 1]]))
        with pytest.raises(DomainError):
            IntersectionLattice("degenerate", np.array([[2, 0], [0, 2]]))
        with pytest.raises(DomainError):
            IntersectionLattice("asymmetric", np.array([[0, 1], [2, 0]]))

    def test_hyperbolic_class(self):
        lattice = lattice_for("T4")
        assert q_value(lattice, [1, 1, 0, 0, 0, 0]) == 2
        assert q_value(lattice, [1, -1, 0, 0, 0, 0]) == -2
        assert pairing(lattice, [1, 0, 0, 0, 0, 0], [0, 1, 0, 0, 0, 0]) == 1

    def test_e8_root(self):
        root = [1] + [0] * 21
        assert q_value(k3_lattice(), root) == -2

    def test_class_vector_checks(self):
        with pytest.raises(DomainError):
            q_value(lattice_for("T4"), [1, 0, 0])
        with pytest.raises(DomainError):
            q_value(lattice_for("T4"), [0.5, 0, 0, 0, 0, 0])

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.integers(-20, 20), min_size=22, max_size=22))
    def test_k3_is_even(self, vector):
        assert q_value(k3_lattice(), vector) % 2 == 0

    def test_t4_q_values(self):
        assert t4_q_values(UNIT_PERIODS) == [-2, -2, -2]


@pytest.mark.unit
class TestConstraintCertificate:
    def test_reference_case(self):
        certificate = check_constraints(1, -1, 5, [-2, -2, -2])
        assert certificate.exact
        assert certificate.ratio == 12
        assert certificate.integrality_ok
        assert certificate.c2_target == 36
        assert certificate.rank_ok
        assert certificate.passed

    def test_rank_bound(self):
        assert check_constraints(1, -1, 36, [-2, -2, -2]).rank_ok
        assert not check_constraints(1, -1, 37, [-2, -2, -2]).rank_ok

    def test_positive_alpha_restricts_rank(self):
        for t_squared in (Fraction(1), Fraction(2), Fraction(4)):
            certificate = check_constraints(None, 1, 1, [-2, -2, -2], t_squared=t_squared)
            assert certificate.c2_target == 24 - 12 * t_squared
        assert not check_constraints(None, 1, 1, [-2, -2, -2], t_squared=Fraction(3)).rank_ok

    def test_non_integral_ratio(self):
        certificate = check_constraints(None, 5, 1, [-2, 0, 0], t_squared=Fraction(1))
        assert certificate.ratio == Fraction(-4, 5)
        assert not certificate.integrality_ok
        assert not certificate.passed

    def test_zero_beta(self):
        certificate = check_constraints(1, 3, 24, [0, 0, 0])
        assert certificate.ratio == 0
        assert certificate.c2_target == 24
        assert certificate.passed

    def test_float_inputs_are_flagged(self, caplog):
        with caplog.at_level(logging.WARNING, logger="g2torus.services.lattice"):
            certificate = check_constraints(2 ** 0.5, -1, 1, [-2, -2, -2])
        assert not certificate.exact
        assert certificate.inexact_warning
        assert certificate.integrality_ok
        assert "floating point" in caplog.text

    def test_irrational_t_with_rational_square(self):
        certificate = check_constraints(2 ** 0.5, -1, 1, [-2, -2, -2], t_squared=Fraction(2))
        assert certificate.exact
        assert certificate.ratio == 24

    def test_monotone_in_rank(self):
        verdicts = [check_constraints(1, 2, r, [-2, -2, 0]).rank_ok for r in range(1, 40)]
        assert verdicts == sorted(verdicts, reverse=True)

    def test_report(self):
        report = check_constraints(Fraction(1, 2), -1, 2, [-2, -2, -2]).to_report()
        assert report.ratio == "3"
        assert report.c2_target == "27"
        assert report.t_squared == "1/4"

    @pytest.mark.parametrize("kwargs", [
        {"alpha": 0},
        {"r": 0},
        {"q_values": [-2, -2]},
        {"c1": 1},
        {"t": 0},
        {"t": None},
    ])
    def test_invalid_input(self, kwargs):
        arguments = {"t": 1, "alpha": -1, "r": 1, "q_values": [-2, -2, -2]}
        arguments.update(kwargs)
        with pytest.raises(DomainError):
            check_constraints(**arguments)


@pytest.mark.unit
class TestDualityArithmetic:
    def test_integrality(self):
        assert tdual_integrality(None, UNIT_PERIODS, t_squared=Fraction(1))
        assert tdual_integrality(None, UNIT_PERIODS, t_squared=Fraction(2))
        assert not tdual_integrality(None, UNIT_PERIODS, t_squared=Fraction(1, 3))
        assert tdual_integrality(None, [[3, -3, 0, 0, 0, 0]], t_squared=Fraction(1, 3))

    def test_non_integral_rows(self):
        periods = [[3, -3, 0, 0, 0, 0], [1, -1, 0, 0, 0, 0], [0] * 6]
        assert non_integral_rows(None, periods, t_squared=Fraction(1, 3)) == [1]
        assert non_integral_rows(3 ** -0.5, periods) == [1]

    def test_ratio_is_duality_invariant(self):
        assert duality_ratio_invariant(Fraction(2), Fraction(8), UNIT_PERIODS)
        assert duality_ratio_invariant(Fraction(1, 3), Fraction(-1), [[3, -3, 0, 0, 0, 0]] * 3)

    def test_ratio_invariance_needs_integral_dual(self):
        with pytest.raises(DomainError):
            duality_ratio_invariant(Fraction(1, 2), 1, UNIT_PERIODS)

    def test_instanton_charge(self):
        assert instanton_charge([1, 1, 1], UNIT_PERIODS) == Fraction(-3)
        assert instanton_charge([Fraction(1, 2)], [[2, -2, 0, 0, 0, 0]]) == Fraction(-2)
        assert instanton_charge([0.5], [[1, -1, 0, 0, 0, 0]]) == pytest.approx(-0.5)
        with pytest.raises(DomainError):
            instanton_charge([1], UNIT_PERIODS)
