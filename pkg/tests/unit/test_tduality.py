from fractions import Fraction

import numpy as np
import pytest

from g2torus.core.exceptions import DomainError, NotDualizableError
from g2torus.schemas.scenario import ScenarioConfig
from g2torus.services.ansatz import balanced_scenario, fourier_dilaton, make_scenario, scenario_from_config
from g2torus.services.fibered_calculus import BetaTriple
from g2torus.services.tduality import (
    CorrespondenceAlgebra,
    DualPair,
    dualize,
    duality_report,
    fiber_pairing_form,
    pairing_matrix,
    string_representative,
    verify_duality_identity,
    verify_pairing_nondegeneracy,
    verify_string_class_closed,
)

from tests.conftest import UNIT_PERIODS

HALF_PERIODS = [
    [1, -1, 0, 0, 0, 0],
    [0, 0, 1, -1, 0, 0],
    [0, 0, 0, 0, 0, 0],
]


@pytest.fixture
def t2_pair(small_torus):
    beta = BetaTriple.from_periods(small_torus, HALF_PERIODS)
    return dualize(balanced_scenario(small_torus, beta, t_squared=Fraction(2), h0=2.0, name="tdual_t2"))


@pytest.mark.unit
class TestDualize:
    def test_dual_data(self, t2_pair):
        dual = t2_pair.dual_scenario
        assert dual.t_squared == Fraction(1, 2)
        assert dual.beta.periods.tolist() == [[-2, 2, 0, 0, 0, 0], [0, 0, -2, 2, 0, 0], [0] * 6]
        assert dual.instantons is t2_pair.scenario.instantons
        assert dual.name == "tdual_t2_dual"
        assert t2_pair.same_dilaton()

    def test_dual_certificate(self, t2_pair):
        original, dual = t2_pair.scenario.certificate, t2_pair.dual_scenario.certificate
        assert dual.ratio == original.ratio == Fraction(-2)
        assert dual.passed

    def test_involution(self, balanced):
        twice = dualize(dualize(balanced).dual_scenario).dual_scenario
        assert twice.t_squared == balanced.t_squared
        assert np.array_equal(twice.beta.periods, balanced.beta.periods)
        assert twice.name == balanced.name

    def test_non_integral_dual(self, small_torus, unit_beta):
        s = balanced_scenario(small_torus, unit_beta, t_squared=Fraction(1, 3))
        with pytest.raises(NotDualizableError) as excinfo:
            dualize(s)
        assert excinfo.value.index == 0

    def test_failing_certificate(self):
        classes = [[0] * 16 + [1, -1, 0, 0, 0, 0], [0] * 16 + [0, 0, 1, -1, 0, 0], [0] * 22]
        cfg = ScenarioConfig(beta_periods=UNIT_PERIODS, grid=4,
                             lattice={"name": "K3", "classes": classes, "rank": 30})
        s = scenario_from_config(cfg)
        assert not s.certificate.passed
        with pytest.raises(NotDualizableError) as excinfo:
            dualize(s)
        assert excinfo.value.index is None

    def test_k3_certificate_follows(self):
        classes = [[0] * 16 + [1, -1, 0, 0, 0, 0], [0] * 16 + [0, 0, 1, -1, 0, 0], [0] * 22]
        cfg = ScenarioConfig(beta_periods=UNIT_PERIODS, grid=4,
                             lattice={"name": "K3", "classes": classes, "rank": 2})
        pair = dualize(scenario_from_config(cfg))
        assert pair.dual_scenario.certificate.lattice == "K3"
        assert pair.dual_scenario.certificate.ratio == pair.scenario.certificate.ratio


@pytest.mark.unit
class TestDualityIdentity:
    def test_exact_identity_balanced(self, balanced):
        residual = verify_duality_identity(dualize(balanced))
        assert isinstance(residual, Fraction)
        assert residual == 0

    def test_exact_identity_rescaled(self, t2_pair):
        assert verify_duality_identity(t2_pair) == Fraction(0)

    def test_pipeline_identity(self, t2_pair):
        assert verify_duality_identity(t2_pair, exact=False) < 1e-9

    def test_identity_with_varying_dilaton(self, small_torus, unit_beta):
        u = fourier_dilaton(small_torus, [{"k": [1, 0, 0, 0], "amplitude": 0.01}])
        pair = dualize(make_scenario(small_torus, unit_beta, Fraction(1), u_mode="prescribed", u=u))
        assert verify_duality_identity(pair) == 0
        with pytest.raises(DomainError):
            verify_string_class_closed(pair)

    def test_dilaton_must_match(self, small_torus, unit_beta, balanced):
        other = balanced_scenario(small_torus, unit_beta, t_squared=Fraction(1), h0=2.0)
        with pytest.raises(DomainError):
            verify_duality_identity(DualPair(balanced, other))

    def test_representatives_differ(self, t2_pair):
        difference = string_representative(t2_pair) - string_representative(t2_pair, primed=True)
        assert not difference.is_zero()
        assert difference.coefficient((0,), (0, 1)) == Fraction(-2)

    def test_string_classes_closed(self, balanced, t2_pair):
        assert verify_string_class_closed(dualize(balanced)) == (0, 0)
        assert verify_string_class_closed(t2_pair) == (0, 0)

    def test_report(self, t2_pair):
        report = duality_report(t2_pair)
        assert [entry.name for entry in report.identity] == [
            "duality_exact", "duality_pipeline", "string_class", "string_class_dual",
        ]
        assert all(entry.passed for entry in report.identity)
        assert report.pairing_matrix == [["-1", "0", "0"], ["0", "-1", "0"], ["0", "0", "-1"]]
        assert report.pairing_nondegenerate
        assert report.original.passed and report.dual.passed


@pytest.mark.unit
class TestPairing:
    def test_matrix_is_minus_identity(self, balanced):
        assert pairing_matrix(dualize(balanced)) == [[-1, 0, 0], [0, -1, 0], [0, 0, -1]]

    def test_zero_form_is_degenerate(self, balanced):
        pair = dualize(balanced)
        assert not verify_pairing_nondegeneracy(pair, pair.algebra().zero(2))

    def test_permuted_form(self, balanced):
        pair = dualize(balanced)
        form = fiber_pairing_form(pair, permutation=(1, 2, 0))
        assert pairing_matrix(pair, form)[0] == [0, -1, 0]
        assert verify_pairing_nondegeneracy(pair, form)

    def test_float_pairing(self, balanced):
        pair = dualize(balanced)
        assert verify_pairing_nondegeneracy(pair, fiber_pairing_form(pair, exact=False))

    def test_degree_checked(self, balanced):
        pair = dualize(balanced)
        with pytest.raises(DomainError):
            pairing_matrix(pair, pair.algebra().sigma(0))


@pytest.mark.unit
class TestCorrespondenceAlgebra:
    def setup_method(self):
        beta = [{(0, 1): 1, (2, 3): -1}, {(0, 2): 2, (3, 1): -2}, {}]
        beta_dual = [{(0, 1): -1, (2, 3): 1}, {}, {(0, 3): 3, (1, 2): -3}]
        self.algebra = CorrespondenceAlgebra(beta, beta_dual)

    def test_d_of_generators(self):
        assert self.algebra.sigma(0).d().coefficient((), (0, 1)) == 1
        assert self.algebra.sigma(0).d().coefficient((), (1, 0)) == -1
        assert self.algebra.sigma(2).d().is_zero()

    def test_d_squared_vanishes(self):
        a = self.algebra
        elements = [
            a.sigma(0).wedge(a.sigma_dual(1)),
            a.sigma(0).wedge(a.sigma(1)).wedge(a.sigma_dual(2)),
            a.sigma(1).wedge(a.base(1, {(3,): Fraction(1, 2)})),
            a.sigma(0).wedge(a.sigma(1)).wedge(a.sigma(2)),
            a.sigma_dual(0).wedge(a.sigma_dual(2)) * 5,
        ]
        for element in elements:
            assert element.d().d().is_zero()

    def test_leibniz(self):
        a = self.algebra
        x, y = a.sigma(0), a.sigma_dual(2).wedge(a.sigma(1))
        assert (x.wedge(y).d() - (x.d().wedge(y) - x.wedge(y.d()))).is_zero()

    def test_symbols(self):
        a = self.algebra
        a.register_symbol("S", 1, a.base(2, {(0, 1): 7}))
        assert a.symbol("S").d().coefficient((), (0, 1)) == 7
        with pytest.raises(DomainError):
            a.symbol("S").wedge(a.sigma(0))
        with pytest.raises(DomainError):
            a.register_symbol("T", 2, a.base(2, {(0, 1): 1}))
        with pytest.raises(DomainError):
            a.symbol("missing")

    def test_symbol_without_differential(self):
        a = self.algebra
        a.register_symbol("U", 3)
        with pytest.raises(DomainError):
            a.symbol("U").d()

    def test_validation(self):
        with pytest.raises(DomainError):
            self.algebra.generator(6)
        with pytest.raises(DomainError):
            self.algebra.base(2, {(0,): 1})
        with pytest.raises(DomainError):
            self.algebra.pull_back({((3,), ()): 1}, 1)
        with pytest.raises(DomainError):
            CorrespondenceAlgebra([{}], [{}, {}, {}])
        with pytest.raises(DomainError):
            self.algebra.sigma(0) + self.algebra.base(2, {(0, 1): 1})
