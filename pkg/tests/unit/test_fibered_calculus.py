from math import comb

import numpy as np
import pytest

from g2torus.core.config import settings
from g2torus.core.exceptions import DomainError, ObstructedSourceError
from g2torus.services.fibered_calculus import (
    BaseField,
    BetaTriple,
    FiberedForm,
    Torus4,
    fibered_d,
    fibered_star,
    laplacian,
    poisson_solve,
    spectral_d,
)

from tests.conftest import UNIT_PERIODS


def _trig_modes(rng, count=4, max_wavenumber=2):
    """A handful of integer wave vectors with random amplitudes and phases."""
    vectors = rng.integers(-max_wavenumber, max_wavenumber + 1, size=(count, 4))
    vectors = vectors[np.any(vectors != 0, axis=1)]
    return vectors, rng.standard_normal(len(vectors)), rng.uniform(0, 2 * np.pi, len(vectors))


def _phase(torus, vector):
    return sum(2 * np.pi * n * x / length for n, x, length in zip(vector, torus.coordinates, torus.side_lengths))


def _smooth_scalar(torus, rng):
    vectors, amplitudes, phases = _trig_modes(rng)
    values = sum(a * np.cos(_phase(torus, k) + p) for k, a, p in zip(vectors, amplitudes, phases))
    return torus.scalar(values)


def _smooth_form(torus, degree, rng):
    components = [_smooth_scalar(torus, rng).values for _ in range(comb(4, degree))]
    return BaseField(torus, degree, np.stack(components))


def _smooth_scalar_up_to(torus, rng, max_wavenumber):
    vectors, amplitudes, phases = _trig_modes(rng, count=6, max_wavenumber=max_wavenumber)
    values = sum(a * np.cos(_phase(torus, k) + p) for k, a, p in zip(vectors, amplitudes, phases))
    return torus.scalar(values)


@pytest.mark.unit
class TestTorus4:
    def test_rejects_bad_grid(self):
        with pytest.raises(DomainError):
            Torus4((1.0, 1.0, 1.0, 1.0), 6)

    def test_rejects_bad_sides(self):
        with pytest.raises(DomainError):
            Torus4((1.0, -1.0, 1.0, 1.0), 8)
        with pytest.raises(DomainError):
            Torus4((1.0, 1.0, 1.0), 8)

    def test_volume_and_integral(self):
        torus = Torus4((1.0, 2.0, 1.0, 1.5), 4)
        assert torus.volume == pytest.approx(3.0)
        assert torus.integrate(torus.scalar(2.0)) == pytest.approx(6.0)
        with pytest.raises(DomainError):
            torus.integrate(torus.two_form({(0, 1): 1.0}))

    def test_derivative_of_sine(self):
        torus = Torus4((2.0, 1.0, 1.0, 1.0), 8)
        x = torus.coordinates[0]
        derivative = torus.derivative(np.sin(np.pi * x), 0)
        assert np.allclose(derivative, np.pi * np.cos(np.pi * x), atol=1e-12)

    def test_constant_needs_matching_length(self, small_torus):
        with pytest.raises(DomainError):
            small_torus.constant(2, [1.0, 2.0])

    def test_hyperkahler_forms_are_self_dual(self, small_torus):
        for omega in small_torus.hyperkahler_triple:
            assert (omega.star() - omega).norm() < 1e-14
            assert omega.wedge(omega).values[0, 0, 0, 0] == pytest.approx(2.0)


@pytest.mark.unit
class TestBaseField:
    def test_shape_checked(self, small_torus):
        with pytest.raises(DomainError):
            BaseField(small_torus, 1, np.zeros((3,) + small_torus.shape))

    def test_d_squared_vanishes(self, small_torus, rng):
        for degree in range(3):
            field = _smooth_form(small_torus, degree, rng)
            assert spectral_d(spectral_d(field)).norm() < 1e-10 * (1.0 + field.norm())

    def test_d_of_top_form_is_zero(self, small_torus):
        assert small_torus.volume_form.d().norm() == 0.0

    def test_star_squares_to_sign(self, small_torus, rng):
        for degree in range(5):
            field = _smooth_form(small_torus, degree, rng)
            sign = (-1) ** (degree * (4 - degree))
            assert (field.star().star() - sign * field).norm() < 1e-12

    def test_laplacian_of_mode(self):
        torus = Torus4((1.0, 1.0, 0.5, 1.0), 8)
        values = np.cos(2 * np.pi * torus.coordinates[0] + 4 * np.pi * torus.coordinates[2])
        result = laplacian(torus.scalar(values))
        k_squared = (2 * np.pi) ** 2 + (4 * np.pi) ** 2
        assert np.allclose(result.values, k_squared * values, atol=1e-9)

    def test_laplacian_is_minus_divergence_of_gradient(self, small_torus, rng):
        f = _smooth_scalar(small_torus, rng)
        dual_divergence = f.d().star().d().star()
        assert (laplacian(f) + dual_divergence).norm() < 1e-9 * (1.0 + laplacian(f).norm())

    def test_bytes_round_trip(self, rng):
        torus = Torus4((1.0, 2.0, 3.0, 4.0), 4)
        field = BaseField(torus, 2, rng.standard_normal((6,) + torus.shape))
        restored = BaseField.from_bytes(field.to_bytes())
        assert restored.torus == torus
        assert restored.degree == 2
        assert np.array_equal(restored.coefficients, field.coefficients)

    def test_bytes_rejects_truncated_payload(self, small_torus):
        payload = small_torus.scalar(1.0).to_bytes()
        with pytest.raises(DomainError):
            BaseField.from_bytes(payload[:20])
        with pytest.raises(DomainError):
            BaseField.from_bytes(payload[:-8])

    def test_summary(self, small_torus):
        summary = small_torus.two_form({(0, 1): 3.0}).summary()
        assert summary["degree"] == 2
        assert summary["components"][0]["indices"] == [0, 1]
        assert summary["components"][0]["mean"] == pytest.approx(3.0)

    def test_leibniz_with_high_modes(self, small_torus, rng):
        # modes up to 3 on an 8-point grid: the raw grid product aliases
        f = _smooth_scalar_up_to(small_torus, rng, 3)
        alpha = BaseField(small_torus, 1, np.stack([_smooth_scalar_up_to(small_torus, rng, 3).values
                                                     for _ in range(4)]))
        lhs = f.wedge(alpha).d()
        rhs = f.d().wedge(alpha) + f.wedge(alpha.d())
        assert (lhs - rhs).norm() < 1e-10 * (1.0 + f.norm() * alpha.norm())

    def test_product_without_dealiasing_is_pointwise(self, small_torus, rng, monkeypatch):
        f = _smooth_scalar_up_to(small_torus, rng, 3)
        g = _smooth_scalar_up_to(small_torus, rng, 3)
        monkeypatch.setattr(settings, "DEALIAS", False)
        assert np.array_equal(f.wedge(g).values, f.values * g.values)
        monkeypatch.setattr(settings, "DEALIAS", True)
        assert not np.allclose(f.wedge(g).values, f.values * g.values)

    def test_constant_factor_is_exact(self, small_torus, rng):
        f = _smooth_scalar_up_to(small_torus, rng, 3)
        assert np.array_equal(small_torus.scalar(2.0).wedge(f).values, 2.0 * f.values)


@pytest.mark.unit
class TestPoisson:
    def test_matches_mode_sum(self, rng):
        torus = Torus4((1.0, 1.5, 1.0, 2.0), 8)
        vectors, amplitudes, phases = _trig_modes(rng, count=6)
        rho = np.zeros(torus.shape)
        expected = np.full(torus.shape, 1.7)
        for k, a, p in zip(vectors, amplitudes, phases):
            mode = a * np.cos(_phase(torus, k) + p)
            k_squared = sum((2 * np.pi * n / length) ** 2 for n, length in zip(k, torus.side_lengths))
            rho += mode
            expected += mode / k_squared

        h = poisson_solve(torus.scalar(rho), h0=1.7)
        assert np.abs(h.values - expected).max() < 1e-10
        assert h.values.mean() == pytest.approx(1.7)

    def test_laplacian_inverts_solve(self, small_torus, rng):
        rho = _smooth_scalar(small_torus, rng)
        h = poisson_solve(rho, h0=0.0)
        assert (laplacian(h) - rho).norm() < 1e-10

    def test_obstructed_source(self):
        torus = Torus4((1.0, 1.0, 2.0, 1.0), 4)
        with pytest.raises(ObstructedSourceError) as excinfo:
            poisson_solve(torus.scalar(3.0))
        assert excinfo.value.mismatch == pytest.approx(6.0)

    def test_requires_scalar(self, small_torus):
        with pytest.raises(DomainError):
            poisson_solve(small_torus.volume_form)


@pytest.mark.unit
class TestBetaTriple:
    def test_from_periods(self, small_torus):
        beta = BetaTriple.from_periods(small_torus, UNIT_PERIODS)
        assert beta[0].at((0, 0, 0, 0))[(0, 1)] == pytest.approx(2 * np.pi)
        assert beta[0].at((0, 0, 0, 0))[(2, 3)] == pytest.approx(-2 * np.pi)
        assert np.array_equal(beta.periods, np.asarray(UNIT_PERIODS))

    def test_self_dual_periods_rejected(self, small_torus):
        with pytest.raises(DomainError):
            BetaTriple.from_periods(small_torus, [[1, 1, 0, 0, 0, 0], [0] * 6, [0] * 6])

    def test_period_shape_and_type(self, small_torus):
        with pytest.raises(DomainError):
            BetaTriple.from_periods(small_torus, [[1, -1, 0, 0, 0, 0]])
        with pytest.raises(DomainError):
            BetaTriple.from_periods(small_torus, np.asarray(UNIT_PERIODS, dtype=float))

    def test_non_closed_rejected(self, small_torus):
        x = small_torus.coordinates[0]
        bump = np.sin(2 * np.pi * x)
        form = BaseField(small_torus, 2, np.stack([np.zeros_like(x)] * 5 + [bump]))
        anti = form - form.star()
        zero = small_torus.constant(2, np.zeros(6))
        with pytest.raises(DomainError):
            BetaTriple((anti, zero, zero))

    def test_scaled(self, unit_beta):
        scaled = unit_beta.scaled(-2.0)
        assert (scaled[1] + 2.0 * unit_beta[1]).norm() == 0.0


@pytest.mark.unit
class TestFiberedForm:
    def test_invalid_terms(self, unit_beta, small_torus):
        one_form = small_torus.constant(1, [1.0, 0.0, 0.0, 0.0])
        with pytest.raises(DomainError):
            FiberedForm(2, {(1, 0): one_form}, unit_beta)
        with pytest.raises(DomainError):
            FiberedForm(3, {(0,): one_form}, unit_beta)

    def test_fiber_permutation_sign(self, unit_beta, small_torus):
        f = small_torus.scalar(1.0)
        swapped = FiberedForm.fiber((1, 0), f, unit_beta)
        assert swapped.terms[(0, 1)].values[0, 0, 0, 0] == -1.0
        assert FiberedForm.fiber((1, 1), f, unit_beta).terms == {}

    def test_d_of_sigma_is_beta(self, unit_beta, small_torus):
        sigma = FiberedForm.fiber((2,), small_torus.scalar(1.0), unit_beta)
        assert (sigma.d().base_part() - unit_beta[2]).norm() < 1e-12

    def test_d_squared_vanishes(self, unit_beta, small_torus, rng):
        forms = [
            FiberedForm.fiber((0,), _smooth_form(small_torus, 1, rng), unit_beta),
            FiberedForm.fiber((0, 2), _smooth_scalar(small_torus, rng), unit_beta),
            FiberedForm.fiber((0, 1, 2), _smooth_scalar(small_torus, rng), unit_beta),
            FiberedForm.fiber((1,), _smooth_form(small_torus, 2, rng), unit_beta),
        ]
        for w in forms:
            assert w.d().d().norm() < 1e-9 * (1.0 + w.norm())

    def test_leibniz(self, unit_beta, small_torus, rng):
        a = FiberedForm.fiber((0,), _smooth_scalar(small_torus, rng), unit_beta)
        b = FiberedForm.fiber((1,), _smooth_form(small_torus, 1, rng), unit_beta)
        lhs = a.wedge(b).d()
        rhs = a.d().wedge(b) - a.wedge(b.d())
        assert (lhs - rhs).norm() < 1e-9 * (1.0 + a.norm() * b.norm())

    def test_star_of_fiber_volume(self, unit_beta, small_torus):
        sigma = FiberedForm.fiber((0, 1, 2), small_torus.scalar(1.0), unit_beta)
        u = small_torus.scalar(0.0)
        star = sigma.star(u, 2.0)
        assert star.degree == 4
        assert star.base_part().values[0, 0, 0, 0] == pytest.approx(1.0 / 8.0)

    def test_star_is_involution(self, unit_beta, small_torus, rng):
        u = small_torus.scalar(0.3)
        w = (
            FiberedForm.fiber((0,), _smooth_form(small_torus, 2, rng), unit_beta)
            + FiberedForm.fiber((1, 2), _smooth_form(small_torus, 1, rng), unit_beta)
        )
        assert (w.star(u, 1.7).star(u, 1.7) - w).norm() < 1e-10 * w.norm()

    def test_star_rejects_non_positive_scale(self, unit_beta, small_torus):
        sigma = FiberedForm.fiber((0,), small_torus.scalar(1.0), unit_beta)
        with pytest.raises(DomainError):
            sigma.star(small_torus.scalar(0.0), 0.0)

    def test_at_uses_seven_dimensional_coframe(self, unit_beta, small_torus):
        w = FiberedForm.fiber((0,), small_torus.constant(1, [0.0, 2.5, 0.0, 0.0]), unit_beta)
        form = w.at((1, 2, 3, 0))
        assert form.n == 7
        assert form[(0, 4)] == pytest.approx(2.5)

    def test_module_functions_match_methods(self, unit_beta, small_torus, rng):
        w = FiberedForm.fiber((0, 2), _smooth_form(small_torus, 1, rng), unit_beta)
        u = small_torus.scalar(0.2)
        assert (fibered_d(w) - w.d()).norm() == 0.0
        assert (fibered_star(w, u, 1.3) - w.star(u, 1.3)).norm() == 0.0
        assert fibered_star(w, u, 1.3).degree == 4

    def test_base_part_of_high_degree(self, unit_beta, small_torus):
        w = FiberedForm.fiber((0,), small_torus.volume_form, unit_beta)
        with pytest.raises(DomainError):
            w.base_part()
