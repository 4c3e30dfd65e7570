import logging
from dataclasses import dataclass
from functools import cached_property
from math import comb
from typing import Callable, Dict, Optional, Sequence, Tuple, Union

import numpy as np

from g2torus.core.config import settings, tolerances
from g2torus.core.exceptions import DomainError, ObstructedSourceError
from g2torus.services.exterior import (
    AlternatingForm,
    MetricData,
    basis,
    contract_coefficients,
    permutation_sign,
    wedge_coefficients,
)

logger = logging.getLogger(__name__)

FIBER = (0, 1, 2)
# Lattice basis of H^2(T^4): (dx01, dx23), (dx02, dx31), (dx03, dx12)
PERIOD_PLANES: Tuple[Tuple[int, int], ...] = ((0, 1), (2, 3), (0, 2), (3, 1), (0, 3), (1, 2))

_HEADER_INTS = 5
_HEADER_FLOATS = 4


@dataclass(frozen=True)
class Torus4:
    """Flat T^4 = R^4 / Π L_a Z with a uniform N^4 grid."""

    side_lengths: Tuple[float, float, float, float] = (1.0, 1.0, 1.0, 1.0)
    grid: int = 16

    def __post_init__(self):
        sides = tuple(float(length) for length in self.side_lengths)
        if len(sides) != 4 or min(sides) <= 0:
            raise DomainError(f"need four positive side lengths, got {self.side_lengths}")
        if self.grid < 2 or self.grid & (self.grid - 1):
            raise DomainError(f"grid resolution must be a power of two, got {self.grid}")
        object.__setattr__(self, "side_lengths", sides)

    @property
    def shape(self) -> Tuple[int, int, int, int]:
        return (self.grid,) * 4

    @property
    def volume(self) -> float:
        return float(np.prod(self.side_lengths))

    @cached_property
    def coordinates(self) -> Tuple[np.ndarray, ...]:
        axes = [length * np.arange(self.grid) / self.grid for length in self.side_lengths]
        return tuple(np.meshgrid(*axes, indexing="ij"))

    @cached_property
    def wavenumbers(self) -> Tuple[np.ndarray, ...]:
        """Angular wavenumbers per axis, broadcastable against the grid; Nyquist zeroed."""
        result = []
        for axis, length in enumerate(self.side_lengths):
            k = 2.0 * np.pi * np.fft.fftfreq(self.grid, d=length / self.grid)
            k[self.grid // 2] = 0.0
            shape = [1, 1, 1, 1]
            shape[axis] = self.grid
            result.append(k.reshape(shape))
        return tuple(result)

    @cached_property
    def k_squared(self) -> np.ndarray:
        total = np.zeros(self.shape)
        for axis, length in enumerate(self.side_lengths):
            k = 2.0 * np.pi * np.fft.fftfreq(self.grid, d=length / self.grid)
            shape = [1, 1, 1, 1]
            shape[axis] = self.grid
            total = total + (k ** 2).reshape(shape)
        return total

    def spectrum(self, values: np.ndarray) -> np.ndarray:
        return np.fft.fftn(values, axes=(-4, -3, -2, -1))

    def from_spectrum(self, spectrum: np.ndarray) -> np.ndarray:
        return np.fft.ifftn(spectrum, axes=(-4, -3, -2, -1)).real

    def derivative(self, values: np.ndarray, axis: int) -> np.ndarray:
        return self.from_spectrum(1j * self.wavenumbers[axis] * self.spectrum(values))

    @cached_property
    def _padding_index(self) -> Tuple[object, ...]:
        n, m = self.grid, 2 * self.grid
        modes = np.fft.fftfreq(n, d=1.0 / n).astype(int) % m
        return (Ellipsis,) + np.ix_(modes, modes, modes, modes)

    def _to_fine(self, values: np.ndarray) -> np.ndarray:
        n, m = self.grid, 2 * self.grid
        padded = np.zeros(values.shape[:-4] + (m,) * 4, dtype=complex)
        padded[self._padding_index] = self.spectrum(values) * (m / n) ** 4
        return np.fft.ifftn(padded, axes=(-4, -3, -2, -1)).real

    def _from_fine(self, fine: np.ndarray) -> np.ndarray:
        n, m = self.grid, 2 * self.grid
        spectrum = np.fft.fftn(fine, axes=(-4, -3, -2, -1))[self._padding_index] * (n / m) ** 4
        # Nyquist planes carry no derivative, so products keep none either
        nyquist = n // 2
        for axis in range(1, 5):
            index = [slice(None)] * spectrum.ndim
            index[-axis] = nyquist
            spectrum[tuple(index)] = 0.0
        return self.from_spectrum(spectrum)

    def apply_nonlinear(self, fn: Callable[[np.ndarray], np.ndarray], values: np.ndarray) -> np.ndarray:
        """
        Evaluate ``fn`` pointwise, with 2x zero-padding de-aliasing when enabled.
        """
        if not settings.DEALIAS:
            return fn(values)
        return self._from_fine(fn(self._to_fine(values)))

    def product(self, fn: Callable[[np.ndarray, np.ndarray], np.ndarray],
                left: np.ndarray, right: np.ndarray) -> np.ndarray:
        """Pointwise bilinear ``fn`` of two grid arrays, de-aliased like ``apply_nonlinear``."""
        if not settings.DEALIAS or _is_uniform(left) or _is_uniform(right):
            return fn(left, right)
        return self._from_fine(fn(self._to_fine(left), self._to_fine(right)))

    def exp(self, field: "BaseField", factor: float = 1.0) -> "BaseField":
        """e^{factor·f} for a scalar field."""
        _require_scalar(field)
        values = self.apply_nonlinear(lambda x: np.exp(factor * x), field.values)
        return BaseField(self, 0, values[None])

    def integrate(self, field: "BaseField") -> float:
        """Integral of a scalar (or top-degree) field against dvol."""
        if field.degree not in (0, 4):
            raise DomainError(f"only 0- and 4-forms integrate to numbers, got degree {field.degree}")
        return float(field.coefficients[0].mean() * self.volume)

    def constant(self, degree: int, coefficients: Sequence[float]) -> "BaseField":
        values = np.asarray(coefficients, dtype=float)
        if values.shape != (comb(4, degree),):
            raise DomainError(f"a constant {degree}-form needs {comb(4, degree)} coefficients")
        return BaseField(self, degree, np.broadcast_to(values.reshape((-1, 1, 1, 1, 1)),
                                                       (values.size,) + self.shape).copy())

    def scalar(self, values: Union[float, np.ndarray]) -> "BaseField":
        return BaseField(self, 0, np.broadcast_to(np.asarray(values, dtype=float), self.shape)[None].copy())

    def two_form(self, terms: Dict[Tuple[int, int], float]) -> "BaseField":
        return self.constant(2, AlternatingForm.from_terms(4, 2, terms).coefficients)

    @cached_property
    def hyperkahler_triple(self) -> Tuple["BaseField", "BaseField", "BaseField"]:
        return (
            self.two_form({(0, 1): 1.0, (2, 3): 1.0}),
            self.two_form({(0, 2): 1.0, (3, 1): 1.0}),
            self.two_form({(0, 3): 1.0, (1, 2): 1.0}),
        )

    @property
    def volume_form(self) -> "BaseField":
        return self.constant(4, [1.0])

    def gradient_vector(self, field: "BaseField") -> np.ndarray:
        """Flat-metric gradient of a scalar field, shape (4, N, N, N, N)."""
        _require_scalar(field)
        return np.stack([self.derivative(field.values, axis) for axis in range(4)])


def _is_uniform(values: np.ndarray) -> bool:
    # a constant factor adds no modes, so the product cannot alias
    return bool(np.all(values == values[..., :1, :1, :1, :1]))


def _require_scalar(field: "BaseField"):
    if field.degree != 0:
        raise DomainError(f"expected a scalar field, got degree {field.degree}")


@dataclass(frozen=True, eq=False)
class BaseField:
    """
    Periodic k-form on the base torus.

    ``coefficients`` has shape (C(4, k), N, N, N, N), components ordered as
    ``exterior.basis(4, k)``.
    """

    torus: Torus4
    degree: int
    coefficients: np.ndarray

    __array_ufunc__ = None

    def __post_init__(self):
        values = np.asarray(self.coefficients, dtype=float)
        expected = (comb(4, self.degree),) + self.torus.shape
        if values.shape != expected:
            raise DomainError(f"field coefficients have shape {values.shape}, expected {expected}")
        object.__setattr__(self, "coefficients", values)

    @property
    def values(self) -> np.ndarray:
        """Grid values of a 0-form (or the dvol coefficient of a 4-form)."""
        if self.degree not in (0, 4):
            raise DomainError(f"a {self.degree}-form has no single value array")
        return self.coefficients[0]

    def _check_compatible(self, other: "BaseField"):
        if self.torus != other.torus or self.degree != other.degree:
            raise DomainError("fields live on different tori or have different degrees")

    def __add__(self, other: "BaseField") -> "BaseField":
        self._check_compatible(other)
        return BaseField(self.torus, self.degree, self.coefficients + other.coefficients)

    def __sub__(self, other: "BaseField") -> "BaseField":
        self._check_compatible(other)
        return BaseField(self.torus, self.degree, self.coefficients - other.coefficients)

    def __neg__(self) -> "BaseField":
        return BaseField(self.torus, self.degree, -self.coefficients)

    def __mul__(self, other: Union[float, "BaseField"]) -> "BaseField":
        if isinstance(other, BaseField):
            return self.wedge(other)
        return BaseField(self.torus, self.degree, other * self.coefficients)

    __rmul__ = __mul__

    def wedge(self, other: "BaseField") -> "BaseField":
        if self.torus != other.torus:
            raise DomainError("fields live on different tori")
        p, q = self.degree, other.degree
        coefficients = self.torus.product(lambda a, b: wedge_coefficients(4, p, q, a, b),
                                          self.coefficients, other.coefficients)
        return BaseField(self.torus, p + q, coefficients)

    def star(self) -> "BaseField":
        """Flat Hodge star *₄ with orientation dx⁰¹²³."""
        matrix = MetricData.euclidean(4).star_matrix(self.degree)
        return BaseField(self.torus, 4 - self.degree, np.tensordot(matrix, self.coefficients, axes=1))

    def d(self) -> "BaseField":
        return spectral_d(self)

    def contract(self, vector: np.ndarray) -> "BaseField":
        """Interior product with a vector field of shape (4, N, N, N, N)."""
        degree = self.degree
        coefficients = self.torus.product(lambda x, c: contract_coefficients(4, degree, x, c),
                                          np.asarray(vector, dtype=float), self.coefficients)
        return BaseField(self.torus, degree - 1, coefficients)

    def pointwise_norm_squared(self) -> "BaseField":
        """|α|² for the flat metric, as a scalar field."""
        squared = self.torus.product(lambda a, b: np.sum(a * b, axis=0)[None], self.coefficients, self.coefficients)
        return BaseField(self.torus, 0, squared)

    def norm(self) -> float:
        """Grid-discrete L² norm (root mean square over the grid)."""
        return float(np.sqrt(np.sum(np.mean(self.coefficients ** 2, axis=(1, 2, 3, 4)))))

    def at(self, point: Tuple[int, int, int, int]) -> AlternatingForm:
        return AlternatingForm(4, self.degree, self.coefficients[(slice(None),) + tuple(point)])

    def summary(self) -> Dict[str, object]:
        """Lossy human-readable description used in reports."""
        return {
            "degree": self.degree,
            "grid": self.torus.grid,
            "side_lengths": list(self.torus.side_lengths),
            "components": [
                {
                    "indices": list(indices),
                    "min": float(component.min()),
                    "max": float(component.max()),
                    "mean": float(component.mean()),
                    "rms": float(np.sqrt(np.mean(component ** 2))),
                }
                for indices, component in zip(basis(4, self.degree), self.coefficients)
            ],
        }

    def to_bytes(self) -> bytes:
        """
        Flat little-endian layout: int64 grid dims (4) and degree, float64 side lengths (4),
        then the coefficient grids in C order.
        """
        header = np.array(list(self.torus.shape) + [self.degree], dtype="<i8").tobytes()
        sides = np.array(self.torus.side_lengths, dtype="<f8").tobytes()
        return header + sides + np.ascontiguousarray(self.coefficients, dtype="<f8").tobytes()

    @classmethod
    def from_bytes(cls, payload: bytes) -> "BaseField":
        offset = 8 * (_HEADER_INTS + _HEADER_FLOATS)
        if len(payload) < offset:
            raise DomainError("field payload shorter than its header")
        ints = np.frombuffer(payload[:8 * _HEADER_INTS], dtype="<i8")
        sides = np.frombuffer(payload[8 * _HEADER_INTS:offset], dtype="<f8")
        dims, degree = ints[:4], int(ints[4])
        if len(set(dims.tolist())) != 1:
            raise DomainError(f"only cubic grids are supported, got {dims.tolist()}")
        torus = Torus4(tuple(sides.tolist()), int(dims[0]))
        data = np.frombuffer(payload[offset:], dtype="<f8")
        expected = comb(4, degree) * int(np.prod(dims))
        if data.size != expected:
            raise DomainError(f"field payload holds {data.size} values, expected {expected}")
        return cls(torus, degree, data.reshape((comb(4, degree),) + torus.shape).copy())


def spectral_d(f: BaseField) -> BaseField:
    """Exterior derivative on the base, with Fourier differentiation."""
    torus = f.torus
    if f.degree == 4:
        return BaseField(torus, 4, np.zeros_like(f.coefficients))
    spectrum = torus.spectrum(f.coefficients)
    out = np.zeros((comb(4, f.degree + 1),) + torus.shape)
    for axis in range(4):
        partial = torus.from_spectrum(1j * torus.wavenumbers[axis] * spectrum)
        direction = np.zeros(4)
        direction[axis] = 1.0
        out += wedge_coefficients(4, 1, f.degree, direction, partial)
    return BaseField(torus, f.degree + 1, out)


def laplacian(f: BaseField) -> BaseField:
    """Δ = δd + dδ on the flat torus, positive spectrum (acts componentwise)."""
    torus = f.torus
    return BaseField(torus, f.degree, torus.from_spectrum(torus.k_squared * torus.spectrum(f.coefficients)))


def poisson_solve(
    rho: BaseField,
    h0: Optional[float] = None,
    tol: Optional[float] = None,
    scale: Optional[float] = None,
) -> BaseField:
    """
    Solve Δh = ρ on the torus with mean(h) = h₀.

    Args:
        rho (BaseField): Scalar source
        h0 (float, optional): Mean of the solution (defaults to settings.DEFAULT_H0)
        tol (float, optional): Relative solvability tolerance on mean(ρ)
        scale (float, optional): Magnitude the mean is compared against; defaults to |ρ|

    Returns:
        BaseField: The solution h

    Raises:
        ObstructedSourceError: ∫ρ ≠ 0; carries the integral
    """
    _require_scalar(rho)
    torus = rho.torus
    h0 = settings.DEFAULT_H0 if h0 is None else h0
    tol = tolerances.SOLVABILITY if tol is None else tol
    scale = rho.norm() if scale is None else scale

    mean = float(rho.values.mean())
    if abs(mean) > tol * scale:
        mismatch = mean * torus.volume
        raise ObstructedSourceError(
            f"Poisson source has non-zero integral {mismatch:.6e}; no periodic solution", mismatch
        )

    spectrum = torus.spectrum(rho.values)
    k_squared = torus.k_squared.copy()
    k_squared[0, 0, 0, 0] = 1.0
    solution = spectrum / k_squared
    solution[0, 0, 0, 0] = h0 * rho.values.size
    h = torus.scalar(torus.from_spectrum(solution))
    logger.info(f"Poisson solve: N={torus.grid}, mean(h)={h0}, min(h)={h.values.min():.6e}")
    return h


@dataclass(frozen=True, eq=False)
class BetaTriple:
    """
    Curvature of the T^3-bundle: three closed anti-self-dual 2-forms on the base.

    ``periods`` (3 x 6 integers, ``PERIOD_PLANES`` order) are (1/2π)∫β_j over the
    coordinate 2-tori when the triple was built from them.
    """

    forms: Tuple[BaseField, BaseField, BaseField]
    periods: Optional[np.ndarray] = None

    def __post_init__(self):
        if len(self.forms) != 3 or any(form.degree != 2 for form in self.forms):
            raise DomainError("beta must be a triple of 2-forms")
        for j, form in enumerate(self.forms):
            size = 1.0 + form.norm()
            if form.d().norm() > 1e-10 * size:
                raise DomainError(f"beta_{j + 1} is not closed")
            if (form.star() + form).norm() > 1e-10 * size:
                raise DomainError(f"beta_{j + 1} is not anti-self-dual")

    @property
    def torus(self) -> Torus4:
        return self.forms[0].torus

    def __getitem__(self, j: int) -> BaseField:
        return self.forms[j]

    @classmethod
    def zero(cls, torus: Torus4) -> "BetaTriple":
        zero = torus.constant(2, np.zeros(6))
        return cls((zero, zero, zero), np.zeros((3, 6), dtype=int))

    @classmethod
    def from_periods(cls, torus: Torus4, periods: Sequence[Sequence[int]]) -> "BetaTriple":
        """
        Constant forms with prescribed integer periods.

        Raises:
            DomainError: a row does not define an anti-self-dual form on this torus
        """
        matrix = np.asarray(periods)
        if matrix.shape != (3, 6):
            raise DomainError(f"periods must be a 3 x 6 integer matrix, got shape {matrix.shape}")
        if not np.issubdtype(matrix.dtype, np.integer):
            raise DomainError("periods must be integers")
        forms = tuple(torus.two_form(period_form_terms(torus, row)) for row in matrix)
        return cls(forms, matrix.astype(int))

    def scaled(self, factor: float, periods: Optional[np.ndarray] = None) -> "BetaTriple":
        return BetaTriple(tuple(factor * form for form in self.forms), periods)


def period_form_terms(torus: Torus4, row: Sequence[int]) -> Dict[Tuple[int, int], float]:
    """Coefficients 2π n_ab / (L_a L_b) on dx^{ab} for one period vector."""
    sides = torus.side_lengths
    return {
        plane: 2.0 * np.pi * float(n) / (sides[plane[0]] * sides[plane[1]])
        for plane, n in zip(PERIOD_PLANES, row)
    }


def _complement(indices: Tuple[int, ...]) -> Tuple[int, ...]:
    return tuple(i for i in FIBER if i not in indices)


@dataclass(frozen=True, eq=False)
class FiberedForm:
    """
    T^3-invariant form Σ_I σ_I ∧ π*α_I on the bundle over the base torus.

    Keys are increasing tuples of fiber indices (0, 1, 2 for σ₁, σ₂, σ₃); every term has
    total degree ``degree``.
    """

    degree: int
    terms: Dict[Tuple[int, ...], BaseField]
    beta: BetaTriple

    __array_ufunc__ = None

    def __post_init__(self):
        for indices, field in self.terms.items():
            if tuple(sorted(set(indices))) != tuple(indices) or not set(indices) <= set(FIBER):
                raise DomainError(f"invalid fiber multi-index {indices}")
            if len(indices) + field.degree != self.degree:
                raise DomainError(
                    f"term σ{indices} ∧ ({field.degree}-form) does not have total degree {self.degree}"
                )
            if field.torus != self.beta.torus:
                raise DomainError("term lives on a different torus")

    @classmethod
    def zero(cls, degree: int, beta: BetaTriple) -> "FiberedForm":
        return cls(degree, {}, beta)

    @classmethod
    def base(cls, field: BaseField, beta: BetaTriple) -> "FiberedForm":
        return cls(field.degree, {(): field}, beta)

    @classmethod
    def fiber(cls, indices: Sequence[int], field: BaseField, beta: BetaTriple) -> "FiberedForm":
        """σ_{indices} ∧ field; unsorted indices pick up their permutation sign."""
        sign = permutation_sign(indices)
        if sign == 0:
            return cls.zero(len(indices) + field.degree, beta)
        return cls(len(indices) + field.degree, {tuple(sorted(indices)): sign * field}, beta)

    @property
    def torus(self) -> Torus4:
        return self.beta.torus

    def _merged(self, other: "FiberedForm", sign: float) -> "FiberedForm":
        if self.degree != other.degree or self.beta is not other.beta:
            raise DomainError("forms differ in degree or structure forms")
        terms = dict(self.terms)
        for indices, field in other.terms.items():
            terms[indices] = terms[indices] + sign * field if indices in terms else sign * field
        return FiberedForm(self.degree, terms, self.beta)

    def __add__(self, other: "FiberedForm") -> "FiberedForm":
        return self._merged(other, 1.0)

    def __sub__(self, other: "FiberedForm") -> "FiberedForm":
        return self._merged(other, -1.0)

    def __neg__(self) -> "FiberedForm":
        return self * -1.0

    def __mul__(self, factor: Union[float, BaseField]) -> "FiberedForm":
        if isinstance(factor, BaseField):
            _require_scalar(factor)
        return FiberedForm(self.degree, {k: factor * v for k, v in self.terms.items()}, self.beta)

    __rmul__ = __mul__

    def wedge(self, other: "FiberedForm") -> "FiberedForm":
        if self.beta is not other.beta:
            raise DomainError("forms live on different bundles")
        degree = self.degree + other.degree
        if degree > 7:
            raise DomainError(f"degree {degree} exceeds dimension 7")
        result = FiberedForm.zero(degree, self.beta)
        for left, alpha in self.terms.items():
            for right, gamma in other.terms.items():
                sign = permutation_sign(left + right)
                if sign == 0 or alpha.degree + gamma.degree > 4:
                    continue
                sign *= (-1) ** (alpha.degree * len(right))
                result = result + FiberedForm(degree, {tuple(sorted(left + right)): sign * alpha.wedge(gamma)}, self.beta)
        return result

    def d(self) -> "FiberedForm":
        return fibered_d(self)

    def star(self, u: BaseField, t: float) -> "FiberedForm":
        return fibered_star(self, u, t)

    def base_part(self) -> BaseField:
        """Coefficient of the pure base term (zero field when absent)."""
        if self.degree > 4:
            raise DomainError(f"a {self.degree}-form has no pure base part")
        if () in self.terms:
            return self.terms[()]
        return self.torus.constant(self.degree, np.zeros(comb(4, self.degree)))

    def norm(self) -> float:
        """Grid-discrete L² norm of all coefficient arrays in the (σ, dx) coframe."""
        return float(np.sqrt(sum(field.norm() ** 2 for field in self.terms.values())))

    def at(self, point: Tuple[int, int, int, int]) -> AlternatingForm:
        """The form at a grid point, in the coframe (σ₁, σ₂, σ₃, dx⁰, ..., dx³) of R^7."""
        terms: Dict[Tuple[int, ...], float] = {}
        for indices, field in self.terms.items():
            values = field.at(point)
            for position, base_indices in enumerate(basis(4, field.degree)):
                key = indices + tuple(3 + a for a in base_indices)
                terms[key] = terms.get(key, 0.0) + float(values.coefficients[position])
        return AlternatingForm.from_terms(7, self.degree, terms)


def fibered_d(w: FiberedForm) -> FiberedForm:
    """
    d(σ_I ∧ α) = Σ_r (-1)^r σ_{I∖i_r} ∧ β_{i_r} ∧ α + (-1)^{|I|} σ_I ∧ dα.
    """
    degree = w.degree + 1
    result = FiberedForm.zero(degree, w.beta)
    for indices, alpha in w.terms.items():
        if alpha.degree + 2 <= 4:
            for position, i in enumerate(indices):
                rest = indices[:position] + indices[position + 1:]
                term = (-1) ** position * w.beta[i].wedge(alpha)
                result = result + FiberedForm(degree, {rest: term}, w.beta)
        if alpha.degree < 4:
            result = result + FiberedForm(degree, {indices: (-1) ** len(indices) * alpha.d()}, w.beta)
    return result


def fibered_star(w: FiberedForm, u: BaseField, t: float) -> FiberedForm:
    """
    Hodge star of g = t²Σσ_i² + e^u g_flat with orientation σ₁₂₃ ∧ dx⁰¹²³.

    *(σ_I ∧ α) = (-1)^{p(3-q)} ε(I, Iᶜ) t^{3-2q} e^{(2-p)u} σ_{Iᶜ} ∧ *₄α,
    with p = deg α, q = |I|.
    """
    if t <= 0:
        raise DomainError(f"fiber scale t must be positive, got {t}")
    _require_scalar(u)
    torus = w.torus
    conformal: Dict[int, BaseField] = {}
    result = FiberedForm.zero(7 - w.degree, w.beta)
    for indices, alpha in w.terms.items():
        p, q = alpha.degree, len(indices)
        complement = _complement(indices)
        if p not in conformal:
            conformal[p] = torus.exp(u, 2.0 - p)
        sign = (-1) ** (p * (3 - q)) * permutation_sign(indices + complement)
        term = (sign * t ** (3 - 2 * q)) * (conformal[p] * alpha.star())
        result = result + FiberedForm(result.degree, {complement: term}, w.beta)
    return result
