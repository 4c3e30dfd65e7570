import logging
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations
from math import comb
from typing import Dict, Mapping, Sequence, Tuple, Union

import numpy as np

from g2torus.core.exceptions import DegreeOverflowError, DomainError, NotPositiveError

logger = logging.getLogger(__name__)

MultiIndex = Tuple[int, ...]
Scalar = Union[int, float]


@lru_cache(maxsize=None)
def basis(n: int, k: int) -> Tuple[MultiIndex, ...]:
    """Increasing multi-indices of length k in range(n), in lexicographic order."""
    if k < 0 or k > n:
        raise DomainError(f"no {k}-forms in dimension {n}")
    return tuple(combinations(range(n), k))


@lru_cache(maxsize=None)
def _positions(n: int, k: int) -> Dict[MultiIndex, int]:
    return {index: pos for pos, index in enumerate(basis(n, k))}


def index_of(n: int, indices: Sequence[int]) -> int:
    """Position of an increasing multi-index in ``basis(n, len(indices))``."""
    key = tuple(indices)
    try:
        return _positions(n, len(key))[key]
    except KeyError:
        raise DomainError(f"{key} is not an increasing multi-index in dimension {n}") from None


def permutation_sign(sequence: Sequence[int]) -> int:
    """Sign of the permutation sorting ``sequence`` (0 if an entry repeats)."""
    items = list(sequence)
    if len(set(items)) != len(items):
        return 0
    inversions = sum(
        1 for i in range(len(items)) for j in range(i + 1, len(items)) if items[i] > items[j]
    )
    return -1 if inversions % 2 else 1


@lru_cache(maxsize=None)
def _wedge_table(n: int, p: int, q: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    left, right, target, signs = [], [], [], []
    for i, a in enumerate(basis(n, p)):
        for j, b in enumerate(basis(n, q)):
            if set(a) & set(b):
                continue
            left.append(i)
            right.append(j)
            target.append(index_of(n, sorted(a + b)))
            signs.append(permutation_sign(a + b))
    return (np.array(left, dtype=int), np.array(right, dtype=int),
            np.array(target, dtype=int), np.array(signs, dtype=float))


@lru_cache(maxsize=None)
def _contract_table(n: int, k: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    vector, source, target, signs = [], [], [], []
    for j, rest in enumerate(basis(n, k - 1)):
        for i in range(n):
            if i in rest:
                continue
            full = tuple(sorted(rest + (i,)))
            vector.append(i)
            source.append(index_of(n, full))
            target.append(j)
            signs.append(-1.0 if full.index(i) % 2 else 1.0)
    return (np.array(vector, dtype=int), np.array(source, dtype=int),
            np.array(target, dtype=int), np.array(signs, dtype=float))


def _broadcast_signs(signs: np.ndarray, trailing: Tuple[int, ...]) -> np.ndarray:
    return signs.reshape((-1,) + (1,) * len(trailing))


def _lift(values: np.ndarray, trailing: Tuple[int, ...]) -> np.ndarray:
    # left-pad the trailing axes so arrays of different grid rank broadcast
    missing = len(trailing) - (values.ndim - 1)
    return values.reshape(values.shape[:1] + (1,) * missing + values.shape[1:])


def wedge_coefficients(n: int, p: int, q: int, left: np.ndarray, right: np.ndarray) -> np.ndarray:
    """
    Wedge product on coefficient arrays.

    The leading axis of each array runs over ``basis(n, p)`` / ``basis(n, q)``; any
    trailing axes (grid points) broadcast.

    Args:
        n (int): Ambient dimension
        p (int): Degree of ``left``
        q (int): Degree of ``right``
        left (np.ndarray): Coefficients of the p-form
        right (np.ndarray): Coefficients of the q-form

    Returns:
        np.ndarray: Coefficients of the (p+q)-form
    """
    if p + q > n:
        raise DegreeOverflowError(f"degree {p} + {q} exceeds dimension {n}")
    ia, ib, ic, signs = _wedge_table(n, p, q)
    trailing = np.broadcast_shapes(left.shape[1:], right.shape[1:])
    out = np.zeros((comb(n, p + q),) + trailing, dtype=np.result_type(left, right, float))
    if len(ia):
        np.add.at(out, ic, _broadcast_signs(signs, trailing) * _lift(left, trailing)[ia] * _lift(right, trailing)[ib])
    return out


def contract_coefficients(n: int, k: int, vector: np.ndarray, form: np.ndarray) -> np.ndarray:
    """Interior product of a vector (leading axis of length n) into a k-form."""
    if k == 0:
        raise DomainError("cannot contract a vector into a 0-form")
    iv, isrc, itgt, signs = _contract_table(n, k)
    trailing = np.broadcast_shapes(vector.shape[1:], form.shape[1:])
    out = np.zeros((comb(n, k - 1),) + trailing, dtype=np.result_type(vector, form, float))
    np.add.at(out, itgt, _broadcast_signs(signs, trailing) * _lift(vector, trailing)[iv] * _lift(form, trailing)[isrc])
    return out


@dataclass(frozen=True)
class AlternatingForm:
    """
    Constant-coefficient k-form on R^n in the standard coframe.

    Coefficients are indexed by increasing multi-indices (0-based) in lexicographic
    order, see :func:`basis`.
    """

    n: int
    degree: int
    coefficients: np.ndarray

    # numpy scalars defer to our reflected operators
    __array_ufunc__ = None

    def __post_init__(self):
        coefficients = np.asarray(self.coefficients, dtype=float)
        expected = (comb(self.n, self.degree),)
        if self.degree < 0 or self.degree > self.n:
            raise DomainError(f"degree {self.degree} invalid in dimension {self.n}")
        if coefficients.shape != expected:
            raise DomainError(f"expected coefficient shape {expected}, got {coefficients.shape}")
        object.__setattr__(self, "coefficients", coefficients)

    @classmethod
    def zero(cls, n: int, degree: int) -> "AlternatingForm":
        return cls(n, degree, np.zeros(comb(n, degree)))

    @classmethod
    def from_terms(cls, n: int, degree: int, terms: Mapping[Sequence[int], Scalar]) -> "AlternatingForm":
        """
        Build a form from ``{indices: coefficient}``; unsorted indices pick up their sign.

        Example: ``from_terms(7, 2, {(4, 3): 1.0})`` is ``-e^{34}``.
        """
        coefficients = np.zeros(comb(n, degree))
        for indices, value in terms.items():
            if len(indices) != degree:
                raise DomainError(f"multi-index {tuple(indices)} is not of degree {degree}")
            sign = permutation_sign(indices)
            if sign == 0:
                continue
            coefficients[index_of(n, sorted(indices))] += sign * value
        return cls(n, degree, coefficients)

    def __getitem__(self, indices: Sequence[int]) -> float:
        sign = permutation_sign(indices)
        if sign == 0:
            return 0.0
        return sign * float(self.coefficients[index_of(self.n, sorted(indices))])

    def _check_compatible(self, other: "AlternatingForm"):
        if self.n != other.n or self.degree != other.degree:
            raise DomainError(
                f"incompatible forms: ({self.n}, {self.degree}) vs ({other.n}, {other.degree})"
            )

    def __add__(self, other: "AlternatingForm") -> "AlternatingForm":
        self._check_compatible(other)
        return AlternatingForm(self.n, self.degree, self.coefficients + other.coefficients)

    def __sub__(self, other: "AlternatingForm") -> "AlternatingForm":
        self._check_compatible(other)
        return AlternatingForm(self.n, self.degree, self.coefficients - other.coefficients)

    def __neg__(self) -> "AlternatingForm":
        return AlternatingForm(self.n, self.degree, -self.coefficients)

    def __mul__(self, scalar: Scalar) -> "AlternatingForm":
        return AlternatingForm(self.n, self.degree, scalar * self.coefficients)

    __rmul__ = __mul__

    def wedge(self, other: "AlternatingForm") -> "AlternatingForm":
        return wedge(self, other)

    def contract(self, vector: Sequence[float]) -> "AlternatingForm":
        return contract(vector, self)

    def euclidean_norm(self) -> float:
        return float(np.linalg.norm(self.coefficients))

    def allclose(self, other: "AlternatingForm", atol: float = 1e-12) -> bool:
        self._check_compatible(other)
        return bool(np.allclose(self.coefficients, other.coefficients, rtol=0.0, atol=atol))


def wedge(a: AlternatingForm, b: AlternatingForm) -> AlternatingForm:
    """a ∧ b; raises DegreeOverflowError when deg a + deg b > n."""
    if a.n != b.n:
        raise DomainError(f"forms live in different dimensions ({a.n} vs {b.n})")
    coefficients = wedge_coefficients(a.n, a.degree, b.degree, a.coefficients, b.coefficients)
    return AlternatingForm(a.n, a.degree + b.degree, coefficients)


def contract(vector: Sequence[float], a: AlternatingForm) -> AlternatingForm:
    """ι_v a."""
    v = np.asarray(vector, dtype=float)
    if v.shape != (a.n,):
        raise DomainError(f"vector of shape {v.shape} cannot act on forms in dimension {a.n}")
    return AlternatingForm(a.n, a.degree - 1, contract_coefficients(a.n, a.degree, v, a.coefficients))


def wedge_matrix(a: AlternatingForm, q: int) -> np.ndarray:
    """Matrix of b ↦ a ∧ b on q-forms."""
    if a.degree + q > a.n:
        raise DegreeOverflowError(f"degree {a.degree} + {q} exceeds dimension {a.n}")
    ia, ib, ic, signs = _wedge_table(a.n, a.degree, q)
    matrix = np.zeros((comb(a.n, a.degree + q), comb(a.n, q)))
    np.add.at(matrix, (ic, ib), signs * a.coefficients[ia])
    return matrix


@dataclass(frozen=True)
class MetricData:
    """Riemannian metric on R^n (Gram matrix of the coframe duals) plus an orientation."""

    gram: np.ndarray
    orientation: int = 1
    _cache: Dict[Tuple[str, int], np.ndarray] = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        gram = np.asarray(self.gram, dtype=float)
        if gram.ndim != 2 or gram.shape[0] != gram.shape[1]:
            raise DomainError(f"metric must be a square matrix, got shape {gram.shape}")
        if not np.allclose(gram, gram.T, rtol=0.0, atol=1e-12 * max(1.0, np.abs(gram).max())):
            raise DomainError("metric is not symmetric")
        if np.linalg.eigvalsh(gram).min() <= 0:
            raise DomainError("metric is not positive definite")
        if self.orientation not in (1, -1):
            raise DomainError(f"orientation must be +1 or -1, got {self.orientation}")
        object.__setattr__(self, "gram", gram)

    @classmethod
    def euclidean(cls, n: int) -> "MetricData":
        return cls(np.eye(n))

    @property
    def n(self) -> int:
        return self.gram.shape[0]

    @property
    def inverse(self) -> np.ndarray:
        if ("inverse", 0) not in self._cache:
            self._cache[("inverse", 0)] = np.linalg.inv(self.gram)
        return self._cache[("inverse", 0)]

    @property
    def sqrt_det(self) -> float:
        return float(np.sqrt(np.linalg.det(self.gram)))

    @property
    def volume_form(self) -> AlternatingForm:
        return AlternatingForm(self.n, self.n, np.array([self.orientation * self.sqrt_det]))

    def form_gram(self, k: int) -> np.ndarray:
        """Induced inner product on k-forms: minors of the inverse metric."""
        key = ("form_gram", k)
        if key not in self._cache:
            if k == 0:
                self._cache[key] = np.ones((1, 1))
            else:
                idx = np.array(basis(self.n, k))
                minors = self.inverse[idx[:, None, :, None], idx[None, :, None, :]]
                self._cache[key] = np.linalg.det(minors)
        return self._cache[key]

    def star_matrix(self, k: int) -> np.ndarray:
        """Matrix of the Hodge star Λ^k → Λ^{n-k}, characterized by a∧*b = <a,b> vol."""
        key = ("star", k)
        if key not in self._cache:
            n = self.n
            gram_k = self.form_gram(k)
            matrix = np.zeros((comb(n, n - k), comb(n, k)))
            scale = self.orientation * self.sqrt_det
            for row, indices in enumerate(basis(n, k)):
                complement = tuple(i for i in range(n) if i not in indices)
                sign = permutation_sign(indices + complement)
                matrix[index_of(n, complement)] = sign * scale * gram_k[row]
            self._cache[key] = matrix
        return self._cache[key]

    def sharp(self, covector: Sequence[float]) -> np.ndarray:
        """Raise an index: the vector g^{-1} v."""
        return self.inverse @ np.asarray(covector, dtype=float)


def _check_metric(a: AlternatingForm, m: MetricData):
    if a.n != m.n:
        raise DomainError(f"form in dimension {a.n} paired with metric in dimension {m.n}")


def hodge_star(a: AlternatingForm, m: MetricData) -> AlternatingForm:
    _check_metric(a, m)
    return AlternatingForm(a.n, a.n - a.degree, m.star_matrix(a.degree) @ a.coefficients)


def inner_product(a: AlternatingForm, b: AlternatingForm, m: MetricData) -> float:
    _check_metric(a, m)
    a._check_compatible(b)
    return float(a.coefficients @ m.form_gram(a.degree) @ b.coefficients)


def norm(a: AlternatingForm, m: MetricData) -> float:
    return float(np.sqrt(max(inner_product(a, a, m), 0.0)))


def sharp(m: MetricData, covector: Sequence[float]) -> np.ndarray:
    return m.sharp(covector)


def unit_vector(n: int, i: int) -> np.ndarray:
    vector = np.zeros(n)
    vector[i] = 1.0
    return vector


def basis_covector(n: int, i: int) -> AlternatingForm:
    return AlternatingForm(n, 1, unit_vector(n, i))


def metric_from_positive3form(phi: AlternatingForm) -> MetricData:
    """
    Metric and orientation determined by a positive 3-form in dimension 7.

    B(u, v) vol_0 = (ι_u φ) ∧ (ι_v φ) ∧ φ / 6 is definite exactly when φ is positive;
    the metric is B / det(B)^{1/9} and the orientation is the sign of B.

    Raises:
        DomainError: φ is not a 3-form on R^7
        NotPositiveError: B is degenerate or indefinite
    """
    if phi.n != 7 or phi.degree != 3:
        raise DomainError(f"expected a 3-form in dimension 7, got degree {phi.degree} in dimension {phi.n}")

    contractions = [contract(unit_vector(7, i), phi) for i in range(7)]
    bilinear = np.zeros((7, 7))
    for i in range(7):
        for j in range(i, 7):
            top = wedge(wedge(contractions[i], contractions[j]), phi)
            bilinear[i, j] = bilinear[j, i] = top.coefficients[0] / 6.0

    eigenvalues = np.linalg.eigvalsh(bilinear)
    scale = max(np.abs(eigenvalues).max(), 1e-300)
    if eigenvalues.min() > 1e-12 * scale:
        orientation = 1
    elif eigenvalues.max() < -1e-12 * scale:
        orientation = -1
    else:
        raise NotPositiveError(f"3-form is not positive (eigenvalues of B: {eigenvalues.round(6).tolist()})")

    det = np.linalg.det(bilinear)
    gram = bilinear / (np.sign(det) * np.abs(det) ** (1.0 / 9.0))
    logger.debug(f"Metric from positive 3-form: orientation={orientation}, det(g)={np.linalg.det(gram):.6e}")
    return MetricData(gram, orientation)
