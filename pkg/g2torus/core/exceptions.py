"""Error hierarchy shared by the services and the CLI."""

from typing import Optional


class G2TorusError(ValueError):
    """Base class for every error raised by g2torus."""


class DomainError(G2TorusError):
    """Input outside the domain of an operation (bad degree, dimension, length...)."""


class DegreeOverflowError(DomainError):
    """A wedge product whose degree exceeds the ambient dimension."""


class NotPositiveError(G2TorusError):
    """A 3-form outside the open GL(7)-orbit of positive forms."""


class InconsistentTorsionError(G2TorusError):
    """dφ and d*φ admit no torsion decomposition within tolerance."""

    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual


class NotAComplexError(G2TorusError):
    """Two symbol maps whose composition does not vanish."""

    def __init__(self, message: str, composition_norm: float):
        super().__init__(message)
        self.composition_norm = composition_norm


class ObstructedSourceError(G2TorusError):
    """Poisson source with non-zero integral."""

    def __init__(self, message: str, mismatch: float):
        super().__init__(message)
        self.mismatch = mismatch


class BalanceError(G2TorusError):
    """Instanton data that cannot balance the fibration classes."""

    def __init__(self, message: str, lhs: float, rhs: float):
        super().__init__(message)
        self.lhs = lhs
        self.rhs = rhs
        self.mismatch = lhs - rhs


class NotDualizableError(G2TorusError):
    """Scenario violating the integrality needed for T-duality."""

    def __init__(self, message: str, index: Optional[int] = None):
        super().__init__(message)
        self.index = index
