from typing import Union

from pydantic import BaseModel, field_validator
from pydantic_settings import BaseSettings


class Tolerances(BaseModel):
    """
    Numerical tolerances used by every verification suite.

    Not read from the environment; the CLI rescales them with ``--tol-scale``.
    """

    IDENTITY: float = 1e-12
    ALGEBRA: float = 1e-10
    SYMBOL: float = 1e-11
    RANK_RTOL: float = 1e-8
    CONTAINMENT: float = 1e-8
    FIELD: float = 1e-9
    SOLVABILITY: float = 1e-10
    TORSION: float = 1e-9
    INTEGRALITY: float = 1e-9

    def scaled(self, factor: float) -> "Tolerances":
        """
        Return a copy with every tolerance multiplied by ``factor``.

        The rank threshold is a relative singular-value cut and is left alone.
        """
        if factor <= 0:
            raise ValueError(f"tolerance scale must be positive, got {factor}")
        values = {
            name: (value if name == "RANK_RTOL" else value * factor)
            for name, value in self.model_dump().items()
        }
        return Tolerances(**values)


class Settings(BaseSettings):
    # Project Settings
    PROJECT_NAME: str = "g2torus"
    REPORT_SCHEMA_VERSION: str = "1.0"

    # Worker threads for sampled suites (symbols, algebra sweeps)
    THREADS: int = 1

    LOG_LEVEL: str = "INFO"

    # Grid defaults
    DEFAULT_GRID: int = 16
    DEFAULT_H0: float = 1.0
    DEALIAS: bool = True

    # Number of grid points at which pointwise G2 checks are sampled
    POINTWISE_SAMPLES: int = 4

    @field_validator("THREADS", mode="before")
    @classmethod
    def clamp_threads(cls, v: Union[str, int]) -> int:
        threads = int(v)
        if threads < 1:
            raise ValueError(f"THREADS must be >= 1, got {threads}")
        return threads

    @field_validator("DEFAULT_GRID")
    @classmethod
    def power_of_two_grid(cls, v: int) -> int:
        if v < 4 or v & (v - 1):
            raise ValueError("DEFAULT_GRID must be a power of two >= 4")
        return v

    class Config:
        case_sensitive = True
        env_file = ".env"


settings = Settings()
tolerances = Tolerances()
