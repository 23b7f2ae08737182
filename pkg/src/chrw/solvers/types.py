from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from ..model import DriveParams


class Method(str, enum.Enum):
    CHRW = "chrw"
    RWA = "rwa"
    GFT = "gft"
    RK = "rk"

    @classmethod
    def parse(cls, value) -> Method:
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(f"unknown method {value!r}; choose from chrw, rwa, gft, rk") from None


@dataclass(frozen=True)
class SolverRequest:
    params: DriveParams
    method: Method
    t0: float = 0.0
    time_grid: tuple = ()
    truncation: int | None = None
    truncation2: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "method", Method.parse(self.method))
        grid = np.asarray(self.time_grid, dtype=float)
        if grid.size and (np.any(np.diff(grid) <= 0) or grid[0] < self.t0):
            raise ValueError("time grid must be strictly increasing and start at or after t0")
        object.__setattr__(self, "time_grid", tuple(grid.tolist()))


@dataclass(frozen=True)
class ProbabilitySeries:
    times: np.ndarray
    values: np.ndarray
    method: str = ""
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.size and (values.min() < -1e-9 or values.max() > 1 + 1e-9):
            raise ValueError("transition probability outside [0, 1]")
        object.__setattr__(self, "times", np.asarray(self.times, dtype=float))
        object.__setattr__(self, "values", values)


@dataclass(frozen=True)
class AveragedResult:
    """Time-averaged excitation probability.

    ``d`` is only defined for the single-mode Floquet backends (CHRW, and the
    RWA analogue with a trivial back-transform); it is ``nan`` otherwise.
    """

    p_bar: float
    d: float
    quasienergies: tuple
    truncation_used: int
    method: str = ""
    dimension: int = 0
    info: dict = field(default_factory=dict)
