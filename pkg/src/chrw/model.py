"""Drive parameters, Pauli matrices and small 2x2 helpers."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import EqualFrequencies, NegativeAmplitude, NonFiniteArgument, NonPositiveFrequency


@dataclass(frozen=True)
class DriveParams:
    """Physical inputs of the bichromatically driven qubit.

    All frequencies and amplitudes are in units of ``omega1`` once normalized
    (see :meth:`normalized`). Amplitudes are stored as absolute values; the
    ratio ``r = A2 / A1`` is derived on demand.
    """

    omega0: float
    A1: float
    A2: float
    omega1: float = 1.0
    omega2: float = 1.2
    phi1: float = 0.0
    phi2: float = 0.0

    @classmethod
    def from_ratio(
        cls,
        omega0: float,
        A1: float,
        r: float,
        delta: float,
        omega1: float = 1.0,
        phi1: float = 0.0,
        phi2: float = 0.0,
    ) -> DriveParams:
        """Build from the figure-style parametrization (A1, r, beat frequency)."""
        return cls(omega0, A1, r * A1, omega1, omega1 + delta, phi1, phi2)

    @property
    def r(self) -> float | None:
        return self.A2 / self.A1 if self.A1 > 0 else None

    @property
    def delta(self) -> float:
        """Beat frequency omega2 - omega1 (may be negative)."""
        return self.omega2 - self.omega1

    @property
    def delta_phi21(self) -> float:
        return self.phi2 - self.phi1

    def with_(self, **changes) -> DriveParams:
        return replace(self, **changes)

    def normalized(self) -> DriveParams:
        """Express every frequency and amplitude in units of omega1."""
        w = self.omega1
        return DriveParams(
            self.omega0 / w, self.A1 / w, self.A2 / w, 1.0, self.omega2 / w,
            self.phi1, self.phi2,
        )

    def swapped(self) -> DriveParams:
        """Exchange the roles of the two drive tones."""
        return DriveParams(
            self.omega0, self.A2, self.A1, self.omega2, self.omega1,
            self.phi2, self.phi1,
        )

    def as_dict(self) -> dict:
        return {
            "omega0": self.omega0, "A1": self.A1, "A2": self.A2,
            "omega1": self.omega1, "omega2": self.omega2,
            "phi1": self.phi1, "phi2": self.phi2,
        }


def validate(params: DriveParams) -> DriveParams:
    """Return ``params`` unchanged if it describes a physical drive."""
    for name in ("omega0", "A1", "A2", "omega1", "omega2", "phi1", "phi2"):
        if not math.isfinite(getattr(params, name)):
            raise NonFiniteArgument(f"{name} must be finite")
    if params.omega1 <= 0 or params.omega2 <= 0:
        raise NonPositiveFrequency(
            f"drive frequencies must be positive, got {params.omega1}, {params.omega2}"
        )
    if params.omega1 == params.omega2:
        raise EqualFrequencies("omega1 == omega2 leaves no beat frequency")
    if params.A1 < 0 or params.A2 < 0:
        raise NegativeAmplitude(f"amplitudes must be >= 0, got {params.A1}, {params.A2}")
    return params


class PauliAlgebra:
    """Pauli matrices in the basis (|up>, |down>), sigma_z = diag(1, -1)."""

    sigma_0 = np.eye(2, dtype=complex)
    sigma_x = np.array([[0, 1], [1, 0]], dtype=complex)
    sigma_y = np.array([[0, -1j], [1j, 0]], dtype=complex)
    sigma_z = np.array([[1, 0], [0, -1]], dtype=complex)
    sigma_plus = (sigma_x + 1j * sigma_y) / 2
    sigma_minus = (sigma_x - 1j * sigma_y) / 2


for _m in ("sigma_0", "sigma_x", "sigma_y", "sigma_z", "sigma_plus", "sigma_minus"):
    getattr(PauliAlgebra, _m).setflags(write=False)

SX = PauliAlgebra.sigma_x
SY = PauliAlgebra.sigma_y
SZ = PauliAlgebra.sigma_z
S0 = PauliAlgebra.sigma_0
SP = PauliAlgebra.sigma_plus
SM = PauliAlgebra.sigma_minus

UP = np.array([1, 0], dtype=complex)
DOWN = np.array([0, 1], dtype=complex)


def is_hermitian(m: np.ndarray, atol: float = 1e-12) -> bool:
    m = np.asarray(m)
    return m.ndim == 2 and m.shape[0] == m.shape[1] and np.allclose(m, m.conj().T, rtol=0, atol=atol)


def unitarity_defect(u: np.ndarray) -> float:
    """max |U^dagger U - I| entrywise; works on stacks of matrices."""
    u = np.asarray(u)
    prod = np.swapaxes(u.conj(), -1, -2) @ u
    return float(np.max(np.abs(prod - np.eye(u.shape[-1]))))


def lab_hamiltonian(params: DriveParams, t: float) -> np.ndarray:
    """Original aperiodic Hamiltonian H(t) at a single time."""
    drive = 0.5 * (
        params.A1 * math.cos(params.omega1 * t + params.phi1)
        + params.A2 * math.cos(params.omega2 * t + params.phi2)
    )
    return 0.5 * params.omega0 * SZ + drive * SX
