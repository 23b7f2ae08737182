"""Backends built on a Hamiltonian that is periodic in the frame rotating at omega1.

CHRW keeps the counter-rotating couplings through renormalized parameters and
needs a back-transformation to the lab frame. RWA drops them; its frame change
is a pure rotation, which leaves the excitation probability untouched.
"""

from __future__ import annotations

import numpy as np

from .. import floquet
from ..bessel import bessel_j
from ..floquet import FloquetSolution, FourierHamiltonian
from ..model import DOWN, SM, SP, SX, SZ, UP, DriveParams, validate
from ..transform import ChrwParams, frame_operator, solve_xi
from .types import AveragedResult, ProbabilitySeries

BESSEL_CUTOFF = 1e-14
D_IMAG_TOL = 1e-10


def chrw_fourier_hamiltonian(params: DriveParams, chrw: ChrwParams) -> FourierHamiltonian:
    phase = np.exp(1j * chrw.delta_phi21)
    h0 = 0.5 * chrw.delta_tilde1 * SZ + 0.25 * chrw.A_tilde1 * SX
    h1 = 0.25 * (chrw.A_tilde2 * SM - 2 * chrw.A_tilde0 * SZ) * phase
    return FourierHamiltonian(chrw.Delta, {0: h0, 1: h1, -1: h1.conj().T})


def rwa_fourier_hamiltonian(params: DriveParams) -> FourierHamiltonian:
    validate(params)
    phase = np.exp(1j * params.delta_phi21)
    h0 = 0.5 * (params.omega0 - params.omega1) * SZ + 0.25 * params.A1 * SX
    h1 = 0.25 * params.A2 * SM * phase
    return FourierHamiltonian(params.delta, {0: h0, 1: h1, -1: h1.conj().T})


def _floquet_solve(ham: FourierHamiltonian, scale: float, truncation: int | None) -> FloquetSolution:
    if truncation is not None:
        return floquet.solve(ham, truncation)
    tol = 1e-10 * max(abs(ham.base_frequency), scale)
    return floquet.converge_truncation(ham, tol=tol)


def chrw_floquet(params: DriveParams, truncation: int | None = None):
    """Solve the renormalization and the Floquet problem; returns (chrw, solution)."""
    chrw = solve_xi(params)
    ham = chrw_fourier_hamiltonian(params, chrw)
    return chrw, _floquet_solve(ham, params.omega0, truncation)


def rwa_floquet(params: DriveParams, truncation: int | None = None) -> FloquetSolution:
    ham = rwa_fourier_hamiltonian(params)
    return _floquet_solve(ham, params.omega0, truncation)


def _rotation(params: DriveParams, t) -> np.ndarray:
    theta = params.omega1 * np.asarray(t, dtype=float) + params.phi1
    out = np.zeros(np.shape(theta) + (2, 2), dtype=complex)
    out[..., 0, 0] = np.exp(0.5j * theta)
    out[..., 1, 1] = np.exp(-0.5j * theta)
    return out


def chrw_frames(params: DriveParams, chrw: ChrwParams, t) -> np.ndarray:
    """Stack of R(t) exp(S(t)) for each time in ``t``."""
    return frame_operator(params, chrw, np.atleast_1d(np.asarray(t, dtype=float)))


def chrw_evolution(params: DriveParams, t, t0: float = 0.0, truncation: int | None = None):
    """Lab-frame U(t, t0) = [R e^S](t)^dagger U_floquet(t, t0) [R e^S](t0)."""
    chrw, sol = chrw_floquet(params, truncation)
    return _chrw_lab_operator(params, chrw, sol, t, t0)


def _chrw_lab_operator(params, chrw, sol, t, t0):
    t = np.atleast_1d(np.asarray(t, dtype=float))
    u_rot = floquet.evolution_operator(sol, t, t0)
    frames = chrw_frames(params, chrw, t)
    frame0 = frame_operator(params, chrw, t0)
    return np.swapaxes(frames.conj(), -1, -2) @ u_rot @ frame0


def rwa_evolution(params: DriveParams, t, t0: float = 0.0, truncation: int | None = None):
    sol = rwa_floquet(params, truncation)
    t = np.atleast_1d(np.asarray(t, dtype=float))
    u_rot = floquet.evolution_operator(sol, t, t0)
    rot = _rotation(params, t)
    return np.swapaxes(rot.conj(), -1, -2) @ u_rot @ _rotation(params, t0)


def _excitation(u: np.ndarray) -> np.ndarray:
    amp = np.einsum("s,...sr,r->...", UP.conj(), u, DOWN)
    return np.clip(np.abs(amp) ** 2, 0.0, 1.0)


def chrw_transient(params: DriveParams, t0: float, time_grid, truncation: int | None = None):
    chrw, sol = chrw_floquet(params, truncation)
    t = np.asarray(time_grid, dtype=float)
    u = _chrw_lab_operator(params, chrw, sol, t, t0)
    return ProbabilitySeries(
        t, _excitation(u), "chrw",
        {"truncation": sol.truncation, "dimension": sol.dimension,
         "quasienergies": sol.quasienergies},
    )


def rwa_transient(params: DriveParams, t0: float, time_grid, truncation: int | None = None):
    sol = rwa_floquet(params, truncation)
    t = np.asarray(time_grid, dtype=float)
    u = floquet.evolution_operator(sol, t, t0)
    return ProbabilitySeries(
        t, _excitation(u), "rwa",
        {"truncation": sol.truncation, "dimension": sol.dimension,
         "quasienergies": sol.quasienergies},
    )


def harmonic_expectations(coeffs: np.ndarray, op: np.ndarray, max_shift: int) -> dict:
    """X_n = (1/T) int <u(t)|op|u(t)> exp(-i n Omega t) dt = sum_k c(k)^dagger op c(k+n)."""
    size = coeffs.shape[0]
    transformed = coeffs @ op.T  # row k holds op c(k)
    out = {}
    for n in range(-max_shift, max_shift + 1):
        if n >= 0:
            out[n] = np.vdot(coeffs[: size - n], transformed[n:]) if n < size else 0j
        else:
            out[n] = np.vdot(coeffs[-n:], transformed[: size + n]) if -n < size else 0j
    return out


def _bessel_orders(z1: float, z2: float):
    """Largest |n| needed before the Bessel weights drop below the cutoff."""
    n = 0
    while n < 200:
        w0 = abs(bessel_j(n, z1) * bessel_j(n, z2))
        w1 = abs(bessel_j(n + 1, z1) * bessel_j(n, z2))
        w2 = abs(bessel_j(n, z1) * bessel_j(n + 1, z2))
        if n > 0 and max(w0, w1, w2) < BESSEL_CUTOFF:
            return n
        n += 1
    return n


def chrw_d(params: DriveParams, chrw: ChrwParams, sol: FloquetSolution) -> complex:
    """Resonance indicator d accumulated from the upper Floquet state's harmonics.

    Returns the complex accumulator; its imaginary part vanishes analytically.
    """
    c = sol.coefficients[0]
    n_max = min(_bessel_orders(chrw.z1, chrw.z2), c.shape[0] - 1)
    xz = harmonic_expectations(c, SZ, n_max + 1)
    xp = harmonic_expectations(c, SP, n_max + 1)
    xm = harmonic_expectations(c, SM, n_max + 1)
    dphi = chrw.delta_phi21
    total = 0j
    for n in range(-n_max, n_max + 1):
        jz = bessel_j(n, chrw.z1) * bessel_j(-n, chrw.z2)
        jpm = bessel_j(n + 1, chrw.z1) * bessel_j(-n, chrw.z2)
        total += jz * np.exp(-1j * n * dphi) * xz[n]
        total += jpm * (np.exp(1j * n * dphi) * xp[-n] + np.exp(-1j * n * dphi) * xm[n])
    return complex(total)


def chrw_averaged(params: DriveParams, truncation: int | None = None) -> AveragedResult:
    chrw, sol = chrw_floquet(params, truncation)
    d_acc = chrw_d(params, chrw, sol)
    if abs(d_acc.imag) > D_IMAG_TOL:
        raise ArithmeticError(f"d has imaginary residue {d_acc.imag:.3e}")
    d = d_acc.real
    return AveragedResult(
        p_bar=0.5 * (1 - d * d),
        d=d,
        quasienergies=sol.quasienergies,
        truncation_used=sol.truncation,
        method="chrw",
        dimension=sol.dimension,
        info={"d_imag": d_acc.imag, "xi": (chrw.xi1, chrw.xi2), "residual": chrw.residual},
    )


def rwa_averaged(params: DriveParams, truncation: int | None = None) -> AveragedResult:
    """RWA analogue: with f_z = 1 and f_pm = 0 the indicator reduces to X^z_0."""
    sol = rwa_floquet(params, truncation)
    c = sol.coefficients[0]
    d = float(np.real(np.vdot(c, c @ SZ.T)))
    return AveragedResult(
        p_bar=0.5 * (1 - d * d),
        d=d,
        quasienergies=sol.quasienergies,
        truncation_used=sol.truncation,
        method="rwa",
        dimension=sol.dimension,
    )
