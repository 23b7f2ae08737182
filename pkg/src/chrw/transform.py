"""Counter-rotating hybridized rotating-wave (CHRW) renormalization.

The unitary ``exp(-S(t))`` with ``S(t) = i sum_j A_j xi_j/(2 omega_j) sin(theta_j) sigma_x``
hybridizes the drive into the qubit splitting. The parameters ``xi_j`` are
fixed by requiring the single-harmonic sigma_y terms of the transformed
Hamiltonian to merge with the residual sigma_x drive into purely rotating
couplings.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bessel import bessel_j
from .errors import NoConvergence
from .model import DriveParams, validate

XI_TOL = 1e-13
XI_MAX_ITER = 500


@dataclass(frozen=True)
class ChrwParams:
    xi1: float
    xi2: float
    z1: float
    z2: float
    A_tilde0: float
    A_tilde1: float
    A_tilde2: float
    delta_tilde1: float
    Delta: float
    delta_phi21: float
    residual: float
    iterations: int = 0


def xi_residual(params: DriveParams, xi1: float, xi2: float) -> float:
    """|w0 J1(z1) J0(z2) - A1(1-xi1)/2| + |w0 J0(z1) J1(z2) - A2(1-xi2)/2|."""
    z1 = params.A1 * xi1 / params.omega1
    z2 = params.A2 * xi2 / params.omega2
    j01, j11 = bessel_j(0, z1), bessel_j(1, z1)
    j02, j12 = bessel_j(0, z2), bessel_j(1, z2)
    w0 = params.omega0
    return abs(w0 * j11 * j02 - 0.5 * params.A1 * (1 - xi1)) + abs(
        w0 * j01 * j12 - 0.5 * params.A2 * (1 - xi2)
    )


def taylor_seed(params: DriveParams) -> tuple[float, float]:
    """Second-order small-amplitude expansion of (xi1, xi2), clipped into (0, 1)."""
    w0, w1, w2 = params.omega0, params.omega1, params.omega2
    a1sq, a2sq = params.A1**2, params.A2**2
    s1, s2 = w0 + w1, w0 + w2
    xi1 = w1 / s1 * (1 + w0 / (8 * s1**3) * (a1sq + 2 * a2sq * s1**2 / s2**2))
    xi2 = w2 / s2 * (1 + w0 / (8 * s2**3) * (a2sq + 2 * a1sq * s2**2 / s1**2))
    eps = 1e-12
    return min(max(xi1, eps), 1 - eps), min(max(xi2, eps), 1 - eps)


def _j1_over_z(z: float) -> float:
    # 2 J1(z) / z, continuous at z = 0
    if z < 1e-4:
        return 1.0 - z * z / 8.0
    return 2.0 * bessel_j(1, z) / z


def solve_xi(params: DriveParams) -> ChrwParams:
    """Solve the two transcendental equations for xi_j and renormalize.

    Dividing each defining equation by ``A_j xi_j / 2`` gives the equivalent
    fixed point ``xi_j = omega_j / (omega_j + omega0 g(z_j) J0(z_other))`` with
    ``g(z) = 2 J1(z)/z``. This form stays well conditioned as ``A_j -> 0``
    and reproduces the small-amplitude limit without a special case.

    Raises:
        NoConvergence: the iteration does not settle inside (0, 1).
    """
    validate(params)
    w0, w1, w2 = params.omega0, params.omega1, params.omega2
    if w0 <= 0:
        raise NoConvergence("the renormalization requires omega0 > 0")
    xi1, xi2 = taylor_seed(params)
    damping = 1.0
    residual = math.inf
    iterations = 0
    for iterations in range(1, XI_MAX_ITER + 1):
        z1 = params.A1 * xi1 / w1
        z2 = params.A2 * xi2 / w2
        new1 = w1 / (w1 + w0 * _j1_over_z(z1) * bessel_j(0, z2))
        new2 = w2 / (w2 + w0 * bessel_j(0, z1) * _j1_over_z(z2))
        if not (0 < new1 < 1 and 0 < new2 < 1):
            # overshoot: fall back to a damped half step
            damping *= 0.5
            new1 = xi1 + damping * (min(max(new1, 1e-9), 1 - 1e-9) - xi1)
            new2 = xi2 + damping * (min(max(new2, 1e-9), 1 - 1e-9) - xi2)
        else:
            new1 = xi1 + damping * (new1 - xi1)
            new2 = xi2 + damping * (new2 - xi2)
        step = abs(new1 - xi1) + abs(new2 - xi2)
        xi1, xi2 = new1, new2
        residual = xi_residual(params, xi1, xi2)
        if residual < XI_TOL * max(w0, 1e-300) and step < 1e-14:
            break
    else:
        if not residual < 1e-12 * w0:
            raise NoConvergence(
                f"xi iteration did not converge (residual {residual:.3e}) at {params}"
            )
    if not (0 < xi1 < 1 and 0 < xi2 < 1):
        raise NoConvergence(f"xi left (0, 1): {xi1}, {xi2}")
    return chrw_from_xi(params, xi1, xi2, residual, iterations)


def chrw_from_xi(
    params: DriveParams, xi1: float, xi2: float, residual: float = math.nan, iterations: int = 0
) -> ChrwParams:
    z1 = params.A1 * xi1 / params.omega1
    z2 = params.A2 * xi2 / params.omega2
    w0 = params.omega0
    return ChrwParams(
        xi1=xi1,
        xi2=xi2,
        z1=z1,
        z2=z2,
        A_tilde0=w0 * bessel_j(1, z1) * bessel_j(1, z2),
        A_tilde1=2 * params.A1 * (1 - xi1),
        A_tilde2=2 * params.A2 * (1 - xi2),
        delta_tilde1=w0 * bessel_j(0, z1) * bessel_j(0, z2) - params.omega1,
        Delta=params.omega2 - params.omega1,
        delta_phi21=params.phi2 - params.phi1,
        residual=residual,
        iterations=iterations,
    )


def _phase_sum(params: DriveParams, chrw: ChrwParams, t):
    return chrw.z1 * np.sin(params.omega1 * t + params.phi1) + chrw.z2 * np.sin(
        params.omega2 * t + params.phi2
    )


def back_transform_weights(params: DriveParams, chrw: ChrwParams, t):
    """Weights (f_z, f_plus, f_minus) at time(s) ``t``.

    They expand the rotated, transformed excited-state projector:
    ``R e^S sigma_z e^-S R^dagger = f_z sigma_z + f_+ sigma_+ + f_- sigma_-``.
    """
    zsum = _phase_sum(params, chrw, t)
    theta1 = params.omega1 * t + params.phi1
    s = np.sin(zsum)
    f_z = np.cos(zsum)
    f_plus = -1j * s * np.exp(1j * theta1)
    f_minus = 1j * s * np.exp(-1j * theta1)
    return f_z, f_plus, f_minus


def frame_operator(params: DriveParams, chrw: ChrwParams, t) -> np.ndarray:
    """R(t) e^{S(t)} mapping lab states into the CHRW rotating frame; stacks over array ``t``."""
    t = np.asarray(t, dtype=float)
    zsum = np.asarray(_phase_sum(params, chrw, t), dtype=float)
    theta1 = params.omega1 * t + params.phi1
    c, s = np.cos(zsum / 2), np.sin(zsum / 2)
    up, dn = np.exp(0.5j * theta1), np.exp(-0.5j * theta1)
    out = np.empty(t.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = up * c
    out[..., 0, 1] = 1j * up * s
    out[..., 1, 0] = 1j * dn * s
    out[..., 1, 1] = dn * c
    return out


def h2_terms(chrw: ChrwParams, max_order: int):
    """Yield (index_sum, |J_a(z1) J_b(z2)|) for every neglected fast term.

    Coefficients are in units of omega0; terms are grouped as they appear in
    the sigma_y and sigma_z parts of the discarded Hamiltonian.
    """
    z1, z2 = chrw.z1, chrw.z2
    j1 = [bessel_j(n, z1) for n in range(max_order + 1)]
    j2 = [bessel_j(n, z2) for n in range(max_order + 1)]
    # sigma_y mixed terms J_n J_{2k+1-n}, k >= 1
    for k in range(1, max_order):
        total = 2 * k + 1
        if total > max_order:
            break
        for n in range(1, 2 * k + 1):
            yield total, abs(j1[n] * j2[total - n])
    # sigma_y odd single-tone harmonics of order >= 3
    for order in range(3, max_order + 1, 2):
        yield order, abs(j1[order] * j2[0])
        yield order, abs(j1[0] * j2[order])
    # sigma_z even single-tone harmonics
    for order in range(2, max_order + 1, 2):
        yield order, abs(j1[order] * j2[0])
        yield order, abs(j1[0] * j2[order])
    # sigma_z mixed: difference terms need k >= 2, sum terms k >= 1
    for k in range(1, max_order):
        total = 2 * k
        if total > max_order:
            break
        for n in range(1, 2 * k):
            yield total, abs(j1[n] * j2[total - n])


def h2_residual_diagnostic(params: DriveParams, chrw: ChrwParams, max_order: int = 6) -> float:
    """Largest neglected-term coefficient (units of omega0) with Bessel-index sum <= max_order."""
    return max((c for order, c in h2_terms(chrw, max_order) if order <= max_order), default=0.0)
