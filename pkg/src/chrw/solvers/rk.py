"""Direct fixed-step RK4 integration of the lab-frame Schrodinger equation."""

from __future__ import annotations

import math

import numpy as np

from ..errors import StepTooLarge
from ..model import DriveParams, validate
from .types import ProbabilitySeries

NORM_DRIFT_TOL = 1e-6
MAX_HALVINGS = 4
STEPS_PER_PERIOD = 400


def default_step(params: DriveParams) -> float:
    fastest = max(params.omega0, params.omega1, params.omega2, params.A1, params.A2)
    return 2 * math.pi / (STEPS_PER_PERIOD * fastest)


def _integrate(params: DriveParams, t0: float, grid: np.ndarray, h_max: float):
    w0h = 0.5 * params.omega0
    a1, a2 = 0.5 * params.A1, 0.5 * params.A2
    w1, w2 = params.omega1, params.omega2
    p1, p2 = params.phi1, params.phi2
    cos = math.cos

    def rhs(t, u, d):
        # -i H psi with H = w0/2 sz + f(t) sx
        f = a1 * cos(w1 * t + p1) + a2 * cos(w2 * t + p2)
        return -1j * (w0h * u + f * d), -1j * (f * u - w0h * d)

    up, dn = 0j, 1 + 0j
    t = t0
    out = np.empty(grid.size)
    drift = 0.0
    for i, target in enumerate(grid):
        span = target - t
        steps = max(1, math.ceil(span / h_max - 1e-9)) if span > 0 else 0
        h = span / steps if steps else 0.0
        for _ in range(steps):
            k1u, k1d = rhs(t, up, dn)
            th = t + 0.5 * h
            k2u, k2d = rhs(th, up + 0.5 * h * k1u, dn + 0.5 * h * k1d)
            k3u, k3d = rhs(th, up + 0.5 * h * k2u, dn + 0.5 * h * k2d)
            k4u, k4d = rhs(t + h, up + h * k3u, dn + h * k3d)
            up += h / 6 * (k1u + 2 * k2u + 2 * k3u + k4u)
            dn += h / 6 * (k1d + 2 * k2d + 2 * k3d + k4d)
            t += h
        t = target
        norm = abs(up) ** 2 + abs(dn) ** 2
        drift = max(drift, abs(norm - 1.0))
        out[i] = abs(up) ** 2
    return out, drift


def rk_transient(
    params: DriveParams,
    t0: float,
    time_grid,
    step: float | None = None,
    drift_tol: float = NORM_DRIFT_TOL,
) -> ProbabilitySeries:
    """P(t) from |down> at t0 by classical RK4 with a fixed step.

    Between consecutive grid times the step is shrunk to divide the interval
    evenly, so every grid point is hit exactly. If the norm drifts by more
    than ``drift_tol`` the step is halved, at most four times.
    """
    validate(params)
    grid = np.asarray(time_grid, dtype=float)
    if grid.size and (grid[0] < t0 or np.any(np.diff(grid) <= 0)):
        raise ValueError("time grid must be increasing and start at or after t0")
    h = step if step is not None else default_step(params)
    for halving in range(MAX_HALVINGS + 1):
        values, drift = _integrate(params, t0, grid, h)
        if drift <= drift_tol:
            return ProbabilitySeries(
                grid, np.clip(values, 0.0, 1.0), "rk",
                {"step": h, "norm_drift": drift, "halvings": halving},
            )
        h *= 0.5
    raise StepTooLarge(f"norm drift {drift:.2e} exceeds {drift_tol:.0e} after {MAX_HALVINGS} halvings")
