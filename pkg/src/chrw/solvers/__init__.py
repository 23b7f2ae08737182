"""Solver backends behind a common request/result interface."""

from __future__ import annotations

from .gft import gft_averaged, gft_build, gft_solve, gft_transient
from .rk import rk_transient
from .rotating import (
    chrw_averaged,
    chrw_evolution,
    chrw_fourier_hamiltonian,
    chrw_transient,
    rwa_averaged,
    rwa_evolution,
    rwa_fourier_hamiltonian,
    rwa_transient,
)
from .types import AveragedResult, Method, ProbabilitySeries, SolverRequest

GFT_DEFAULT_TRUNCATION = 14


def run_transient(request: SolverRequest) -> ProbabilitySeries:
    """P(t, t0) on the request's time grid with the requested backend."""
    p, grid, t0 = request.params, request.time_grid, request.t0
    if request.method is Method.CHRW:
        return chrw_transient(p, t0, grid, request.truncation)
    if request.method is Method.RWA:
        return rwa_transient(p, t0, grid, request.truncation)
    if request.method is Method.GFT:
        n1 = request.truncation or GFT_DEFAULT_TRUNCATION
        return gft_transient(p, t0, grid, n1, request.truncation2 or n1)
    return rk_transient(p, t0, grid)


def run_averaged(request: SolverRequest) -> AveragedResult:
    """Time-averaged P with the requested Floquet backend."""
    p = request.params
    if request.method is Method.CHRW:
        return chrw_averaged(p, request.truncation)
    if request.method is Method.RWA:
        return rwa_averaged(p, request.truncation)
    if request.method is Method.GFT:
        return gft_averaged(p, request.truncation, request.truncation2)
    raise ValueError("the rk backend gives transients only")


__all__ = [
    "AveragedResult", "Method", "ProbabilitySeries", "SolverRequest",
    "chrw_averaged", "chrw_evolution", "chrw_fourier_hamiltonian", "chrw_transient",
    "gft_averaged", "gft_build", "gft_solve", "gft_transient",
    "rk_transient", "run_averaged", "run_transient",
    "rwa_averaged", "rwa_evolution", "rwa_fourier_hamiltonian", "rwa_transient",
]
