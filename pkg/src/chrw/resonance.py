"""Resonance positions as zeros of the indicator d(omega0), band tracing and band maps.

Resonances sit where the time-averaged excitation reaches 1/2, i.e. where
``d`` vanishes. ``d`` of the upper Floquet state changes sign smoothly across
an avoided quasienergy crossing; an exact crossing relabels the states and
makes ``d`` jump between +-|d| instead. An avoided crossing narrower than the
final bracket looks the same, so such points are kept but marked unresolved.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import BandLost, ChrwError
from .model import DriveParams
from .solvers.types import Method

SCAN_DENSITY = 400
MIN_SCAN_POINTS = 16
D_TOL = 1e-10
BRACKET_WIDTH = 1e-7
RESOLVED_D = 1e-3
MAX_BISECTIONS = 200


@dataclass(frozen=True)
class ResonancePoint:
    omega0_star: float
    A1: float
    method: str
    photon_order: int | None = None
    bracket_width_final: float = 0.0
    d_value: float = 0.0

    @property
    def resolved(self) -> bool:
        """False when d still jumps across the final bracket."""
        return abs(self.d_value) < RESOLVED_D


@dataclass(frozen=True)
class BandId:
    """Photon-order band ``2n+1`` seeded at one of its two weak-drive endpoints.

    ``endpoint`` 0 is ``(n+1) w1 - n w2`` and 1 is ``(n+1) w2 - n w1``.
    """

    n: int
    endpoint: int = 0

    @property
    def photon_order(self) -> int:
        return 2 * self.n + 1

    def frequency(self, omega1: float, omega2: float) -> float:
        return band_endpoints(self.n, omega1, omega2)[self.endpoint]


@dataclass(frozen=True)
class ResonanceBand:
    points: tuple
    endpoints: tuple
    photon_order: int | None = None


@dataclass(frozen=True)
class BandMap:
    """P-bar on a grid; ``p_bar[i, j]`` belongs to ``A1_grid[i]`` and ``omega0_grid[j]``."""

    omega0_grid: np.ndarray
    A1_grid: np.ndarray
    p_bar: np.ndarray
    status: np.ndarray
    method: str
    info: dict = field(default_factory=dict)


def band_endpoints(n: int, omega1: float, omega2: float) -> tuple[float, float]:
    return ((n + 1) * omega1 - n * omega2, (n + 1) * omega2 - n * omega1)


def photon_order_label(omega0: float, omega1: float, omega2: float, n_max: int = 12) -> int | None:
    """2n+1 for the weak-drive endpoint nearest to ``omega0``; None when ambiguous."""
    candidates = []
    for n in range(n_max + 1):
        for e in band_endpoints(n, omega1, omega2):
            if e > 0:
                candidates.append((abs(omega0 - e), 2 * n + 1))
    candidates.sort()
    if not candidates:
        return None
    if len(candidates) > 1 and candidates[1][0] - candidates[0][0] < 0.25 * abs(omega2 - omega1):
        if candidates[1][1] != candidates[0][1]:
            return None
    return candidates[0][1]


def indicator(params: DriveParams, method=Method.CHRW) -> float:
    """d at one parameter point (CHRW, or the RWA analogue)."""
    from .solvers.rotating import chrw_averaged, rwa_averaged

    method = Method.parse(method)
    if method is Method.CHRW:
        return chrw_averaged(params).d
    if method is Method.RWA:
        return rwa_averaged(params).d
    raise ValueError("the resonance indicator d exists for the chrw and rwa backends only")


def _safe_indicator(args) -> float:
    params, method = args
    try:
        return indicator(params, method)
    except ChrwError:
        return math.nan


def parallel_map(func, items, workers: int | None = 1) -> list:
    """Ordered map; a process pool is used when ``workers`` exceeds one."""
    items = list(items)
    if not workers or workers <= 1 or len(items) < 2:
        return [func(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items, chunksize=max(1, len(items) // (4 * workers))))


def d_scan(template: DriveParams, omega0_grid, method=Method.CHRW, workers: int | None = 1) -> list:
    """(omega0, d) pairs; points where the solver fails carry d = nan."""
    grid = np.asarray(omega0_grid, dtype=float).ravel()
    if grid.size > 1 and np.any(np.diff(grid) <= 0):
        raise ValueError("omega0 grid must be strictly increasing")
    method = Method.parse(method)
    values = parallel_map(_safe_indicator, [(template.with_(omega0=float(w)), method) for w in grid], workers)
    return list(zip(grid.tolist(), values))


def _bisect(template: DriveParams, method, a: float, b: float, da: float, db: float,
            d_tol: float, width: float):
    for _ in range(MAX_BISECTIONS):
        if b - a < width:
            break
        mid = 0.5 * (a + b)
        dm = indicator(template.with_(omega0=mid), method)
        if abs(dm) < d_tol:
            return mid, b - a, dm
        if (dm > 0) == (da > 0):
            a, da = mid, dm
        else:
            b, db = mid, dm
    if abs(da) <= abs(db):
        return a, b - a, da
    return b, b - a, db


def find_resonances(
    template: DriveParams,
    omega0_range: tuple[float, float],
    scan_points: int | None = None,
    d_tol: float = D_TOL,
    method=Method.CHRW,
    width: float = BRACKET_WIDTH,
    workers: int | None = 1,
) -> list:
    """Zeros of d in ``omega0_range`` sorted by omega0.

    Every sign change on the scan grid is refined by bisection until the
    bracket is narrower than ``width`` or ``|d| < d_tol``. The default grid
    has 400 points per unit omega1, so resonances narrower than about
    0.005 omega1 may need a denser caller-supplied grid.
    """
    lo, hi = map(float, omega0_range)
    if not hi > lo:
        raise ValueError("omega0 range must be nonempty")
    if scan_points is None:
        scan_points = max(MIN_SCAN_POINTS, int(math.ceil(SCAN_DENSITY * (hi - lo))) + 1)
    if scan_points < MIN_SCAN_POINTS:
        raise ValueError(f"scan_points must be at least {MIN_SCAN_POINTS}")
    method = Method.parse(method)
    scan = d_scan(template, np.linspace(lo, hi, scan_points), method, workers)
    points = []
    for (a, da), (b, db) in zip(scan[:-1], scan[1:]):
        if not (math.isfinite(da) and math.isfinite(db)):
            continue
        if da == 0.0:
            root, bw, dv = a, 0.0, 0.0
        elif (da > 0) != (db > 0):
            root, bw, dv = _bisect(template, method, a, b, da, db, d_tol, width)
        else:
            continue
        points.append(ResonancePoint(root, template.A1, method.value, None, bw, dv))
    if scan[-1][1] == 0.0:
        points.append(ResonancePoint(scan[-1][0], template.A1, method.value))
    return sorted(points, key=lambda p: p.omega0_star)


def _with_amplitude(template: DriveParams, A1: float) -> DriveParams:
    """Change A1 keeping the amplitude ratio r fixed."""
    r = template.r if template.r is not None else 0.0
    return template.with_(A1=float(A1), A2=float(A1) * r)


def band_trace(
    template: DriveParams,
    A1_grid,
    band_seed_range: tuple[float, float],
    method=Method.CHRW,
    window: float | None = None,
) -> ResonanceBand:
    """Follow one resonance through increasing A1 by continuation.

    The resonance found at each amplitude, extrapolated linearly, centres the
    search window at the next one. The band is labeled by the weak-drive
    endpoint nearest to its first point.

    Raises:
        BandLost: no resonance in the seed range or in a continuation window.
    """
    grid = np.asarray(A1_grid, dtype=float).ravel()
    if grid.size == 0 or np.any(np.diff(grid) <= 0):
        raise ValueError("A1 grid must be nonempty and increasing")
    method = Method.parse(method)
    lo, hi = band_seed_range
    centre = 0.5 * (lo + hi)
    w = window if window is not None else 0.1 * abs(template.omega2 - template.omega1)
    found = find_resonances(_with_amplitude(template, grid[0]), (lo, hi), method=method)
    if not found:
        raise BandLost(f"no resonance in seed range {band_seed_range} at A1={grid[0]:g}")
    first = min(found, key=lambda p: abs(p.omega0_star - centre))
    points = [first]
    for A1 in grid[1:]:
        prev = points[-1].omega0_star
        if len(points) > 1:
            slope = (prev - points[-2].omega0_star) / (points[-1].A1 - points[-2].A1)
            guess = prev + slope * (A1 - points[-1].A1)
        else:
            guess = prev
        half = max(w, 2 * abs(guess - prev))
        params = _with_amplitude(template, A1)
        found = find_resonances(params, (max(guess - half, 1e-6), guess + half), method=method)
        if not found:
            raise BandLost(f"resonance lost near omega0={guess:.6f} at A1={A1:g}")
        points.append(min(found, key=lambda p: abs(p.omega0_star - guess)))
    order = photon_order_label(first.omega0_star, template.omega1, template.omega2)
    n = (order - 1) // 2 if order is not None else None
    endpoints = band_endpoints(n, template.omega1, template.omega2) if n is not None else ()
    labeled = tuple(
        ResonancePoint(p.omega0_star, p.A1, p.method, order, p.bracket_width_final, p.d_value)
        for p in points
    )
    return ResonanceBand(points=labeled, endpoints=endpoints, photon_order=order)


def _amplitude_path(A1: float, start: float, step: float) -> np.ndarray:
    if A1 <= start:
        return np.array([A1])
    count = max(2, int(math.ceil((A1 - start) / step)) + 1)
    return np.linspace(start, A1, count)


def band_position(template: DriveParams, A1: float, band_id: BandId, method=Method.CHRW,
                  start: float = 0.01, step: float = 0.02) -> float:
    """Resonance position on ``band_id`` at amplitude A1, traced up from weak drive."""
    e = band_id.frequency(template.omega1, template.omega2)
    half = 0.05 * abs(template.omega2 - template.omega1)
    band = band_trace(template, _amplitude_path(A1, start, step), (e - half, e + half), method)
    return band.points[-1].omega0_star


def bloch_siegert_shift(template: DriveParams, A1: float, band_id: BandId, **kwargs) -> float:
    """omega0* (CHRW) minus omega0* (RWA) on the same band at amplitude A1."""
    chrw = band_position(template, A1, band_id, Method.CHRW, **kwargs)
    rwa = band_position(template, A1, band_id, Method.RWA, **kwargs)
    return chrw - rwa


def half_width(template: DriveParams, omega0_star: float, method=Method.CHRW,
               level: float | None = None, max_width: float = 0.5) -> float:
    """Half width at half maximum of the P-bar peak at ``omega0_star``.

    By default each side is measured at the level halfway between the peak
    and the local minimum on that side, so a peak riding on a broad strong-drive
    background is not merged with its neighbours. A fixed ``level`` (for
    example 0.25) uses that absolute height instead.

    Raises:
        ValueError: P-bar does not fall below the level within ``max_width``.
    """
    from .solvers.rotating import chrw_averaged, rwa_averaged

    solve = chrw_averaged if Method.parse(method) is Method.CHRW else rwa_averaged

    def pbar(w):
        return solve(template.with_(omega0=w)).p_bar

    peak = pbar(omega0_star)
    sides = []
    for sign in (1.0, -1.0):
        offsets, values = [0.0], [peak]
        step = 1e-6
        while step < max_width:
            v = pbar(omega0_star + sign * step)
            offsets.append(step)
            values.append(v)
            if level is None and v > values[-2]:
                break  # passed the local minimum
            if level is not None and v <= level:
                break
            step *= 1.5
        side_level = 0.5 * (peak + min(values)) if level is None else level
        idx = next((i for i, v in enumerate(values) if v <= side_level), None)
        if idx is None or idx == 0:
            raise ValueError(f"P-bar stays above {side_level:.3f} within {max_width} of the peak")
        inner, outer = offsets[idx - 1], offsets[idx]
        for _ in range(60):
            mid = 0.5 * (inner + outer)
            if pbar(omega0_star + sign * mid) > side_level:
                inner = mid
            else:
                outer = mid
            if outer - inner < 1e-10:
                break
        sides.append(0.5 * (inner + outer))
    return 0.5 * sum(sides)


def _pbar_point(args):
    from .solvers import SolverRequest, run_averaged

    params, method = args
    try:
        return run_averaged(SolverRequest(params, method)).p_bar, "ok"
    except ChrwError as exc:
        return math.nan, type(exc).__name__


def band_map(template: DriveParams, omega0_grid, A1_grid, method=Method.CHRW,
             workers: int | None = 1) -> BandMap:
    """P-bar over (A1, omega0); failed points are nan with the error name as status."""
    w0 = np.asarray(omega0_grid, dtype=float).ravel()
    a1 = np.asarray(A1_grid, dtype=float).ravel()
    if w0.size == 0 or a1.size == 0:
        raise ValueError("grids must be nonempty")
    method = Method.parse(method)
    jobs = [(_with_amplitude(template, a).with_(omega0=float(w)), method) for a in a1 for w in w0]
    results = parallel_map(_pbar_point, jobs, workers)
    p_bar = np.array([r[0] for r in results]).reshape(a1.size, w0.size)
    status = np.array([r[1] for r in results], dtype=object).reshape(a1.size, w0.size)
    return BandMap(w0, a1, p_bar, status, method.value)
