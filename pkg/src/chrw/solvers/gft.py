"""Two-mode (generalized) Floquet treatment of the full bichromatic Hamiltonian.

Basis states are |s, n, m> with harmonic ``n`` of omega1 and ``m`` of omega2,
laid out as ``2 * ((n + N1) * (2 N2 + 1) + (m + N2)) + s``. The drive phases
enter only through a diagonal gauge ``exp(i (n phi1 + m phi2))``, so the
numerical work is done on the real symmetric matrix at zero phase.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from ..errors import DerivativeCrossCheckFailed, DimensionOverflow, NoTruncationConvergence
from ..model import DriveParams, validate
from .types import AveragedResult, ProbabilitySeries

DIMENSION_CAP = 20000
GFT_SCHEDULE = (6, 9, 14, 21, 31, 47, 70, 105)
QUASIENERGY_TOL = 1e-6
DERIVATIVE_STEP = 1e-5
CROSS_CHECK_TOL = 1e-4
DENSE_LIMIT = 1200
N_NEAREST = 12


def gft_dimension(N1: int, N2: int) -> int:
    return 2 * (2 * N1 + 1) * (2 * N2 + 1)


def _check(N1: int, N2: int, cap: int) -> None:
    if N1 < 1 or N2 < 1:
        raise ValueError("two-mode truncations must be >= 1")
    dim = gft_dimension(N1, N2)
    if dim > cap:
        raise DimensionOverflow(f"two-mode Floquet dimension {dim} exceeds cap {cap}")


def _gauge(params: DriveParams, N1: int, N2: int) -> np.ndarray:
    """Diagonal of D with H_F2 = D H_real D^dagger."""
    n = np.arange(-N1, N1 + 1)[:, None]
    m = np.arange(-N2, N2 + 1)[None, :]
    phase = np.exp(1j * (n * params.phi1 + m * params.phi2)).ravel()
    return np.repeat(phase, 2)


def _build_real(params: DriveParams, N1: int, N2: int, omega0: float | None = None) -> sp.csr_matrix:
    w0 = params.omega0 if omega0 is None else omega0
    L1, L2 = 2 * N1 + 1, 2 * N2 + 1
    n = np.repeat(np.arange(-N1, N1 + 1), L2)
    m = np.tile(np.arange(-N2, N2 + 1), L1)
    shift = n * params.omega1 + m * params.omega2
    diag = np.empty(2 * L1 * L2)
    diag[0::2] = 0.5 * w0 + shift
    diag[1::2] = -0.5 * w0 + shift
    # sigma_x couples (up, j) with (down, j') where j' is one harmonic away
    rows, cols, vals = [], [], []
    block = np.arange(L1 * L2)
    for mask, step, amp in (
        (n < N1, L2, 0.25 * params.A1),
        (m < N2, 1, 0.25 * params.A2),
    ):
        if amp == 0:
            continue
        src = block[mask]
        dst = src + step
        for a, b in ((2 * src, 2 * dst + 1), (2 * src + 1, 2 * dst)):
            rows += [a, b]
            cols += [b, a]
            vals += [np.full(a.size, amp)] * 2
    if rows:
        off = sp.csr_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(diag.size, diag.size),
        )
    else:
        off = sp.csr_matrix((diag.size, diag.size))
    return (sp.diags(diag) + off).tocsr()


def gft_build(params: DriveParams, N1: int, N2: int, cap: int = DIMENSION_CAP, dense: bool = False):
    """Two-mode Floquet matrix with the drive phases, as CSR (or dense) complex array."""
    validate(params)
    _check(N1, N2, cap)
    real = _build_real(params, N1, N2)
    g = _gauge(params, N1, N2)
    mat = sp.diags(g) @ real.astype(complex) @ sp.diags(g.conj())
    mat = mat.tocsr()
    return mat.toarray() if dense else mat


@dataclass(frozen=True)
class TwoModeFloquetSolution:
    """Representative two-mode Floquet state(s).

    ``coefficients[g]`` has shape (2 N1 + 1, 2 N2 + 1, 2), indexed (n, m, spin).
    """

    quasienergies: tuple
    coefficients: np.ndarray
    truncations: tuple
    up_weights: tuple
    dimension: int


def _spin_weights(vec: np.ndarray) -> tuple[float, float]:
    up = float(np.sum(np.abs(vec[0::2]) ** 2))
    down = float(np.sum(np.abs(vec[1::2]) ** 2))
    return up, down


def _center_block(N1: int, N2: int, reach: int = 1) -> np.ndarray:
    L2 = 2 * N2 + 1
    idx = []
    for n in range(-reach, reach + 1):
        for m in range(-reach, reach + 1):
            j = (n + N1) * L2 + (m + N2)
            idx += [2 * j, 2 * j + 1]
    return np.array(idx)


def _dominant_harmonic(vec: np.ndarray, N1: int, N2: int) -> tuple[int, int]:
    w = (np.abs(vec[0::2]) ** 2 + np.abs(vec[1::2]) ** 2).reshape(2 * N1 + 1, 2 * N2 + 1)
    i, j = np.unravel_index(int(np.argmax(w)), w.shape)
    return int(i) - N1, int(j) - N2


def _nearest_eigenpairs(mat: sp.csr_matrix, sigma: float, k: int):
    dim = mat.shape[0]
    if dim <= DENSE_LIMIT:
        vals, vecs = np.linalg.eigh(mat.toarray())
        order = np.argsort(np.abs(vals - sigma))[:k]
        return vals[order], vecs[:, order]
    k = min(k, dim - 2)
    return spla.eigsh(mat, k=k, sigma=sigma, which="LM", tol=1e-13)


def _representative(params: DriveParams, N1: int, N2: int, omega0: float | None = None,
                    sigma: float = 0.0, reference: np.ndarray | None = None):
    """Eigenpair near ``sigma`` best localized on the central harmonics.

    With ``reference`` the eigenvector of largest overlap with it is chosen
    instead, which follows one branch across a small parameter change.
    """
    mat = _build_real(params, N1, N2, omega0)
    vals, vecs = _nearest_eigenpairs(mat, sigma, N_NEAREST)
    if reference is not None:
        score = np.abs(vecs.T @ reference)
    else:
        centre = _center_block(N1, N2)
        score = np.sum(np.abs(vecs[centre]) ** 2, axis=0)
    best = int(np.argmax(score))
    return float(vals[best]), vecs[:, best], mat.shape[0]


def _reduced_quasienergy(params: DriveParams, value: float, vec: np.ndarray, N1: int, N2: int):
    n, m = _dominant_harmonic(vec, N1, N2)
    return value - n * params.omega1 - m * params.omega2


def gft_solve(params: DriveParams, N1: int, N2: int, cap: int = DIMENSION_CAP) -> TwoModeFloquetSolution:
    """Representative Floquet state and the quasienergy pair (eps, -eps)."""
    validate(params)
    _check(N1, N2, cap)
    # the up state on harmonic (0, 0) starts at +omega0/2 before dressing
    value, vec, dim = _representative(params, N1, N2, sigma=0.5 * params.omega0)
    eps = _reduced_quasienergy(params, value, vec, N1, N2)
    up, down = _spin_weights(vec)
    g = _gauge(params, N1, N2)
    coeff = (g * vec).reshape(2 * N1 + 1, 2 * N2 + 1, 2)
    return TwoModeFloquetSolution(
        quasienergies=(eps, -eps),
        coefficients=coeff[None],
        truncations=(N1, N2),
        up_weights=(up, down),
        dimension=dim,
    )


def gft_converge(params: DriveParams, N_start: int = 6, N_max: int = 70, tol: float = QUASIENERGY_TOL,
                 cap: int = DIMENSION_CAP) -> TwoModeFloquetSolution:
    """Grow N1 = N2 through the schedule until the quasienergy is stable to ``tol``."""
    previous = None
    for N in [N_start] + [n for n in GFT_SCHEDULE if N_start < n <= N_max]:
        if gft_dimension(N, N) > cap:
            break
        current = gft_solve(params, N, N, cap)
        if previous is not None:
            a, b = previous.quasienergies[0], current.quasienergies[0]
            # the pair is (eps, -eps); either member may come back
            if min(abs(a - b), abs(a + b)) < tol:
                return previous
        previous = current
    raise NoTruncationConvergence(f"two-mode quasienergy not stable to {tol:.0e} by N={N_max}")


def projection_sum(sol: TwoModeFloquetSolution) -> float:
    """Time-averaged P from the representative state's spin weights.

    The double sum over shifted eigenvectors factorizes by translation
    invariance into sum_g w_up(g) w_down(g); the partner state carries the
    complementary weights.
    """
    up, down = sol.up_weights
    norm = up + down
    up, down = up / norm, down / norm
    return up * down + down * up


def projection_sum_full(params: DriveParams, N1: int, N2: int) -> float:
    """Literal sum over every eigenvector of the truncated matrix (dense; small N only)."""
    mat = _build_real(params, N1, N2).toarray()
    _, vecs = np.linalg.eigh(mat)
    up_weight = np.sum(vecs[0::2] ** 2, axis=0)
    j00 = N1 * (2 * N2 + 1) + N2
    down00 = vecs[2 * j00 + 1] ** 2
    return float(np.sum(up_weight * down00))


def quasienergy_derivative(params: DriveParams, N1: int, N2: int, step: float = DERIVATIVE_STEP) -> float:
    """d eps / d omega0 by central differences, following one eigenvector branch."""
    value, vec, _ = _representative(params, N1, N2, sigma=0.5 * params.omega0)
    lo, _, _ = _representative(params, N1, N2, params.omega0 - step, sigma=value, reference=vec)
    hi, _, _ = _representative(params, N1, N2, params.omega0 + step, sigma=value, reference=vec)
    return (hi - lo) / (2 * step)


def gft_averaged(params: DriveParams, N1: int | None = None, N2: int | None = None,
                 cross_check: bool = False) -> AveragedResult:
    if N1 is None:
        sol = gft_converge(params)
    else:
        sol = gft_solve(params, N1, N1 if N2 is None else N2)
    p_bar = projection_sum(sol)
    info = {"truncations": sol.truncations}
    if cross_check:
        slope = quasienergy_derivative(params, *sol.truncations)
        p_deriv = 0.5 * (1 - 4 * slope**2)
        info["p_bar_derivative"] = p_deriv
        if abs(p_deriv - p_bar) > CROSS_CHECK_TOL:
            raise DerivativeCrossCheckFailed(
                f"projection sum {p_bar:.6f} vs derivative form {p_deriv:.6f}"
            )
    return AveragedResult(
        p_bar=p_bar,
        d=float("nan"),
        quasienergies=sol.quasienergies,
        truncation_used=sol.truncations[0],
        method="gft",
        dimension=sol.dimension,
        info=info,
    )


def gft_transient(params: DriveParams, t0: float, time_grid, N1: int, N2: int | None = None,
                  cap: int = DIMENSION_CAP) -> ProbabilitySeries:
    """P(t, t0) = |sum_kl e^{i(k w1 + l w2)(t - t0)} <up,k,l| e^{-i H_F2 (t - t0)} |down,0,0>|^2.

    The phases are advanced to t0 so the formula, written for a zero initial
    time, applies to any t0.
    """
    N2 = N1 if N2 is None else N2
    validate(params)
    _check(N1, N2, cap)
    shifted = params.with_(phi1=params.phi1 + params.omega1 * t0, phi2=params.phi2 + params.omega2 * t0)
    vals, vecs = np.linalg.eigh(_build_real(shifted, N1, N2).toarray())
    s = np.asarray(time_grid, dtype=float) - t0
    L1, L2 = 2 * N1 + 1, 2 * N2 + 1
    j00 = N1 * L2 + N2
    weights = vecs[2 * j00 + 1]
    keep = np.abs(weights) > 1e-13
    vals, weights = vals[keep], weights[keep]
    up = vecs[0::2][:, keep].reshape(L1, L2, -1)
    g1 = np.exp(1j * np.multiply.outer(s, np.arange(-N1, N1 + 1)) * params.omega1)
    g2 = np.exp(1j * np.multiply.outer(s, np.arange(-N2, N2 + 1)) * params.omega2)
    gauge = _gauge(shifted, N1, N2)[0::2].reshape(L1, L2)
    amp = np.empty(s.size, dtype=complex)
    chunk = max(1, 2_000_000 // max(1, up.shape[2] * L2))
    for start in range(0, s.size, chunk):
        sl = slice(start, start + chunk)
        # sum over k then l of phase * gauge * eigenvector component
        a = np.einsum("tk,kl,klv->tlv", g1[sl], gauge, up, optimize=True)
        a = np.einsum("tl,tlv->tv", g2[sl], a)
        amp[sl] = np.sum(a * weights * np.exp(-1j * np.multiply.outer(s[sl], vals)), axis=1)
    prob = np.clip(np.abs(amp) ** 2, 0.0, 1.0)
    return ProbabilitySeries(
        np.asarray(time_grid, dtype=float), prob, "gft",
        {"truncations": (N1, N2), "dimension": gft_dimension(N1, N2)},
    )
