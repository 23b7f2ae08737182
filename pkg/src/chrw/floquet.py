"""Floquet solver for a 2x2 Hamiltonian periodic with a single frequency.

A Hamiltonian ``H(t) = sum_m H^(m) exp(i m Omega t)`` is mapped onto the
Sambe-space matrix with blocks ``H^(k-n) + k Omega delta_kn`` at harmonic row
``k`` and column ``n``. Vectors are laid out harmonic-major: index
``2 (n + N) + s`` with spin ``s = 0`` for |up> and ``s = 1`` for |down>.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateSelection,
    NoTruncationConvergence,
    NotHermitian,
    TruncationTooSmall,
)

TRUNCATION_SCHEDULE = (8, 12, 18, 27, 40, 60, 90, 135, 200, 300, 450, 675, 1000)


@dataclass(frozen=True)
class FourierHamiltonian:
    base_frequency: float
    blocks: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.base_frequency == 0:
            raise ValueError("base frequency must be nonzero")
        blocks = {int(m): np.asarray(b, dtype=complex) for m, b in self.blocks.items()}
        for m, b in blocks.items():
            if b.shape != (2, 2):
                raise ValueError(f"block {m} must be 2x2")
            partner = blocks.get(-m)
            if partner is None or not np.allclose(partner, b.conj().T, atol=1e-14):
                raise NotHermitian(f"block {-m} must be the adjoint of block {m}")
        object.__setattr__(self, "blocks", blocks)

    @property
    def max_harmonic(self) -> int:
        return max((abs(m) for m in self.blocks), default=0)

    def at(self, t) -> np.ndarray:
        """H(t); a stack of matrices when ``t`` is an array."""
        t = np.asarray(t, dtype=float)
        out = np.zeros(t.shape + (2, 2), dtype=complex)
        for m, b in self.blocks.items():
            out += np.exp(1j * m * self.base_frequency * t)[..., None, None] * b
        return out


@dataclass(frozen=True)
class FloquetSolution:
    """Two Floquet states and quasienergies, ordered so that eps_plus >= eps_minus.

    ``coefficients[g, j]`` is the spin 2-vector of state ``g`` (0 = plus,
    1 = minus) on harmonic ``j - N - offsets[g]``. The offset records the
    relabeling that folds the state's quasienergy into the first zone.
    """

    quasienergies: tuple
    coefficients: np.ndarray
    truncation: int
    base_frequency: float
    dimension: int = 0
    offsets: tuple = (0, 0)

    def harmonics(self, state: int = 0) -> np.ndarray:
        return np.arange(-self.truncation, self.truncation + 1) - self.offsets[state]

    def states_at(self, t) -> np.ndarray:
        """|u_g(t)> for each time; shape ``t.shape + (2, 2)`` as (time, state, spin)."""
        t = np.asarray(t, dtype=float)
        out = []
        for g in range(2):
            phases = np.exp(1j * self.base_frequency * np.multiply.outer(t, self.harmonics(g)))
            out.append(phases @ self.coefficients[g])
        return np.stack(out, axis=-2)


def build_floquet_matrix(ham: FourierHamiltonian, truncation: int) -> np.ndarray:
    """Sambe-space matrix of dimension 2(2N+1)."""
    N = int(truncation)
    if N < max(1, ham.max_harmonic):
        raise TruncationTooSmall(f"truncation {N} below largest harmonic {ham.max_harmonic}")
    size = 2 * N + 1
    dtype = complex
    if all(np.all(b.imag == 0) for b in ham.blocks.values()):
        dtype = float
    mat = np.zeros((2 * size, 2 * size), dtype=dtype)
    for row in range(size):
        k = row - N
        for m, block in ham.blocks.items():
            col = row - m
            if 0 <= col < size:
                mat[2 * row : 2 * row + 2, 2 * col : 2 * col + 2] += (
                    block.real if dtype is float else block
                )
        mat[2 * row, 2 * row] += k * ham.base_frequency
        mat[2 * row + 1, 2 * row + 1] += k * ham.base_frequency
    return mat


def diagonalize(matrix: np.ndarray, check: bool = True):
    """Eigenvalues (ascending) and orthonormal eigenvectors of a Hermitian matrix."""
    matrix = np.asarray(matrix)
    if check:
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise NotHermitian("matrix must be square")
        scale = max(1.0, float(np.max(np.abs(matrix)))) if matrix.size else 1.0
        if np.max(np.abs(matrix - matrix.conj().T), initial=0.0) > 1e-12 * scale:
            raise NotHermitian("matrix is not Hermitian")
    return np.linalg.eigh(matrix)


def fold_to_zone(eps, omega: float):
    """Map quasienergies into (-|omega|/2, |omega|/2]; returns (folded, shift index)."""
    w = abs(omega)
    eps = np.asarray(eps, dtype=float)
    k = np.ceil(eps / w - 0.5)
    folded = eps - k * w
    return folded, k.astype(int)


def shift_harmonics(coeffs: np.ndarray, k: int) -> np.ndarray:
    """c'(n) = c(n + k) on the same harmonic window, zero-filled at the edges."""
    out = np.zeros_like(coeffs)
    size = coeffs.shape[0]
    if abs(k) >= size:
        return out
    if k >= 0:
        out[: size - k] = coeffs[k:]
    else:
        out[-k:] = coeffs[: size + k]
    return out


def central_weight(vectors: np.ndarray, truncation: int) -> np.ndarray:
    """Weight of each eigenvector (columns) on harmonics -1, 0, +1."""
    lo = 2 * (truncation - 1)
    hi = 2 * (truncation + 2)
    return np.sum(np.abs(vectors[lo:hi]) ** 2, axis=0)


def select_brillouin(eigenpairs, base_frequency: float, truncation: int) -> FloquetSolution:
    """Pick the two physical Floquet states from a truncated Sambe spectrum.

    Every eigenpair is a replica, shifted by some number of harmonics, of one
    of two Floquet states. Replicas near the truncation edge are distorted, so
    eigenpairs are ranked by their weight on harmonics -1..1. The second state
    is the best-ranked eigenpair that is not a shifted copy of the first. Both
    quasienergies are then folded into (-|Omega|/2, |Omega|/2], the state
    being relabeled by the same number of harmonics.
    """
    values, vectors = eigenpairs
    values = np.asarray(values, dtype=float)
    size = 2 * truncation + 1
    if values.size < 2:
        raise DegenerateSelection("need at least two eigenpairs")
    w = abs(base_frequency)
    weights = central_weight(vectors, truncation)
    order = np.lexsort((np.abs(values), -np.round(weights, 12)))
    first = order[0]
    c_first = vectors[:, first].reshape(size, 2)
    second = None
    for cand in order[1:]:
        if weights[cand] < 1e-3:
            break
        j = int(np.rint((values[cand] - values[first]) / base_frequency))
        if abs(values[cand] - values[first] - j * base_frequency) < 1e-6 * w:
            c_cand = vectors[:, cand].reshape(size, 2)
            # a copy shifted by j harmonics overlaps the first state almost fully
            if abs(np.vdot(c_first, shift_harmonics(c_cand, j))) > 0.5:
                continue
        second = cand
        break
    if second is None:
        raise DegenerateSelection("could not find a second central Floquet state")
    folded, shifts = fold_to_zone(values[[first, second]], base_frequency)
    # folding by k|Omega| relabels harmonics by k * sign(Omega)
    offsets = [int(k) * (1 if base_frequency > 0 else -1) for k in shifts]
    chosen = [
        (float(folded[0]), vectors[:, first].reshape(size, 2), offsets[0]),
        (float(folded[1]), vectors[:, second].reshape(size, 2), offsets[1]),
    ]
    chosen.sort(key=lambda item: -item[0])
    return FloquetSolution(
        quasienergies=(chosen[0][0], chosen[1][0]),
        coefficients=np.array([c for _, c, _ in chosen]),
        truncation=truncation,
        base_frequency=base_frequency,
        dimension=2 * size,
        offsets=(chosen[0][2], chosen[1][2]),
    )


def solve(ham: FourierHamiltonian, truncation: int) -> FloquetSolution:
    mat = build_floquet_matrix(ham, truncation)
    return select_brillouin(diagonalize(mat, check=False), ham.base_frequency, truncation)


def evolution_operator(sol: FloquetSolution, t, t0: float = 0.0) -> np.ndarray:
    """U(t, t0) = sum_g exp(-i eps_g (t - t0)) |u_g(t)><u_g(t0)|; stacks over array ``t``."""
    t = np.asarray(t, dtype=float)
    u_t = sol.states_at(t)  # (..., g, s)
    u_0 = sol.states_at(np.asarray(t0, dtype=float))  # (g, s)
    eps = np.asarray(sol.quasienergies)
    phase = np.exp(-1j * np.multiply.outer(t - t0, eps))  # (..., g)
    return np.einsum("...g,...gs,gr->...sr", phase, u_t, u_0.conj())


def _zone_distance(a: float, b: float, w: float) -> float:
    d = (a - b) % w
    return min(d, w - d)


def truncation_schedule(n_start: int, n_max: int):
    yield n_start
    for n in TRUNCATION_SCHEDULE:
        if n_start < n <= n_max:
            yield n


def converge_truncation(
    ham: FourierHamiltonian,
    tol: float | None = None,
    N_start: int = 8,
    N_max: int = 1000,
) -> FloquetSolution:
    """Grow the truncation until both quasienergies are stable.

    The returned solution is the one at the larger truncation of the first
    successive pair whose quasienergies differ by less than ``tol``. The
    quasienergy error is quadratic in the state error, so the states at the
    smaller truncation can still be off by about sqrt(tol).

    Raises:
        NoTruncationConvergence: no stable pair before ``N_max``.
    """
    w = abs(ham.base_frequency)
    if tol is None:
        scale = max([w] + [float(np.max(np.abs(b))) for b in ham.blocks.values()])
        tol = 1e-10 * scale
    if tol <= 0:
        raise ValueError("tol must be positive")
    N_start = max(N_start, ham.max_harmonic, 1)
    previous = None
    for N in truncation_schedule(N_start, N_max):
        try:
            current = solve(ham, N)
        except DegenerateSelection:
            # too few harmonics to hold a Floquet state yet
            previous = None
            continue
        if previous is not None:
            (a0, a1), (b0, b1) = previous.quasienergies, current.quasienergies
            # ordering may flip between truncations near a degeneracy
            change = min(
                max(_zone_distance(a0, b0, w), _zone_distance(a1, b1, w)),
                max(_zone_distance(a0, b1, w), _zone_distance(a1, b0, w)),
            )
            if change < tol:
                return current
        previous = current
    raise NoTruncationConvergence(f"quasienergies not stable to {tol:.1e} by N={N_max}")
