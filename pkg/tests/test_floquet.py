import numpy as np
import pytest
from scipy.integrate import solve_ivp
from scipy.linalg import eigh as scipy_eigh

from chrw import floquet
from chrw.errors import NoTruncationConvergence, NotHermitian, TruncationTooSmall
from chrw.floquet import (
    FloquetSolution, FourierHamiltonian, build_floquet_matrix, converge_truncation, diagonalize,
    evolution_operator, fold_to_zone, select_brillouin, solve,
)
from chrw.model import SM, SP, SX, SZ, DriveParams, unitarity_defect
from chrw.solvers.rotating import chrw_fourier_hamiltonian
from chrw.transform import solve_xi


def rabi(delta=0.3, amp=0.8, omega=0.5):
    return FourierHamiltonian(omega, {0: 0.5 * delta * SZ + 0.25 * amp * SX})


def chrw_ham(params):
    return chrw_fourier_hamiltonian(params, solve_xi(params))


def brute_force_matrix(params, N):
    """Index-by-index assembly of the Sambe matrix from the renormalized parameters."""
    c = solve_xi(params)
    size = 2 * (2 * N + 1)
    m = np.zeros((size, size), dtype=complex)
    ph = np.exp(1j * c.delta_phi21)
    for i, n in enumerate(range(-N, N + 1)):
        for s in range(2):
            for s2 in range(2):
                # static part 1/2 (delta_t sz + At1/2 sx) plus n Delta on the diagonal
                val = 0.5 * (c.delta_tilde1 * SZ[s, s2] + 0.5 * c.A_tilde1 * SX[s, s2])
                if s == s2:
                    val += n * c.Delta
                m[2 * i + s, 2 * i + s2] = val
                if i + 1 < 2 * N + 1:
                    # |n+1><n| carries 1/4 (At2 s- - 2 A0 sz) e^{i dphi}
                    low = 0.25 * (c.A_tilde2 * SM[s, s2] - 2 * c.A_tilde0 * SZ[s, s2]) * ph
                    m[2 * (i + 1) + s, 2 * i + s2] = low
                    up = 0.25 * (c.A_tilde2 * SP[s, s2] - 2 * c.A_tilde0 * SZ[s, s2]) / ph
                    m[2 * i + s, 2 * (i + 1) + s2] = up
    return m


def test_dimension():
    assert build_floquet_matrix(chrw_ham(DriveParams(1.0, 0.5, 0.5)), 35).shape == (142, 142)


@pytest.mark.parametrize("phases", [(0.0, 0.0), (0.4, 1.3)])
def test_matrix_matches_index_loop(phases):
    p = DriveParams(1.0, 0.5, 0.5, 1.0, 1.2, *phases)
    m = build_floquet_matrix(chrw_ham(p), 35)
    assert np.max(np.abs(m - brute_force_matrix(p, 35))) < 1e-15
    assert np.max(np.abs(m - m.conj().T)) == 0


def test_hermitian_pairing_required():
    with pytest.raises(NotHermitian):
        FourierHamiltonian(0.2, {0: SZ, 1: SM})
    with pytest.raises(TruncationTooSmall):
        build_floquet_matrix(FourierHamiltonian(0.2, {0: SZ, 2: SM, -2: SP}), 1)


def test_rabi_block_diagonal_spectrum():
    ham = rabi()
    vals, _ = diagonalize(build_floquet_matrix(ham, 3))
    e = 0.5 * np.hypot(0.3, 0.4)
    expected = np.sort(np.concatenate([[e + 0.5 * n, -e + 0.5 * n] for n in range(-3, 4)]))
    assert np.allclose(vals, expected, atol=1e-14)
    sol = solve(ham, 3)
    folded, _ = fold_to_zone([e, -e], 0.5)
    assert sorted(sol.quasienergies) == pytest.approx(sorted(folded), abs=1e-14)


def test_diagonalize_contract():
    vals, _ = diagonalize(np.eye(4))
    assert np.all(vals == 1)
    vals, _ = diagonalize(SX)
    assert np.allclose(vals, [-1, 1])
    rng = np.random.default_rng(7)
    a = rng.normal(size=(10, 10)) + 1j * rng.normal(size=(10, 10))
    h = a + a.conj().T
    vals, vecs = diagonalize(h)
    assert np.allclose(vals, scipy_eigh(h, eigvals_only=True), atol=1e-10)
    assert np.max(np.abs(h @ vecs - vecs * vals)) < 1e-10 * np.linalg.norm(h)
    assert np.max(np.abs(vecs.conj().T @ vecs - np.eye(10))) < 1e-10
    with pytest.raises(NotHermitian):
        diagonalize(a)


def test_zone_folding_boundary():
    folded, k = fold_to_zone([0.25, -0.25, 0.26, 1.0], 0.5)
    assert folded == pytest.approx([0.25, 0.25, -0.24, 0.0])
    assert list(k) == [0, -1, 1, 2]


def test_solution_contract(fig2a):
    sol = solve(chrw_ham(fig2a), 35)
    w = 0.1
    assert all(-w < e <= w for e in sol.quasienergies)
    assert sol.quasienergies[0] >= sol.quasienergies[1]
    c = sol.coefficients
    assert np.sum(np.abs(c[0]) ** 2) == pytest.approx(1, abs=1e-12)
    assert abs(np.vdot(c[0], c[1])) < 1e-10


def test_quasienergies_stable_35_to_45(fig2a):
    ham = chrw_ham(fig2a)
    a, b = solve(ham, 35).quasienergies, solve(ham, 45).quasienergies
    assert np.allclose(a, b, atol=1e-10)


def test_quasienergies_phase_independent(fig2a):
    ref = solve(chrw_ham(fig2a), 30).quasienergies
    for dphi in (np.pi / 3, np.pi):
        q = solve(chrw_ham(fig2a.with_(phi2=dphi)), 30).quasienergies
        assert np.allclose(q, ref, atol=1e-10)


def test_evolution_identity_and_composition(fig2a):
    ham = chrw_ham(fig2a)
    sol = solve(ham, 30)
    period = 2 * np.pi / abs(ham.base_frequency)
    assert np.max(np.abs(evolution_operator(sol, 0.3, 0.3) - np.eye(2))) < 1e-8
    u1 = evolution_operator(sol, period, 0.0)
    u2 = evolution_operator(sol, 2 * period, 0.0)
    assert np.max(np.abs(u2 - u1 @ u1)) < 1e-9
    assert unitarity_defect(evolution_operator(sol, np.linspace(0, 50, 31), 1.0)) < 1e-8


def test_evolution_against_direct_integration(fig2a):
    ham = chrw_ham(fig2a)
    sol = solve(ham, 30)
    period = 2 * np.pi / abs(ham.base_frequency)
    t_end = 3 * period

    def rhs(t, y):
        return (-1j * ham.at(t) @ y.reshape(2, 2)).ravel()

    out = solve_ivp(rhs, (0.0, t_end), np.eye(2, dtype=complex).ravel(), method="DOP853",
                    rtol=1e-12, atol=1e-12)
    exact = out.y[:, -1].reshape(2, 2)
    assert np.max(np.abs(evolution_operator(sol, t_end, 0.0) - exact)) < 1e-6


def test_folding_relabel_leaves_evolution_unchanged(fig2a):
    sol = solve(chrw_ham(fig2a), 30)
    w = sol.base_frequency
    shifted = FloquetSolution(
        quasienergies=(sol.quasienergies[0] + 2 * w, sol.quasienergies[1]),
        coefficients=sol.coefficients,
        truncation=sol.truncation,
        base_frequency=w,
        offsets=(sol.offsets[0] - 2, sol.offsets[1]),
    )
    t = np.linspace(0, 80, 17)
    assert np.max(np.abs(evolution_operator(sol, t, 0.4) - evolution_operator(shifted, t, 0.4))) < 1e-9


def test_selection_with_large_detuning():
    # detuning much larger than the base frequency: the zone copy sits far off-center
    p = DriveParams.from_ratio(0.2, 0.5, 1.0, 0.2)
    ham = chrw_ham(p)
    a = solve(ham, 18).quasienergies
    b = solve(ham, 40).quasienergies
    assert np.allclose(a, b, atol=1e-10)


def test_convergence_policy(fig2a):
    sol = converge_truncation(chrw_ham(fig2a), tol=1e-10)
    assert sol.truncation <= 30
    zero = converge_truncation(chrw_ham(DriveParams(1.3, 0.0, 0.0)), tol=1e-10)
    assert zero.truncation == 12
    with pytest.raises(NoTruncationConvergence):
        converge_truncation(chrw_ham(DriveParams.from_ratio(1.0, 0.2, 1.0, 0.005)), tol=1e-10, N_max=27)
    with pytest.raises(ValueError):
        converge_truncation(rabi(), tol=0.0)


def test_slow_beat_truncation(fig5):
    """The slow-beat states spread over about +-40 harmonics; N = 60 and 90 agree."""
    sol = converge_truncation(chrw_ham(fig5), tol=1e-10)
    assert sol.truncation == 90
    assert sol.dimension == 362
    assert floquet.central_weight(np.eye(4), 1).shape == (4,)
