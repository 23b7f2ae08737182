import math

import numpy as np
import pytest

from chrw.errors import EqualFrequencies, NegativeAmplitude, NonFiniteArgument, NonPositiveFrequency
from chrw.model import (
    S0, SM, SP, SX, SY, SZ, DriveParams, PauliAlgebra, is_hermitian, lab_hamiltonian,
    unitarity_defect, validate,
)


def test_valid_parameter_set():
    p = DriveParams(1.0, 0.5, 0.5, 1.0, 1.2)
    assert validate(p) is p


def test_equal_frequencies():
    with pytest.raises(EqualFrequencies):
        validate(DriveParams(1.0, 0.5, 0.5, 1.0, 1.0))


def test_negative_amplitude():
    with pytest.raises(NegativeAmplitude):
        validate(DriveParams(1.0, -0.1, 0.5))


def test_nonpositive_frequency():
    with pytest.raises(NonPositiveFrequency):
        validate(DriveParams(1.0, 0.1, 0.1, 0.0, 1.2))


def test_nonfinite():
    with pytest.raises(NonFiniteArgument):
        validate(DriveParams(math.nan, 0.1, 0.1))


def test_ratio_is_derived():
    p = DriveParams.from_ratio(1.0, 0.5, 0.5, 0.2)
    assert p.A2 == 0.25
    assert p.r == 0.5
    assert p.delta == pytest.approx(0.2)
    assert DriveParams(1.0, 0.0, 0.3).r is None


def test_normalized_and_swapped():
    p = DriveParams(2.0, 1.0, 0.4, 2.0, 2.4, 0.1, 0.2)
    n = p.normalized()
    assert (n.omega0, n.A1, n.A2, n.omega1, n.omega2) == pytest.approx((1.0, 0.5, 0.2, 1.0, 1.2))
    s = p.swapped()
    assert (s.A1, s.omega1, s.phi1) == (0.4, 2.4, 0.2)
    assert s.delta == -p.delta


def test_pauli_relations():
    assert np.array_equal(SP, (SX + 1j * SY) / 2)
    assert np.array_equal(SM, (SX - 1j * SY) / 2)
    for s in (SX, SY, SZ):
        assert np.allclose(s @ s, S0, atol=0)
    assert np.max(np.abs(SX @ SY - SY @ SX - 2j * SZ)) < 1e-15
    with pytest.raises(ValueError):
        PauliAlgebra.sigma_x[0, 0] = 1


def test_lab_hamiltonian_hermitian_and_unitary_defect():
    p = DriveParams(1.3, 0.5, 0.4, phi1=0.3)
    h = lab_hamiltonian(p, 2.7)
    assert is_hermitian(h)
    w, v = np.linalg.eigh(h)
    u = v @ np.diag(np.exp(-1j * w)) @ v.conj().T
    assert unitarity_defect(u) < 1e-14
    assert unitarity_defect(np.stack([u, u])) < 1e-14
    expected = 0.5 * 1.3 * SZ + 0.5 * (0.5 * math.cos(2.7 + 0.3) + 0.4 * math.cos(1.2 * 2.7)) * SX
    assert np.allclose(h, expected, atol=1e-15)
