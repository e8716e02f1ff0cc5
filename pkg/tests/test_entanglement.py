import doctest
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import qdistill.entanglement as ent
from qdistill.entanglement import (binary_entropy, concurrence, eof, is_bell_diagonal,
                                   is_entangled, lambda_spectrum, spin_flip)
from qdistill.errors import DomainError
from qdistill.states import DensityMatrix, bell_state, ket, kernel_11_state, werner_state

from helpers import (filtered, ginibre, pure_concurrence, random_density, random_unitary,
                     random_vector, textbook_concurrence, textbook_lambdas)


def test_doctests():
    assert doctest.testmod(ent).failed == 0


def test_spin_flip_examples():
    assert np.allclose(spin_flip(np.eye(4) / 4), np.eye(4) / 4)
    phi = bell_state("phi+").mat
    assert np.allclose(spin_flip(phi), phi)
    p00 = np.outer(ket("00"), ket("00"))
    assert np.allclose(spin_flip(p00), np.outer(ket("11"), ket("11")))


def test_spin_flip_involution():
    rng = np.random.default_rng(0)
    for _ in range(100):
        rho = random_density(rng)
        assert np.allclose(spin_flip(spin_flip(rho)), rho, atol=1e-12)


def test_lambda_spectrum_kernel_family():
    lam = lambda_spectrum(kernel_11_state(0.5, 0.5, 0.3))
    assert np.allclose(lam.values, [0.8, 0.2, 0, 0], atol=1e-14)
    assert math.isclose(concurrence(kernel_11_state(0.5, 0.5, 0.3)), 0.6, abs_tol=1e-14)
    lam = lambda_spectrum(kernel_11_state(0.8, 0.2, 0.3))
    assert np.allclose(lam.values, [0.7, 0.1, 0, 0], atol=1e-14)


def test_product_state_has_zero_spectrum():
    rng = np.random.default_rng(1)
    for _ in range(20):
        psi = np.kron(random_vector(rng, 2), random_vector(rng, 2))
        assert np.allclose(lambda_spectrum(DensityMatrix.pure(psi)).values, 0, atol=1e-14)


def test_lambda_spectrum_matches_textbook_route():
    rng = np.random.default_rng(2)
    for i in range(300):
        rho = random_density(rng, rank=1 + i % 4)
        assert np.allclose(lambda_spectrum(rho).values, textbook_lambdas(rho), atol=1e-7)


def test_lambda_spectrum_local_unitary_invariance():
    rng = np.random.default_rng(3)
    for _ in range(200):
        rho = random_density(rng)
        u = np.kron(random_unitary(rng), random_unitary(rng))
        turned = u @ rho @ u.conj().T
        assert np.allclose(lambda_spectrum(rho).values, lambda_spectrum(turned).values,
                           atol=1e-10)


def test_concurrence_examples():
    assert math.isclose(concurrence(bell_state("psi-")), 1.0, abs_tol=1e-14)
    assert concurrence(np.eye(4) / 4) == 0.0
    for p in np.linspace(0, 1, 11):
        assert math.isclose(concurrence(werner_state(p)), max(0.0, (3 * p - 1) / 2),
                            abs_tol=1e-12)


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_pure_state_concurrence_is_twice_determinant(seed):
    psi = random_vector(np.random.default_rng(seed))
    assert math.isclose(concurrence(DensityMatrix.pure(psi)), pure_concurrence(psi),
                        abs_tol=1e-9)


def test_ratio_invariance_under_filters():
    rng = np.random.default_rng(4)
    for _ in range(200):
        rho = random_density(rng)
        a, b = ginibre(rng, (2, 2)), ginibre(rng, (2, 2))
        before = lambda_spectrum(rho).normalized()
        after = lambda_spectrum(filtered(rho, a, b)).normalized()
        assert np.allclose(before, after, atol=1e-8)


def test_eof_values():
    assert eof(0.0) == 0.0
    assert math.isclose(eof(1.0), 1.0)
    assert math.isclose(eof(0.6), binary_entropy(0.9))
    assert math.isclose(eof(0.6), 0.4689955935892812, rel_tol=1e-12)
    cs = np.linspace(0, 1, 201)
    assert np.all(np.diff([eof(c) for c in cs]) > 0)
    with pytest.raises(DomainError):
        eof(1.1)
    with pytest.raises(DomainError):
        eof(-0.01)
    assert eof(1 + 1e-13) == 1.0


def test_is_bell_diagonal():
    for p in np.linspace(0, 1, 6):
        assert is_bell_diagonal(werner_state(p))
    assert not is_bell_diagonal(np.outer(ket("00"), ket("00")))
    f = 0.2 + 0.1j
    sigma = np.zeros((4, 4), dtype=complex)
    sigma[1, 1] = sigma[2, 2] = 0.5
    sigma[1, 2], sigma[2, 1] = f, np.conj(f)
    assert is_bell_diagonal(sigma)


def test_is_entangled_examples():
    assert not is_entangled(np.eye(4) / 4)
    assert is_entangled(bell_state())
    assert is_entangled(kernel_11_state(0.5, 0.5, 0.3))


def test_entangled_iff_positive_concurrence():
    rng = np.random.default_rng(5)
    for i in range(2000):
        rho = random_density(rng, rank=1 + i % 4)
        c = textbook_concurrence(rho)
        if 1e-6 < c or c == 0.0:
            assert is_entangled(rho) == (c > 0)
