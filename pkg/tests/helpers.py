"""Independent reference computations and random inputs shared by the tests."""

import numpy as np

YY = np.array([[0, 0, 0, -1], [0, 0, 1, 0], [0, 1, 0, 0], [-1, 0, 0, 0]], dtype=complex)


def textbook_lambdas(rho):
    """Square roots of the eigenvalues of rho @ spin-flipped rho, from numpy's general solver."""
    rho = np.asarray(rho, dtype=complex)
    flipped = YY @ rho.conj() @ YY
    ev = np.linalg.eigvals(rho @ flipped).real
    return np.sort(np.sqrt(np.clip(ev, 0, None)))[::-1]


def textbook_concurrence(rho):
    lam = textbook_lambdas(rho)
    return max(0.0, lam[0] - lam[1:].sum())


def pure_concurrence(psi):
    psi = np.asarray(psi, dtype=complex)
    psi = psi / np.linalg.norm(psi)
    return 2 * abs(np.linalg.det(psi.reshape(2, 2)))


def ginibre(rng, shape):
    return rng.normal(size=shape) + 1j * rng.normal(size=shape)


def random_vector(rng, dim=4):
    v = ginibre(rng, dim)
    return v / np.linalg.norm(v)


def random_density(rng, rank=4):
    g = ginibre(rng, (4, rank))
    m = g @ g.conj().T
    return m / np.trace(m).real


def random_unitary(rng, dim=2):
    q, r = np.linalg.qr(ginibre(rng, (dim, dim)))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def filtered(rho, a, b):
    f = np.kron(a, b)
    out = f @ np.asarray(rho) @ f.conj().T
    return out / np.trace(out).real


def marginals(rho):
    r = np.asarray(rho).reshape(2, 2, 2, 2)
    return np.einsum("ikjk->ij", r), np.einsum("kikj->ij", r)
