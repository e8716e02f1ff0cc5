"""The validated two-qubit density matrix type and a few standard states."""

from __future__ import annotations

import numpy as np

from .errors import InvalidState, NotHermitian, NotPSD
from .linalg import TOL_HERM, TOL_PSD, as_matrix, dagger, eigvalsh, hermiticity_defect

TOL_TRACE = 1e-9


class DensityMatrix:
    """A 4x4 Hermitian, positive semidefinite, unit-trace matrix.

    The constructor validates every invariant and stores an exactly
    Hermitian, read-only copy. Use `from_unnormalized` for matrices that
    still need their trace fixed.
    """

    __slots__ = ("mat",)

    def __init__(self, mat, tol_herm: float = TOL_HERM, tol_psd: float = TOL_PSD):
        try:
            m = as_matrix(mat, (4, 4))
        except ValueError as exc:
            raise InvalidState(str(exc)) from exc
        defect = hermiticity_defect(m)
        if defect > tol_herm:
            raise NotHermitian(f"not Hermitian: max |rho - rho^H| = {defect:.3g}")
        m = 0.5 * (m + dagger(m))
        tr = float(np.trace(m).real)
        if abs(tr - 1.0) > TOL_TRACE:
            raise InvalidState(f"trace must be 1, got {tr:.12g}")
        low = eigvalsh(m)[-1]
        if low < -tol_psd:
            raise NotPSD(f"not positive semidefinite: min eigenvalue {low:.3g}")
        m.setflags(write=False)
        object.__setattr__(self, "mat", m)

    def __setattr__(self, name, value):
        raise AttributeError("DensityMatrix is immutable")

    @classmethod
    def from_unnormalized(cls, mat) -> "DensityMatrix":
        m = as_matrix(mat, (4, 4))
        m = 0.5 * (m + dagger(m))
        tr = np.trace(m).real
        if not tr > 0.0:
            raise InvalidState("matrix has non-positive trace")
        return cls(m / tr)

    @classmethod
    def pure(cls, psi) -> "DensityMatrix":
        psi = as_matrix(psi, (4,))
        norm = np.linalg.norm(psi)
        if norm == 0.0:
            raise InvalidState("zero state vector")
        psi = psi / norm
        return cls(np.outer(psi, psi.conj()))

    def __array__(self, dtype=None, copy=None):
        return self.mat if dtype is None else self.mat.astype(dtype)

    def __repr__(self):
        return f"DensityMatrix({np.array2string(self.mat, precision=6)})"


def ket(label: str) -> np.ndarray:
    """Computational basis vector, e.g. ``ket('01')``."""
    v = np.zeros(4, dtype=complex)
    v[int(label, 2)] = 1.0
    return v


_S = 1 / np.sqrt(2)
BELL_VECTORS = {
    "phi+": np.array([_S, 0, 0, _S], dtype=complex),
    "phi-": np.array([_S, 0, 0, -_S], dtype=complex),
    "psi+": np.array([0, _S, _S, 0], dtype=complex),
    "psi-": np.array([0, _S, -_S, 0], dtype=complex),
}


def bell_state(name: str = "phi+") -> DensityMatrix:
    return DensityMatrix.pure(BELL_VECTORS[name])


def werner_state(p: float) -> DensityMatrix:
    """``p |phi+><phi+| + (1 - p) I/4``."""
    phi = BELL_VECTORS["phi+"]
    return DensityMatrix(p * np.outer(phi, phi.conj()) + (1 - p) * np.eye(4) / 4)


def bell_diagonal_state(weights) -> DensityMatrix:
    """Mixture of phi+, phi-, psi+, psi- with the given weights."""
    m = sum(w * np.outer(v, v.conj()) for w, v in zip(weights, BELL_VECTORS.values()))
    return DensityMatrix(m)


def kernel_11_state(a: float, d: float, b: complex, c: complex = 0.0,
                    e: complex = 0.0) -> DensityMatrix:
    """State whose last row and column vanish, so ``|11>`` is in its kernel.

    The matrix is::

        [[1-a-d, e,  c,  0],
         [e*,    a,  b,  0],
         [c*,    b*, d,  0],
         [0,     0,  0,  0]]

    Raises `NotPSD` when the parameters do not describe a state.
    """
    m = np.array([
        [1 - a - d, e, c, 0],
        [np.conj(e), a, b, 0],
        [np.conj(c), np.conj(b), d, 0],
        [0, 0, 0, 0],
    ], dtype=complex)
    return DensityMatrix(m)
