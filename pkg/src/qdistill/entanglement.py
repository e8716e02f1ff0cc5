"""Spin flip, Wootters spectrum, concurrence, entanglement of formation,
and the two state predicates the classifier relies on.

Convention: the "lambda spectrum" of a state is the list of square roots
of the eigenvalues of ``rho_tilde @ rho``, in decreasing order. They are
computed as the singular values of ``sqrt(rho) @ YY @ conj(sqrt(rho))``
(whose Gram matrix is ``sqrt(rho) rho_tilde sqrt(rho)``), read off the
Hermitian dilation ``[[0, T], [T^H, 0]]``. This keeps zero lambdas at
machine precision instead of the square root of it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .linalg import (SIGMA_YY, as_matrix, eigvalsh, partial_trace, partial_transpose,
                     psd_sqrt)
from .states import DensityMatrix

TOL_BELL = 1e-8
TOL_ENT = 1e-9
# eigenvalues of rho this far below the largest are indistinguishable from roundoff
KERNEL_FLOOR = 1e-14


def _mat(rho) -> np.ndarray:
    if isinstance(rho, DensityMatrix):
        return rho.mat
    return as_matrix(rho, (4, 4))


@dataclass(frozen=True)
class LambdaSpectrum:
    """Four non-negative Wootters values in decreasing order."""

    values: tuple

    def __iter__(self):
        return iter(self.values)

    def __getitem__(self, i):
        return self.values[i]

    @property
    def total(self) -> float:
        return float(sum(self.values))

    def normalized(self) -> np.ndarray:
        """Values divided by their sum; the invariant shape of the spectrum."""
        total = self.total
        if total == 0.0:
            return np.zeros(4)
        return np.array(self.values) / total

    def concurrence(self) -> float:
        l1, l2, l3, l4 = self.values
        return max(0.0, l1 - l2 - l3 - l4)


def spin_flip(rho) -> np.ndarray:
    """``(sy x sy) conj(rho) (sy x sy)``."""
    m = _mat(rho)
    return SIGMA_YY @ np.conj(m) @ SIGMA_YY


def wootters_matrix(rho) -> np.ndarray:
    """Complex symmetric ``sqrt(rho) YY conj(sqrt(rho))``; its singular values are the lambdas."""
    s = psd_sqrt(_mat(rho), rel_floor=KERNEL_FLOOR)
    return s @ SIGMA_YY @ np.conj(s)


def lambda_spectrum(rho) -> LambdaSpectrum:
    """Square roots of the eigenvalues of ``rho_tilde rho``, descending.

    Examples
    --------
    >>> from qdistill.states import kernel_11_state
    >>> [round(x, 12) for x in lambda_spectrum(kernel_11_state(0.5, 0.5, 0.3))]
    [0.8, 0.2, 0.0, 0.0]
    """
    t = wootters_matrix(rho)
    dilation = np.zeros((8, 8), dtype=complex)
    dilation[:4, 4:] = t
    dilation[4:, :4] = np.conj(t.T)
    # eigenvalues come in +/- pairs; the top four are the singular values
    values = np.clip(eigvalsh(dilation)[:4], 0.0, None)
    return LambdaSpectrum(tuple(float(x) for x in sorted(values, reverse=True)))


def concurrence(rho) -> float:
    return lambda_spectrum(rho).concurrence()


def binary_entropy(p: float) -> float:
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def eof(c: float) -> float:
    """Entanglement of formation as a function of the concurrence.

    Uses the binary entropy ``H(p) = -p log2 p - (1-p) log2(1-p)`` at
    ``p = (1 + sqrt(1 - c^2)) / 2``.

    Raises
    ------
    DomainError
        If ``c`` lies outside ``[0, 1]`` by more than 1e-12.
    """
    if not -1e-12 <= c <= 1 + 1e-12:
        raise DomainError(f"concurrence must lie in [0, 1], got {c!r}")
    c = min(max(c, 0.0), 1.0)
    return binary_entropy(0.5 * (1.0 + math.sqrt(1.0 - c * c)))


def entanglement_of_formation(rho) -> float:
    return eof(concurrence(rho))


def marginal_deviation(rho) -> float:
    """Largest entry deviation of either reduced state from ``I/2``."""
    m = _mat(rho)
    half = np.eye(2) / 2
    return float(max(np.max(np.abs(partial_trace(m, "B") - half)),
                     np.max(np.abs(partial_trace(m, "A") - half))))


def is_bell_diagonal(rho, tol: float = TOL_BELL) -> bool:
    """True when both reduced states are maximally mixed within ``tol``.

    Two-qubit states with maximally mixed marginals are exactly the
    Bell-diagonal states up to local unitaries.
    """
    return marginal_deviation(rho) <= tol


def min_partial_transpose_eigenvalue(rho) -> float:
    return float(eigvalsh(partial_transpose(_mat(rho)))[-1])


def is_entangled(rho, tol: float = TOL_ENT) -> bool:
    """Peres-Horodecki test, exact for two qubits."""
    return min_partial_transpose_eigenvalue(rho) < -tol
