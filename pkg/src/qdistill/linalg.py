"""Small dense complex linear algebra for one- and two-qubit operators.

Matrices are plain ``numpy`` arrays of dtype ``complex128``. Two-qubit
operators use the fixed tensor basis ``|00>, |01>, |10>, |11>``: index
``2*i + k`` belongs to Alice's level ``i`` and Bob's level ``k``.

The Hermitian eigensolver is a cyclic complex Jacobi iteration written
against Python scalars, which is faster than numpy for 4x4 and 8x8
problems and gives eigenvalues with absolute accuracy close to machine
precision.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import NotHermitian, NotPSD

TOL_HERM = 1e-9
TOL_PSD = 1e-9
TOL_RANK = 1e-9
TOL_EIG = 1e-12
MAX_SWEEPS = 100

BASIS_LABELS = ("00", "01", "10", "11")

SIGMA_Y = np.array([[0, -1j], [1j, 0]])
# sigma_y (x) sigma_y is real: antidiagonal (-1, 1, 1, -1)
SIGMA_YY = np.real(np.kron(SIGMA_Y, SIGMA_Y)).astype(complex)


def as_matrix(m, shape=None) -> np.ndarray:
    arr = np.array(m, dtype=complex)
    if shape is not None and arr.shape != shape:
        raise ValueError(f"expected shape {shape}, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("matrix contains NaN or Inf")
    return arr


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(m, -1, -2))


def kron(a, b) -> np.ndarray:
    """Kronecker product ``a (x) b`` of two 2x2 matrices.

    Entry ``[2i+k, 2j+l]`` equals ``a[i, j] * b[k, l]``.
    """
    return np.kron(as_matrix(a, (2, 2)), as_matrix(b, (2, 2)))


def hermiticity_defect(h: np.ndarray) -> float:
    return float(np.max(np.abs(h - dagger(h)))) if h.size else 0.0


def _jacobi(h: np.ndarray, tol: float, max_sweeps: int):
    n = h.shape[0]
    a = [[complex(h[i, j]) for j in range(n)] for i in range(n)]
    # symmetrize in place so roundoff asymmetry does not leak into the result
    for i in range(n):
        a[i][i] = complex(a[i][i].real, 0.0)
        for j in range(i + 1, n):
            z = 0.5 * (a[i][j] + a[j][i].conjugate())
            a[i][j] = z
            a[j][i] = z.conjugate()
    v = [[1.0 + 0j if i == j else 0j for j in range(n)] for i in range(n)]
    pairs = [(p, q) for p in range(n) for q in range(p + 1, n)]

    converged = False
    for _ in range(max_sweeps):
        off = 0.0
        diag = 0.0
        for i in range(n):
            diag += a[i][i].real ** 2
            for j in range(i + 1, n):
                z = a[i][j]
                off += z.real * z.real + z.imag * z.imag
        if off == 0.0 or converged:
            break
        # one polishing sweep after the threshold is met; convergence is quadratic
        converged = off <= tol * tol * (diag + 2.0 * off)
        for p, q in pairs:
            apq = a[p][q]
            g = abs(apq)
            if g < 1e-300:
                continue
            ph = apq / g
            phc = ph.conjugate()
            app = a[p][p].real
            aqq = a[q][q].real
            tau = (aqq - app) / (2.0 * g)
            t = 1.0 / (abs(tau) + math.sqrt(1.0 + tau * tau))
            if tau < 0.0:
                t = -t
            c = 1.0 / math.sqrt(1.0 + t * t)
            s = t * c
            # A <- U^H A U with U[p,p]=c, U[p,q]=s, U[q,p]=-s e^{-i phi}, U[q,q]=c e^{-i phi}
            sph = s * phc
            cph = c * phc
            for k in range(n):
                row = a[k]
                akp = row[p]
                akq = row[q]
                row[p] = c * akp - sph * akq
                row[q] = s * akp + cph * akq
            rp = a[p]
            rq = a[q]
            sphc = s * ph
            cphc = c * ph
            for k in range(n):
                bpk = rp[k]
                bqk = rq[k]
                rp[k] = c * bpk - sphc * bqk
                rq[k] = s * bpk + cphc * bqk
            rp[q] = 0j
            rq[p] = 0j
            rp[p] = complex(app - t * g, 0.0)
            rq[q] = complex(aqq + t * g, 0.0)
            for k in range(n):
                row = v[k]
                vkp = row[p]
                vkq = row[q]
                row[p] = c * vkp - sph * vkq
                row[q] = s * vkp + cph * vkq
    values = np.array([a[i][i].real for i in range(n)])
    vectors = np.array(v, dtype=complex)
    return values, vectors


def herm_eig(h, tol_herm: float = TOL_HERM, tol_eig: float = TOL_EIG,
             max_sweeps: int = MAX_SWEEPS):
    """Eigendecomposition of a small Hermitian matrix by cyclic Jacobi sweeps.

    Parameters
    ----------
    h : array_like
        Square Hermitian matrix (intended for 2x2, 4x4 and 8x8).
    tol_herm : float
        Largest tolerated entry of ``h - h^H``.
    tol_eig : float
        Sweeps stop once the off-diagonal Frobenius norm is below
        ``tol_eig`` times the full Frobenius norm.
    max_sweeps : int
        Hard limit on the number of sweeps.

    Returns
    -------
    values : ndarray
        Real eigenvalues in descending order.
    vectors : ndarray
        Unitary matrix whose columns are the matching eigenvectors.

    Raises
    ------
    NotHermitian
        If ``h`` deviates from its adjoint by more than ``tol_herm``.
    """
    h = as_matrix(h)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {h.shape}")
    defect = hermiticity_defect(h)
    if defect > tol_herm:
        raise NotHermitian(f"matrix is not Hermitian (max |h - h^H| = {defect:.3g})")
    values, vectors = _jacobi(h, tol_eig, max_sweeps)
    order = np.argsort(-values, kind="stable")
    return values[order], vectors[:, order]


def eigvalsh(h, **kwargs) -> np.ndarray:
    return herm_eig(h, **kwargs)[0]


def psd_sqrt(p, tol_psd: float = TOL_PSD, rel_floor: float = 0.0) -> np.ndarray:
    """Principal square root of a positive semidefinite Hermitian matrix.

    Eigenvalues in ``[-tol_psd, 0)`` are clamped to zero; anything more
    negative raises `NotPSD`. Eigenvalues at most ``rel_floor`` times the
    largest are also set to zero, which keeps roundoff in a kernel from
    turning into square-root sized noise.
    """
    values, vectors = herm_eig(p)
    if values[-1] < -tol_psd:
        raise NotPSD(f"matrix is not positive semidefinite (min eigenvalue {values[-1]:.3g})")
    values = np.where(values <= rel_floor * max(values[0], 0.0), 0.0, values)
    roots = np.sqrt(np.clip(values, 0.0, None))
    return (vectors * roots) @ dagger(vectors)


def partial_trace(rho, subsystem: str) -> np.ndarray:
    """Trace out ``subsystem`` ('A' or 'B') of a two-qubit operator."""
    r = as_matrix(rho, (4, 4)).reshape(2, 2, 2, 2)
    if subsystem == "B":
        return np.einsum("ikjk->ij", r)
    if subsystem == "A":
        return np.einsum("kikj->ij", r)
    raise ValueError(f"subsystem must be 'A' or 'B', got {subsystem!r}")


def partial_transpose(rho) -> np.ndarray:
    """Transpose on Bob's qubit in the fixed basis."""
    r = as_matrix(rho, (4, 4)).reshape(2, 2, 2, 2)
    return r.transpose(0, 3, 2, 1).reshape(4, 4)


def spectral_split(rho, tol_rank: float = TOL_RANK, tol_psd: float = TOL_PSD):
    """Eigen-split of a PSD matrix into support and kernel bases.

    Returns ``(rank, support, kernel, values)`` where an eigenvalue counts
    towards the rank when it exceeds ``tol_rank`` times the largest one.
    """
    values, vectors = herm_eig(rho)
    if values[-1] < -tol_psd * max(1.0, abs(values[0])):
        raise NotPSD(f"matrix is not positive semidefinite (min eigenvalue {values[-1]:.3g})")
    top = values[0]
    rank = int(np.sum(values > tol_rank * top)) if top > 0.0 else 0
    columns = [vectors[:, i] for i in range(len(values))]
    return rank, columns[:rank], columns[rank:], values


def rank_and_kernel(rho, tol_rank: float = TOL_RANK, tol_psd: float = TOL_PSD):
    """Numerical rank and an orthonormal kernel basis of a PSD matrix.

    An eigenvalue counts towards the rank when it exceeds ``tol_rank``
    times the largest eigenvalue. The kernel basis consists of the
    eigenvectors of the remaining eigenvalues, so ``rank + len(kernel) == 4``.
    """
    rank, _, kernel, _ = spectral_split(rho, tol_rank, tol_psd)
    return rank, kernel


def singular_values2(m: np.ndarray) -> tuple[float, float]:
    """Singular values (descending) of a 2x2 matrix in closed form.

    The larger one comes from the top eigenvalue of ``m^H m``, whose
    discriminant is a sum of squares and so does not cancel.
    """
    m = np.asarray(m, dtype=complex)
    h = dagger(m) @ m
    h00, h11, h01 = h[0, 0].real, h[1, 1].real, h[0, 1]
    top = 0.5 * (h00 + h11 + math.hypot(h00 - h11, 2 * abs(h01)))
    s1 = math.sqrt(max(top, 0.0))
    det = abs(m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0])
    s2 = float(min(det / s1, s1)) if s1 > 0.0 else 0.0
    return s1, s2


def op_norm2(m: np.ndarray) -> float:
    return singular_values2(m)[0]


def inv_sqrt_psd2(m: np.ndarray) -> np.ndarray:
    """Inverse square root of a positive definite 2x2 matrix."""
    values, vectors = herm_eig(m)
    if values[-1] <= 0.0:
        raise NotPSD("2x2 matrix is not positive definite")
    return (vectors / np.sqrt(values)) @ dagger(vectors)


def canonical_phase(v: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Rescale ``v`` to unit norm with its first non-negligible amplitude real positive."""
    v = np.asarray(v, dtype=complex)
    norm = np.linalg.norm(v)
    if norm == 0.0:
        return v
    v = v / norm
    for z in v:
        if abs(z) > tol:
            return v * (abs(z) / z)
    return v


def reshape2(psi: np.ndarray) -> np.ndarray:
    """2x2 coefficient matrix ``M[i, j] = <ij|psi>``."""
    return np.asarray(psi, dtype=complex).reshape(2, 2)


def det2(m: np.ndarray) -> complex:
    return m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
