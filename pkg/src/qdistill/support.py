"""Product vectors in subspaces of C^2 (x) C^2 and the face taxonomy.

A vector ``psi`` factorises exactly when its 2x2 coefficient matrix
``M[i, j] = <ij|psi>`` is singular. On a plane ``span{v, w}`` the function
``q(alpha, beta) = det(alpha M_v + beta M_w)`` is a binary quadratic form,
so a plane holds either a whole plane of product vectors (``q == 0``),
exactly two independent ones (two distinct projective roots) or exactly
one (a double root). Over the complex numbers there is always at least
one.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import DependentVectors, InternalInconsistency, ZeroVector
from .linalg import TOL_RANK, canonical_phase, det2, herm_eig, reshape2, spectral_split
from .states import DensityMatrix

TOL_PRODUCT = 1e-9


@dataclass(frozen=True)
class ProductDecomposition:
    left: np.ndarray
    right: np.ndarray

    def vector(self) -> np.ndarray:
        return np.kron(self.left, self.right)


def is_product(psi, tol: float = TOL_PRODUCT):
    """Return the factors of ``psi`` if it is a product vector, else ``None``.

    ``psi`` factorises when ``|det M| <= tol * |psi|^2``. The factors are
    unit vectors from the dominant singular pair of ``M`` with canonical
    phases, so ``kron(left, right)`` equals ``psi`` up to norm and phase.
    """
    psi = np.asarray(psi, dtype=complex)
    norm2 = float(np.vdot(psi, psi).real)
    if norm2 == 0.0:
        raise ZeroVector("cannot test the zero vector")
    m = reshape2(psi)
    if abs(det2(m)) > tol * norm2:
        return None
    _, vecs = herm_eig(m @ m.conj().T)
    left = canonical_phase(vecs[:, 0])
    right = canonical_phase(left.conj() @ m)
    return ProductDecomposition(left, right)


class PlaneTag(str, Enum):
    WHOLE_PLANE = "WholePlaneFactorising"
    EXACTLY_TWO = "ExactlyTwo"
    EXACTLY_ONE = "ExactlyOne"


@dataclass(frozen=True)
class PlaneProductStructure:
    tag: PlaneTag
    witnesses: tuple = ()


def _orthonormal_pair(v, w, tol):
    v = np.asarray(v, dtype=complex)
    w = np.asarray(w, dtype=complex)
    nv = np.linalg.norm(v)
    nw = np.linalg.norm(w)
    if nv == 0.0 or nw == 0.0:
        raise DependentVectors("spanning vector is zero")
    v = v / nv
    w = w / nw - np.vdot(v, w / nw) * v
    nw = np.linalg.norm(w)
    if nw <= tol:
        raise DependentVectors("spanning vectors are linearly dependent")
    return v, w / nw


def plane_form_coefficients(v, w):
    """Coefficients ``(k2, k1, k0)`` of ``det(alpha M_v + beta M_w)``
    as ``k2 alpha^2 + k1 alpha beta + k0 beta^2``."""
    mv, mw = reshape2(v), reshape2(w)
    k2 = det2(mv)
    k0 = det2(mw)
    k1 = mv[0, 0] * mw[1, 1] + mw[0, 0] * mv[1, 1] - mv[0, 1] * mw[1, 0] - mw[0, 1] * mv[1, 0]
    return k2, k1, k0


def product_vectors_in_plane(v, w, tol: float = TOL_PRODUCT) -> PlaneProductStructure:
    """Count and return the product vectors in ``span{v, w}``.

    Decisions are scale free: the pair is orthonormalized first, the
    form counts as identically zero when all coefficients are at most
    ``tol``, and a double root is declared when the discriminant is at
    most ``tol`` times the squared largest coefficient.
    """
    v, w = _orthonormal_pair(v, w, tol)
    k2, k1, k0 = plane_form_coefficients(v, w)
    scale = max(abs(k2), abs(k1), abs(k0))
    if scale <= tol:
        return PlaneProductStructure(PlaneTag.WHOLE_PLANE)
    disc = k1 * k1 - 4 * k2 * k0

    if abs(disc) <= tol * scale * scale:
        # double root, in homogeneous coordinates (alpha, beta)
        root = (-k1, 2 * k2) if abs(k2) >= abs(k0) else (2 * k0, -k1)
        return PlaneProductStructure(PlaneTag.EXACTLY_ONE, (_root_vector(root, v, w),))

    sq = cmath.sqrt(disc)
    # pick the sign avoiding cancellation; q cannot vanish because disc != 0
    q = -0.5 * (k1 + sq) if abs(k1 + sq) >= abs(k1 - sq) else -0.5 * (k1 - sq)
    roots = [(q, k2), (k0, q)]
    witnesses = sorted((_root_vector(r, v, w) for r in roots), key=_ordering_key)
    return PlaneProductStructure(PlaneTag.EXACTLY_TWO, tuple(witnesses))


def _root_vector(root, v, w) -> np.ndarray:
    alpha, beta = root
    return canonical_phase(alpha * v + beta * w)


def _ordering_key(vec):
    # deterministic order: by position of first non-negligible amplitude, then its size
    first = next(i for i, z in enumerate(vec) if abs(z) > 1e-12)
    return (first, -abs(vec[first]))


class FaceTag(str, Enum):
    A = "A"
    B_KERNEL_FACTORISING = "B-kernel-factorising"
    B_KERNEL_ENTANGLED = "B-kernel-entangled"
    C_WHOLE_PLANE = "C-a"
    C_TWO = "C-b"
    C_ONE = "C-c"
    D_PRODUCT = "D-product"
    D_ENTANGLED = "D-entangled"


@dataclass(frozen=True)
class FaceClass:
    """Dimension of a state's support and its product-vector structure.

    ``support`` and ``kernel`` are orthonormal bases; ``witnesses`` lists
    the product vectors that decided the subcase (the kernel direction
    for dimension 3, the plane's product vectors for dimension 2).
    """

    dim: int
    subcase: FaceTag
    witnesses: tuple = ()
    support: tuple = field(default=(), repr=False)
    kernel: tuple = field(default=(), repr=False)


def support_basis(rho, tol_rank: float = TOL_RANK):
    m = rho.mat if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)
    rank, support, kernel, _ = spectral_split(m, tol_rank)
    return rank, support, kernel


def classify_face(rho, tol: float = TOL_PRODUCT, tol_rank: float = TOL_RANK) -> FaceClass:
    """Place the support of ``rho`` in the four-way face taxonomy."""
    rank, support, kernel = support_basis(rho, tol_rank)
    sup, ker = tuple(support), tuple(kernel)
    if rank == 4:
        return FaceClass(4, FaceTag.A, (), sup, ker)
    if rank == 3:
        dec = is_product(kernel[0], tol)
        if dec is not None:
            return FaceClass(3, FaceTag.B_KERNEL_FACTORISING, (dec.vector(),), sup, ker)
        return FaceClass(3, FaceTag.B_KERNEL_ENTANGLED, (), sup, ker)
    if rank == 2:
        plane = product_vectors_in_plane(support[0], support[1], tol)
        tag = {PlaneTag.WHOLE_PLANE: FaceTag.C_WHOLE_PLANE,
               PlaneTag.EXACTLY_TWO: FaceTag.C_TWO,
               PlaneTag.EXACTLY_ONE: FaceTag.C_ONE}[plane.tag]
        return FaceClass(2, tag, plane.witnesses, sup, ker)
    if rank == 1:
        dec = is_product(support[0], tol)
        if dec is not None:
            return FaceClass(1, FaceTag.D_PRODUCT, (dec.vector(),), sup, ker)
        return FaceClass(1, FaceTag.D_ENTANGLED, (), sup, ker)
    raise InternalInconsistency("state has rank 0")


def kernel_product_vector(face: FaceClass, tol: float = TOL_PRODUCT):
    """A product vector in the kernel, or ``None`` when there is none.

    Rank 3 checks the single kernel direction. For smaller ranks the
    plane spanned by the first two kernel vectors is searched; it always
    contains one, and the unique one is preferred when the plane has
    exactly one.
    """
    kernel = face.kernel
    if len(kernel) == 0:
        return None
    if len(kernel) == 1:
        dec = is_product(kernel[0], tol)
        return None if dec is None else dec.vector()
    plane = product_vectors_in_plane(kernel[0], kernel[1], tol)
    if plane.tag is PlaneTag.WHOLE_PLANE:
        return canonical_phase(kernel[0])
    return plane.witnesses[0]
