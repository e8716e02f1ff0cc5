"""Distillation class of a two-qubit state and its optimal filtered entanglement.

Local filters ``A (x) B`` rescale every Wootters lambda by one common
factor, so the shape ``lambda / sum(lambda)`` is fixed. The best any
filter sequence can reach is therefore the Bell-diagonal state with
weights ``lambda / sum(lambda)``, whose concurrence is
``(l1 - l2 - l3 - l4) / (l1 + l2 + l3 + l4)``. Whether that optimum is
reached by a single filter or only in a limit with vanishing success
probability is decided by the product vectors in the state's support
and kernel.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .entanglement import (TOL_BELL, concurrence, eof, is_bell_diagonal, is_entangled,
                           lambda_spectrum)
from .errors import InternalInconsistency, NotEntangled
from .linalg import TOL_RANK
from .states import DensityMatrix
from .support import FaceClass, FaceTag, classify_face, kernel_product_vector

DEFAULT_TOL = 1e-9


class StateClass(str, Enum):
    SEPARABLE = "Separable"
    BELL_DIAGONAL = "BellDiagonal"
    PURE_DISTILLABLE = "PureDistillable"
    INCOMPLETELY_DISTILLABLE = "IncompletelyDistillable"
    INCOMPLETELY_QUASI_DISTILLABLE = "IncompletelyQuasiDistillable"
    QUASI_DISTILLABLE = "QuasiDistillable"

    @property
    def attained(self) -> bool:
        return self not in (StateClass.QUASI_DISTILLABLE,
                            StateClass.INCOMPLETELY_QUASI_DISTILLABLE)


@dataclass(frozen=True)
class Classification:
    class_tag: StateClass
    rank: int
    face: FaceClass
    m_rho: float
    c_max: float
    attained: bool
    concurrence: float
    eof: float
    kernel_product: np.ndarray | None = None

    def to_dict(self) -> dict:
        d = {
            "class": self.class_tag.value,
            "rank": self.rank,
            "face": self.face.subcase.value,
            "face_dim": self.face.dim,
            "concurrence": self.concurrence,
            "eof": self.eof,
            "c_max": self.c_max,
            "m_rho": self.m_rho,
            "attained": self.attained,
            "product_vectors": [_vec_to_pairs(w) for w in self.face.witnesses],
        }
        if self.kernel_product is not None:
            d["kernel_product_vector"] = _vec_to_pairs(self.kernel_product)
        return d


def _vec_to_pairs(v):
    return [[float(z.real), float(z.imag)] for z in np.asarray(v)]


def max_distillable_eof(rho, tol_rank: float = TOL_RANK):
    """Optimal entanglement of formation reachable by local filtering.

    Returns
    -------
    m_rho : float
        ``eof(c_max)``.
    c_max : float
        ``(l1 - l2 - l3 - l4) / (l1 + l2 + l3 + l4)``, with lambdas below
        ``tol_rank * l1`` treated as zero.

    Raises
    ------
    NotEntangled
        If the concurrence of ``rho`` is zero.
    """
    lam = np.array(lambda_spectrum(rho).values)
    if lam[0] > 0.0:
        lam[lam <= tol_rank * lam[0]] = 0.0
    gap = lam[0] - lam[1:].sum()
    if gap <= 0.0:
        raise NotEntangled("state has zero concurrence; no filter can create entanglement")
    c_max = float(min(gap / lam.sum(), 1.0))
    return eof(c_max), c_max


def classify_state(rho, tol: float = DEFAULT_TOL, bell_tol: float = TOL_BELL,
                   detect_bell_diagonal: bool = True) -> Classification:
    """Sort a state into its class under local filtering.

    Separable states are reported as such. A rank-one entangled state is
    distillable outright. A state with maximally mixed marginals is
    Bell-diagonal up to local unitaries and cannot be improved. Everything
    else is decided by rank and the product vectors of the support:

    ====  ==========================================  ============================
    rank  structure                                   class
    ====  ==========================================  ============================
    4     --                                          IncompletelyDistillable
    3     kernel is a product vector                  IncompletelyQuasiDistillable
    3     kernel is entangled                         IncompletelyDistillable
    2     support holds exactly one product vector    QuasiDistillable
    2     support holds exactly two product vectors   IncompletelyDistillable
    ====  ==========================================  ============================

    Pass ``detect_bell_diagonal=False`` to skip the Bell-diagonal shortcut
    and get the structural class, which is the one preserved by
    invertible local filters.
    """
    if not isinstance(rho, DensityMatrix):
        rho = DensityMatrix(rho)
    c = concurrence(rho)
    face = classify_face(rho, tol, tol)
    rank = face.dim

    def result(tag, m_rho, c_max, kernel_product=None):
        return Classification(tag, rank, face, m_rho, c_max, tag.attained, c, eof(c),
                              kernel_product)

    if not is_entangled(rho, tol):
        return result(StateClass.SEPARABLE, 0.0, 0.0)
    if rank == 1:
        return result(StateClass.PURE_DISTILLABLE, 1.0, 1.0)
    if detect_bell_diagonal and is_bell_diagonal(rho, bell_tol):
        return result(StateClass.BELL_DIAGONAL, eof(c), c)

    if rank == 2 and face.subcase is FaceTag.C_ONE:
        kp = _kernel_witness(face, tol)
        return result(StateClass.QUASI_DISTILLABLE, 1.0, 1.0, kp)
    if rank == 2 and face.subcase is FaceTag.C_WHOLE_PLANE:
        raise InternalInconsistency(
            "entangled state whose support factorises entirely; such states are separable")

    m_rho, c_max = max_distillable_eof(rho, tol)
    if rank == 3 and face.subcase is FaceTag.B_KERNEL_FACTORISING:
        kp = _kernel_witness(face, tol)
        return result(StateClass.INCOMPLETELY_QUASI_DISTILLABLE, m_rho, c_max, kp)
    return result(StateClass.INCOMPLETELY_DISTILLABLE, m_rho, c_max)


def _kernel_witness(face, tol):
    # a state reachable only in a limit must have a product vector in its kernel
    kp = kernel_product_vector(face, tol)
    if kp is None:
        raise InternalInconsistency("quasi class without a product vector in the kernel")
    return kp
