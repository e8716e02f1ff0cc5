"""Local filters and the constructive single-copy distillation protocols.

A filter ``A (x) B`` maps ``rho`` to ``F rho F^H / Tr(F rho F^H)``. Success
probabilities are always quoted for the filter rescaled to operator norm
one, ``F / (|A| |B|)``, which is the largest physically allowed Kraus
operator in its ray. Composite protocols are stored as one ``(A, B)``
pair so that the probability is the one-shot probability.

Protocols, by class:

* quasi-distillable (rank 2, one product vector in the support):
  balance the entangled component, then damp ``|0>`` on both sides by
  ``1/n``; the output tends to a maximally entangled state while the
  probability falls like ``1/n^2``.
* incompletely quasi-distillable (rank 3, product kernel): damp ``|0>``
  by ``1/n`` and rescale ``|1>`` on each side; the output tends to a
  rank-two Bell-diagonal state with concurrence ``|b| / sqrt(ad)``.
* incompletely distillable of rank 2 (two product vectors in the
  support): one invertible-on-support filter gives the optimal
  Bell-diagonal state at once.
* incompletely distillable of rank 3 or 4: alternate normalizing the two
  marginals until both are ``I/2`` (`bell_diagonalize`).
* pure entangled: invert the Schmidt coefficients.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .classify import StateClass, classify_state
from .entanglement import KERNEL_FLOOR, concurrence, eof, is_entangled, marginal_deviation
from .errors import NoConvergence, NoProductKernel, WrongClass, ZeroProbability
from .linalg import (as_matrix, dagger, herm_eig, inv_sqrt_psd2, kron, op_norm2,
                     partial_trace, singular_values2)
from .states import DensityMatrix
from .support import (FaceTag, classify_face, is_product, kernel_product_vector)

TOL_PROB = 1e-14


@dataclass(frozen=True)
class LocalFilter:
    """Pair of 2x2 operators acting as ``a (x) b``."""

    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        a = as_matrix(self.a, (2, 2))
        b = as_matrix(self.b, (2, 2))
        if not (np.any(a) and np.any(b)):
            raise ValueError("filter factors must be nonzero")
        a.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @classmethod
    def identity(cls) -> "LocalFilter":
        return cls(np.eye(2), np.eye(2))

    def operator(self) -> np.ndarray:
        return kron(self.a, self.b)

    def norm(self) -> float:
        return op_norm2(self.a) * op_norm2(self.b)

    def normalized(self) -> "LocalFilter":
        return LocalFilter(self.a / op_norm2(self.a), self.b / op_norm2(self.b))

    def after(self, earlier: "LocalFilter") -> "LocalFilter":
        """The filter that applies ``earlier`` first and then ``self``."""
        return LocalFilter(self.a @ earlier.a, self.b @ earlier.b)

    def condition_number(self) -> float:
        sa = singular_values2(self.a)
        sb = singular_values2(self.b)
        denom = sa[1] * sb[1]
        return float("inf") if denom == 0.0 else sa[0] * sb[0] / denom


class FilterOutcome(NamedTuple):
    state: DensityMatrix
    probability: float


def apply_filter(rho, f: LocalFilter, tol_prob: float = TOL_PROB) -> FilterOutcome:
    """Apply a local filter and renormalize.

    The filter acts on a Gram factor ``L`` of ``rho = L L^H`` built from
    the eigenvectors of ``rho``, with eigenvalues below ``1e-14`` of the
    largest treated as roundoff and dropped. The output ``(F L)(F L)^H``
    is positive semidefinite by construction, and roundoff in the kernel
    is not amplified by strongly non-unitary filters.

    Raises
    ------
    ZeroProbability
        If the norm-one filter succeeds with probability at most ``tol_prob``.
    """
    if not isinstance(rho, DensityMatrix):
        rho = DensityMatrix(rho)
    op = f.normalized().operator()
    g = op @ gram_factor(rho.mat)
    out = g @ dagger(g)
    p = float(np.trace(out).real)
    if p <= tol_prob:
        raise ZeroProbability(f"filter annihilates the state (probability {p:.3g})")
    return FilterOutcome(DensityMatrix.from_unnormalized(out), min(p, 1.0))


def gram_factor(m: np.ndarray, rel_floor: float = KERNEL_FLOOR) -> np.ndarray:
    """``L`` with ``L L^H = m`` up to eigenvalues below ``rel_floor`` times the largest."""
    values, vectors = herm_eig(m)
    keep = values > rel_floor * max(values[0], 0.0)
    return vectors[:, keep] * np.sqrt(values[keep])


def _filtered_matrix(m, a, b):
    op = kron(a, b)
    out = op @ m @ dagger(op)
    out = 0.5 * (out + dagger(out))
    return out / np.trace(out).real


@dataclass(frozen=True)
class CanonicalForm:
    """Local frame in which the state has ``|11>`` in its kernel.

    ``state`` is ``(u_left (x) u_right) rho (...)^H`` renormalized; its
    upper 3x3 block reads::

        [[p00, e,  c],
         [e*,  a,  b],
         [c*,  b*, d]]

    ``kind`` is ``"kernel"`` when the frame comes from local unitaries
    rotating a kernel product vector onto ``|11>``, and ``"support-pair"``
    when invertible maps send the two support product vectors of a
    rank-two state to ``|01>`` and ``|10>``.
    """

    u_left: np.ndarray
    u_right: np.ndarray
    state: np.ndarray
    kind: str

    @property
    def p00(self) -> float:
        return float(self.state[0, 0].real)

    @property
    def a(self) -> float:
        return float(self.state[1, 1].real)

    @property
    def d(self) -> float:
        return float(self.state[2, 2].real)

    @property
    def b(self) -> complex:
        return complex(self.state[1, 2])

    @property
    def c(self) -> complex:
        return complex(self.state[0, 2])

    @property
    def e(self) -> complex:
        return complex(self.state[0, 1])

    @property
    def delta(self) -> float:
        """Relative phase of ``|10>`` against ``|01>`` in the entangled support direction."""
        return float(-np.angle(self.b))

    def concurrence_ratio(self) -> float:
        """``|b| / sqrt(ad)``, the concurrence of the optimal end state."""
        return abs(self.b) / np.sqrt(self.a * self.d)

    def filter(self) -> LocalFilter:
        return LocalFilter(self.u_left, self.u_right)


def _unitary_sending_to_one(x: np.ndarray) -> np.ndarray:
    """Unitary with ``U x = |1>`` for a unit vector ``x``; the identity for ``x = |1>``."""
    x_perp = np.array([np.conj(x[1]), -np.conj(x[0])])
    return np.array([np.conj(x_perp), np.conj(x)])


def canonicalize(rho, tol: float = 1e-9) -> CanonicalForm:
    """Rotate a kernel product vector onto ``|11>`` with local unitaries.

    Raises
    ------
    NoProductKernel
        If the kernel is empty or contains no product vector.
    """
    if not isinstance(rho, DensityMatrix):
        rho = DensityMatrix(rho)
    face = classify_face(rho, tol, tol)
    kp = kernel_product_vector(face, tol)
    if kp is None:
        raise NoProductKernel(f"no product vector in the kernel (face {face.subcase.value})")
    dec = is_product(kp, tol)
    ua = _unitary_sending_to_one(dec.left)
    ub = _unitary_sending_to_one(dec.right)
    return CanonicalForm(ua, ub, _filtered_matrix(rho.mat, ua, ub), "kernel")


def canonicalize_product_pair(rho, tol: float = 1e-9) -> CanonicalForm:
    """Map the two support product vectors of a rank-two state to ``|01>``, ``|10>``.

    The first witness (in the deterministic order of
    `product_vectors_in_plane`) goes to ``|01>``.
    """
    if not isinstance(rho, DensityMatrix):
        rho = DensityMatrix(rho)
    face = classify_face(rho, tol, tol)
    if face.subcase is not FaceTag.C_TWO:
        raise NoProductKernel(
            f"support is not spanned by exactly two product vectors (face {face.subcase.value})")
    d1 = is_product(face.witnesses[0], tol)
    d2 = is_product(face.witnesses[1], tol)
    ua = np.linalg.inv(np.column_stack([d1.left, d2.left]))
    ub = np.linalg.inv(np.column_stack([d2.right, d1.right]))
    return CanonicalForm(ua, ub, _filtered_matrix(rho.mat, ua, ub), "support-pair")


def _require(rho, *allowed, rank=None, structural=False):
    cls = classify_state(rho, detect_bell_diagonal=not structural)
    if cls.class_tag not in allowed or (rank is not None and cls.rank not in rank):
        wanted = ", ".join(a.value for a in allowed)
        raise WrongClass(f"protocol needs {wanted}; state is {cls.class_tag.value} "
                         f"(rank {cls.rank})", actual=cls.class_tag)
    return cls


def _quasi_builder(rho) -> tuple[Callable[[int], LocalFilter], CanonicalForm]:
    _require(rho, StateClass.QUASI_DISTILLABLE)
    cf = canonicalize(rho)
    balance = np.diag([np.sqrt(cf.d), np.sqrt(cf.a)])
    pre = LocalFilter(balance @ cf.u_left, cf.u_right)

    def at(n: int) -> LocalFilter:
        damp = np.diag([1.0 / n, 1.0])
        return LocalFilter(damp, damp).after(pre)

    return at, cf


def quasi_distillation_filter(rho, n: int) -> LocalFilter:
    """n-th filter of the sequence driving a quasi-distillable state to a Bell state.

    In the canonical frame Alice first applies ``diag(sqrt(d), sqrt(a))``,
    then both parties apply ``diag(1/n, 1)``.

    Raises
    ------
    WrongClass
        Unless the state is quasi-distillable.
    """
    return _quasi_builder(rho)[0](n)


def quasi_distillation_limit(rho) -> DensityMatrix:
    """Limit ``(|01> + e^{i delta} |10>) / sqrt(2)`` of the sequence, in the canonical frame."""
    cf = canonicalize(rho)
    psi = np.array([0, 1, np.exp(1j * cf.delta), 0]) / np.sqrt(2)
    return DensityMatrix.pure(psi)


def decoupling_shear(cf: CanonicalForm) -> LocalFilter:
    """Upper-triangular filters that zero the ``e`` and ``c`` entries.

    ``[[1, s], [0, 1]] (x) [[1, t], [0, 1]]`` keeps ``|11>`` in the
    kernel and leaves the central block unchanged, while adding
    ``t v01 + s v10`` to the ``|00>`` amplitude of every support vector.
    """
    a, d, b = cf.a, cf.d, cf.b
    coeff = np.array([[a, np.conj(b)], [b, d]])
    t, s = np.linalg.solve(coeff, -np.array([cf.e, cf.c]))
    return LocalFilter(np.array([[1, s], [0, 1]]), np.array([[1, t], [0, 1]]))


def _incomplete_quasi_builder(rho, decouple=True):
    _require(rho, StateClass.INCOMPLETELY_QUASI_DISTILLABLE)
    cf = canonicalize(rho)
    pre = cf.filter()
    a, d = cf.a, cf.d
    if decouple:
        shear = decoupling_shear(cf)
        pre = shear.after(pre)
        m = _filtered_matrix(cf.state, shear.a, shear.b)
        a, d = m[1, 1].real, m[2, 2].real

    def at(n: int) -> LocalFilter:
        return LocalFilter(np.diag([1.0 / n, 1 / np.sqrt(d)]),
                           np.diag([1.0 / n, 1 / np.sqrt(a)])).after(pre)

    return at, cf


def incomplete_quasi_filter(rho, n: int, decouple: bool = True) -> LocalFilter:
    """n-th filter of the sequence for a rank-three state with a product kernel.

    In the canonical frame the filter is
    ``diag(1/n, 1/sqrt(d)) (x) diag(1/n, 1/sqrt(a))``; the normalized
    output tends to the Bell-diagonal state with central block
    ``[[1/2, f], [f*, 1/2]]``, ``|f| = |b| / (2 sqrt(ad))``.

    With ``decouple`` (the default) a shear removing the coherences
    between ``|00>`` and the central block is applied first. It does not
    change the limit but turns the ``O(1/n)`` approach of the marginals
    into ``O(1/n^2)``.
    """
    return _incomplete_quasi_builder(rho, decouple)[0](n)


def incomplete_quasi_target(rho) -> DensityMatrix:
    """Limit state of `incomplete_quasi_filter`, in the canonical frame."""
    cf = canonicalize(rho)
    f = cf.b / (2 * np.sqrt(cf.a * cf.d))
    m = np.zeros((4, 4), dtype=complex)
    m[1, 1] = m[2, 2] = 0.5
    m[1, 2] = f
    m[2, 1] = np.conj(f)
    return DensityMatrix(m)


def two_product_filter(rho) -> LocalFilter:
    """One-shot optimal filter for a rank-two state spanned by two product vectors.

    After mapping the product vectors to ``|01>`` and ``|10>``, Alice
    applies ``diag(1/sqrt(a), 1/sqrt(d))``. The output has central block
    ``[[1/2, f], [f*, 1/2]]`` and concurrence ``|b| / sqrt(ad)``.

    Rank-two states that are already Bell-diagonal share the support
    structure and are accepted; their filter is a multiple of the identity
    up to local unitaries.
    """
    _require(rho, StateClass.INCOMPLETELY_DISTILLABLE, rank=(2,), structural=True)
    cf = canonicalize_product_pair(rho)
    balance = np.diag([1 / np.sqrt(cf.a), 1 / np.sqrt(cf.d)])
    return LocalFilter(balance @ cf.u_left, cf.u_right)


def pure_state_filter(rho) -> LocalFilter:
    """Filter turning an entangled pure state into ``(|00> + |11>)/sqrt(2)``.

    With ``M = U S V^H`` the coefficient matrix of the state, Alice
    applies ``diag(s_min / s) U^H`` and Bob ``V^T``. The success
    probability is ``2 s_min^2``.
    """
    _require(rho, StateClass.PURE_DISTILLABLE)
    m = rho.mat if isinstance(rho, DensityMatrix) else as_matrix(rho, (4, 4))
    # the largest column of a rank-one projector is proportional to the state
    col = np.argmax(np.abs(np.diag(m)))
    psi = m[:, col] / np.sqrt(m[col, col].real)
    u, s, vh = np.linalg.svd(psi.reshape(2, 2))
    return LocalFilter(np.diag(s[-1] / s) @ dagger(u), vh.conj())


class ProtocolStep(NamedTuple):
    n: int
    probability: float
    concurrence: float
    eof: float
    marginal_deviation: float


@dataclass
class ProtocolTrace:
    protocol: str
    steps: list

    @property
    def final(self) -> ProtocolStep:
        return self.steps[-1]

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(s, name) for s in self.steps])


def _step(n, rho, f):
    out = apply_filter(rho, f)
    c = concurrence(out.state)
    return ProtocolStep(n, out.probability, c, eof(c), marginal_deviation(out.state)), out


def bell_diagonalize(rho, max_iter: int = 200, tol: float = 1e-9, method: str = "newton"):
    """Balance both marginals to ``I/2`` with local filters.

    For a filter ``exp(H/2) (x) exp(K/2)`` with traceless Hermitian ``H``
    and ``K`` acting on the current state ``sigma``, the sum of the
    Wootters lambdas grows by the factor ``exp(-phi)`` with
    ``phi(H, K) = log Tr(sigma (exp(H) (x) exp(K)))``. Minimizing ``phi``
    therefore raises the concurrence, and its stationary point is the
    state with both marginals ``I/2``.

    ``method="newton"`` (default) takes Newton steps on ``phi`` in the
    six Pauli coordinates of ``H`` and ``K`` with backtracking; the
    gradient is the vector of marginal Pauli expectations and the
    Hessian their covariance in ``sigma``. Convergence is quadratic.
    ``method="alternating"`` applies ``(2 rho_A)^{-1/2}`` on Alice's side,
    then ``(2 rho_B)^{-1/2}`` on Bob's, each iteration; each half step
    also raises the lambda sum, but convergence is only linear.

    Returns
    -------
    filter : LocalFilter
        Accumulated filter.
    trace : ProtocolTrace
        One step per iterate; ``n`` counts completed iterations, starting
        at 0 for the input. Concurrence never decreases along it.

    Raises
    ------
    WrongClass
        Unless ``rho`` is entangled with rank 4, or rank 3 with an
        entangled kernel.
    NoConvergence
        If the marginals are not within ``tol`` of ``I/2`` after
        ``max_iter`` iterations; ``best`` holds ``(filter, trace)``.
    """
    if not isinstance(rho, DensityMatrix):
        rho = DensityMatrix(rho)
    if method not in ("newton", "alternating"):
        raise ValueError(f"unknown method {method!r}")
    face = classify_face(rho)
    if not is_entangled(rho) or face.subcase not in (FaceTag.A, FaceTag.B_KERNEL_ENTANGLED):
        cls = classify_state(rho)
        raise WrongClass("marginal balancing needs an entangled state of rank 4 or a rank-3 "
                         f"state with entangled kernel; state is {cls.class_tag.value} "
                         f"(face {face.subcase.value})", actual=cls.class_tag)

    total = LocalFilter.identity()
    steps = []
    for it in range(max_iter + 1):
        step, out = _step(it, rho, total)
        steps.append(step)
        if step.marginal_deviation <= tol:
            return total, ProtocolTrace("belldiag", steps)
        if it == max_iter:
            break
        if method == "newton":
            update = _newton_step(out.state.mat)
            if update is None:
                break
            total = update.after(total).normalized()
        else:
            current = out.state.mat
            for side in ("A", "B"):
                marginal = partial_trace(current, "B" if side == "A" else "A")
                g = inv_sqrt_psd2(2 * marginal)
                total = _damped(rho, total, g, side).normalized()
                current = _filtered_matrix(rho.mat, total.a, total.b)
    raise NoConvergence(f"marginals not balanced after {len(steps) - 1} iterations "
                        f"(deviation {steps[-1].marginal_deviation:.3g})",
                        best=(total, ProtocolTrace("belldiag", steps)))


_PAULIS = (np.array([[0, 1], [1, 0]], dtype=complex),
           np.array([[0, -1j], [1j, 0]]),
           np.array([[1, 0], [0, -1]], dtype=complex))
_LOCAL_OBSERVABLES = ([kron(p, np.eye(2)) for p in _PAULIS]
                      + [kron(np.eye(2), p) for p in _PAULIS])


def _exp_traceless(coeffs, t: float) -> np.ndarray:
    """``exp(t * sum_i coeffs_i sigma_i)`` for a real 3-vector of coefficients."""
    h = sum(c * p for c, p in zip(coeffs, _PAULIS))
    r = t * float(np.linalg.norm(coeffs))
    if r == 0.0:
        return np.eye(2, dtype=complex)
    return np.cosh(r) * np.eye(2) + (np.sinh(r) / r) * t * h


def _newton_step(sigma, armijo: float = 1e-4, max_halvings: int = 60):
    """Backtracked Newton step on ``phi`` at the normalized state ``sigma``."""
    prods = [sigma @ o for o in _LOCAL_OBSERVABLES]
    grad = np.array([np.trace(p).real for p in prods])
    cov = np.array([[np.trace(p @ o).real for o in _LOCAL_OBSERVABLES] for p in prods])
    cov = 0.5 * (cov + cov.T) - np.outer(grad, grad)
    try:
        z = -np.linalg.solve(cov, grad)
    except np.linalg.LinAlgError:
        z = -np.linalg.lstsq(cov, grad, rcond=None)[0]
    slope = float(grad @ z)
    if not slope < 0.0:
        z, slope = -grad, -float(grad @ grad)
    t = 1.0
    for _ in range(max_halvings):
        a = _exp_traceless(z[:3], 0.5 * t)
        b = _exp_traceless(z[3:], 0.5 * t)
        op = kron(a, b)
        phi = np.log(np.trace(op @ sigma @ dagger(op)).real)
        if phi <= armijo * t * slope:
            return LocalFilter(a, b)
        t *= 0.5
    return None


def _damped(rho, total, g, side, floor=1e-12):
    # blend the update with the identity while it would push the success probability below floor
    eye = np.eye(2)
    for _ in range(60):
        step = LocalFilter(g, eye) if side == "A" else LocalFilter(eye, g)
        candidate = step.after(total)
        op = candidate.normalized().operator()
        if np.trace(op @ rho.mat @ dagger(op)).real >= floor:
            return candidate
        g = 0.5 * (g + eye)
    return candidate


def geometric_schedule(n_max: int) -> list:
    ns = []
    n = 1
    while n < n_max:
        ns.append(n)
        n *= 2
    ns.append(n_max)
    return ns


def linear_schedule(n_max: int, points: int = 100) -> list:
    return sorted({int(round(x)) for x in np.linspace(1, n_max, min(n_max, points))})


SCHEDULES = {"geometric": geometric_schedule, "linear": linear_schedule}


def protocol_for(rho) -> str:
    """Name of the protocol matching the class of ``rho``."""
    cls = classify_state(rho)
    tag = cls.class_tag
    if tag is StateClass.QUASI_DISTILLABLE:
        return "t1"
    if tag is StateClass.INCOMPLETELY_QUASI_DISTILLABLE:
        return "t2"
    if tag is StateClass.INCOMPLETELY_DISTILLABLE:
        return "t3" if cls.rank == 2 else "belldiag"
    if tag is StateClass.PURE_DISTILLABLE:
        return "pure"
    raise WrongClass(f"no local operation can increase the entanglement of a "
                     f"{tag.value} state", actual=tag)


def protocol_filter(rho, protocol: str, n: int = 1000) -> LocalFilter:
    """Filter of the named protocol at sequence index ``n``."""
    if protocol == "auto":
        protocol = protocol_for(rho)
    if protocol == "t1":
        return quasi_distillation_filter(rho, n)
    if protocol == "t2":
        return incomplete_quasi_filter(rho, n)
    if protocol == "t3":
        return two_product_filter(rho)
    if protocol == "belldiag":
        return bell_diagonalize(rho)[0]
    if protocol == "pure":
        return pure_state_filter(rho)
    raise ValueError(f"unknown protocol {protocol!r}")


def simulate_protocol(rho, n_max: int = 1000, schedule: str = "geometric") -> ProtocolTrace:
    """Run the class-appropriate protocol over a schedule of sequence indices.

    For the limit protocols each row is the one-shot outcome of the n-th
    filter. One-shot protocols repeat their single outcome. For marginal
    balancing, ``n`` is the number of balancing iterations.

    Raises
    ------
    WrongClass
        For separable and Bell-diagonal states.
    """
    if not isinstance(rho, DensityMatrix):
        rho = DensityMatrix(rho)
    ns = SCHEDULES[schedule](n_max)
    protocol = protocol_for(rho)
    if protocol == "belldiag":
        _, full = bell_diagonalize(rho)
        last = len(full.steps) - 1
        return ProtocolTrace(protocol, [full.steps[min(n, last)]._replace(n=n) for n in ns])
    if protocol in ("t1", "t2"):
        builder = _quasi_builder if protocol == "t1" else _incomplete_quasi_builder
        at, _ = builder(rho)
        return ProtocolTrace(protocol, [_step(n, rho, at(n))[0] for n in ns])
    f = two_product_filter(rho) if protocol == "t3" else pure_state_filter(rho)
    row, _ = _step(1, rho, f)
    return ProtocolTrace(protocol, [row._replace(n=n) for n in ns])
