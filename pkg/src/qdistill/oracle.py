"""Random state generators with prescribed class, and a brute-force filter search.

Randomness comes from numpy's PCG64 generator (``np.random.default_rng``),
so a recipe and seed reproduce the same state bit for bit within one
numpy version.

`filter_search` is deliberately independent of the closed-form machinery.
It factors ``rho = V V^H`` once with numpy, and for each filter ``F`` takes
the Wootters values as the singular values of the complex symmetric
matrix ``W^T YY W`` with ``W = F V``. No matrix square root and no
lambda-ratio invariance are involved.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .classify import StateClass, classify_state
from .distill import LocalFilter
from .entanglement import min_partial_transpose_eigenvalue
from .errors import InvalidState, RecipeUnsatisfiable
from .linalg import SIGMA_YY, dagger
from .states import BELL_VECTORS, DensityMatrix

MAX_ATTEMPTS = 1000


@dataclass(frozen=True)
class StateRecipe:
    """What to generate.

    Parameters
    ----------
    target_class : StateClass, optional
        Class the output must have. ``None`` means any state of ``rank``.
    rank : int, optional
        Required rank; for ``IncompletelyDistillable`` one of 2, 3, 4
        (drawn at random when omitted).
    seed : int
        Seed of the PCG64 stream.
    spread : float
        Dirichlet concentration for mixture weights; small values give
        lopsided mixtures.
    margin : float
        Safety distance from the class boundaries: the smallest nonzero
        eigenvalue must exceed ``margin`` times the largest, and entangled
        classes need a partial-transpose eigenvalue below ``-margin``.
    """

    target_class: StateClass | None = None
    rank: int | None = None
    seed: int = 0
    spread: float = 1.0
    margin: float = 1e-3


def haar_vector(rng, dim: int = 4) -> np.ndarray:
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


def haar_unitary(rng, dim: int = 2) -> np.ndarray:
    """Haar-distributed unitary from the QR decomposition of a Ginibre matrix."""
    z = (rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph


def ginibre2(rng) -> np.ndarray:
    return rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))


def random_local_filter(rng) -> LocalFilter:
    """Invertible (almost surely) filter with complex Gaussian entries."""
    return LocalFilter(ginibre2(rng), ginibre2(rng))


def _mixture(vectors, weights) -> np.ndarray:
    m = sum(w * np.outer(v, v.conj()) for w, v in zip(weights, vectors))
    return m / np.trace(m).real


def _conjugate(m, f: LocalFilter) -> np.ndarray:
    op = f.operator()
    out = op @ m @ dagger(op)
    return out / np.trace(out).real


def _product(rng) -> np.ndarray:
    return np.kron(haar_vector(rng, 2), haar_vector(rng, 2))


def _perp(x):
    return np.array([-np.conj(x[1]), np.conj(x[0])])


def _candidate(recipe: StateRecipe, rng) -> np.ndarray:
    cls = recipe.target_class
    w = lambda k: rng.dirichlet([recipe.spread] * k)  # noqa: E731

    if cls is None:
        k = recipe.rank or 4
        return _mixture([haar_vector(rng) for _ in range(k)], w(k))
    if cls is StateClass.SEPARABLE:
        k = recipe.rank or int(rng.integers(1, 5))
        return _mixture([_product(rng) for _ in range(max(k, 1) + (k > 1))], w(max(k, 1) + (k > 1)))
    if cls is StateClass.PURE_DISTILLABLE:
        return _mixture([haar_vector(rng)], [1.0])
    if cls is StateClass.BELL_DIAGONAL:
        k = recipe.rank or 4
        weights = np.zeros(4)
        weights[rng.permutation(4)[:k]] = w(k)
        m = _mixture(list(BELL_VECTORS.values()), weights)
        return _conjugate(m, LocalFilter(haar_unitary(rng), haar_unitary(rng)))
    if cls is StateClass.QUASI_DISTILLABLE:
        # one product vector x(x)y plus an entangled vector inside span{x(x)y_perp, x_perp(x)y}
        x, y = haar_vector(rng, 2), haar_vector(rng, 2)
        alpha, beta = haar_vector(rng, 2)
        ent = alpha * np.kron(x, _perp(y)) + beta * np.kron(_perp(x), y)
        m = _mixture([np.kron(x, y), ent], w(2))
        return _conjugate(m, random_local_filter(rng))
    if cls is StateClass.INCOMPLETELY_QUASI_DISTILLABLE:
        # full-rank block on span{|00>, |01>, |10>}, then a random local filter
        g = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        m = np.zeros((4, 4), dtype=complex)
        m[:3, :3] = g @ dagger(g)
        return _conjugate(m / np.trace(m).real, random_local_filter(rng))
    if cls is StateClass.INCOMPLETELY_DISTILLABLE:
        k = recipe.rank or int(rng.integers(2, 5))
        if k == 2:
            # a plane spanned by two independent product vectors
            p1, p2 = _product(rng), _product(rng)
            coeffs = [haar_vector(rng, 2) for _ in range(2)]
            return _mixture([c[0] * p1 + c[1] * p2 for c in coeffs], w(2))
        # a dominant entangled component keeps the rejection rate low
        vectors = [haar_vector(rng) for _ in range(k)]
        weights = w(k)
        weights[0] += 1.0
        return _mixture(vectors, weights)
    raise RecipeUnsatisfiable(f"no generator for class {cls!r}")


def _acceptable(m, recipe: StateRecipe) -> bool:
    try:
        rho = DensityMatrix(m)
        c = classify_state(rho)
    except (InvalidState, ValueError, RuntimeError):
        return False
    if recipe.rank is not None and c.rank != recipe.rank:
        return False
    if recipe.target_class is not None and c.class_tag is not recipe.target_class:
        return False
    values = np.linalg.eigvalsh(rho.mat)[::-1]
    if values[c.rank - 1] < recipe.margin * values[0]:
        return False
    entangled = c.class_tag is not StateClass.SEPARABLE
    if entangled and min_partial_transpose_eigenvalue(rho) > -recipe.margin:
        return False
    return True


def random_state(recipe: StateRecipe) -> DensityMatrix:
    """Draw a state matching ``recipe`` by construction plus rejection.

    Raises
    ------
    RecipeUnsatisfiable
        If no acceptable state turns up in 1000 attempts.
    """
    rng = np.random.default_rng(recipe.seed)
    for _ in range(MAX_ATTEMPTS):
        m = _candidate(recipe, rng)
        if _acceptable(m, recipe):
            return DensityMatrix(m)
    raise RecipeUnsatisfiable(f"no state satisfying {recipe} after {MAX_ATTEMPTS} attempts")


# ---------------------------------------------------------------- filter search

def _batched_concurrence(w: np.ndarray) -> np.ndarray:
    """Concurrence of the states ``W W^H / Tr`` for a stack of 4 x r factors ``W``."""
    traces = np.einsum("nij,nij->n", w, np.conj(w)).real
    tau = np.swapaxes(w, 1, 2) @ SIGMA_YY @ w
    gram = np.conj(np.swapaxes(tau, 1, 2)) @ tau
    lam = np.sqrt(np.clip(np.linalg.eigvalsh(gram), 0.0, None))[:, ::-1]
    c = lam[:, 0] - lam[:, 1:].sum(axis=1)
    return np.clip(c, 0.0, None) / traces


def _capped(g: np.ndarray, cap: float) -> np.ndarray:
    """Raise the small singular value of each 2x2 so the condition number is at most ``cap``."""
    u, s, vh = np.linalg.svd(g)
    s = s / s[:, :1]
    s[:, 1] = np.maximum(s[:, 1], 1.0 / cap)
    return (u * s[:, None, :]) @ vh


def _haar_su2(rng, count: int) -> np.ndarray:
    # [[x, -conj(y)], [y, conj(x)]] with (x, y) uniform on the unit sphere of C^2
    z = rng.normal(size=(count, 2)) + 1j * rng.normal(size=(count, 2))
    z /= np.linalg.norm(z, axis=1, keepdims=True)
    x, y = z[:, 0], z[:, 1]
    return np.stack([np.stack([x, -np.conj(y)], axis=1),
                     np.stack([y, np.conj(x)], axis=1)], axis=1)


def _random_factors(rng, count: int, cap: float) -> np.ndarray:
    u, v = _haar_su2(rng, count), _haar_su2(rng, count)
    # condition numbers stratified log-uniformly up to the cap
    kappa = np.exp(rng.uniform(0.0, np.log(cap), size=count))
    u[:, :, 1] /= kappa[:, None]
    return u @ v


def _evaluate(factor: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    f = np.einsum("nij,nkl->nikjl", a, b).reshape(-1, 4, 4)
    return _batched_concurrence(f @ factor)


def _square_root_factor(m: np.ndarray) -> np.ndarray:
    values, vectors = np.linalg.eigh(m)
    keep = values > 1e-14 * max(values[-1], 0.0)
    return vectors[:, keep] * np.sqrt(values[keep])


def filter_search(rho, samples: int, seed: int = 0, cond_cap: float = 1e3,
                  chunk: int = 4096, refine_fraction: float = 0.2):
    """Best concurrence found over random local filters.

    The first candidate is the identity. Most of the budget goes to
    independent filters whose factors have Haar singular vectors and
    condition numbers log-uniform in ``[1, cond_cap]``; the remaining
    ``refine_fraction`` perturbs the current best with shrinking
    multiplicative noise. Every factor keeps condition number at most
    ``cond_cap``.

    Returns
    -------
    best_c : float
    best_filter : LocalFilter
    """
    if samples < 1:
        raise ValueError("samples must be at least 1")
    m = rho.mat if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)
    m = _square_root_factor(m)
    rng = np.random.default_rng(seed)
    best_a, best_b = np.eye(2, dtype=complex), np.eye(2, dtype=complex)
    best_c = float(_evaluate(m, best_a[None], best_b[None])[0])
    remaining = samples - 1

    def consider(a, b):
        nonlocal best_a, best_b, best_c
        c = _evaluate(m, a, b)
        i = int(np.argmax(c))
        if c[i] > best_c:
            best_c, best_a, best_b = float(c[i]), a[i], b[i]

    n_refine = int(remaining * refine_fraction)
    n_random = remaining - n_refine
    while n_random > 0:
        k = min(chunk, n_random)
        consider(_random_factors(rng, k, cond_cap), _random_factors(rng, k, cond_cap))
        n_random -= k

    rounds = 20
    per_round = n_refine // rounds
    for r in range(rounds):
        if per_round == 0:
            break
        scale = 0.5 * 0.7 ** r
        noise = lambda: scale * (rng.normal(size=(per_round, 2, 2))  # noqa: E731
                                 + 1j * rng.normal(size=(per_round, 2, 2)))
        a = _capped(best_a @ (np.eye(2) + noise()), cond_cap)
        b = _capped(best_b @ (np.eye(2) + noise()), cond_cap)
        consider(a, b)
    leftover = n_refine - rounds * per_round
    if leftover > 0:
        consider(_random_factors(rng, leftover, cond_cap), _random_factors(rng, leftover, cond_cap))

    return min(best_c, 1.0), LocalFilter(best_a, best_b)
