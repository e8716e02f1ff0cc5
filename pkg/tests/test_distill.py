import math

import numpy as np
import pytest

from qdistill.classify import StateClass, classify_state
from qdistill.distill import (LocalFilter, apply_filter, bell_diagonalize, canonicalize,
                              canonicalize_product_pair, geometric_schedule,
                              incomplete_quasi_filter, incomplete_quasi_target, linear_schedule,
                              protocol_filter, pure_state_filter, quasi_distillation_filter,
                              quasi_distillation_limit, simulate_protocol, two_product_filter)
from qdistill.entanglement import (concurrence, is_bell_diagonal, lambda_spectrum,
                                   marginal_deviation)
from qdistill.errors import NoConvergence, NoProductKernel, WrongClass, ZeroProbability
from qdistill.linalg import rank_and_kernel
from qdistill.oracle import StateRecipe, random_state
from qdistill.states import BELL_VECTORS, DensityMatrix, bell_state, ket, kernel_11_state, werner_state

from helpers import filtered, random_density, random_unitary, random_vector, textbook_concurrence

PSI_PLUS = BELL_VECTORS["psi+"]
QUASI = DensityMatrix(0.5 * np.outer(ket("00"), ket("00")) + 0.5 * np.outer(PSI_PLUS, PSI_PLUS))


def quasi_with_weights(p, u):
    chi = np.array([0, u, np.sqrt(1 - u * u), 0])
    return DensityMatrix(p * np.outer(ket("00"), ket("00")) + (1 - p) * np.outer(chi, chi))


def test_local_filter_basics():
    f = LocalFilter(np.diag([2.0, 1.0]), 3 * np.eye(2))
    assert math.isclose(f.norm(), 6.0)
    assert math.isclose(f.normalized().norm(), 1.0)
    assert math.isclose(f.condition_number(), 2.0)
    g = LocalFilter(np.eye(2), np.diag([1.0, 0.5]))
    assert np.allclose(g.after(f).operator(), g.operator() @ f.operator())
    with pytest.raises(ValueError):
        LocalFilter(np.zeros((2, 2)), np.eye(2))


def test_apply_filter_identity_and_zero_probability():
    rho = werner_state(0.4)
    out = apply_filter(rho, LocalFilter.identity())
    assert math.isclose(out.probability, 1.0) and np.allclose(out.state.mat, rho.mat)
    proj = np.diag([0.0, 1.0])
    with pytest.raises(ZeroProbability):
        apply_filter(kernel_11_state(0.3, 0.2, 0.1, 0.05), LocalFilter(proj, proj))


def test_apply_filter_output_is_psd_under_extreme_filters():
    rho = kernel_11_state(0.3, 0.2, 0.1, 0.05, 0.04j)
    for n in (10**3, 10**5, 10**6):
        out = apply_filter(rho, incomplete_quasi_filter(rho, n))
        assert np.linalg.eigvalsh(out.state.mat).min() > -1e-15
    with pytest.raises(ZeroProbability):
        apply_filter(rho, incomplete_quasi_filter(rho, 10**8))


def test_apply_filter_probability_is_scale_free():
    rho = DensityMatrix(random_density(np.random.default_rng(0)))
    f = LocalFilter(np.diag([1.0, 0.3]), np.array([[1, 0.5], [0, 1]]))
    big = LocalFilter(10 * f.a, 0.1j * f.b)
    assert math.isclose(apply_filter(rho, f).probability, apply_filter(rho, big).probability)
    assert 0 < apply_filter(rho, f).probability <= 1


def test_canonicalize_identity_on_canonical_input():
    rho = kernel_11_state(0.3, 0.2, 0.1 + 0.02j, 0.05, 0.01j)
    cf = canonicalize(rho)
    assert np.allclose(cf.u_left, np.eye(2)) and np.allclose(cf.u_right, np.eye(2))
    assert (math.isclose(cf.a, 0.3), math.isclose(cf.d, 0.2)) == (True, True)
    assert np.isclose(cf.b, 0.1 + 0.02j) and np.isclose(cf.c, 0.05) and np.isclose(cf.e, 0.01j)
    assert math.isclose(cf.p00, 0.5)


def test_canonicalize_recovers_parameters_after_local_unitaries():
    rng = np.random.default_rng(1)
    for _ in range(100):
        a, d = rng.uniform(0.05, 0.45, 2)
        b = rng.uniform(0.1, 0.9) * math.sqrt(a * d) * np.exp(1j * rng.uniform(0, 2 * np.pi))
        rho = kernel_11_state(a, d, b)
        u, v = random_unitary(rng), random_unitary(rng)
        cf = canonicalize(DensityMatrix(filtered(rho.mat, u, v)))
        assert np.allclose(cf.state[3], 0, atol=1e-9) and np.allclose(cf.state[:, 3], 0, atol=1e-9)
        assert abs(cf.a - a) < 1e-9 and abs(cf.d - d) < 1e-9 and abs(abs(cf.b) - abs(b)) < 1e-9


def test_canonicalize_two_product_support():
    cf = canonicalize(kernel_11_state(0.8, 0.2, 0.3))
    assert abs(cf.p00) < 1e-12
    pair = canonicalize_product_pair(kernel_11_state(0.8, 0.2, 0.3))
    assert np.allclose(pair.u_left, np.eye(2)) and np.allclose(pair.u_right, np.eye(2))
    assert math.isclose(pair.concurrence_ratio(), 0.75)


def test_canonicalize_needs_product_kernel():
    with pytest.raises(NoProductKernel):
        canonicalize(DensityMatrix(random_density(np.random.default_rng(2))))
    with pytest.raises(NoProductKernel):
        canonicalize(DensityMatrix(random_density(np.random.default_rng(2), 3)))


def test_quasi_filter_examples():
    out = apply_filter(QUASI, quasi_distillation_filter(QUASI, 10))
    assert concurrence(out.state) > 0.99
    # a = d: the balancing step is proportional to the identity, and so is step two at n = 1
    one = apply_filter(QUASI, quasi_distillation_filter(QUASI, 1))
    assert math.isclose(one.probability, 1.0) and math.isclose(concurrence(one.state),
                                                              concurrence(QUASI))
    probs = [apply_filter(QUASI, quasi_distillation_filter(QUASI, n)).probability
             for n in (1, 2, 5, 10, 100, 1000)]
    assert all(p > q for p, q in zip(probs, probs[1:]))


def test_quasi_filter_converges_to_limit_state():
    rho = random_state(StateRecipe(StateClass.QUASI_DISTILLABLE, seed=3))
    limit = quasi_distillation_limit(rho)
    assert math.isclose(concurrence(limit), 1.0, rel_tol=1e-12)
    dist = [np.abs(apply_filter(rho, quasi_distillation_filter(rho, n)).state.mat - limit.mat).max()
            for n in (10, 100, 1000, 10000)]
    assert dist[-1] < 1e-3 and all(x > y for x, y in zip(dist, dist[1:]))


def test_quasi_sequence_can_start_below_the_input():
    # monotone in n, but the first balancing step may cost entanglement
    rho = quasi_with_weights(0.5, 0.1)
    trace = simulate_protocol(rho, 64)
    c = trace.column("concurrence")
    assert c[0] < concurrence(rho) < c[-1]
    assert np.all(np.diff(c) >= -1e-10)


def test_incomplete_quasi_filter_examples():
    rho = kernel_11_state(0.3, 0.2, 0.1)
    target = 0.1 / math.sqrt(0.06)
    assert math.isclose(concurrence(incomplete_quasi_target(rho)), target, rel_tol=1e-12)
    out = apply_filter(rho, incomplete_quasi_filter(rho, 1000))
    assert abs(concurrence(out.state) - target) < 1e-4
    assert marginal_deviation(out.state) <= 1e-4
    assert abs(concurrence(out.state) - classify_state(rho).c_max) < 1e-6


def test_incomplete_quasi_filter_with_coherences():
    rho = kernel_11_state(0.3, 0.2, 0.1 - 0.05j, 0.1 + 0.05j, -0.08j)
    target = incomplete_quasi_target(rho)
    out = apply_filter(rho, incomplete_quasi_filter(rho, 1000))
    assert np.abs(out.state.mat - target.mat).max() < 1e-5
    # without the shear the marginals approach I/2 only like 1/n
    slow = apply_filter(rho, incomplete_quasi_filter(rho, 1000, decouple=False))
    assert marginal_deviation(slow.state) > 10 * marginal_deviation(out.state)
    assert abs(concurrence(slow.state) - concurrence(target)) < 1e-4


def test_two_product_filter_examples():
    rho = kernel_11_state(0.8, 0.2, 0.3)
    out = apply_filter(rho, two_product_filter(rho))
    assert math.isclose(concurrence(out.state), 0.75, rel_tol=1e-12)
    assert is_bell_diagonal(out.state, 1e-12) and out.probability > 0
    half = kernel_11_state(0.5, 0.5, 0.3)
    f = two_product_filter(half).normalized()
    assert np.allclose(f.a, np.eye(2)) and np.allclose(f.b, np.eye(2))


def test_pure_state_filter():
    rng = np.random.default_rng(4)
    for _ in range(50):
        psi = random_vector(rng)
        rho = DensityMatrix.pure(psi)
        out = apply_filter(rho, pure_state_filter(rho))
        assert abs(concurrence(out.state) - 1) < 1e-12
        assert np.allclose(out.state.mat, bell_state("phi+").mat, atol=1e-12)
        s_min = np.linalg.svd(psi.reshape(2, 2), compute_uv=False)[-1]
        assert math.isclose(out.probability, 2 * s_min**2, rel_tol=1e-10)


def test_wrong_class_is_reported():
    with pytest.raises(WrongClass) as exc:
        quasi_distillation_filter(kernel_11_state(0.3, 0.2, 0.1), 10)
    assert exc.value.actual is StateClass.INCOMPLETELY_QUASI_DISTILLABLE
    with pytest.raises(WrongClass):
        incomplete_quasi_filter(QUASI, 10)
    with pytest.raises(WrongClass):
        two_product_filter(QUASI)
    with pytest.raises(WrongClass):
        pure_state_filter(QUASI)
    with pytest.raises(WrongClass):
        bell_diagonalize(QUASI)
    with pytest.raises(WrongClass):
        bell_diagonalize(kernel_11_state(0.3, 0.2, 0.1))
    for rho in (werner_state(0.8), werner_state(0.2)):
        with pytest.raises(WrongClass):
            simulate_protocol(rho)


def test_bell_diagonalize_werner_is_immediate():
    f, trace = bell_diagonalize(werner_state(0.7))
    assert len(trace.steps) == 1
    assert np.allclose(f.normalized().operator(), np.eye(4))


def test_bell_diagonalize_random_states():
    rng = np.random.default_rng(5)
    done = 0
    while done < 40:
        rho = random_density(rng, rank=4 if done % 2 else 3)
        c = classify_state(rho)
        if c.class_tag is not StateClass.INCOMPLETELY_DISTILLABLE:
            continue
        done += 1
        f, trace = bell_diagonalize(rho)
        out = apply_filter(rho, f)
        assert is_bell_diagonal(out.state, 1e-9)
        assert abs(concurrence(out.state) - c.c_max) < 1e-8
        assert rank_and_kernel(out.state.mat)[0] == c.rank
        conc = trace.column("concurrence")
        assert np.all(np.diff(conc) >= -1e-10)
        assert np.all(np.diff(trace.column("n")) > 0)
        assert np.allclose(lambda_spectrum(out.state).normalized(),
                           lambda_spectrum(rho).normalized(), atol=1e-8)


def test_bell_diagonalize_reports_best_iterate():
    rho = random_state(StateRecipe(StateClass.INCOMPLETELY_DISTILLABLE, rank=4, seed=1))
    with pytest.raises(NoConvergence) as exc:
        bell_diagonalize(rho, max_iter=1)
    f, trace = exc.value.best
    assert len(trace.steps) == 2 and isinstance(f, LocalFilter)


def test_bell_diagonalize_alternating_method():
    rho = random_state(StateRecipe(StateClass.INCOMPLETELY_DISTILLABLE, rank=4, seed=2))
    c_max = classify_state(rho).c_max
    f_alt, slow = bell_diagonalize(rho, max_iter=2000, method="alternating")
    f_new, fast = bell_diagonalize(rho)
    assert len(fast.steps) < len(slow.steps)
    assert np.all(np.diff(slow.column("concurrence")) >= -1e-10)
    for f in (f_alt, f_new):
        out = apply_filter(rho, f)
        assert is_bell_diagonal(out.state, 1e-9) and abs(concurrence(out.state) - c_max) < 1e-8
    with pytest.raises(ValueError):
        bell_diagonalize(rho, method="gradient")


def test_schedules():
    assert geometric_schedule(1000) == [1, 2, 4, 8, 16, 32, 64, 128, 256, 512, 1000]
    assert geometric_schedule(8) == [1, 2, 4, 8]
    assert geometric_schedule(1) == [1]
    assert linear_schedule(5) == [1, 2, 3, 4, 5]
    lin = linear_schedule(1000)
    assert lin[0] == 1 and lin[-1] == 1000 and len(lin) == 100


def test_simulate_protocol_per_class():
    quasi = simulate_protocol(QUASI)
    assert quasi.protocol == "t1"
    assert quasi.final.concurrence >= 0.999
    assert quasi.final.probability <= 1e-4 * quasi.steps[0].probability
    rho = kernel_11_state(0.3, 0.2, 0.1)
    t2 = simulate_protocol(rho)
    assert t2.protocol == "t2" and abs(t2.final.concurrence - 0.1 / math.sqrt(0.06)) < 1e-4
    pure = simulate_protocol(DensityMatrix.pure(random_vector(np.random.default_rng(6))))
    assert pure.protocol == "pure" and abs(pure.final.concurrence - 1) < 1e-12
    t3 = simulate_protocol(kernel_11_state(0.8, 0.2, 0.3), n_max=4)
    assert t3.protocol == "t3" and [s.n for s in t3.steps] == [1, 2, 4]


def test_simulate_protocol_single_step():
    rho = kernel_11_state(0.3, 0.2, 0.1)
    trace = simulate_protocol(rho, n_max=1)
    out = apply_filter(rho, incomplete_quasi_filter(rho, 1))
    assert len(trace.steps) == 1
    assert trace.steps[0].n == 1
    assert math.isclose(trace.steps[0].probability, out.probability)
    assert math.isclose(trace.steps[0].concurrence, concurrence(out.state))


def test_traces_keep_spectrum_shape_and_rise():
    for cls in (StateClass.QUASI_DISTILLABLE, StateClass.INCOMPLETELY_QUASI_DISTILLABLE,
                StateClass.INCOMPLETELY_DISTILLABLE):
        for seed in range(5):
            rho = random_state(StateRecipe(cls, seed=seed))
            trace = simulate_protocol(rho)
            assert np.all(np.diff(trace.column("concurrence")) >= -1e-10)
            assert trace.final.concurrence >= concurrence(rho) - 1e-10
            shape = lambda_spectrum(rho).normalized()
            for n in (1, 32, 1000, 10**5):
                f = protocol_filter(rho, "auto", n)
                out = apply_filter(rho, f)
                assert np.allclose(lambda_spectrum(out.state).normalized(), shape, atol=1e-8)


def test_one_shot_filters_never_lose_entanglement():
    for cls in (StateClass.PURE_DISTILLABLE, StateClass.INCOMPLETELY_DISTILLABLE):
        for seed in range(10):
            rho = random_state(StateRecipe(cls, seed=seed))
            out = apply_filter(rho, protocol_filter(rho, "auto"))
            assert concurrence(out.state) >= concurrence(rho) - 1e-10
            assert textbook_concurrence(out.state.mat) >= concurrence(rho) - 1e-7
