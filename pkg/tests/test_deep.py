import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings, strategies as st
from scipy import integrate

from barronlab.deep import (CompositionalFunction, LayerAtom, ResidualNet, ResidualSchedule,
                            Segment, canonicalize_layer_atoms, comp_norms, compose_barron,
                            embed_barron, eval_resnet, flow_Np, flow_z, inverse_dinf_bound,
                            matrix_exp_nonneg, random_schedule, resnet_path_norm, sample_resnet,
                            schedule_from_resnet, schedule_lipschitz, smoothed_activation,
                            smoothed_relu)
from barronlab.errors import DivergenceError, InvalidParameterError, RangeError
from barronlab.measures import TwoLayerMeasure, barron_norm, random_measure


def rk4_linear(A, y, n):
    """Independent fixed-step RK4 for y' = A y on [0, 1]."""
    h = 1.0 / n
    for _ in range(n):
        k1 = A @ y
        k2 = A @ (y + h / 2 * k1)
        k3 = A @ (y + h / 2 * k2)
        k4 = A @ (y + h * k3)
        y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    return y


def euler_net(d, D, alpha, layers, x, lift=False):
    """Residual recursion written out directly."""
    z = np.zeros(D)
    z[:d] = x
    if lift:
        z[d] = 1.0
    L = len(layers)
    for U, W in layers:
        z = z + U @ np.maximum(W @ z, 0) / L
    return alpha @ z


def constant_fn(rng, d=2, D=4, m=2, atoms=3, nonneg=False, scale=0.5):
    sched = random_schedule(rng, D, m, atoms, scale=scale, nonneg=nonneg)
    return CompositionalFunction(d, rng.normal(size=D), sched)


class TestTypes:
    def test_segment_weights(self):
        with pytest.raises(InvalidParameterError):
            Segment(0.0, 1.0, [0.5, 0.4], np.zeros((2, 2, 1)), np.zeros((2, 1, 2)))

    def test_partition(self):
        s1 = Segment(0.0, 0.5, [1.0], np.zeros((1, 2, 1)), np.zeros((1, 1, 2)))
        s2 = Segment(0.6, 1.0, [1.0], np.zeros((1, 2, 1)), np.zeros((1, 1, 2)))
        with pytest.raises(InvalidParameterError):
            ResidualSchedule(2, 1, (s1, s2))
        with pytest.raises(InvalidParameterError):
            ResidualSchedule(2, 1, (s1,))

    def test_layer_atom_shapes(self):
        with pytest.raises(InvalidParameterError):
            LayerAtom(1.0, np.zeros((3, 2)), np.zeros((3, 2)))

    def test_segment_index(self):
        fn = schedule_from_resnet(ResidualNet(1, [1.0, 0], np.zeros((4, 2, 1)), np.zeros((4, 1, 2))))
        idx = fn.schedule.segment_index([0.0, 0.25, 0.49, 0.5, 0.99, 1.0])
        np.testing.assert_array_equal(idx, [0, 1, 1, 2, 3, 3])


class TestEvalResnet:
    def test_zero_U(self, rng):
        d, D = 3, 5
        net = ResidualNet(d, rng.normal(size=D), np.zeros((7, D, 2)), rng.normal(size=(7, 2, D)))
        x = rng.random(d)
        assert eval_resnet(net, x) == pytest.approx(net.alpha[:d] @ x)

    def test_one_step(self):
        net = ResidualNet(1, [1.0], np.ones((1, 1, 1)), np.ones((1, 1, 1)))
        assert eval_resnet(net, [0.5]) == 1.0

    def test_matches_direct_recursion(self, rng):
        net = ResidualNet(2, rng.normal(size=4), rng.normal(size=(6, 4, 3)), rng.normal(size=(6, 3, 4)))
        x = rng.random((10, 2))
        expect = [euler_net(2, 4, net.alpha, net.layers, xi) for xi in x]
        np.testing.assert_allclose(eval_resnet(net, x), expect, atol=1e-13)

    def test_euler_refinement(self, rng):
        # nonnegative weights keep the ReLU active, so the Euler error is not trivially zero
        atom = LayerAtom(1.0, rng.random((3, 2)), rng.random((2, 3)))
        fn = CompositionalFunction(2, np.ones(3), ResidualSchedule.constant([atom]))
        x = np.array([0.3, 0.8])
        exact = fn(x, steps=4096)
        gaps = []
        for L in (10, 20, 40, 80):
            net = sample_resnet(fn, L, 0)
            gaps.append(abs(eval_resnet(net, x) - exact))
        ratios = np.array(gaps[:-1]) / np.array(gaps[1:])
        assert np.all((ratios > 1.7) & (ratios < 2.3)), ratios


class TestPathNorm:
    def test_zero_U(self, rng):
        net = ResidualNet(2, [1.0, -2.0, 0.5], np.zeros((4, 3, 2)), rng.normal(size=(4, 2, 3)))
        assert resnet_path_norm(net) == pytest.approx(3.5)

    def test_scalar(self):
        net = ResidualNet(1, [1.0], np.ones((1, 1, 1)), np.ones((1, 1, 1)))
        assert resnet_path_norm(net) == 2.0

    def test_matches_matrix_product(self, rng):
        net = ResidualNet(2, rng.normal(size=4), rng.normal(size=(5, 4, 3)), rng.normal(size=(5, 3, 4)))
        P = np.eye(4)
        for U, W in net.layers:
            P = (np.eye(4) + np.abs(U) @ np.abs(W) / net.L) @ P
        assert resnet_path_norm(net) == pytest.approx(np.abs(net.alpha) @ P @ np.ones(4))

    @given(st.integers(0, 10 ** 6), st.integers(0, 4), st.floats(0, 2))
    def test_monotone_in_U(self, seed, layer, bump):
        r = np.random.default_rng(seed)
        U, W = r.normal(size=(5, 3, 2)), r.normal(size=(5, 2, 3))
        net = ResidualNet(2, r.normal(size=3), U, W)
        U2 = np.abs(U).copy()
        U2[layer] += bump * r.random((3, 2))
        assert resnet_path_norm(ResidualNet(2, net.alpha, U2, W)) >= resnet_path_norm(net) - 1e-12


class TestFlowZ:
    def test_zero_dynamics(self, rng):
        fn = CompositionalFunction(2, np.ones(4), ResidualSchedule.zero(4, 3))
        x = rng.random(2)
        np.testing.assert_array_equal(flow_z(fn, x, 16).state, np.r_[x, 0, 0])

    def test_embedding_coordinate(self, rng):
        mu = random_measure(rng, 3, 6, canonical=False)
        fn = embed_barron(mu)
        x = rng.random((50, 3))
        np.testing.assert_allclose(flow_z(fn, x).state[:, 4], mu(x), atol=1e-12)

    def test_rk4_order(self, rng):
        # nonnegative weights and x > 0 keep every pre-activation positive: smooth linear field
        fn = constant_fn(rng, nonneg=True, scale=0.8)
        x = np.array([0.4, 0.7])
        ref = flow_z(fn, x, 4096).state
        e64 = np.linalg.norm(flow_z(fn, x, 64).state - ref)
        e128 = np.linalg.norm(flow_z(fn, x, 128).state - ref)
        assert 12 < e64 / e128 < 20

    def test_steps_split_at_segments(self):
        fn = compose_barron(TwoLayerMeasure.zero(1), TwoLayerMeasure.zero(1))
        assert flow_z(fn, [0.5], 6).steps == 6
        assert flow_z(fn, [0.5], 1).steps == 2

    def test_divergence(self):
        atom = LayerAtom(1.0, np.full((1, 1), 1e4), np.full((1, 1), 1e4))
        fn = CompositionalFunction(1, [1.0], ResidualSchedule.constant([atom]))
        with pytest.raises(DivergenceError):
            with np.errstate(over="ignore", invalid="ignore"):
                flow_z(fn, [0.5], 16)

    def test_bad_steps(self, rng):
        with pytest.raises(InvalidParameterError):
            flow_z(constant_fn(rng), [0.1, 0.1], 0)


class TestFlowNp:
    def test_zero_schedule(self):
        np.testing.assert_array_equal(flow_Np(ResidualSchedule.zero(3, 2), 1.0).state, np.ones(3))

    def test_scalar_exponential(self):
        kappa = 0.7
        sched = ResidualSchedule.constant([LayerAtom(0.5, [[1.0]], [[0.4]]), LayerAtom(0.5, [[-2.0]], [[0.5]])])
        assert flow_Np(sched, 1, 256).state[0] == pytest.approx(np.exp(kappa), abs=1e-8)

    def test_single_atom_p_independent(self, rng):
        sched = ResidualSchedule.constant([LayerAtom(1.0, rng.normal(size=(3, 2)), rng.normal(size=(2, 3)))])
        base = flow_Np(sched, 1).state
        for p in (1.5, 2, 5, np.inf):
            np.testing.assert_allclose(flow_Np(sched, p).state, base, rtol=1e-12)

    def test_entrywise_rate(self):
        sched = ResidualSchedule.constant([LayerAtom(0.5, [[1.0]], [[1.0]]), LayerAtom(0.5, [[3.0]], [[1.0]])])
        # (E x^2)^(1/2) = sqrt(5)
        assert sched.segments[0].norm_rate(2)[0, 0] == pytest.approx(np.sqrt(5))
        assert sched.segments[0].norm_rate(np.inf)[0, 0] == 3.0

    @settings(max_examples=30)
    @given(st.integers(0, 10 ** 6), st.integers(1, 3))
    def test_monotone_and_at_least_one(self, seed, segments):
        sched = random_schedule(np.random.default_rng(seed), 3, 2, 2, n_segments=segments)
        prev = np.ones(3)
        for steps in (8, 16):
            assert np.all(flow_Np(sched, 1, steps).state >= 1.0)
        # N at the end of segment k: zero out every later segment
        zero = (np.zeros((1, 3, 2)), np.zeros((1, 2, 3)))
        for k in range(1, segments + 1):
            segs = list(sched.segments[:k]) + [Segment(s.t0, s.t1, [1.0], *zero)
                                               for s in sched.segments[k:]]
            N = flow_Np(ResidualSchedule(3, 2, tuple(segs)), 1, 64).state
            assert np.all(N >= prev - 1e-12)
            prev = N

    def test_p_ordering(self, rng):
        fn = constant_fn(rng)
        vals = [comp_norms(fn, p)[0] for p in (1, 2, 4, np.inf)]
        assert all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))


class TestCompNorms:
    def test_zero_schedule(self):
        fn = CompositionalFunction(1, [2.0, -1.0, 0.5], ResidualSchedule.zero(3, 1))
        assert comp_norms(fn) == pytest.approx((3.5, 3.5))

    def test_embedding_identity(self, rng):
        mu = random_measure(rng, 2, 5)
        Q = np.abs(mu.outer) @ mu.weights
        assert comp_norms(embed_barron(mu), 1)[1] == pytest.approx(2 * Q + 1, abs=1e-12)

    def test_matrix_exponential_oracle(self, rng):
        fn = constant_fn(rng)
        A = fn.schedule.segments[0].norm_rate(1)
        expect = np.abs(fn.alpha) @ scipy.linalg.expm(A) @ np.ones(4)
        assert comp_norms(fn, 1)[0] == pytest.approx(expect, abs=1e-8)

    @settings(max_examples=30)
    @given(st.integers(0, 10 ** 6))
    def test_tilde_dominates(self, seed):
        fn = constant_fn(np.random.default_rng(seed))
        dp, tilde = comp_norms(fn, 1)
        assert 0 <= dp <= tilde


class TestMatrixExp:
    def test_zero(self):
        np.testing.assert_array_equal(matrix_exp_nonneg(np.zeros((3, 3))), np.eye(3))

    def test_diag(self):
        k = np.array([0.1, 1.0, 3.0, 7.5])
        np.testing.assert_allclose(matrix_exp_nonneg(np.diag(k)), np.diag(np.exp(k)), rtol=1e-13)

    def test_ode_oracle(self, rng):
        M = rng.random((4, 4))
        cols = np.stack([rk4_linear(M, e, 10 ** 5) for e in np.eye(4)], axis=1)
        np.testing.assert_allclose(matrix_exp_nonneg(M), cols, atol=1e-8, rtol=1e-10)

    @given(st.integers(0, 10 ** 6), st.integers(1, 6), st.floats(0.01, 20))
    def test_against_scipy(self, seed, n, scale):
        M = np.random.default_rng(seed).random((n, n)) * scale
        ref = scipy.linalg.expm(M)
        np.testing.assert_allclose(matrix_exp_nonneg(M), ref, rtol=1e-10)

    def test_rejects_negative(self):
        with pytest.raises(InvalidParameterError):
            matrix_exp_nonneg([[0.0, -1.0], [0.0, 0.0]])
        with pytest.raises(InvalidParameterError):
            matrix_exp_nonneg([[np.nan]])


class TestLipschitz:
    def test_single_segment(self, rng):
        fn = constant_fn(rng)
        est = schedule_lipschitz(fn.schedule)
        assert est.coefficient == 0.0 and not est.discontinuous
        assert est.norm == pytest.approx(fn.schedule.segments[0].norm_rate(1).sum())

    def test_identical_segments(self):
        U, W = np.ones((1, 2, 1)), np.ones((1, 1, 2))
        s = ResidualSchedule(2, 1, (Segment(0, 0.5, [1.0], U, W), Segment(0.5, 1, [1.0], U, W)))
        assert schedule_lipschitz(s).coefficient == 0.0

    def test_difference_quotient(self):
        a = Segment(0, 0.5, [1.0], [[[1.0]]], [[[1.0]]])
        b = Segment(0.5, 1, [1.0], [[[1.6]]], [[[1.0]]])
        est = schedule_lipschitz(ResidualSchedule(1, 1, (a, b)))
        assert est.coefficient == pytest.approx(1.2)
        assert est.norm == pytest.approx(2.2)
        assert est.discontinuous


class TestEmbed:
    def test_unit_atom(self):
        mu = TwoLayerMeasure([1.0], [1.0], [[0.5, 0.25]], [0.25])
        assert comp_norms(embed_barron(mu), 1)[1] == pytest.approx(3.0)

    def test_zero_measure(self, rng):
        fn = embed_barron(TwoLayerMeasure.zero(2))
        assert comp_norms(fn, 1)[1] == pytest.approx(1.0)
        assert np.all(fn(rng.random((10, 2))) == 0.0)

    def test_random(self, rng):
        mu = random_measure(rng, 4, 9, canonical=False)
        fn = embed_barron(mu, D=8, m=3)
        x = rng.random((1000, 4))
        assert np.max(np.abs(fn(x) - mu(x))) <= 1e-10
        assert comp_norms(fn, 1)[1] == pytest.approx(2 * barron_norm(mu, 1) + 1, abs=1e-9)
        assert schedule_lipschitz(fn.schedule).coefficient == 0.0

    def test_D_too_small(self, measure):
        with pytest.raises(InvalidParameterError):
            embed_barron(measure, D=4)


def positive_g(rng, d, k=5):
    return random_measure(rng, d, k, positive=True)


class TestCompose:
    def test_zero_g(self, rng):
        h = random_measure(rng, 1, 4, canonical=False)
        fn = compose_barron(TwoLayerMeasure.zero(2), h)
        x = rng.random((20, 2))
        np.testing.assert_allclose(fn(x), h(np.zeros(1)), atol=1e-12)

    def test_identity_h(self, rng):
        g = positive_g(rng, 3)
        h = TwoLayerMeasure([1.0], [1.0], [[1.0]], [0.0])
        fn = compose_barron(g, h)
        x = rng.random((200, 3))
        assert np.max(np.abs(fn(x, steps=512) - g(x))) <= 1e-6

    def test_random_pairs(self, rng):
        for _ in range(5):
            g, h = positive_g(rng, 2), random_measure(rng, 1, 3, canonical=False)
            fn = compose_barron(g, h, D=6, m=2)
            x = rng.random((200, 2))
            assert np.max(np.abs(fn(x, steps=512) - h(g(x)[:, None]))) <= 1e-6
            bound = (barron_norm(h, 1) + 1) * (barron_norm(g, 1) + 1)
            assert comp_norms(fn, 1, 512)[0] <= bound + 1e-9

    def test_range_check(self, rng):
        g = TwoLayerMeasure([1.0], [3.0], [[1.0, 0.0]], [0.0])
        with pytest.raises(RangeError):
            compose_barron(g, random_measure(rng, 1, 2))

    def test_D_too_small(self, rng):
        with pytest.raises(InvalidParameterError):
            compose_barron(positive_g(rng, 2), random_measure(rng, 1, 2), D=4)


class TestSampleResnet:
    def test_single_atom_segments(self, rng):
        atoms = [LayerAtom(1.0, rng.normal(size=(3, 2)), rng.normal(size=(2, 3))) for _ in range(2)]
        segs = (Segment.from_atoms(0, 0.5, atoms[:1]), Segment.from_atoms(0.5, 1, atoms[1:]))
        fn = CompositionalFunction(2, rng.normal(size=3), ResidualSchedule(3, 2, segs))
        net = sample_resnet(fn, 6, 1)
        layers = [(atoms[0].U, atoms[0].W)] * 3 + [(atoms[1].U, atoms[1].W)] * 3
        x = rng.random(2)
        assert eval_resnet(net, x) == pytest.approx(euler_net(2, 3, fn.alpha, layers, x), abs=1e-13)

    def test_deterministic(self, rng):
        fn = constant_fn(rng)
        a, b = sample_resnet(fn, 20, 5), sample_resnet(fn, 20, 5)
        np.testing.assert_array_equal(a.U, b.U)

    def test_lift_propagates(self, rng):
        mu = random_measure(rng, 2, 4)
        net = sample_resnet(embed_barron(mu), 8, 0)
        assert net.lift


class TestScheduleFromResnet:
    def test_segments(self, rng):
        net = ResidualNet(2, rng.normal(size=4), rng.normal(size=(8, 4, 2)), rng.normal(size=(8, 2, 4)))
        fn = schedule_from_resnet(net)
        assert len(fn.schedule.segments) == 8
        np.testing.assert_allclose([s.width for s in fn.schedule.segments], 1 / 8)

    def test_zero_U(self, rng):
        net = ResidualNet(2, rng.normal(size=4), np.zeros((5, 4, 2)), rng.normal(size=(5, 2, 4)))
        x = rng.random(2)
        assert schedule_from_resnet(net)(x, steps=50) == pytest.approx(net.alpha[:2] @ x)

    def test_refinement(self, rng):
        U0, W0 = rng.normal(size=(4, 3)), rng.random((3, 4))
        alpha = rng.normal(size=4)
        x = rng.random(2)

        def refined(L):
            t = np.arange(L) / L
            U = np.stack([U0 * np.cos(2 * ti) for ti in t])
            W = np.stack([W0 * (1 + ti) for ti in t])
            return ResidualNet(2, alpha, U, W)

        gaps = []
        for L in (16, 32, 64, 128):
            net = refined(L)
            gaps.append(abs(schedule_from_resnet(net)(x, steps=16 * L) - eval_resnet(net, x)))
        scale = np.abs(alpha).sum()
        assert gaps[2] <= 0.1 * scale
        ratios = np.array(gaps[:-1]) / np.array(gaps[1:])
        assert np.all((ratios > 1.6) & (ratios < 2.4)), ratios


class TestSmoothedRelu:
    @pytest.mark.parametrize("eps", [0.1, 0.01, 1.0])
    def test_at_zero_against_convolution(self, eps):
        conv, _ = integrate.quad(lambda y: np.exp(-y ** 2 / (2 * eps ** 2)) / np.sqrt(2 * np.pi * eps ** 2) * max(y, 0),
                                 0, np.inf, epsabs=1e-15, epsrel=1e-13)
        val = smoothed_relu(0.0, eps)[0]
        assert val == pytest.approx(eps / np.sqrt(2 * np.pi), abs=1e-15)
        assert abs(val - conv) <= 1e-12

    def test_tails(self):
        eps = 0.05
        assert abs(smoothed_relu(10 * eps, eps)[0] - 10 * eps) <= 1e-12
        assert smoothed_relu(-10 * eps, eps)[0] < 1e-12 * eps

    @pytest.mark.parametrize("eps", [0.1, 0.01])
    def test_bounds(self, eps):
        x = np.linspace(-5 * eps, 5 * eps, 20001)
        v, d1, d2 = smoothed_relu(x, eps)
        assert np.all(np.abs(v - np.maximum(x, 0)) < eps)
        assert np.all(np.abs(d1) <= 1)
        assert np.all(np.abs(d2) <= 1 / eps)

    def test_derivatives_by_differences(self):
        eps, h = 0.2, 1e-5
        x = np.linspace(-1, 1, 41)
        v, d1, d2 = smoothed_relu(x, eps)
        fd1 = (smoothed_relu(x + h, eps)[0] - smoothed_relu(x - h, eps)[0]) / (2 * h)
        fd2 = (smoothed_relu(x + h, eps)[1] - smoothed_relu(x - h, eps)[1]) / (2 * h)
        np.testing.assert_allclose(d1, fd1, atol=1e-8)
        np.testing.assert_allclose(d2, fd2, atol=1e-6)

    def test_bad_eps(self):
        with pytest.raises(InvalidParameterError):
            smoothed_relu(0.0, 0.0)

    def test_smoothed_flow_close(self, rng):
        fn = constant_fn(rng)
        x = rng.random((20, 2))
        gap = np.abs(fn(x, activation=smoothed_activation(1e-3)) - fn(x))
        assert gap.max() < 1e-2


class TestCanonicalizeLayerAtoms:
    def test_normalized_unchanged(self):
        # induced 1-norm of W is its largest absolute column sum
        sched = ResidualSchedule.constant([LayerAtom(1.0, [[1.0], [1.0]], [[1.0, 0.5]])])
        out = canonicalize_layer_atoms(sched)
        np.testing.assert_allclose(out.segments[0].U, sched.segments[0].U)
        np.testing.assert_allclose(out.segments[0].W, sched.segments[0].W)

    def test_scalar(self):
        out = canonicalize_layer_atoms(ResidualSchedule.constant([LayerAtom(1.0, [[4.0]], [[0.5]])]))
        seg = out.segments[0]
        assert seg.U[0, 0, 0] == pytest.approx(2.0)
        assert seg.W[0, 0, 0] == pytest.approx(1.0)

    def test_random_schedule(self, rng):
        sched = random_schedule(rng, 4, 3, 4, scale=0.8, n_segments=2)
        out = canonicalize_layer_atoms(sched)
        z = rng.normal(size=(200, 4)) * 3
        for a, b in zip(sched.segments, out.segments):
            assert np.max(np.abs(a.field(z) - b.field(z))) <= 1e-12
            np.testing.assert_allclose(np.abs(b.W).sum(axis=1).max(axis=1), 1.0)
            target = np.tensordot(a.weights, a.abs_products().sum(axis=(1, 2)), axes=1)
            np.testing.assert_allclose(b.abs_products().sum(axis=(1, 2)), target)
        fa = CompositionalFunction(2, np.ones(4), sched)
        fb = CompositionalFunction(2, np.ones(4), out)
        x = rng.random((50, 2))
        np.testing.assert_allclose(fa(x), fb(x), atol=1e-10)

    def test_drops_zero_atoms(self):
        sched = ResidualSchedule.constant([LayerAtom(0.5, [[1.0]], [[1.0]]), LayerAtom(0.5, [[1.0]], [[0.0]])])
        out = canonicalize_layer_atoms(sched)
        assert len(out.segments[0].weights) == 1


def test_inverse_bound_formula():
    assert inverse_dinf_bound(0.5, 4, 2) == pytest.approx(2 * np.exp(2 * 1.25) * 16 * 0.5 / 2)
