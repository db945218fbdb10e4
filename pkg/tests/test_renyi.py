"""Estimator layer: activations, objectives, backprop, calibration smoke."""

import math

import numpy as np
import pytest

from langevin_unlearning.renyi import (
    DiscriminatorSpec,
    DivergenceEstimate,
    EstimatorConfig,
    TwoLayerDiscriminator,
    _objective_and_output_grads,
    cc_objective,
    dv_objective,
    estimate_renyi,
    gaussian_renyi_oracle,
    polysoftplus,
    spectral_normalize,
    train_discriminator,
)


class TestPolysoftplus:
    def test_branch_values(self):
        assert polysoftplus(0.0) == -1.0
        assert polysoftplus(1.0) == -2.0
        assert polysoftplus(-1.0) == -0.5

    def test_strictly_negative_and_decreasing(self):
        grid = np.linspace(-50, 50, 1001)
        vals = polysoftplus(grid)
        assert np.all(vals < 0)
        assert np.all(np.diff(vals) < 0)

    def test_smooth_at_zero(self):
        h = 1e-6
        left = (polysoftplus(0.0) - polysoftplus(-h)) / h
        right = (polysoftplus(h) - polysoftplus(0.0)) / h
        assert left == pytest.approx(-1.0, abs=1e-5)
        assert right == pytest.approx(-1.0, abs=1e-5)


class TestSpectralNormalize:
    def test_diagonal(self):
        out, flag = spectral_normalize(np.diag([2.0, 1.0]))
        assert not flag
        np.testing.assert_allclose(out, np.diag([1.0, 0.5]), rtol=1e-9)

    def test_orthogonal_unchanged(self):
        c, s = math.cos(0.7), math.sin(0.7)
        rot = np.array([[c, -s], [s, c]])
        out, _ = spectral_normalize(rot)
        np.testing.assert_allclose(out, rot, rtol=1e-7)

    def test_matches_dense_svd(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            w = rng.standard_normal((5, 5)) * float(rng.uniform(0.1, 10))
            out, flag = spectral_normalize(w)
            assert not flag
            top = float(np.linalg.svd(out, compute_uv=False)[0])
            assert top == pytest.approx(1.0, abs=1e-6)

    def test_zero_matrix_flagged(self):
        w = np.zeros((3, 2))
        out, flag = spectral_normalize(w)
        assert flag
        np.testing.assert_array_equal(out, w)

    def test_vector_rejected(self):
        with pytest.raises(ValueError):
            spectral_normalize(np.ones(4))


class TestObjectives:
    def test_cc_constant_witness_hand_value(self):
        g = -np.ones(10)
        got = cc_objective(g, g, 2.0)
        assert got == pytest.approx(-1 + 1 + (math.log(2) + 1) / 2, rel=1e-12)
        assert got == pytest.approx(0.8466, abs=5e-5)

    def test_cc_recomputation_is_exact(self):
        rng = np.random.default_rng(5)
        gq = -np.exp(rng.standard_normal(40))
        gp = -np.exp(rng.standard_normal(30))
        alpha = 2.5
        oracle = (
            gq.mean()
            + np.mean(np.abs(gp) ** ((alpha - 1) / alpha)) / (alpha - 1)
            + (math.log(alpha) + 1) / alpha
        )
        assert cc_objective(gq, gp, alpha) == pytest.approx(oracle, rel=1e-15)

    def test_cc_rejects_nonnegative_witness(self):
        with pytest.raises(ValueError):
            cc_objective([-1.0, 0.0], [-1.0], 2.0)
        with pytest.raises(ValueError):
            cc_objective([-1.0], [0.5, -1.0], 2.0)

    def test_cc_offset_shrinks_with_alpha(self):
        offsets = [(math.log(a) + 1) / a for a in (1.5, 2.0, 4.0, 16.0, 100.0)]
        assert all(x > y > 0 for x, y in zip(offsets, offsets[1:]))

    def test_dv_constant_witness_is_exactly_zero(self):
        rng = np.random.default_rng(9)
        for alpha in (1.3, 2.0, 3.7):
            for c in (-17.3, 0.0, 4.25, 1e6):
                phi_p = np.full(int(rng.integers(1, 30)), c)
                phi_q = np.full(int(rng.integers(1, 30)), c)
                assert dv_objective(phi_p, phi_q, alpha) == 0.0

    def test_dv_matches_naive_formula(self):
        rng = np.random.default_rng(3)
        phi_p = rng.standard_normal(25)
        phi_q = rng.standard_normal(35)
        alpha = 2.0
        naive = math.log(np.mean(np.exp((alpha - 1) * phi_p))) / (alpha - 1) - math.log(
            np.mean(np.exp(alpha * phi_q))
        ) / alpha
        assert dv_objective(phi_p, phi_q, alpha) == pytest.approx(naive, rel=1e-12)

    def test_dv_survives_huge_witness_values(self):
        assert math.isfinite(dv_objective([1000.0, 999.0], [998.0, 1001.0], 2.0))

    def test_empty_inputs_rejected(self):
        with pytest.raises(ValueError):
            dv_objective([], [1.0], 2.0)
        with pytest.raises(ValueError):
            cc_objective([], [-1.0], 2.0)


class TestGaussianOracle:
    def test_identical_is_zero(self):
        assert gaussian_renyi_oracle(0.3, 1.7, 0.3, 1.7, 2.0) == pytest.approx(0.0, abs=1e-15)

    def test_unit_shift_alpha_two(self):
        assert gaussian_renyi_oracle(1.0, 1.0, 0.0, 1.0, 2.0) == pytest.approx(1.0, rel=1e-12)

    def test_sign_symmetry(self):
        a = gaussian_renyi_oracle(0.8, 1.0, 0.0, 1.0, 2.0)
        b = gaussian_renyi_oracle(-0.8, 1.0, 0.0, 1.0, 2.0)
        assert a == b

    def test_quadrature_cross_check(self):
        xs = np.linspace(-40.0, 40.0, 400_001)
        cases = [(1.0, 1.0, 0.0, 1.0, 2.0), (0.5, 1.0, 0.0, 2.0, 2.0), (1.2, 1.0, -0.3, 2.0, 3.0)]
        for mu1, v1, mu2, v2, alpha in cases:
            log_p = -((xs - mu1) ** 2) / (2 * v1) - 0.5 * math.log(2 * math.pi * v1)
            log_q = -((xs - mu2) ** 2) / (2 * v2) - 0.5 * math.log(2 * math.pi * v2)
            moment = np.trapezoid(np.exp(alpha * log_p + (1 - alpha) * log_q), xs)
            oracle = math.log(moment) / (alpha - 1)
            assert gaussian_renyi_oracle(mu1, v1, mu2, v2, alpha) == pytest.approx(
                oracle, rel=1e-6
            )

    def test_mixture_variance_violation_is_infinite(self):
        assert math.isinf(gaussian_renyi_oracle(0.0, 3.0, 0.0, 1.0, 2.0))

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            gaussian_renyi_oracle(0, -1.0, 0, 1.0, 2.0)
        with pytest.raises(ValueError):
            gaussian_renyi_oracle(0, 1.0, 0, 1.0, 1.0)


def _flat_params(disc):
    return [disc.w1, disc.b1, disc.w2]


def _batch_objective(disc, xp, xq, alpha, objective):
    value, _, _ = _objective_and_output_grads(disc(xp), disc(xq), alpha, objective)
    return value


class TestBackpropGradients:
    @pytest.mark.parametrize("objective,out_act", [("dv", "identity"), ("cc", "polysoftplus")])
    def test_matches_central_differences(self, objective, out_act):
        rng = np.random.default_rng(17)
        alpha = 2.0
        for _ in range(8):
            spec = DiscriminatorSpec(3, hidden_width=4, output_activation=out_act,
                                     spectral_norm=False)
            disc = TwoLayerDiscriminator.initialize(spec, rng)
            xp = rng.standard_normal((6, 3))
            xq = rng.standard_normal((5, 3))
            out_p, cache_p = disc.forward(xp)
            out_q, cache_q = disc.forward(xq)
            _, grad_p, grad_q = _objective_and_output_grads(out_p, out_q, alpha, objective)
            gp = disc.backward(cache_p, grad_p)
            gq = disc.backward(cache_q, grad_q)
            analytic = [a + b for a, b in zip(gp, gq)]

            h = 1e-6
            for idx, param in enumerate(_flat_params(disc)):
                flat = param.reshape(-1)
                for j in range(flat.size):
                    keep = flat[j]
                    flat[j] = keep + h
                    up = _batch_objective(disc, xp, xq, alpha, objective)
                    flat[j] = keep - h
                    down = _batch_objective(disc, xp, xq, alpha, objective)
                    flat[j] = keep
                    fd = (up - down) / (2 * h)
                    got = analytic[idx].reshape(-1)[j]
                    assert got == pytest.approx(fd, rel=1e-4, abs=1e-7)
            # scalar bias
            disc.b2 += h
            up = _batch_objective(disc, xp, xq, alpha, objective)
            disc.b2 -= 2 * h
            down = _batch_objective(disc, xp, xq, alpha, objective)
            disc.b2 += h
            assert analytic[3] == pytest.approx((up - down) / (2 * h), rel=1e-4, abs=1e-7)


class TestLipschitz:
    def test_normalized_network_is_contractive(self):
        rng = np.random.default_rng(23)
        spec = DiscriminatorSpec(4, hidden_width=16, spectral_norm=True)
        disc = TwoLayerDiscriminator.initialize(spec, rng)
        for _ in range(200):
            x = rng.standard_normal(4) * 3
            y = rng.standard_normal(4) * 3
            gap = abs(float(disc(x)[0]) - float(disc(y)[0]))
            assert gap <= 1.05 * float(np.linalg.norm(x - y)) + 1e-12


class TestTraining:
    def test_fixed_seed_reproduces_trace(self):
        rng = np.random.default_rng(31)
        xp = rng.standard_normal((80, 2)) + 1.0
        xq = rng.standard_normal((90, 2))
        spec = DiscriminatorSpec(2, hidden_width=8)
        cfg = EstimatorConfig(alpha=2.0, epochs=4, batch=32, learn_rate=1e-3, seeds=(0,))
        _, trace_a = train_discriminator(xp, xq, spec, cfg, seed=7)
        _, trace_b = train_discriminator(xp, xq, spec, cfg, seed=7)
        np.testing.assert_array_equal(trace_a, trace_b)
        _, trace_c = train_discriminator(xp, xq, spec, cfg, seed=8)
        assert not np.array_equal(trace_a, trace_c)

    def test_ascent_improves_objective_for_nearly_all_seeds(self):
        rng = np.random.default_rng(37)
        xp = rng.standard_normal((300, 1)) + 2.0
        xq = rng.standard_normal((300, 1))
        spec = DiscriminatorSpec(1, hidden_width=8, spectral_norm=False)
        cfg = EstimatorConfig(alpha=2.0, epochs=10, batch=128, learn_rate=1e-3, seeds=(0,))
        improved = 0
        for seed in range(12):
            _, trace = train_discriminator(xp, xq, spec, cfg, seed=seed)
            improved += trace[-1] >= trace[0]
        assert improved >= 11

    def test_same_samples_stay_near_zero(self):
        rng = np.random.default_rng(41)
        x = rng.standard_normal((5000, 3))
        spec = DiscriminatorSpec(3, hidden_width=64, spectral_norm=True)
        cfg = EstimatorConfig(alpha=2.0, epochs=15, batch=1024, learn_rate=1e-3, seeds=(0,))
        _, trace = train_discriminator(x, x, spec, cfg, seed=0)
        assert abs(trace[-1]) <= 0.05

    def test_nan_samples_abort_with_diagnostic(self):
        xp = np.array([[1.0], [float("nan")], [0.5], [0.2]])
        xq = np.ones((4, 1))
        spec = DiscriminatorSpec(1, hidden_width=4)
        cfg = EstimatorConfig(alpha=2.0, epochs=1, batch=4, seeds=(0,))
        with pytest.raises(ArithmeticError, match="NaN"):
            train_discriminator(xp, xq, spec, cfg, seed=0)

    def test_dimension_mismatch_rejected(self):
        spec = DiscriminatorSpec(2, hidden_width=4)
        cfg = EstimatorConfig(alpha=2.0, epochs=1, seeds=(0,))
        with pytest.raises(ValueError):
            train_discriminator(np.ones((5, 2)), np.ones((5, 3)), spec, cfg, seed=0)
        with pytest.raises(ValueError):
            train_discriminator(np.ones((5, 3)), np.ones((5, 3)), spec, cfg, seed=0)

    def test_cc_needs_negative_output_activation(self):
        spec = DiscriminatorSpec(2, hidden_width=4, output_activation="identity")
        cfg = EstimatorConfig(alpha=2.0, epochs=1, seeds=(0,), objective="cc")
        with pytest.raises(ValueError):
            train_discriminator(np.ones((5, 2)), np.ones((5, 2)), spec, cfg, seed=0)


class TestEstimate:
    def test_reports_clamped_mean_and_all_seeds(self):
        rng = np.random.default_rng(43)
        xp = rng.standard_normal((60, 2))
        xq = rng.standard_normal((64, 2))
        spec = DiscriminatorSpec(2, hidden_width=8)
        cfg = EstimatorConfig(alpha=2.0, epochs=3, batch=32, learn_rate=1e-3,
                              seeds=(0, 1, 2))
        est = estimate_renyi(xp, xq, spec, cfg)
        assert len(est.per_seed) == 3
        assert est.value == max(0.0, float(np.mean(est.per_seed)))
        assert est.n_p == 60 and est.n_q == 64

    def test_too_few_samples_rejected(self):
        spec = DiscriminatorSpec(1, hidden_width=4)
        cfg = EstimatorConfig(alpha=2.0, epochs=1, seeds=(0,))
        with pytest.raises(ValueError):
            estimate_renyi(np.ones((3, 1)), np.ones((10, 1)), spec, cfg)

    def test_separated_beats_identical(self):
        rng = np.random.default_rng(47)
        base = rng.standard_normal((800, 1))
        far = rng.standard_normal((800, 1)) + 2.0
        other = rng.standard_normal((800, 1))
        spec = DiscriminatorSpec(1, hidden_width=16, spectral_norm=False)
        cfg = EstimatorConfig(alpha=2.0, epochs=40, batch=256, learn_rate=3e-3,
                              seeds=(0, 1))
        gap = estimate_renyi(far, base, spec, cfg)
        null = estimate_renyi(other, base, spec, cfg)
        assert gap.value > null.value
        assert gap.value > 1.0  # true divergence is 4.0

    def test_affine_map_moves_estimate_within_noise(self):
        # population divergence is invariant under shared invertible maps
        rng = np.random.default_rng(53)
        xp = rng.standard_normal((2400, 2)) + np.array([1.0, 0.0])
        xq = rng.standard_normal((2400, 2))
        c, s = math.cos(0.5), math.sin(0.5)
        amat = 1.5 * np.array([[c, -s], [s, c]])
        shift = np.array([3.0, -2.0])
        spec = DiscriminatorSpec(2, hidden_width=16, spectral_norm=False)
        cfg = EstimatorConfig(alpha=2.0, epochs=50, batch=256, learn_rate=1e-3,
                              seeds=(0, 1, 2, 3, 4))
        direct = estimate_renyi(xp, xq, spec, cfg)
        mapped = estimate_renyi(xp @ amat.T + shift, xq @ amat.T + shift, spec, cfg)
        n_seeds = len(cfg.seeds)
        stderr = math.hypot(
            float(np.std(direct.per_seed, ddof=1)),
            float(np.std(mapped.per_seed, ddof=1)),
        ) / math.sqrt(n_seeds)
        assert abs(mapped.value - direct.value) <= 3 * stderr
        # both sit near the closed-form value alpha * 0.5
        assert direct.value == pytest.approx(1.0, abs=0.2)
        assert mapped.value == pytest.approx(1.0, abs=0.2)

    def test_sample_set_objects_accepted(self):
        from langevin_unlearning.pngd import HyperParams, ModelSampleSet

        rng = np.random.default_rng(59)
        w = rng.standard_normal((40, 2)) * 0.1
        hyper = HyperParams(eta=0.1, sigma=0.1, steps_learn=1, steps_unlearn=1, radius=10.0)
        sets = [
            ModelSampleSet("retrain", w, hyper, 0, 10, 2, seeds=tuple(range(40))),
            ModelSampleSet("unlearn", w + 0.01, hyper, 0, 10, 2, seeds=tuple(range(40))),
        ]
        spec = DiscriminatorSpec(2, hidden_width=4)
        cfg = EstimatorConfig(alpha=2.0, epochs=2, batch=32, seeds=(0,))
        est = estimate_renyi(sets[0], sets[1], spec, cfg)
        assert est.n_p == 40

    def test_estimate_container_validates(self):
        with pytest.raises(ValueError):
            DivergenceEstimate(value=1.0, per_seed=(), objective="dv", alpha=2.0,
                               n_p=4, n_q=4)
        with pytest.raises(ValueError):
            DivergenceEstimate(value=-0.5, per_seed=(-0.5,), objective="dv",
                               alpha=2.0, n_p=4, n_q=4)
