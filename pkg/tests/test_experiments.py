import math

import numpy as np
import pytest

from eocsiren.experiments import (
    TASK_SIZES,
    AdamState,
    Dataset,
    ExperimentReport,
    TrainConfig,
    TrainingDiverged,
    adam_step,
    depth_width_sweep,
    denoise_experiment,
    fit_experiment,
    image_fit_experiment,
    image_grid,
    make_denoise_dataset,
    make_fit_dataset,
    mse,
    nyquist,
    procedural_image,
    psnr,
    run_fit,
    snr,
    spectrum_of_fit,
    target_f1d,
    target_f2d,
    target_f3d,
    train,
)
from eocsiren.initialization import init_network
from eocsiren.network import SirenNet


class TestTargets:
    def test_values_at_origin(self):
        assert target_f1d(0.0) == pytest.approx(1.7 + 0.3 * math.sin(1.0), abs=1e-15)
        assert target_f1d(0.0) == pytest.approx(1.9524, abs=1e-4)
        assert target_f2d(0.0, 0.0) == pytest.approx(0.0907, abs=1e-4)
        assert target_f3d(0.0, 0.0, 0.0) == 1.0

    def test_vectorized(self):
        x = np.linspace(-1, 1, 5)
        np.testing.assert_allclose(target_f1d(x), [target_f1d(v) for v in x])


class TestDatasets:
    @pytest.mark.parametrize("task", ["1d", "2d", "3d"])
    def test_sizes_and_range(self, task):
        d = make_fit_dataset(task, seed=1, n_train=50, n_test=60)
        assert d.x_train.shape == (50, d.n0) and d.x_test.shape == (60, d.n0)
        assert np.all(np.abs(d.x_train) <= 1.0)
        assert d.y_train.shape == (50, 1)

    def test_default_sizes(self):
        d = make_fit_dataset("1d")
        assert (len(d.x_train), len(d.x_test)) == TASK_SIZES["1d"] == (200, 1000)
        assert d.omega0 == 50.0

    def test_omega0_convention(self):
        assert make_fit_dataset("2d", n_train=3600, n_test=10).omega0 == pytest.approx(15.0)
        assert nyquist(64) == 16.0

    def test_disjoint_and_deterministic(self):
        a = make_fit_dataset("1d", seed=4)
        b = make_fit_dataset("1d", seed=4)
        np.testing.assert_array_equal(a.x_train, b.x_train)
        assert not set(a.x_train.ravel()) & set(a.x_test.ravel())
        assert not np.array_equal(a.x_train, make_fit_dataset("1d", seed=5).x_train)

    def test_unknown_task(self):
        with pytest.raises(ValueError):
            make_fit_dataset("4d")


class TestDenoiseData:
    def test_noise_normalization(self):
        img = procedural_image(32)
        d = make_denoise_dataset(img, sigma_noise=0.05, seed=3)
        eta = d.meta["eta"]
        assert eta.mean() == pytest.approx(0.0, abs=1e-14)
        assert eta.std() == pytest.approx(1.0, abs=1e-14)
        np.testing.assert_allclose(d.y_train.ravel() - img.ravel(), 0.05 * eta, atol=1e-15)
        np.testing.assert_array_equal(d.y_test.ravel(), img.ravel())

    def test_frequency_band(self):
        d = make_denoise_dataset(procedural_image(128), seed=0)
        f = np.array(d.meta["fx"] + d.meta["fy"])
        assert d.omega0 == 32.0
        assert np.all((f >= 64) & (f <= 128))
        assert len(d.meta["fx"]) == 20

    def test_zero_noise(self):
        img = procedural_image(8)
        d = make_denoise_dataset(img, sigma_noise=0.0)
        np.testing.assert_array_equal(d.y_train.ravel(), img.ravel())

    def test_hires_reference(self):
        d = make_denoise_dataset(procedural_image(8), test_image=procedural_image(32))
        assert d.x_test.shape == (1024, 2)

    def test_grid_layout(self):
        g = image_grid(3)
        np.testing.assert_array_equal(g[1], [-1.0, 0.0])
        np.testing.assert_array_equal(g[3], [0.0, -1.0])
        img = procedural_image(16)
        assert img.shape == (16, 16) and img.min() >= 0.0 and img.max() <= 1.0

    def test_rejects_non_square(self):
        with pytest.raises(ValueError):
            make_denoise_dataset(np.zeros((4, 5)))


def reference_adam(theta, grad_fn, lr, steps, b1=0.9, b2=0.999, eps=1e-8):
    """Textbook Adam on a list of floats."""
    m = [0.0] * len(theta)
    v = [0.0] * len(theta)
    theta = list(theta)
    for t in range(1, steps + 1):
        g = grad_fn(theta)
        for i in range(len(theta)):
            m[i] = b1 * m[i] + (1 - b1) * g[i]
            v[i] = b2 * v[i] + (1 - b2) * g[i] ** 2
            theta[i] -= lr * (m[i] / (1 - b1**t)) / (math.sqrt(v[i] / (1 - b2**t)) + eps)
    return theta


class TestAdam:
    def test_quadratic_converges(self):
        cfg = TrainConfig(learning_rate=0.1)
        p = [np.array([1.0])]
        state = AdamState.zeros_like(p)
        for _ in range(100):
            adam_step(p, [2 * p[0]], state, cfg)
        assert abs(p[0][0]) < 0.05
        assert state.step == 100

    def test_first_step_is_lr(self):
        cfg = TrainConfig(learning_rate=0.01)
        p = [np.array([3.0, -2.0])]
        adam_step(p, [np.array([5.0, -1e-3])], AdamState.zeros_like(p), cfg)
        np.testing.assert_allclose(p[0], [2.99, -1.99], atol=1e-6)

    def test_matches_reference(self):
        def grad(th):
            return [4 * th[0] ** 3 - th[1], math.cos(th[1]) - th[0]]

        cfg = TrainConfig(learning_rate=0.05)
        p = [np.array([0.7]), np.array([-0.3])]
        state = AdamState.zeros_like(p)
        for _ in range(40):
            g = grad([p[0][0], p[1][0]])
            adam_step(p, [np.array([g[0]]), np.array([g[1]])], state, cfg)
        ref = reference_adam([0.7, -0.3], grad, 0.05, 40)
        assert [p[0][0], p[1][0]] == pytest.approx(ref, abs=1e-13)

    def test_shape_checks(self):
        p = [np.zeros(2)]
        with pytest.raises(ValueError):
            adam_step(p, [np.zeros(3)], AdamState.zeros_like(p), TrainConfig())

    @pytest.mark.parametrize("kw", [dict(epochs=-1), dict(learning_rate=0.0),
                                    dict(adam_beta1=1.0), dict(batch="mini")])
    def test_config_validation(self, kw):
        with pytest.raises(ValueError):
            TrainConfig(**kw)


class TestMetrics:
    def test_mse(self):
        assert mse([1.0, 2.0], [1.0, 4.0]) == 2.0
        with pytest.raises(ValueError):
            mse([1.0], [1.0, 2.0])

    def test_psnr(self):
        assert psnr([0.0, 0.0], [0.1, 0.1]) == pytest.approx(20.0)
        assert psnr([0.5], [0.5]) == math.inf
        assert psnr([0.0], [0.2], peak=2.0) == pytest.approx(20.0)
        with pytest.raises(ValueError):
            psnr([0.0], [1.0], peak=0.0)

    def test_hand_example(self):
        assert mse([1.0, 0.0], [0.0, 0.0]) == 0.5
        assert psnr([1.0, 0.0], [0.0, 0.0]) == pytest.approx(3.0103, abs=1e-4)

    def test_direct_sum_oracle(self):
        rng = np.random.default_rng(11)
        a, b = rng.normal(size=37), rng.normal(size=37)
        direct = sum((float(u) - float(v)) ** 2 for u, v in zip(a, b)) / 37
        assert mse(a, b) == pytest.approx(direct, rel=1e-12)
        assert psnr(a, b, 2.0) == pytest.approx(10 * math.log10(4.0 / direct), rel=1e-12)

    def test_snr(self):
        assert snr([1.0, 1.0], [0.1, 0.1]) == pytest.approx(20.0)
        assert snr([1.0], [0.0]) == math.inf
        assert snr([0.0], [1.0]) == -math.inf


def small_data(n=40):
    x = np.linspace(-1, 1, n)[:, None]
    return Dataset("toy", x, np.sin(3 * x), x, np.sin(3 * x), omega0=2.0)


class TestTraining:
    def test_zero_epochs_is_identity(self):
        net = init_network("sigma1", 2.0, 1, 16, 3, seed=0)
        before = net.flat_params().copy()
        rep, out = train(net, small_data(), TrainConfig(epochs=0))
        np.testing.assert_array_equal(out.flat_params(), before)
        assert rep.loss_curve.size == 0
        assert rep.train_mse == pytest.approx(mse(net(small_data().x_train), small_data().y_train))

    def test_loss_curve_starts_at_init(self):
        net = init_network("sigma1", 2.0, 1, 16, 3, seed=0)
        init_loss = mse(net(small_data().x_train), small_data().y_train)
        rep, _ = train(net, small_data(), TrainConfig(epochs=5, learning_rate=1e-3))
        assert rep.loss_curve[0] == init_loss

    def test_gradient_scale(self):
        """One plain step of size lr*g must lower the loss by about lr*|g|^2."""
        from eocsiren.network import forward, param_gradient

        net = init_network("sitzmann", 2.0, 1, 8, 3, seed=1)
        d = small_data()
        trace = forward(net, d.x_train)
        resid = trace.output - d.y_train
        gw, gb = param_gradient(net, trace, 2.0 / resid.size * resid)
        g = np.concatenate([np.concatenate([w.ravel(), b]) for w, b in zip(gw, gb)])
        theta = net.flat_params()

        def loss(th):
            n = net.copy()
            n.set_flat_params(th)
            return mse(n(d.x_train), d.y_train)

        eps = 1e-7
        assert (loss(theta) - loss(theta - eps * g)) / eps == pytest.approx(g @ g, rel=1e-4)

    def test_constant_target_fits(self):
        x = np.linspace(-1, 1, 30)[:, None]
        data = Dataset("const", x, np.full_like(x, 0.7), x, np.full_like(x, 0.7))
        rep, _ = run_fit(data, "sigma1", 3, 16, TrainConfig(learning_rate=1e-2, epochs=300))
        assert rep.train_mse < 1e-4
        assert rep.loss_curve[-1] < rep.loss_curve[0]

    def test_divergence_detected(self):
        net = init_network("sigma1", 1.0, 1, 4, 3)
        net.biases[-1][:] = np.nan
        with pytest.raises(TrainingDiverged):
            train(net, small_data(), TrainConfig(epochs=2))

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            train(init_network("sigma1", 1.0, 2, 4, 3), small_data(), TrainConfig(epochs=1))

    def test_deterministic(self):
        cfg = TrainConfig(epochs=10, learning_rate=1e-3, seed=3)
        a, _ = run_fit(small_data(), "sitzmann", 3, 8, cfg)
        b, _ = run_fit(small_data(), "sitzmann", 3, 8, cfg)
        np.testing.assert_array_equal(a.loss_curve, b.loss_curve)
        assert a.seed == 3


class TestExperiments:
    def test_fit_rows(self):
        reps = fit_experiment("1d", ["sigma1", "sitzmann"], 3, 8, TrainConfig(epochs=3), seeds=(0, 1))
        assert [(r.seed, r.scheme) for r in reps] == [(0, "sigma1"), (0, "sitzmann"),
                                                      (1, "sigma1"), (1, "sitzmann")]
        assert tuple(reps[0].row()) == ExperimentReport.CSV_FIELDS
        assert reps[0].omega0 == 50.0

    def test_denoise_small(self):
        reps = denoise_experiment(["proposed-sigma0"], m=8, depth=3, width=8,
                                  config=TrainConfig(epochs=2), seeds=(0,), test_factor=2)
        assert reps[0].task == "denoise" and reps[0].extra["noise_var"] == pytest.approx(0.0025)
        assert reps[0].omega0 == 2.0

    def test_image_fit(self):
        reps = image_fit_experiment(procedural_image(8), ["sigma1"], depth=3, width=8,
                                    config=TrainConfig(epochs=2), hires=procedural_image(16), factor=2)
        ex = reps[0].extra
        assert ex["upsampled"].shape == (16, 16)
        assert 0.0 <= ex["upsampled_cutoff_fraction"] <= 1.0
        assert ex["hires_mse"] >= 0

    def test_sweep(self):
        reps = depth_width_sweep("1d", ["sigma1"], [3, 4], [4, 6], TrainConfig(epochs=1))
        assert [(r.depth, r.width) for r in reps] == [(3, 4), (3, 6), (4, 4), (4, 6)]
        with pytest.raises(ValueError):
            depth_width_sweep("1d", [], [3], [4], TrainConfig(epochs=1))

    def test_spectrum_of_fit(self):
        net = init_network("sitzmann", 50.0, 1, 8, 3, seed=0)
        rep = spectrum_of_fit(net, points=512)
        assert rep.cutoff_bin == 16 and len(rep.bins) == 257
