"""Fitting and denoising experiments: targets, datasets, Adam, training, sweeps.

Frequencies follow the cycles-per-unit convention: a uniform grid of ``M``
points on ``[-1, 1]`` has Nyquist frequency ``M / 4``, and that number is
used directly as ``omega0`` for the first layer.
"""
from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .diagnostics import output_spectrum, signal_spectrum
from .initialization import InitScheme, resolve_scheme, sample_network
from .linalg import Rng
from .network import SirenNet, forward, param_gradient


class TrainingDiverged(RuntimeError):
    """Loss became non-finite during training."""


# ---------------------------------------------------------------- targets

def target_f1d(x):
    x = np.asarray(x, dtype=np.float64)
    return np.sin(3 * x) + 0.7 * np.cos(8 * x) + 0.3 * np.sin(40 * x + 1) + np.exp(-x * x)


def target_f2d(x, y):
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    return np.sin(3 * x) * np.cos(3 * y) + np.sin(15 * x - 2) * np.cos(15 * y) + np.exp(-(x * x + y * y))


def target_f3d(x, y, z):
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    z = np.asarray(z, dtype=np.float64)
    return np.sin(5 * x) * np.cos(12 * y) * np.sin(3 * z) + np.exp(-(x * x + y * y + z * z))


TARGETS = {"1d": (1, target_f1d), "2d": (2, target_f2d), "3d": (3, target_f3d)}
# (train, test) sizes per task
TASK_SIZES = {"1d": (200, 1000), "2d": (3600, 10000), "3d": (8000, 20000)}


def nyquist(points_per_axis: float) -> float:
    """Nyquist frequency (cycles per unit) of a uniform grid on [-1, 1]."""
    return points_per_axis / 4.0


# --------------------------------------------------------------- datasets

@dataclass
class Dataset:
    name: str
    x_train: np.ndarray
    y_train: np.ndarray
    x_test: np.ndarray
    y_test: np.ndarray
    domain: tuple = (-1.0, 1.0)
    omega0: float = 1.0
    meta: dict = field(default_factory=dict)

    @property
    def n0(self) -> int:
        return self.x_train.shape[1]


def make_fit_dataset(task: str, seed: int = 0, n_train: int | None = None,
                     n_test: int | None = None) -> Dataset:
    """Random train/test points in ``[-1, 1]^d`` labelled by the task's target."""
    if task not in TARGETS:
        raise ValueError(f"unknown task {task!r}; choose from {sorted(TARGETS)}")
    dim, fn = TARGETS[task]
    default_train, default_test = TASK_SIZES[task]
    n_train = default_train if n_train is None else n_train
    n_test = default_test if n_test is None else n_test
    rng = Rng(seed).split(0)
    x_train = rng.uniform(-1.0, 1.0, size=(n_train, dim))
    x_test = rng.uniform(-1.0, 1.0, size=(n_test, dim))
    # continuous draws almost never collide, but the split contract is exact
    train_keys = {row.tobytes() for row in x_train}
    clash = np.array([row.tobytes() in train_keys for row in x_test])
    x_test = x_test[~clash]
    y_train = fn(*x_train.T)[:, None]
    y_test = fn(*x_test.T)[:, None]
    omega0 = nyquist(n_train ** (1.0 / dim))
    return Dataset(task, x_train, y_train, x_test, y_test, (-1.0, 1.0), omega0,
                   {"n_train": n_train, "n_test": int(x_test.shape[0]), "seed": seed})


def image_grid(m: int) -> np.ndarray:
    """Pixel centres of an ``m x m`` image on ``[-1, 1]^2``, row-major, shape (m*m, 2)."""
    g = np.linspace(-1.0, 1.0, m)
    return np.stack(np.meshgrid(g, g, indexing="ij"), axis=-1).reshape(-1, 2)


def procedural_image_fn(x, y):
    """Radial chirp with a bright rectangle and a dark disc, values in [0, 1]."""
    r2 = x * x + y * y
    v = 0.45 + 0.25 * np.cos(2 * np.pi * 3 * r2) * np.exp(-r2)
    v = v + 0.3 * ((np.abs(x + 0.4) < 0.3) & (np.abs(y - 0.35) < 0.25))
    v = v - 0.25 * ((x - 0.3) ** 2 + (y + 0.35) ** 2 < 0.09)
    return np.clip(v, 0.0, 1.0)


def procedural_image(m: int) -> np.ndarray:
    pts = image_grid(m)
    return procedural_image_fn(pts[:, 0], pts[:, 1]).reshape(m, m)


def noise_field(points, k: int, f_nyq: float, rng: Rng):
    """Sum of ``k`` plane waves with frequencies drawn from ``U(2 f_nyq, 4 f_nyq)``."""
    fx = rng.uniform(2 * f_nyq, 4 * f_nyq, size=k)
    fy = rng.uniform(2 * f_nyq, 4 * f_nyq, size=k)
    phase = rng.uniform(0.0, 2 * np.pi, size=k)
    eta = np.sin(2 * np.pi * (np.outer(points[:, 0], fx) + np.outer(points[:, 1], fy)) + phase).sum(axis=1)
    return eta, fx, fy


def make_denoise_dataset(image, k: int = 20, f_nyq: float | None = None, sigma_noise: float = 0.05,
                         seed: int = 0, test_image=None) -> Dataset:
    """Noisy training pixels plus the clean image as test reference.

    The noise field is shifted and scaled to exactly zero mean and unit
    variance over the training grid before multiplying by ``sigma_noise``.
    ``test_image`` (a finer clean rendering of the same scene) replaces the
    native-resolution clean image as the test reference when given.
    """
    img = np.asarray(image, dtype=np.float64)
    if img.ndim != 2 or img.shape[0] != img.shape[1]:
        raise ValueError("expected a square greyscale image")
    m = img.shape[0]
    f_nyq = nyquist(m) if f_nyq is None else f_nyq
    x = image_grid(m)
    y = img.reshape(-1, 1)
    eta, fx, fy = noise_field(x, k, f_nyq, Rng(seed).split(0))
    eta = eta - eta.mean()
    std = eta.std()
    eta = eta / std if std > 0 else eta
    noisy = y + sigma_noise * eta[:, None] if sigma_noise else y.copy()
    if test_image is None:
        x_test, y_test = x, y.copy()
    else:
        t = np.asarray(test_image, dtype=np.float64)
        x_test, y_test = image_grid(t.shape[0]), t.reshape(-1, 1)
    return Dataset("denoise", x, noisy, x_test, y_test, (-1.0, 1.0), f_nyq,
                   {"m": m, "k": k, "f_nyq": f_nyq, "sigma_noise": sigma_noise, "seed": seed,
                    "fx": fx.tolist(), "fy": fy.tolist(), "eta": eta})


# ------------------------------------------------------------------- Adam

@dataclass
class TrainConfig:
    learning_rate: float = 1e-4
    epochs: int = 5000
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    seed: int = 0
    batch: str = "full"

    def __post_init__(self):
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        if not (0 < self.adam_beta1 < 1 and 0 < self.adam_beta2 < 1):
            raise ValueError("Adam betas must lie in (0, 1)")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.batch != "full":
            raise ValueError("only full-batch training is supported")


@dataclass
class AdamState:
    m: list
    v: list
    step: int = 0

    @classmethod
    def zeros_like(cls, params) -> "AdamState":
        return cls([np.zeros_like(p) for p in params], [np.zeros_like(p) for p in params], 0)


def adam_step(params, grads, state: AdamState, config: TrainConfig):
    """One bias-corrected Adam update, applied to ``params`` in place."""
    if len(params) != len(grads) or len(params) != len(state.m):
        raise ValueError("params, grads and state must have the same length")
    b1, b2, eps = config.adam_beta1, config.adam_beta2, config.adam_eps
    state.step += 1
    c1 = 1.0 - b1**state.step
    c2 = 1.0 - b2**state.step
    for p, g, m, v in zip(params, grads, state.m, state.v):
        if p.shape != g.shape or p.shape != m.shape:
            raise ValueError(f"shape mismatch {p.shape} vs {g.shape}")
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * g * g
        p -= config.learning_rate * (m / c1) / (np.sqrt(v / c2) + eps)
    return params, state


# ---------------------------------------------------------------- metrics

def mse(a, b) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    return float(np.mean((a - b) ** 2))


def psnr(a, b, peak: float = 1.0) -> float:
    """Peak signal-to-noise ratio in dB; identical inputs give ``inf``."""
    if peak <= 0:
        raise ValueError("peak must be positive")
    err = mse(a, b)
    return math.inf if err == 0 else 10.0 * math.log10(peak * peak / err)


def snr(signal, residual) -> float:
    s = np.asarray(signal, dtype=np.float64)
    r = np.asarray(residual, dtype=np.float64)
    if s.shape != r.shape:
        raise ValueError(f"shape mismatch {s.shape} vs {r.shape}")
    num = float(np.sum(s * s))
    den = float(np.sum(r * r))
    if den == 0:
        return math.inf
    return 10.0 * math.log10(num / den) if num > 0 else -math.inf


# --------------------------------------------------------------- training

@dataclass
class ExperimentReport:
    task: str
    scheme: str
    depth: int
    width: int
    seed: int
    train_mse: float
    test_mse: float
    psnr: float
    snr: float
    epochs: int
    lr: float
    omega0: float
    wall_s: float
    loss_curve: np.ndarray = field(repr=False)
    config: dict = field(default_factory=dict, repr=False)
    extra: dict = field(default_factory=dict, repr=False)

    CSV_FIELDS = ("task", "scheme", "L", "N", "seed", "train_mse", "test_mse", "psnr", "snr",
                  "epochs", "lr", "omega0", "wall_s")

    def row(self) -> dict:
        return {"task": self.task, "scheme": self.scheme, "L": self.depth, "N": self.width,
                "seed": self.seed, "train_mse": self.train_mse, "test_mse": self.test_mse,
                "psnr": self.psnr, "snr": self.snr, "epochs": self.epochs, "lr": self.lr,
                "omega0": self.omega0, "wall_s": self.wall_s}

    def rows(self) -> list[dict]:
        return [self.row()]


def _evaluate(net: SirenNet, x, y, peak: float | None = None):
    pred = net(x)
    err = mse(pred, y)
    peak = float(np.max(np.abs(y))) if peak is None else peak
    return pred, err, psnr(pred, y, peak if peak > 0 else 1.0), snr(y, y - pred)


def train(net: SirenNet, data: Dataset, config: TrainConfig, peak: float | None = None,
          scheme: str | None = None) -> tuple[ExperimentReport, SirenNet]:
    """Full-batch Adam on the mean squared error; ``net`` is updated in place.

    ``loss_curve[t]`` is the training loss before update ``t + 1``, so the
    first entry is the loss of the initial network.
    """
    if data.n0 != net.n0 or data.y_train.shape[1] != net.d_out:
        raise ValueError("dataset dimensions do not match the network")
    start = time.perf_counter()
    x, y = data.x_train, data.y_train
    params = net.weights + net.biases
    state = AdamState.zeros_like(params)
    curve = np.empty(config.epochs)
    scale = 2.0 / y.size
    for t in range(config.epochs):
        trace = forward(net, x)
        resid = trace.output - y
        loss = float(np.mean(resid * resid))
        if not math.isfinite(loss):
            raise TrainingDiverged(f"loss became {loss} at epoch {t}")
        curve[t] = loss
        gw, gb = param_gradient(net, trace, scale * resid)
        adam_step(params, gw + gb, state, config)
    _, train_err, _, _ = _evaluate(net, x, y, peak)
    if not math.isfinite(train_err):
        raise TrainingDiverged(f"final training loss is {train_err}")
    _, test_err, test_psnr, test_snr = _evaluate(net, data.x_test, data.y_test, peak)
    report = ExperimentReport(
        data.name, scheme or net.scheme, net.depth, net.weights[0].shape[0],
        net.seed if net.seed is not None else config.seed, train_err, test_err, test_psnr,
        test_snr, config.epochs, config.learning_rate, net.omega0,
        time.perf_counter() - start, curve, asdict(config))
    return report, net


def run_fit(data: Dataset, scheme, depth: int, width: int, config: TrainConfig,
            omega0: float | None = None, peak: float | None = None):
    """Sample a network for ``scheme`` from ``config.seed`` and train it on ``data``."""
    scheme = InitScheme.parse(scheme) if isinstance(scheme, str) else scheme
    omega0 = data.omega0 if omega0 is None else omega0
    params = resolve_scheme(scheme, omega0, data.n0, width, depth, data.y_train.shape[1])
    net = sample_network(params, Rng(config.seed).split(1), config.seed)
    return train(net, data, config, peak, scheme.label)


def fit_experiment(task: str, schemes, depth: int, width: int, config: TrainConfig,
                   seeds=(0,), omega0: float | None = None) -> list[ExperimentReport]:
    """Train every scheme on the synthetic ``task`` for each seed."""
    out = []
    for seed in seeds:
        data = make_fit_dataset(task, seed)
        cfg = TrainConfig(**{**asdict(config), "seed": seed})
        for s in schemes:
            out.append(run_fit(data, s, depth, width, cfg, omega0)[0])
    return out


def denoise_experiment(schemes, m: int = 64, depth: int = 10, width: int = 64,
                       config: TrainConfig | None = None, seeds=(0,), k: int = 20,
                       sigma_noise: float = 0.05, test_factor: int = 4,
                       image=None, test_image=None, omega0: float | None = None):
    """Train on a noise-corrupted image and score against the clean reference.

    Without ``image`` the procedural scene is used, and the reference is the
    same scene rendered at ``test_factor`` times the training resolution.
    """
    config = config or TrainConfig(learning_rate=1e-3, epochs=1000)
    if image is None:
        image = procedural_image(m)
        test_image = procedural_image(m * test_factor) if test_image is None else test_image
    out = []
    for seed in seeds:
        data = make_denoise_dataset(image, k, None, sigma_noise, seed, test_image)
        cfg = TrainConfig(**{**asdict(config), "seed": seed})
        for s in schemes:
            rep, _ = run_fit(data, s, depth, width, cfg, omega0, peak=1.0)
            rep.extra["noise_var"] = sigma_noise**2
            out.append(rep)
    return out


def image_fit_experiment(image, schemes, depth: int = 10, width: int = 128,
                         config: TrainConfig | None = None, hires=None, factor: int = 4,
                         omega0: float | None = None, seed: int = 0):
    """Fit a square greyscale image and evaluate on a ``factor`` times finer grid.

    Each report's ``extra`` holds the upsampled field, its MSE/PSNR against
    ``hires`` when supplied, and the mean row-wise cutoff energy fraction of
    the upsampled output.
    """
    img = np.asarray(image, dtype=np.float64)
    m = img.shape[0]
    config = config or TrainConfig(seed=seed)
    x = image_grid(m)
    xt = image_grid(m * factor)
    data = Dataset("image", x, img.reshape(-1, 1), x, img.reshape(-1, 1), (-1.0, 1.0), nyquist(m),
                   {"m": m, "factor": factor})
    out = []
    for s in schemes:
        rep, net = run_fit(data, s, depth, width, config, omega0, peak=1.0)
        up = net(xt).reshape(m * factor, m * factor)
        step = 2.0 / (m * factor - 1)
        fr = [signal_spectrum(row, -1.0, 1.0 + step, net.omega0).cutoff_energy_fraction
              for row in up]
        rep.extra.update({"upsampled": up, "upsampled_cutoff_fraction": float(np.mean(fr))})
        if hires is not None:
            h = np.asarray(hires, dtype=np.float64)
            rep.extra["hires_mse"] = mse(up, h)
            rep.extra["hires_psnr"] = psnr(up, h, 1.0)
        out.append(rep)
    return out


def depth_width_sweep(task: str, schemes, depths, widths, config: TrainConfig, seeds=(0,),
                      omega0: float | None = None) -> list[ExperimentReport]:
    """Cross product of schemes, depths and widths; each cell reuses the same seeds."""
    if not (list(schemes) and list(depths) and list(widths)):
        raise ValueError("schemes, depths and widths must be non-empty")
    out = []
    for seed in seeds:
        data = make_fit_dataset(task, seed)
        cfg = TrainConfig(**{**asdict(config), "seed": seed})
        for s in schemes:
            for L in depths:
                for n in widths:
                    out.append(run_fit(data, s, L, n, cfg, omega0)[0])
    return out


def spectrum_of_fit(net: SirenNet, points: int = 2048):
    """Cutoff energy report of a trained scalar net on a fine 1-D grid."""
    grid = -1.0 + 2.0 * np.arange(points) / points
    return output_spectrum(net, grid, net.omega0, (-1.0, 1.0))
