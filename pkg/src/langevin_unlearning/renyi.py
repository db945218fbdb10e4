"""Sample-based Renyi divergence estimation with a hand-rolled discriminator.

Two variational objectives are available. The Donsker-Varadhan form

    J_dv(phi) = (1/(a-1)) log E_P[exp((a-1) phi)] - (1/a) log E_Q[exp(a phi)]

attains D_a(P||Q)/a at its supremum and is exactly 0 for any constant
witness, so it is the default. The convex-conjugate form

    J_cc(g) = E_Q[g] + (1/(a-1)) E_P[|g|^{(a-1)/a}] + (log a + 1)/a

over strictly negative g is kept behind the ``objective="cc"`` switch; its
constant offset makes it fail the P = Q -> 0 self-test, which the calibration
suite documents rather than hides.

The discriminator is a two-layer perceptron trained by explicit
backpropagation with an adaptive-moment ascent rule; optional spectral
normalization projects each weight matrix back to unit spectral norm after
every update. Reported estimates are D_hat = a * (held-out objective).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

OBJECTIVES = ("dv", "cc")
OUTPUT_ACTIVATIONS = ("identity", "polysoftplus")

_ADAM_BETA1 = 0.9
_ADAM_BETA2 = 0.999
_ADAM_EPS = 1e-8


def polysoftplus(x):
    """Strictly negative C^1 squashing: -1/(1-x) below 0, -(1+x) above."""
    x = np.asarray(x, dtype=np.float64)
    with np.errstate(divide="ignore"):  # discarded branch at x = 1
        out = np.where(x < 0, -1.0 / (1.0 - x), -(1.0 + x))
    return out if out.ndim else float(out)


def polysoftplus_slope(x):
    # d/dx of both branches meets at -1 in x = 0
    x = np.asarray(x, dtype=np.float64)
    out = np.where(x < 0, -1.0 / (1.0 - x) ** 2, -1.0)
    return out if out.ndim else float(out)


def spectral_normalize(w, iters=200, tol=1e-12):
    """Divide a matrix by its top singular value (power iteration).

    Returns (normalized, degenerate). A zero matrix cannot be normalized and
    comes back unchanged with degenerate=True. The iteration cap leaves the
    result within ~1e-4 of unit norm even for nearly degenerate top singular
    pairs, and far tighter for generic matrices.
    """
    w = np.asarray(w, dtype=np.float64)
    if w.ndim != 2:
        raise ValueError("expected a matrix")
    if not np.any(w):
        return w.copy(), True
    # deterministic start so repeated calls agree bit for bit
    u = np.ones(w.shape[0]) / math.sqrt(w.shape[0])
    sigma = 0.0
    for _ in range(iters):
        v = w.T @ u
        v_norm = float(np.linalg.norm(v))
        if v_norm == 0.0:
            break
        v /= v_norm
        u = w @ v
        u_norm = float(np.linalg.norm(u))
        if u_norm == 0.0:
            break
        u /= u_norm
        new_sigma = float(u @ w @ v)
        if abs(new_sigma - sigma) <= tol * max(1.0, abs(new_sigma)):
            sigma = new_sigma
            break
        sigma = new_sigma
    if sigma <= 0.0:
        return w.copy(), True
    return w / sigma, False


@dataclass(frozen=True)
class DiscriminatorSpec:
    """Shape of the two-layer witness network."""

    input_dim: int
    hidden_width: int = 64
    leaky_slope: float = 0.2
    output_activation: str = "identity"
    spectral_norm: bool = True

    def __post_init__(self) -> None:
        if self.input_dim < 1 or self.hidden_width < 1:
            raise ValueError("input_dim and hidden_width must be >= 1")
        if not 0 < self.leaky_slope <= 1:
            raise ValueError("leaky_slope must lie in (0, 1]")
        if self.output_activation not in OUTPUT_ACTIVATIONS:
            raise ValueError(f"unknown output activation {self.output_activation!r}")


@dataclass(frozen=True)
class EstimatorConfig:
    alpha: float
    epochs: int = 50
    batch: int = 256
    learn_rate: float = 1e-4
    seeds: tuple = (0, 1, 2, 3, 4)
    objective: str = "dv"

    def __post_init__(self) -> None:
        if self.alpha <= 1:
            raise ValueError("alpha must exceed 1")
        if self.epochs < 1 or self.batch < 1:
            raise ValueError("epochs and batch must be >= 1")
        if self.learn_rate <= 0:
            raise ValueError("learn_rate must be positive")
        if len(self.seeds) == 0:
            raise ValueError("at least one seed required")
        if self.objective not in OBJECTIVES:
            raise ValueError(f"unknown objective {self.objective!r}")


@dataclass(frozen=True)
class DivergenceEstimate:
    """Clamped mean estimate plus the raw per-seed values behind it."""

    value: float
    per_seed: tuple
    objective: str
    alpha: float
    n_p: int
    n_q: int

    def __post_init__(self) -> None:
        if len(self.per_seed) == 0:
            raise ValueError("per_seed must be nonempty")
        mean = sum(self.per_seed) / len(self.per_seed)
        if abs(self.value - max(0.0, mean)) > 1e-9 * max(1.0, abs(mean)):
            raise ValueError("value must be the clamped mean of per_seed")


def _scaled_log_mean_exp(scale: float, values: np.ndarray) -> float:
    # (1/scale) log mean exp(scale * v), shifted so a constant vector passes
    # through unchanged (gives the exact c - c = 0 cancellation downstream)
    peak = float(values.max())
    return peak + math.log(float(np.mean(np.exp(scale * (values - peak))))) / scale


def dv_objective(phi_on_p, phi_on_q, alpha: float) -> float:
    phi_on_p = np.asarray(phi_on_p, dtype=np.float64)
    phi_on_q = np.asarray(phi_on_q, dtype=np.float64)
    if phi_on_p.size == 0 or phi_on_q.size == 0:
        raise ValueError("both sample lists must be nonempty")
    if alpha <= 1:
        raise ValueError("alpha must exceed 1")
    return _scaled_log_mean_exp(alpha - 1.0, phi_on_p) - _scaled_log_mean_exp(
        alpha, phi_on_q
    )


def cc_objective(g_on_q, g_on_p, alpha: float) -> float:
    g_on_q = np.asarray(g_on_q, dtype=np.float64)
    g_on_p = np.asarray(g_on_p, dtype=np.float64)
    if g_on_q.size == 0 or g_on_p.size == 0:
        raise ValueError("both sample lists must be nonempty")
    if alpha <= 1:
        raise ValueError("alpha must exceed 1")
    if g_on_q.max() >= 0 or g_on_p.max() >= 0:
        raise ValueError("cc objective requires strictly negative witness values")
    power = (alpha - 1.0) / alpha
    return (
        float(g_on_q.mean())
        + float(np.mean(np.abs(g_on_p) ** power)) / (alpha - 1.0)
        + (math.log(alpha) + 1.0) / alpha
    )


@dataclass
class TwoLayerDiscriminator:
    """Explicit parameters; forward/backward are plain array algebra."""

    spec: DiscriminatorSpec
    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: float

    @classmethod
    def initialize(cls, spec: DiscriminatorSpec, rng: np.random.Generator):
        w1 = rng.standard_normal((spec.hidden_width, spec.input_dim))
        w1 /= math.sqrt(spec.input_dim)
        w2 = rng.standard_normal(spec.hidden_width) / math.sqrt(spec.hidden_width)
        disc = cls(spec, w1, np.zeros(spec.hidden_width), w2, 0.0)
        disc.project()
        return disc

    def project(self) -> None:
        if not self.spec.spectral_norm:
            return
        self.w1, _ = spectral_normalize(self.w1)
        w2, _ = spectral_normalize(self.w2[None, :])
        self.w2 = w2[0]

    def forward(self, x: np.ndarray):
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        z1 = x @ self.w1.T + self.b1
        a1 = np.where(z1 > 0, z1, self.spec.leaky_slope * z1)
        z2 = a1 @ self.w2 + self.b2
        if self.spec.output_activation == "polysoftplus":
            out = polysoftplus(z2)
        else:
            out = z2
        return out, (x, z1, a1, z2)

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return self.forward(x)[0]

    def backward(self, cache, d_out: np.ndarray):
        """Gradients of sum(d_out * output) with respect to each parameter."""
        x, z1, a1, z2 = cache
        if self.spec.output_activation == "polysoftplus":
            dz2 = d_out * polysoftplus_slope(z2)
        else:
            dz2 = d_out
        dw2 = a1.T @ dz2
        db2 = float(dz2.sum())
        da1 = dz2[:, None] * self.w2[None, :]
        dz1 = da1 * np.where(z1 > 0, 1.0, self.spec.leaky_slope)
        dw1 = dz1.T @ x
        db1 = dz1.sum(axis=0)
        return dw1, db1, dw2, db2


def _softmax(values: np.ndarray) -> np.ndarray:
    shifted = values - values.max()
    weights = np.exp(shifted)
    return weights / weights.sum()


def _objective_and_output_grads(out_p, out_q, alpha, objective):
    """Objective value plus dJ/d(output) on each sample set."""
    if objective == "dv":
        value = dv_objective(out_p, out_q, alpha)
        grad_p = _softmax((alpha - 1.0) * out_p)
        grad_q = -_softmax(alpha * out_q)
    else:
        value = cc_objective(out_q, out_p, alpha)
        grad_q = np.full(out_q.shape, 1.0 / out_q.size)
        grad_p = -np.abs(out_p) ** (-1.0 / alpha) / (alpha * out_p.size)
    return value, grad_p, grad_q


def _as_samples(obj) -> np.ndarray:
    samples = getattr(obj, "samples", obj)
    samples = np.asarray(samples, dtype=np.float64)
    if samples.ndim == 1:
        samples = samples[:, None]
    if samples.ndim != 2 or samples.shape[0] == 0:
        raise ValueError("expected a nonempty (n, dim) sample array")
    return samples


def train_discriminator(p_samples, q_samples, spec: DiscriminatorSpec,
                        cfg: EstimatorConfig, seed: int):
    """Gradient-ascent training; returns (discriminator, per-epoch trace).

    trace[0] is the objective of the freshly initialized network on the full
    training stream; trace[k] the value after epoch k.
    """
    xp = _as_samples(p_samples)
    xq = _as_samples(q_samples)
    if xp.shape[1] != xq.shape[1]:
        raise ValueError("sample sets disagree on dimension")
    if xp.shape[1] != spec.input_dim:
        raise ValueError("sample dimension does not match spec.input_dim")
    if cfg.objective == "cc" and spec.output_activation != "polysoftplus":
        raise ValueError("cc objective needs the strictly negative output activation")

    rng = np.random.default_rng(seed)
    disc = TwoLayerDiscriminator.initialize(spec, rng)

    params = [disc.w1, disc.b1, disc.w2, np.array(disc.b2)]
    moment1 = [np.zeros_like(p) for p in params]
    moment2 = [np.zeros_like(p) for p in params]
    step = 0

    def full_objective(label: str) -> float:
        value, _, _ = _objective_and_output_grads(
            disc(xp), disc(xq), cfg.alpha, cfg.objective
        )
        if math.isnan(value):
            raise ArithmeticError(
                f"objective became NaN {label} (seed {seed}); lower the "
                "learning rate or check the sample scales"
            )
        return value

    trace = [full_objective("at initialization")]
    n_p, n_q = xp.shape[0], xq.shape[0]
    steps_per_epoch = max(1, math.ceil(max(n_p, n_q) / cfg.batch))
    take_p = np.arange(min(cfg.batch, n_p))
    take_q = np.arange(min(cfg.batch, n_q))

    for epoch in range(cfg.epochs):
        perm_p = rng.permutation(n_p)
        perm_q = rng.permutation(n_q)
        for s in range(steps_per_epoch):
            bp = xp[perm_p[(s * cfg.batch + take_p) % n_p]]
            bq = xq[perm_q[(s * cfg.batch + take_q) % n_q]]
            out_p, cache_p = disc.forward(bp)
            out_q, cache_q = disc.forward(bq)
            _, grad_p, grad_q = _objective_and_output_grads(
                out_p, out_q, cfg.alpha, cfg.objective
            )
            gp = disc.backward(cache_p, grad_p)
            gq = disc.backward(cache_q, grad_q)
            grads = [a + b for a, b in zip(gp, gq)]

            step += 1
            scale1 = 1.0 - _ADAM_BETA1**step
            scale2 = 1.0 - _ADAM_BETA2**step
            new = []
            for p, g, m1, m2 in zip(params, grads, moment1, moment2):
                m1 *= _ADAM_BETA1
                m1 += (1 - _ADAM_BETA1) * g
                m2 *= _ADAM_BETA2
                m2 += (1 - _ADAM_BETA2) * g * g
                # ascent on the variational objective
                new.append(
                    p + cfg.learn_rate * (m1 / scale1) / (np.sqrt(m2 / scale2) + _ADAM_EPS)
                )
            disc.w1, disc.b1, disc.w2 = new[0], new[1], new[2]
            disc.b2 = float(new[3])
            disc.project()
            params = [disc.w1, disc.b1, disc.w2, np.array(disc.b2)]

        trace.append(full_objective(f"at epoch {epoch + 1}"))
    return disc, np.array(trace)


def estimate_renyi(p_samples, q_samples, spec: DiscriminatorSpec,
                   cfg: EstimatorConfig) -> DivergenceEstimate:
    """Train per seed on first halves, score on held-out second halves.

    P carries the numerator distribution (retrained models), Q the
    denominator (unlearned models). The reported value is
    max(0, mean over seeds) of alpha * held-out objective.
    """
    xp = _as_samples(p_samples)
    xq = _as_samples(q_samples)
    if xp.shape[0] < 4 or xq.shape[0] < 4:
        raise ValueError("need at least 4 samples per distribution")
    half_p = xp.shape[0] // 2
    half_q = xq.shape[0] // 2
    per_seed = []
    for seed in cfg.seeds:
        disc, _ = train_discriminator(xp[:half_p], xq[:half_q], spec, cfg, seed)
        held_out, _, _ = _objective_and_output_grads(
            disc(xp[half_p:]), disc(xq[half_q:]), cfg.alpha, cfg.objective
        )
        per_seed.append(cfg.alpha * held_out)
    mean = sum(per_seed) / len(per_seed)
    return DivergenceEstimate(
        value=max(0.0, mean),
        per_seed=tuple(per_seed),
        objective=cfg.objective,
        alpha=cfg.alpha,
        n_p=xp.shape[0],
        n_q=xq.shape[0],
    )


def gaussian_renyi_oracle(mu1: float, var1: float, mu2: float, var2: float,
                          alpha: float) -> float:
    """Closed-form order-alpha divergence between univariate Gaussians."""
    if var1 <= 0 or var2 <= 0:
        raise ValueError("variances must be positive")
    if alpha <= 1:
        raise ValueError("alpha must exceed 1")
    var_mix = (1.0 - alpha) * var1 + alpha * var2
    if var_mix <= 0:
        return math.inf
    gap = mu1 - mu2
    term_mean = alpha * gap * gap / (2.0 * var_mix)
    term_var = math.log(
        math.sqrt(var_mix) / (var1 ** ((1.0 - alpha) / 2.0) * var2 ** (alpha / 2.0))
    ) / (1.0 - alpha)
    return term_mean + term_var
