"""Projected noisy gradient descent pipelines.

One update is

    theta' = Pi_R[ theta - eta * g(theta) + xi ],   xi ~ N(0, 2 eta sigma^2 I),

where g is the clipped mean gradient over the pipeline's data pool and Pi_R
projects onto the L2 ball of radius R. The gradient step and the noise are
applied together before the single projection; there is no intermediate
projection between them.

Three pipelines share this update and differ only in data pool, step count,
and start point:

* learn      : full data (public + private retain + forget), steps_learn
               iterations from a fresh projected-Gaussian init.
* unlearn    : retain data only, steps_unlearn iterations continuing from a
               learned vector (and from the learned run's noise stream).
* retrain    : retain data only, steps_learn + steps_unlearn iterations from
               a fresh init.

Randomness is counter-based: draw t of a run is generated by a Philox
generator keyed on (seed, t), so any draw can be reproduced in isolation and
runs with different seeds are independent streams. Counter 0 is the init
draw; step t consumes counter t. Because unlearning continues the learned
run's counters, learn(T) followed by unlearn(K) on a dataset with an empty
forget partition is bit-identical to retrain(T + K) under the same seed.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .model import Dataset, Examples, LossProfile, ParamVector, clipped_mean_gradient, project_ball

__all__ = [
    "HyperParams",
    "NoiseStream",
    "ModelSampleSet",
    "PIPELINES",
    "draw_init",
    "pngd_step",
    "run_learn",
    "run_unlearn",
    "run_retrain",
    "sample_distribution",
]

PIPELINES = ("learn", "unlearn", "retrain")

_UINT64_MAX = 2**64 - 1


@dataclass(frozen=True)
class HyperParams:
    """Shared knobs of the update rule.

    eta is the step size, sigma the noise scale (per-step covariance is
    2 eta sigma^2 I), steps_learn and steps_unlearn the iteration budgets of
    the learn and unlearn phases, and radius the constraint ball.
    """

    eta: float
    sigma: float
    steps_learn: int
    steps_unlearn: int
    radius: float

    def __post_init__(self) -> None:
        if not self.eta > 0:
            raise ValueError("eta must be positive")
        if self.sigma < 0:
            raise ValueError("sigma must be nonnegative")
        if self.steps_learn < 0 or self.steps_unlearn < 0:
            raise ValueError("step counts must be nonnegative")
        if not self.radius > 0:
            raise ValueError("radius must be positive")


@dataclass
class NoiseStream:
    """Counter-based Gaussian stream: draw t is Philox keyed on (seed, t)."""

    seed: int
    counter: int = 0

    def __post_init__(self) -> None:
        if not 0 <= self.seed <= _UINT64_MAX:
            raise ValueError("seed must fit in uint64")
        if self.counter < 0:
            raise ValueError("counter must be nonnegative")

    def standard_normal(self, dim: int) -> np.ndarray:
        """Draw dim iid standard normals and advance the counter."""
        key = np.array([self.seed, self.counter], dtype=np.uint64)
        gen = np.random.Generator(np.random.Philox(key=key))
        self.counter += 1
        return gen.standard_normal(dim)


@dataclass(frozen=True, eq=False)
class ModelSampleSet:
    """Final weight vectors from independent runs of one pipeline.

    samples has one row per run; seeds records each run's stream seed in row
    order. Counts echo the dataset split the pipeline saw.
    """

    pipeline: str
    samples: np.ndarray
    hyper: HyperParams
    n_pub: int
    n_priv: int
    n_forget: int
    seeds: tuple = field(default_factory=tuple)

    def __post_init__(self) -> None:
        if self.pipeline not in PIPELINES:
            raise ValueError(f"unknown pipeline {self.pipeline!r}")
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 2 or samples.shape[0] == 0:
            raise ValueError("samples must be a nonempty (n_models, dim) array")
        if len(self.seeds) != samples.shape[0]:
            raise ValueError("one seed per sample row required")
        norms = np.linalg.norm(samples, axis=1)
        if float(norms.max()) > self.hyper.radius:
            raise ValueError("samples violate the constraint ball")
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds))

    @property
    def n_models(self) -> int:
        return self.samples.shape[0]

    @property
    def dim(self) -> int:
        return self.samples.shape[1]


def draw_init(stream: NoiseStream, dim: int, radius: float) -> ParamVector:
    """Fresh start point: standard Gaussian projected onto the ball."""
    return project_ball(stream.standard_normal(dim), radius)


def pngd_step(
    theta: ParamVector,
    data: Examples,
    hp: HyperParams,
    profile: LossProfile,
    noise: NoiseStream,
) -> ParamVector:
    """One projected noisy update on the given data pool.

    The regularizer strength is read from profile.m (they coincide for this
    loss family). The noise draw is consumed even when sigma is zero so that
    counter bookkeeping does not depend on sigma.
    """
    grad = clipped_mean_gradient(theta.weights, data, lam=profile.m, clip=profile.M)
    xi = noise.standard_normal(theta.dim) * math.sqrt(2.0 * hp.eta) * hp.sigma
    return project_ball(theta.weights - hp.eta * grad + xi, hp.radius)


def run_learn(
    dataset: Dataset,
    hp: HyperParams,
    profile: LossProfile,
    init: ParamVector,
    noise: NoiseStream,
) -> ParamVector:
    """steps_learn updates on the full pool (retain + forget)."""
    data = dataset.full
    theta = init
    for _ in range(hp.steps_learn):
        theta = pngd_step(theta, data, hp, profile, noise)
    return theta


def run_unlearn(
    theta: ParamVector,
    dataset: Dataset,
    hp: HyperParams,
    profile: LossProfile,
    noise: NoiseStream,
) -> ParamVector:
    """steps_unlearn updates on the retain pool, continuing from theta."""
    data = dataset.retain
    for _ in range(hp.steps_unlearn):
        theta = pngd_step(theta, data, hp, profile, noise)
    return theta


def run_retrain(
    dataset: Dataset,
    hp: HyperParams,
    profile: LossProfile,
    init: ParamVector,
    noise: NoiseStream,
    steps: "int | None" = None,
) -> ParamVector:
    """Fresh run on the retain pool; defaults to steps_learn + steps_unlearn."""
    if steps is None:
        steps = hp.steps_learn + hp.steps_unlearn
    if steps < 0:
        raise ValueError("steps must be nonnegative")
    data = dataset.retain
    theta = init
    for _ in range(steps):
        theta = pngd_step(theta, data, hp, profile, noise)
    return theta


def _single_run(
    dataset: Dataset,
    pipeline: str,
    hp: HyperParams,
    profile: LossProfile,
    seed: int,
    init_seed: "int | None",
) -> np.ndarray:
    stream = NoiseStream(seed)
    if init_seed is None:
        init = draw_init(stream, dataset.dim, hp.radius)
    else:
        # pinned shared init: the run stream still reserves counter 0
        init = draw_init(NoiseStream(init_seed), dataset.dim, hp.radius)
        stream.counter = 1
    if pipeline == "learn":
        out = run_learn(dataset, hp, profile, init, stream)
    elif pipeline == "unlearn":
        learned = run_learn(dataset, hp, profile, init, stream)
        out = run_unlearn(learned, dataset, hp, profile, stream)
    elif pipeline == "retrain":
        out = run_retrain(dataset, hp, profile, init, stream)
    else:
        raise ValueError(f"unknown pipeline {pipeline!r}")
    return out.weights


def _run_indexed(args) -> np.ndarray:
    return _single_run(*args)


def sample_distribution(
    dataset: Dataset,
    pipeline: str,
    n_models: int,
    hp: HyperParams,
    profile: LossProfile,
    seed_base: int,
    workers: int = 1,
    init_seed: "int | None" = None,
) -> ModelSampleSet:
    """Run a pipeline n_models times with seeds seed_base, seed_base+1, ...

    Run i uses NoiseStream(seed_base + i), so a single-run call with the same
    derived seed reproduces row i bit-for-bit, and the result does not depend
    on workers. init_seed, when given, pins the init draw of every run to one
    shared stream (the per-run streams then start at counter 1).
    """
    if pipeline not in PIPELINES:
        raise ValueError(f"unknown pipeline {pipeline!r}")
    if n_models <= 0:
        raise ValueError("n_models must be positive")
    if workers < 1:
        raise ValueError("workers must be at least 1")
    seeds = [seed_base + i for i in range(n_models)]
    if seeds[-1] > _UINT64_MAX:
        raise ValueError("seed range exceeds uint64")
    tasks = [(dataset, pipeline, hp, profile, s, init_seed) for s in seeds]
    if workers == 1:
        rows = [_run_indexed(t) for t in tasks]
    else:
        chunk = max(1, n_models // (workers * 4))
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_run_indexed, tasks, chunksize=chunk))
    return ModelSampleSet(
        pipeline=pipeline,
        samples=np.stack(rows),
        hyper=hp,
        n_pub=dataset.n_pub,
        n_priv=dataset.n_priv,
        n_forget=dataset.n_forget,
        seeds=tuple(seeds),
    )
