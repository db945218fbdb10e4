"""Likelihood-ratio test telling unlearned weights from retrained ones.

A designated example is scored on every model; shadow sets from each pipeline
give Gaussian fits of the score distribution; Bayes' rule under a uniform
prior turns a test model's score into a posterior probability of coming from
the unlearning pipeline. Accuracy counts thresholded posteriors (ties at
exactly 0.5 count as errors), and the per-model confidence is the posterior
assigned to the model's true origin.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import LabeledExample
from .pngd import ModelSampleSet

_CLAMP = 1e-12
VARIANCE_FLOOR = 1e-12


def logit_rescale(omega: float) -> float:
    """log(w / (1-w)), clamping the endpoints to [1e-12, 1-1e-12] first.

    The saturated values are exact negatives of each other; evaluating the
    upper one through the raw formula would lose ~1e-4 relative accuracy to
    cancellation in 1-w.
    """
    omega = float(omega)
    if not 0.0 <= omega <= 1.0:
        raise ValueError("confidence must lie in [0, 1]")
    if omega <= _CLAMP:
        return math.log(_CLAMP / (1.0 - _CLAMP))
    if omega >= 1.0 - _CLAMP:
        return -math.log(_CLAMP / (1.0 - _CLAMP))
    return math.log(omega / (1.0 - omega))


def score_model(theta, example: LabeledExample) -> float:
    """Rescaled confidence the model assigns to the example's true label.

    logit(sigmoid(margin)) is the margin itself analytically; the clamped
    composition saturates at +-log(1e12) for extreme margins.
    """
    weights = np.asarray(getattr(theta, "weights", theta), dtype=np.float64)
    if weights.shape != example.features.shape:
        raise ValueError("model and example dimensions differ")
    margin = float(example.label) * float(weights @ example.features)
    # stable sigmoid, scalar case
    if margin >= 0:
        confidence = 1.0 / (1.0 + math.exp(-margin))
    else:
        e = math.exp(margin)
        confidence = e / (1.0 + e)
    return logit_rescale(confidence)


@dataclass(frozen=True)
class GaussianFit:
    mu: float
    var: float
    n: int
    floored: bool = False

    def __post_init__(self) -> None:
        if self.n < 2:
            raise ValueError("a Gaussian fit needs at least 2 scores")
        if self.var < VARIANCE_FLOOR:
            raise ValueError("variance below the floor")

    def log_density(self, score: float) -> float:
        gap = score - self.mu
        return -0.5 * (math.log(2.0 * math.pi * self.var) + gap * gap / self.var)


def fit_gaussian(scores) -> GaussianFit:
    scores = np.asarray(scores, dtype=np.float64)
    if scores.ndim != 1 or scores.size < 2:
        raise ValueError("need at least 2 scores")
    var = float(np.var(scores, ddof=1))
    floored = var < VARIANCE_FLOOR
    return GaussianFit(
        mu=float(scores.mean()),
        var=max(var, VARIANCE_FLOOR),
        n=int(scores.size),
        floored=floored,
    )


def ulira_posterior(score: float, fit_u: GaussianFit, fit_r: GaussianFit) -> float:
    """P(unlearned | score) under equal priors, via the log-density gap.

    Working in log space means neither density ever underflows to 0/0; the
    posterior and its fit-swapped complement add to 1 exactly (the smaller
    branch is computed as 1 minus the larger, which is exact there).
    """
    diff = fit_u.log_density(score) - fit_r.log_density(score)
    if diff >= 0:
        return 1.0 / (1.0 + math.exp(-diff))
    return 1.0 - 1.0 / (1.0 + math.exp(diff))


@dataclass(frozen=True)
class AttackReport:
    """Per-model posteriors plus the thresholded summary."""

    posteriors: tuple
    origins: tuple  # "unlearn" / "retrain" per test model
    accuracy: float
    confidence_quartiles: tuple  # (q25, median, q75) of true-origin posterior
    fit_u: GaussianFit
    fit_r: GaussianFit

    def __post_init__(self) -> None:
        if len(self.posteriors) != len(self.origins):
            raise ValueError("one origin per posterior required")
        if any(not 0.0 <= p <= 1.0 for p in self.posteriors):
            raise ValueError("posteriors must lie in [0, 1]")
        if not 0.0 <= self.accuracy <= 1.0:
            raise ValueError("accuracy must lie in [0, 1]")

    @property
    def median_confidence(self) -> float:
        return self.confidence_quartiles[1]


def _score_set(samples: ModelSampleSet, example: LabeledExample) -> np.ndarray:
    return np.array([score_model(row, example) for row in samples.samples])


def run_attack(samples_u: ModelSampleSet, samples_r: ModelSampleSet,
               test_u: ModelSampleSet, test_r: ModelSampleSet,
               forget_example: LabeledExample) -> AttackReport:
    """Fit on shadow sets, classify the test sets, report the attack summary."""
    for shadow, test in ((samples_u, test_u), (samples_r, test_r)):
        if shadow.pipeline == test.pipeline and set(shadow.seeds) & set(test.seeds):
            raise ValueError("shadow and test sets overlap (shared run seeds)")

    fit_u = fit_gaussian(_score_set(samples_u, forget_example))
    fit_r = fit_gaussian(_score_set(samples_r, forget_example))

    posteriors = []
    origins = []
    for samples, origin in ((test_u, "unlearn"), (test_r, "retrain")):
        for score in _score_set(samples, forget_example):
            posteriors.append(ulira_posterior(float(score), fit_u, fit_r))
            origins.append(origin)

    correct = 0
    confidences = []
    for posterior, origin in zip(posteriors, origins):
        if origin == "unlearn":
            correct += posterior > 0.5
            confidences.append(posterior)
        else:
            correct += posterior < 0.5
            confidences.append(1.0 - posterior)

    quartiles = tuple(float(q) for q in np.quantile(confidences, [0.25, 0.5, 0.75]))
    return AttackReport(
        posteriors=tuple(posteriors),
        origins=tuple(origins),
        accuracy=correct / len(posteriors),
        confidence_quartiles=quartiles,
        fit_u=fit_u,
        fit_r=fit_r,
    )
