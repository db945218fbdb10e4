"""Synthetic public/private pools with a controllable distribution gap.

Both pools draw from the same set of cluster centers; only the categorical
mixture weights differ. The private pool is uniform over clusters, the public
pool tilts the low-index half down by (1 - shift) and the high half up by
(1 + shift). Because the weights are known exactly, the worst-case log ratio
between the two generating distributions is known exactly too, which is what
makes the mismatch-penalty checks testable end to end.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bounds import dinfty_discrete
from .model import Dataset, Examples


@dataclass(frozen=True)
class SyntheticShiftSpec:
    dim: int
    n_pub: int
    n_priv: int
    n_forget: int
    shift: float = 0.0
    clusters: int = 2
    label_flip_fraction: float = 0.0
    jitter: float = 0.25
    seed: int = 0

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        if self.n_pub < 0 or self.n_priv < 1:
            raise ValueError("need n_pub >= 0 and n_priv >= 1")
        if not 0 <= self.n_forget <= self.n_priv:
            raise ValueError("n_forget must lie in [0, n_priv]")
        if not 0.0 <= self.shift <= 1.0:
            raise ValueError("shift must lie in [0, 1]")
        if self.clusters < 2 or self.clusters % 2 != 0:
            raise ValueError("clusters must be an even count >= 2")
        if not 0.0 <= self.label_flip_fraction <= 1.0:
            raise ValueError("label_flip_fraction must lie in [0, 1]")
        if self.jitter < 0:
            raise ValueError("jitter must be nonnegative")

    @property
    def private_weights(self) -> np.ndarray:
        return np.full(self.clusters, 1.0 / self.clusters)

    @property
    def public_weights(self) -> np.ndarray:
        half = self.clusters // 2
        w = self.private_weights
        scale = np.concatenate(
            [np.full(half, 1.0 - self.shift), np.full(half, 1.0 + self.shift)]
        )
        return w * scale


def ground_truth_dinfty(spec: SyntheticShiftSpec) -> float:
    """Exact worst-case log ratio private-vs-public over the cluster weights."""
    return dinfty_discrete(spec.private_weights, spec.public_weights)


def _draw_pool(rng: np.random.Generator, spec: SyntheticShiftSpec, weights,
               n: int) -> Examples:
    if n == 0:
        return Examples.empty(spec.dim)
    assignments = rng.choice(spec.clusters, size=n, p=weights)
    centers = _centers(spec)
    # bounded jitter: uniform in the ball of radius `jitter`
    directions = rng.standard_normal((n, spec.dim))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    radii = spec.jitter * rng.uniform(0.0, 1.0, size=n) ** (1.0 / spec.dim)
    features = centers[assignments] + directions * radii[:, None]
    labels = np.where(assignments >= spec.clusters // 2, 1.0, -1.0)
    return Examples(features, labels)


def _centers(spec: SyntheticShiftSpec) -> np.ndarray:
    # centers depend only on (seed, clusters, dim) so pools share them; the
    # [seed, 0] entropy keeps this stream disjoint from the pool stream and
    # from the Philox-keyed model-noise streams
    rng = np.random.default_rng([spec.seed, 0])
    centers = rng.standard_normal((spec.clusters, spec.dim))
    return centers / np.linalg.norm(centers, axis=1, keepdims=True)


def generate_synthetic(spec: SyntheticShiftSpec):
    """Returns (Dataset, exact d_infinity between the generating mixtures).

    Label flips hit exactly floor(label_flip_fraction * n_pub) public
    examples, chosen by the seeded permutation, mirroring a corrupted public
    pool. shift = 1 empties the low clusters publicly, so the returned
    divergence is the infinite marker.
    """
    rng = np.random.default_rng([spec.seed, 1])
    public = _draw_pool(rng, spec, spec.public_weights, spec.n_pub)
    if spec.n_pub > 0 and spec.label_flip_fraction > 0:
        count = int(spec.label_flip_fraction * spec.n_pub)
        victims = rng.permutation(spec.n_pub)[:count]
        y = public.y.copy()
        y[victims] = -y[victims]
        public = Examples(public.x, y)
    private = _draw_pool(rng, spec, spec.private_weights, spec.n_priv)
    forget = Examples(private.x[: spec.n_forget], private.y[: spec.n_forget])
    retain = Examples(private.x[spec.n_forget :], private.y[spec.n_forget :])
    dataset = Dataset(public=public, private_retain=retain, forget=forget)
    return dataset, ground_truth_dinfty(spec)
