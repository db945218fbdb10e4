"""Reference learning task: clipped, L2-regularized binary logistic regression.

The objective over a batch of examples (x_i, y_i) with labels y_i in {-1, +1} is

    L(theta) = -(1/n) sum_i log s(y_i theta^T x_i) + (lam/2) ||theta||^2,

where s is the logistic sigmoid. Written per example, the summand is
ell_i(theta) = -log s(y_i theta^T x_i) + (lam/2) ||theta||^2, so L is the plain
average of the ell_i. The analytic gradient of ell_i is

    grad ell_i(theta) = -(1 - s(y_i theta^T x_i)) y_i x_i + lam theta,

which gives the curvature envelope used by the bound calculators: L is
lam-strongly convex and (1/4 + lam)-smooth (the logistic term's Hessian is
bounded by 1/4 times the feature second-moment; features here are assumed
O(1)-scaled).

Training clips each per-example gradient to norm at most ``clip`` before
averaging, so every summand the update sees is bounded in norm by ``clip``
exactly. Iterates live in the centered L2 ball of a given radius; projection
is exact renormalization.

Cross-example reductions are computed in canonical order (coordinatewise sort,
then pairwise sum), so results are bit-identical under any reordering of the
rows within a batch. Plain BLAS reductions do not have that property.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "LabeledExample",
    "Examples",
    "Dataset",
    "LossProfile",
    "ParamVector",
    "derive_profile",
    "sigmoid",
    "loss_value",
    "loss_gradient",
    "per_example_gradients",
    "clip_gradient",
    "clipped_mean_gradient",
    "project_ball",
]


@dataclass(frozen=True)
class LabeledExample:
    """A single feature vector with a binary label in {-1, +1}."""

    features: np.ndarray
    label: float

    def __post_init__(self) -> None:
        feats = np.asarray(self.features, dtype=np.float64)
        if feats.ndim != 1 or feats.size == 0:
            raise ValueError("features must be a nonempty 1-D vector")
        if not np.all(np.isfinite(feats)):
            raise ValueError("features must be finite")
        lab = float(self.label)
        if lab not in (-1.0, 1.0):
            raise ValueError(f"label must be -1 or +1, got {lab!r}")
        object.__setattr__(self, "features", feats)
        object.__setattr__(self, "label", lab)


@dataclass(frozen=True, eq=False)
class Examples:
    """A batch of labeled examples, stored columnar.

    Attributes
    ----------
    x : ndarray of shape (n, d)
        Feature rows. ``n`` may be zero (an empty batch is a valid container;
        loss evaluation on it is a domain error).
    y : ndarray of shape (n,)
        Labels, each -1.0 or +1.0.
    """

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self) -> None:
        x = np.asarray(self.x, dtype=np.float64)
        y = np.asarray(self.y, dtype=np.float64)
        if x.ndim != 2:
            raise ValueError("x must be 2-D of shape (n, d)")
        if y.ndim != 1 or y.shape[0] != x.shape[0]:
            raise ValueError("y must be 1-D with one label per row of x")
        if x.shape[1] == 0:
            raise ValueError("feature dimension must be positive")
        if not np.all(np.isfinite(x)):
            raise ValueError("features must be finite")
        if y.size and not np.all(np.isin(y, (-1.0, 1.0))):
            raise ValueError("labels must be -1 or +1")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    def __len__(self) -> int:
        return self.x.shape[0]

    @property
    def dim(self) -> int:
        return self.x.shape[1]

    def row(self, i: int) -> LabeledExample:
        return LabeledExample(self.x[i], float(self.y[i]))

    @classmethod
    def from_examples(cls, examples: "list[LabeledExample]") -> "Examples":
        if not examples:
            raise ValueError("cannot infer dimension from an empty example list")
        x = np.stack([e.features for e in examples])
        y = np.array([e.label for e in examples], dtype=np.float64)
        return cls(x, y)

    @classmethod
    def empty(cls, dim: int) -> "Examples":
        return cls(np.empty((0, dim)), np.empty((0,)))

    @classmethod
    def concat(cls, parts: "list[Examples]") -> "Examples":
        if not parts:
            raise ValueError("nothing to concatenate")
        return cls(
            np.concatenate([p.x for p in parts]),
            np.concatenate([p.y for p in parts]),
        )


@dataclass(frozen=True, eq=False)
class Dataset:
    """Three disjoint example partitions sharing one feature space.

    ``public`` is the side pool that never carries privacy obligations,
    ``private_retain`` the private examples that stay, and ``forget`` the
    private examples whose influence must be removed. Learning sees all
    three; unlearning and retraining see ``public`` + ``private_retain``.
    """

    public: Examples
    private_retain: Examples
    forget: Examples

    def __post_init__(self) -> None:
        dims = {self.public.dim, self.private_retain.dim, self.forget.dim}
        if len(dims) != 1:
            raise ValueError(f"partitions disagree on dimension: {sorted(dims)}")
        if len(self.full) == 0:
            raise ValueError("dataset has no examples")

    @property
    def dim(self) -> int:
        return self.public.dim

    @property
    def n_pub(self) -> int:
        return len(self.public)

    @property
    def n_priv(self) -> int:
        return len(self.private_retain) + len(self.forget)

    @property
    def n_forget(self) -> int:
        return len(self.forget)

    @property
    def full(self) -> Examples:
        return Examples.concat([self.public, self.private_retain, self.forget])

    @property
    def retain(self) -> Examples:
        return Examples.concat([self.public, self.private_retain])


@dataclass(frozen=True)
class LossProfile:
    """Curvature and clipping envelope of the training loss.

    Attributes
    ----------
    M : float
        Per-example gradient clip bound (Lipschitz constant the update sees).
    L : float
        Smoothness (gradient Lipschitz) constant, 1/4 + lam for this task.
    m : float
        Strong convexity constant, lam for this task.
    """

    M: float
    L: float
    m: float

    def __post_init__(self) -> None:
        if not self.M > 0:
            raise ValueError("clip bound M must be positive")
        if self.L < 0 or self.m < 0:
            raise ValueError("curvature constants must be nonnegative")
        if self.m > self.L:
            raise ValueError("strong convexity cannot exceed smoothness")


@dataclass(frozen=True, eq=False)
class ParamVector:
    """A weight vector constrained to the centered ball of the given radius."""

    weights: np.ndarray
    radius: float

    def __post_init__(self) -> None:
        w = np.asarray(self.weights, dtype=np.float64)
        if w.ndim != 1 or w.size == 0:
            raise ValueError("weights must be a nonempty 1-D vector")
        if not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite")
        r = float(self.radius)
        if not r > 0:
            raise ValueError("radius must be positive")
        if float(np.linalg.norm(w)) > r:
            raise ValueError("weights lie outside the constraint ball")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "radius", r)

    @property
    def dim(self) -> int:
        return self.weights.shape[0]


def derive_profile(lam: float, clip: float) -> LossProfile:
    """Curvature profile of the clipped regularized logistic loss.

    Parameters
    ----------
    lam : float
        L2 regularization strength; must be nonnegative.
    clip : float
        Per-example gradient clip bound; must be positive.

    Returns
    -------
    LossProfile
        M = clip, L = 1/4 + lam, m = lam.
    """
    if lam < 0:
        raise ValueError("lam must be nonnegative")
    if not clip > 0:
        raise ValueError("clip must be positive")
    return LossProfile(M=float(clip), L=0.25 + float(lam), m=float(lam))


def sigmoid(z: np.ndarray) -> np.ndarray:
    """Numerically stable logistic sigmoid, elementwise."""
    z = np.asarray(z, dtype=np.float64)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _weights(theta: "ParamVector | np.ndarray") -> np.ndarray:
    if isinstance(theta, ParamVector):
        return theta.weights
    w = np.asarray(theta, dtype=np.float64)
    if w.ndim != 1:
        raise ValueError("theta must be a 1-D vector")
    return w


def _check_data(w: np.ndarray, data: Examples) -> None:
    if len(data) == 0:
        raise ValueError("loss is undefined on an empty batch")
    if data.dim != w.shape[0]:
        raise ValueError(
            f"dimension mismatch: theta has {w.shape[0]}, data has {data.dim}"
        )


def loss_value(theta: "ParamVector | np.ndarray", data: Examples, lam: float) -> float:
    """Average logistic loss plus L2 penalty.

    Evaluates -(1/n) sum_i log s(y_i theta^T x_i) + (lam/2) ||theta||^2 via
    log1p-style accumulation: -log s(z) = log(1 + exp(-z)) is computed with
    ``np.logaddexp(0, -z)``, which is exact for z = 0 (giving log 2) and does
    not overflow for large negative margins.
    """
    w = _weights(theta)
    _check_data(w, data)
    if lam < 0:
        raise ValueError("lam must be nonnegative")
    margins = data.y * (data.x @ w)
    fit = float(np.mean(np.logaddexp(0.0, -margins)))
    return fit + 0.5 * float(lam) * float(w @ w)


def loss_gradient(
    theta: "ParamVector | np.ndarray", data: Examples, lam: float
) -> np.ndarray:
    """Exact analytic gradient of :func:`loss_value` (no clipping).

    Returns -(1/n) sum_i (1 - s(y_i theta^T x_i)) y_i x_i + lam theta.
    """
    w = _weights(theta)
    _check_data(w, data)
    if lam < 0:
        raise ValueError("lam must be nonnegative")
    s = sigmoid(data.y * (data.x @ w))
    coeff = (1.0 - s) * data.y
    return -(data.x.T @ coeff) / len(data) + float(lam) * w


def per_example_gradients(
    theta: "ParamVector | np.ndarray", data: Examples, lam: float
) -> np.ndarray:
    """Per-example gradients of ell_i(theta), one row per example.

    Row i is -(1 - s_i) y_i x_i + lam theta: the data term plus the
    regularizer, since the regularizer belongs to every per-example summand.
    The row average equals :func:`loss_gradient` exactly in real arithmetic.
    """
    w = _weights(theta)
    _check_data(w, data)
    if lam < 0:
        raise ValueError("lam must be nonnegative")
    s = sigmoid(data.y * (data.x @ w))
    coeff = (1.0 - s) * data.y
    return -coeff[:, np.newaxis] * data.x + float(lam) * w[np.newaxis, :]


def clip_gradient(grad: np.ndarray, clip: float) -> np.ndarray:
    """Rescale ``grad`` to norm at most ``clip``; shorter vectors pass through.

    The zero vector is returned unchanged. ``clip`` must be positive.
    """
    if not clip > 0:
        raise ValueError("clip must be positive")
    g = np.asarray(grad, dtype=np.float64)
    norm = float(np.linalg.norm(g))
    if norm <= clip or norm == 0.0:
        return g.copy()
    return g * (clip / norm)


def _canonical_mean(rows: np.ndarray) -> np.ndarray:
    # Sorting each coordinate's addends fixes the summation order, so the
    # pairwise sum is a function of the multiset of rows only.
    return np.sort(rows, axis=0).sum(axis=0) / rows.shape[0]


def clipped_mean_gradient(
    theta: "ParamVector | np.ndarray", data: Examples, lam: float, clip: float
) -> np.ndarray:
    """Average of per-example gradients, each clipped to norm at most ``clip``.

    This is the update direction the training engine consumes. Clipping acts
    on the full per-example gradient (data term plus regularizer share), so
    every averaged summand has norm <= clip exactly. The reduction is
    order-canonical: permuting rows of ``data`` cannot change a single bit of
    the result.
    """
    if not clip > 0:
        raise ValueError("clip must be positive")
    grads = per_example_gradients(theta, data, lam)
    norms = np.linalg.norm(grads, axis=1)
    scale = np.ones_like(norms)
    mask = norms > clip
    scale[mask] = clip / norms[mask]
    return _canonical_mean(grads * scale[:, np.newaxis])


def project_ball(theta: "ParamVector | np.ndarray", radius: float) -> ParamVector:
    """Project onto the centered L2 ball of the given radius.

    Vectors inside the ball are returned as-is (wrapped). Vectors outside are
    renormalized; the scale factor is nudged down by ulps until the projected
    norm satisfies ||w|| <= radius in float arithmetic, so the ball constraint
    holds exactly, not just up to rounding.
    """
    if not radius > 0:
        raise ValueError("radius must be positive")
    w = _weights(theta)
    norm = float(np.linalg.norm(w))
    if not np.isfinite(norm):
        raise ValueError("cannot project a non-finite vector")
    if norm <= radius:
        return ParamVector(w.copy(), float(radius))
    scale = radius / norm
    out = w * scale
    while float(np.linalg.norm(out)) > radius:
        scale = np.nextafter(scale, 0.0)
        out = w * scale
    return ParamVector(out, float(radius))
