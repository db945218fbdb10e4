"""Analytic divergence and noise calculators for the unlearning pipelines.

Everything here is a pure function of scalars: no sampling, no data. The
calculators track how far the learning distribution (trained on everything)
can drift from the retraining distribution (trained on the retain pool only),
how fast unlearning contracts that gap, and how much noise the contraction
needs. The key quantities:

* Log-Sobolev (LSI) constant schedules C_0, C_1, ... of the iterate
  distributions, per curvature regime. Smaller constants mean faster mixing.
* Initial gap: D_alpha(retrain_T || learn_T) is bounded by the accumulated,
  contraction-damped gradient-sensitivity gap between the two losses. The
  sensitivity scales as n_forget / (n_pub + n_priv), so public data shrinks
  the squared gap quadratically.
* Required noise: inverting the gap bound for sigma^2 at a target epsilon.
  In the strongly convex regime this has a closed form; otherwise it is a
  fixed-point problem because the LSI schedule itself depends on sigma.
* Unlearning convergence: each retain-pool update with fresh noise contracts
  the divergence by a factor tied to sigma^2 eta / C.

Conventions: every ``sigma_sq`` argument is a variance (sigma squared);
``alpha`` is the Renyi order, strictly greater than 1 where divergences are
involved; schedules index iterations from 0. Upper bounds may saturate to
``inf`` for degenerate inputs (e.g. sigma = 0), never silently to a finite
wrong number.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .model import LossProfile
from .pngd import HyperParams

__all__ = [
    "DataPartition",
    "LsiSchedule",
    "DivergenceBound",
    "NoiseRequirement",
    "DecisionReport",
    "MismatchBound",
    "REGIMES",
    "lsi_nonconvex",
    "lsi_convex",
    "lsi_strongly_convex",
    "lsi_universal_compact",
    "gradient_sensitivity",
    "bound_learn_retrain",
    "strongly_convex_initial_bound",
    "required_sigma",
    "bound_unlearn",
    "min_steps_forward",
    "decide_unlearn_vs_retrain",
    "public_ratio_threshold",
    "generalization_bound",
    "dinfty_discrete",
]

REGIMES = ("nonconvex", "convex", "strongly_convex", "universal_compact")


@dataclass(frozen=True)
class DataPartition:
    """Counts of the three data pools; all derived ratios live here."""

    n_pub: int
    n_priv: int
    n_forget: int

    def __post_init__(self) -> None:
        if min(self.n_pub, self.n_priv, self.n_forget) < 0:
            raise ValueError("counts must be nonnegative")
        if self.n_forget > self.n_priv:
            raise ValueError("cannot forget more than the private pool")
        if self.n_pub + self.n_priv < 1:
            raise ValueError("partition is empty")

    @property
    def n_total(self) -> int:
        return self.n_pub + self.n_priv

    @property
    def n_retain_priv(self) -> int:
        return self.n_priv - self.n_forget

    @property
    def forget_fraction(self) -> float:
        """n_forget / n_priv; undefined when there is no private data."""
        if self.n_priv == 0:
            raise ValueError("forget fraction undefined with n_priv = 0")
        return self.n_forget / self.n_priv


@dataclass(frozen=True, eq=False)
class LsiSchedule:
    """LSI constants per iteration for one curvature regime.

    ``constants`` holds C_0..C_K for the iterative regimes and the single
    universal constant for the compact-support regime (which is iteration
    independent). ``unbounded`` marks the sigma = 0 universal case where no
    finite constant exists. ``contractive`` (strongly convex only) records
    whether the schedule is guaranteed non-increasing; ``step_size_warning``
    flags eta * m >= 1, where the recurrence is still evaluated but the
    contraction reasoning behind it degrades.
    """

    regime: str
    constants: np.ndarray
    eta: float
    sigma_sq: float
    params: dict = field(default_factory=dict)
    contractive: "bool | None" = None
    unbounded: bool = False
    step_size_warning: bool = False

    def __post_init__(self) -> None:
        if self.regime not in REGIMES:
            raise ValueError(f"unknown regime {self.regime!r}")
        consts = np.asarray(self.constants, dtype=np.float64)
        if consts.ndim != 1 or consts.size == 0:
            raise ValueError("constants must be a nonempty vector")
        if not np.all(consts > 0):
            raise ValueError("LSI constants must be strictly positive")
        object.__setattr__(self, "constants", consts)

    def __len__(self) -> int:
        return int(self.constants.size)

    def constant_at(self, k: int) -> float:
        """C_k; the universal regime answers the same constant for every k."""
        if k < 0:
            raise ValueError("iteration index must be nonnegative")
        if self.regime == "universal_compact":
            return float(self.constants[0])
        if k >= self.constants.size:
            raise ValueError(f"schedule has {self.constants.size} entries, asked for {k}")
        return float(self.constants[k])


@dataclass(frozen=True, eq=False)
class DivergenceBound:
    """An upper bound on a Renyi divergence, with provenance and input echo."""

    value: float
    alpha: float
    provenance: str
    inputs: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.value < 0 or math.isnan(self.value):
            raise ValueError("bound value must be nonnegative")
        if not self.alpha > 1:
            raise ValueError("alpha must exceed 1")


@dataclass(frozen=True, eq=False)
class NoiseRequirement:
    """Noise variance meeting a divergence target, and how it was solved."""

    sigma_squared: float
    mode: str
    epsilon: float
    solver: str
    inputs: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.sigma_squared < 0:
            raise ValueError("variance must be nonnegative")
        if self.mode not in ("symmetric", "asymmetric"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.solver not in ("closed_form", "fixed_point"):
            raise ValueError(f"unknown solver {self.solver!r}")

    @property
    def sigma(self) -> float:
        return math.sqrt(self.sigma_squared)


@dataclass(frozen=True, eq=False)
class DecisionReport:
    """Unlearn-vs-retrain comparison: cost side, budget side, and minimal K."""

    lhs: float
    rhs: float
    unlearn_preferred: bool
    min_k: int
    inputs: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.min_k < 0:
            raise ValueError("min_k must be nonnegative")
        if self.unlearn_preferred != (self.lhs < self.rhs):
            raise ValueError("preference flag inconsistent with lhs/rhs")


@dataclass(frozen=True, eq=False)
class MismatchBound:
    """Risk bound under public/private distribution mismatch."""

    mismatch_penalty: float
    approx_error: float
    total: float
    inputs: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.mismatch_penalty < 1.0:
            raise ValueError("penalty must be at least 1")
        if self.approx_error < 0:
            raise ValueError("approximation error must be nonnegative")


def _check_positive(**kwargs: float) -> None:
    for name, value in kwargs.items():
        if not value > 0:
            raise ValueError(f"{name} must be positive, got {value!r}")


def _check_nonnegative(**kwargs: float) -> None:
    for name, value in kwargs.items():
        if value < 0:
            raise ValueError(f"{name} must be nonnegative, got {value!r}")


def lsi_nonconvex(
    c0: float, eta: float, smoothness: float, sigma_sq: float, steps: int
) -> LsiSchedule:
    """LSI schedule without curvature assumptions.

    Unrolls C_k = (1 + eta L)^2 C_{k-1} + 2 eta sigma_sq from C_0. The
    schedule grows geometrically (each noisy step can worsen mixing by the
    squared expansion factor of the gradient map) and is allowed to saturate
    to inf for large k; downstream consumers treat inf as "no help from this
    constant". With L = 0 the expansion factor is 1 and the convex arithmetic
    schedule is returned instead.
    """
    _check_positive(c0=c0, eta=eta)
    _check_nonnegative(smoothness=smoothness, sigma_sq=sigma_sq, steps=steps)
    if smoothness == 0.0:
        return lsi_convex(c0, eta, sigma_sq, steps)
    growth = (1.0 + eta * smoothness) ** 2
    consts = np.empty(steps + 1)
    consts[0] = c0
    incr = 2.0 * eta * sigma_sq
    with np.errstate(over="ignore"):
        for k in range(1, steps + 1):
            consts[k] = growth * consts[k - 1] + incr
    return LsiSchedule(
        regime="nonconvex",
        constants=consts,
        eta=eta,
        sigma_sq=sigma_sq,
        params={"c0": c0, "smoothness": smoothness},
    )


def lsi_convex(c0: float, eta: float, sigma_sq: float, steps: int) -> LsiSchedule:
    """LSI schedule for convex losses: C_k = C_0 + 2 k eta sigma_sq."""
    _check_positive(c0=c0, eta=eta)
    _check_nonnegative(sigma_sq=sigma_sq, steps=steps)
    consts = c0 + 2.0 * eta * sigma_sq * np.arange(steps + 1, dtype=np.float64)
    return LsiSchedule(
        regime="convex",
        constants=consts,
        eta=eta,
        sigma_sq=sigma_sq,
        params={"c0": c0},
    )


def lsi_strongly_convex(
    c0: float, eta: float, strong_convexity: float, sigma_sq: float, steps: int
) -> LsiSchedule:
    """LSI schedule for strongly convex losses.

    Unrolls C_k = (1 - eta m)^2 C_{k-1} + 2 eta sigma_sq. The schedule is
    non-increasing (monotone toward the fixed point
    C* = 2 eta sigma_sq / (1 - (1 - eta m)^2)) when
    eta < (2/m)(1 - sigma_sq/(m c0)); the ``contractive`` field records that
    check. eta m >= 1 is evaluated anyway but flagged, since the (1 - eta m)^2
    factor then no longer reflects a contraction of the underlying dynamics.
    """
    _check_positive(c0=c0, eta=eta, strong_convexity=strong_convexity)
    _check_nonnegative(sigma_sq=sigma_sq, steps=steps)
    m = strong_convexity
    shrink = (1.0 - eta * m) ** 2
    consts = np.empty(steps + 1)
    consts[0] = c0
    incr = 2.0 * eta * sigma_sq
    for k in range(1, steps + 1):
        consts[k] = shrink * consts[k - 1] + incr
    contractive = eta < (2.0 / m) * (1.0 - sigma_sq / (m * c0))
    denom = 1.0 - shrink
    fixed_point = incr / denom if denom > 0 else math.inf
    return LsiSchedule(
        regime="strongly_convex",
        constants=consts,
        eta=eta,
        sigma_sq=sigma_sq,
        params={"c0": c0, "strong_convexity": m, "fixed_point": fixed_point},
        contractive=bool(contractive),
        step_size_warning=bool(eta * m >= 1.0),
    )


def lsi_universal_compact(
    radius: float, eta: float, clip: float, sigma_sq: float
) -> LsiSchedule:
    """Iteration-independent LSI constant from the compact support alone.

    C~ = 6 (4 tau^2 + 2 eta sigma_sq) exp(4 tau^2 / (2 eta sigma_sq)) with
    tau = radius + eta * clip. Valid for any iterate distribution supported on
    the ball after one noisy update; typically astronomically large, which is
    fine: it only ever enters through exp(-const / C~). sigma = 0 has no
    finite constant and yields the unbounded marker.
    """
    _check_positive(radius=radius, eta=eta, clip=clip)
    _check_nonnegative(sigma_sq=sigma_sq)
    tau = radius + eta * clip
    if sigma_sq == 0.0:
        return LsiSchedule(
            regime="universal_compact",
            constants=np.array([math.inf]),
            eta=eta,
            sigma_sq=sigma_sq,
            params={"radius": radius, "clip": clip, "tau": tau},
            unbounded=True,
        )
    smoothing = 2.0 * eta * sigma_sq
    try:
        value = 6.0 * (4.0 * tau * tau + smoothing) * math.exp(4.0 * tau * tau / smoothing)
    except OverflowError:
        value = math.inf
    return LsiSchedule(
        regime="universal_compact",
        constants=np.array([value]),
        eta=eta,
        sigma_sq=sigma_sq,
        params={"radius": radius, "clip": clip, "tau": tau},
        unbounded=not math.isfinite(value),
    )


def gradient_sensitivity(eta: float, clip: float, part: DataPartition) -> float:
    """Worst-case gap between full-pool and retain-pool gradient updates.

    With per-example gradients clipped to norm at most ``clip``, dropping
    n_forget of n_total examples moves the eta-scaled mean gradient by at most
    2 * clip * eta * n_forget / n_total. This is the per-step sensitivity the
    divergence bounds accumulate.
    """
    _check_positive(eta=eta, clip=clip)
    return 2.0 * clip * eta * part.n_forget / part.n_total


def _damped_sum(
    schedule: LsiSchedule, eta: float, sigma_sq: float, lo: int, hi: int
) -> float:
    """sum_{t=lo}^{hi} prod_{t'=t}^{hi} (1 + eta sigma_sq / C_{t'})^{-1}.

    Evaluated in log space: each factor is in (0, 1], so the suffix
    log-products are nonpositive and exp never overflows. An infinite C
    yields factor exactly 1.
    """
    if hi < lo:
        return 0.0
    consts = np.array([schedule.constant_at(t) for t in range(lo, hi + 1)])
    with np.errstate(invalid="ignore"):
        log_h = -np.log1p(eta * sigma_sq / consts)
    log_h = np.where(np.isnan(log_h), 0.0, log_h)  # C = inf -> factor 1
    suffix = np.cumsum(log_h[::-1])[::-1]
    return float(np.exp(suffix).sum())


def bound_learn_retrain(
    alpha: float,
    profile: LossProfile,
    hp: HyperParams,
    part: DataPartition,
    schedule: LsiSchedule,
    use_proof_range: bool = False,
) -> DivergenceBound:
    """Upper bound on D_alpha(retrain_T || learn_T) after learning.

    value = alpha * 2 M^2 eta^2 n_forget^2 / (n_total^2 sigma^2) * S, where S
    accumulates the per-step sensitivity, damped by how much each subsequent
    noisy step mixes: S = sum_t prod_{t'>=t} (1 + eta sigma^2 / C_{t'})^{-1}.

    The default accumulation range is t in [1, T-1] (products to T-1); the
    ``use_proof_range`` flag widens it to t in [0, T] for sensitivity
    analysis. An empty range gives 0. sigma = 0 with a nonempty forget pool
    gives the unbounded marker (inf): without noise nothing mixes.
    """
    if not alpha > 1:
        raise ValueError("alpha must exceed 1")
    steps = hp.steps_learn
    if steps < 1:
        raise ValueError("need at least one learning step")
    inputs = {
        "alpha": alpha,
        "eta": hp.eta,
        "sigma_sq": hp.sigma**2,
        "steps_learn": steps,
        "n_pub": part.n_pub,
        "n_priv": part.n_priv,
        "n_forget": part.n_forget,
        "schedule_regime": schedule.regime,
        "use_proof_range": use_proof_range,
    }
    if part.n_forget == 0:
        return DivergenceBound(0.0, alpha, "learn_vs_retrain_initial", inputs)
    sigma_sq = hp.sigma**2
    if sigma_sq == 0.0:
        return DivergenceBound(math.inf, alpha, "learn_vs_retrain_initial", inputs)
    lo, hi = (0, steps) if use_proof_range else (1, steps - 1)
    damped = _damped_sum(schedule, hp.eta, sigma_sq, lo, hi)
    ratio = part.n_forget / part.n_total
    value = alpha * 2.0 * profile.M**2 * hp.eta**2 * ratio**2 / sigma_sq * damped
    return DivergenceBound(value, alpha, "learn_vs_retrain_initial", inputs)


def strongly_convex_initial_bound(
    alpha: float,
    profile: LossProfile,
    part: DataPartition,
    sigma_sq: float,
    eta: float,
    steps: int,
) -> float:
    """Closed-form learn/retrain gap bound in the strongly convex regime.

    4 alpha M^2 n_forget^2 (1 - exp(-m eta T)) / (m sigma^2 n_total^2).
    This is the quantity whose inversion gives the closed-form required
    noise, and the D_init used by the decision rule's minimal-K formula.
    """
    if not alpha > 1:
        raise ValueError("alpha must exceed 1")
    _check_positive(sigma_sq=sigma_sq, eta=eta)
    if not profile.m > 0:
        raise ValueError("strongly convex bound needs m > 0")
    if steps < 0:
        raise ValueError("steps must be nonnegative")
    if part.n_forget == 0:
        return 0.0
    ratio = part.n_forget / part.n_total
    decay = -math.expm1(-profile.m * eta * steps)  # 1 - exp(-m eta T)
    return 4.0 * alpha * profile.M**2 * ratio**2 * decay / (profile.m * sigma_sq)


def _schedule_for(
    regime: str,
    profile: LossProfile,
    sigma_sq: float,
    eta: float,
    steps: int,
    c0: float,
    radius: "float | None",
) -> LsiSchedule:
    if regime == "nonconvex":
        return lsi_nonconvex(c0, eta, profile.L, sigma_sq, steps)
    if regime == "convex":
        return lsi_convex(c0, eta, sigma_sq, steps)
    if regime == "strongly_convex":
        return lsi_strongly_convex(c0, eta, profile.m, sigma_sq, steps)
    if regime == "universal_compact":
        if radius is None:
            raise ValueError("universal_compact regime needs the ball radius")
        return lsi_universal_compact(radius, eta, profile.M, sigma_sq)
    raise ValueError(f"unknown regime {regime!r}")


def required_sigma(
    alpha: float,
    profile: LossProfile,
    part: DataPartition,
    epsilon: float,
    steps: int,
    eta: float,
    mode: str,
    regime: str,
    c0: float = 1.0,
    radius: "float | None" = None,
) -> NoiseRequirement:
    """Smallest noise variance keeping the learn/retrain gap at most epsilon.

    mode selects the data accounting: "asymmetric" keeps the public pool in
    the denominator (rho = n_priv / n_total), "symmetric" prices the noise as
    if all data were private (rho = 1). The two sigmas differ by exactly the
    factor rho in the closed form, which is the whole point of mixing in
    public data.

    The strongly convex regime inverts the closed-form gap bound:
    sigma^2 = 4 alpha c^2 M^2 (1 - exp(-m eta T)) rho^2 / (epsilon m). Other
    regimes solve the self-referential inequality
    sigma^2 >= 2 alpha M^2 eta^2 c^2 rho^2 S(sigma^2) / epsilon by bisection
    over sigma^2 in [1e-12, 1e6], recomputing the LSI schedule at every
    candidate (S depends on sigma through the schedule), converged to 1e-9
    relative width.
    """
    if not alpha > 1:
        raise ValueError("alpha must exceed 1")
    _check_positive(epsilon=epsilon, eta=eta)
    if steps < 1:
        raise ValueError("need at least one learning step")
    if mode not in ("symmetric", "asymmetric"):
        raise ValueError(f"unknown mode {mode!r}")
    if regime not in REGIMES:
        raise ValueError(f"unknown regime {regime!r}")
    c = part.forget_fraction  # raises when n_priv = 0
    rho = part.n_priv / part.n_total if mode == "asymmetric" else 1.0
    inputs = {
        "alpha": alpha,
        "eta": eta,
        "steps": steps,
        "c": c,
        "rho": rho,
        "regime": regime,
        "c0": c0,
        "radius": radius,
    }
    if c == 0.0:
        return NoiseRequirement(0.0, mode, epsilon, "closed_form", inputs)
    if regime == "strongly_convex":
        if not profile.m > 0:
            raise ValueError("strongly convex regime needs m > 0")
        decay = -math.expm1(-profile.m * eta * steps)
        value = 4.0 * alpha * c**2 * profile.M**2 * decay * rho**2 / (epsilon * profile.m)
        return NoiseRequirement(value, mode, epsilon, "closed_form", inputs)

    prefactor = 2.0 * alpha * profile.M**2 * eta**2 * c**2 * rho**2 / epsilon

    def gap(sigma_sq: float) -> float:
        # positive iff sigma_sq satisfies the requirement
        sched = _schedule_for(regime, profile, sigma_sq, eta, steps, c0, radius)
        damped = _damped_sum(sched, eta, sigma_sq, 1, steps - 1)
        return sigma_sq - prefactor * damped

    lo, hi = 1e-12, 1e6
    if gap(lo) >= 0.0:
        return NoiseRequirement(lo, mode, epsilon, "fixed_point", inputs)
    if gap(hi) < 0.0:
        raise ValueError("required noise exceeds the solver bracket [1e-12, 1e6]")
    while (hi - lo) > 1e-9 * hi:
        mid = 0.5 * (lo + hi)
        if gap(mid) >= 0.0:
            hi = mid
        else:
            lo = mid
    return NoiseRequirement(hi, mode, epsilon, "fixed_point", inputs)


def bound_unlearn(
    d_init: DivergenceBound,
    steps_unlearn: int,
    alpha: float,
    hp: HyperParams,
    profile: LossProfile,
    schedule: "LsiSchedule | None",
    regime: str,
    c_start: "float | None" = None,
) -> DivergenceBound:
    """Upper bound on D_alpha(retrain_{T+K} || unlearn_K) after K retain steps.

    General regimes take the better of two contraction routes and multiply
    d_init by min( prod_{k=1}^{K} (1 + 2 eta sigma^2 / ((1+eta L)^2 C_k))^{-1/alpha},
    exp(-2 K sigma^2 eta / (alpha C~)) ), where C_k comes from ``schedule``
    (the unlearning-side constants) and C~ is the universal compact constant
    derived from hp.radius. The strongly convex regime uses the exponential
    decay exp(-2 K sigma^2 eta / (C alpha)) with C = ``c_start`` (the LSI
    constant at the start of unlearning), defaulting to C~ when not supplied;
    the decay form requires C > sigma^2 / m, and when that premise fails the
    general min-form is used instead and flagged in the input echo.

    K = 0 returns d_init exactly.
    """
    if not alpha > 1:
        raise ValueError("alpha must exceed 1")
    if steps_unlearn < 0:
        raise ValueError("steps_unlearn must be nonnegative")
    if regime not in REGIMES:
        raise ValueError(f"unknown regime {regime!r}")
    sigma_sq = hp.sigma**2
    k = steps_unlearn
    inputs = {
        "alpha": alpha,
        "eta": hp.eta,
        "sigma_sq": sigma_sq,
        "steps_unlearn": k,
        "regime": regime,
        "d_init": d_init.value,
        "c_start": c_start,
    }

    universal = lsi_universal_compact(hp.radius, hp.eta, profile.M, sigma_sq)
    c_tilde = universal.constant_at(0)

    def exp_factor(c: float) -> float:
        if math.isinf(c):
            return 1.0
        return math.exp(-2.0 * k * sigma_sq * hp.eta / (alpha * c))

    if regime == "strongly_convex":
        c = c_tilde if c_start is None else c_start
        if not c > 0:
            raise ValueError("c_start must be positive")
        if profile.m > 0 and (math.isinf(c) or c > sigma_sq / profile.m):
            factor = exp_factor(c)
            value = d_init.value * factor
            return DivergenceBound(value, alpha, "unlearn_convergence", inputs)
        inputs = {**inputs, "decay_premise_failed": True}
        # fall through to the general min-form

    factors = [exp_factor(c_tilde)]
    if schedule is not None:
        if len(schedule) < k + 1 and schedule.regime != "universal_compact":
            raise ValueError("schedule too short for the requested steps")
        log_prod = 0.0
        growth = (1.0 + hp.eta * profile.L) ** 2
        for i in range(1, k + 1):
            c_i = schedule.constant_at(i)
            if math.isinf(c_i):
                continue
            log_prod += math.log1p(2.0 * hp.eta * sigma_sq / (growth * c_i))
        factors.append(math.exp(-log_prod / alpha))
    elif regime in ("nonconvex", "convex"):
        raise ValueError(f"{regime} regime needs an unlearning-side schedule")
    value = d_init.value * min(factors)
    return DivergenceBound(value, alpha, "unlearn_convergence", inputs)


def min_steps_forward(
    d_init: DivergenceBound,
    epsilon: float,
    alpha: float,
    hp: HyperParams,
    profile: LossProfile,
    schedule: "LsiSchedule | None",
    regime: str,
    c_start: "float | None" = None,
    max_steps: int = 1_000_000,
) -> "int | None":
    """Smallest K with bound_unlearn(K) <= epsilon, by forward evaluation.

    Covers the regimes without a closed-form inversion. Returns None when the
    bound has not crossed epsilon by max_steps (e.g. sigma = 0, where the
    contraction factors are all 1).
    """
    _check_positive(epsilon=epsilon)
    for k in range(max_steps + 1):
        value = bound_unlearn(
            d_init, k, alpha, hp, profile, schedule, regime, c_start
        ).value
        if value <= epsilon:
            return k
    return None


def decide_unlearn_vs_retrain(
    c_start: float,
    alpha: float,
    sigma_sq: float,
    eta: float,
    profile: LossProfile,
    epsilon: float,
    part: DataPartition,
    steps: int,
) -> DecisionReport:
    """Strongly convex sufficient condition: is unlearning cheaper than retraining?

    Compares the unlearning cost lhs = (C alpha / (2 sigma^2 eta)) *
    log(4 alpha M^2 n_forget^2 / (m epsilon sigma^2 n_total^2)) against the
    retraining budget rhs = T - log(1 - exp(-m eta T)). A log argument <= 0
    means the learn/retrain gap is already below epsilon before any
    unlearning step, so lhs = -inf and unlearning trivially wins.

    min_k is the smallest K whose exponential decay drives the closed-form
    initial gap below epsilon: ceil((C alpha / (2 sigma^2 eta)) *
    log(D_init / epsilon)) floored at 0, with D_init the closed-form
    strongly convex initial bound (which keeps its 1 - exp(-m eta T) factor;
    the lhs display drops that factor, upper-bounding it by 1).
    """
    if not alpha > 1:
        raise ValueError("alpha must exceed 1")
    _check_positive(c_start=c_start, sigma_sq=sigma_sq, eta=eta, epsilon=epsilon)
    if not profile.m > 0:
        raise ValueError("decision rule assumes strong convexity (m > 0)")
    if steps < 1:
        raise ValueError("need at least one learning step")
    m = profile.m
    scale = c_start * alpha / (2.0 * sigma_sq * eta)
    log_arg = (
        4.0 * alpha * profile.M**2 * part.n_forget**2
        / (m * epsilon * sigma_sq * part.n_total**2)
    )
    lhs = -math.inf if log_arg <= 0.0 else scale * math.log(log_arg)
    rhs = steps - math.log(-math.expm1(-m * eta * steps))
    d_init = strongly_convex_initial_bound(alpha, profile, part, sigma_sq, eta, steps)
    if d_init <= 0.0:
        min_k = 0
    else:
        min_k = max(0, math.ceil(scale * math.log(d_init / epsilon)))
    return DecisionReport(
        lhs=lhs,
        rhs=rhs,
        unlearn_preferred=bool(lhs < rhs),
        min_k=min_k,
        inputs={
            "c_start": c_start,
            "alpha": alpha,
            "sigma_sq": sigma_sq,
            "eta": eta,
            "epsilon": epsilon,
            "steps": steps,
            "n_pub": part.n_pub,
            "n_priv": part.n_priv,
            "n_forget": part.n_forget,
            "d_init": d_init,
        },
    )


def public_ratio_threshold(
    alpha: float,
    sigma_sq: float,
    eta: float,
    c_start: float,
    profile: LossProfile,
    epsilon: float,
    steps: int,
    forget_fraction: float,
) -> float:
    """Minimal n_pub/n_priv for unlearning to stay cheaper at small T.

    Threshold = 2 sqrt(alpha) M (m eta)^beta / m * T^beta * epsilon^{-1/2}
    * forget_fraction - 1, with beta = sigma^2 eta / (C alpha), clamped below
    at 0. Derived under small-T approximations (1 - exp(-m eta T) ~ m eta T
    and exp(2 sigma^2 eta T / (C alpha)) ~ 1), so it is meaningful only while
    2 sigma^2 eta T / (C alpha) stays well below 1; outside that region it is
    still computed but increasingly conservative.
    """
    if not alpha > 1:
        raise ValueError("alpha must exceed 1")
    _check_positive(sigma_sq=sigma_sq, eta=eta, c_start=c_start, epsilon=epsilon)
    if not profile.m > 0:
        raise ValueError("threshold assumes strong convexity (m > 0)")
    if steps < 1:
        raise ValueError("need at least one learning step")
    if not 0.0 <= forget_fraction <= 1.0:
        raise ValueError("forget_fraction must lie in [0, 1]")
    m = profile.m
    beta = sigma_sq * eta / (c_start * alpha)
    const = 2.0 * math.sqrt(alpha) * profile.M * (m * eta) ** beta / m
    threshold = const * steps**beta * epsilon**-0.5 * forget_fraction - 1.0
    return max(0.0, threshold)


def generalization_bound(
    d_infty: float,
    n_pub: int,
    n_retain: int,
    base_risk: float,
    clip: float,
    diameter: float,
    d_alpha: float,
) -> MismatchBound:
    """Risk of the unlearned model on private data, via the retrained risk.

    total = exp( n_pub/(n_pub + n_retain) * d_infty ) * base_risk
            + clip * diameter * sqrt(d_alpha / 2),
    where n_retain counts retained private examples, base_risk is the
    retrained model's risk on the training mixture, and d_alpha bounds the
    divergence between the retrained and unlearned weight distributions. For
    a ball-shaped parameter set of radius R the diameter is 2R. n_pub = 0
    gives penalty exactly 1 even when d_infty is infinite (no public data, no
    mismatch exposure).
    """
    _check_nonnegative(
        d_infty=d_infty, base_risk=base_risk, diameter=diameter, d_alpha=d_alpha
    )
    _check_positive(clip=clip)
    if n_pub < 0 or n_retain < 0:
        raise ValueError("counts must be nonnegative")
    if n_pub + n_retain == 0:
        raise ValueError("retain pool is empty")
    if n_pub == 0:
        penalty = 1.0
    else:
        frac = n_pub / (n_pub + n_retain)
        try:
            penalty = math.exp(frac * d_infty)
        except OverflowError:
            penalty = math.inf
    approx_error = clip * diameter * math.sqrt(d_alpha / 2.0)
    return MismatchBound(
        mismatch_penalty=penalty,
        approx_error=approx_error,
        total=penalty * base_risk + approx_error,
        inputs={
            "d_infty": d_infty,
            "n_pub": n_pub,
            "n_retain": n_retain,
            "base_risk": base_risk,
            "clip": clip,
            "diameter": diameter,
            "d_alpha": d_alpha,
        },
    )


def dinfty_discrete(p, q) -> float:
    """Worst-case log density ratio log max_i p_i / q_i over the support of p.

    Inputs are finite probability vectors on a shared support. Positions
    where p is zero do not contribute; p positive where q is zero yields the
    infinite marker.
    """
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if p.shape != q.shape or p.ndim != 1 or p.size == 0:
        raise ValueError("p and q must be equal-length nonempty vectors")
    if np.any(p < 0) or np.any(q < 0):
        raise ValueError("probabilities must be nonnegative")
    for name, vec in (("p", p), ("q", q)):
        if abs(float(vec.sum()) - 1.0) > 1e-9:
            raise ValueError(f"{name} must sum to 1")
    support = p > 0
    if np.any(q[support] == 0.0):
        return math.inf
    return float(np.log(np.max(p[support] / q[support])))
