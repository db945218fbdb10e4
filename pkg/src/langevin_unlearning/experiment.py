"""Orchestration: data -> sampling -> bounds -> estimate -> attack -> report.

Every stage is timed and fault-isolated; a failure aborts the run with the
stage name while keeping whatever files earlier stages already wrote. All
numerical outputs are pure functions of the resolved configuration, so a
re-run with the same config and seed rewrites byte-identical reports (the
wall-clock timings live only in the artifact wrapper, never in the numeric
files).
"""

from __future__ import annotations

import math
import os
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .attack import run_attack
from .bounds import (
    DataPartition,
    bound_learn_retrain,
    bound_unlearn,
    decide_unlearn_vs_retrain,
    gradient_sensitivity,
    lsi_nonconvex,
    lsi_strongly_convex,
    lsi_universal_compact,
    min_steps_forward,
    public_ratio_threshold,
    required_sigma,
)
from .config import ExperimentConfig
from .data_io import (
    load_dataset,
    save_dataset,
    save_json,
    save_sample_set,
    write_csv,
)
from .model import derive_profile
from .pngd import sample_distribution
from .renyi import estimate_renyi
from .synth import generate_synthetic, ground_truth_dinfty

FIG3_DEFAULTS = {
    "lam": 0.0119,
    "clip": 1.0,
    "alpha": 2.0,
    "epsilon": 1.0,
    "steps": 10_000,
    "n_priv": 3000,
}


# canonical pipeline order fixes the seed-base offsets; a standalone
# `sample --pipeline unlearn` reproduces the models of a full experiment run
_PIPELINE_ORDER = ("learn", "unlearn", "retrain")


class StageError(RuntimeError):
    """A pipeline stage failed; carries the stage name for the exit message."""

    def __init__(self, stage: str, original: Exception):
        super().__init__(f"stage '{stage}' failed: {original}")
        self.stage = stage
        self.original = original


@dataclass(frozen=True)
class RunArtifact:
    config_hash: str
    out_dir: str
    files: dict
    bound_report: dict
    estimate: "dict | None"
    attack: "dict | None"
    timings: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        missing = sorted(p for p in self.files.values() if not os.path.exists(p))
        if missing:
            raise ValueError(f"artifact references missing files: {missing}")


def _stage(name: str, timings: dict, fn):
    start = time.perf_counter()
    try:
        result = fn()
    except StageError:
        raise
    except Exception as exc:
        raise StageError(name, exc) from exc
    timings[name] = time.perf_counter() - start
    return result


def _seed_base(cfg: ExperimentConfig) -> int:
    # wide spacing so pipelines, test sets, and sweep cells never share seeds
    return cfg.seed * 1_000_003


def _schedule_for(cfg: ExperimentConfig):
    """LSI schedule over the learning phase, picked by the loss profile."""
    profile = cfg.profile
    hp = cfg.hyper
    sigma_sq = hp.sigma**2
    if profile.m > 0:
        regime = "strongly_convex"
        schedule = lsi_strongly_convex(
            cfg.c0, hp.eta, profile.m, sigma_sq, hp.steps_learn
        )
    else:
        regime = "nonconvex"
        schedule = lsi_nonconvex(cfg.c0, hp.eta, profile.L, sigma_sq, hp.steps_learn)
    return schedule, regime, schedule.constant_at(hp.steps_learn)


def compute_bound_report(cfg: ExperimentConfig, part: DataPartition,
                         d_infty: "float | None" = None) -> dict:
    """All analytic quantities for one configuration, as a JSON-ready dict."""
    profile = cfg.profile
    hp = cfg.hyper
    sigma_sq = hp.sigma**2
    strongly_convex = profile.m > 0
    schedule, regime, c_start = _schedule_for(cfg)

    d_init = bound_learn_retrain(cfg.estimator.alpha, profile, hp, part, schedule)
    # the strongly convex decay route only consults c_start; every other
    # route gets the uniform-in-time compact constant so any K is coverable
    unlearn_schedule = lsi_universal_compact(hp.radius, hp.eta, profile.M, sigma_sq)
    after_unlearn = bound_unlearn(
        d_init, hp.steps_unlearn, cfg.estimator.alpha, hp, profile,
        unlearn_schedule, regime, c_start=c_start,
    )
    # forward search is cheap only while the exponential route applies
    premise_ok = strongly_convex and c_start > sigma_sq / profile.m
    steps_to_target = (
        min_steps_forward(
            d_init, cfg.epsilon, cfg.estimator.alpha, hp, profile,
            unlearn_schedule, regime, c_start=c_start, max_steps=100_000,
        )
        if premise_ok
        else None
    )

    report = {
        "alpha": cfg.estimator.alpha,
        "epsilon": cfg.epsilon,
        "partition": {
            "n_pub": part.n_pub,
            "n_priv": part.n_priv,
            "n_forget": part.n_forget,
        },
        "profile": {
            "clip": profile.M,
            "smoothness": profile.L,
            "strong_convexity": profile.m,
        },
        "hyper": {
            "eta": hp.eta,
            "sigma": hp.sigma,
            "steps_learn": hp.steps_learn,
            "steps_unlearn": hp.steps_unlearn,
            "radius": hp.radius,
        },
        "regime": regime,
        "lsi_c0": cfg.c0,
        "lsi_c_end_of_learning": c_start,
        "step_sensitivity": gradient_sensitivity(hp.eta, profile.M, part),
        "learn_retrain_bound": d_init.value,
        "unlearn_bound": after_unlearn.value,
        "unlearn_bound_flags": {
            k: v
            for k, v in after_unlearn.inputs.items()
            if k == "decay_premise_failed"
        },
        "min_steps_to_epsilon": steps_to_target,
    }
    if d_infty is not None:
        report["d_infty"] = d_infty

    if strongly_convex:
        for mode in ("symmetric", "asymmetric"):
            req = required_sigma(
                cfg.estimator.alpha, profile, part, cfg.epsilon,
                hp.steps_learn, hp.eta, mode, "strongly_convex",
            )
            report[f"required_sigma_{mode}"] = req.sigma
        decision = decide_unlearn_vs_retrain(
            c_start, cfg.estimator.alpha, sigma_sq, hp.eta, profile,
            cfg.epsilon, part, hp.steps_learn,
        )
        report["decision"] = {
            "lhs": decision.lhs,
            "rhs": decision.rhs,
            "unlearn_preferred": decision.unlearn_preferred,
            "min_k": decision.min_k,
        }
        report["public_ratio_threshold"] = public_ratio_threshold(
            cfg.estimator.alpha, sigma_sq, hp.eta, c_start, profile,
            cfg.epsilon, hp.steps_learn, part.forget_fraction,
        )
    return report


def run_sampling(cfg: ExperimentConfig, dataset, pipelines=_PIPELINE_ORDER):
    """Draw and persist model samples; returns ({pipeline: set}, {pipeline: path})."""
    base = _seed_base(cfg)
    sets: dict = {}
    paths: dict = {}
    for pipeline in pipelines:
        offset = _PIPELINE_ORDER.index(pipeline)
        sets[pipeline] = sample_distribution(
            dataset, pipeline, cfg.n_models, cfg.hyper, cfg.profile,
            base + offset * cfg.n_models, workers=cfg.workers,
        )
        paths[pipeline] = save_sample_set(
            sets[pipeline], os.path.join(cfg.out_dir, f"samples_{pipeline}.json")
        )
    return sets, paths


def run_experiment(cfg: ExperimentConfig) -> RunArtifact:
    os.makedirs(cfg.out_dir, exist_ok=True)
    files: dict = {}
    timings: dict = {}
    profile = cfg.profile

    def data_stage():
        if cfg.data_file:
            loaded = load_dataset(cfg.data_file)
        else:
            loaded = generate_synthetic(cfg.synth)
        dataset, d_infty = loaded
        csv_path, manifest_path = save_dataset(
            dataset, d_infty, os.path.join(cfg.out_dir, "dataset")
        )
        files["dataset_csv"] = csv_path
        files["dataset_manifest"] = manifest_path
        return dataset, d_infty

    dataset, d_infty = _stage("data", timings, data_stage)

    def sample_stage():
        sets, paths = run_sampling(cfg, dataset)
        for pipeline, path in paths.items():
            files[f"samples_{pipeline}"] = path
        return sets

    sample_sets = _stage("sample", timings, sample_stage)

    def bounds_stage():
        part = DataPartition(
            n_pub=dataset.n_pub,
            n_priv=dataset.n_priv,
            n_forget=len(dataset.forget),
        )
        report = compute_bound_report(cfg, part, d_infty)
        files["bound_report"] = save_json(
            report, os.path.join(cfg.out_dir, "bound_report.json")
        )
        return report

    bound_report = _stage("bounds", timings, bounds_stage)

    estimate_dict = None
    if cfg.run_estimator:

        def estimate_stage():
            est = estimate_renyi(
                sample_sets["retrain"], sample_sets["unlearn"],
                cfg.discriminator_spec(dataset.dim), cfg.estimator,
            )
            payload = {
                "value": est.value,
                "per_seed": list(est.per_seed),
                "objective": est.objective,
                "alpha": est.alpha,
                "n_p": est.n_p,
                "n_q": est.n_q,
            }
            files["estimate"] = save_json(
                payload, os.path.join(cfg.out_dir, "estimate.json")
            )
            return payload

        estimate_dict = _stage("estimate", timings, estimate_stage)

    attack_dict = None
    if cfg.run_attack:

        def attack_stage():
            if len(dataset.forget) == 0:
                raise ValueError("attack needs a designated forget example")
            base = _seed_base(cfg) + 3 * cfg.n_models
            test_u = sample_distribution(
                dataset, "unlearn", cfg.n_test, cfg.hyper, profile,
                base, workers=cfg.workers,
            )
            test_r = sample_distribution(
                dataset, "retrain", cfg.n_test, cfg.hyper, profile,
                base + cfg.n_test, workers=cfg.workers,
            )
            report = run_attack(
                sample_sets["unlearn"], sample_sets["retrain"],
                test_u, test_r, dataset.forget.row(0),
            )
            payload = {
                "accuracy": report.accuracy,
                "confidence_quartiles": list(report.confidence_quartiles),
                "fit_unlearn": {"mu": report.fit_u.mu, "var": report.fit_u.var},
                "fit_retrain": {"mu": report.fit_r.mu, "var": report.fit_r.var},
                "n_test": len(report.posteriors),
            }
            files["attack_report"] = save_json(
                payload, os.path.join(cfg.out_dir, "attack_report.json")
            )
            files["attack_posteriors"] = write_csv(
                os.path.join(cfg.out_dir, "attack_posteriors.csv"),
                ["origin", "posterior"],
                list(zip(report.origins, report.posteriors)),
            )
            if cfg.plot:
                from . import figures

                files["attack_png"] = figures.render_attack_posteriors(
                    report.posteriors, report.origins,
                    os.path.join(cfg.out_dir, "attack_posteriors.png"),
                )
            return payload

        attack_dict = _stage("attack", timings, attack_stage)

    if cfg.plot:

        def figure_stage():
            from . import figures

            part = DataPartition(
                n_pub=dataset.n_pub,
                n_priv=dataset.n_priv,
                n_forget=len(dataset.forget),
            )
            hp = cfg.hyper
            schedule, regime, c_start = _schedule_for(cfg)
            d_init = bound_learn_retrain(
                cfg.estimator.alpha, profile, hp, part, schedule
            )
            unlearn_schedule = lsi_universal_compact(
                hp.radius, hp.eta, profile.M, hp.sigma**2
            )
            ks = list(range(0, hp.steps_unlearn + 1))
            decay = [
                bound_unlearn(
                    d_init, k, cfg.estimator.alpha, hp, profile,
                    unlearn_schedule, regime, c_start=c_start,
                ).value
                for k in ks
            ]
            files["bounds_png"] = figures.render_unlearn_decay(
                ks, decay,
                estimate_dict["value"] if estimate_dict else None,
                os.path.join(cfg.out_dir, "unlearn_decay.png"),
            )

        _stage("figures", timings, figure_stage)

    artifact_payload = {
        "config_hash": cfg.config_hash(),
        "settings": {
            k: (",".join(str(x) for x in v) if isinstance(v, tuple) else v)
            for k, v in cfg.settings.items()
        },
        "files": dict(files),
        "timings": timings,
    }
    files["artifact"] = save_json(
        artifact_payload, os.path.join(cfg.out_dir, "artifact.json")
    )
    return RunArtifact(
        config_hash=cfg.config_hash(),
        out_dir=cfg.out_dir,
        files=files,
        bound_report=bound_report,
        estimate=estimate_dict,
        attack=attack_dict,
        timings=timings,
    )


def emit_bound_report(cfg: ExperimentConfig, n_pub_values=None) -> tuple:
    """Bound report JSON plus a sweep CSV of the bounds over the public size.

    The sweep holds the private side fixed and varies only n_pub, which is
    the knob the asymmetric analysis rewards; analytic only, no sampling.
    """
    os.makedirs(cfg.out_dir, exist_ok=True)
    if cfg.data_file:
        dataset, d_infty = load_dataset(cfg.data_file)
        part = DataPartition(dataset.n_pub, dataset.n_priv, len(dataset.forget))
    else:
        spec = cfg.synth
        part = DataPartition(spec.n_pub, spec.n_priv, spec.n_forget)
        d_infty = ground_truth_dinfty(spec)
    report = compute_bound_report(cfg, part, d_infty)
    report_path = save_json(report, os.path.join(cfg.out_dir, "bound_report.json"))

    if n_pub_values is None:
        n_pub_values = tuple(round(i * part.n_priv / 2) for i in range(7))
    strongly_convex = cfg.profile.m > 0
    header = ["n_pub", "learn_retrain_bound", "unlearn_bound"]
    if strongly_convex:
        header += ["required_sigma_asym", "decision_lhs", "unlearn_preferred"]
    rows = []
    for n_pub in n_pub_values:
        swept_part = DataPartition(int(n_pub), part.n_priv, part.n_forget)
        swept = compute_bound_report(cfg, swept_part)
        row = [int(n_pub), swept["learn_retrain_bound"], swept["unlearn_bound"]]
        if strongly_convex:
            row += [
                swept["required_sigma_asymmetric"],
                swept["decision"]["lhs"],
                swept["decision"]["unlearn_preferred"],
            ]
        rows.append(row)
    sweep_path = write_csv(
        os.path.join(cfg.out_dir, "bounds_vs_npub.csv"), header, rows,
        [f"config_hash = {cfg.config_hash()}"],
    )
    if cfg.plot:
        from . import figures

        figures.render_bounds_sweep(
            sweep_path, os.path.join(cfg.out_dir, "bounds_vs_npub.png")
        )
    return report_path, sweep_path


def emit_fig3_curve(out_dir: str, n_pub_values=(0, 1000, 3000),
                    grid_points: int = 21, plot: bool = True) -> str:
    """Required-noise curves over the forget fraction, closed form only."""
    os.makedirs(out_dir, exist_ok=True)
    d = FIG3_DEFAULTS
    profile = derive_profile(lam=d["lam"], clip=d["clip"])
    eta = 1.0 / profile.L
    header = ["c", "sigma_sym"] + [f"sigma_asym_npub{p}" for p in n_pub_values]
    rows = []
    for i in range(grid_points):
        n_forget = round(i * d["n_priv"] / (grid_points - 1))
        part_sym = DataPartition(0, d["n_priv"], n_forget)
        sym = required_sigma(
            d["alpha"], profile, part_sym, d["epsilon"], d["steps"], eta,
            "symmetric", "strongly_convex",
        )
        row = [n_forget / d["n_priv"], sym.sigma]
        for n_pub in n_pub_values:
            part = DataPartition(n_pub, d["n_priv"], n_forget)
            asym = required_sigma(
                d["alpha"], profile, part, d["epsilon"], d["steps"], eta,
                "asymmetric", "strongly_convex",
            )
            row.append(asym.sigma)
        rows.append(row)
    metadata = [f"{k} = {v}" for k, v in sorted(d.items())] + [f"eta = {eta!r}"]
    csv_path = write_csv(os.path.join(out_dir, "fig3.csv"), header, rows, metadata)
    if plot:
        from . import figures

        figures.render_fig3(csv_path, os.path.join(out_dir, "fig3.png"))
    return csv_path


def emit_divergence_curve(cfg: ExperimentConfig, n_pub_values=(0, 500, 1500),
                          k_values=(1,), plot: bool = True) -> str:
    """Estimated divergence over a (public size x unlearning steps) grid."""
    os.makedirs(cfg.out_dir, exist_ok=True)
    profile = cfg.profile
    rows = []
    for i, n_pub in enumerate(n_pub_values):
        spec = replace(cfg.synth, n_pub=int(n_pub))
        dataset, _ = generate_synthetic(spec)
        for j, k in enumerate(k_values):
            hp = replace(cfg.hyper, steps_unlearn=int(k))
            base = _seed_base(cfg) + (i * len(k_values) + j + 1) * 10 * cfg.n_models
            unlearn = sample_distribution(
                dataset, "unlearn", cfg.n_models, hp, profile,
                base, workers=cfg.workers,
            )
            retrain = sample_distribution(
                dataset, "retrain", cfg.n_models, hp, profile,
                base + cfg.n_models, workers=cfg.workers,
            )
            est = estimate_renyi(
                retrain, unlearn, cfg.discriminator_spec(dataset.dim),
                cfg.estimator,
            )
            spread = (
                float(np.std(est.per_seed, ddof=1)) / math.sqrt(len(est.per_seed))
                if len(est.per_seed) > 1
                else 0.0
            )
            rows.append([
                int(n_pub), int(k), est.value, spread,
                ";".join(repr(float(v)) for v in est.per_seed),
            ])
    metadata = [f"config_hash = {cfg.config_hash()}"]
    csv_path = write_csv(
        os.path.join(cfg.out_dir, "divergence_curve.csv"),
        ["n_pub", "steps_unlearn", "d_hat", "stderr", "per_seed"],
        rows, metadata,
    )
    if plot:
        from . import figures

        figures.render_divergence_curve(
            csv_path, os.path.join(cfg.out_dir, "divergence_curve.png")
        )
    return csv_path
