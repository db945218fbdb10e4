"""Command-line front end.

One subcommand per workbench stage: `bounds`, `sample`, `estimate`, `attack`,
`experiment`, `fig3`, `divergence-curve`. Flags shared by every subcommand
(--config/--seed/--out/--workers/--no-plot) override the corresponding config
keys. Exit code 0 on success; on failure the offending stage is named on
stderr and the exit code is nonzero.
"""

from __future__ import annotations

import argparse
import os
import sys

from .attack import run_attack
from .config import ExperimentConfig, load_config
from .data_io import load_dataset, load_sample_set, save_json, write_csv
from .experiment import (
    StageError,
    emit_bound_report,
    emit_divergence_curve,
    emit_fig3_curve,
    run_experiment,
    run_sampling,
)
from .renyi import estimate_renyi
from .synth import generate_synthetic


def _int_list(raw: str) -> tuple:
    parts = [p.strip() for p in raw.split(",") if p.strip()]
    if not parts:
        raise argparse.ArgumentTypeError("expected a comma-separated int list")
    return tuple(int(p) for p in parts)


def _build_parser() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--config", help="config file (flat text or JSON)")
    shared.add_argument("--seed", type=int, help="override run.seed")
    shared.add_argument("--out", help="override run.out")
    shared.add_argument("--workers", type=int, help="override run.workers")
    shared.add_argument(
        "--no-plot", action="store_true",
        help="skip the PNG renderings next to the CSV/JSON outputs",
    )

    parser = argparse.ArgumentParser(
        prog="luw", description="asymmetric Langevin unlearning workbench"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser(
        "bounds", parents=[shared],
        help="analytic bound report plus a sweep over the public-pool size",
    )

    p_sample = sub.add_parser(
        "sample", parents=[shared],
        help="draw model samples for the learn/unlearn/retrain pipelines",
    )
    p_sample.add_argument(
        "--pipeline", choices=("learn", "unlearn", "retrain", "all"),
        default="all",
    )

    p_estimate = sub.add_parser(
        "estimate", parents=[shared],
        help="variational divergence estimate between two sample-set files",
    )
    p_estimate.add_argument("p_file", help="sample set for the numerator side")
    p_estimate.add_argument("q_file", help="sample set for the denominator side")
    p_estimate.add_argument("--alpha", type=float, help="override estimator.alpha")
    p_estimate.add_argument(
        "--objective", choices=("dv", "cc"), help="override estimator.objective"
    )
    p_estimate.add_argument(
        "--seeds", type=_int_list, help="override estimator.seeds (comma-separated)"
    )

    p_attack = sub.add_parser(
        "attack", parents=[shared],
        help="membership posterior attack from shadow and test sample sets",
    )
    p_attack.add_argument("shadow_u", help="shadow sample set, unlearned pipeline")
    p_attack.add_argument("shadow_r", help="shadow sample set, retrained pipeline")
    p_attack.add_argument("test_u", help="test sample set, unlearned pipeline")
    p_attack.add_argument("test_r", help="test sample set, retrained pipeline")
    p_attack.add_argument(
        "--data", required=True,
        help="dataset prefix whose forget split names the attacked example",
    )

    sub.add_parser(
        "experiment", parents=[shared],
        help="full pipeline: data, sampling, bounds, estimate, attack, figures",
    )

    p_fig3 = sub.add_parser(
        "fig3", parents=[shared],
        help="required-noise curves over the forget fraction (closed form)",
    )
    p_fig3.add_argument("--n-pub", type=_int_list, default=(0, 1000, 3000))
    p_fig3.add_argument("--grid-points", type=int, default=21)

    p_curve = sub.add_parser(
        "divergence-curve", parents=[shared],
        help="estimated divergence over a (n_pub x unlearning steps) grid",
    )
    p_curve.add_argument("--n-pub", type=_int_list, default=(0, 500, 1500))
    p_curve.add_argument("--k", type=_int_list, default=(1,))

    return parser


def _resolve_config(args, extra: "dict | None" = None) -> ExperimentConfig:
    mapping = dict(load_config(args.config)) if args.config else {}
    if args.seed is not None:
        mapping["run.seed"] = args.seed
    if args.out is not None:
        mapping["run.out"] = args.out
    if args.workers is not None:
        mapping["run.workers"] = args.workers
    if args.no_plot:
        mapping["run.plot"] = False
    for key, value in (extra or {}).items():
        if value is not None:
            mapping[key] = value
    return ExperimentConfig.from_mapping(mapping)


def _cmd_bounds(args) -> int:
    cfg = _resolve_config(args)
    report_path, sweep_path = emit_bound_report(cfg)
    print(report_path)
    print(sweep_path)
    return 0


def _cmd_sample(args) -> int:
    cfg = _resolve_config(args)
    os.makedirs(cfg.out_dir, exist_ok=True)
    if cfg.data_file:
        dataset, d_infty = load_dataset(cfg.data_file)
    else:
        dataset, d_infty = generate_synthetic(cfg.synth)
    from .data_io import save_dataset

    save_dataset(dataset, d_infty, os.path.join(cfg.out_dir, "dataset"))
    pipelines = (
        ("learn", "unlearn", "retrain")
        if args.pipeline == "all"
        else (args.pipeline,)
    )
    _, paths = run_sampling(cfg, dataset, pipelines)
    for path in paths.values():
        print(path)
    return 0


def _cmd_estimate(args) -> int:
    extra = {
        "estimator.alpha": args.alpha,
        "estimator.objective": args.objective,
        "estimator.seeds": args.seeds,
    }
    cfg = _resolve_config(args, extra)
    p_set = load_sample_set(args.p_file)
    q_set = load_sample_set(args.q_file)
    dim = p_set.samples.shape[1]
    est = estimate_renyi(p_set, q_set, cfg.discriminator_spec(dim), cfg.estimator)
    payload = {
        "value": est.value,
        "per_seed": list(est.per_seed),
        "config": {
            "alpha": cfg.estimator.alpha,
            "objective": cfg.estimator.objective,
            "epochs": cfg.estimator.epochs,
            "batch": cfg.estimator.batch,
            "learn_rate": cfg.estimator.learn_rate,
            "seeds": list(cfg.estimator.seeds),
            "hidden_width": cfg.hidden_width,
            "spectral_norm": cfg.spectral_norm,
        },
    }
    os.makedirs(cfg.out_dir, exist_ok=True)
    path = save_json(payload, os.path.join(cfg.out_dir, "estimate.json"))
    print(path)
    return 0


def _cmd_attack(args) -> int:
    cfg = _resolve_config(args)
    dataset, _ = load_dataset(args.data)
    if len(dataset.forget) == 0:
        raise ValueError("dataset has no forget example to attack")
    report = run_attack(
        load_sample_set(args.shadow_u),
        load_sample_set(args.shadow_r),
        load_sample_set(args.test_u),
        load_sample_set(args.test_r),
        dataset.forget.row(0),
    )
    os.makedirs(cfg.out_dir, exist_ok=True)
    payload = {
        "accuracy": report.accuracy,
        "confidence_quartiles": list(report.confidence_quartiles),
        "fit_unlearn": {"mu": report.fit_u.mu, "var": report.fit_u.var},
        "fit_retrain": {"mu": report.fit_r.mu, "var": report.fit_r.var},
        "n_test": len(report.posteriors),
    }
    json_path = save_json(payload, os.path.join(cfg.out_dir, "attack_report.json"))
    csv_path = write_csv(
        os.path.join(cfg.out_dir, "attack_posteriors.csv"),
        ["origin", "posterior"],
        list(zip(report.origins, report.posteriors)),
    )
    print(json_path)
    print(csv_path)
    if cfg.plot:
        from . import figures

        print(
            figures.render_attack_posteriors(
                report.posteriors, report.origins,
                os.path.join(cfg.out_dir, "attack_posteriors.png"),
            )
        )
    return 0


def _cmd_experiment(args) -> int:
    cfg = _resolve_config(args)
    artifact = run_experiment(cfg)
    print(artifact.files["artifact"])
    return 0


def _cmd_fig3(args) -> int:
    cfg = _resolve_config(args)
    print(
        emit_fig3_curve(
            cfg.out_dir, n_pub_values=args.n_pub,
            grid_points=args.grid_points, plot=cfg.plot,
        )
    )
    return 0


def _cmd_divergence_curve(args) -> int:
    cfg = _resolve_config(args)
    print(
        emit_divergence_curve(
            cfg, n_pub_values=args.n_pub, k_values=args.k, plot=cfg.plot
        )
    )
    return 0


_COMMANDS = {
    "bounds": _cmd_bounds,
    "sample": _cmd_sample,
    "estimate": _cmd_estimate,
    "attack": _cmd_attack,
    "experiment": _cmd_experiment,
    "fig3": _cmd_fig3,
    "divergence-curve": _cmd_divergence_curve,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except StageError as exc:
        print(f"error in stage '{exc.stage}': {exc.original}", file=sys.stderr)
        return 2
    except (ValueError, OSError, KeyError) as exc:
        print(f"error in stage '{args.command}': {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
