"""Experiment configuration: flat dotted keys, text or JSON encoded.

The text form is one ``section.key = value`` assignment per line with ``#``
comments; the JSON form is a flat object with the same keys. Unknown keys are
rejected rather than ignored so that typos fail loudly. The resolved object
bundles the typed domain configs used by the orchestration layer.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass

from .model import LossProfile, derive_profile
from .pngd import HyperParams
from .renyi import DiscriminatorSpec, EstimatorConfig
from .synth import SyntheticShiftSpec


def _parse_bool(raw: str) -> bool:
    lowered = str(raw).strip().lower()
    if lowered in ("true", "yes", "1", "on"):
        return True
    if lowered in ("false", "no", "0", "off"):
        return False
    raise ValueError(f"not a boolean: {raw!r}")


def _parse_seeds(raw) -> tuple:
    if isinstance(raw, (list, tuple)):
        return tuple(int(s) for s in raw)
    parts = [p.strip() for p in str(raw).split(",") if p.strip()]
    if not parts:
        raise ValueError("seed list is empty")
    return tuple(int(p) for p in parts)


def _coerce_bool(raw) -> bool:
    return raw if isinstance(raw, bool) else _parse_bool(raw)


def _coerce_str(raw):
    return None if raw is None else str(raw)


# key -> (coercion, default)
SCHEMA = {
    "data.file": (_coerce_str, None),
    "data.dim": (int, 10),
    "data.n_pub": (int, 0),
    "data.n_priv": (int, 2000),
    "data.n_forget": (int, 100),
    "data.shift": (float, 0.5),
    "data.clusters": (int, 2),
    "data.label_flip_fraction": (float, 0.0),
    "data.jitter": (float, 0.25),
    "data.seed": (int, 0),
    "model.lam": (float, 0.05),
    "model.clip": (float, 1.0),
    "engine.eta": (float, 0.5),
    "engine.sigma": (float, 0.05),
    "engine.steps_learn": (int, 20),
    "engine.steps_unlearn": (int, 5),
    "engine.radius": (float, 10.0),
    "engine.n_models": (int, 200),
    "estimator.enabled": (_coerce_bool, True),
    "estimator.alpha": (float, 2.0),
    "estimator.epochs": (int, 60),
    "estimator.batch": (int, 256),
    "estimator.learn_rate": (float, 1e-3),
    "estimator.seeds": (_parse_seeds, (0, 1, 2, 3, 4)),
    "estimator.objective": (str, "dv"),
    "estimator.hidden_width": (int, 64),
    "estimator.spectral_norm": (_coerce_bool, False),
    "attack.enabled": (_coerce_bool, False),
    "attack.n_test": (int, 25),
    "bounds.epsilon": (float, 1.0),
    "bounds.c0": (float, 1.0),
    "run.seed": (int, 0),
    "run.out": (str, "out"),
    "run.workers": (int, 1),
    "run.plot": (_coerce_bool, True),
}


def parse_config_text(text: str) -> dict:
    """Raw key -> string mapping from the flat text form."""
    mapping = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ValueError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, value = stripped.split("=", 1)
        key = key.strip()
        if key in mapping:
            raise ValueError(f"line {lineno}: duplicate key {key!r}")
        mapping[key] = value.strip()
    return mapping


def load_config(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    if path.endswith(".json"):
        mapping = json.loads(text)
        if not isinstance(mapping, dict):
            raise ValueError("JSON config must be a flat object")
        return mapping
    return parse_config_text(text)


def resolve_settings(mapping: dict) -> dict:
    """Coerce a raw mapping against the schema; unknown keys are errors."""
    unknown = sorted(set(mapping) - set(SCHEMA))
    if unknown:
        raise ValueError(f"unknown config keys: {', '.join(unknown)}")
    settings = {}
    for key, (coerce, default) in SCHEMA.items():
        if key in mapping:
            try:
                settings[key] = coerce(mapping[key])
            except (TypeError, ValueError) as exc:
                raise ValueError(f"bad value for {key}: {exc}") from exc
        else:
            settings[key] = default
    return settings


@dataclass(frozen=True)
class ExperimentConfig:
    """Typed bundle the orchestrator consumes."""

    data_file: "str | None"
    synth: SyntheticShiftSpec
    lam: float
    clip: float
    hyper: HyperParams
    n_models: int
    estimator: EstimatorConfig
    hidden_width: int
    spectral_norm: bool
    run_estimator: bool
    run_attack: bool
    n_test: int
    epsilon: float
    c0: float
    seed: int
    out_dir: str
    workers: int
    plot: bool
    settings: dict

    @classmethod
    def from_mapping(cls, mapping: dict) -> "ExperimentConfig":
        s = resolve_settings(mapping)
        # data.file is a prefix naming a <prefix>.csv / <prefix>.json pair
        if s["data.file"] is not None and not os.path.exists(s["data.file"] + ".csv"):
            raise ValueError(f"data file not found: {s['data.file']}.csv")
        synth = SyntheticShiftSpec(
            dim=s["data.dim"],
            n_pub=s["data.n_pub"],
            n_priv=s["data.n_priv"],
            n_forget=s["data.n_forget"],
            shift=s["data.shift"],
            clusters=s["data.clusters"],
            label_flip_fraction=s["data.label_flip_fraction"],
            jitter=s["data.jitter"],
            seed=s["data.seed"],
        )
        hyper = HyperParams(
            eta=s["engine.eta"],
            sigma=s["engine.sigma"],
            steps_learn=s["engine.steps_learn"],
            steps_unlearn=s["engine.steps_unlearn"],
            radius=s["engine.radius"],
        )
        estimator = EstimatorConfig(
            alpha=s["estimator.alpha"],
            epochs=s["estimator.epochs"],
            batch=s["estimator.batch"],
            learn_rate=s["estimator.learn_rate"],
            seeds=s["estimator.seeds"],
            objective=s["estimator.objective"],
        )
        return cls(
            data_file=s["data.file"],
            synth=synth,
            lam=s["model.lam"],
            clip=s["model.clip"],
            hyper=hyper,
            n_models=s["engine.n_models"],
            estimator=estimator,
            hidden_width=s["estimator.hidden_width"],
            spectral_norm=s["estimator.spectral_norm"],
            run_estimator=s["estimator.enabled"],
            run_attack=s["attack.enabled"],
            n_test=s["attack.n_test"],
            epsilon=s["bounds.epsilon"],
            c0=s["bounds.c0"],
            seed=s["run.seed"],
            out_dir=s["run.out"],
            workers=s["run.workers"],
            plot=s["run.plot"],
            settings=s,
        )

    @property
    def profile(self) -> LossProfile:
        return derive_profile(lam=self.lam, clip=self.clip)

    def discriminator_spec(self, dim: int) -> DiscriminatorSpec:
        output = "polysoftplus" if self.estimator.objective == "cc" else "identity"
        return DiscriminatorSpec(
            input_dim=dim,
            hidden_width=self.hidden_width,
            output_activation=output,
            spectral_norm=self.spectral_norm,
        )

    def canonical_text(self) -> str:
        lines = []
        for key in sorted(self.settings):
            value = self.settings[key]
            if isinstance(value, tuple):
                value = ",".join(str(v) for v in value)
            lines.append(f"{key} = {value}")
        return "\n".join(lines) + "\n"

    def config_hash(self) -> str:
        return hashlib.sha256(self.canonical_text().encode("utf-8")).hexdigest()
