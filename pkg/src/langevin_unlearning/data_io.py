"""File formats: datasets as CSV + JSON manifest, everything else JSON/CSV.

Floats are serialized through repr (shortest round-trip form), so every
persisted number reloads to the identical double and re-serializing a loaded
object reproduces the file byte for byte. Numerical reports carry no
timestamps; wall-clock timings live only in the run artifact wrapper.
"""

from __future__ import annotations

import csv
import json
import os

import numpy as np

from .model import Dataset, Examples
from .pngd import HyperParams, ModelSampleSet


def save_json(obj, path: str) -> str:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def load_json(path: str):
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def write_csv(path: str, header, rows, metadata=()) -> str:
    """CSV with optional '# key = value' metadata lines above the header."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        for line in metadata:
            fh.write(f"# {line}\n")
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(v) if isinstance(v, float) else v for v in row])
    return path


def read_csv(path: str):
    """Returns (metadata lines, header, rows of strings)."""
    metadata = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        lines = list(fh)
    body = []
    for line in lines:
        if line.startswith("#"):
            metadata.append(line[1:].strip())
        else:
            body.append(line)
    reader = csv.reader(body)
    table = list(reader)
    if not table:
        raise ValueError(f"empty CSV: {path}")
    return metadata, table[0], table[1:]


def save_dataset(dataset: Dataset, d_infty: float, prefix: str) -> tuple:
    """Writes <prefix>.csv (split,label,x...) and <prefix>.json manifest."""
    dim = dataset.dim
    header = ["split", "label"] + [f"x{i}" for i in range(dim)]
    rows = []
    for split, examples in (
        ("public", dataset.public),
        ("retain", dataset.private_retain),
        ("forget", dataset.forget),
    ):
        for i in range(len(examples)):
            rows.append([split, repr(float(examples.y[i]))]
                        + [repr(float(v)) for v in examples.x[i]])
    csv_path = write_csv(prefix + ".csv", header, rows)
    manifest = {
        "dim": dim,
        "n_pub": dataset.n_pub,
        "n_priv": dataset.n_priv,
        "n_forget": len(dataset.forget),
        "d_infty": d_infty,
    }
    return csv_path, save_json(manifest, prefix + ".json")


def load_dataset(prefix: str):
    manifest = load_json(prefix + ".json")
    _, header, rows = read_csv(prefix + ".csv")
    dim = len(header) - 2
    pools = {"public": [], "retain": [], "forget": []}
    labels = {"public": [], "retain": [], "forget": []}
    for row in rows:
        split = row[0]
        if split not in pools:
            raise ValueError(f"unknown split {split!r}")
        labels[split].append(float(row[1]))
        pools[split].append([float(v) for v in row[2:]])

    def examples(split):
        if not pools[split]:
            return Examples.empty(dim)
        return Examples(np.array(pools[split]), np.array(labels[split]))

    dataset = Dataset(
        public=examples("public"),
        private_retain=examples("retain"),
        forget=examples("forget"),
    )
    if dataset.dim != manifest["dim"] or dataset.n_pub != manifest["n_pub"]:
        raise ValueError("manifest disagrees with the CSV contents")
    return dataset, float(manifest["d_infty"])


def save_sample_set(samples: ModelSampleSet, path: str) -> str:
    payload = {
        "pipeline": samples.pipeline,
        "n_pub": samples.n_pub,
        "n_priv": samples.n_priv,
        "n_forget": samples.n_forget,
        "seeds": list(samples.seeds),
        "hyper": {
            "eta": samples.hyper.eta,
            "sigma": samples.hyper.sigma,
            "steps_learn": samples.hyper.steps_learn,
            "steps_unlearn": samples.hyper.steps_unlearn,
            "radius": samples.hyper.radius,
        },
        "samples": [[float(v) for v in row] for row in samples.samples],
    }
    return save_json(payload, path)


def load_sample_set(path: str) -> ModelSampleSet:
    payload = load_json(path)
    hyper = HyperParams(**payload["hyper"])
    return ModelSampleSet(
        pipeline=payload["pipeline"],
        samples=np.array(payload["samples"], dtype=np.float64).reshape(
            len(payload["samples"]), -1
        ),
        hyper=hyper,
        n_pub=payload["n_pub"],
        n_priv=payload["n_priv"],
        n_forget=payload["n_forget"],
        seeds=tuple(payload["seeds"]),
    )


def files_exist(paths) -> bool:
    return all(os.path.exists(p) for p in paths)
