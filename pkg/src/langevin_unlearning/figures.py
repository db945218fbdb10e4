"""Figure rendering for the report emitters.

Every renderer takes data that already lives in a delimited file, draws the
matching picture with the non-interactive backend, and writes a PNG next to
the CSV/JSON it illustrates. Rendering is presentation only: nothing here
feeds back into any computed number, and every emitter can be told to skip
plotting entirely.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .data_io import read_csv  # noqa: E402


def render_fig3(csv_path: str, png_path: str) -> str:
    """Required noise vs forget fraction, one line per public-pool size."""
    _, header, rows = read_csv(csv_path)
    cs = [float(r[0]) for r in rows]
    fig, ax = plt.subplots(figsize=(5.5, 4))
    for col in range(1, len(header)):
        ax.plot(cs, [float(r[col]) for r in rows], marker=".", label=header[col])
    ax.set_xlabel("forget fraction c")
    ax.set_ylabel("required noise sigma")
    ax.legend(fontsize=8)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(png_path, dpi=120)
    plt.close(fig)
    return png_path


def render_bounds_sweep(csv_path: str, png_path: str) -> str:
    """Analytic bounds vs public-pool size (log scale where positive)."""
    _, header, rows = read_csv(csv_path)
    n_pubs = [int(r[0]) for r in rows]
    fig, ax = plt.subplots(figsize=(5.5, 4))
    for col in range(1, min(len(header), 4)):
        values = [float(r[col]) for r in rows]
        ax.plot(n_pubs, values, marker=".", label=header[col])
    ax.set_xlabel("n_pub")
    ax.set_ylabel("bound value")
    if all(float(r[c]) > 0 for r in rows for c in range(1, min(len(header), 4))):
        ax.set_yscale("log")
    ax.legend(fontsize=8)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(png_path, dpi=120)
    plt.close(fig)
    return png_path


def render_divergence_curve(csv_path: str, png_path: str) -> str:
    """Estimated divergence vs public-pool size, one line per K."""
    _, _, rows = read_csv(csv_path)
    by_k = {}
    for row in rows:
        by_k.setdefault(int(row[1]), []).append(
            (int(row[0]), float(row[2]), float(row[3]))
        )
    fig, ax = plt.subplots(figsize=(5.5, 4))
    for k in sorted(by_k):
        pts = sorted(by_k[k])
        ax.errorbar(
            [p[0] for p in pts],
            [p[1] for p in pts],
            yerr=[p[2] for p in pts],
            marker="o",
            capsize=3,
            label=f"K = {k}",
        )
    ax.set_xlabel("public examples")
    ax.set_ylabel("estimated divergence")
    ax.legend(fontsize=8)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(png_path, dpi=120)
    plt.close(fig)
    return png_path


def render_unlearn_decay(ks, bound_values, estimate_value, png_path: str) -> str:
    """Analytic decay of the unlearn bound, with the estimate overlaid."""
    fig, ax = plt.subplots(figsize=(5.5, 4))
    ax.plot(list(ks), list(bound_values), marker="o", label="analytic bound")
    if estimate_value is not None:
        ax.axhline(estimate_value, color="tab:red", linestyle="--",
                   label="estimated divergence")
    ax.set_xlabel("unlearning steps K")
    ax.set_ylabel("divergence bound")
    ax.set_yscale("log")
    ax.legend(fontsize=8)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(png_path, dpi=120)
    plt.close(fig)
    return png_path


def render_attack_posteriors(posteriors, origins, png_path: str) -> str:
    """Posterior histograms conditioned on the true origin."""
    fig, ax = plt.subplots(figsize=(5.5, 4))
    groups = {"unlearn": [], "retrain": []}
    for posterior, origin in zip(posteriors, origins):
        groups[origin].append(posterior)
    for origin, color in (("unlearn", "tab:blue"), ("retrain", "tab:orange")):
        ax.hist(groups[origin], bins=20, range=(0.0, 1.0), alpha=0.6,
                color=color, label=f"true origin: {origin}")
    ax.axvline(0.5, color="k", linewidth=0.8)
    ax.set_xlabel("posterior of the unlearning pipeline")
    ax.set_ylabel("test models")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(png_path, dpi=120)
    plt.close(fig)
    return png_path
