"""Figure rendering: Pareto-front scatters and anytime hypervolume curves.

Images are deterministic given the inputs: fixed figure sizes, a fixed SVG
hash salt, and no timestamps in the metadata.
"""
from __future__ import annotations

import logging
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "eagga-plots"

import matplotlib.pyplot as plt
import numpy as np

from .io import (group_by_seed_pattern, mean_and_standard_error,
                 read_front, read_trace)

log = logging.getLogger("eagga_plots")

PANELS = (("nf", "features used (NF)"), ("ni", "interactions (NI)"),
          ("nnm", "non-monotone features (NNM)"))


def _save(fig, out_image):
    out = Path(out_image)
    out.parent.mkdir(parents=True, exist_ok=True)
    metadata = {"Date": None} if out.suffix.lower() == ".svg" else {}
    fig.savefig(out, metadata=metadata)
    plt.close(fig)
    return out


def plot_front(front_csv_paths, out_image):
    """Three-panel scatter of AUC against each interpretability measure,
    one series per input file, legend labels from the file stems."""
    tables = [read_front(p) for p in front_csv_paths]
    fig, axes = plt.subplots(1, 3, figsize=(12.0, 4.0), sharey=True)
    for ax, (key, label) in zip(axes, PANELS):
        for table in tables:
            ax.scatter(getattr(table, key), table.auc, s=22, alpha=0.8, label=table.name)
        ax.set_xlabel(label)
        ax.set_xlim(-0.05, 1.05)
        ax.grid(True, alpha=0.3)
    axes[0].set_ylabel("AUC")
    if tables:
        axes[0].legend(loc="lower right", fontsize=8)
    fig.suptitle("Pareto front: performance vs interpretability")
    fig.tight_layout()
    return _save(fig, out_image)


def plot_hv(trace_csv_paths, out_image):
    """Anytime hypervolume, step lines on a log10 evaluation axis.

    Traces whose file stems share a `<name>_seed<k>` pattern are aggregated
    into a mean line with a standard-error ribbon. Returns the list of
    warnings raised (a non-monotone trace indicates an exporter bug).
    """
    traces = [read_trace(p) for p in trace_csv_paths]
    warnings = []
    for t in traces:
        if np.any(np.diff(t.hypervolume) < 0):
            msg = f"trace {t.name} is not non-decreasing; export looks corrupted"
            warnings.append(msg)
            log.warning(msg)
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    by_name = {t.name: t for t in traces}
    for stem, names in sorted(group_by_seed_pattern(by_name).items()):
        members = [by_name[n] for n in sorted(names)]
        if len(members) == 1:
            t = members[0]
            ax.step(t.eval_index, t.hypervolume, where="post", label=t.name)
            continue
        lengths = {len(t) for t in members}
        if len(lengths) != 1:
            raise ValueError(f"traces under {stem!r} differ in length: {sorted(lengths)}")
        xs = members[0].eval_index
        for t in members:
            if not np.array_equal(t.eval_index, xs):
                raise ValueError(f"traces under {stem!r} differ in eval_index")
        mean, se = mean_and_standard_error([t.hypervolume for t in members])
        ax.step(xs, mean, where="post", label=f"{stem} (mean of {len(members)})")
        ax.fill_between(xs, mean - se, mean + se, step="post", alpha=0.25)
    ax.set_xscale("log")
    ax.set_xlabel("evaluations (log scale)")
    ax.set_ylabel("dominated hypervolume")
    ax.grid(True, alpha=0.3)
    if traces:
        ax.legend(loc="lower right", fontsize=8)
    fig.tight_layout()
    _save(fig, out_image)
    return warnings
