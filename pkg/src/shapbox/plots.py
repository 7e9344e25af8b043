"""Matplotlib renderings for the CLI report paths."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def save_attribution_chart(feature_names, phi, base_value, prediction, path) -> None:
    """Horizontal bar chart of attributions, largest magnitude on top."""
    phi = np.asarray(phi, dtype=float)
    order = sorted(range(phi.size), key=lambda j: (-abs(phi[j]), j))
    names = [feature_names[j] for j in order]
    values = phi[order]
    colors = ["#c0392b" if v < 0 else "#2471a3" for v in values]

    fig, ax = plt.subplots(figsize=(7, max(2.5, 0.35 * phi.size + 1)))
    ax.barh(range(len(values)), values, color=colors)
    ax.set_yticks(range(len(values)))
    ax.set_yticklabels(names)
    ax.invert_yaxis()
    ax.axvline(0.0, color="black", linewidth=0.8)
    ax.set_xlabel("attribution")
    ax.set_title(f"prediction = {prediction:.6g}   (base = {base_value:.6g})")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_bench_chart(budgets, mean_ms, mean_abs_error, path) -> None:
    """Two panels: wall time and error versus coalition budget."""
    fig, (ax_time, ax_err) = plt.subplots(1, 2, figsize=(9, 3.5))
    ax_time.plot(budgets, mean_ms, marker="o")
    ax_time.set_xlabel("coalition budget")
    ax_time.set_ylabel("mean wall time (ms)")
    ax_time.set_xscale("log", base=2)
    ax_err.plot(budgets, mean_abs_error, marker="o", color="#c0392b")
    ax_err.set_xlabel("coalition budget")
    ax_err.set_ylabel("mean |phi - phi_full|")
    ax_err.set_xscale("log", base=2)
    if max(mean_abs_error) > 0:
        ax_err.set_yscale("log")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
