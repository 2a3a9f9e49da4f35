"""Render sweep tables to image files next to their CSV output."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .sweep import Metric, SweepTable, Varied  # noqa: E402

AXIS_LABELS = {
    Varied.LAMBDA: r"$\lambda$ (requests/s)",
    Varied.MU: r"$\mu$ (Mb)",
    Varied.B1: r"$B_1$ (Mbps)",
    Varied.B2: r"$B_2$ (Mbps)",
}
METRIC_LABELS = {
    Metric.APPROX_PENALTY_PERCENT: "additional delay (%)",
    Metric.AGG_OVER_NONAGG_RATIO: "aggregated / non-aggregated delay",
}


def plot_sweep(table: SweepTable, path, dpi: int = 150) -> Path:
    path = Path(path)
    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    ns = sorted({r.n for r in table.rows})
    cmap = plt.get_cmap("viridis", max(len(ns), 2))
    for i, n in enumerate(ns):
        rows = sorted((r for r in table.ok_rows() if r.n == n), key=lambda r: r.varied_value)
        if not rows:
            continue
        ax.errorbar(
            [r.varied_value for r in rows],
            [r.metric_value for r in rows],
            yerr=[r.ci_halfwidth for r in rows],
            color=cmap(i),
            marker="o",
            markersize=3,
            linewidth=1,
            capsize=2,
            label=f"N={n}",
        )
    ax.set_xlabel(AXIS_LABELS[table.varied])
    ax.set_ylabel(METRIC_LABELS[table.metric])
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=6, ncol=2, frameon=False)
    fig.tight_layout()
    # fixed metadata keeps repeated renders byte-identical
    fig.savefig(path, dpi=dpi, metadata={"Software": None})
    plt.close(fig)
    return path
