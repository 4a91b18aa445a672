"""Plot tables (series, x, y, reference) and PNG figures rendered with Agg."""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np


def reference_values(series, slope: float) -> list[float]:
    """Power law 2^(slope x) through the first point of the series."""
    _, xs, ys = series
    x0, y0 = float(xs[0]), float(ys[0])
    return [y0 * 2.0 ** (slope * (float(x) - x0)) for x in xs]


def plot_rows(spec) -> list[tuple]:
    rows = []
    for label, xs, ys in spec.series:
        for x, y in zip(xs, ys):
            rows.append((label, x, y, ""))
    for label, slope, idx in spec.references:
        s = spec.series[idx]
        for x, y in zip(s[1], reference_values(s, slope)):
            rows.append((f"reference {label}", x, "", y))
    return rows


def write_plot_table(spec, out: Path) -> Path:
    path = out / f"plot_{spec.name}.csv"
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["series", "x", "y", "reference"])
        for row in plot_rows(spec):
            w.writerow([row[0]] + [repr(float(v)) if v != "" else "" for v in row[1:]])
    return path


def render_png(spec, out: Path) -> Path:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 4), dpi=100)
    for label, xs, ys in spec.series:
        ys = np.asarray(ys, dtype=float)
        ax.plot(xs, np.where(ys > 0, ys, np.nan) if spec.logy else ys, marker="o" if len(xs) < 40 else None, label=label)
    for label, slope, idx in spec.references:
        s = spec.series[idx]
        ax.plot(s[1], reference_values(s, slope), linestyle="--", color="gray", label=label)
    if spec.logy:
        ax.set_yscale("log", base=2)
    ax.set_xlabel(spec.xlabel)
    ax.set_ylabel(spec.ylabel)
    ax.set_title(spec.title)
    ax.legend(fontsize=7)
    fig.tight_layout()
    path = out / f"plot_{spec.name}.png"
    fig.savefig(path, metadata={"Software": None})
    plt.close(fig)
    return path


def emit_plots(results, out: Path, figures: bool = True) -> list[Path]:
    """One table (and optionally one PNG) per plot of every suite result."""
    out = Path(out)
    written = []
    for res in results:
        for spec in res.plots:
            out.mkdir(parents=True, exist_ok=True)
            written.append(write_plot_table(spec, out))
            if figures:
                written.append(render_png(spec, out))
    return written
