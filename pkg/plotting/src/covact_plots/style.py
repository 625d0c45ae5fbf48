"""Deterministic matplotlib defaults shared by all figure kinds."""

import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

# fixed hash salt keeps SVG element ids stable between runs
matplotlib.rcParams["svg.hashsalt"] = "covact-plots"
matplotlib.rcParams["figure.figsize"] = (5.2, 3.9)
matplotlib.rcParams["font.size"] = 9
matplotlib.rcParams["axes.grid"] = True
matplotlib.rcParams["grid.alpha"] = 0.3
matplotlib.rcParams["lines.linewidth"] = 1.4

COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")
MARKERS = ("o", "s", "^", "v", "D", "x")


def save_figure(fig, out_base):
    """Write PNG and SVG next to each other; returns both paths.

    SVG date metadata is dropped so repeated runs are byte-identical.
    """
    base = str(out_base)
    for ext in (".png", ".svg"):
        if base.endswith(ext):
            base = base[: -len(ext)]
    parent = os.path.dirname(base)
    if parent:
        os.makedirs(parent, exist_ok=True)
    png = base + ".png"
    svg = base + ".svg"
    fig.savefig(png, dpi=150)
    fig.savefig(svg, metadata={"Date": None})
    plt.close(fig)
    return png, svg
