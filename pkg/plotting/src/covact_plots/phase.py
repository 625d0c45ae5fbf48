"""Phase-diagram figure: identifiability transition in the (L^2/N, K/N) plane."""

from collections import defaultdict

import matplotlib.pyplot as plt
import numpy as np

from .io import read_phase_diagram
from .style import COLORS, MARKERS, save_figure


def transition_points(rows):
    """Per-(B, L) transition estimate with its error-bar range.

    Returns {B: [(l2_over_n, k_star/N, lo/N, hi/N), ...]} where k_star is
    the last K before the holds fraction first drops below one half, and
    [lo, hi] spans the last all-hold K to the first no-hold K.
    """
    cells = defaultdict(list)
    for B, N, L, K, trials, holds, fails, ambiguous, l2n, kn in rows:
        cells[(B, N, L)].append((K, holds / trials if trials else 0.0))
    curves = defaultdict(list)
    for (B, N, L), points in sorted(cells.items()):
        points.sort()
        k_star = None
        k_all = None
        k_none = None
        for K, frac in points:
            if frac < 0.5:
                break
            k_star = K
        for K, frac in points:
            if frac < 1.0:
                break
            k_all = K
        for K, frac in points:
            if frac == 0.0:
                k_none = K
                break
        if k_star is None:
            k_star = 0
        lo = k_all if k_all is not None else k_star
        hi = k_none if k_none is not None else points[-1][0]
        curves[B].append((L * L / N, k_star / N, lo / N, hi / N))
    return dict(curves)


def plot_phase(in_path, out_base):
    """Render one transition curve per cell count, with error bars."""
    rows = read_phase_diagram(in_path)
    curves = transition_points(rows)
    fig, ax = plt.subplots()
    for idx, (B, pts) in enumerate(sorted(curves.items())):
        pts.sort()
        x = np.array([p[0] for p in pts])
        y = np.array([p[1] for p in pts])
        lo = np.array([p[2] for p in pts])
        hi = np.array([p[3] for p in pts])
        ax.errorbar(
            x, y, yerr=np.vstack([y - lo, hi - y]),
            color=COLORS[idx % len(COLORS)],
            marker=MARKERS[idx % len(MARKERS)],
            capsize=3, label=f"B = {B}",
        )
    ax.set_xlabel(r"$L^2/N$")
    ax.set_ylabel(r"$K/N$")
    ax.set_title("Identifiability transition")
    ax.legend()
    fig.tight_layout()
    return save_figure(fig, out_base)
