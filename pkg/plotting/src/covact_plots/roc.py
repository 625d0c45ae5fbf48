"""Detection-error tradeoff figure: PM versus PF on log-log axes."""

from collections import defaultdict

import matplotlib.pyplot as plt
import numpy as np

from .io import read_roc
from .style import COLORS, save_figure

_FLOOR = 1e-6  # log axes cannot show exact zeros


def plot_roc(in_path, out_base):
    """One PM-PF curve per (source, antenna count)."""
    rows = read_roc(in_path)
    series = defaultdict(list)
    for source, M, threshold, pm, pf, trials, nonconverged in rows:
        series[(source, M)].append((threshold, pm, pf))
    fig, ax = plt.subplots()
    antenna_counts = sorted({m for _, m in series})
    for (source, M), pts in sorted(series.items()):
        pts.sort()
        pm = np.maximum([p[1] for p in pts], _FLOOR)
        pf = np.maximum([p[2] for p in pts], _FLOOR)
        color = COLORS[antenna_counts.index(M) % len(COLORS)]
        style = "-" if source == "empirical" else "--"
        ax.loglog(pf, pm, style, color=color, label=f"{source}, M = {M}")
    ax.set_xlabel("false-alarm probability")
    ax.set_ylabel("missed-detection probability")
    ax.set_title("Detection errors: simulation vs prediction")
    ax.legend()
    fig.tight_layout()
    return save_figure(fig, out_base)
