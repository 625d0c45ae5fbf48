"""Interference-saturation figure: per-ring contributions and running sum."""

from collections import defaultdict

import matplotlib.pyplot as plt

from .io import read_lemma3
from .style import COLORS, MARKERS, save_figure


def plot_lemma3(in_path, out_base):
    """Per-ring interference contributions with the cumulative total."""
    rows = read_lemma3(in_path)
    by_b = defaultdict(list)
    for B, cell, ring, contribution, cumulative in rows:
        by_b[B].append((ring, contribution, cumulative))
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(7.6, 3.4))
    for idx, (B, pts) in enumerate(sorted(by_b.items())):
        pts.sort()
        rings = [p[0] for p in pts if p[0] >= 1]
        contr = [p[1] for p in pts if p[0] >= 1]
        color = COLORS[idx % len(COLORS)]
        marker = MARKERS[idx % len(MARKERS)]
        ax1.semilogy(rings, contr, marker=marker, color=color, label=f"B = {B}")
        ax2.plot([p[0] for p in pts], [p[2] for p in pts], marker=marker,
                 color=color, label=f"B = {B}")
    ax1.set_xlabel("ring")
    ax1.set_ylabel("ring contribution")
    ax1.legend()
    ax2.set_xlabel("ring")
    ax2.set_ylabel("cumulative interference sum")
    ax2.legend()
    fig.tight_layout()
    return save_figure(fig, out_base)
