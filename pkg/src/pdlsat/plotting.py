"""Node-count plots for benchmark runs."""

from __future__ import annotations

from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
from matplotlib.ticker import MaxNLocator  # noqa: E402

from .bench import BenchRow  # noqa: E402

_MARKERS = ("o", "s", "^", "D", "v")


def plot_node_counts(rows: list[BenchRow], path, title: str = "tableau size") -> Path:
    """Write a log-scale node-count-vs-size PNG; budget-hit rows are drawn
    hollow at the count reached."""
    path = Path(path)
    by_family = defaultdict(list)
    for r in rows:
        by_family[r.family].append(r)

    fig, ax = plt.subplots(figsize=(6, 4), dpi=100)
    for i, (family, rs) in enumerate(sorted(by_family.items())):
        rs = sorted(rs, key=lambda r: r.size)
        marker = _MARKERS[i % len(_MARKERS)]
        ok = [r for r in rs if r.status == "ok"]
        line = ax.plot([r.size for r in ok], [max(r.nodes, 1) for r in ok], marker=marker, label=family)[0]
        hit = [r for r in rs if r.status != "ok"]
        if hit:
            ax.plot([r.size for r in hit], [max(r.nodes, 1) for r in hit], linestyle="none", marker=marker,
                    markerfacecolor="none", color=line.get_color())
    ax.set_yscale("log")
    ax.set_xlabel("size")
    ax.set_ylabel("nodes expanded")
    ax.set_title(title)
    ax.xaxis.set_major_locator(MaxNLocator(integer=True))
    ax.grid(True, which="major", alpha=0.3)
    if by_family:
        ax.legend(frameon=False)
    fig.tight_layout()
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path)
    plt.close(fig)
    return path
