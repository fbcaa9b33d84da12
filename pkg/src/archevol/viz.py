"""Matplotlib rendering of analysis results.

The conflict matrix is drawn as a grid: rows are the first rule of each pair,
columns the second; filled cells mark parallel conflicts, sequential
dependencies, or both.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.patches as mpatches  # noqa: E402
import matplotlib.pyplot as plt  # noqa: E402

from .analysis import PARALLEL_KINDS, SEQUENTIAL_KINDS, CpaMatrix  # noqa: E402

_COLORS = {
    "conflict": "#d9534f",
    "dependency": "#5b9bd5",
    "both": "#8064a2",
}


def _cell_category(matrix: CpaMatrix, a: str, b: str) -> str | None:
    kinds = set(matrix.kinds(a, b))
    conflict = bool(kinds & set(PARALLEL_KINDS))
    dependency = bool(kinds & set(SEQUENTIAL_KINDS))
    if conflict and dependency:
        return "both"
    if conflict:
        return "conflict"
    if dependency:
        return "dependency"
    return None


def render_cpa_matrix(matrix: CpaMatrix, path: str | Path) -> Path:
    """Write the matrix as a figure (format chosen by file extension)."""
    names = matrix.rules
    n = len(names)
    fig, ax = plt.subplots(figsize=(1.0 * n + 3.2, 1.0 * n + 1.2))

    for i, a in enumerate(names):
        for j, b in enumerate(names):
            cat = _cell_category(matrix, a, b)
            face = _COLORS.get(cat, "white")
            ax.add_patch(plt.Rectangle((j, n - 1 - i), 1, 1, facecolor=face,
                                       edgecolor="#444444", linewidth=0.6))
            if cat:
                label = "\n".join(matrix.kinds(a, b))
                ax.text(j + 0.5, n - 1 - i + 0.5, label, ha="center", va="center",
                        fontsize=6, color="white")

    ax.set_xlim(0, n)
    ax.set_ylim(0, n)
    ax.set_xticks([j + 0.5 for j in range(n)])
    ax.set_xticklabels(names, rotation=40, ha="right", fontsize=7)
    ax.set_yticks([n - 1 - i + 0.5 for i in range(n)])
    ax.set_yticklabels(names, fontsize=7)
    ax.set_xlabel("second rule")
    ax.set_ylabel("first rule")
    ax.set_title("Rule pair conflicts and dependencies")
    ax.set_aspect("equal")
    ax.legend(handles=[
        mpatches.Patch(color=_COLORS["conflict"], label="parallel conflict"),
        mpatches.Patch(color=_COLORS["dependency"], label="sequential dependency"),
        mpatches.Patch(color=_COLORS["both"], label="both"),
    ], loc="upper left", bbox_to_anchor=(1.01, 1.0), fontsize=7)

    fig.tight_layout()
    out = Path(path)
    fig.savefig(out, dpi=150)
    plt.close(fig)
    return out
