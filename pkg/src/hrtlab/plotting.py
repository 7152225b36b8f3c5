"""Static figures of sampled F fields."""

from __future__ import annotations

from pathlib import Path
from typing import Optional, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .search import FieldGrid  # noqa: E402

_STYLE = {
    "font.size": 9,
    "axes.labelsize": 9,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "savefig.dpi": 120,
    "svg.hashsalt": "hrtlab",
}


def plot_field(grid: FieldGrid, path, base: Optional[np.ndarray] = None,
               maximizers: Sequence = (), title: str = "") -> Path:
    """Heatmap of F with base points (white circles) and refined maximizers (red crosses).

    PNG metadata is dropped so identical grids give identical files.
    """
    path = Path(path)
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots(figsize=(4.6, 4.0))
        a0, a1, b0, b1 = grid.rect
        im = ax.imshow(grid.values, origin="lower", extent=(a0, a1, b0, b1), cmap="viridis",
                       vmin=0.0, vmax=1.0, interpolation="nearest", aspect="auto")
        fig.colorbar(im, ax=ax, label="F(a, b)")
        if base is not None and len(base):
            ax.scatter(base[:, 0], base[:, 1], s=36, facecolors="none", edgecolors="white", linewidths=1.2)
        if maximizers:
            ax.scatter([m.a for m in maximizers], [m.b for m in maximizers], s=20, marker="x", c="red",
                       linewidths=1.0)
        ax.set_xlabel("a")
        ax.set_ylabel("b")
        if title:
            ax.set_title(title, fontsize=9)
        fig.tight_layout()
        path.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(path, format="png", metadata={"Software": None})
        plt.close(fig)
    return path
