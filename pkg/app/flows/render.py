import logging
from typing import Optional, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from app.errors import IO_ERROR, NO_COORDS, LabError  # noqa: E402
from app.tools.response import PointSet  # noqa: E402
from app.tools.world import World  # noqa: E402

logger = logging.getLogger(__name__)

REGION_COLORS = {"positive": "#b7e4c7", "negative": "#f4b6b6", "empty": "#e9ecef"}
OVERLAY_COLORS = ["#1f4e9c", "#e07a1f", "#6a3d9a", "#2a9d8f", "#9c1f4e", "#555555"]
OVERLAY_MARKERS = ["s", "o", "^", "D", "v", "P"]


def render_regions(world: World, sets: Sequence[PointSet], path: str, title: Optional[str] = None) -> str:
    """
    Writes an SVG of the world's cells coloured by the label carrying their
    mass, with each point set overlaid in its own marker and colour.
    Identical inputs give byte-identical files.
    """
    xy = world.coords_array()
    if xy.ndim != 2 or xy.shape[1] != 2:
        raise LabError(NO_COORDS, f"rendering needs 2-D coordinates, got dimension {xy.shape[-1]}")

    neg, pos = world.mass[:, 0], world.mass[:, 1]
    regions = {
        "positive": pos > neg,
        "negative": neg > pos,
        "empty": (pos == neg),
    }

    with plt.rc_context({"svg.hashsalt": "strategic-lab", "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(6, 6))
        for name, mask in regions.items():
            if mask.any():
                ax.scatter(xy[mask, 0], xy[mask, 1], s=12, c=REGION_COLORS[name], marker="s",
                           linewidths=0, label=f"{name} class" if name != "empty" else "no mass")
        for k, ps in enumerate(sets):
            m = ps.members
            ax.scatter(xy[m, 0], xy[m, 1], s=10, facecolors="none",
                       edgecolors=OVERLAY_COLORS[k % len(OVERLAY_COLORS)],
                       marker=OVERLAY_MARKERS[k % len(OVERLAY_MARKERS)], linewidths=0.8,
                       label=f"{ps.label()} ({int(np.count_nonzero(m))})")
        ax.set_aspect("equal")
        if title:
            ax.set_title(title)
        ax.legend(loc="upper right", fontsize=7, frameon=True)
        try:
            fig.savefig(path, format="svg", metadata={"Date": None})
        except OSError as e:
            raise LabError(IO_ERROR, f"cannot write {path}: {e}") from e
        finally:
            plt.close(fig)
    logger.info("rendered %d overlay set(s) to %s", len(sets), path)
    return path
