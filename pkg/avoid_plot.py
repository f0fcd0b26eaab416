"""
avoid_plot.py — steering angle vs time, with phase bands.

green = Straight, blue = AvoidLeft, red = ReturnRight
"""

from pathlib import Path
from typing import Sequence, Union

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from avoid_harness import AVOID_LEFT, RETURN_RIGHT, STRAIGHT, PhaseSegment  # noqa: E402

PHASE_COLORS = {STRAIGHT: "#2ca02c", AVOID_LEFT: "#1f77b4", RETURN_RIGHT: "#d62728"}

# stable SVG ids and no timestamp, so identical runs give identical files
plt.rcParams["svg.hashsalt"] = "frenet-avoid"


def plot_steering(times: Sequence[float], steering: Sequence[float], segments: Sequence[PhaseSegment],
                  out_path: Union[str, Path], title: str = "") -> Path:
    out_path = Path(out_path)
    fig, ax = plt.subplots(figsize=(10, 4))
    for seg in segments:
        ax.axvspan(seg.start, seg.end, color=PHASE_COLORS[seg.label], alpha=0.18, lw=0)
    ax.plot(times, np.degrees(np.asarray(steering, dtype=float)), color="black", lw=1.2)
    ax.axhline(0.0, color="grey", lw=0.6, ls="--")
    handles = [plt.Rectangle((0, 0), 1, 1, color=c, alpha=0.35) for c in PHASE_COLORS.values()]
    ax.legend(handles, list(PHASE_COLORS), loc="upper right", fontsize=8)
    ax.set_xlabel("time (s)")
    ax.set_ylabel("steering (deg, + left)")
    if title:
        ax.set_title(title)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(out_path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return out_path
