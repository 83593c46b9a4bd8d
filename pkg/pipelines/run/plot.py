"""
SVG figure of a trajectory: zeta components and the spin-velocity angle against lab time.

Figures are built on matplotlib.figure.Figure without pyplot, so sweep
workers can draw concurrently.
"""

from pathlib import Path

import numpy as np
import pandas as pd
from matplotlib.figure import Figure

from pipelines.analyze.precession_fit import spin_velocity_angle


def write_spin_svg(trajectory: pd.DataFrame, path: Path, title: str = "") -> None:
    t = trajectory["t"].to_numpy()
    fig = Figure(figsize=(8, 6))
    ax_zeta, ax_angle = fig.subplots(2, 1, sharex=True)
    for column in ("zx", "zy", "zz"):
        ax_zeta.plot(t, trajectory[column].to_numpy(), label=column)
    ax_zeta.set_ylabel("zeta")
    ax_zeta.legend(loc="upper right")
    ax_angle.plot(t, np.unwrap(spin_velocity_angle(trajectory)), color="black")
    ax_angle.set_xlabel("t")
    ax_angle.set_ylabel("spin-velocity angle [rad]")
    if title:
        fig.suptitle(title)
    fig.tight_layout()
    # fixed metadata keeps reruns byte-identical
    fig.savefig(path, format="svg", metadata={"Date": None})
