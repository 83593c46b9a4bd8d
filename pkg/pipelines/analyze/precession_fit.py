"""
Frequency and radius fits over sampled trajectories.
"""

from dataclasses import asdict, dataclass

import numpy as np
import pandas as pd
from scipy.stats import linregress

from utils.errors import ConfigError


@dataclass(frozen=True)
class FrequencyFit:
    omega: float
    intercept: float
    stderr: float
    residual: float
    samples: int

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class CircleFit:
    radius: float
    center: tuple[float, float]
    residual: float

    def to_dict(self) -> dict:
        return {"radius": self.radius, "center": list(self.center), "residual": self.residual}


def _plane_basis(normal) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    n = np.asarray(normal, dtype=float)
    n = n / np.linalg.norm(n)
    seed = np.array([1.0, 0.0, 0.0]) if abs(n[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = seed - n * (n @ seed)
    e1 /= np.linalg.norm(e1)
    return e1, np.cross(n, e1), n


def _in_plane(vectors: np.ndarray, n: np.ndarray) -> np.ndarray:
    return vectors - np.outer(vectors @ n, n)


def fit_angle(t: np.ndarray, angle: np.ndarray) -> FrequencyFit:
    """Linear fit of an unwrapped angle against time."""
    if len(t) < 2:
        raise ConfigError([("csv", f"need at least 2 samples for a frequency fit, got {len(t)}")])
    unwrapped = np.unwrap(angle)
    result = linregress(t, unwrapped)
    residual = unwrapped - (result.intercept + result.slope * t)
    return FrequencyFit(
        omega=float(result.slope),
        intercept=float(result.intercept),
        stderr=float(result.stderr),
        residual=float(np.sqrt(np.mean(residual**2))),
        samples=len(t),
    )


def spin_velocity_angle(df: pd.DataFrame, normal=(0.0, 0.0, 1.0)) -> np.ndarray:
    """
    Signed angle from the in-plane velocity direction to the in-plane spin.

    Falls back to a fixed in-plane axis when the velocity has no in-plane
    component somewhere along the trajectory.
    """
    e1, _, n = _plane_basis(normal)
    zeta = _in_plane(df[["zx", "zy", "zz"]].to_numpy(), n)
    beta = _in_plane(df[["bx", "by", "bz"]].to_numpy(), n)
    lengths = np.linalg.norm(beta, axis=1)
    if np.all(lengths > 0):
        ref = beta / lengths[:, None]
    else:
        ref = np.tile(e1, (len(df), 1))
    sin = np.einsum("ij,ij->i", np.cross(ref, zeta), np.tile(n, (len(df), 1)))
    cos = np.einsum("ij,ij->i", ref, zeta)
    return np.arctan2(sin, cos)


def precession_fit(df: pd.DataFrame, normal=(0.0, 0.0, 1.0)) -> FrequencyFit:
    """Rotation rate of the in-plane spin relative to the velocity, in lab time."""
    return fit_angle(df["t"].to_numpy(), spin_velocity_angle(df, normal))


def velocity_rotation_fit(df: pd.DataFrame, normal=(0.0, 0.0, 1.0)) -> FrequencyFit:
    """Rotation rate of the in-plane velocity itself (the orbital frequency in lab time)."""
    e1, e2, n = _plane_basis(normal)
    beta = _in_plane(df[["bx", "by", "bz"]].to_numpy(), n)
    return fit_angle(df["t"].to_numpy(), np.arctan2(beta @ e2, beta @ e1))


def orbit_circle_fit(df: pd.DataFrame, normal=(0.0, 0.0, 1.0)) -> CircleFit:
    """Least-squares circle through the in-plane positions."""
    e1, e2, _ = _plane_basis(normal)
    pos = df[["x", "y", "z"]].to_numpy()
    u, w = pos @ e1, pos @ e2
    # u^2 + w^2 = 2 a u + 2 b w + k
    design = np.column_stack([2 * u, 2 * w, np.ones_like(u)])
    (a, b, k), *_ = np.linalg.lstsq(design, u**2 + w**2, rcond=None)
    radius = float(np.sqrt(k + a * a + b * b))
    distances = np.hypot(u - a, w - b)
    return CircleFit(radius=radius, center=(float(a), float(b)), residual=float(np.sqrt(np.mean((distances - radius) ** 2))))
