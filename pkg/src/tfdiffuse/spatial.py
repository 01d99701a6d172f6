"""Direction algebra, spherical point sets and tight-frame checks.

Coordinate convention: azimuth is measured from +x toward +y, zenith from +z,

    x = sin(zen) cos(az),  y = sin(zen) sin(az),  z = cos(zen).

Directions are plain ``(3,)`` (or ``(..., 3)``) float arrays of unit norm.
"""

import csv
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

_S2 = 1.0 / np.sqrt(2.0)

#: Axes of the 24-microphone tight-frame array: 8 azimuths at zenith 45 deg
#: followed by 4 equatorial axes. Rows are the ``+`` ends of the 12 pairs.
TF24_AXES = np.array(
    [
        [0.0, _S2, _S2],
        [0.5, 0.5, _S2],
        [_S2, 0.0, _S2],
        [0.5, -0.5, _S2],
        [0.0, -_S2, _S2],
        [-0.5, -0.5, _S2],
        [-_S2, 0.0, _S2],
        [-0.5, 0.5, _S2],
        [0.0, 1.0, 0.0],
        [_S2, _S2, 0.0],
        [1.0, 0.0, 0.0],
        [_S2, -_S2, 0.0],
    ]
)
TF24_AXES.setflags(write=False)

GOLDEN_RATIO = (1.0 + np.sqrt(5.0)) / 2.0


def direction_from_angles(azimuth_deg, zenith_deg):
    """Unit vector(s) for azimuth/zenith angles in degrees.

    Broadcasts over array inputs; the result has shape ``broadcast + (3,)``.
    """
    az = np.deg2rad(np.asarray(azimuth_deg, dtype=float))
    zen_deg = np.asarray(zenith_deg, dtype=float)
    if np.any(zen_deg < 0.0) or np.any(zen_deg > 180.0):
        raise DomainError(f"zenith must lie in [0, 180] degrees, got {zenith_deg}")
    zen = np.deg2rad(zen_deg)
    az, zen = np.broadcast_arrays(az, zen)
    sz = np.sin(zen)
    return np.stack([sz * np.cos(az), sz * np.sin(az), np.cos(zen)], axis=-1)


def angles_of(v):
    """Inverse of :func:`direction_from_angles`; returns ``(azimuth, zenith)`` in degrees.

    Azimuth is wrapped to ``[0, 360)``. At the poles the azimuth is 0.
    """
    v = normalize(v)
    az = np.rad2deg(np.arctan2(v[..., 1], v[..., 0])) % 360.0
    zen = np.rad2deg(np.arccos(np.clip(v[..., 2], -1.0, 1.0)))
    return az, zen


def normalize(v):
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v, axis=-1, keepdims=True)
    if np.any(n == 0.0):
        raise DomainError("cannot normalize a zero vector")
    return v / n


def angle_between(a, b):
    """Angle in degrees between unit vectors, in ``[0, 180]``."""
    dot = np.sum(np.asarray(a, dtype=float) * np.asarray(b, dtype=float), axis=-1)
    return np.rad2deg(np.arccos(np.clip(dot, -1.0, 1.0)))


def fibonacci_sphere(n):
    """Offset equal-area Fibonacci lattice with ``n`` points.

    ``z_k = 1 - (2k + 1)/n`` and ``phi_k = 2 pi k / Phi**2`` (golden-angle
    increments), k = 0..n-1. Returns an ``(n, 3)`` array.
    """
    if n < 1:
        raise DomainError(f"point count must be >= 1, got {n}")
    k = np.arange(n, dtype=float)
    z = 1.0 - (2.0 * k + 1.0) / n
    phi = 2.0 * np.pi * k / GOLDEN_RATIO**2
    r = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
    return np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=1)


def uniform_sphere(rng, n):
    """``n`` directions uniformly distributed over the sphere (uniform z and azimuth)."""
    z = rng.uniform(-1.0, 1.0, n)
    phi = rng.uniform(0.0, 2.0 * np.pi, n)
    r = np.sqrt(1.0 - z * z)
    return np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=1)


def uniform_cap(rng, n, center, half_angle_rad):
    """``n`` directions uniform in the spherical cap of given half-angle around ``center``."""
    cos_min = np.cos(half_angle_rad)
    cz = rng.uniform(cos_min, 1.0, n)
    phi = rng.uniform(0.0, 2.0 * np.pi, n)
    r = np.sqrt(np.clip(1.0 - cz * cz, 0.0, None))
    local = np.stack([r * np.cos(phi), r * np.sin(phi), cz], axis=1)
    return local @ rotation_to(center).T


def rotation_to(target):
    """Rotation matrix taking +z onto the unit vector ``target``."""
    t = normalize(target)
    z = np.array([0.0, 0.0, 1.0])
    c = float(t @ z)
    if c > 1.0 - 1e-15:
        return np.eye(3)
    if c < -1.0 + 1e-15:
        return np.diag([1.0, -1.0, -1.0])
    axis = np.cross(z, t)
    return rotation_matrix(axis, np.rad2deg(np.arccos(c)))


def rotation_matrix(axis, angle_deg):
    """Right-handed rotation about ``axis`` by ``angle_deg`` (Rodrigues)."""
    k = normalize(axis)
    th = np.deg2rad(angle_deg)
    K = np.array([[0.0, -k[2], k[1]], [k[2], 0.0, -k[0]], [-k[1], k[0], 0.0]])
    return np.eye(3) + np.sin(th) * K + (1.0 - np.cos(th)) * (K @ K)


@dataclass(frozen=True)
class FrameCheck:
    A: float
    max_offdiag: float
    is_tight: bool


def frame_constant(R, tol=1e-10):
    """Frame bound of a direction matrix.

    ``A = trace(R^T R) / 3``; the frame is tight when ``R^T R - A I`` has every
    entry below ``tol`` in magnitude (``max_offdiag`` reports that maximum).
    """
    R = np.asarray(R, dtype=float)
    if R.ndim != 2 or R.shape[1] != 3:
        raise DomainError(f"direction matrix must be N x 3, got {R.shape}")
    norms = np.linalg.norm(R, axis=1)
    if np.any(np.abs(norms - 1.0) > 1e-9):
        raise DomainError("direction matrix rows must be unit vectors")
    G = R.T @ R
    A = float(np.trace(G) / 3.0)
    dev = float(np.max(np.abs(G - A * np.eye(3))))
    return FrameCheck(A=A, max_offdiag=dev, is_tight=dev < tol)


def write_directions_csv(path, directions):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "y", "z"])
        for row in np.asarray(directions, dtype=float):
            w.writerow([repr(float(c)) for c in row])


def read_directions_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return np.array([[float(r["x"]), float(r["y"]), float(r["z"])] for r in rows])
