"""
Horizon line and ground plane mathematics.

The ground plane y = a*x + b*z + c and its image horizon v = k*u + b_h carry
the same orientation: the horizon is where the plane's points land as depth
goes to infinity, so only c (the camera height) is lost going plane to
horizon.
"""
import logging
import math
from typing import Sequence

import numpy as np

from .config import MAX_PLANE_SLOPE, MIN_NORMAL_DETERMINANT
from .errors import DegenerateInput, ImplausiblePlane, NonPositiveHeight
from .models import CameraIntrinsics, CameraPoint, EgoPose, GroundPlane, ImageLine, Pixel

logger = logging.getLogger(__name__)


def _orientation(hl: ImageLine, K: CameraIntrinsics):
    a = hl.k * K.fx / K.fy
    b = (hl.k * K.cu + hl.b - K.cv) / K.fy
    return a, b


def check_plausible(plane: GroundPlane) -> GroundPlane:
    """Reject planes too steep to be ground."""
    if abs(plane.a) > MAX_PLANE_SLOPE or abs(plane.b) > MAX_PLANE_SLOPE:
        raise ImplausiblePlane(f"plane slope ({plane.a:.4g}, {plane.b:.4g}) exceeds {MAX_PLANE_SLOPE}")
    return plane


def horizon_to_plane(hl: ImageLine, K: CameraIntrinsics, H: float) -> GroundPlane:
    """
    Derive the ground plane from an image horizon line.

    Args:
        hl: Horizon line v = k*u + b in pixels
        K: Camera intrinsics
        H: Camera height above the ground in meters

    Returns:
        GroundPlane with c = H
    """
    if not H > 0:
        raise NonPositiveHeight(f"camera height must be positive, got {H}")
    a, b = _orientation(hl, K)
    return check_plausible(GroundPlane(a=a, b=b, c=H))


def plane_to_horizon(plane: GroundPlane, K: CameraIntrinsics) -> ImageLine:
    """Image horizon of a ground plane; independent of the plane's offset c."""
    k = plane.a * K.fy / K.fx
    return ImageLine(k=k, b=plane.b * K.fy - k * K.cu + K.cv)


def flat_horizon(K: CameraIntrinsics) -> ImageLine:
    """Horizon of the fixed plane y = H, i.e. level ground."""
    return ImageLine(k=0.0, b=K.cv)


def ego_pose(hl: ImageLine, K: CameraIntrinsics) -> EgoPose:
    """
    Roll and pitch of the ground plane seen through a horizon line.

    Returns:
        EgoPose with roll = atan(a), pitch = atan(b)
    """
    a, b = _orientation(hl, K)
    return EgoPose(roll=math.atan(a), pitch=math.atan(b))


def _solve_scaled(design: np.ndarray, target: np.ndarray) -> np.ndarray:
    """Least squares by normal equations on unit-norm columns."""
    scale = np.linalg.norm(design, axis=0)
    if np.any(scale == 0):
        raise DegenerateInput("design matrix has an all-zero column")
    scaled = design / scale
    normal = scaled.T @ scaled
    det = np.linalg.det(normal)
    if abs(det) < MIN_NORMAL_DETERMINANT:
        raise DegenerateInput(f"normal equations are singular (det={det:.3g})")
    return np.linalg.solve(normal, scaled.T @ target) / scale


def fit_line_lsq(points: Sequence[Pixel]) -> ImageLine:
    """
    Fit v = k*u + b to pixels by least squares.

    Args:
        points: At least two pixels with distinct u values

    Returns:
        ImageLine minimizing the sum of squared v residuals
    """
    if len(points) < 2:
        raise DegenerateInput(f"need at least 2 points for a line fit, got {len(points)}")
    u = np.array([p.u for p in points], dtype=float)
    v = np.array([p.v for p in points], dtype=float)
    if np.all(u == u[0]):
        raise DegenerateInput("all points share the same u; the line is vertical")
    k, b = _solve_scaled(np.column_stack([u, np.ones_like(u)]), v)
    logger.debug(f"line fit over {len(points)} points: k={k:.6g} b={b:.6g}")
    return ImageLine(k=float(k), b=float(b))


def fit_plane_lsq(points: Sequence[CameraPoint], min_points: int = 3) -> GroundPlane:
    """
    Fit y = a*x + b*z + c to camera-frame points by least squares.

    Args:
        points: Points whose (x, z) projections are not collinear
        min_points: Smallest accepted point count (at least 3)

    Returns:
        The fitted GroundPlane
    """
    needed = max(3, min_points)
    if len(points) < needed:
        raise DegenerateInput(f"need at least {needed} points for a plane fit, got {len(points)}")
    xyz = np.array([[p.x, p.y, p.z] for p in points], dtype=float)
    design = np.column_stack([xyz[:, 0], xyz[:, 2], np.ones(len(xyz))])
    a, b, c = _solve_scaled(design, xyz[:, 1])
    logger.debug(f"plane fit over {len(points)} points: a={a:.6g} b={b:.6g} c={c:.6g}")
    return check_plausible(GroundPlane(a=float(a), b=float(b), c=float(c)))


def horizon_from_heatmap(heatmap: np.ndarray, min_activation: float = 0.5) -> ImageLine:
    """
    Turn a horizon heatmap into a line.

    Each column votes with the row of its peak activation; columns whose
    peak stays below min_activation are ignored.

    Args:
        heatmap: 2-D array of activations, rows are v and columns are u
        min_activation: Minimum peak value for a column to count

    Returns:
        Least-squares horizon line through the column peaks
    """
    heatmap = np.asarray(heatmap, dtype=float)
    if heatmap.ndim != 2:
        raise DegenerateInput(f"heatmap must be 2-D, got shape {heatmap.shape}")
    rows = np.argmax(heatmap, axis=0)
    peaks = heatmap[rows, np.arange(heatmap.shape[1])]
    columns = np.flatnonzero(peaks >= min_activation)
    if len(columns) < 2:
        raise DegenerateInput(f"only {len(columns)} heatmap columns reach {min_activation}")
    logger.debug(f"heatmap horizon from {len(columns)} of {heatmap.shape[1]} columns")
    return fit_line_lsq([Pixel(u=float(u), v=float(rows[u])) for u in columns])
