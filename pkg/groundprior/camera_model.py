"""
Pinhole camera mathematics for rectified images.

Skew and lens distortion are assumed zero, as for rectified KITTI frames.
Pixel coordinates stay continuous; nothing here rounds to the pixel grid.
"""
import numpy as np

from .errors import NonPositiveDepth
from .models import CameraIntrinsics, CameraPoint, Pixel


def project(point: CameraPoint, K: CameraIntrinsics) -> Pixel:
    """
    Project a camera-frame point onto the image plane.

    Args:
        point: Point in the camera coordinate system, meters
        K: Camera intrinsics

    Returns:
        Pixel (fx*x/z + cu, fy*y/z + cv)
    """
    if point.z <= 0:
        raise NonPositiveDepth(f"cannot project a point with z={point.z}")
    return Pixel(u=K.fx * point.x / point.z + K.cu, v=K.fy * point.y / point.z + K.cv)


def project_many(points: np.ndarray, K: CameraIntrinsics) -> np.ndarray:
    """Vectorized project for an (N, 3) array; returns (N, 2) pixels."""
    points = np.asarray(points, dtype=float).reshape(-1, 3)
    if np.any(points[:, 2] <= 0):
        raise NonPositiveDepth("cannot project points with z <= 0")
    u = K.fx * points[:, 0] / points[:, 2] + K.cu
    v = K.fy * points[:, 1] / points[:, 2] + K.cv
    return np.column_stack([u, v])


def backproject_ray(pixel: Pixel, K: CameraIntrinsics) -> CameraPoint:
    """
    Direction of the viewing ray through a pixel, scaled to unit depth.

    Every positive multiple of the result projects back onto the pixel.
    """
    return CameraPoint(x=(pixel.u - K.cu) / K.fx, y=(pixel.v - K.cv) / K.fy, z=1.0)
