"""
Fixed versus dynamic ground plane depth drift.

A ground point on a pitched plane is projected and lifted back twice: once
with the flat horizon of a fixed plane y = H and once with the true horizon.
The fixed plane misplaces the point by -b*d^2 / (b*d + H) for b = tan(pitch),
so the drift grows with depth; the dynamic plane is exact.
"""
import csv
import io
import logging
import math
from typing import List, Sequence

from groundprior.box_deduction import backproject_contact
from groundprior.camera_model import project
from groundprior.config import CAMERA_HEIGHT
from groundprior.errors import AboveHorizon, ImplausiblePlane
from groundprior.ground_plane import flat_horizon, plane_to_horizon
from groundprior.models import CameraIntrinsics, CameraPoint, GroundPlane, SweepRow

logger = logging.getLogger(__name__)

MAX_PITCH_DEG = 10.0
SWEEP_COLUMNS = ["pitch_deg", "depth", "fixed_error", "dynamic_error", "fixed_signed_error", "inverse_depth_error"]


def sweep_cell(
    pitch_deg: float,
    depth: float,
    K: CameraIntrinsics,
    H: float = CAMERA_HEIGHT,
    skip_unobservable: bool = False,
) -> SweepRow:
    """
    Depth errors for one ground point straight ahead at the given depth.

    When the fixed plane puts the point above its horizon, the fixed-plane
    columns are NaN if skip_unobservable is set; the dynamic error is still
    reported.
    """
    plane = GroundPlane(a=0.0, b=math.tan(math.radians(pitch_deg)), c=H)
    truth = CameraPoint(x=0.0, y=plane.y_at(0.0, depth), z=depth)
    pixel = project(truth, K)

    dynamic = backproject_contact(pixel, plane_to_horizon(plane, K), K, H)
    try:
        fixed_z = backproject_contact(pixel, flat_horizon(K), K, H).z
    except AboveHorizon:
        if not skip_unobservable:
            raise
        logger.warning(f"pitch {pitch_deg} deg, depth {depth} m: point is above the fixed horizon")
        fixed_z = float("nan")
    return SweepRow(
        pitch_deg=pitch_deg,
        depth=depth,
        fixed_error=abs(fixed_z - depth),
        dynamic_error=abs(dynamic.z - depth),
        fixed_signed_error=fixed_z - depth,
        inverse_depth_error=1.0 / fixed_z - 1.0 / depth,
    )


def tilt_sweep(
    pitches_deg: Sequence[float],
    depths: Sequence[float],
    K: CameraIntrinsics,
    H: float = CAMERA_HEIGHT,
    skip_unobservable: bool = False,
) -> List[SweepRow]:
    """
    Run the drift experiment over a grid of pitches and depths.

    Args:
        pitches_deg: Plane pitch angles in degrees, each within +/-10
        depths: Ground-truth depths in meters
        K: Camera intrinsics
        H: Camera height in meters
        skip_unobservable: Report NaN fixed-plane errors instead of raising when
            the fixed plane puts a point above its horizon

    Returns:
        One SweepRow per (pitch, depth), pitch-major
    """
    rows = []
    for pitch in pitches_deg:
        if abs(pitch) > MAX_PITCH_DEG:
            raise ImplausiblePlane(f"pitch {pitch} deg is outside +/-{MAX_PITCH_DEG} deg")
        for depth in depths:
            rows.append(sweep_cell(pitch, depth, K, H, skip_unobservable))
    logger.info(f"tilt sweep: {len(rows)} cells")
    return rows


def format_sweep_rows(rows: Sequence[SweepRow]) -> str:
    """CSV table of sweep rows, 9 significant digits."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(SWEEP_COLUMNS)
    for row in rows:
        writer.writerow([f"{getattr(row, column):.9g}" for column in SWEEP_COLUMNS])
    return buffer.getvalue()
