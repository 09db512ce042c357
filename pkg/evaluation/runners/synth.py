"""
Synthetic scene generator for GroundPrior.

Boxes are placed on a known ground plane, projected into contact point
labels and KITTI records, and optionally disturbed with pixel noise. With
zero noise every deduction must reproduce the ground truth exactly, which
makes the scenes an oracle for the geometric pipeline.
"""
import logging
import math
from typing import Optional, Sequence, Tuple

import numpy as np

from groundprior.config import Settings, get_settings
from groundprior.dataset_io import label_from_box
from groundprior.errors import ImplausiblePlane
from groundprior.ground_plane import plane_to_horizon
from groundprior.models import (
    CameraIntrinsics,
    CameraPoint,
    Category,
    ContactPoint,
    ContactPointSet,
    GrayImage,
    GroundPlane,
    ObjectBox3D,
    Pixel,
    PseudoLabelFrame,
    SynthScene,
    WheelbaseRatios,
    wrap_angle,
)
from groundprior.pseudo_labels import object_contact_labels

logger = logging.getLogger(__name__)

DEFAULT_INTRINSICS = CameraIntrinsics(fx=700.0, fy=700.0, cu=600.0, cv=180.0)
DEFAULT_IMAGE_SIZE = (1242, 375)
MAX_TILT_DEG = 10.0

DEPTH_RANGE = (5.0, 80.0)
# Lateral offset as a fraction of depth
LATERAL_SPREAD = 0.4
CAR_SIZE_RANGE = {"l": (3.5, 4.8), "w": (1.5, 1.9), "h": (1.4, 1.8)}
PERSON_HEIGHT_RANGE = (1.5, 1.9)


def plane_from_pose(roll_deg: float, pitch_deg: float, camera_height: float) -> GroundPlane:
    """Ground plane with the given roll and pitch (degrees) below a camera at camera_height."""
    return GroundPlane(
        a=math.tan(math.radians(roll_deg)),
        b=math.tan(math.radians(pitch_deg)),
        c=camera_height,
    )


def _add_noise(cps: ContactPointSet, rng: np.random.Generator, noise: float) -> ContactPointSet:
    if noise <= 0:
        return cps
    points = []
    for point in cps.points:
        du, dv = rng.normal(0.0, noise, size=2)
        pixel = Pixel(u=point.pixel.u + float(du), v=point.pixel.v + float(dv))
        points.append(ContactPoint(tag=point.tag, pixel=pixel, in_image=point.in_image))
    return cps.model_copy(update={"points": points})


def _dimensions(category: Category, rng: np.random.Generator, settings: Settings) -> Tuple[float, float, float]:
    if category == Category.CAR:
        return (
            rng.uniform(*CAR_SIZE_RANGE["l"]),
            rng.uniform(*CAR_SIZE_RANGE["w"]),
            rng.uniform(*CAR_SIZE_RANGE["h"]),
        )
    h = rng.uniform(*PERSON_HEIGHT_RANGE)
    if category == Category.PEDESTRIAN:
        return settings.pedestrian_length, settings.pedestrian_width, h
    return settings.cyclist_length, settings.cyclist_width, h


def synth_scene(
    seed: int,
    n_objects: int,
    plane: GroundPlane,
    K: CameraIntrinsics = DEFAULT_INTRINSICS,
    noise: float = 0.0,
    frame_id: str = "000000",
    categories: Sequence[str] = (Category.CAR.value,),
    ratios: Optional[WheelbaseRatios] = None,
    image_size: Tuple[int, int] = DEFAULT_IMAGE_SIZE,
    settings: Optional[Settings] = None,
) -> SynthScene:
    """
    Generate one synthetic frame.

    Args:
        seed: Random seed; equal seeds give identical scenes
        n_objects: Number of boxes to place
        plane: Ground plane the boxes rest on
        K: Camera intrinsics
        noise: Standard deviation of Gaussian pixel noise on contact points
        frame_id: Frame identifier, also the prefix of object ids
        categories: Categories to draw from uniformly
        ratios: Wheelbase ratios for cars
        image_size: (width, height) used to flag out-of-image contacts
        settings: Source of category averages

    Returns:
        SynthScene with boxes, KITTI records and contact labels
    """
    if n_objects < 0:
        raise ValueError(f"n_objects must be non-negative, got {n_objects}")
    roll, pitch = math.degrees(math.atan(plane.a)), math.degrees(math.atan(plane.b))
    if abs(roll) > MAX_TILT_DEG or abs(pitch) > MAX_TILT_DEG:
        raise ImplausiblePlane(f"plane tilt ({roll:.2f}, {pitch:.2f}) deg exceeds {MAX_TILT_DEG} deg")

    settings = settings or get_settings()
    ratios = ratios or WheelbaseRatios(k_l=settings.kl, k_w=settings.kw)
    kinds = [Category(name) for name in categories]
    rng = np.random.default_rng(seed)

    boxes, labels, contacts = [], [], []
    for index in range(n_objects):
        category = kinds[int(rng.integers(len(kinds)))]
        yaw = wrap_angle(rng.uniform(-math.pi, math.pi))
        z = rng.uniform(*DEPTH_RANGE)
        x = rng.uniform(-LATERAL_SPREAD * z, LATERAL_SPREAD * z)
        l, w, h = _dimensions(category, rng, settings)
        box = ObjectBox3D(
            bottom_center=CameraPoint(x=x, y=plane.y_at(x, z), z=z),
            l=l,
            w=w,
            h=h,
            yaw=yaw,
            category=category.value,
            object_id=f"{frame_id}-{index:03d}",
        )
        cps = object_contact_labels(box, K, ratios, plane, image_size)
        boxes.append(box)
        labels.append(label_from_box(box, K, plane))
        contacts.append(_add_noise(cps, rng, noise))

    horizon = plane_to_horizon(plane, K)
    logger.debug(f"synthetic frame {frame_id}: {n_objects} objects, horizon k={horizon.k:.6g} b={horizon.b:.6g}")
    return SynthScene(
        frame_id=frame_id,
        plane=plane,
        intrinsics=K,
        boxes=boxes,
        labels=labels,
        contacts=PseudoLabelFrame(frame_id=frame_id, objects=contacts, horizon=horizon),
    )


def render_bar_image(
    width: int = 640,
    height: int = 480,
    angle_deg: float = 90.0,
    n_bars: int = 6,
    bar_width: float = 14.0,
) -> GrayImage:
    """
    White image crossed by dark straight bars.

    Bars run across the full image height at inclination angle_deg (v down),
    evenly spaced along u and anti-aliased over one pixel.
    """
    v, u = np.mgrid[0:height, 0:width].astype(np.float64)
    alpha = math.radians(angle_deg)
    # Exact at multiples of 90 degrees.
    cos_a = round(math.cos(alpha), 12) + 0.0
    sin_a = round(math.sin(alpha), 12) + 0.0
    coverage = np.zeros((height, width))
    for i in range(n_bars):
        center_u = width * (i + 1) / (n_bars + 1)
        distance = np.abs((u - center_u) * sin_a - (v - height / 2.0) * cos_a)
        coverage = np.maximum(coverage, np.clip(bar_width / 2.0 + 0.5 - distance, 0.0, 1.0))
    return GrayImage(pixels=np.floor(255.0 * (1.0 - coverage) + 0.5).astype(np.uint8))
