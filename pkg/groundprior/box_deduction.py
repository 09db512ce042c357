"""
Dynamic back-projection and closed-form 3D box deduction.

Each contact pixel is lifted to 3D by intersecting its viewing ray with the
ground plane implied by the frame's horizon line. Depth, size and yaw then
follow from the lifted contacts without any learned component.
"""
import logging
import math
from typing import Dict, Mapping, Optional, Sequence, Tuple

import numpy as np

from .config import Settings, get_settings
from .errors import (
    AboveHorizon,
    DegenerateFront,
    NonPositiveDepth,
    NonPositiveDimension,
    NonPositiveHeight,
    WrongArity,
)
from .models import (
    CATEGORY_TAGS,
    CameraIntrinsics,
    CameraPoint,
    Category,
    ContactPointSet,
    ContactTag,
    ImageLine,
    ObjectBox3D,
    Pixel,
    RefinementBias,
    WheelbaseRatios,
    wrap_angle,
)

logger = logging.getLogger(__name__)

ContactPoints3D = Mapping[ContactTag, CameraPoint]


def backproject_contact(p: Pixel, hl: ImageLine, K: CameraIntrinsics, H: float) -> CameraPoint:
    """
    Intersect the viewing ray of a pixel with the ground plane of a horizon.

    Args:
        p: Contact pixel
        hl: Horizon line of the current frame
        K: Camera intrinsics
        H: Camera height in meters

    Returns:
        The ground point, on both the ray and the plane
    """
    if not H > 0:
        raise NonPositiveHeight(f"camera height must be positive, got {H}")
    lam = (p.v - hl.k * p.u - hl.b) / H
    if lam <= 0:
        raise AboveHorizon(f"pixel ({p.u:.3f}, {p.v:.3f}) is not below the horizon")
    return CameraPoint(
        x=(p.u - K.cu) / lam * K.fy / K.fx,
        y=(p.v - K.cv) / lam,
        z=K.fy / lam,
    )


def bottom_center(points: Sequence[CameraPoint]) -> CameraPoint:
    """Mean of 2 or 4 contact points; its z is the object depth."""
    if len(points) not in (2, 4):
        raise WrongArity(f"bottom center needs 2 or 4 contact points, got {len(points)}")
    return CameraPoint.from_array(np.mean([point.to_array() for point in points], axis=0))


def _require(points: ContactPoints3D, category: Category) -> None:
    expected = CATEGORY_TAGS[category]
    if set(points) != set(expected):
        raise WrongArity(f"{category.value} needs contact points {[tag.value for tag in expected]}")


def _average_dims(category: Category, settings: Settings) -> Tuple[float, float]:
    if category == Category.PEDESTRIAN:
        return settings.pedestrian_length, settings.pedestrian_width
    return settings.cyclist_length, settings.cyclist_width


def derive_dimensions(
    points: ContactPoints3D,
    ratios: WheelbaseRatios,
    d_g: float,
    fy: float,
    h2d: float,
    category: Category = Category.CAR,
    settings: Optional[Settings] = None,
) -> Tuple[float, float, float]:
    """
    Length, width and height of an object from its lifted contact points.

    Cars use the wheel spacing divided by the wheelbase ratios. Pedestrians and
    cyclists take the configured average length and width. Height is the
    pinhole back-projection of the 2-D box height at depth d_g.

    Args:
        points: Contact points by tag
        ratios: Wheelbase ratios
        d_g: Object depth in meters
        fy: Focal length along Y in pixels
        h2d: 2-D box height in pixels
        category: Object category
        settings: Source of category averages

    Returns:
        (l, w, h) in meters
    """
    _require(points, category)
    if d_g <= 0:
        raise NonPositiveDepth(f"object depth must be positive, got {d_g}")
    h = d_g * h2d / fy
    if category != Category.CAR:
        length, width = _average_dims(category, settings or get_settings())
        return length, width, h

    p = {tag: point.to_array() for tag, point in points.items()}
    front_rear = (p[ContactTag.LF] + p[ContactTag.RF]) - (p[ContactTag.LR] + p[ContactTag.RR])
    right_left = (p[ContactTag.RF] + p[ContactTag.RR]) - (p[ContactTag.LF] + p[ContactTag.LR])
    length = float(np.linalg.norm(front_rear)) / (2.0 * ratios.k_l)
    width = float(np.linalg.norm(right_left)) / (2.0 * ratios.k_w)
    return length, width, h


def derive_rotation(points: ContactPoints3D, center: CameraPoint) -> float:
    """
    Bird's-eye yaw of a car from the front wheel midpoint relative to the center.

    Returns:
        Yaw in (-pi, pi]
    """
    _require(points, Category.CAR)
    lf, rf = points[ContactTag.LF], points[ContactTag.RF]
    dx = lf.x + rf.x - 2.0 * center.x
    dz = lf.z + rf.z - 2.0 * center.z
    if math.hypot(dx, dz) / 2.0 < 1e-9:
        raise DegenerateFront("front wheel midpoint coincides with the bottom center")
    return wrap_angle(math.atan2(dz, dx))


def _two_point_yaw(points: ContactPoints3D, category: Category, settings: Settings) -> float:
    if category == Category.CYCLIST:
        if settings.cyclist_yaw_mode == "zero":
            return 0.0
        front, rear = points[ContactTag.FRONT], points[ContactTag.REAR]
        if math.hypot(front.x - rear.x, front.z - rear.z) < 1e-9:
            raise DegenerateFront("cyclist wheel contacts coincide")
        return wrap_angle(math.atan2(front.z - rear.z, front.x - rear.x))
    if settings.pedestrian_yaw_mode == "zero":
        return 0.0
    left, right = points[ContactTag.LEFT], points[ContactTag.RIGHT]
    if math.hypot(left.x - right.x, left.z - right.z) < 1e-9:
        raise DegenerateFront("pedestrian foot contacts coincide")
    return wrap_angle(math.atan2(left.z - right.z, left.x - right.x) - math.pi / 2.0)


def deduce_box(
    cps: ContactPointSet,
    hl: ImageLine,
    K: CameraIntrinsics,
    H: Optional[float] = None,
    ratios: Optional[WheelbaseRatios] = None,
    bias: Optional[RefinementBias] = None,
    settings: Optional[Settings] = None,
) -> ObjectBox3D:
    """
    Deduce a 3D box from the contact pixels of one object.

    Args:
        cps: Contact pixels, category and 2-D height
        hl: Horizon line of the frame
        K: Camera intrinsics
        H: Camera height in meters; configured default if omitted
        ratios: Wheelbase ratios; configured default if omitted
        bias: Optional additive refinement of depth, size and yaw
        settings: Configuration override

    Returns:
        ObjectBox3D anchored at the bottom center
    """
    settings = settings or get_settings()
    H = settings.camera_height if H is None else H
    ratios = ratios or WheelbaseRatios(k_l=settings.kl, k_w=settings.kw)

    lifted: Dict[ContactTag, CameraPoint] = {
        point.tag: backproject_contact(point.pixel, hl, K, H) for point in cps.points
    }
    center = bottom_center(list(lifted.values()))
    d_g = center.z
    l, w, h = derive_dimensions(lifted, ratios, d_g, K.fy, cps.h2d, cps.category, settings)
    if cps.category == Category.CAR:
        yaw = derive_rotation(lifted, center)
    else:
        yaw = _two_point_yaw(lifted, cps.category, settings)

    if bias is not None:
        depth = d_g + bias.d_b
        if depth <= 0:
            raise NonPositiveDepth(f"refined depth {depth:.4g} is not positive")
        center = CameraPoint.from_array(center.to_array() * (depth / d_g))
        l, w, h = l + bias.dl, w + bias.dw, h + bias.dh
        if min(l, w, h) <= 0:
            raise NonPositiveDimension(f"refined dimensions ({l:.4g}, {w:.4g}, {h:.4g}) are not all positive")
        yaw = wrap_angle(yaw + bias.r_b)

    logger.debug(f"deduced {cps.category.value} {cps.object_id}: z={center.z:.3f} l={l:.3f} w={w:.3f} yaw={yaw:.4f}")
    return ObjectBox3D(
        bottom_center=center,
        l=l,
        w=w,
        h=h,
        yaw=yaw,
        category=cps.category.value,
        object_id=cps.object_id,
    )
