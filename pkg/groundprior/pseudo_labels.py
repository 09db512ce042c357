"""
Pseudo-label generation from 3D box annotations.

Contact point labels are the image projections of the points where an
object touches the ground. Horizon labels come from fitting a plane through
the bottom centers of all boxes in a frame and projecting it to infinity.
"""
import logging
import math
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .camera_model import project, project_many
from .config import get_settings
from .errors import BehindCamera, DegenerateInput, NonPositiveDepth, NonPositiveDimension
from .ground_plane import fit_plane_lsq, plane_to_horizon
from .models import (
    Category,
    CameraIntrinsics,
    CameraPoint,
    ContactPoint,
    ContactPointSet,
    ContactTag,
    GroundPlane,
    ImageLine,
    LocalContactPoints,
    ObjectBox3D,
    PoseRT,
    WheelbaseRatios,
)

logger = logging.getLogger(__name__)

ImageSize = Tuple[int, int]


def local_contact_points(l: float, w: float, ratios: WheelbaseRatios) -> LocalContactPoints:
    """
    Wheel contact points of a car in its own frame.

    Args:
        l: Box length in meters (local X)
        w: Box width in meters (local Z)
        ratios: Wheel spacing over length and width

    Returns:
        LF, RF, RR and LR on the bottom face
    """
    if not (l > 0 and w > 0):
        raise NonPositiveDimension(f"box length and width must be positive, got l={l} w={w}")
    dx = ratios.k_l * l / 2.0
    dz = ratios.k_w * w / 2.0
    return LocalContactPoints(
        points={
            ContactTag.LF: CameraPoint(x=dx, y=0.0, z=dz),
            ContactTag.RF: CameraPoint(x=dx, y=0.0, z=-dz),
            ContactTag.RR: CameraPoint(x=-dx, y=0.0, z=-dz),
            ContactTag.LR: CameraPoint(x=-dx, y=0.0, z=dz),
        }
    )


def yaw_rotation(yaw: float) -> np.ndarray:
    """Rotation about the camera Y axis taking local +X to (cos yaw, 0, sin yaw)."""
    c, s = math.cos(yaw), math.sin(yaw)
    return np.array([[c, 0.0, -s], [0.0, 1.0, 0.0], [s, 0.0, c]])


def plane_aligned_rotation(yaw: float, plane: GroundPlane) -> np.ndarray:
    """
    Object frame of a box resting on a possibly tilted plane.

    Columns are heading, down-normal and lateral axes. The heading lies in the
    plane with bird's-eye angle yaw; for a level plane this equals
    yaw_rotation(yaw).
    """
    c, s = math.cos(yaw), math.sin(yaw)
    heading = np.array([c, plane.a * c + plane.b * s, s])
    heading /= np.linalg.norm(heading)
    normal = np.array([plane.a, -1.0, plane.b])
    lateral = np.cross(normal, heading)
    lateral /= np.linalg.norm(lateral)
    down = np.cross(lateral, heading)
    return np.column_stack([heading, down, lateral])


def local_to_camera(point: CameraPoint, pose: PoseRT, plane: Optional[GroundPlane] = None) -> CameraPoint:
    """
    Transform a point from the object frame to the camera frame.

    Args:
        point: Point in the object frame
        pose: Yaw and bottom-center translation
        plane: Ground plane to align the object frame with; level if omitted

    Returns:
        R @ point + T
    """
    rotation = yaw_rotation(pose.yaw) if plane is None else plane_aligned_rotation(pose.yaw, plane)
    return CameraPoint.from_array(rotation @ point.to_array() + pose.translation.to_array())


def _pose(box: ObjectBox3D) -> PoseRT:
    return PoseRT(yaw=box.yaw, translation=box.bottom_center)


def _inside(u: float, v: float, image_size: Optional[ImageSize]) -> bool:
    if image_size is None:
        return True
    width, height = image_size
    return 0 <= u < width and 0 <= v < height


def _label_points(
    box: ObjectBox3D,
    category: Category,
    local: Sequence[Tuple[ContactTag, CameraPoint]],
    K: CameraIntrinsics,
    plane: Optional[GroundPlane],
    image_size: Optional[ImageSize],
) -> ContactPointSet:
    pose = _pose(box)
    points = []
    for tag, local_point in local:
        camera_point = local_to_camera(local_point, pose, plane)
        if camera_point.z <= 0:
            raise BehindCamera(f"contact point {tag.value} of {box.object_id or 'object'} is behind the camera")
        pixel = project(camera_point, K)
        points.append(ContactPoint(tag=tag, pixel=pixel, in_image=_inside(pixel.u, pixel.v, image_size)))
    return ContactPointSet(
        category=category,
        points=points,
        h2d=K.fy * box.h / box.bottom_center.z,
        object_id=box.object_id,
    )


def contact_pixel_labels(
    box: ObjectBox3D,
    ratios: WheelbaseRatios,
    K: CameraIntrinsics,
    plane: Optional[GroundPlane] = None,
    image_size: Optional[ImageSize] = None,
) -> ContactPointSet:
    """
    Project the four wheel contacts of a car box into the image.

    Args:
        box: Car box; its bottom center is the object-frame origin
        ratios: Wheelbase ratios
        K: Camera intrinsics
        plane: Ground plane the box rests on; level if omitted
        image_size: (width, height) used only to flag out-of-image points

    Returns:
        ContactPointSet tagged LF, RF, RR, LR; h2d is fy * h / z
    """
    local = local_contact_points(box.l, box.w, ratios)
    ordered = [(tag, local.points[tag]) for tag in (ContactTag.LF, ContactTag.RF, ContactTag.RR, ContactTag.LR)]
    return _label_points(box, Category.CAR, ordered, K, plane, image_size)


def bottom_vertex_labels(
    box: ObjectBox3D,
    K: CameraIntrinsics,
    plane: Optional[GroundPlane] = None,
    image_size: Optional[ImageSize] = None,
) -> ContactPointSet:
    """Bottom-face corners of a car box, labeled like contact points (ratios 1, 1)."""
    return contact_pixel_labels(box, WheelbaseRatios(k_l=1.0, k_w=1.0), K, plane, image_size)


def pedestrian_cyclist_labels(
    box: ObjectBox3D,
    K: CameraIntrinsics,
    plane: Optional[GroundPlane] = None,
    image_size: Optional[ImageSize] = None,
    foot_offset: Optional[float] = None,
    wheel_ratio: Optional[float] = None,
) -> ContactPointSet:
    """
    Two ground contacts for a pedestrian or cyclist box.

    Pedestrian feet sit at local (0, 0, +/-foot_offset), Left on +Z. Cyclist
    wheels sit at local (+/-wheel_ratio * l, 0, 0), Front on +X.
    """
    settings = get_settings()
    category = Category(box.category)
    if category == Category.PEDESTRIAN:
        offset = settings.pedestrian_foot_offset if foot_offset is None else foot_offset
        local = [
            (ContactTag.LEFT, CameraPoint(x=0.0, y=0.0, z=offset)),
            (ContactTag.RIGHT, CameraPoint(x=0.0, y=0.0, z=-offset)),
        ]
    elif category == Category.CYCLIST:
        ratio = settings.cyclist_wheel_ratio if wheel_ratio is None else wheel_ratio
        local = [
            (ContactTag.FRONT, CameraPoint(x=ratio * box.l, y=0.0, z=0.0)),
            (ContactTag.REAR, CameraPoint(x=-ratio * box.l, y=0.0, z=0.0)),
        ]
    else:
        raise ValueError(f"{box.category} boxes have four contact points; use contact_pixel_labels")
    return _label_points(box, category, local, K, plane, image_size)


def object_contact_labels(
    box: ObjectBox3D,
    K: CameraIntrinsics,
    ratios: Optional[WheelbaseRatios] = None,
    plane: Optional[GroundPlane] = None,
    image_size: Optional[ImageSize] = None,
) -> ContactPointSet:
    """Contact labels for any supported category."""
    if Category(box.category) == Category.CAR:
        if ratios is None:
            settings = get_settings()
            ratios = WheelbaseRatios(k_l=settings.kl, k_w=settings.kw)
        return contact_pixel_labels(box, ratios, K, plane, image_size)
    return pedestrian_cyclist_labels(box, K, plane, image_size)


def label_plane(boxes: Sequence[ObjectBox3D], min_boxes: int = 3) -> GroundPlane:
    """Least-squares plane through the bottom centers of a frame's boxes."""
    if len(boxes) < max(3, min_boxes):
        raise DegenerateInput(f"need at least {max(3, min_boxes)} boxes for a horizon label, got {len(boxes)}")
    plane = fit_plane_lsq([box.bottom_center for box in boxes], min_points=min_boxes)
    logger.debug(f"horizon label plane from {len(boxes)} boxes: a={plane.a:.5g} b={plane.b:.5g} c={plane.c:.5g}")
    return plane


def horizon_pseudo_label(boxes: Sequence[ObjectBox3D], K: CameraIntrinsics, min_boxes: int = 3) -> ImageLine:
    """
    Horizon line of the plane through the bottom centers of a frame's boxes.

    Args:
        boxes: Annotated boxes of one frame
        K: Camera intrinsics
        min_boxes: Fewest boxes accepted for the plane fit

    Returns:
        Horizon line of the least-squares plane
    """
    return plane_to_horizon(label_plane(boxes, min_boxes), K)


def box_corners(box: ObjectBox3D, plane: Optional[GroundPlane] = None) -> List[CameraPoint]:
    """Eight corners in the camera frame: bottom face first, then top face."""
    half_l, half_w = box.l / 2.0, box.w / 2.0
    local = np.array(
        [
            [half_l, 0.0, half_w],
            [half_l, 0.0, -half_w],
            [-half_l, 0.0, -half_w],
            [-half_l, 0.0, half_w],
        ]
    )
    top = local + np.array([0.0, -box.h, 0.0])
    corners = np.vstack([local, top])
    rotation = yaw_rotation(box.yaw) if plane is None else plane_aligned_rotation(box.yaw, plane)
    camera = corners @ rotation.T + box.bottom_center.to_array()
    return [CameraPoint.from_array(row) for row in camera]


def box_bbox2d(
    box: ObjectBox3D, K: CameraIntrinsics, plane: Optional[GroundPlane] = None
) -> Tuple[float, float, float, float]:
    """Tight (left, top, right, bottom) image box around the projected corners."""
    corners = np.array([corner.to_array() for corner in box_corners(box, plane)])
    try:
        pixels = project_many(corners, K)
    except NonPositiveDepth as exc:
        raise BehindCamera(f"box {box.object_id or ''} crosses the image plane") from exc
    left, top = pixels.min(axis=0)
    right, bottom = pixels.max(axis=0)
    return float(left), float(top), float(right), float(bottom)
