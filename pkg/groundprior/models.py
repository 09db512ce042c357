"""
Pydantic models for GroundPrior.

Conventions: the camera coordinate system (CCS) has X right, Y down and Z
forward along the optical axis. Pixels have u to the right and v down. Ground
planes are written y = a*x + b*z + c in the CCS.
"""
import math
from enum import Enum
from typing import Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


def wrap_angle(angle: float) -> float:
    """Wrap an angle in radians to (-pi, pi]."""
    wrapped = math.remainder(angle, 2.0 * math.pi)
    if wrapped <= -math.pi:
        wrapped += 2.0 * math.pi
    return wrapped


# Camera models
class CameraIntrinsics(BaseModel):
    """Pinhole intrinsics of a rectified camera: zero skew, no distortion."""

    model_config = ConfigDict(frozen=True)

    fx: float = Field(..., gt=0, allow_inf_nan=False, description="Focal length along X in pixels")
    fy: float = Field(..., gt=0, allow_inf_nan=False, description="Focal length along Y in pixels")
    cu: float = Field(..., allow_inf_nan=False, description="Principal point u in pixels")
    cv: float = Field(..., allow_inf_nan=False, description="Principal point v in pixels")

    def matrix(self) -> np.ndarray:
        """Return the 3x3 intrinsic matrix K."""
        return np.array([[self.fx, 0.0, self.cu], [0.0, self.fy, self.cv], [0.0, 0.0, 1.0]])


class Pixel(BaseModel):
    """Continuous image coordinate."""

    model_config = ConfigDict(frozen=True)

    u: float = Field(..., allow_inf_nan=False, description="Column in pixels, right-positive")
    v: float = Field(..., allow_inf_nan=False, description="Row in pixels, down-positive")


class CameraPoint(BaseModel):
    """Point in the camera coordinate system, meters."""

    model_config = ConfigDict(frozen=True)

    x: float = Field(..., allow_inf_nan=False, description="Right-positive coordinate in meters")
    y: float = Field(..., allow_inf_nan=False, description="Down-positive coordinate in meters")
    z: float = Field(..., allow_inf_nan=False, description="Forward coordinate in meters")

    def to_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    @classmethod
    def from_array(cls, values) -> "CameraPoint":
        return cls(x=float(values[0]), y=float(values[1]), z=float(values[2]))


# Ground plane models
class ImageLine(BaseModel):
    """Image line v = k*u + b, used for the horizon."""

    model_config = ConfigDict(frozen=True)

    k: float = Field(..., allow_inf_nan=False, description="Slope dv/du")
    b: float = Field(..., allow_inf_nan=False, description="Intercept: v at u = 0, in pixels")

    def v_at(self, u: float) -> float:
        return self.k * u + self.b


class GroundPlane(BaseModel):
    """Plane y = a*x + b*z + c in the camera coordinate system."""

    model_config = ConfigDict(frozen=True)

    a: float = Field(..., allow_inf_nan=False, description="dy/dx, dimensionless")
    b: float = Field(..., allow_inf_nan=False, description="dy/dz, dimensionless")
    c: float = Field(..., allow_inf_nan=False, description="Y intercept in meters; the camera height on level ground")

    def y_at(self, x: float, z: float) -> float:
        return self.a * x + self.b * z + self.c

    def residual(self, point: CameraPoint) -> float:
        """Signed vertical distance of a point from the plane."""
        return point.y - self.y_at(point.x, point.z)


class EgoPose(BaseModel):
    """Roll and pitch of the ground plane in the camera frame."""

    model_config = ConfigDict(frozen=True)

    roll: float = Field(..., gt=-math.pi / 2, lt=math.pi / 2, description="Roll angle in radians")
    pitch: float = Field(..., gt=-math.pi / 2, lt=math.pi / 2, description="Pitch angle in radians")


# Edge mining models
class GrayImage(BaseModel):
    """8-bit grayscale image stored row-major as a (height, width) array."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    pixels: np.ndarray = Field(..., description="uint8 intensities with shape (height, width)")

    @field_validator("pixels")
    @classmethod
    def _check_pixels(cls, value: np.ndarray) -> np.ndarray:
        array = np.asarray(value)
        if array.dtype != np.uint8:
            raise ValueError(f"pixels must be uint8, got {array.dtype}")
        if array.ndim != 2 or array.shape[0] < 1 or array.shape[1] < 1:
            raise ValueError(f"pixels must be a non-empty 2-D array, got shape {array.shape}")
        array = array.copy()
        array.setflags(write=False)
        return array

    @property
    def width(self) -> int:
        return int(self.pixels.shape[1])

    @property
    def height(self) -> int:
        return int(self.pixels.shape[0])

    @classmethod
    def from_bytes(cls, width: int, height: int, data: bytes) -> "GrayImage":
        if width * height != len(data):
            raise ValueError(f"{width}x{height} image needs {width * height} bytes, got {len(data)}")
        return cls(pixels=np.frombuffer(data, dtype=np.uint8).reshape(height, width))


class LineSegment(BaseModel):
    """Finite image segment between two distinct endpoints."""

    model_config = ConfigDict(frozen=True)

    p0: Pixel
    p1: Pixel

    @model_validator(mode="after")
    def _distinct_endpoints(self) -> "LineSegment":
        if self.p0 == self.p1:
            raise ValueError("segment endpoints must differ")
        return self

    @property
    def length(self) -> float:
        return math.hypot(self.p1.u - self.p0.u, self.p1.v - self.p0.v)

    @property
    def inclination_deg(self) -> float:
        """Angle from the u-axis in [0, 180) degrees, v pointing down."""
        angle = math.degrees(math.atan2(self.p1.v - self.p0.v, self.p1.u - self.p0.u)) % 180.0
        return 0.0 if angle >= 180.0 else angle


class SlopeKind(str, Enum):
    SLOPE = "slope"
    VERTICAL = "vertical"
    ABSENT = "absent"


class EdgeMiningResult(BaseModel):
    """Outcome of vertical edge slope mining."""

    model_config = ConfigDict(frozen=True)

    kind: SlopeKind = Field(..., description="Finite slope, exactly vertical, or absent")
    k_v: Optional[float] = Field(None, allow_inf_nan=False, description="Slope of the largest cluster when finite")
    n_v: int = Field(..., ge=0, description="Number of vertical edges")
    s_v: Optional[float] = Field(None, ge=0, description="Std of vertical edge inclinations in degrees")
    centroid_deg: Optional[float] = Field(None, description="Mean inclination of the largest cluster")
    cluster_size: int = Field(0, ge=0, description="Members of the largest cluster")

    @model_validator(mode="after")
    def _gate_consistent(self) -> "EdgeMiningResult":
        if (self.kind == SlopeKind.SLOPE) != (self.k_v is not None):
            raise ValueError("k_v must be set exactly when kind is 'slope'")
        trusted = self.n_v > 3 and self.s_v is not None and self.s_v < 3.0
        if self.present != trusted:
            raise ValueError(f"gate mismatch: kind={self.kind.value} n_v={self.n_v} s_v={self.s_v}")
        return self

    @property
    def present(self) -> bool:
        return self.kind != SlopeKind.ABSENT


# Contact point models
class Category(str, Enum):
    CAR = "Car"
    PEDESTRIAN = "Pedestrian"
    CYCLIST = "Cyclist"


class ContactTag(str, Enum):
    LF = "LF"
    RF = "RF"
    RR = "RR"
    LR = "LR"
    LEFT = "Left"
    RIGHT = "Right"
    FRONT = "Front"
    REAR = "Rear"


CATEGORY_TAGS: Dict[Category, Tuple[ContactTag, ...]] = {
    Category.CAR: (ContactTag.LF, ContactTag.RF, ContactTag.RR, ContactTag.LR),
    Category.PEDESTRIAN: (ContactTag.LEFT, ContactTag.RIGHT),
    Category.CYCLIST: (ContactTag.FRONT, ContactTag.REAR),
}


class ContactPoint(BaseModel):
    """One labeled ground contact pixel."""

    model_config = ConfigDict(frozen=True)

    tag: ContactTag
    pixel: Pixel
    in_image: bool = Field(True, description="False when the pixel falls outside the known image bounds")


class ContactPointSet(BaseModel):
    """Ground contact pixels of one object."""

    model_config = ConfigDict(frozen=True)

    category: Category
    points: List[ContactPoint] = Field(..., description="Labeled contact pixels in category tag order")
    h2d: float = Field(..., gt=0, allow_inf_nan=False, description="2-D box height in pixels")
    object_id: Optional[str] = Field(None, description="Shared id used to match predictions and ground truth")

    @model_validator(mode="after")
    def _check_tags(self) -> "ContactPointSet":
        expected = CATEGORY_TAGS[self.category]
        tags = [point.tag for point in self.points]
        if len(tags) != len(expected) or set(tags) != set(expected):
            names = ", ".join(tag.value for tag in expected)
            raise ValueError(f"{self.category.value} needs exactly the contact tags {names}")
        return self

    def pixel(self, tag: ContactTag) -> Pixel:
        for point in self.points:
            if point.tag == tag:
                return point.pixel
        raise KeyError(tag)


class WheelbaseRatios(BaseModel):
    """Wheel spacing relative to the 3D box length (k_l) and width (k_w)."""

    model_config = ConfigDict(frozen=True)

    k_l: float = Field(0.7, gt=0, le=1, description="Front-rear wheel spacing over length")
    k_w: float = Field(0.9, gt=0, le=1, description="Left-right wheel spacing over width")


class RefinementBias(BaseModel):
    """Additive corrections applied on top of the geometric estimate."""

    model_config = ConfigDict(frozen=True)

    d_b: float = Field(0.0, allow_inf_nan=False, description="Depth bias in meters")
    dl: float = Field(0.0, allow_inf_nan=False, description="Length bias in meters")
    dw: float = Field(0.0, allow_inf_nan=False, description="Width bias in meters")
    dh: float = Field(0.0, allow_inf_nan=False, description="Height bias in meters")
    r_b: float = Field(0.0, allow_inf_nan=False, description="Yaw bias in radians")


class ObjectBox3D(BaseModel):
    """3D box anchored at the center of its bottom face."""

    model_config = ConfigDict(frozen=True)

    bottom_center: CameraPoint
    l: float = Field(..., gt=0, allow_inf_nan=False, description="Length in meters, along local X")
    w: float = Field(..., gt=0, allow_inf_nan=False, description="Width in meters, along local Z")
    h: float = Field(..., gt=0, allow_inf_nan=False, description="Height in meters")
    yaw: float = Field(..., gt=-math.pi, le=math.pi, description="Rotation about Y in radians")
    category: str = Field(Category.CAR.value, description="Object class name")
    object_id: Optional[str] = Field(None, description="Shared id used for matching")
    score: Optional[float] = Field(None, description="Detection score, if any")

    @model_validator(mode="after")
    def _in_front(self) -> "ObjectBox3D":
        if self.bottom_center.z <= 0:
            raise ValueError("bottom center must be in front of the camera")
        return self


class PoseRT(BaseModel):
    """Yaw about Y plus the translation of the bottom center."""

    model_config = ConfigDict(frozen=True)

    yaw: float = Field(..., allow_inf_nan=False, description="Rotation about Y in radians")
    translation: CameraPoint

    @model_validator(mode="after")
    def _in_front(self) -> "PoseRT":
        if self.translation.z <= 0:
            raise ValueError("translation must be in front of the camera")
        return self


class LocalContactPoints(BaseModel):
    """Car contact points in the object frame (origin at the bottom center)."""

    model_config = ConfigDict(frozen=True)

    points: Dict[ContactTag, CameraPoint]

    @model_validator(mode="after")
    def _check_layout(self) -> "LocalContactPoints":
        if set(self.points) != set(CATEGORY_TAGS[Category.CAR]):
            raise ValueError("local contact points need LF, RF, RR and LR")
        if any(point.y != 0.0 for point in self.points.values()):
            raise ValueError("local contact points lie on the bottom face (y = 0)")
        return self


# Dataset models
class LabelRecord(BaseModel):
    """One object line of a KITTI label file."""

    model_config = ConfigDict(frozen=True)

    category: str
    truncated: float = Field(..., allow_inf_nan=False, description="Truncation ratio")
    occluded: int = Field(..., description="Occlusion state")
    alpha: float = Field(..., allow_inf_nan=False, description="Observation angle in radians")
    bbox2d: Tuple[float, float, float, float] = Field(..., description="left, top, right, bottom in pixels")
    dims: Tuple[float, float, float] = Field(..., description="h, w, l in meters")
    location: Tuple[float, float, float] = Field(..., description="Bottom center x, y, z in camera frame")
    rotation_y: float = Field(..., allow_inf_nan=False, description="Yaw in radians")
    score: Optional[float] = Field(None, description="Detection score")
    object_id: Optional[str] = Field(None, description="Explicit id for prediction/ground-truth matching")

    @model_validator(mode="after")
    def _check_extent(self) -> "LabelRecord":
        left, top, right, bottom = self.bbox2d
        if right < left or bottom < top:
            raise ValueError("bbox2d must satisfy right >= left and bottom >= top")
        # DontCare regions carry -1 sentinels
        if self.category != "DontCare" and min(self.dims) < 0:
            raise ValueError("dimensions must be non-negative")
        return self


class CalibRecord(BaseModel):
    """Calibration entries keyed by name; only P2 is interpreted."""

    model_config = ConfigDict(frozen=True)

    entries: Dict[str, Tuple[float, ...]] = Field(..., description="Matrix name to row-major values, in file order")

    @model_validator(mode="after")
    def _check_p2(self) -> "CalibRecord":
        p2 = self.entries.get("P2")
        if p2 is None or len(p2) != 12:
            raise ValueError("P2 must hold 12 values")
        if p2[0] <= 0 or p2[5] <= 0:
            raise ValueError("P2 focal lengths must be positive")
        return self

    @property
    def p2(self) -> np.ndarray:
        return np.array(self.entries["P2"], dtype=float).reshape(3, 4)

    @property
    def intrinsics(self) -> CameraIntrinsics:
        p2 = self.entries["P2"]
        return CameraIntrinsics(fx=p2[0], fy=p2[5], cu=p2[2], cv=p2[6])


class PseudoLabelFrame(BaseModel):
    """Contact point labels and the horizon line of one frame."""

    model_config = ConfigDict(frozen=True)

    frame_id: str
    objects: List[ContactPointSet] = Field(default_factory=list)
    horizon: ImageLine


# Evaluation models
DEPTH_BUCKET_EDGES: Tuple[float, ...] = (0.0, 20.0, 40.0, math.inf)


class DepthBucketReport(BaseModel):
    """Mean absolute depth error per ground-truth depth bucket."""

    model_config = ConfigDict(frozen=True)

    method: str = Field("GroundPrior", description="Row label")
    errors: Tuple[Optional[float], Optional[float], Optional[float]] = Field(
        ..., description="Mean |z_pred - z_gt| for [0,20), [20,40), [40,inf); None when empty"
    )
    counts: Tuple[int, int, int] = Field((0, 0, 0), description="Matched objects per bucket")
    unmatched: int = Field(0, ge=0, description="Objects without a partner")

    @model_validator(mode="after")
    def _non_negative(self) -> "DepthBucketReport":
        if any(count < 0 for count in self.counts):
            raise ValueError("bucket counts must be non-negative")
        if any(error is not None and error < 0 for error in self.errors):
            raise ValueError("bucket errors must be non-negative")
        return self


class DimErrorReport(BaseModel):
    """Mean L1 errors of depth and 3D dimensions."""

    model_config = ConfigDict(frozen=True)

    method: str = Field("GroundPrior", description="Row label")
    depth: float = Field(..., ge=0, description="Object depth error in meters")
    height: float = Field(..., ge=0, description="3D height error in meters")
    length: float = Field(..., ge=0, description="3D length error in meters")
    width: float = Field(..., ge=0, description="3D width error in meters")
    count: int = Field(0, ge=0, description="Matched objects")
    unmatched: int = Field(0, ge=0, description="Objects without a partner")


class SweepRow(BaseModel):
    """One cell of the fixed-versus-dynamic plane tilt sweep."""

    model_config = ConfigDict(frozen=True)

    pitch_deg: float
    depth: float
    fixed_error: float = Field(..., description="|z_est - z_true| with the flat horizon; NaN if unobservable")
    dynamic_error: float = Field(..., description="|z_est - z_true| with the true horizon")
    fixed_signed_error: float = Field(..., description="z_est - z_true with the flat horizon")
    inverse_depth_error: float = Field(..., description="1/z_est - 1/z_true with the flat horizon")


class SynthScene(BaseModel):
    """Ground truth and contact labels of one synthetic frame."""

    model_config = ConfigDict(frozen=True)

    frame_id: str
    plane: GroundPlane
    intrinsics: CameraIntrinsics
    boxes: List[ObjectBox3D]
    labels: List[LabelRecord]
    contacts: PseudoLabelFrame


class ObjectFailure(BaseModel):
    """An object the pipeline could not deduce."""

    object_id: Optional[str]
    category: str
    error: str
    status: str = "failed"


class FrameResult(BaseModel):
    """Everything the per-frame pipeline derived."""

    frame_id: str
    horizon: ImageLine
    plane: GroundPlane
    ego_pose: EgoPose
    mining: Optional[EdgeMiningResult] = None
    boxes: List[ObjectBox3D] = Field(default_factory=list)
    failures: List[ObjectFailure] = Field(default_factory=list)
    processed_at: str
