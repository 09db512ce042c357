"""
Request and response models for the GroundPrior HTTP API.
"""
from typing import List, Optional

from pydantic import BaseModel, Field

from .models import (
    CameraIntrinsics,
    EdgeMiningResult,
    EgoPose,
    GroundPlane,
    ImageLine,
    ObjectBox3D,
    ObjectFailure,
    PseudoLabelFrame,
    WheelbaseRatios,
)


# Ground plane models
class GroundPlaneRequest(BaseModel):
    """Model for deriving a ground plane from a horizon line."""
    intrinsics: CameraIntrinsics = Field(..., description="Camera intrinsics")
    horizon: ImageLine = Field(..., description="Horizon line v = k*u + b")
    camera_height: Optional[float] = Field(None, gt=0, description="Camera height in meters; configured default if omitted")


class GroundPlaneResponse(BaseModel):
    """Model for ground plane response."""
    plane: GroundPlane = Field(..., description="Ground plane y = a*x + b*z + c")
    ego_pose: EgoPose = Field(..., description="Roll and pitch of the ground plane")


class HorizonLabelRequest(BaseModel):
    """Model for generating a horizon pseudo label from annotated boxes."""
    intrinsics: CameraIntrinsics = Field(..., description="Camera intrinsics")
    boxes: List[ObjectBox3D] = Field(..., description="Annotated boxes of one frame")
    min_boxes: int = Field(3, ge=3, description="Fewest boxes accepted for the plane fit")


class HorizonLabelResponse(BaseModel):
    """Model for horizon pseudo label response."""
    horizon: ImageLine = Field(..., description="Horizon line of the fitted plane")
    plane: GroundPlane = Field(..., description="Plane fitted through the bottom centers")


# Contact label models
class ContactLabelRequest(BaseModel):
    """Model for projecting the contact points of one box."""
    intrinsics: CameraIntrinsics = Field(..., description="Camera intrinsics")
    box: ObjectBox3D = Field(..., description="Annotated 3D box")
    ratios: Optional[WheelbaseRatios] = Field(None, description="Wheelbase ratios for cars; configured default if omitted")
    plane: Optional[GroundPlane] = Field(None, description="Plane the box rests on; level if omitted")
    image_width: Optional[int] = Field(None, gt=0, description="Image width used to flag out-of-image points")
    image_height: Optional[int] = Field(None, gt=0, description="Image height used to flag out-of-image points")


# Box deduction models
class BoxesRequest(BaseModel):
    """Model for deducing the boxes of one frame."""
    intrinsics: CameraIntrinsics = Field(..., description="Camera intrinsics")
    frame: PseudoLabelFrame = Field(..., description="Contact points and horizon of the frame")
    mode: str = Field("network", description="Horizon source", pattern="^(network|fixed)$")
    camera_height: Optional[float] = Field(None, gt=0, description="Camera height in meters; configured default if omitted")


class BoxesResponse(BaseModel):
    """Model for deduced boxes response."""
    frame_id: str = Field(..., description="Frame identifier")
    horizon: ImageLine = Field(..., description="Horizon line used")
    plane: GroundPlane = Field(..., description="Ground plane used")
    ego_pose: EgoPose = Field(..., description="Roll and pitch of the ground plane")
    boxes: List[ObjectBox3D] = Field(..., description="Deduced boxes")
    failures: List[ObjectFailure] = Field(default_factory=list, description="Objects that could not be deduced")


# Edge mining models
class EdgeSlopeResponse(BaseModel):
    """Model for vertical edge mining response."""
    mining: EdgeMiningResult = Field(..., description="Vertical edge statistics and slope")
    fused_horizon: Optional[ImageLine] = Field(None, description="Horizon after slope fusion, if a line was given")
