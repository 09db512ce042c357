"""
Configuration for GroundPrior.

Values come from GROUNDPRIOR_* environment variables, optionally loaded from a
.env file in the working directory.
"""
import os
from functools import lru_cache
from typing import Literal

from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field

load_dotenv()

ENV_PREFIX = "GROUNDPRIOR_"

# KITTI rig defaults
CAMERA_HEIGHT = 1.65
WHEELBASE_KL = 0.7
WHEELBASE_KW = 0.9

# Vertical edge mining
BLUR_KSIZE = 13
BLUR_SIGMA = 4.0
CANNY_LOW = 50.0
CANNY_HIGH = 100.0
HOUGH_RHO = 1.0
HOUGH_THETA_DEG = 1.0
HOUGH_THRESHOLD = 5
HOUGH_MIN_LINE_LENGTH = 40
HOUGH_MAX_LINE_GAP = 10
VERTICAL_MIN_DEG = 80.0
VERTICAL_MAX_DEG = 100.0
MIN_VERTICAL_EDGES = 3
MAX_ANGLE_STD_DEG = 3.0

# Plane fits steeper than this are not ground
MAX_PLANE_SLOPE = 10.0
# Normal-equation determinant guard after column scaling
MIN_NORMAL_DETERMINANT = 1e-12


class Settings(BaseModel):
    """Runtime settings; every field maps to GROUNDPRIOR_<FIELD NAME>."""

    model_config = ConfigDict(frozen=True)

    camera_height: float = Field(CAMERA_HEIGHT, gt=0, description="Camera height above the ground in meters")
    kl: float = Field(WHEELBASE_KL, gt=0, le=1, description="Front-rear wheel spacing over box length")
    kw: float = Field(WHEELBASE_KW, gt=0, le=1, description="Left-right wheel spacing over box width")
    pedestrian_length: float = Field(0.8, gt=0, description="Average pedestrian box length in meters")
    pedestrian_width: float = Field(0.6, gt=0, description="Average pedestrian box width in meters")
    cyclist_length: float = Field(1.76, gt=0, description="Average cyclist box length in meters")
    cyclist_width: float = Field(0.6, gt=0, description="Average cyclist box width in meters")
    pedestrian_foot_offset: float = Field(0.15, gt=0, description="Lateral offset of each foot from the bottom center")
    cyclist_wheel_ratio: float = Field(0.35, gt=0, le=0.5, description="Wheel contact offset as a fraction of box length")
    pedestrian_yaw_mode: Literal["zero", "feet_axis"] = Field("zero", description="How pedestrian yaw is recovered")
    cyclist_yaw_mode: Literal["wheel_axis", "zero"] = Field("wheel_axis", description="How cyclist yaw is recovered")
    cluster_radius_deg: float = Field(1.5, gt=0, description="Single-linkage merge radius for edge angles")
    hough_seed: int = Field(0, description="Seed of the probabilistic Hough visiting order")
    log_level: str = Field("INFO", description="Logging level for the CLI and the service")


@lru_cache()
def get_settings() -> Settings:
    """
    Build settings from the environment.

    Returns:
        Frozen Settings instance, cached for the process lifetime
    """
    values = {}
    for name in Settings.model_fields:
        raw = os.environ.get(f"{ENV_PREFIX}{name.upper()}")
        if raw is not None:
            values[name] = raw
    return Settings(**values)
