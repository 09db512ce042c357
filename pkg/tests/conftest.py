"""
Shared fixtures for the GroundPrior test suite.
"""
import math

import pytest

from groundprior.config import get_settings
from groundprior.models import CameraIntrinsics, CameraPoint, GroundPlane, ObjectBox3D

CALIB_TEXT = (
    "P0: 700.0 0.0 600.0 0.0 0.0 700.0 180.0 0.0 0.0 0.0 1.0 0.0\n"
    "P2: 700.0 0.0 600.0 0.0 0.0 700.0 180.0 0.0 0.0 0.0 1.0 0.0\n"
    "R0_rect: 1.0 0.0 0.0 0.0 1.0 0.0 0.0 0.0 1.0\n"
)


@pytest.fixture(autouse=True)
def fresh_settings():
    """Drop cached settings so environment overrides never leak between tests."""
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


@pytest.fixture
def K():
    return CameraIntrinsics(fx=700.0, fy=700.0, cu=600.0, cv=180.0)


@pytest.fixture
def flat_plane():
    return GroundPlane(a=0.0, b=0.0, c=1.65)


@pytest.fixture
def tilted_plane():
    return GroundPlane(a=0.01, b=-0.0343, c=1.65)


@pytest.fixture
def car_box():
    return ObjectBox3D(
        bottom_center=CameraPoint(x=2.0, y=1.65, z=20.0),
        l=4.0,
        w=1.6,
        h=1.5,
        yaw=math.radians(30.0),
        category="Car",
        object_id="000000-000",
    )


@pytest.fixture
def calib_file(tmp_path):
    path = tmp_path / "calib.txt"
    path.write_text(CALIB_TEXT)
    return path
