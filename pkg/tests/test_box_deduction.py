"""
Tests for dynamic back-projection and 3D box deduction.
"""
import math

import numpy as np
import pytest

from groundprior.box_deduction import (
    backproject_contact,
    bottom_center,
    deduce_box,
    derive_dimensions,
    derive_rotation,
)
from groundprior.config import Settings
from groundprior.errors import AboveHorizon, DegenerateFront, NonPositiveDepth, NonPositiveHeight, WrongArity
from groundprior.ground_plane import flat_horizon, plane_to_horizon
from groundprior.models import (
    CameraPoint,
    Category,
    ContactPoint,
    ContactPointSet,
    ContactTag,
    ImageLine,
    ObjectBox3D,
    Pixel,
    PoseRT,
    RefinementBias,
    WheelbaseRatios,
    wrap_angle,
)
from groundprior.pseudo_labels import contact_pixel_labels, local_contact_points, local_to_camera, object_contact_labels

RATIOS = WheelbaseRatios(k_l=0.7, k_w=0.9)
CAR_TAGS = (ContactTag.LF, ContactTag.RF, ContactTag.RR, ContactTag.LR)


def _car_points(yaw, center=(0.0, 1.65, 20.0), l=4.0, w=1.6):
    pose = PoseRT(yaw=yaw, translation=CameraPoint(x=center[0], y=center[1], z=center[2]))
    local = local_contact_points(l, w, RATIOS).points
    return {tag: local_to_camera(point, pose) for tag, point in local.items()}


def _box(yaw=math.radians(30.0), x=2.0, z=20.0, plane=None, **kwargs):
    y = 1.65 if plane is None else plane.y_at(x, z)
    fields = dict(l=4.0, w=1.6, h=1.5, category="Car", object_id="frame-000")
    fields.update(kwargs)
    return ObjectBox3D(bottom_center=CameraPoint(x=x, y=y, z=z), yaw=yaw, **fields)


class TestBackprojectContact:
    """Test cases for lifting contact pixels onto the ground."""

    def test_flat_ground(self, K):
        """On level ground depth is fy * H / (v - cv)."""
        point = backproject_contact(Pixel(u=600.0, v=250.0), ImageLine(k=0.0, b=180.0), K, 1.65)
        assert point.to_array() == pytest.approx([0.0, 1.65, 16.5])

    def test_flat_ground_grid(self, K):
        """The level-ground closed form holds across the image."""
        for u in np.linspace(0.0, 1200.0, 10):
            for v in np.linspace(181.0, 370.0, 10):
                point = backproject_contact(Pixel(u=u, v=v), ImageLine(k=0.0, b=K.cv), K, 1.65)
                assert point.z == pytest.approx(K.fy * 1.65 / (v - K.cv), rel=1e-12)
                assert point.y == pytest.approx(1.65, abs=1e-12)

    def test_pitched_ground(self, K):
        """With a raised horizon the point lands on the pitched plane."""
        point = backproject_contact(Pixel(u=600.0, v=250.0), ImageLine(k=0.0, b=156.0), K, 1.65)
        assert point.z == pytest.approx(12.2872, abs=1e-4)
        assert point.y == pytest.approx(1.22873, abs=1e-5)
        assert point.y == pytest.approx(-(24.0 / 700.0) * point.z + 1.65, abs=1e-12)

    def test_result_on_ray_and_plane(self, K, tilted_plane):
        """Lifted points lie on the viewing ray and on the plane of the horizon."""
        horizon = plane_to_horizon(tilted_plane, K)
        rng = np.random.default_rng(21)
        for u, v in zip(rng.uniform(0, 1242, 30), rng.uniform(220, 375, 30)):
            point = backproject_contact(Pixel(u=u, v=v), horizon, K, tilted_plane.c)
            assert K.fx * point.x / point.z + K.cu == pytest.approx(u)
            assert K.fy * point.y / point.z + K.cv == pytest.approx(v)
            assert tilted_plane.residual(point) == pytest.approx(0.0, abs=1e-9)

    def test_above_horizon(self, K):
        """Pixels on or above the horizon never meet the ground."""
        with pytest.raises(AboveHorizon):
            backproject_contact(Pixel(u=600.0, v=150.0), ImageLine(k=0.0, b=180.0), K, 1.65)
        with pytest.raises(AboveHorizon):
            backproject_contact(Pixel(u=600.0, v=180.0), ImageLine(k=0.0, b=180.0), K, 1.65)

    def test_non_positive_height(self, K):
        """The camera must be above the ground."""
        with pytest.raises(NonPositiveHeight):
            backproject_contact(Pixel(u=600.0, v=250.0), ImageLine(k=0.0, b=180.0), K, 0.0)


class TestBottomCenter:
    """Test cases for the bottom center."""

    def test_square(self):
        """Corners of a square average to its center."""
        points = [CameraPoint(x=x, y=1.65, z=z) for x, z in ((0, 19), (2, 19), (2, 21), (0, 21))]
        assert bottom_center(points).to_array() == pytest.approx([1.0, 1.65, 20.0])

    def test_two_feet(self):
        """Two pedestrian feet average to the point between them."""
        points = [CameraPoint(x=-0.2, y=1.65, z=8.0), CameraPoint(x=0.2, y=1.65, z=8.0)]
        assert bottom_center(points).to_array() == pytest.approx([0.0, 1.65, 8.0])

    def test_random_mean(self):
        """Matches an independent mean."""
        rng = np.random.default_rng(17)
        raw = rng.normal(size=(4, 3))
        result = bottom_center([CameraPoint.from_array(row) for row in raw])
        assert result.to_array() == pytest.approx(raw.mean(axis=0), abs=1e-12)

    def test_wrong_arity(self):
        """Three points are neither a car nor a two-point object."""
        with pytest.raises(WrongArity):
            bottom_center([CameraPoint(x=0, y=0, z=1)] * 3)


class TestDeriveDimensions:
    """Test cases for size recovery."""

    def test_axis_aligned_car(self):
        """Wheel spacing divided by the ratios gives the box size."""
        l, w, h = derive_dimensions(_car_points(0.0), RATIOS, d_g=20.0, fy=700.0, h2d=52.5)
        assert l == pytest.approx(4.0)
        assert w == pytest.approx(1.6)
        assert h == pytest.approx(1.5)

    def test_height_from_2d_box(self):
        """Height follows from similar triangles."""
        _, _, h = derive_dimensions(_car_points(0.0), RATIOS, d_g=16.5, fy=700.0, h2d=70.0)
        assert h == pytest.approx(1.65)

    def test_rotation_invariant(self):
        """Rotating the car does not change its size."""
        for yaw in (math.radians(30.0), -2.0, 3.0):
            l, w, _ = derive_dimensions(_car_points(yaw), RATIOS, d_g=20.0, fy=700.0, h2d=50.0)
            assert l == pytest.approx(4.0, abs=1e-9)
            assert w == pytest.approx(1.6, abs=1e-9)

    def test_pedestrian_uses_averages(self):
        """Two-point categories take configured average sizes."""
        points = {
            ContactTag.LEFT: CameraPoint(x=-0.15, y=1.65, z=8.0),
            ContactTag.RIGHT: CameraPoint(x=0.15, y=1.65, z=8.0),
        }
        settings = Settings(pedestrian_length=0.9, pedestrian_width=0.5)
        l, w, h = derive_dimensions(points, RATIOS, 8.0, 700.0, 140.0, Category.PEDESTRIAN, settings)
        assert (l, w) == (0.9, 0.5)
        assert h == pytest.approx(1.6)

    def test_wrong_tags(self):
        """A car needs all four wheel tags."""
        points = _car_points(0.0)
        del points[ContactTag.LR]
        with pytest.raises(WrongArity):
            derive_dimensions(points, RATIOS, 20.0, 700.0, 50.0)

    def test_non_positive_depth(self):
        """Depth must be positive."""
        with pytest.raises(NonPositiveDepth):
            derive_dimensions(_car_points(0.0), RATIOS, 0.0, 700.0, 50.0)


class TestDeriveRotation:
    """Test cases for yaw recovery."""

    def test_facing_x(self):
        """An axis-aligned car facing +X has zero yaw."""
        points = _car_points(0.0)
        assert derive_rotation(points, bottom_center(list(points.values()))) == pytest.approx(0.0, abs=1e-12)

    @pytest.mark.parametrize("degrees", [30.0, 150.0, -120.0, -30.0, 180.0])
    def test_constructed_yaw(self, degrees):
        """Yaw used to build the contacts is recovered in every quadrant."""
        points = _car_points(wrap_angle(math.radians(degrees)))
        yaw = derive_rotation(points, bottom_center(list(points.values())))
        assert math.cos(yaw - math.radians(degrees)) == pytest.approx(1.0, abs=1e-12)
        assert -math.pi < yaw <= math.pi

    def test_shift_equivariance(self):
        """Rotating the contacts about Y shifts the yaw by the same angle."""
        base = 0.4
        for delta in (0.5, 2.0, -2.9):
            points = _car_points(wrap_angle(base + delta))
            yaw = derive_rotation(points, bottom_center(list(points.values())))
            assert yaw == pytest.approx(wrap_angle(base + delta), abs=1e-9)

    def test_front_rear_swap_turns_around(self):
        """Swapping front and rear labels reverses the heading."""
        points = _car_points(0.6)
        swapped = {
            ContactTag.LF: points[ContactTag.RR],
            ContactTag.RF: points[ContactTag.LR],
            ContactTag.RR: points[ContactTag.LF],
            ContactTag.LR: points[ContactTag.RF],
        }
        center = bottom_center(list(points.values()))
        assert derive_rotation(swapped, center) == pytest.approx(wrap_angle(0.6 + math.pi), abs=1e-9)

    def test_degenerate_front(self):
        """Front wheels at the center leave the heading undefined."""
        center = CameraPoint(x=0.0, y=1.65, z=10.0)
        points = {tag: center for tag in CAR_TAGS}
        with pytest.raises(DegenerateFront):
            derive_rotation(points, center)


class TestDeduceBox:
    """Test cases for the full deduction."""

    def _check(self, box, deduced):
        assert deduced.bottom_center.to_array() == pytest.approx(box.bottom_center.to_array(), abs=1e-6)
        assert deduced.l == pytest.approx(box.l, abs=1e-6)
        assert deduced.w == pytest.approx(box.w, abs=1e-6)
        assert deduced.h == pytest.approx(box.h, abs=1e-6)
        assert abs(wrap_angle(deduced.yaw - box.yaw)) < 1e-6

    def test_flat_round_trip(self, K):
        """Label then deduce recovers the box on level ground."""
        box = _box()
        labels = contact_pixel_labels(box, RATIOS, K)
        deduced = deduce_box(labels, flat_horizon(K), K, 1.65, RATIOS)
        self._check(box, deduced)
        assert deduced.object_id == "frame-000"
        assert deduced.category == "Car"

    def test_tilted_round_trip(self, K, tilted_plane):
        """Label then deduce recovers the box on a tilted plane with its horizon."""
        box = _box(plane=tilted_plane)
        labels = contact_pixel_labels(box, RATIOS, K, plane=tilted_plane)
        deduced = deduce_box(labels, plane_to_horizon(tilted_plane, K), K, tilted_plane.c, RATIOS)
        self._check(box, deduced)

    def test_flat_horizon_on_tilted_ground_drifts(self, K):
        """Assuming level ground on a pitched road misplaces far objects more."""
        from evaluation.runners.synth import plane_from_pose

        plane = plane_from_pose(0.0, 2.0, 1.65)
        errors = []
        for z in (10.0, 20.0, 30.0):
            box = _box(x=0.0, z=z, yaw=0.3, plane=plane)
            labels = contact_pixel_labels(box, RATIOS, K, plane=plane)
            deduced = deduce_box(labels, flat_horizon(K), K, 1.65, RATIOS)
            errors.append(abs(deduced.bottom_center.z - z))
        assert errors[0] < errors[1] < errors[2]

    def test_cyclist_round_trip(self, K, tilted_plane):
        """Cyclist position, height and heading come back from two wheels."""
        box = _box(yaw=-1.2, l=1.76, w=0.6, h=1.7, category="Cyclist", plane=tilted_plane)
        labels = object_contact_labels(box, K, plane=tilted_plane)
        deduced = deduce_box(labels, plane_to_horizon(tilted_plane, K), K, tilted_plane.c)
        self._check(box, deduced)

    def test_pedestrian_position(self, K):
        """Pedestrian position is recovered; yaw follows the configured mode."""
        box = _box(yaw=0.8, l=0.8, w=0.6, h=1.75, category="Pedestrian")
        labels = object_contact_labels(box, K)
        deduced = deduce_box(labels, flat_horizon(K), K, 1.65)
        assert deduced.bottom_center.to_array() == pytest.approx(box.bottom_center.to_array(), abs=1e-6)
        assert deduced.h == pytest.approx(1.75, abs=1e-6)
        assert deduced.yaw == 0.0
        feet = deduce_box(labels, flat_horizon(K), K, 1.65, settings=Settings(pedestrian_yaw_mode="feet_axis"))
        assert feet.yaw == pytest.approx(0.8, abs=1e-9)

    def test_bias(self, K):
        """Refinement bias shifts depth along the ray and adds to size and yaw."""
        box = _box()
        labels = contact_pixel_labels(box, RATIOS, K)
        bias = RefinementBias(d_b=1.0, dl=0.1, dw=-0.1, dh=0.05, r_b=0.2)
        deduced = deduce_box(labels, flat_horizon(K), K, 1.65, RATIOS, bias=bias)
        scale = 21.0 / 20.0
        assert deduced.bottom_center.to_array() == pytest.approx(box.bottom_center.to_array() * scale, abs=1e-6)
        assert deduced.l == pytest.approx(4.1, abs=1e-6)
        assert deduced.w == pytest.approx(1.5, abs=1e-6)
        assert deduced.h == pytest.approx(1.55, abs=1e-6)
        assert deduced.yaw == pytest.approx(box.yaw + 0.2, abs=1e-6)

    def test_contact_above_horizon(self, K):
        """A contact above the horizon fails the whole object."""
        labels = ContactPointSet(
            category=Category.PEDESTRIAN,
            points=[
                ContactPoint(tag=ContactTag.LEFT, pixel=Pixel(u=590.0, v=170.0)),
                ContactPoint(tag=ContactTag.RIGHT, pixel=Pixel(u=610.0, v=260.0)),
            ],
            h2d=100.0,
        )
        with pytest.raises(AboveHorizon):
            deduce_box(labels, flat_horizon(K), K, 1.65)


if __name__ == "__main__":
    pytest.main([__file__])
