"""
Tests for contact point and horizon pseudo-label generation.
"""
import math

import numpy as np
import pytest

from groundprior.camera_model import project
from groundprior.errors import BehindCamera, DegenerateInput, NonPositiveDimension
from groundprior.ground_plane import plane_to_horizon
from groundprior.models import (
    CameraPoint,
    Category,
    ContactTag,
    GroundPlane,
    ObjectBox3D,
    PoseRT,
    WheelbaseRatios,
)
from groundprior.pseudo_labels import (
    bottom_vertex_labels,
    box_bbox2d,
    box_corners,
    contact_pixel_labels,
    horizon_pseudo_label,
    label_plane,
    local_contact_points,
    local_to_camera,
    object_contact_labels,
    pedestrian_cyclist_labels,
    plane_aligned_rotation,
    yaw_rotation,
)

RATIOS = WheelbaseRatios(k_l=0.7, k_w=0.9)


def _box(x=0.0, y=1.65, z=10.0, yaw=0.0, l=4.0, w=1.6, h=1.5, category="Car", object_id=None):
    return ObjectBox3D(
        bottom_center=CameraPoint(x=x, y=y, z=z), l=l, w=w, h=h, yaw=yaw, category=category, object_id=object_id
    )


class TestLocalContactPoints:
    """Test cases for wheel contacts in the object frame."""

    def test_layout(self):
        """Wheel contacts sit at +/- k_l*l/2 and +/- k_w*w/2."""
        points = local_contact_points(4.0, 1.6, RATIOS).points
        assert points[ContactTag.LF].to_array() == pytest.approx([1.4, 0.0, 0.72])
        assert points[ContactTag.RF].to_array() == pytest.approx([1.4, 0.0, -0.72])
        assert points[ContactTag.RR].to_array() == pytest.approx([-1.4, 0.0, -0.72])
        assert points[ContactTag.LR].to_array() == pytest.approx([-1.4, 0.0, 0.72])

    def test_symmetric_about_origin(self):
        """The four contacts average to the bottom center."""
        points = local_contact_points(4.3, 1.7, RATIOS).points
        mean = np.mean([p.to_array() for p in points.values()], axis=0)
        assert mean == pytest.approx([0.0, 0.0, 0.0], abs=1e-15)

    def test_zero_dimensions(self):
        """Degenerate boxes are refused."""
        with pytest.raises(NonPositiveDimension):
            local_contact_points(0.0, 0.0, RATIOS)


class TestLocalToCamera:
    """Test cases for object to camera transforms."""

    def test_identity_rotation(self):
        """Zero yaw only translates."""
        pose = PoseRT(yaw=0.0, translation=CameraPoint(x=0.0, y=1.65, z=10.0))
        point = local_to_camera(CameraPoint(x=1.4, y=0.0, z=0.72), pose)
        assert point.to_array() == pytest.approx([1.4, 1.65, 10.72])

    def test_quarter_turn(self):
        """A quarter turn takes local +X to camera +Z."""
        pose = PoseRT(yaw=math.pi / 2, translation=CameraPoint(x=0.0, y=0.0, z=1e-9))
        point = local_to_camera(CameraPoint(x=1.0, y=0.0, z=0.0), pose)
        assert point.to_array() == pytest.approx([0.0, 0.0, 1.0 + 1e-9], abs=1e-12)

    def test_rotation_is_isometry(self):
        """Rotations preserve lengths."""
        rng = np.random.default_rng(1)
        for yaw in rng.uniform(-math.pi, math.pi, 50):
            p = rng.normal(size=3)
            assert np.linalg.norm(yaw_rotation(yaw) @ p) == pytest.approx(np.linalg.norm(p), abs=1e-12)

    def test_plane_aligned_matches_yaw_on_level_ground(self, flat_plane):
        """On level ground the plane-aligned frame is the plain yaw rotation."""
        for yaw in (-2.5, -0.3, 0.0, 1.1, math.pi):
            assert plane_aligned_rotation(yaw, flat_plane) == pytest.approx(yaw_rotation(yaw), abs=1e-12)

    def test_plane_aligned_is_orthonormal(self, tilted_plane):
        """The tilted object frame is a proper rotation."""
        rotation = plane_aligned_rotation(0.7, tilted_plane)
        assert rotation.T @ rotation == pytest.approx(np.eye(3), abs=1e-12)
        assert np.linalg.det(rotation) == pytest.approx(1.0)

    def test_plane_aligned_keeps_contacts_on_plane(self, tilted_plane):
        """Bottom-face points of a box on a tilted plane stay on that plane."""
        center = CameraPoint(x=3.0, y=tilted_plane.y_at(3.0, 25.0), z=25.0)
        pose = PoseRT(yaw=0.9, translation=center)
        for point in local_contact_points(4.2, 1.8, RATIOS).points.values():
            camera = local_to_camera(point, pose, tilted_plane)
            assert tilted_plane.residual(camera) == pytest.approx(0.0, abs=1e-12)


class TestContactPixelLabels:
    """Test cases for car contact pixels."""

    def test_front_left_pixel(self, K):
        """Hand-computed pixel of the front-left wheel."""
        labels = contact_pixel_labels(_box(), RATIOS, K)
        pixel = labels.pixel(ContactTag.LF)
        assert pixel.u == pytest.approx(691.418, abs=1e-3)
        assert pixel.v == pytest.approx(287.743, abs=1e-3)
        assert [p.tag for p in labels.points] == [ContactTag.LF, ContactTag.RF, ContactTag.RR, ContactTag.LR]
        assert labels.h2d == pytest.approx(700.0 * 1.5 / 10.0)

    def test_symmetric_about_principal_column(self, K):
        """A box straight ahead and facing sideways has mirrored left and right wheels."""
        labels = contact_pixel_labels(_box(yaw=math.pi / 2), RATIOS, K)
        lf, rf = labels.pixel(ContactTag.LF), labels.pixel(ContactTag.RF)
        lr, rr = labels.pixel(ContactTag.LR), labels.pixel(ContactTag.RR)
        assert lf.u - K.cu == pytest.approx(-(rf.u - K.cu))
        assert lr.u - K.cu == pytest.approx(-(rr.u - K.cu))
        assert lf.v == pytest.approx(rf.v)

    def test_behind_camera(self, K):
        """A box straddling the camera cannot be labeled."""
        with pytest.raises(BehindCamera):
            contact_pixel_labels(_box(z=0.5, yaw=math.pi / 2), RATIOS, K)

    def test_out_of_image_flag(self, K):
        """Contacts outside the image keep their pixel but are flagged."""
        labels = contact_pixel_labels(_box(x=-8.0, z=6.0), RATIOS, K, image_size=(1242, 375))
        flags = {p.tag: p.in_image for p in labels.points}
        assert not any(flags.values())
        assert labels.pixel(ContactTag.LF).u < 0

    def test_bottom_vertices_use_full_extent(self, K):
        """Bottom vertices are contacts with ratios of one."""
        box = _box(yaw=0.4)
        vertices = bottom_vertex_labels(box, K)
        corners = box_corners(box)[:4]
        for tag, corner in zip((ContactTag.LF, ContactTag.RF, ContactTag.RR, ContactTag.LR), corners):
            expected = project(corner, K)
            assert vertices.pixel(tag).u == pytest.approx(expected.u)
            assert vertices.pixel(tag).v == pytest.approx(expected.v)


class TestTwoPointLabels:
    """Test cases for pedestrian and cyclist contacts."""

    def test_pedestrian_feet_symmetric(self, K):
        """Feet of a pedestrian straight ahead and facing sideways mirror about cu."""
        box = _box(yaw=math.pi / 2, l=0.8, w=0.6, h=1.7, category="Pedestrian")
        labels = pedestrian_cyclist_labels(box, K, foot_offset=0.15)
        left, right = labels.pixel(ContactTag.LEFT), labels.pixel(ContactTag.RIGHT)
        assert labels.category == Category.PEDESTRIAN
        assert left.u - K.cu == pytest.approx(-(right.u - K.cu))
        assert left.v == pytest.approx(right.v)

    def test_cyclist_wheels(self, K):
        """Cyclist wheels project to cu +/- fx * offset / z."""
        box = _box(l=1.76, w=0.6, h=1.7, category="Cyclist")
        labels = pedestrian_cyclist_labels(box, K, wheel_ratio=0.62 / 1.76)
        assert labels.pixel(ContactTag.FRONT).u == pytest.approx(K.cu + K.fx * 0.62 / 10.0)
        assert labels.pixel(ContactTag.REAR).u == pytest.approx(K.cu - K.fx * 0.62 / 10.0)

    def test_dispatch_by_category(self, K):
        """object_contact_labels picks the tag set of the box category."""
        assert len(object_contact_labels(_box(), K, RATIOS).points) == 4
        assert object_contact_labels(_box(category="Cyclist", l=1.76, w=0.6), K).category == Category.CYCLIST

    def test_car_needs_four_points(self, K):
        """Cars are not labeled with two points."""
        with pytest.raises(ValueError):
            pedestrian_cyclist_labels(_box(), K)


class TestHorizonPseudoLabel:
    """Test cases for horizon labels from box annotations."""

    def test_level_scene(self, K):
        """Boxes at camera height give the flat horizon."""
        boxes = [_box(x=-4, z=12), _box(x=3, z=20), _box(x=0, z=35), _box(x=6, z=50)]
        line = horizon_pseudo_label(boxes, K)
        assert line.k == pytest.approx(0.0, abs=1e-12)
        assert line.b == pytest.approx(K.cv)

    def test_tilted_scene(self, K):
        """Boxes sampled from a tilted plane give that plane's horizon."""
        plane = GroundPlane(a=0.01, b=-0.03, c=1.6)
        boxes = [_box(x=x, y=plane.y_at(x, z), z=z) for x, z in ((-5, 10), (4, 18), (1, 33), (-7, 47), (9, 60))]
        line = horizon_pseudo_label(boxes, K)
        expected = plane_to_horizon(plane, K)
        assert line.k == pytest.approx(expected.k, abs=1e-9)
        assert line.b == pytest.approx(expected.b, abs=1e-6)

    def test_too_few_boxes(self, K):
        """Two boxes cannot fix a horizon."""
        with pytest.raises(DegenerateInput):
            horizon_pseudo_label([_box(z=10), _box(x=2, z=20)], K)

    def test_label_plane(self, K):
        """The fitted plane is returned alongside its horizon."""
        plane = GroundPlane(a=-0.02, b=0.01, c=1.7)
        boxes = [_box(x=x, y=plane.y_at(x, z), z=z) for x, z in ((-5, 10), (4, 18), (1, 33), (-7, 47))]
        fitted = label_plane(boxes)
        assert (fitted.a, fitted.b, fitted.c) == (
            pytest.approx(-0.02, abs=1e-9),
            pytest.approx(0.01, abs=1e-9),
            pytest.approx(1.7, abs=1e-9),
        )
        assert horizon_pseudo_label(boxes, K) == plane_to_horizon(fitted, K)
        with pytest.raises(DegenerateInput):
            label_plane(boxes, min_boxes=5)


class TestBoxGeometry:
    """Test cases for corners and 2-D boxes."""

    def test_corner_layout(self):
        """Bottom corners sit at y = 1.65 and top corners h above."""
        corners = box_corners(_box(h=1.5))
        assert all(c.y == pytest.approx(1.65) for c in corners[:4])
        assert all(c.y == pytest.approx(0.15) for c in corners[4:])

    def test_bbox_contains_contacts(self, K):
        """The projected 2-D box contains every wheel contact."""
        box = _box(x=1.5, z=18.0, yaw=0.8)
        left, top, right, bottom = box_bbox2d(box, K)
        for point in contact_pixel_labels(box, RATIOS, K).points:
            assert left <= point.pixel.u <= right
            assert top <= point.pixel.v <= bottom


if __name__ == "__main__":
    pytest.main([__file__])
