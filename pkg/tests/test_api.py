"""
Tests for the GroundPrior HTTP API.
"""
import math

import pytest
from fastapi.testclient import TestClient

from evaluation.runners.synth import plane_from_pose, render_bar_image, synth_scene
from groundprior.dataset_io import emit_netpbm
from groundprior.main import app
from groundprior.models import CameraIntrinsics, ObjectBox3D
from groundprior.pseudo_labels import horizon_pseudo_label

client = TestClient(app)

INTRINSICS = {"fx": 700.0, "fy": 700.0, "cu": 600.0, "cv": 180.0}
CAR = {
    "bottom_center": {"x": 0.0, "y": 1.65, "z": 10.0},
    "l": 4.0,
    "w": 1.6,
    "h": 1.5,
    "yaw": 0.0,
    "category": "Car",
    "object_id": "000000-000",
}


class TestAPI:
    """Test cases for the GroundPrior API."""

    def test_root_endpoint(self):
        """Test the root endpoint."""
        response = client.get("/")
        assert response.status_code == 200
        data = response.json()
        assert data["name"] == "GroundPrior API"
        assert data["status"] == "active"
        assert data["docs_url"] == "/docs"

    def test_ground_plane(self):
        """Test deriving the plane from a horizon line."""
        response = client.post(
            "/ground-plane",
            json={"intrinsics": INTRINSICS, "horizon": {"k": 0.01, "b": 150.0}, "camera_height": 1.65},
        )
        assert response.status_code == 200
        data = response.json()
        assert data["plane"]["a"] == pytest.approx(0.01)
        assert data["plane"]["b"] == pytest.approx(-24.0 / 700.0)
        assert data["plane"]["c"] == 1.65
        assert data["ego_pose"]["roll"] == pytest.approx(math.atan(0.01))

    def test_ground_plane_default_height(self):
        """Test that the configured camera height is used when omitted."""
        response = client.post("/ground-plane", json={"intrinsics": INTRINSICS, "horizon": {"k": 0.0, "b": 180.0}})
        assert response.status_code == 200
        assert response.json()["plane"]["c"] == 1.65

    def test_ground_plane_implausible(self):
        """Test that a wall-like horizon is rejected."""
        response = client.post("/ground-plane", json={"intrinsics": INTRINSICS, "horizon": {"k": 50.0, "b": 0.0}})
        assert response.status_code == 422

    def test_ground_plane_missing_fields(self):
        """Test a request without the horizon."""
        response = client.post("/ground-plane", json={"intrinsics": INTRINSICS})
        assert response.status_code == 422

    def test_horizon_pseudo_label(self):
        """Test the horizon label of a level scene."""
        boxes = [dict(CAR, bottom_center={"x": x, "y": 1.65, "z": z}) for x, z in ((-3, 10), (2, 20), (5, 45))]
        response = client.post("/horizon-pseudo-label", json={"intrinsics": INTRINSICS, "boxes": boxes})
        assert response.status_code == 200
        data = response.json()
        assert data["horizon"]["k"] == pytest.approx(0.0, abs=1e-9)
        assert data["horizon"]["b"] == pytest.approx(180.0)

    def test_horizon_pseudo_label_too_few_boxes(self):
        """Test that two boxes cannot fix a horizon."""
        response = client.post("/horizon-pseudo-label", json={"intrinsics": INTRINSICS, "boxes": [CAR, CAR]})
        assert response.status_code == 422

    def test_horizon_pseudo_label_matches_library(self):
        """Test that a tilted scene gets the library horizon and a consistent plane."""
        points = ((-3.0, 10.0), (2.0, 20.0), (5.0, 45.0), (-6.0, 30.0))
        boxes = [dict(CAR, bottom_center={"x": x, "y": 0.01 * x - 0.03 * z + 1.65, "z": z}) for x, z in points]
        response = client.post("/horizon-pseudo-label", json={"intrinsics": INTRINSICS, "boxes": boxes})
        assert response.status_code == 200
        data = response.json()
        K = CameraIntrinsics(**INTRINSICS)
        expected = horizon_pseudo_label([ObjectBox3D(**box) for box in boxes], K)
        assert data["horizon"]["k"] == pytest.approx(expected.k, abs=1e-12)
        assert data["horizon"]["b"] == pytest.approx(expected.b, abs=1e-9)
        assert data["plane"]["a"] == pytest.approx(0.01, abs=1e-9)
        assert data["plane"]["b"] == pytest.approx(-0.03, abs=1e-9)
        assert data["plane"]["c"] == pytest.approx(1.65, abs=1e-9)

    def test_horizon_pseudo_label_min_boxes(self):
        """Test that the requested minimum box count is enforced."""
        boxes = [dict(CAR, bottom_center={"x": x, "y": 1.65, "z": z}) for x, z in ((-3, 10), (2, 20), (5, 45))]
        response = client.post(
            "/horizon-pseudo-label", json={"intrinsics": INTRINSICS, "boxes": boxes, "min_boxes": 4}
        )
        assert response.status_code == 422

    def test_contact_labels(self):
        """Test projecting the wheel contacts of a car."""
        response = client.post("/contact-labels", json={"intrinsics": INTRINSICS, "box": CAR})
        assert response.status_code == 200
        data = response.json()
        assert data["category"] == "Car"
        assert [p["tag"] for p in data["points"]] == ["LF", "RF", "RR", "LR"]
        assert data["points"][0]["pixel"]["u"] == pytest.approx(691.418, abs=1e-3)
        assert data["h2d"] == pytest.approx(105.0)

    def test_boxes(self):
        """Test deducing the boxes of a synthetic frame."""
        scene = synth_scene(3, 4, plane_from_pose(0.5, 1.0, 1.65))
        response = client.post(
            "/boxes",
            json={"intrinsics": INTRINSICS, "frame": scene.contacts.model_dump(mode="json"), "camera_height": 1.65},
        )
        assert response.status_code == 200
        data = response.json()
        assert data["frame_id"] == "000000"
        assert len(data["boxes"]) == 4
        assert data["failures"] == []
        for truth, box in zip(scene.boxes, data["boxes"]):
            assert box["bottom_center"]["z"] == pytest.approx(truth.bottom_center.z, abs=1e-5)

    def test_boxes_invalid_mode(self):
        """Test that unknown horizon modes are rejected."""
        frame = {"frame_id": "a", "objects": [], "horizon": {"k": 0.0, "b": 180.0}}
        response = client.post("/boxes", json={"intrinsics": INTRINSICS, "frame": frame, "mode": "magic"})
        assert response.status_code == 422

    def test_edge_slope(self):
        """Test mining a PGM body and fusing with a horizon."""
        body = emit_netpbm(render_bar_image(angle_deg=90.0))
        response = client.post("/edge-slope?k=0.02&b=150", content=body)
        assert response.status_code == 200
        data = response.json()
        assert data["mining"]["kind"] == "vertical"
        assert data["fused_horizon"] == {"k": 0.0, "b": 150.0}

    def test_edge_slope_bad_image(self):
        """Test that a body that is not PGM/PPM is a bad request."""
        response = client.post("/edge-slope", content=b"P4\n1 1\n\x00")
        assert response.status_code == 400


if __name__ == "__main__":
    pytest.main([__file__])
