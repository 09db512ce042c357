"""
Per-frame orchestrator for GroundPrior.

This module ties horizon resolution, ground plane derivation and box
deduction together for one frame at a time.
"""
import logging
from datetime import datetime
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Tuple

from groundprior.box_deduction import deduce_box
from groundprior.config import Settings, get_settings
from groundprior.edge_mining import fuse_horizon, mine_vertical_slope, roll_only_horizon
from groundprior.errors import DatasetError, GeometryError
from groundprior.ground_plane import ego_pose, flat_horizon, horizon_to_plane
from groundprior.models import (
    CameraIntrinsics,
    EdgeMiningResult,
    FrameResult,
    GrayImage,
    ImageLine,
    ObjectFailure,
    PseudoLabelFrame,
    RefinementBias,
    WheelbaseRatios,
)

logger = logging.getLogger(__name__)


class HorizonMode(str, Enum):
    """Where the frame's horizon line comes from."""

    NETWORK = "network"
    FUSED = "fused"
    ROLL_ONLY = "roll_only"
    FIXED = "fixed"


class FrameProcessor:
    """
    Runs the geometric pipeline on frames of contact point labels.

    For every frame it:
    1. Resolves the horizon line (as given, fused with mined vertical edges,
       roll only, or the fixed flat horizon)
    2. Derives the ground plane and the ego pose
    3. Deduces a 3D box per object, recording failures instead of aborting
    """

    def __init__(
        self,
        settings: Optional[Settings] = None,
        ratios: Optional[WheelbaseRatios] = None,
        camera_height: Optional[float] = None,
    ):
        self.settings = settings or get_settings()
        self.ratios = ratios or WheelbaseRatios(k_l=self.settings.kl, k_w=self.settings.kw)
        self.camera_height = self.settings.camera_height if camera_height is None else camera_height
        logger.info(
            f"Frame processor ready: H={self.camera_height} k_l={self.ratios.k_l} k_w={self.ratios.k_w}"
        )

    def _mine(self, image: Optional[GrayImage], mode: HorizonMode) -> EdgeMiningResult:
        if image is None:
            raise ValueError(f"horizon mode '{mode.value}' needs an image")
        return mine_vertical_slope(
            image, seed=self.settings.hough_seed, radius=self.settings.cluster_radius_deg
        )

    def resolve_horizon(
        self,
        nn_line: Optional[ImageLine],
        K: CameraIntrinsics,
        image: Optional[GrayImage] = None,
        mode: HorizonMode = HorizonMode.NETWORK,
    ) -> Tuple[ImageLine, Optional[EdgeMiningResult]]:
        """
        Pick the horizon line for a frame.

        Args:
            nn_line: Horizon candidate from the labels or a detector
            K: Camera intrinsics
            image: Scene image, needed by the fused and roll_only modes
            mode: Horizon source

        Returns:
            (horizon line, mining result or None)
        """
        mode = HorizonMode(mode)
        if mode == HorizonMode.FIXED:
            return flat_horizon(K), None
        if mode == HorizonMode.ROLL_ONLY:
            mining = self._mine(image, mode)
            return roll_only_horizon(mining, K), mining
        if nn_line is None:
            raise ValueError(f"horizon mode '{mode.value}' needs a horizon line")
        if mode == HorizonMode.NETWORK:
            return nn_line, None
        mining = self._mine(image, mode)
        fused = fuse_horizon(mining, nn_line)
        logger.info(f"Fused horizon: k {nn_line.k:.6g} -> {fused.k:.6g}, b={fused.b:.6g}")
        return fused, mining

    def process_frame(
        self,
        frame: PseudoLabelFrame,
        K: CameraIntrinsics,
        image: Optional[GrayImage] = None,
        horizon: Optional[ImageLine] = None,
        mode: HorizonMode = HorizonMode.NETWORK,
        biases: Optional[Dict[str, RefinementBias]] = None,
    ) -> FrameResult:
        """
        Deduce every object of a frame.

        Args:
            frame: Contact point labels and the frame's own horizon
            K: Camera intrinsics
            image: Scene image for edge-based horizon modes
            horizon: Horizon override; the frame's HL line is used otherwise
            mode: Horizon source
            biases: Optional refinement per object id

        Returns:
            FrameResult with boxes and per-object failures
        """
        nn_line = horizon if horizon is not None else frame.horizon
        line, mining = self.resolve_horizon(nn_line, K, image, mode)
        plane = horizon_to_plane(line, K, self.camera_height)
        pose = ego_pose(line, K)

        boxes = []
        failures = []
        for cps in frame.objects:
            bias = (biases or {}).get(cps.object_id) if cps.object_id else None
            try:
                boxes.append(
                    deduce_box(cps, line, K, self.camera_height, self.ratios, bias=bias, settings=self.settings)
                )
            except GeometryError as e:
                logger.warning(f"Frame {frame.frame_id}: skipped {cps.category.value} {cps.object_id}: {e}")
                failures.append(ObjectFailure(object_id=cps.object_id, category=cps.category.value, error=str(e)))

        logger.info(
            f"Frame {frame.frame_id}: {len(boxes)} boxes, {len(failures)} failures, mode={HorizonMode(mode).value}"
        )
        return FrameResult(
            frame_id=frame.frame_id,
            horizon=line,
            plane=plane,
            ego_pose=pose,
            mining=mining,
            boxes=boxes,
            failures=failures,
            processed_at=datetime.now().isoformat(),
        )

    def process_frames(
        self,
        frames: Sequence[PseudoLabelFrame],
        K: CameraIntrinsics,
        images: Optional[Dict[str, GrayImage]] = None,
        horizon: Optional[ImageLine] = None,
        mode: HorizonMode = HorizonMode.NETWORK,
    ) -> Dict[str, Any]:
        """
        Process several frames; a frame that fails as a whole is reported, not raised.

        Returns:
            Dictionary with the successful results and the failed frames
        """
        results: List[FrameResult] = []
        failed: List[Dict[str, Any]] = []
        for frame in frames:
            image = (images or {}).get(frame.frame_id)
            try:
                results.append(self.process_frame(frame, K, image=image, horizon=horizon, mode=mode))
            except (GeometryError, DatasetError, ValueError) as e:
                logger.error(f"Frame {frame.frame_id} failed: {e}")
                failed.append({"frame_id": frame.frame_id, "error": str(e), "status": "failed"})
        return {
            "results": results,
            "failed_frames": failed,
            "status": "success" if not failed else "partial",
            "processed_at": datetime.now().isoformat(),
        }
