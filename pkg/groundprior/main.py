"""
Main FastAPI application for GroundPrior.
"""
import logging
from typing import Optional

import uvicorn
from fastapi import FastAPI, HTTPException, Request
from fastapi.middleware.cors import CORSMiddleware

from pipeline.frame_processor import FrameProcessor, HorizonMode

from . import __version__
from .config import get_settings
from .dataset_io import load_netpbm
from .edge_mining import fuse_horizon, mine_vertical_slope
from .errors import DatasetError, GeometryError
from .ground_plane import ego_pose, horizon_to_plane
from .models import ContactPointSet, ImageLine, WheelbaseRatios
from .pseudo_labels import horizon_pseudo_label, label_plane, object_contact_labels
from .schemas import (
    BoxesRequest,
    BoxesResponse,
    ContactLabelRequest,
    EdgeSlopeResponse,
    GroundPlaneRequest,
    GroundPlaneResponse,
    HorizonLabelRequest,
    HorizonLabelResponse,
)

logger = logging.getLogger(__name__)

# Initialize FastAPI app
app = FastAPI(
    title="GroundPrior API",
    description="Ground plane estimation, contact point pseudo labels and geometric 3D box deduction",
    version=__version__,
)

# Add CORS middleware
app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],  # For development; restrict in production
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)


@app.on_event("startup")
async def startup_event():
    settings = get_settings()
    logging.basicConfig(level=settings.log_level.upper())
    logger.info(f"GroundPrior API {__version__} started with camera height {settings.camera_height} m")


def _http_error(exc: Exception) -> HTTPException:
    """Map domain errors onto HTTP status codes."""
    if isinstance(exc, DatasetError):
        return HTTPException(status_code=400, detail=str(exc))
    return HTTPException(status_code=422, detail=str(exc))


# API Routes
@app.get("/")
async def root():
    """Root endpoint with API information."""
    return {
        "name": "GroundPrior API",
        "version": __version__,
        "status": "active",
        "docs_url": "/docs",
    }


@app.post("/ground-plane", response_model=GroundPlaneResponse)
async def ground_plane(request: GroundPlaneRequest):
    """Derive the ground plane and ego pose from a horizon line."""
    height = request.camera_height or get_settings().camera_height
    try:
        plane = horizon_to_plane(request.horizon, request.intrinsics, height)
    except GeometryError as e:
        raise _http_error(e)
    return GroundPlaneResponse(plane=plane, ego_pose=ego_pose(request.horizon, request.intrinsics))


@app.post("/horizon-pseudo-label", response_model=HorizonLabelResponse)
async def horizon_label(request: HorizonLabelRequest):
    """Fit a plane through the bottom centers of annotated boxes and return its horizon."""
    try:
        horizon = horizon_pseudo_label(request.boxes, request.intrinsics, min_boxes=request.min_boxes)
        plane = label_plane(request.boxes, min_boxes=request.min_boxes)
    except GeometryError as e:
        raise _http_error(e)
    return HorizonLabelResponse(horizon=horizon, plane=plane)


@app.post("/contact-labels", response_model=ContactPointSet)
async def contact_labels(request: ContactLabelRequest):
    """Project the ground contact points of one annotated box."""
    image_size = None
    if request.image_width and request.image_height:
        image_size = (request.image_width, request.image_height)
    settings = get_settings()
    ratios = request.ratios or WheelbaseRatios(k_l=settings.kl, k_w=settings.kw)
    try:
        return object_contact_labels(request.box, request.intrinsics, ratios, request.plane, image_size)
    except ValueError as e:
        raise _http_error(e)


@app.post("/boxes", response_model=BoxesResponse)
async def boxes(request: BoxesRequest):
    """Deduce 3D boxes for one frame of contact points."""
    processor = FrameProcessor(camera_height=request.camera_height)
    try:
        result = processor.process_frame(request.frame, request.intrinsics, mode=HorizonMode(request.mode))
    except ValueError as e:
        raise _http_error(e)
    return BoxesResponse(
        frame_id=result.frame_id,
        horizon=result.horizon,
        plane=result.plane,
        ego_pose=result.ego_pose,
        boxes=result.boxes,
        failures=result.failures,
    )


@app.post("/edge-slope", response_model=EdgeSlopeResponse)
async def edge_slope(request: Request, k: Optional[float] = None, b: Optional[float] = None):
    """Mine the vertical edge slope of a raw PGM/PPM body; fuse it with (k, b) if given."""
    data = await request.body()
    settings = get_settings()
    try:
        image = load_netpbm(data)
        mining = mine_vertical_slope(image, seed=settings.hough_seed, radius=settings.cluster_radius_deg)
    except ValueError as e:
        raise _http_error(e)
    fused = None
    if k is not None and b is not None:
        fused = fuse_horizon(mining, ImageLine(k=k, b=b))
    return EdgeSlopeResponse(mining=mining, fused_horizon=fused)


if __name__ == "__main__":
    uvicorn.run("groundprior.main:app", host="0.0.0.0", port=8000, reload=True)
