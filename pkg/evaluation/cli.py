"""
Command-line front end for GroundPrior.

Usage:
    python -m evaluation.cli <subcommand> [options]

Exit codes: 0 on success, 1 on usage errors, 2 on data errors. Logs go to
stderr so stdout stays machine-readable.
"""
import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional, Sequence

from pydantic import ValidationError

from groundprior.config import get_settings
from groundprior.dataset_io import (
    box_from_label,
    calib_from_intrinsics,
    emit_calib,
    emit_labels,
    emit_pseudo_labels,
    label_from_box,
    load_netpbm,
    parse_calib,
    parse_labels,
    parse_pseudo_labels,
)
from groundprior.edge_mining import fuse_horizon, mine_vertical_slope
from groundprior.errors import DatasetError, DegenerateInput, GeometryError
from groundprior.ground_plane import (
    ego_pose,
    fit_plane_lsq,
    flat_horizon,
    horizon_from_heatmap,
    horizon_to_plane,
    plane_to_horizon,
)
from groundprior.models import (
    Category,
    CameraIntrinsics,
    EdgeMiningResult,
    GrayImage,
    ImageLine,
    PseudoLabelFrame,
    SlopeKind,
    WheelbaseRatios,
)
from groundprior.pseudo_labels import horizon_pseudo_label, object_contact_labels
from pipeline.frame_processor import FrameProcessor, HorizonMode

from .runners.metrics import (
    depth_reports_from_rows,
    dim_reports_from_rows,
    eval_depth_buckets,
    eval_dim_errors,
    format_depth_rows,
    format_dim_rows,
    load_reference_rows,
)
from .runners.synth import DEFAULT_INTRINSICS, plane_from_pose, synth_scene
from .runners.tilt_sweep import format_sweep_rows, tilt_sweep

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2

SUBCOMMANDS = (
    "pseudo-labels",
    "estimate-plane",
    "edge-slope",
    "deduce-boxes",
    "eval-depth",
    "eval-dims",
    "tilt-sweep",
    "synth",
)


class UsageError(Exception):
    """Invalid combination of command-line options."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _floats(text: str) -> List[float]:
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _line(text: str) -> ImageLine:
    values = _floats(text)
    if len(values) != 2:
        raise argparse.ArgumentTypeError(f"expected 'k,b', got {text!r}")
    return ImageLine(k=values[0], b=values[1])


def _read_text(path: Optional[str]) -> str:
    if path is None or path == "-":
        return sys.stdin.read()
    return Path(path).read_text()


def _read_image(path: str) -> GrayImage:
    return load_netpbm(Path(path).read_bytes())


def _intrinsics(path: Optional[str]) -> CameraIntrinsics:
    if path is None:
        return DEFAULT_INTRINSICS
    return parse_calib(_read_text(path)).intrinsics


def _write(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(text)
        logger.info(f"wrote {out}")
    else:
        sys.stdout.write(text)


def _ratios(args) -> WheelbaseRatios:
    return WheelbaseRatios(k_l=args.kl, k_w=args.kw)


def _frame_id(path: Optional[str]) -> str:
    return Path(path).stem if path and path != "-" else "000000"


# Subcommands
def cmd_pseudo_labels(args) -> int:
    """Contact point and horizon pseudo labels from KITTI ground truth."""
    K = _intrinsics(args.calib)
    frame_id = args.frame_id or _frame_id(args.labels)
    records = parse_labels(_read_text(args.labels))
    known = {category.value for category in Category}
    image_size = tuple(int(v) for v in args.image_size) if args.image_size else None

    boxes = []
    for index, record in enumerate(records):
        if record.category not in known:
            logger.debug(f"skipping {record.category} record on line {index + 1}")
            continue
        box = box_from_label(record)
        if box.object_id is None:
            box = box.model_copy(update={"object_id": f"{frame_id}-{index:03d}"})
        boxes.append(box)

    objects = []
    for box in boxes:
        try:
            objects.append(object_contact_labels(box, K, _ratios(args), image_size=image_size))
        except GeometryError as e:
            logger.warning(f"frame {frame_id}: skipped {box.category} {box.object_id}: {e}")
    try:
        horizon = horizon_pseudo_label(boxes, K)
    except DegenerateInput:
        if not args.allow_flat_horizon:
            raise
        logger.warning(f"frame {frame_id}: {len(boxes)} boxes cannot fix a plane, using the flat horizon")
        horizon = flat_horizon(K)
    _write(emit_pseudo_labels([PseudoLabelFrame(frame_id=frame_id, objects=objects, horizon=horizon)]), args.out)
    return EXIT_OK


def cmd_estimate_plane(args) -> int:
    """Ground plane and ego pose as CSV a,b,c,roll,pitch,k_h,b_h."""
    K = _intrinsics(args.calib)
    H = args.camera_height
    sources = [s for s in (args.heatmap, args.labels) if s]
    if len(sources) > 1 or (sources and args.image):
        raise UsageError("use only one of --heatmap, --labels or --image")

    if args.labels:
        records = [r for r in parse_labels(_read_text(args.labels)) if r.category != "DontCare"]
        plane = fit_plane_lsq([box_from_label(r).bottom_center for r in records])
        horizon = plane_to_horizon(plane, K)
    else:
        if args.heatmap:
            heatmap = _read_image(args.heatmap).pixels / 255.0
            horizon = horizon_from_heatmap(heatmap, args.min_activation)
        elif args.image:
            mode = HorizonMode.FUSED if args.horizon else HorizonMode.ROLL_ONLY
            processor = FrameProcessor(camera_height=H)
            horizon, _ = processor.resolve_horizon(args.horizon, K, _read_image(args.image), mode)
        elif args.horizon:
            horizon = args.horizon
        else:
            raise UsageError("one of --horizon, --heatmap, --image or --labels is required")
        plane = horizon_to_plane(horizon, K, H)

    pose = ego_pose(horizon, K)
    values = [plane.a, plane.b, plane.c, pose.roll, pose.pitch, horizon.k, horizon.b]
    _write("a,b,c,roll,pitch,k_h,b_h\n" + ",".join(f"{v:.9g}" for v in values) + "\n", args.out)
    return EXIT_OK


def _describe(mining: EdgeMiningResult) -> str:
    if mining.kind == SlopeKind.ABSENT:
        return "absent"
    k_v = "inf" if mining.kind == SlopeKind.VERTICAL else f"{mining.k_v:.9g}"
    return f"k_v={k_v} n_v={mining.n_v} s_v={mining.s_v:.9g}"


def cmd_edge_slope(args) -> int:
    """Vertical edge slope of an image, optionally fused with a horizon."""
    settings = get_settings()
    seed = settings.hough_seed if args.seed is None else args.seed
    mining = mine_vertical_slope(_read_image(args.image), seed=seed, radius=settings.cluster_radius_deg)
    if mining.kind == SlopeKind.ABSENT:
        logger.info(f"edge slope absent: n_v={mining.n_v} s_v={mining.s_v}")
    text = _describe(mining) + "\n"
    if args.horizon:
        fused = fuse_horizon(mining, args.horizon)
        text += f"k_h={fused.k:.9g} b_h={fused.b:.9g}\n"
    _write(text, args.out)
    return EXIT_OK


def cmd_deduce_boxes(args) -> int:
    """KITTI label lines for every object of a pseudo-label file."""
    K = _intrinsics(args.calib)
    frames = parse_pseudo_labels(_read_text(args.contacts))
    processor = FrameProcessor(ratios=_ratios(args), camera_height=args.camera_height)
    images = None
    if args.image:
        image = _read_image(args.image)
        images = {frame.frame_id: image for frame in frames}
    summary = processor.process_frames(frames, K, images=images, horizon=args.horizon, mode=args.mode)

    records = []
    for result in summary["results"]:
        records += [label_from_box(box, K, result.plane) for box in result.boxes]
        for failure in result.failures:
            logger.warning(f"{result.frame_id}: {failure.object_id} not deduced: {failure.error}")
    _write(emit_labels(records), args.out)
    return EXIT_OK if not summary["failed_frames"] else EXIT_DATA


def cmd_eval_depth(args) -> int:
    """Bucketed depth errors as CSV."""
    report = eval_depth_buckets(
        parse_labels(_read_text(args.pred)), parse_labels(_read_text(args.gt)), method=args.method
    )
    reports = [report]
    if args.reference:
        reports += depth_reports_from_rows(load_reference_rows(args.reference))
    _write(format_depth_rows(reports), args.out)
    return EXIT_OK


def cmd_eval_dims(args) -> int:
    """Depth and dimension L1 errors as CSV."""
    report = eval_dim_errors(
        parse_labels(_read_text(args.pred)), parse_labels(_read_text(args.gt)), method=args.method
    )
    reports = [report]
    if args.reference:
        reports += dim_reports_from_rows(load_reference_rows(args.reference))
    _write(format_dim_rows(reports), args.out)
    return EXIT_OK


def cmd_tilt_sweep(args) -> int:
    """Fixed versus dynamic plane depth errors as CSV."""
    rows = tilt_sweep(args.pitches, args.depths, _intrinsics(args.calib), args.camera_height, skip_unobservable=True)
    _write(format_sweep_rows(rows), args.out)
    return EXIT_OK


def cmd_synth(args) -> int:
    """Synthetic frames: calib, ground-truth labels and contact pseudo labels."""
    K = _intrinsics(args.calib)
    plane = plane_from_pose(args.roll, args.pitch, args.camera_height)
    categories = [part.strip() for part in args.categories.split(",") if part.strip()]
    scenes = [
        synth_scene(
            args.seed + index,
            args.objects,
            plane,
            K,
            noise=args.noise,
            frame_id=f"{index:06d}",
            categories=categories,
            ratios=_ratios(args),
        )
        for index in range(args.frames)
    ]
    contacts = emit_pseudo_labels([scene.contacts for scene in scenes])
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        calib = parse_calib(_read_text(args.calib)) if args.calib else calib_from_intrinsics(K)
        (out / "calib.txt").write_text(emit_calib(calib))
        (out / "labels.txt").write_text(emit_labels([label for scene in scenes for label in scene.labels]))
        (out / "contacts.txt").write_text(contacts)
        logger.info(f"wrote {len(scenes)} frames to {out}")
    sys.stdout.write(contacts)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    """Argument parser with one subparser per subcommand."""
    settings = get_settings()
    parser = _Parser(prog="groundprior", description="Ground-plane geometry for monocular 3D detection")
    parser.add_argument("--log-level", default=settings.log_level, help="Logging level (default: %(default)s)")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, calib_required=False):
        p.add_argument("--calib", required=calib_required, help="KITTI calibration file (P2 is used)")
        p.add_argument("--camera-height", type=float, default=settings.camera_height, help="Camera height in meters")
        p.add_argument("--kl", type=float, default=settings.kl, help="Front-rear wheel spacing over length")
        p.add_argument("--kw", type=float, default=settings.kw, help="Left-right wheel spacing over width")
        p.add_argument("--out", help="Output path (stdout if omitted)")

    p = sub.add_parser("pseudo-labels", help="Contact and horizon pseudo labels from KITTI labels")
    common(p, calib_required=True)
    p.add_argument("--labels", required=True, help="KITTI label file of one frame")
    p.add_argument("--frame-id", help="Frame id (default: label file name)")
    p.add_argument("--image-size", type=_floats, help="'width,height' to flag out-of-image contacts")
    p.add_argument("--allow-flat-horizon", action="store_true", help="Use the flat horizon when fewer than 3 boxes")
    p.set_defaults(handler=cmd_pseudo_labels)

    p = sub.add_parser("estimate-plane", help="Ground plane from a horizon, heatmap, image or labels")
    common(p, calib_required=True)
    p.add_argument("--horizon", type=_line, help="Horizon line 'k,b'")
    p.add_argument("--heatmap", help="PGM horizon heatmap")
    p.add_argument("--min-activation", type=float, default=0.5, help="Heatmap column threshold in [0, 1]")
    p.add_argument("--image", help="PGM/PPM scene image for vertical edge fusion")
    p.add_argument("--labels", help="KITTI labels whose bottom centers fix the plane")
    p.set_defaults(handler=cmd_estimate_plane)

    p = sub.add_parser("edge-slope", help="Vertical edge slope mining on an image")
    p.add_argument("--image", required=True, help="PGM/PPM image")
    p.add_argument("--horizon", type=_line, help="Horizon line 'k,b' to fuse with")
    p.add_argument("--seed", type=int, help="Hough visiting-order seed")
    p.add_argument("--out", help="Output path (stdout if omitted)")
    p.set_defaults(handler=cmd_edge_slope)

    p = sub.add_parser("deduce-boxes", help="3D boxes from contact point labels")
    common(p, calib_required=True)
    p.add_argument("--contacts", default="-", help="Pseudo-label file ('-' for stdin)")
    p.add_argument("--horizon", type=_line, help="Horizon override 'k,b'")
    p.add_argument("--image", help="Scene image for the fused and roll_only modes")
    p.add_argument(
        "--mode", choices=[mode.value for mode in HorizonMode], default=HorizonMode.NETWORK.value, help="Horizon source"
    )
    p.set_defaults(handler=cmd_deduce_boxes)

    for name, handler, text in (
        ("eval-depth", cmd_eval_depth, "Depth error per ground-truth depth bucket"),
        ("eval-dims", cmd_eval_dims, "Depth and dimension L1 errors"),
    ):
        p = sub.add_parser(name, help=text)
        p.add_argument("--pred", required=True, help="Predicted KITTI labels with id= tokens")
        p.add_argument("--gt", "--labels", dest="gt", required=True, help="Ground-truth KITTI labels with id= tokens")
        p.add_argument("--method", default="GroundPrior", help="Row label")
        p.add_argument("--reference", help="CSV of published rows to append")
        p.add_argument("--out", help="Output path (stdout if omitted)")
        p.set_defaults(handler=handler)

    p = sub.add_parser("tilt-sweep", help="Fixed versus dynamic plane depth drift")
    common(p)
    p.add_argument("--pitches", type=_floats, default=[-4.0, -2.0, 0.0, 2.0, 4.0], help="Pitches in degrees")
    p.add_argument("--depths", type=_floats, default=[10.0, 20.0, 40.0, 60.0, 80.0], help="Depths in meters")
    p.set_defaults(handler=cmd_tilt_sweep)

    p = sub.add_parser("synth", help="Synthetic frames with exact ground truth")
    common(p)
    p.add_argument("--seed", type=int, default=0, help="Random seed")
    p.add_argument("--frames", type=int, default=1, help="Number of frames")
    p.add_argument("--objects", type=int, default=8, help="Objects per frame")
    p.add_argument("--roll", type=float, default=0.0, help="Ground roll in degrees")
    p.add_argument("--pitch", type=float, default=0.0, help="Ground pitch in degrees")
    p.add_argument("--noise", type=float, default=0.0, help="Contact pixel noise std")
    p.add_argument("--categories", default="Car", help="Comma-separated categories")
    p.set_defaults(handler=cmd_synth)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Run one subcommand and return its exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE

    logging.basicConfig(
        level=args.log_level.upper(),
        stream=sys.stderr,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.handler(args)
    except UsageError as e:
        parser.print_usage(sys.stderr)
        logger.error(f"{args.command}: {e}")
        return EXIT_USAGE
    except (GeometryError, DatasetError, ValidationError, ValueError, OSError) as e:
        logger.error(f"{args.command}: {e}")
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
