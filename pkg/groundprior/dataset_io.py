"""
KITTI-style label and calibration files, Netpbm images and the pseudo-label format.

Label and calibration numbers are written with repr(), the shortest decimal
that reads back to the same float. Pixel coordinates in pseudo-label files
use 6 decimals.

KITTI's location is the center of the bottom face of the box, which is the
same anchor as ObjectBox3D.bottom_center; no half-height shift is applied.
"""
import logging
import math
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import ValidationError

from .edge_mining import to_gray
from .errors import MissingP2, ParseError, TrailingGarbage, TruncatedPayload, UnsupportedFormat
from .models import (
    CalibRecord,
    CameraIntrinsics,
    CameraPoint,
    Category,
    ContactPoint,
    ContactPointSet,
    ContactTag,
    GrayImage,
    GroundPlane,
    ImageLine,
    LabelRecord,
    ObjectBox3D,
    Pixel,
    PseudoLabelFrame,
    wrap_angle,
)
from .pseudo_labels import box_bbox2d

logger = logging.getLogger(__name__)

LABEL_FIELDS = 15
HORIZON_TAG = "HL"


def _float(token: str, line: int, field: int) -> float:
    try:
        return float(token)
    except ValueError:
        raise ParseError(f"expected a number, got {token!r}", line, field) from None


def _fmt(value: float) -> str:
    return repr(float(value))


def _first_error(exc: ValidationError) -> str:
    error = exc.errors()[0]
    return error.get("msg", str(exc))


# KITTI labels
def parse_labels(text: str) -> List[LabelRecord]:
    """
    Parse a KITTI label file.

    Each non-blank line holds 15 fields, an optional 16th score field and an
    optional trailing id=<object_id> token. Unknown categories are kept.

    Args:
        text: File contents

    Returns:
        LabelRecords in file order
    """
    records = []
    for number, raw in enumerate(text.splitlines(), start=1):
        tokens = raw.split()
        if not tokens:
            continue
        object_id = None
        if tokens[-1].startswith("id="):
            object_id = tokens.pop()[3:]
            if not object_id:
                raise ParseError("empty object id", number, len(tokens) + 1)
        if len(tokens) < LABEL_FIELDS:
            raise ParseError(f"expected {LABEL_FIELDS} fields, got {len(tokens)}", number, len(tokens) + 1)
        if len(tokens) > LABEL_FIELDS + 1:
            raise ParseError("unexpected trailing field", number, LABEL_FIELDS + 2)

        values = [_float(token, number, index) for index, token in enumerate(tokens[1:], start=2)]
        try:
            occluded = int(tokens[2])
        except ValueError:
            raise ParseError(f"occlusion must be an integer, got {tokens[2]!r}", number, 3) from None
        try:
            records.append(
                LabelRecord(
                    category=tokens[0],
                    truncated=values[0],
                    occluded=occluded,
                    alpha=values[2],
                    bbox2d=tuple(values[3:7]),
                    dims=tuple(values[7:10]),
                    location=tuple(values[10:13]),
                    rotation_y=values[13],
                    score=values[14] if len(values) > 14 else None,
                    object_id=object_id,
                )
            )
        except ValidationError as exc:
            raise ParseError(_first_error(exc), number) from None
    return records


def emit_labels(records: Iterable[LabelRecord]) -> str:
    """Serialize label records, one line each."""
    lines = []
    for record in records:
        fields = [record.category, _fmt(record.truncated), str(record.occluded), _fmt(record.alpha)]
        fields += [_fmt(value) for value in record.bbox2d]
        fields += [_fmt(value) for value in record.dims]
        fields += [_fmt(value) for value in record.location]
        fields.append(_fmt(record.rotation_y))
        if record.score is not None:
            fields.append(_fmt(record.score))
        if record.object_id is not None:
            fields.append(f"id={record.object_id}")
        lines.append(" ".join(fields))
    return "".join(line + "\n" for line in lines)


def label_from_box(
    box: ObjectBox3D,
    K: CameraIntrinsics,
    plane: Optional[GroundPlane] = None,
    truncated: float = 0.0,
    occluded: int = 0,
) -> LabelRecord:
    """Build a KITTI record for a box, including its projected 2-D box.

    KITTI measures rotation_y the other way round from our yaw: its R_y sends
    the local +X axis to (cos ry, 0, -sin ry).
    """
    center = box.bottom_center
    rotation_y = wrap_angle(-box.yaw)
    return LabelRecord(
        category=box.category,
        truncated=truncated,
        occluded=occluded,
        alpha=wrap_angle(rotation_y - math.atan2(center.x, center.z)),
        bbox2d=box_bbox2d(box, K, plane),
        dims=(box.h, box.w, box.l),
        location=(center.x, center.y, center.z),
        rotation_y=rotation_y,
        score=box.score,
        object_id=box.object_id,
    )


def box_from_label(record: LabelRecord) -> ObjectBox3D:
    """Turn a KITTI record back into a box; DontCare records are rejected."""
    if record.category == "DontCare":
        raise ValueError("DontCare records have no 3D box")
    h, w, l = record.dims
    return ObjectBox3D(
        bottom_center=CameraPoint(x=record.location[0], y=record.location[1], z=record.location[2]),
        l=l,
        w=w,
        h=h,
        yaw=wrap_angle(-record.rotation_y),
        category=record.category,
        object_id=record.object_id,
        score=record.score,
    )


# Calibration
def parse_calib(text: str) -> CalibRecord:
    """
    Parse a KITTI calibration file.

    Every non-blank line is "<name>: <numbers>". Only P2 is interpreted;
    other entries are kept so the file can be written back.

    Args:
        text: File contents

    Returns:
        CalibRecord with entries in file order
    """
    entries: Dict[str, Tuple[float, ...]] = {}
    p2_line = 0
    for number, raw in enumerate(text.splitlines(), start=1):
        if not raw.strip():
            continue
        name, sep, rest = raw.partition(":")
        name = name.strip()
        if not sep or not name or " " in name:
            raise ParseError("expected '<name>: <values>'", number, 1)
        if name in entries:
            raise ParseError(f"duplicate entry {name}", number, 1)
        entries[name] = tuple(_float(token, number, index) for index, token in enumerate(rest.split(), start=2))
        if name == "P2":
            p2_line = number

    if "P2" not in entries:
        raise MissingP2("calibration has no P2 entry")
    p2 = entries["P2"]
    if len(p2) != 12:
        raise ParseError(f"P2 needs 12 values, got {len(p2)}", p2_line, min(len(p2), 12) + 2)
    try:
        return CalibRecord(entries=entries)
    except ValidationError as exc:
        raise ParseError(_first_error(exc), p2_line) from None


def emit_calib(record: CalibRecord) -> str:
    """Serialize a calibration record in entry order."""
    return "".join(
        f"{name}: " + " ".join(_fmt(value) for value in values) + "\n" for name, values in record.entries.items()
    )


def calib_from_intrinsics(K: CameraIntrinsics) -> CalibRecord:
    """Minimal calibration whose P2 carries the given intrinsics."""
    p2 = (K.fx, 0.0, K.cu, 0.0, 0.0, K.fy, K.cv, 0.0, 0.0, 0.0, 1.0, 0.0)
    return CalibRecord(entries={"P2": p2})


# Pseudo labels
def _object_line(frame_id: str, cps: ContactPointSet) -> str:
    fields = [frame_id, cps.category.value, str(len(cps.points))]
    for point in cps.points:
        fields += [point.tag.value, f"{point.pixel.u:.6f}", f"{point.pixel.v:.6f}"]
    fields.append(f"h2d={cps.h2d:.6f}")
    if cps.object_id is not None:
        fields.append(f"id={cps.object_id}")
    outside = [point.tag.value for point in cps.points if not point.in_image]
    if outside:
        fields.append("out=" + ",".join(outside))
    return " ".join(fields)


def emit_pseudo_labels(frames: Sequence[PseudoLabelFrame]) -> str:
    """
    Serialize contact and horizon pseudo labels.

    Each object becomes one line; each frame is closed by its HL line.
    """
    lines = []
    for frame in frames:
        lines += [_object_line(frame.frame_id, cps) for cps in frame.objects]
        lines.append(f"{frame.frame_id} {HORIZON_TAG} {_fmt(frame.horizon.k)} {_fmt(frame.horizon.b)}")
    return "".join(line + "\n" for line in lines)


def _parse_object(tokens: List[str], number: int) -> ContactPointSet:
    try:
        category = Category(tokens[1])
    except ValueError:
        raise ParseError(f"unknown category {tokens[1]!r}", number, 2) from None
    if len(tokens) < 3:
        raise ParseError("missing contact count", number, 3)
    try:
        count = int(tokens[2])
    except ValueError:
        raise ParseError(f"contact count must be an integer, got {tokens[2]!r}", number, 3) from None
    end = 3 + 3 * count
    if count < 0 or len(tokens) < end:
        raise ParseError(f"expected {count} contact triplets", number, len(tokens) + 1)

    triplets = []
    for i in range(count):
        field = 4 + 3 * i
        try:
            tag = ContactTag(tokens[field - 1])
        except ValueError:
            raise ParseError(f"unknown contact tag {tokens[field - 1]!r}", number, field) from None
        u = _float(tokens[field], number, field + 1)
        v = _float(tokens[field + 1], number, field + 2)
        triplets.append((tag, u, v))

    h2d: Optional[float] = None
    object_id: Optional[str] = None
    outside: List[str] = []
    for field, token in enumerate(tokens[end:], start=end + 1):
        key, sep, value = token.partition("=")
        if not sep:
            raise ParseError(f"unexpected trailing field {token!r}", number, field)
        if key == "h2d" and h2d is None:
            h2d = _float(value, number, field)
        elif key == "id" and object_id is None and value:
            object_id = value
        elif key == "out" and not outside and value:
            outside = value.split(",")
        else:
            raise ParseError(f"unexpected trailing field {token!r}", number, field)
    if h2d is None:
        raise ParseError("missing h2d", number, end + 1)

    try:
        return ContactPointSet(
            category=category,
            points=[
                ContactPoint(tag=tag, pixel=Pixel(u=u, v=v), in_image=tag.value not in outside)
                for tag, u, v in triplets
            ],
            h2d=h2d,
            object_id=object_id,
        )
    except ValidationError as exc:
        raise ParseError(_first_error(exc), number) from None


def parse_pseudo_labels(text: str) -> List[PseudoLabelFrame]:
    """
    Parse a pseudo-label file written by emit_pseudo_labels.

    Returns:
        Frames in file order
    """
    frames: List[PseudoLabelFrame] = []
    open_id: Optional[str] = None
    pending: List[ContactPointSet] = []
    last = 0
    for number, raw in enumerate(text.splitlines(), start=1):
        tokens = raw.split()
        if not tokens:
            continue
        last = number
        frame_id = tokens[0]
        if open_id is not None and frame_id != open_id:
            raise ParseError(f"frame {open_id} is not closed by an {HORIZON_TAG} line", number, 1)
        if len(tokens) < 2:
            raise ParseError("missing record type", number, 2)
        if tokens[1] == HORIZON_TAG:
            if len(tokens) != 4:
                raise ParseError(f"{HORIZON_TAG} line needs exactly k and b", number, min(len(tokens), 4) + 1)
            horizon = ImageLine(k=_float(tokens[2], number, 3), b=_float(tokens[3], number, 4))
            frames.append(PseudoLabelFrame(frame_id=frame_id, objects=pending, horizon=horizon))
            open_id, pending = None, []
            continue
        open_id = frame_id
        pending.append(_parse_object(tokens, number))
    if open_id is not None:
        raise ParseError(f"frame {open_id} is not closed by an {HORIZON_TAG} line", last)
    return frames


# Netpbm
_WHITESPACE = b" \t\n\r\v\f"


def _header_token(data: bytes, pos: int) -> Tuple[bytes, int]:
    while pos < len(data):
        if data[pos:pos + 1] == b"#":
            while pos < len(data) and data[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
        elif data[pos] in _WHITESPACE:
            pos += 1
        else:
            break
    start = pos
    while pos < len(data) and data[pos] not in _WHITESPACE and data[pos:pos + 1] != b"#":
        pos += 1
    return data[start:pos], pos


def load_netpbm(data: bytes) -> GrayImage:
    """
    Decode a binary PGM (P5) or PPM (P6) image with maxval 255.

    P6 input is converted to gray with the luma weights.
    """
    magic = data[:2]
    if magic not in (b"P5", b"P6"):
        raise UnsupportedFormat(f"unsupported magic {magic!r}; expected P5 or P6")
    pos = 2
    values = []
    for name in ("width", "height", "maxval"):
        token, pos = _header_token(data, pos)
        if not token.isdigit():
            raise UnsupportedFormat(f"malformed {name} {token!r} in header")
        values.append(int(token))
    width, height, maxval = values
    if width < 1 or height < 1:
        raise UnsupportedFormat(f"image size {width}x{height} is empty")
    if maxval != 255:
        raise UnsupportedFormat(f"maxval {maxval} is not supported; expected 255")
    if pos >= len(data) or data[pos] not in _WHITESPACE:
        raise TruncatedPayload("header is not followed by a whitespace byte")
    pos += 1

    channels = 1 if magic == b"P5" else 3
    expected = width * height * channels
    payload = data[pos:]
    if len(payload) < expected:
        raise TruncatedPayload(f"payload has {len(payload)} bytes, header announces {expected}")
    if len(payload) > expected:
        raise TrailingGarbage(f"{len(payload) - expected} bytes after the payload")
    pixels = np.frombuffer(payload, dtype=np.uint8)
    if channels == 1:
        return GrayImage(pixels=pixels.reshape(height, width))
    return to_gray(pixels.reshape(height, width, 3))


def emit_netpbm(image: GrayImage) -> bytes:
    """Encode a grayscale image as binary PGM (P5)."""
    header = f"P5\n{image.width} {image.height}\n255\n".encode("ascii")
    return header + image.pixels.tobytes()
