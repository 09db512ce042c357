"""
Exception hierarchy for GroundPrior.

Everything derives from ValueError so callers that only know about bad input
can keep catching that.
"""
from typing import Optional


class GeometryError(ValueError):
    """Base class for geometric preconditions that do not hold."""


class NonPositiveDepth(GeometryError):
    """A point lies on or behind the image plane, or a depth is not positive."""


class NonPositiveHeight(GeometryError):
    """The camera height above the ground is not positive."""


class NonPositiveDimension(GeometryError):
    """An object length or width is not positive."""


class DegenerateInput(GeometryError):
    """Too few points, or points that do not pin down a unique fit."""


class ImplausiblePlane(GeometryError):
    """A ground plane too steep to be ground (|a| or |b| above the limit)."""


class AboveHorizon(GeometryError):
    """The pixel ray never meets the ground plane in front of the camera."""


class BehindCamera(GeometryError):
    """A generated contact point ends up behind the camera."""


class WrongArity(GeometryError):
    """The number of contact points does not match the object category."""


class DegenerateFront(GeometryError):
    """The front midpoint coincides with the bottom center in the BEV."""


class ImageTooSmall(GeometryError):
    """The image is smaller than the filter footprint."""


class EmptyInput(GeometryError):
    """An operation that needs at least one element got none."""


class DatasetError(ValueError):
    """Base class for malformed input files."""


class ParseError(DatasetError):
    """A text record could not be parsed.

    Attributes:
        line: 1-based line number of the offending record
        field: 1-based field index within the line, if known
    """

    def __init__(self, message: str, line: int, field: Optional[int] = None):
        self.line = line
        self.field = field
        location = f"line {line}" if field is None else f"line {line}, field {field}"
        super().__init__(f"{location}: {message}")


class MissingP2(DatasetError):
    """A calibration file without a P2 projection matrix."""


class UnsupportedFormat(DatasetError):
    """An image with an unknown magic number or maxval."""


class TruncatedPayload(DatasetError):
    """An image whose payload is shorter than its header announces."""


class TrailingGarbage(DatasetError):
    """Extra bytes after an image payload."""
