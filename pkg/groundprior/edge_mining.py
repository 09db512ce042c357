"""
Unsupervised vertical edge slope mining.

Man-made structure (poles, building edges, door frames) is vertical in the
world, so in a rolled camera its image edges tilt by the roll angle. The
mining pipeline is blur -> Canny -> probabilistic Hough -> keep near-vertical
segments -> cluster their inclinations, and the horizon slope follows as the
perpendicular of the dominant vertical direction.

Angles are inclinations from the u-axis in [0, 180) degrees with v pointing
down, so vertical is 90 and slope k = tan(angle).
"""
import logging
import math
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import ndimage

from .config import (
    BLUR_KSIZE,
    BLUR_SIGMA,
    CANNY_HIGH,
    CANNY_LOW,
    HOUGH_MAX_LINE_GAP,
    HOUGH_MIN_LINE_LENGTH,
    HOUGH_RHO,
    HOUGH_THETA_DEG,
    HOUGH_THRESHOLD,
    MAX_ANGLE_STD_DEG,
    MIN_VERTICAL_EDGES,
    VERTICAL_MAX_DEG,
    VERTICAL_MIN_DEG,
)
from .errors import EmptyInput, ImageTooSmall
from .models import (
    CameraIntrinsics,
    EdgeMiningResult,
    GrayImage,
    ImageLine,
    LineSegment,
    Pixel,
    SlopeKind,
)

logger = logging.getLogger(__name__)

LUMA_WEIGHTS = (0.299, 0.587, 0.114)
DEFAULT_CLUSTER_RADIUS_DEG = 1.5

_TAN_22_5 = math.tan(math.radians(22.5))
_TAN_67_5 = math.tan(math.radians(67.5))
_FIXED_SHIFT = 16


def _round_half_up(values: np.ndarray) -> np.ndarray:
    return np.clip(np.floor(values + 0.5), 0, 255).astype(np.uint8)


def to_gray(rgb: np.ndarray) -> GrayImage:
    """
    Convert an (height, width, 3) uint8 RGB array to grayscale.

    Uses luma weights 0.299/0.587/0.114 and rounds half up.
    """
    rgb = np.asarray(rgb)
    if rgb.ndim != 3 or rgb.shape[2] != 3:
        raise ValueError(f"expected an (height, width, 3) array, got shape {rgb.shape}")
    luma = rgb.astype(np.float64) @ np.array(LUMA_WEIGHTS)
    return GrayImage(pixels=_round_half_up(luma))


def gaussian_kernel(ksize: int, sigma: float) -> np.ndarray:
    """Normalized 1-D Gaussian taps centered on ksize // 2."""
    offsets = np.arange(ksize, dtype=np.float64) - ksize // 2
    taps = np.exp(-(offsets ** 2) / (2.0 * sigma ** 2))
    return taps / taps.sum()


def gaussian_blur(img: GrayImage, ksize: int = BLUR_KSIZE, sigma: float = BLUR_SIGMA) -> GrayImage:
    """
    Separable Gaussian blur with replicated borders.

    Args:
        img: Input image, at least ksize x ksize
        ksize: Odd kernel size in pixels
        sigma: Standard deviation in pixels, same for both axes

    Returns:
        Blurred image of the same size, rounded half up to uint8
    """
    if ksize < 1 or ksize % 2 == 0:
        raise ValueError(f"ksize must be a positive odd number, got {ksize}")
    if img.width < ksize or img.height < ksize:
        raise ImageTooSmall(f"blur needs at least {ksize}x{ksize}, got {img.width}x{img.height}")
    taps = gaussian_kernel(ksize, sigma)
    data = img.pixels.astype(np.float64)
    data = ndimage.correlate1d(data, taps, axis=1, mode="nearest")
    data = ndimage.correlate1d(data, taps, axis=0, mode="nearest")
    return GrayImage(pixels=_round_half_up(data))


def sobel_gradients(img: GrayImage) -> Tuple[np.ndarray, np.ndarray]:
    """3x3 Sobel derivatives along u and v with replicated borders."""
    data = img.pixels.astype(np.float64)
    gx = ndimage.sobel(data, axis=1, mode="nearest")
    gy = ndimage.sobel(data, axis=0, mode="nearest")
    return gx, gy


def _non_max_suppression(magnitude: np.ndarray, gx: np.ndarray, gy: np.ndarray) -> np.ndarray:
    """Mask of pixels that are local maxima across their quantized gradient direction."""
    ax, ay = np.abs(gx), np.abs(gy)
    horizontal = ay < ax * _TAN_22_5
    vertical = ~horizontal & (ay > ax * _TAN_67_5)
    diagonal = ~horizontal & ~vertical
    same_sign = (gx * gy) >= 0

    m = magnitude
    padded = np.pad(m, 1, mode="constant")
    height, width = m.shape

    def shifted(dr: int, dc: int) -> np.ndarray:
        return padded[1 + dr:1 + dr + height, 1 + dc:1 + dc + width]

    keep = np.zeros_like(m, dtype=bool)
    keep |= horizontal & (m > shifted(0, -1)) & (m >= shifted(0, 1))
    keep |= vertical & (m > shifted(-1, 0)) & (m >= shifted(1, 0))
    keep |= diagonal & same_sign & (m > shifted(-1, -1)) & (m > shifted(1, 1))
    keep |= diagonal & ~same_sign & (m > shifted(-1, 1)) & (m > shifted(1, -1))
    return keep


def canny(
    img: GrayImage,
    low: float = CANNY_LOW,
    high: float = CANNY_HIGH,
    l2_gradient: bool = False,
) -> GrayImage:
    """
    Canny edge detector with a 3x3 Sobel aperture.

    Args:
        img: Input image, at least 3x3
        low: Hysteresis low threshold on gradient magnitude
        high: Hysteresis high threshold on gradient magnitude
        l2_gradient: Use the Euclidean magnitude instead of |gx| + |gy|

    Returns:
        Binary edge map with values 0 and 255
    """
    if img.width < 3 or img.height < 3:
        raise ImageTooSmall(f"canny needs at least 3x3, got {img.width}x{img.height}")
    gx, gy = sobel_gradients(img)
    magnitude = np.hypot(gx, gy) if l2_gradient else np.abs(gx) + np.abs(gy)

    candidates = _non_max_suppression(magnitude, gx, gy) & (magnitude > low)
    strong = candidates & (magnitude > high)

    labels, count = ndimage.label(candidates, structure=np.ones((3, 3), dtype=int))
    connected = np.unique(labels[strong])
    edges = np.isin(labels, connected[connected > 0])
    logger.debug(f"canny: {int(strong.sum())} strong seeds, {int(edges.sum())} edge pixels in {count} chains")
    return GrayImage(pixels=np.where(edges, 255, 0).astype(np.uint8))


def _walk(mask, x0, y0, dx0, dy0, xflag, max_line_gap):
    """Follow a line from a seed in both directions; return its two end pixels."""
    height, width = mask.shape
    ends = [(0, 0), (0, 0)]
    for k in range(2):
        gap = 0
        x, y = x0, y0
        dx, dy = (dx0, dy0) if k == 0 else (-dx0, -dy0)
        while True:
            if xflag:
                col, row = x, y >> _FIXED_SHIFT
            else:
                col, row = x >> _FIXED_SHIFT, y
            if col < 0 or col >= width or row < 0 or row >= height:
                break
            if mask[row, col]:
                gap = 0
                ends[k] = (col, row)
            else:
                gap += 1
                if gap > max_line_gap:
                    break
            x += dx
            y += dy
    return ends


def _collect(mask, x0, y0, dx0, dy0, xflag, ends):
    """Clear the mask along a walked line and return the pixels that were set."""
    pixels = []
    for k in range(2):
        x, y = x0, y0
        dx, dy = (dx0, dy0) if k == 0 else (-dx0, -dy0)
        while True:
            if xflag:
                col, row = x, y >> _FIXED_SHIFT
            else:
                col, row = x >> _FIXED_SHIFT, y
            if mask[row, col]:
                pixels.append((col, row))
                mask[row, col] = False
            if (col, row) == ends[k]:
                break
            x += dx
            y += dy
    return pixels


def hough_lines_p(
    edges: GrayImage,
    rho: float = HOUGH_RHO,
    theta: float = math.radians(HOUGH_THETA_DEG),
    threshold: int = HOUGH_THRESHOLD,
    min_line_length: int = HOUGH_MIN_LINE_LENGTH,
    max_line_gap: int = HOUGH_MAX_LINE_GAP,
    seed: int = 0,
) -> List[LineSegment]:
    """
    Progressive probabilistic Hough transform.

    Edge pixels vote one at a time in a seeded random order. As soon as a
    bin reaches the threshold, the line through the voting pixel is walked
    in both directions, tolerating up to max_line_gap missing pixels. Walked
    pixels leave the pool; if the walk spans at least min_line_length along
    u or v, their votes are withdrawn and the segment is emitted.

    Args:
        edges: Binary edge map; non-zero pixels are edge points
        rho: Distance resolution in pixels
        theta: Angle resolution in radians
        threshold: Votes needed before a line is walked
        min_line_length: Minimum extent of an accepted segment in pixels
        max_line_gap: Largest gap bridged while walking
        seed: Seed of the visiting order

    Returns:
        Accepted segments in detection order
    """
    height, width = edges.height, edges.width
    mask = edges.pixels > 0
    numangle = int(round(math.pi / theta))
    numrho = int(round(((width + height) * 2 + 1) / rho))
    offset = (numrho - 1) // 2
    angles = np.arange(numangle) * theta
    cos_tab = np.cos(angles) / rho
    sin_tab = np.sin(angles) / rho
    accum = np.zeros((numangle, numrho), dtype=np.int64)
    rows_idx = np.arange(numangle)

    rows, cols = np.nonzero(mask)
    order = np.random.default_rng(seed).permutation(len(rows))
    segments: List[LineSegment] = []

    for index in order:
        row, col = int(rows[index]), int(cols[index])
        if not mask[row, col]:
            continue

        bins = np.rint(col * cos_tab + row * sin_tab).astype(np.int64) + offset
        accum[rows_idx, bins] += 1
        votes = accum[rows_idx, bins]
        best = int(np.argmax(votes))
        if votes[best] < threshold:
            continue

        a = -sin_tab[best] * rho
        b = cos_tab[best] * rho
        x0, y0 = col, row
        if abs(a) > abs(b):
            xflag = True
            dx0 = 1 if a > 0 else -1
            dy0 = int(np.rint(b * (1 << _FIXED_SHIFT) / abs(a)))
            y0 = (y0 << _FIXED_SHIFT) + (1 << (_FIXED_SHIFT - 1))
        else:
            xflag = False
            dy0 = 1 if b > 0 else -1
            dx0 = int(np.rint(a * (1 << _FIXED_SHIFT) / abs(b)))
            x0 = (x0 << _FIXED_SHIFT) + (1 << (_FIXED_SHIFT - 1))

        ends = _walk(mask, x0, y0, dx0, dy0, xflag, max_line_gap)
        good_line = (
            abs(ends[1][0] - ends[0][0]) >= min_line_length
            or abs(ends[1][1] - ends[0][1]) >= min_line_length
        )
        walked = _collect(mask, x0, y0, dx0, dy0, xflag, ends)
        if not good_line:
            continue

        if walked:
            points = np.array(walked, dtype=np.float64)
            unvote = np.rint(np.outer(points[:, 0], cos_tab) + np.outer(points[:, 1], sin_tab)).astype(np.int64) + offset
            np.add.at(accum, (np.broadcast_to(rows_idx, unvote.shape), unvote), -1)
        if ends[0] == ends[1]:
            continue
        segments.append(
            LineSegment(
                p0=Pixel(u=float(ends[0][0]), v=float(ends[0][1])),
                p1=Pixel(u=float(ends[1][0]), v=float(ends[1][1])),
            )
        )

    logger.debug(f"hough: {len(rows)} edge pixels -> {len(segments)} segments")
    return segments


def filter_vertical(
    segments: Sequence[LineSegment],
    min_deg: float = VERTICAL_MIN_DEG,
    max_deg: float = VERTICAL_MAX_DEG,
) -> List[float]:
    """Inclinations of the segments strictly between min_deg and max_deg."""
    angles = [segment.inclination_deg for segment in segments]
    return [angle for angle in angles if min_deg < angle < max_deg]


def cluster_angles(angles: Sequence[float], radius: float = DEFAULT_CLUSTER_RADIUS_DEG) -> Tuple[float, int]:
    """
    Single-linkage clustering of 1-D angles.

    Sorted neighbours closer than radius share a cluster. The most populous
    cluster wins; ties go to the centroid nearest 90 degrees.

    Args:
        angles: Inclinations in degrees
        radius: Merge radius in degrees

    Returns:
        (centroid of the winning cluster, its size)
    """
    if len(angles) == 0:
        raise EmptyInput("cannot cluster an empty angle list")
    ordered = np.sort(np.asarray(angles, dtype=float))
    breaks = np.flatnonzero(np.diff(ordered) > radius) + 1
    clusters = np.split(ordered, breaks)
    best = max(clusters, key=lambda c: (len(c), -abs(float(c.mean()) - 90.0)))
    return float(best.mean()), int(len(best))


def slope_from_angles(
    angles: Sequence[float],
    radius: float = DEFAULT_CLUSTER_RADIUS_DEG,
) -> EdgeMiningResult:
    """
    Apply the trust gate to vertical edge inclinations and pick the slope.

    The result is present only when more than MIN_VERTICAL_EDGES angles are
    given and their population standard deviation in degrees is below
    MAX_ANGLE_STD_DEG.
    """
    n_v = len(angles)
    s_v: Optional[float] = float(np.std(angles)) if n_v else None
    if n_v <= MIN_VERTICAL_EDGES or s_v is None or s_v >= MAX_ANGLE_STD_DEG:
        logger.debug(f"vertical slope gate closed: n_v={n_v} s_v={s_v}")
        return EdgeMiningResult(kind=SlopeKind.ABSENT, n_v=n_v, s_v=s_v)

    centroid, size = cluster_angles(angles, radius)
    if abs(centroid - 90.0) < 1e-9:
        return EdgeMiningResult(
            kind=SlopeKind.VERTICAL, n_v=n_v, s_v=s_v, centroid_deg=centroid, cluster_size=size
        )
    return EdgeMiningResult(
        kind=SlopeKind.SLOPE,
        k_v=math.tan(math.radians(centroid)),
        n_v=n_v,
        s_v=s_v,
        centroid_deg=centroid,
        cluster_size=size,
    )


def mine_vertical_slope(
    img: GrayImage,
    seed: int = 0,
    radius: float = DEFAULT_CLUSTER_RADIUS_DEG,
) -> EdgeMiningResult:
    """
    Estimate the image slope of world-vertical edges.

    Args:
        img: Grayscale scene image, at least 13x13
        seed: Seed of the Hough visiting order
        radius: Angle clustering radius in degrees

    Returns:
        EdgeMiningResult; absent when too few or too scattered vertical edges
    """
    edges = canny(gaussian_blur(img))
    segments = hough_lines_p(edges, seed=seed)
    angles = filter_vertical(segments)
    result = slope_from_angles(angles, radius)
    logger.info(
        f"vertical edge mining: {len(segments)} segments, n_v={result.n_v}, kind={result.kind.value}"
    )
    return result


def fuse_horizon(mining: EdgeMiningResult, nn_line: ImageLine) -> ImageLine:
    """
    Replace the horizon slope with the perpendicular of the mined vertical direction.

    The intercept always comes from nn_line.
    """
    if mining.kind == SlopeKind.VERTICAL:
        return ImageLine(k=0.0, b=nn_line.b)
    if mining.kind == SlopeKind.SLOPE:
        return ImageLine(k=-1.0 / mining.k_v, b=nn_line.b)
    return nn_line


def roll_only_horizon(mining: EdgeMiningResult, K: CameraIntrinsics) -> ImageLine:
    """Horizon with the mined roll and zero pitch: the line passes through (cu, cv)."""
    k = -1.0 / mining.k_v if mining.kind == SlopeKind.SLOPE else 0.0
    return ImageLine(k=k, b=K.cv - k * K.cu)
