"""
Depth and dimension error metrics for GroundPrior.

Predictions and ground truth are matched by their explicit object id.
Records without an id, DontCare regions and ids present on one side only
count as unmatched.
"""
import csv
import io
import logging
import math
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from groundprior.errors import EmptyInput
from groundprior.models import DEPTH_BUCKET_EDGES, DepthBucketReport, DimErrorReport, LabelRecord

logger = logging.getLogger(__name__)

DEPTH_COLUMNS = ["method", "depth_0_20", "depth_20_40", "depth_40_inf", "n_0_20", "n_20_40", "n_40_inf", "unmatched"]
DIM_COLUMNS = ["method", "depth", "height", "length", "width", "count", "unmatched"]

Pair = Tuple[LabelRecord, LabelRecord]


def _by_id(records: Sequence[LabelRecord]) -> Dict[str, LabelRecord]:
    keyed = {}
    for record in records:
        if record.category == "DontCare" or record.object_id is None:
            continue
        if record.object_id in keyed:
            raise ValueError(f"duplicate object id {record.object_id}")
        keyed[record.object_id] = record
    return keyed


def match_by_id(pred: Sequence[LabelRecord], gt: Sequence[LabelRecord]) -> Tuple[List[Pair], int]:
    """
    Pair predictions with ground truth sharing an object id.

    Returns:
        (pairs in ground-truth order, number of unmatched records on either side)
    """
    pred_ids, gt_ids = _by_id(pred), _by_id(gt)
    pairs = [(pred_ids[key], record) for key, record in gt_ids.items() if key in pred_ids]
    usable = sum(1 for r in pred if r.category != "DontCare") + sum(1 for r in gt if r.category != "DontCare")
    unmatched = usable - 2 * len(pairs)
    if unmatched:
        logger.warning(f"{unmatched} records without a partner were ignored")
    return pairs, unmatched


def eval_depth_buckets(
    pred: Sequence[LabelRecord], gt: Sequence[LabelRecord], method: str = "GroundPrior"
) -> DepthBucketReport:
    """
    Mean absolute depth error per ground-truth depth bucket.

    Buckets are [0, 20), [20, 40) and [40, inf) meters of ground-truth z.
    Empty buckets report None.
    """
    pairs, unmatched = match_by_id(pred, gt)
    if not pairs:
        raise EmptyInput("no prediction shares an object id with the ground truth")
    gt_z = np.array([g.location[2] for _, g in pairs])
    errors = np.abs(np.array([p.location[2] for p, _ in pairs]) - gt_z)
    bucket = np.searchsorted(np.array(DEPTH_BUCKET_EDGES[1:-1]), gt_z, side="right")

    means: List[Optional[float]] = []
    counts: List[int] = []
    for index in range(len(DEPTH_BUCKET_EDGES) - 1):
        selected = errors[bucket == index]
        counts.append(int(selected.size))
        means.append(float(selected.mean()) if selected.size else None)
    return DepthBucketReport(method=method, errors=tuple(means), counts=tuple(counts), unmatched=unmatched)


def eval_dim_errors(
    pred: Sequence[LabelRecord], gt: Sequence[LabelRecord], method: str = "GroundPrior"
) -> DimErrorReport:
    """Mean L1 error of depth, height, length and width over matched objects."""
    pairs, unmatched = match_by_id(pred, gt)
    if not pairs:
        raise EmptyInput("no prediction shares an object id with the ground truth")
    # columns: z, h, l, w
    p = np.array([[r.location[2], r.dims[0], r.dims[2], r.dims[1]] for r, _ in pairs])
    g = np.array([[r.location[2], r.dims[0], r.dims[2], r.dims[1]] for _, r in pairs])
    depth, height, length, width = np.abs(p - g).mean(axis=0)
    return DimErrorReport(
        method=method,
        depth=float(depth),
        height=float(height),
        length=float(length),
        width=float(width),
        count=len(pairs),
        unmatched=unmatched,
    )


def _number(value: Optional[float]) -> str:
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return "nan"
    return f"{value:.9g}"


def _write_rows(header: List[str], rows: List[List[str]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buffer.getvalue()


def format_depth_rows(reports: Sequence[DepthBucketReport]) -> str:
    """CSV table of depth bucket reports, 9 significant digits."""
    rows = [
        [r.method] + [_number(e) for e in r.errors] + [str(c) for c in r.counts] + [str(r.unmatched)]
        for r in reports
    ]
    return _write_rows(DEPTH_COLUMNS, rows)


def format_dim_rows(reports: Sequence[DimErrorReport]) -> str:
    """CSV table of dimension error reports, 9 significant digits."""
    rows = [
        [r.method, _number(r.depth), _number(r.height), _number(r.length), _number(r.width), str(r.count), str(r.unmatched)]
        for r in reports
    ]
    return _write_rows(DIM_COLUMNS, rows)


def load_reference_rows(path: Union[str, Path]) -> List[Dict[str, str]]:
    """Read a CSV file of published result rows."""
    with open(path, newline="") as f:
        return list(csv.DictReader(f))


def depth_reports_from_rows(rows: Sequence[Dict[str, str]]) -> List[DepthBucketReport]:
    """Reference depth rows (method, depth_0_20, depth_20_40, depth_40_inf) as reports."""
    reports = []
    for row in rows:
        errors = tuple(
            None if row[key].strip().lower() == "nan" else float(row[key])
            for key in ("depth_0_20", "depth_20_40", "depth_40_inf")
        )
        reports.append(DepthBucketReport(method=row["method"], errors=errors))
    return reports


def dim_reports_from_rows(rows: Sequence[Dict[str, str]]) -> List[DimErrorReport]:
    """Reference dimension rows (method, depth, height, length, width) as reports."""
    return [
        DimErrorReport(
            method=row["method"],
            depth=float(row["depth"]),
            height=float(row["height"]),
            length=float(row["length"]),
            width=float(row["width"]),
        )
        for row in rows
    ]
