"""Deterministic JSON/CSV report emission with atomic file writes."""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile

from .balance import BUCKET_NAMES, MatchDistribution, imbalance_ratio

CSV_COLUMNS = ("matcher", "bucket", "gt_count", "positives_total",
               "positives_mean", "zero_fraction")


def _safe(value: float):
    if isinstance(value, float) and not math.isfinite(value):
        return "unbounded" if value > 0 else None
    if isinstance(value, float) and math.isnan(value):
        return None
    return value


def distribution_to_dict(dist: MatchDistribution, extras: dict | None = None,
                         per_image: list | None = None) -> dict:
    buckets = {}
    for name in BUCKET_NAMES:
        stats = dist.buckets[name]
        mean = stats.positives_mean
        zf = dist.zero_fraction(name)
        buckets[name] = {
            "gt_count": stats.gt_count,
            "positives_total": stats.positives_total,
            "positives_mean": None if math.isnan(mean) else mean,
            "zero_fraction": None if math.isnan(zf) else zf,
        }
    doc = {
        "matcher": dist.matcher,
        "buckets": buckets,
        "per_gt_counts": [{"bucket": b, "positives": c}
                          for b, c in dist.per_gt_counts],
        "total_gts": dist.total_gts,
        "total_positives": dist.total_positives,
        "imbalance_ratio": (_safe(imbalance_ratio(dist))
                            if dist.total_gts else None),
    }
    if extras:
        doc.update(extras)
    if per_image is not None:
        doc["per_image"] = per_image
    return doc


def distribution_to_csv(dist: MatchDistribution) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for name in BUCKET_NAMES:
        stats = dist.buckets[name]
        mean = stats.positives_mean
        zf = dist.zero_fraction(name)
        writer.writerow([
            dist.matcher, name, stats.gt_count, stats.positives_total,
            "" if math.isnan(mean) else f"{mean:.6f}",
            "" if math.isnan(zf) else f"{zf:.6f}",
        ])
    return buf.getvalue()


def to_json(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def write_atomic(path: str, text: str) -> None:
    """Write via a temp file in the target directory, then rename."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".report-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
