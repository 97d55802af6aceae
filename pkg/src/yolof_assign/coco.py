"""COCO-format annotation ingestion and the matching-study driver."""

from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import matching
from .balance import MatchDistribution, SizeBuckets, distribution
from .geometry import AnchorConfig, ImageSize, apply_shift, generate_anchors
from .matching import GroundTruthSet

THREADS_ENV = "YOLOF_ASSIGN_THREADS"


class CorpusError(Exception):
    """Malformed or referentially broken annotation input."""


@dataclass
class Annotation:
    id: int
    image_id: int
    box: tuple  # (x1, y1, x2, y2)
    category_id: int


@dataclass
class AnnotationCorpus:
    """Parsed COCO-style corpus with boxes in corner form."""

    images: list  # (image_id, ImageSize), sorted by id
    annotations: list  # Annotation, sorted by id
    categories: list
    dropped: int = 0  # annotations discarded for non-positive extent

    def ground_truths(self, image_id: int) -> GroundTruthSet:
        anns = [a for a in self.annotations if a.image_id == image_id]
        boxes = np.array([a.box for a in anns], dtype=np.float64).reshape(-1, 4)
        classes = np.array([a.category_id for a in anns], dtype=np.int64)
        return GroundTruthSet(boxes=boxes, class_ids=classes)

    def to_dict(self) -> dict:
        return {
            "images": [{"id": i, "width": s.width, "height": s.height}
                       for i, s in self.images],
            "annotations": [
                {"id": a.id, "image_id": a.image_id,
                 "bbox": [a.box[0], a.box[1],
                          a.box[2] - a.box[0], a.box[3] - a.box[1]],
                 "category_id": a.category_id}
                for a in self.annotations],
            "categories": self.categories,
        }


def parse_corpus(doc: dict) -> AnnotationCorpus:
    for key in ("images", "annotations", "categories"):
        if key not in doc or not isinstance(doc[key], list):
            raise CorpusError(f"document lacks the {key!r} array")
    images = []
    for img in doc["images"]:
        try:
            images.append((int(img["id"]),
                           ImageSize(int(img["width"]), int(img["height"]))))
        except (KeyError, TypeError, ValueError) as exc:
            raise CorpusError(f"bad image record {img!r}: {exc}") from exc
    images.sort(key=lambda t: t[0])
    known = {i for i, _ in images}

    annotations = []
    dropped = 0
    for ann in doc["annotations"]:
        try:
            ann_id = int(ann["id"])
            image_id = int(ann["image_id"])
            x, y, w, h = (float(v) for v in ann["bbox"])
            cat = int(ann["category_id"])
        except (KeyError, TypeError, ValueError) as exc:
            raise CorpusError(f"bad annotation record {ann!r}: {exc}") from exc
        if image_id not in known:
            raise CorpusError(f"annotation {ann_id} references missing "
                              f"image_id {image_id}")
        if w <= 0 or h <= 0:
            dropped += 1
            continue
        annotations.append(Annotation(id=ann_id, image_id=image_id,
                                      box=(x, y, x + w, y + h),
                                      category_id=cat))
    annotations.sort(key=lambda a: a.id)
    return AnnotationCorpus(images=images, annotations=annotations,
                            categories=list(doc["categories"]),
                            dropped=dropped)


def load_corpus(path) -> AnnotationCorpus:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise CorpusError(f"{path}: parse error at line {exc.lineno} "
                              f"column {exc.colno}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise CorpusError(f"{path}: top level must be an object")
    return parse_corpus(doc)


MATCHER_NAMES = ("uniform", "topk", "max_iou", "atss", "hungarian")


@dataclass(frozen=True)
class RunConfig:
    """One matching-study configuration."""

    matcher: str = "uniform"
    matcher_params: dict = field(default_factory=dict)
    anchors: AnchorConfig = AnchorConfig()
    buckets: SizeBuckets = SizeBuckets()
    shift_max: int = 0  # 0 disables the random annotation shift
    seed: int = 0

    def __post_init__(self):
        if self.matcher not in MATCHER_NAMES:
            raise ValueError(f"unknown matcher {self.matcher!r}; expected one "
                             f"of {MATCHER_NAMES}")
        if self.shift_max < 0:
            raise ValueError("shift_max must be >= 0")

    @classmethod
    def from_dict(cls, doc: dict) -> "RunConfig":
        kwargs = dict(doc)
        if "anchors" in kwargs:
            a = kwargs["anchors"]
            kwargs["anchors"] = AnchorConfig(
                stride=a.get("stride", 32),
                sizes=tuple(a.get("sizes", (32, 64, 128, 256, 512))),
                scale_multipliers=tuple(a.get("scale_multipliers", (1.0,))),
                aspect_ratios=tuple(a.get("aspect_ratios", (1.0,))))
        if "buckets" in kwargs:
            b = kwargs["buckets"]
            kwargs["buckets"] = SizeBuckets(
                small_max=b.get("small_max", 32.0 ** 2),
                medium_max=b.get("medium_max", 96.0 ** 2))
        return cls(**kwargs)

    @classmethod
    def load(cls, path_or_default: str) -> "RunConfig":
        if path_or_default == "default":
            return cls()
        with open(path_or_default, "r", encoding="utf-8") as fh:
            try:
                doc = json.load(fh)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"{path_or_default}: parse error at line "
                                  f"{exc.lineno}: {exc.msg}") from exc
        try:
            return cls.from_dict(doc)
        except (TypeError, ValueError) as exc:
            raise CorpusError(f"{path_or_default}: {exc}") from exc


def _run_matcher(config: RunConfig, anchors, gts: GroundTruthSet):
    p = config.matcher_params
    if config.matcher == "uniform":
        return matching.uniform_match(
            anchors, gts, matching.UniformMatchConfig(
                k=p.get("k", 4),
                pos_ignore_iou=p.get("pos_ignore_iou", 0.15),
                neg_ignore_iou=p.get("neg_ignore_iou", 0.7)))
    if config.matcher == "topk":
        return matching.topk_match(anchors, gts, k=p.get("k", 4))
    if config.matcher == "max_iou":
        return matching.max_iou_match(
            anchors, gts,
            matching.MaxIoUConfig(pos_iou=p.get("pos_iou", 0.5),
                                  neg_iou=p.get("neg_iou", 0.4)),
            rescue=p.get("rescue", True))
    if config.matcher == "atss":
        return matching.atss_match(
            anchors, gts, matching.ATSSConfig(k=p.get("k", 15)))
    return matching.hungarian_match(anchors, gts)


def worker_count() -> int:
    """Parallelism cap from ``YOLOF_ASSIGN_THREADS`` (0 or unset = auto)."""
    raw = os.environ.get(THREADS_ENV, "0")
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"{THREADS_ENV} must be an integer, got {raw!r}")
    if n < 0:
        raise ValueError(f"{THREADS_ENV} must be >= 0")
    return n if n > 0 else min(8, os.cpu_count() or 1)


def run_match_stats(corpus: AnnotationCorpus, config: RunConfig):
    """Match every corpus image and aggregate per-bucket statistics.

    Returns ``(MatchDistribution, per_image)`` where ``per_image`` is a
    list of detail dicts sorted by image id.  Deterministic given the
    config seed; per-image work may run on multiple threads.
    """
    def process(item):
        image_id, size = item
        gts = corpus.ground_truths(image_id)
        if config.shift_max > 0 and len(gts):
            rng = np.random.default_rng((config.seed, image_id))
            dx = int(rng.integers(-config.shift_max, config.shift_max + 1))
            dy = int(rng.integers(-config.shift_max, config.shift_max + 1))
            boxes, kept = apply_shift(gts.boxes, size, dx, dy)
            gts = GroundTruthSet(boxes=boxes, class_ids=gts.class_ids[kept])
        anchors = generate_anchors(config.anchors, size)
        try:
            result = _run_matcher(config, anchors, gts)
        except ValueError as exc:
            raise ValueError(f"image {image_id}: {exc}") from exc
        uniform_cands = None
        if config.matcher in ("uniform", "topk") and len(gts):
            k = config.matcher_params.get("k", 4)
            cands = matching.nearest_candidates(anchors, gts, k)
            uniform_cands = all(len(c) == min(k, len(anchors)) for c in cands)
        detail = {
            "image_id": image_id,
            "num_gts": len(gts),
            "num_anchors": len(anchors),
            "num_positive": result.num_positive,
            "positives_per_gt": [len(p) for p in result.gt_positives],
        }
        return image_id, gts, result, detail, uniform_cands

    items = list(corpus.images)
    workers = worker_count()
    if workers > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(process, items))
    else:
        rows = [process(item) for item in items]
    rows.sort(key=lambda r: r[0])

    dist = distribution([(gts, res) for _, gts, res, _, _ in rows],
                        config.buckets, matcher=config.matcher)
    per_image = [detail for _, _, _, detail, _ in rows]
    flags = [u for _, _, _, _, u in rows if u is not None]
    dist_extras = {
        "candidates_per_gt_uniform": bool(flags) and all(flags),
        "imbalance_defined": dist.total_gts > 0,
    }
    return dist, per_image, dist_extras
