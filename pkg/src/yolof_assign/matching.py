"""Label-assignment strategies for anchors on a single feature level.

Every matcher returns a :class:`MatchResult` whose ``labels`` array tags
each anchor as positive for one ground-truth box, negative, or ignored.
All matchers are pure and deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from .geometry import AnchorGrid, as_boxes, box_area, box_centers, pairwise_iou

NEGATIVE = -1
IGNORED = -2


@dataclass
class GroundTruthSet:
    """Ground-truth boxes with parallel class ids."""

    boxes: np.ndarray
    class_ids: np.ndarray

    def __post_init__(self):
        self.boxes = as_boxes(self.boxes)
        self.class_ids = np.asarray(self.class_ids, dtype=np.int64).reshape(-1)
        if len(self.class_ids) != len(self.boxes):
            raise ValueError("boxes and class_ids must have equal length")
        if np.any(self.class_ids < 0):
            raise ValueError("class ids must be non-negative")
        if len(self.boxes) and np.any(box_area(self.boxes) <= 0):
            raise ValueError("every ground-truth box must have positive area")

    def __len__(self) -> int:
        return len(self.boxes)


@dataclass
class MatchResult:
    """Per-anchor assignment labels plus per-GT positive index lists.

    ``labels[a]`` is the ground-truth index when anchor ``a`` is positive,
    ``NEGATIVE`` (-1) or ``IGNORED`` (-2) otherwise.
    """

    labels: np.ndarray
    gt_positives: list = field(repr=False)
    matcher: str = ""

    @classmethod
    def from_labels(cls, labels: np.ndarray, num_gts: int,
                    matcher: str = "") -> "MatchResult":
        labels = np.asarray(labels, dtype=np.int64)
        positives = [np.flatnonzero(labels == g) for g in range(num_gts)]
        return cls(labels=labels, gt_positives=positives, matcher=matcher)

    @property
    def num_positive(self) -> int:
        return int(np.sum(self.labels >= 0))


@dataclass(frozen=True)
class UniformMatchConfig:
    k: int = 4
    pos_ignore_iou: float = 0.15
    neg_ignore_iou: float = 0.7

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be a positive integer")
        if not 0.0 <= self.pos_ignore_iou < self.neg_ignore_iou <= 1.0:
            raise ValueError("need 0 <= pos_ignore_iou < neg_ignore_iou <= 1")


@dataclass(frozen=True)
class MaxIoUConfig:
    pos_iou: float = 0.5
    neg_iou: float = 0.4

    def __post_init__(self):
        if not 0.0 <= self.neg_iou <= self.pos_iou <= 1.0:
            raise ValueError("need 0 <= neg_iou <= pos_iou <= 1")


@dataclass(frozen=True)
class ATSSConfig:
    k: int = 15

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")


def _anchor_boxes(anchors) -> np.ndarray:
    return anchors.anchors if isinstance(anchors, AnchorGrid) else as_boxes(anchors)


def _center_distances(gts: GroundTruthSet, boxes: np.ndarray) -> np.ndarray:
    """Euclidean GT-center to anchor-center distance matrix ``(M, N)``."""
    gc = box_centers(gts.boxes)
    ac = box_centers(boxes)
    return np.sqrt(((gc[:, None, :] - ac[None, :, :]) ** 2).sum(axis=-1))


def nearest_candidates(anchors, gts: GroundTruthSet, k: int) -> list:
    """Per-GT index lists of the k center-nearest anchors.

    This is the pre-filter candidate set of uniform matching; ties in
    distance break by ascending anchor index.
    """
    boxes = _anchor_boxes(anchors)
    if k > len(boxes):
        raise ValueError(f"k={k} exceeds the {len(boxes)} available anchors")
    dist = _center_distances(gts, boxes)
    return [np.argsort(dist[g], kind="stable")[:k] for g in range(len(gts))]


def uniform_match(anchors, gts: GroundTruthSet,
                  cfg: UniformMatchConfig = UniformMatchConfig()) -> MatchResult:
    """k-nearest-anchor matching with IoU-based ignore filters.

    Each GT takes its k center-nearest anchors as candidates.  An anchor
    claimed by several GTs goes to the closest one (tie: smaller GT index).
    A resolved candidate with IoU below ``pos_ignore_iou`` for its GT is
    ignored rather than positive; a non-candidate whose best IoU over all
    GTs exceeds ``neg_ignore_iou`` is ignored rather than negative.
    """
    boxes = _anchor_boxes(anchors)
    n = len(boxes)
    if cfg.k > n:
        raise ValueError(f"k={cfg.k} exceeds the {n} available anchors")
    labels = np.full(n, NEGATIVE, dtype=np.int64)
    if len(gts) == 0:
        return MatchResult.from_labels(labels, 0, matcher="uniform")

    dist = _center_distances(gts, boxes)
    candidates = [np.argsort(dist[g], kind="stable")[:cfg.k]
                  for g in range(len(gts))]

    # conflict resolution: candidate anchors go to the closest claiming GT
    claim = np.full((len(gts), n), np.inf)
    for g, cand in enumerate(candidates):
        claim[g, cand] = dist[g, cand]
    is_candidate = np.isfinite(claim).any(axis=0)
    owner = np.argmin(claim, axis=0)  # first min -> smaller gt index on ties

    ious = pairwise_iou(gts.boxes, boxes)
    for a in np.flatnonzero(is_candidate):
        g = owner[a]
        labels[a] = g if ious[g, a] >= cfg.pos_ignore_iou else IGNORED

    non_candidate = ~is_candidate
    hot = non_candidate & (ious.max(axis=0) > cfg.neg_ignore_iou)
    labels[hot] = IGNORED
    return MatchResult.from_labels(labels, len(gts), matcher="uniform")


def topk_match(anchors, gts: GroundTruthSet, k: int) -> MatchResult:
    """Pure k-nearest matching: uniform matching with ignore filters off."""
    cfg = UniformMatchConfig(k=k, pos_ignore_iou=0.0, neg_ignore_iou=1.0)
    result = uniform_match(anchors, gts, cfg)
    result.matcher = "topk"
    return result


def max_iou_match(anchors, gts: GroundTruthSet,
                  cfg: MaxIoUConfig = MaxIoUConfig(),
                  rescue: bool = True) -> MatchResult:
    """IoU-threshold matching.

    An anchor is positive for its argmax-IoU GT when that IoU reaches
    ``pos_iou``, negative below ``neg_iou``, ignored in between.  With
    ``rescue`` on, each GT's best-IoU anchor is forced positive for it
    even below the threshold.
    """
    boxes = _anchor_boxes(anchors)
    n = len(boxes)
    labels = np.full(n, NEGATIVE, dtype=np.int64)
    if len(gts) == 0:
        return MatchResult.from_labels(labels, 0, matcher="max_iou")

    ious = pairwise_iou(gts.boxes, boxes)
    best_gt = np.argmax(ious, axis=0)
    best_iou = ious[best_gt, np.arange(n)]
    labels[best_iou >= cfg.pos_iou] = best_gt[best_iou >= cfg.pos_iou]
    ignore = (best_iou >= cfg.neg_iou) & (best_iou < cfg.pos_iou)
    labels[ignore] = IGNORED

    if rescue:
        # force each GT's best anchor; on contention the higher IoU wins
        forced_iou = np.full(n, -1.0)
        for g in range(len(gts)):
            a = int(np.argmax(ious[g]))
            if ious[g, a] > forced_iou[a]:
                forced_iou[a] = ious[g, a]
                labels[a] = g
    return MatchResult.from_labels(labels, len(gts), matcher="max_iou")


def atss_match(anchors, gts: GroundTruthSet,
               cfg: ATSSConfig = ATSSConfig()) -> MatchResult:
    """Adaptive matching with a per-GT dynamic IoU threshold (single level).

    For each GT the k center-nearest anchors form the candidate pool; the
    threshold is the mean plus population standard deviation of their IoUs.
    Candidates at or above it whose center lies strictly inside the GT box
    become positive; conflicts go to the higher IoU (tie: smaller GT
    index).  There is no ignored class.
    """
    boxes = _anchor_boxes(anchors)
    n = len(boxes)
    if cfg.k > n:
        raise ValueError(f"k={cfg.k} exceeds the {n} available anchors")
    labels = np.full(n, NEGATIVE, dtype=np.int64)
    if len(gts) == 0:
        return MatchResult.from_labels(labels, 0, matcher="atss")

    dist = _center_distances(gts, boxes)
    ious = pairwise_iou(gts.boxes, boxes)
    centers = box_centers(boxes)
    assigned_iou = np.full(n, -1.0)
    for g in range(len(gts)):
        cand = np.argsort(dist[g], kind="stable")[:cfg.k]
        cand_ious = ious[g, cand]
        thresh = cand_ious.mean() + cand_ious.std()  # population std
        x1, y1, x2, y2 = gts.boxes[g]
        for a in cand:
            cx, cy = centers[a]
            inside = x1 < cx < x2 and y1 < cy < y2
            if ious[g, a] >= thresh and inside and ious[g, a] > assigned_iou[a]:
                assigned_iou[a] = ious[g, a]
                labels[a] = g
    return MatchResult.from_labels(labels, len(gts), matcher="atss")


def solve_assignment(cost: np.ndarray):
    """Minimum-cost one-to-one assignment on an arbitrary cost matrix.

    Rows must not outnumber columns.  Returns ``(rows, cols, total_cost)``
    with one column per row.
    """
    cost = np.asarray(cost, dtype=np.float64)
    if cost.ndim != 2:
        raise ValueError("cost must be a 2-D matrix")
    if cost.shape[0] > cost.shape[1]:
        raise ValueError(f"cannot assign {cost.shape[0]} rows to "
                         f"{cost.shape[1]} columns")
    rows, cols = linear_sum_assignment(cost)
    return rows, cols, float(cost[rows, cols].sum())


def hungarian_cost(anchors, gts: GroundTruthSet,
                   iou_scale: float | None = None) -> np.ndarray:
    """Assignment cost: center distance minus scaled IoU, shape ``(M, N)``."""
    boxes = _anchor_boxes(anchors)
    if iou_scale is None:
        iou_scale = float(anchors.config.stride) \
            if isinstance(anchors, AnchorGrid) else 32.0
    return (_center_distances(gts, boxes)
            - iou_scale * pairwise_iou(gts.boxes, boxes))


def hungarian_match(anchors, gts: GroundTruthSet) -> MatchResult:
    """Optimal one-to-one GT-to-anchor assignment (Kuhn-Munkres)."""
    boxes = _anchor_boxes(anchors)
    n = len(boxes)
    labels = np.full(n, NEGATIVE, dtype=np.int64)
    if len(gts) == 0:
        return MatchResult.from_labels(labels, 0, matcher="hungarian")
    if len(gts) > n:
        raise ValueError(f"{len(gts)} ground truths exceed {n} anchors")
    rows, cols, _ = solve_assignment(hungarian_cost(anchors, gts))
    labels[cols] = rows
    return MatchResult.from_labels(labels, len(gts), matcher="hungarian")
