"""Pixel-level segmentation performance: IoU, recall, precision per class.

Counts are exact integers accumulated over pixels where the ground truth is
not the ignore id; classes without any ground-truth or predicted pixel are
reported as undefined and excluded from the unweighted means.
"""

from dataclasses import dataclass

import numpy as np

from .validation import IGNORE_ID, check_label_map, check_same_shape


@dataclass(frozen=True)
class ClassCounts:
    """Per-class TP/FP/FN pixel counts plus the ignored-pixel total."""

    tp: np.ndarray
    fp: np.ndarray
    fn: np.ndarray
    ignore_pixels: int = 0

    def __post_init__(self):
        for name in ("tp", "fp", "fn"):
            arr = np.asarray(getattr(self, name), dtype=np.int64)
            if np.any(arr < 0):
                raise ValueError(f"{name} counts must be nonnegative")
            object.__setattr__(self, name, arr)
        if self.tp.shape != self.fp.shape or self.tp.shape != self.fn.shape:
            raise ValueError("tp/fp/fn must have one entry per class")

    @property
    def n_classes(self):
        return self.tp.shape[0]

    def __add__(self, other):
        return ClassCounts(
            self.tp + other.tp,
            self.fp + other.fp,
            self.fn + other.fn,
            self.ignore_pixels + other.ignore_pixels,
        )


@dataclass(frozen=True)
class MetricsReport:
    """Per-class and mean IoU/recall/precision; NaN marks undefined cells."""

    iou: np.ndarray
    recall: np.ndarray
    precision: np.ndarray
    class_names: tuple | None = None

    def _mean(self, arr):
        defined = arr[~np.isnan(arr)]
        return float(defined.mean()) if defined.size else float("nan")

    @property
    def mean_iou(self):
        return self._mean(self.iou)

    @property
    def mean_recall(self):
        return self._mean(self.recall)

    @property
    def mean_precision(self):
        return self._mean(self.precision)

    def to_dict(self):
        def listify(arr):
            return [None if np.isnan(v) else v for v in arr.tolist()]

        return {
            "class_names": list(self.class_names) if self.class_names else None,
            "iou": listify(self.iou),
            "recall": listify(self.recall),
            "precision": listify(self.precision),
            "mean_iou": None if np.isnan(self.mean_iou) else self.mean_iou,
            "mean_recall": None if np.isnan(self.mean_recall) else self.mean_recall,
            "mean_precision":
                None if np.isnan(self.mean_precision) else self.mean_precision,
        }

    def to_table(self):
        """Aligned plain-text table, one row per class plus the means."""
        names = self.class_names or tuple(
            f"class {i}" for i in range(self.iou.shape[0])
        )
        width = max(len(n) for n in (*names, "mean"))

        def fmt(v):
            return "   -  " if np.isnan(v) else f"{100 * v:6.1f}"

        lines = [f"{'':{width}}   IoU    recall  precision"]
        for i, name in enumerate(names):
            lines.append(
                f"{name:{width}}  {fmt(self.iou[i])}  {fmt(self.recall[i])}"
                f"  {fmt(self.precision[i])}"
            )
        lines.append(
            f"{'mean':{width}}  {fmt(self.mean_iou)}  {fmt(self.mean_recall)}"
            f"  {fmt(self.mean_precision)}"
        )
        return "\n".join(lines)


def confusion_counts(pred, gt, n_classes):
    """TP/FP/FN pixel counts per class over non-ignore ground truth."""
    pred = check_label_map(pred)
    gt = check_label_map(gt, n_classes)
    check_same_shape(pred, gt, "prediction and ground truth")
    valid = gt != IGNORE_ID
    ignore_pixels = int(np.count_nonzero(~valid))
    p = pred[valid].astype(np.int64)
    g = gt[valid].astype(np.int64)
    # joint histogram over (gt, pred); predicted ignore ids land in a
    # spill bucket and count as misses only
    p = np.where(p >= n_classes, n_classes, p)
    joint = np.bincount(
        g * (n_classes + 1) + p, minlength=n_classes * (n_classes + 1)
    ).reshape(n_classes, n_classes + 1)
    tp = np.diagonal(joint[:, :n_classes]).copy()
    fn = joint.sum(axis=1) - tp
    fp = joint[:, :n_classes].sum(axis=0) - tp
    return ClassCounts(tp, fp, fn, ignore_pixels)


def compute_metrics(counts, class_names=None):
    """Recall, precision and IoU from counts; zero denominators -> NaN."""
    tp = counts.tp.astype(np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        recall = np.where(tp + counts.fn > 0, tp / (tp + counts.fn), np.nan)
        precision = np.where(tp + counts.fp > 0, tp / (tp + counts.fp), np.nan)
        denom = tp + counts.fp + counts.fn
        iou = np.where(denom > 0, tp / denom, np.nan)
    return MetricsReport(iou, recall, precision, class_names)
