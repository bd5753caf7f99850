"""Instance-level safety evaluation of two decision rules.

Ground-truth human instances are *detected* by a rule when the fraction of
their pixels predicted as human strictly exceeds the detection threshold,
otherwise *overlooked*. Instances are binned into nested braking-distance
zones (an instance 10 m ahead lies inside both the 30 km/h and the 50 km/h
zone), and two rules are compared per zone: overlooked by both, detected
only by either side. Pixel-level precision of the human predictions across
the whole set doubles as a practicability measure (how often the vehicle
would brake for something that is not a person).
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import DatasetMismatch, SchemaViolation, UnknownInstance
from .taxonomy import COARSE_NAMES, HUMAN_CLASS
from .validation import IGNORE_ID, check_label_map, check_same_shape

FIELD_HALF_ANGLE_DEG = 30.0  # camera field of view is a 60 degree wedge

# braking distances at 30 km/h and 50 km/h
DEFAULT_ZONES = (("30kmh", 20.6), ("50kmh", 46.5))


@dataclass(frozen=True)
class InstanceRecord:
    """One ground-truth instance with its position metadata."""

    image_id: str
    instance_id: int
    class_name: str
    distance_m: float
    pixel_count: int
    bearing_deg: float | None = None
    provenance: str | None = None  # how distance/bearing were derived

    def __post_init__(self):
        if not np.isfinite(self.distance_m) or self.distance_m < 0:
            raise SchemaViolation(
                f"field 'distance_m': must be finite and >= 0, "
                f"got {self.distance_m!r}"
            )
        if self.pixel_count < 1:
            raise SchemaViolation("field 'pixel_count': must be >= 1")
        b = self.bearing_deg
        if b is not None and not -FIELD_HALF_ANGLE_DEG <= b <= FIELD_HALF_ANGLE_DEG:
            raise SchemaViolation(
                f"field 'bearing_deg': must lie within the +-"
                f"{FIELD_HALF_ANGLE_DEG} degree field, got {b!r}"
            )

    def to_dict(self):
        d = {
            "image_id": self.image_id,
            "instance_id": self.instance_id,
            "class": self.class_name,
            "distance_m": self.distance_m,
            "pixel_count": self.pixel_count,
        }
        if self.bearing_deg is not None:
            d["bearing_deg"] = self.bearing_deg
        if self.provenance is not None:
            d["provenance"] = self.provenance
        return d

    @classmethod
    def from_dict(cls, d):
        for key in ("image_id", "instance_id", "class", "distance_m",
                    "pixel_count"):
            if key not in d:
                raise SchemaViolation(f"field '{key}': missing")
        return cls(
            image_id=d["image_id"],
            instance_id=int(d["instance_id"]),
            class_name=d["class"],
            distance_m=float(d["distance_m"]),
            pixel_count=int(d["pixel_count"]),
            bearing_deg=None if d.get("bearing_deg") is None
            else float(d["bearing_deg"]),
            provenance=d.get("provenance"),
        )


@dataclass(frozen=True)
class ZoneConfig:
    """Nested distance zones with strictly increasing maxima."""

    zones: tuple = DEFAULT_ZONES

    def __post_init__(self):
        zones = tuple((str(n), float(d)) for n, d in self.zones)
        last = 0.0
        for name, dist in zones:
            if dist <= last:
                raise ValueError(
                    "zone max distances must be positive and strictly "
                    f"increasing; {name!r} at {dist} follows {last}"
                )
            last = dist
        object.__setattr__(self, "zones", zones)

    @property
    def names(self):
        return tuple(n for n, _ in self.zones)

    def membership(self, distance_m):
        """Names of every zone whose max distance covers the instance."""
        return {n for n, d in self.zones if distance_m <= d}


@dataclass(frozen=True)
class DetectionVerdict:
    instance_id: int
    recall: float
    threshold: float
    detected: bool


def instance_recall(pred, instances, instance_id, human_class=HUMAN_CLASS):
    """Fraction of an instance's pixels predicted as the human class."""
    pred = check_label_map(pred)
    inst = np.asarray(instances)
    check_same_shape(pred, inst, "prediction and instance raster")
    mask = inst == instance_id
    total = int(np.count_nonzero(mask))
    if total == 0:
        raise UnknownInstance(f"instance id {instance_id} not in raster")
    hits = int(np.count_nonzero(pred[mask] == human_class))
    return hits / total


def classify_instance(recall, threshold=0.5, instance_id=-1):
    """Detected iff recall strictly exceeds the threshold."""
    if not 0.0 <= recall <= 1.0 or not 0.0 <= threshold <= 1.0:
        raise ValueError("recall and threshold must lie in [0, 1]")
    return DetectionVerdict(
        instance_id=instance_id,
        recall=recall,
        threshold=threshold,
        detected=recall > threshold,
    )


def zone_membership(distance_m, zones=None):
    """Set of zone names containing an instance at the given distance."""
    cfg = zones if isinstance(zones, ZoneConfig) else ZoneConfig(
        zones or DEFAULT_ZONES
    )
    return cfg.membership(distance_m)


@dataclass(frozen=True)
class ZoneTally:
    name: str
    max_distance_m: float
    total: int = 0
    detected_both: int = 0
    only_a: int = 0          # detected by rule A only
    only_b: int = 0
    overlooked_both: int = 0

    @property
    def overlooked_a(self):
        return self.overlooked_both + self.only_b

    @property
    def overlooked_b(self):
        return self.overlooked_both + self.only_a

    def to_dict(self):
        return {
            "name": self.name,
            "max_distance_m": self.max_distance_m,
            "total": self.total,
            "detected_both": self.detected_both,
            "only_a": self.only_a,
            "only_b": self.only_b,
            "overlooked_both": self.overlooked_both,
            "overlooked_a": self.overlooked_a,
            "overlooked_b": self.overlooked_b,
        }


@dataclass(frozen=True)
class PixelPrecision:
    """Human-prediction precision over the whole evaluation set."""

    tp_pixels: int
    fp_pixels: int

    @property
    def total_pixels(self):
        return self.tp_pixels + self.fp_pixels

    @property
    def precision(self):
        if self.total_pixels == 0:
            return float("nan")
        return self.tp_pixels / self.total_pixels

    def to_dict(self):
        p = self.precision
        return {
            "tp_pixels": self.tp_pixels,
            "fp_pixels": self.fp_pixels,
            "total_pixels": self.total_pixels,
            "precision": None if np.isnan(p) else p,
        }


@dataclass(frozen=True)
class BirdseyePoint:
    image_id: str
    instance_id: int
    distance_m: float
    bearing_deg: float | None
    category: str            # detected_both / only_a / only_b / overlooked_both
    recall_a: float
    recall_b: float

    def to_dict(self):
        return {
            "image_id": self.image_id,
            "instance_id": self.instance_id,
            "distance_m": self.distance_m,
            "bearing_deg": self.bearing_deg,
            "category": self.category,
            "recall_a": self.recall_a,
            "recall_b": self.recall_b,
        }


@dataclass(frozen=True)
class ConsequenceReport:
    threshold: float
    zones: tuple
    precision_a: PixelPrecision
    precision_b: PixelPrecision
    points: tuple = field(default_factory=tuple)
    rule_names: tuple = ("a", "b")

    def zone(self, name):
        for z in self.zones:
            if z.name == name:
                return z
        raise KeyError(name)

    def to_dict(self):
        return {
            "threshold": self.threshold,
            "rule_names": list(self.rule_names),
            "zones": [z.to_dict() for z in self.zones],
            "precision_a": self.precision_a.to_dict(),
            "precision_b": self.precision_b.to_dict(),
            "points": [p.to_dict() for p in self.points],
        }


def _human_pixel_counts(pred, gt, human_class):
    valid = gt != IGNORE_ID
    predicted_human = (pred == human_class) & valid
    tp = int(np.count_nonzero(predicted_human & (gt == human_class)))
    return tp, int(np.count_nonzero(predicted_human)) - tp


def consequences(pred_a, pred_b, gt, instance_rasters, instance_records,
                 zones=None, threshold=0.5, human_class=HUMAN_CLASS,
                 rule_names=("a", "b")):
    """Compare two decision rules on every ground-truth human instance.

    Parameters
    ----------
    pred_a, pred_b, gt, instance_rasters : dict
        image_id -> (H, W) arrays; all four must cover the same image ids
        with matching shapes.
    instance_records : iterable of InstanceRecord
        Positions and sizes; only records whose class is "human" enter the
        safety tally.
    zones : ZoneConfig or (name, max_distance) sequence
    threshold : float
        Detection threshold on instance recall (strict).

    Returns a :class:`ConsequenceReport` with per-zone tallies, per-rule
    pixel precision and the bird's-eye point list.
    """
    cfg = zones if isinstance(zones, ZoneConfig) else ZoneConfig(
        zones or DEFAULT_ZONES
    )
    ids = set(gt)
    for name, d in (("pred_a", pred_a), ("pred_b", pred_b),
                    ("instances", instance_rasters)):
        if set(d) != ids:
            raise DatasetMismatch(
                f"{name} covers {len(d)} images, ground truth {len(ids)}"
            )
    tp_a = fp_a = tp_b = fp_b = 0
    for image_id in ids:
        g = check_label_map(gt[image_id])
        for name, d in (("pred_a", pred_a), ("pred_b", pred_b),
                        ("instances", instance_rasters)):
            if np.asarray(d[image_id]).shape != g.shape:
                raise DatasetMismatch(
                    f"{name} shape differs from ground truth on "
                    f"image {image_id!r}"
                )
        ta, fa = _human_pixel_counts(pred_a[image_id], g, human_class)
        tb, fb = _human_pixel_counts(pred_b[image_id], g, human_class)
        tp_a += ta
        fp_a += fa
        tp_b += tb
        fp_b += fb

    human_name = COARSE_NAMES[human_class]
    tallies = {n: dict.fromkeys(
        ("total", "detected_both", "only_a", "only_b", "overlooked_both"), 0)
        for n in cfg.names}
    points = []
    for rec in instance_records:
        if rec.image_id not in ids:
            raise DatasetMismatch(
                f"instance {rec.instance_id} references unknown image "
                f"{rec.image_id!r}"
            )
        if rec.class_name != human_name:
            continue
        raster = instance_rasters[rec.image_id]
        ra = instance_recall(pred_a[rec.image_id], raster, rec.instance_id,
                             human_class)
        rb = instance_recall(pred_b[rec.image_id], raster, rec.instance_id,
                             human_class)
        det_a = ra > threshold
        det_b = rb > threshold
        if det_a and det_b:
            category = "detected_both"
        elif det_a:
            category = "only_a"
        elif det_b:
            category = "only_b"
        else:
            category = "overlooked_both"
        for zone_name in cfg.membership(rec.distance_m):
            tallies[zone_name]["total"] += 1
            tallies[zone_name][category] += 1
        points.append(BirdseyePoint(
            image_id=rec.image_id,
            instance_id=rec.instance_id,
            distance_m=rec.distance_m,
            bearing_deg=rec.bearing_deg,
            category=category,
            recall_a=ra,
            recall_b=rb,
        ))
    zone_tallies = tuple(
        ZoneTally(name=n, max_distance_m=d, **tallies[n]) for n, d in cfg.zones
    )
    return ConsequenceReport(
        threshold=threshold,
        zones=zone_tallies,
        precision_a=PixelPrecision(tp_a, fp_a),
        precision_b=PixelPrecision(tp_b, fp_b),
        points=tuple(points),
        rule_names=tuple(rule_names),
    )
