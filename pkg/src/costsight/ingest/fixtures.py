"""Deterministic synthetic datasets for desk-scale evaluation.

Scenes are layered street mock-ups (static top band, nondrivable strip,
drivable bottom) with blob instances of exact pixel counts, so every derived
quantity (recalls, counts, metrics) is enumerable by hand. Probability maps
put a configurable peak on an *effective* label that differs from the ground
truth on a controlled fraction of each instance's pixels; with zero noise the
argmax recovers the ground truth exactly. Everything is a pure function of
(spec, seed) through counter-based generators.
"""

import math
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from ..consequence import FIELD_HALF_ANGLE_DEG, InstanceRecord
from ..costmatrix import AnswerRecord, MAX_LEVEL
from ..errors import InvalidSpec
from ..taxonomy import COARSE_NAMES, DRIVABLE_CLASS, HUMAN_CLASS
from . import formats
from .manifest import DatasetManifest, ManifestEntry

_STATIC = COARSE_NAMES.index("static")
_NONDRIVABLE = COARSE_NAMES.index("nondrivable")
_INFO = COARSE_NAMES.index("info")
_DYNAMIC = COARSE_NAMES.index("dynamic")


@dataclass(frozen=True)
class FixtureSpec:
    images: int = 4
    height: int = 64
    width: int = 96
    humans_per_image: int = 2
    vehicles_per_image: int = 2
    info_per_image: int = 1
    min_instance_pixels: int = 12
    max_instance_pixels: int = 80
    label_noise: float = 0.0       # share of instance pixels mislabelled
    noise_jitter: float = 0.0      # per-instance spread around label_noise
    background_noise: float = 0.0  # share of background pixels mislabelled
    peak: float = 0.9              # probability mass on the effective label
    min_distance_m: float = 3.0
    max_distance_m: float = 60.0

    def __post_init__(self):
        if self.images < 1 or self.height < 8 or self.width < 8:
            raise InvalidSpec("need at least 1 image of at least 8x8 pixels")
        if min(self.humans_per_image, self.vehicles_per_image,
               self.info_per_image) < 0:
            raise InvalidSpec("instance counts must be nonnegative")
        if not 1 <= self.min_instance_pixels <= self.max_instance_pixels:
            raise InvalidSpec("instance pixel bounds out of order")
        if self.max_instance_pixels > self.height * self.width // 4:
            raise InvalidSpec("instances would cover too much of the image")
        for name in ("label_noise", "noise_jitter", "background_noise"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise InvalidSpec(f"{name} must lie in [0, 1]")
        n = len(COARSE_NAMES)
        if not 1.0 / n < self.peak <= 1.0:
            raise InvalidSpec(f"peak must lie in (1/{n}, 1]")
        if not 0 <= self.min_distance_m < self.max_distance_m:
            raise InvalidSpec("distance bounds out of order")

    def to_dict(self):
        return asdict(self)


def _rng(seed, stream):
    key = np.array([seed & ((1 << 64) - 1), stream], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _blob_pixels(height, width, center, count):
    """The ``count`` grid pixels nearest to center, deterministic order."""
    cy, cx = center
    r = int(math.ceil(math.sqrt(count / math.pi))) + 2
    y0, y1 = max(0, cy - r), min(height, cy + r + 1)
    x0, x1 = max(0, cx - r), min(width, cx + r + 1)
    yy, xx = np.mgrid[y0:y1, x0:x1]
    yy, xx = yy.ravel(), xx.ravel()
    d2 = (yy - cy) ** 2 + (xx - cx) ** 2
    order = np.lexsort((xx, yy, d2))[:count]
    return yy[order], xx[order]


def _scene(spec, rng, image_id, first_instance_id=1):
    """One synthetic image: gt labels, instance raster, metadata records."""
    h, w = spec.height, spec.width
    gt = np.empty((h, w), dtype=np.uint8)
    gt[: h // 3] = _STATIC
    gt[h // 3: h // 2] = _NONDRIVABLE
    gt[h // 2:] = DRIVABLE_CLASS
    inst = np.zeros((h, w), dtype=np.uint16)
    placements = (
        [(HUMAN_CLASS, (h // 3, h - 1))] * spec.humans_per_image
        + [(_DYNAMIC, (h // 2, h - 1))] * spec.vehicles_per_image
        + [(_INFO, (0, h // 2))] * spec.info_per_image
    )
    next_id = first_instance_id
    for cls, (ymin, ymax) in placements:
        count = int(rng.integers(spec.min_instance_pixels,
                                 spec.max_instance_pixels + 1))
        cy = int(rng.integers(ymin, ymax + 1))
        cx = int(rng.integers(0, w))
        yy, xx = _blob_pixels(h, w, (cy, cx), count)
        gt[yy, xx] = cls
        inst[yy, xx] = next_id
        next_id += 1
    records = []
    for instance_id in range(first_instance_id, next_id):
        mask = inst == instance_id
        visible = int(np.count_nonzero(mask))
        if visible == 0:
            continue  # fully covered by a later blob
        cls = int(gt[mask][0])
        records.append(InstanceRecord(
            image_id=image_id,
            instance_id=instance_id,
            class_name=COARSE_NAMES[cls],
            distance_m=round(float(rng.uniform(spec.min_distance_m,
                                               spec.max_distance_m)), 2),
            pixel_count=visible,
            bearing_deg=round(float(rng.uniform(-FIELD_HALF_ANGLE_DEG + 2,
                                                FIELD_HALF_ANGLE_DEG - 2)), 2),
            provenance="synthetic fixture",
        ))
    return gt, inst, records, next_id


def _effective_labels(spec, rng, gt, inst, records):
    """Ground truth with the controlled share of pixels flipped."""
    eff = gt.copy()
    for rec in records:
        noise = spec.label_noise
        if spec.noise_jitter > 0:
            noise = float(np.clip(
                noise + rng.uniform(-spec.noise_jitter, spec.noise_jitter),
                0.0, 1.0,
            ))
        flips = int(round(noise * rec.pixel_count))
        if flips == 0:
            continue
        yy, xx = np.nonzero(inst == rec.instance_id)
        pick = rng.choice(yy.size, size=flips, replace=False)
        cls = COARSE_NAMES.index(rec.class_name)
        wrong = DRIVABLE_CLASS if cls != DRIVABLE_CLASS else _STATIC
        eff[yy[pick], xx[pick]] = wrong
    if spec.background_noise > 0:
        bg = np.nonzero(inst == 0)
        n_bg = bg[0].size
        flips = int(round(spec.background_noise * n_bg))
        if flips:
            pick = rng.choice(n_bg, size=flips, replace=False)
            yy, xx = bg[0][pick], bg[1][pick]
            shift = rng.integers(1, len(COARSE_NAMES), size=flips)
            eff[yy, xx] = (eff[yy, xx] + shift) % len(COARSE_NAMES)
    return eff


def _probability_map(spec, eff):
    n = len(COARSE_NAMES)
    rest = (1.0 - spec.peak) / (n - 1)
    pm = np.full((*eff.shape, n), rest, dtype=np.float64)
    hh, ww = np.indices(eff.shape)
    pm[hh, ww, eff] = spec.peak
    return pm.astype(np.float32)


def generate_fixture(spec, seed, out_dir):
    """Write a synthetic dataset under ``out_dir`` and return its manifest.

    Layout: ``pmaps/``, ``gt/``, ``inst/`` rasters per image plus a shared
    ``instances.jsonl`` and ``manifest.json``. Instance ids are unique across
    the whole dataset so rasters and metadata can be joined without the
    image id.
    """
    root = Path(out_dir)
    for sub in ("pmaps", "gt", "inst"):
        (root / sub).mkdir(parents=True, exist_ok=True)
    entries = []
    all_records = []
    next_instance_id = 1
    for i in range(spec.images):
        rng = _rng(seed, i)
        image_id = f"img_{i:04d}"
        gt, inst, records, next_instance_id = _scene(
            spec, rng, image_id, next_instance_id
        )
        eff = _effective_labels(spec, rng, gt, inst, records)
        pm = _probability_map(spec, eff)
        formats.write_pmap(root / "pmaps" / f"{image_id}.pmap", pm)
        formats.write_lmap(root / "gt" / f"{image_id}.lmap", gt)
        formats.write_imap(root / "inst" / f"{image_id}.imap", inst)
        entries.append(ManifestEntry(
            image_id=image_id,
            pmap=f"pmaps/{image_id}.pmap",
            gt=f"gt/{image_id}.lmap",
            instances=f"inst/{image_id}.imap",
            meta="instances.jsonl",
        ))
        all_records.extend(records)
    formats.write_instance_records(root / "instances.jsonl", all_records)
    manifest = DatasetManifest(
        root=root,
        entries=tuple(entries),
        n_classes=len(COARSE_NAMES),
        taxonomy=None,
        format_versions={"pmap": "PMAPv001", "lmap": "LMAPv001",
                         "imap": "IMAPv001"},
        extra={"seed": seed, "spec": spec.to_dict()},
    )
    manifest.save(root / "manifest.json")
    return manifest


_DEFAULT_PROFILE_SHIFT = {
    # street intuition: overlooking humans is worst, drivable-row errors bad
    "human_column": 1.2,
    "drivable_row": 0.6,
}


def _default_cell_means(n_classes):
    means = np.full((n_classes, n_classes), 3.0)
    means[:, HUMAN_CLASS] += _DEFAULT_PROFILE_SHIFT["human_column"]
    means[DRIVABLE_CLASS, :] += _DEFAULT_PROFILE_SHIFT["drivable_row"]
    np.fill_diagonal(means, np.nan)
    return means


def generate_answers(perspective_counts, seed, gender_counts=None,
                     cell_means=None, group_shift=None, within_sd=1.0,
                     n_classes=6, answers_per_participant=10,
                     image_pool=200):
    """Synthesize an answer corpus with controlled group structure.

    Parameters
    ----------
    perspective_counts : dict
        Answers per perspective, e.g. ``{"passenger": 2744, "external": 2301}``.
    gender_counts : dict or None
        Answers per gender (None key = undisclosed); total must match. By
        default genders split the corpus roughly in half with 2% undisclosed.
    cell_means : (N, N) array or None
        Target mean exponent per (predicted, true) cell; defaults to a mild
        street-intuition profile around level 3.
    group_shift : dict or None
        Additive mean shift per group label (applies to whichever of the
        perspective/gender labels matches), e.g. ``{"external": 0.5}``.
    within_sd : float
        Standard deviation of the per-answer noise before rounding/clipping
        to the integer level scale.
    """
    total = sum(perspective_counts.values())
    if total < 1:
        raise InvalidSpec("need at least one answer")
    if gender_counts is None:
        n_f = int(total * 0.49)
        n_m = int(total * 0.49)
        gender_counts = {"female": n_f, "male": n_m,
                         None: total - n_f - n_m}
    if sum(gender_counts.values()) != total:
        raise InvalidSpec("gender counts must sum to the perspective total")
    rng = _rng(seed, 0)
    perspectives = np.repeat(
        list(perspective_counts), list(perspective_counts.values())
    )
    genders = np.repeat(
        [g if g is not None else "" for g in gender_counts],
        list(gender_counts.values()),
    )
    rng.shuffle(genders)
    means = _default_cell_means(n_classes) if cell_means is None \
        else np.asarray(cell_means, dtype=np.float64)
    shifts = group_shift or {}
    answers = []
    participant_of = {}
    for i in range(total):
        perspective = str(perspectives[i])
        gender = str(genders[i]) or None
        pkey = (perspective, gender, i // answers_per_participant)
        participant = participant_of.setdefault(
            pkey, f"p{len(participant_of):05d}"
        )
        k = int(rng.integers(1, n_classes + 1))
        shift = sum(
            v for label, v in shifts.items()
            if label in (perspective, gender)
        )
        severities = {}
        for j in range(1, n_classes + 1):
            if j == k:
                continue
            mu = means[j - 1, k - 1] + shift
            level = int(round(rng.normal(mu, within_sd)))
            severities[j] = int(np.clip(level, 0, MAX_LEVEL))
        answers.append(AnswerRecord(
            participant_id=participant,
            perspective=perspective,
            gender=gender,
            image_id=f"img_{int(rng.integers(0, image_pool)):05d}",
            target_class=k,
            severities=severities,
            timestamp="2026-01-01T00:00:00Z",
            n_classes=n_classes,
        ))
    return answers
