"""Reduction of the 19 Cityscapes evaluation classes to 6 aggregates.

The aggregates (drivable, nondrivable, static, info, human, dynamic) are the
categories rated in the survey; the fine class *sky* maps to none of them and
is ignored, since failing to detect sky causes no street-level hazard.
Probability mass on an ignored channel is dropped and the pixel renormalized;
near-pure-sky pixels (remaining mass below ``MIN_MASS``) become ignore pixels
rather than renormalized noise.
"""

import json
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .errors import SchemaViolation, ShapeMismatch, UnknownClass
from .validation import IGNORE_ID, check_label_map, check_probabilities

FINE_NAMES = (
    "road", "sidewalk", "building", "wall", "fence", "pole",
    "traffic light", "traffic sign", "vegetation", "terrain", "sky",
    "person", "rider", "car", "truck", "bus", "train", "motorcycle",
    "bicycle",
)

COARSE_NAMES = ("drivable", "nondrivable", "static", "info", "human", "dynamic")

_DEFAULT_MAP = {
    "road": "drivable",
    "sidewalk": "nondrivable",
    "terrain": "nondrivable",
    "building": "static",
    "wall": "static",
    "fence": "static",
    "pole": "static",
    "vegetation": "static",
    "traffic light": "info",
    "traffic sign": "info",
    "person": "human",
    "rider": "human",
    "car": "dynamic",
    "truck": "dynamic",
    "bus": "dynamic",
    "train": "dynamic",
    "motorcycle": "dynamic",
    "bicycle": "dynamic",
}

MIN_MASS = 1e-6


@dataclass(frozen=True)
class ClassTaxonomy:
    """Total mapping from fine class ids to coarse ids (or IGNORE)."""

    fine_names: tuple
    coarse_names: tuple
    fine_to_coarse: tuple  # per fine index: coarse index, or IGNORE_ID

    def __post_init__(self):
        object.__setattr__(self, "fine_names", tuple(self.fine_names))
        object.__setattr__(self, "coarse_names", tuple(self.coarse_names))
        object.__setattr__(self, "fine_to_coarse", tuple(self.fine_to_coarse))
        if len(self.fine_to_coarse) != len(self.fine_names):
            raise ShapeMismatch("mapping must cover every fine class")
        members = set(c for c in self.fine_to_coarse if c != IGNORE_ID)
        if members != set(range(len(self.coarse_names))):
            raise ValueError("every coarse class needs at least one fine member")

    @property
    def n_fine(self):
        return len(self.fine_names)

    @property
    def n_coarse(self):
        return len(self.coarse_names)

    @property
    def ignored_fine(self):
        """Fine class indices that map to IGNORE (e.g. sky)."""
        return tuple(i for i, c in enumerate(self.fine_to_coarse)
                     if c == IGNORE_ID)

    def map_label(self, fine_label):
        """Coarse id for one fine label; IGNORE passes through."""
        if fine_label == IGNORE_ID:
            return IGNORE_ID
        if not 0 <= fine_label < self.n_fine:
            raise UnknownClass(f"fine label {fine_label} out of range")
        return self.fine_to_coarse[fine_label]

    def map_label_map(self, labels):
        """Pixel-wise :meth:`map_label` over an HxW raster."""
        lm = check_label_map(labels, self.n_fine)
        lut = np.full(IGNORE_ID + 1, IGNORE_ID, dtype=np.uint8)
        lut[: self.n_fine] = self.fine_to_coarse
        return lut[lm]

    def aggregate_probabilities(self, probs):
        """Sum fine probability channels into coarse ones.

        ``probs`` may carry all fine channels (ignored channels are dropped
        and each pixel renormalized) or only the non-ignored ones (plain
        sums). Works on a vector, an (n, N) batch or an (H, W, N) map.

        Returns ``(coarse, dropped)`` where ``dropped`` is a boolean mask of
        pixels whose remaining mass fell below ``MIN_MASS``; those are filled
        with a uniform distribution and should be treated as ignore pixels.
        """
        arr = np.asarray(probs, dtype=np.float64)
        kept = [i for i in range(self.n_fine) if i not in self.ignored_fine]
        if arr.shape[-1] == self.n_fine:
            arr = check_probabilities(arr)
            arr = arr[..., kept]
        elif arr.shape[-1] == len(kept):
            arr = check_probabilities(arr)
        else:
            raise ShapeMismatch(
                f"expected {self.n_fine} or {len(kept)} fine channels, "
                f"got {arr.shape[-1]}"
            )
        coarse = np.zeros(arr.shape[:-1] + (self.n_coarse,))
        for pos, fine_idx in enumerate(kept):
            coarse[..., self.fine_to_coarse[fine_idx]] += arr[..., pos]
        mass = coarse.sum(axis=-1)
        dropped = mass < MIN_MASS
        safe = np.where(dropped, 1.0, mass)
        coarse /= safe[..., np.newaxis]
        if np.any(dropped):
            coarse[dropped] = 1.0 / self.n_coarse
        return coarse, dropped

    def to_dict(self):
        mapping = {}
        for i, name in enumerate(self.fine_names):
            c = self.fine_to_coarse[i]
            if c != IGNORE_ID:
                mapping[name] = self.coarse_names[c]
        return {
            "fine": list(self.fine_names),
            "coarse": list(self.coarse_names),
            "map": mapping,
            "ignore": [self.fine_names[i] for i in self.ignored_fine],
        }

    @classmethod
    def from_dict(cls, d):
        for key in ("fine", "coarse", "map"):
            if key not in d:
                raise SchemaViolation(f"field '{key}': missing")
        fine = tuple(d["fine"])
        coarse = tuple(d["coarse"])
        ignore = set(d.get("ignore", ()))
        unknown = (set(d["map"]) | ignore) - set(fine)
        if unknown:
            raise SchemaViolation(f"unknown fine class {sorted(unknown)[0]!r}")
        mapping = []
        for name in fine:
            if name in ignore:
                mapping.append(IGNORE_ID)
            elif name in d["map"]:
                target = d["map"][name]
                if target not in coarse:
                    raise SchemaViolation(
                        f"field 'map': {name!r} maps to unknown coarse class "
                        f"{target!r}"
                    )
                mapping.append(coarse.index(target))
            else:
                raise SchemaViolation(
                    f"field 'map': fine class {name!r} neither mapped nor ignored"
                )
        return cls(fine, coarse, tuple(mapping))

    @classmethod
    def from_json(cls, path):
        with open(path, encoding="utf-8") as f:
            try:
                d = json.load(f)
            except json.JSONDecodeError as exc:
                raise SchemaViolation(f"taxonomy file is not valid JSON: {exc}")
        return cls.from_dict(d)


def default_taxonomy():
    """The shipped 19-to-6 street-scene taxonomy (sky ignored)."""
    mapping = tuple(
        COARSE_NAMES.index(_DEFAULT_MAP[name]) if name in _DEFAULT_MAP
        else IGNORE_ID
        for name in FINE_NAMES
    )
    return ClassTaxonomy(FINE_NAMES, COARSE_NAMES, mapping)


DEFAULT_TAXONOMY = default_taxonomy()

HUMAN_CLASS = COARSE_NAMES.index("human")
DRIVABLE_CLASS = COARSE_NAMES.index("drivable")


class ClassAggregator(TransformerMixin, BaseEstimator):
    """Transformer squashing fine class probabilities into coarse ones.

    Stateless wrapper around :meth:`ClassTaxonomy.aggregate_probabilities`
    so the reduction composes with pipelines; ``transform`` accepts
    (n, N_fine) batches or (H, W, N_fine) maps and returns the coarse array
    (the dropped-pixel mask is available via :meth:`transform_with_mask`).
    """

    def __init__(self, taxonomy=None):
        self.taxonomy = taxonomy

    def fit(self, X=None, y=None):
        self.taxonomy_ = self.taxonomy or DEFAULT_TAXONOMY
        return self

    def transform(self, X):
        if not hasattr(self, "taxonomy_"):
            self.fit()
        coarse, _ = self.taxonomy_.aggregate_probabilities(X)
        return coarse

    def transform_with_mask(self, X):
        if not hasattr(self, "taxonomy_"):
            self.fit()
        return self.taxonomy_.aggregate_probabilities(X)
