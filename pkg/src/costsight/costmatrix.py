"""Confusion cost matrices and their aggregation from survey answers.

Orientation is fixed throughout: **rows are the predicted class, columns the
true class**, so ``entries[j, k]`` prices predicting class ``j`` when the
truth is ``k``. Survey answers rate confusions of one highlighted true class
against every other (predicted) class, so a single answer fills one column.

Severities are exponents: a level ``x`` in {0..6} denotes a cost of ``10**x``
relative to the reference mistake. Aggregation averages these exponents;
averaging the linear costs instead is available as an explicitly named
alternative mode.
"""

import math
import warnings
from dataclasses import dataclass, fields

import numpy as np

from .errors import (
    EmptyGroup,
    IncompleteCoverage,
    IncompleteCoverageWarning,
    InvalidScale,
    InvalidSize,
    SchemaViolation,
    ShapeMismatch,
)
from .validation import check_cost_entries

PERSPECTIVES = ("passenger", "external")

N_LEVELS = 7  # severity exponents 0..6
MAX_LEVEL = N_LEVELS - 1


def _freeze(arr):
    arr = np.array(arr, copy=True)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class CostMatrix:
    """NxN nonnegative confusion costs in linear space, zero diagonal."""

    entries: np.ndarray
    class_names: tuple | None = None

    def __post_init__(self):
        object.__setattr__(self, "entries", check_cost_entries(self.entries))
        if self.class_names is not None:
            names = tuple(self.class_names)
            if len(names) != self.n_classes:
                raise ShapeMismatch(
                    f"{len(names)} class names for {self.n_classes} classes"
                )
            object.__setattr__(self, "class_names", names)

    @property
    def n_classes(self):
        return self.entries.shape[0]

    def to_dict(self):
        return {
            "n_classes": self.n_classes,
            "space": "linear",
            "class_names": list(self.class_names) if self.class_names else None,
            "entries": self.entries.tolist(),
        }

    @classmethod
    def from_dict(cls, d):
        _require(d, "space", str)
        if d["space"] != "linear":
            raise SchemaViolation(
                f"field 'space': expected 'linear', got {d['space']!r}"
            )
        entries = _require(d, "entries", list)
        names = d.get("class_names")
        return cls(np.asarray(entries, dtype=np.float64),
                   tuple(names) if names else None)


@dataclass(frozen=True)
class MeanLogCostMatrix:
    """Per-cell mean severity exponents plus contributing-answer counts.

    ``entries[j, k]`` is the mean exponent for predicting ``j`` when the true
    class is ``k``; NaN marks both the diagonal (costs are fixed at zero and
    never averaged) and off-diagonal cells without any contributing answer.
    """

    entries: np.ndarray
    counts: np.ndarray
    class_names: tuple | None = None

    def __post_init__(self):
        e = np.asarray(self.entries, dtype=np.float64)
        c = np.asarray(self.counts, dtype=np.int64)
        if e.ndim != 2 or e.shape[0] != e.shape[1]:
            raise ShapeMismatch(f"mean-log matrix must be square, got {e.shape}")
        if c.shape != e.shape:
            raise ShapeMismatch("counts shape differs from entries shape")
        off = ~np.eye(e.shape[0], dtype=bool)
        vals = e[off]
        vals = vals[~np.isnan(vals)]
        if vals.size and (vals.min() < 0.0 or vals.max() > MAX_LEVEL):
            raise ValueError(f"mean exponents must lie in [0, {MAX_LEVEL}]")
        if np.any(c < 0):
            raise ValueError("counts must be nonnegative")
        object.__setattr__(self, "entries", _freeze(e))
        object.__setattr__(self, "counts", _freeze(c))
        if self.class_names is not None:
            names = tuple(self.class_names)
            if len(names) != e.shape[0]:
                raise ShapeMismatch(
                    f"{len(names)} class names for {e.shape[0]} classes"
                )
            object.__setattr__(self, "class_names", names)

    @property
    def n_classes(self):
        return self.entries.shape[0]

    @property
    def coverage_ok(self):
        """True when every off-diagonal cell has at least one answer."""
        off = ~np.eye(self.n_classes, dtype=bool)
        return not np.any(np.isnan(self.entries[off]))

    @property
    def empty_cells(self):
        """(predicted, true) index pairs of off-diagonal cells without data."""
        off = ~np.eye(self.n_classes, dtype=bool)
        jj, kk = np.nonzero(off & np.isnan(self.entries))
        return list(zip(jj.tolist(), kk.tolist()))

    def to_dict(self, include_counts=True):
        entries = [
            [None if math.isnan(v) else v for v in row]
            for row in self.entries.tolist()
        ]
        d = {
            "n_classes": self.n_classes,
            "space": "log10",
            "class_names": list(self.class_names) if self.class_names else None,
            "entries": entries,
        }
        if include_counts:
            d["counts"] = self.counts.tolist()
        return d

    @classmethod
    def from_dict(cls, d):
        _require(d, "space", str)
        if d["space"] != "log10":
            raise SchemaViolation(
                f"field 'space': expected 'log10', got {d['space']!r}"
            )
        raw = _require(d, "entries", list)
        entries = np.array(
            [[np.nan if v is None else float(v) for v in row] for row in raw],
            dtype=np.float64,
        )
        if "counts" in d and d["counts"] is not None:
            counts = np.asarray(d["counts"], dtype=np.int64)
        else:
            counts = np.where(np.isnan(entries), 0, 1).astype(np.int64)
        names = d.get("class_names")
        return cls(entries, counts, tuple(names) if names else None)


@dataclass(frozen=True)
class DiffMatrix:
    """Cell-wise absolute differences of two mean-exponent matrices."""

    entries: np.ndarray
    class_names: tuple | None = None

    def __post_init__(self):
        e = np.asarray(self.entries, dtype=np.float64)
        if e.ndim != 2 or e.shape[0] != e.shape[1]:
            raise ShapeMismatch(f"diff matrix must be square, got {e.shape}")
        if np.any(e < 0) or not np.all(np.isfinite(e)):
            raise ValueError("diff entries must be finite and nonnegative")
        if np.any(np.diagonal(e) != 0.0):
            raise ValueError("diff matrix diagonal must be 0")
        object.__setattr__(self, "entries", _freeze(e))

    @property
    def n_classes(self):
        return self.entries.shape[0]

    @property
    def total(self):
        """Sum of all entries."""
        return float(self.entries.sum())


_OPTIONAL_STR_FIELDS = (
    "gender", "age_band", "graduation", "field", "license", "transport",
    "timestamp",
)


@dataclass(frozen=True)
class AnswerRecord:
    """One survey submission: five severity exponents for one true class.

    ``target_class`` is the 1-based index of the highlighted (true) class;
    ``severities`` maps every other 1-based class index to an exponent in
    {0..6}.
    """

    participant_id: str
    perspective: str
    image_id: str
    target_class: int
    severities: dict
    gender: str | None = None
    age_band: str | None = None
    graduation: str | None = None
    field: str | None = None
    license: str | None = None
    transport: str | None = None
    timestamp: str | None = None
    n_classes: int = 6

    def __post_init__(self):
        if self.perspective not in PERSPECTIVES:
            raise SchemaViolation(
                f"field 'perspective': expected one of {PERSPECTIVES}, "
                f"got {self.perspective!r}"
            )
        k = self.target_class
        if not isinstance(k, int) or not 1 <= k <= self.n_classes:
            raise SchemaViolation(
                f"field 'target_class': expected integer in 1..{self.n_classes}, "
                f"got {k!r}"
            )
        sev = dict(self.severities)
        expected = set(range(1, self.n_classes + 1)) - {k}
        missing = expected - sev.keys()
        if missing:
            raise SchemaViolation(
                f"field 'severities': missing class {sorted(missing)[0]}"
            )
        extra = sev.keys() - expected
        if extra:
            raise SchemaViolation(
                f"field 'severities': unexpected class {sorted(extra)[0]}"
            )
        for j, level in sev.items():
            if not isinstance(level, int) or not 0 <= level <= MAX_LEVEL:
                raise SchemaViolation(
                    f"field 'severities[{j}]': expected integer level in "
                    f"0..{MAX_LEVEL}, got {level!r}"
                )
        object.__setattr__(self, "severities", sev)

    def to_dict(self):
        d = {
            "participant_id": self.participant_id,
            "perspective": self.perspective,
            "image_id": self.image_id,
            "target_class": self.target_class,
            "severities": {str(j): x for j, x in sorted(self.severities.items())},
        }
        for name in _OPTIONAL_STR_FIELDS:
            v = getattr(self, name)
            if v is not None:
                d[name] = v
        if self.n_classes != 6:
            d["n_classes"] = self.n_classes
        return d

    @classmethod
    def from_dict(cls, d):
        if not isinstance(d, dict):
            raise SchemaViolation("answer record must be a JSON object")
        kwargs = {
            "participant_id": _require(d, "participant_id", str),
            "perspective": _require(d, "perspective", str),
            "image_id": _require(d, "image_id", str),
            "target_class": _require(d, "target_class", int),
            "n_classes": d.get("n_classes", 6),
        }
        raw = _require(d, "severities", dict)
        sev = {}
        for key, val in raw.items():
            try:
                j = int(key)
            except (TypeError, ValueError):
                raise SchemaViolation(
                    f"field 'severities': class key {key!r} is not an integer"
                ) from None
            sev[j] = val
        kwargs["severities"] = sev
        for name in _OPTIONAL_STR_FIELDS:
            v = d.get(name)
            if v is not None and not isinstance(v, str):
                raise SchemaViolation(f"field '{name}': expected string")
            kwargs[name] = v
        known = {f.name for f in fields(cls)}
        unknown = d.keys() - known
        if unknown:
            raise SchemaViolation(f"unknown field {sorted(unknown)[0]!r}")
        return cls(**kwargs)


def _require(d, key, typ):
    if key not in d or d[key] is None:
        raise SchemaViolation(f"field '{key}': missing")
    v = d[key]
    if typ is int and isinstance(v, bool):
        raise SchemaViolation(f"field '{key}': expected integer")
    if not isinstance(v, typ):
        raise SchemaViolation(f"field '{key}': expected {typ.__name__}")
    return v


def _as_predicate(group):
    if group is None:
        return lambda a: True
    if callable(group):
        return group
    if isinstance(group, dict):
        items = list(group.items())
        return lambda a: all(getattr(a, name) == val for name, val in items)
    raise TypeError("group filter must be None, callable or a field->value dict")


def aggregate_answers(answers, group=None, n_classes=6, mode="exponent"):
    """Average the answers of one group into a :class:`MeanLogCostMatrix`.

    Parameters
    ----------
    answers : iterable of AnswerRecord
    group : None, callable or dict
        Selects the subset to average; ``{"perspective": "passenger"}`` keeps
        records whose field matches, a callable is used as predicate, None
        keeps everything.
    mode : "exponent" or "linear"
        "exponent" (default) averages severity exponents; "linear" averages
        the linear costs ``10**x`` and stores ``log10`` of that mean.

    Raises
    ------
    EmptyGroup
        If the filter selects no answers.

    Warns with :class:`IncompleteCoverageWarning` when some off-diagonal cell
    received no answers; the returned matrix flags those cells as NaN.
    """
    if mode not in ("exponent", "linear"):
        raise ValueError(f"unknown aggregation mode {mode!r}")
    pred = _as_predicate(group)
    sums = np.zeros((n_classes, n_classes), dtype=np.float64)
    counts = np.zeros((n_classes, n_classes), dtype=np.int64)
    n_selected = 0
    for a in answers:
        if not pred(a):
            continue
        if a.n_classes != n_classes:
            raise ShapeMismatch(
                f"answer for {a.n_classes} classes in a {n_classes}-class "
                "aggregation"
            )
        n_selected += 1
        col = a.target_class - 1
        for j, level in a.severities.items():
            value = 10.0 ** level if mode == "linear" else float(level)
            sums[j - 1, col] += value
            counts[j - 1, col] += 1
    if n_selected == 0:
        raise EmptyGroup("answer filter selected zero records")
    entries = np.full((n_classes, n_classes), np.nan)
    filled = counts > 0
    entries[filled] = sums[filled] / counts[filled]
    if mode == "linear":
        entries[filled] = np.log10(entries[filled])
    m = MeanLogCostMatrix(entries, counts)
    if not m.coverage_ok:
        warnings.warn(
            f"{len(m.empty_cells)} off-diagonal cells received no answers",
            IncompleteCoverageWarning,
            stacklevel=2,
        )
    return m


def to_linear(m, class_names=None):
    """Exponentiate a fully covered mean-log matrix into linear costs."""
    if not m.coverage_ok:
        cells = m.empty_cells
        raise IncompleteCoverage(
            f"cannot exponentiate: {len(cells)} empty cells, first at "
            f"(predicted={cells[0][0]}, true={cells[0][1]})"
        )
    entries = 10.0 ** np.nan_to_num(m.entries, nan=-np.inf)
    np.fill_diagonal(entries, 0.0)
    return CostMatrix(entries, class_names or m.class_names)


def robot_matrix(n, class_names=None):
    """Uniform cost matrix: 0 on the diagonal, 1 everywhere else.

    The cost-based rule under this matrix coincides with plain argmax.
    """
    if not isinstance(n, int) or n < 2:
        raise InvalidSize(f"need at least 2 classes, got {n!r}")
    entries = np.ones((n, n)) - np.eye(n)
    return CostMatrix(entries, class_names)


def robot_log_matrix(n, class_names=None):
    """The uniform valuation in exponent space: 0 off-diagonal (cost 10**0)."""
    if not isinstance(n, int) or n < 2:
        raise InvalidSize(f"need at least 2 classes, got {n!r}")
    entries = np.where(np.eye(n, dtype=bool), np.nan, 0.0)
    counts = np.zeros((n, n), dtype=np.int64)
    return MeanLogCostMatrix(entries, counts, class_names)


def scale(c, lam):
    """Multiply every cost by a nonnegative finite factor.

    Decisions are invariant under positive scaling; ``lam == 0`` yields the
    degenerate all-zero matrix (every decision falls to the tie-break).
    """
    if not np.isfinite(lam) or lam < 0:
        raise InvalidScale(f"scale factor must be finite and >= 0, got {lam!r}")
    return CostMatrix(c.entries * float(lam), c.class_names)


def diff_matrix(a, b):
    """Cell-wise |a - b| of mean exponents; both matrices fully covered."""
    if a.n_classes != b.n_classes:
        raise ShapeMismatch(
            f"{a.n_classes}-class vs {b.n_classes}-class matrices"
        )
    for name, m in (("first", a), ("second", b)):
        if not m.coverage_ok:
            raise IncompleteCoverage(f"{name} matrix has empty cells")
    entries = np.abs(np.nan_to_num(a.entries) - np.nan_to_num(b.entries))
    np.fill_diagonal(entries, 0.0)
    return DiffMatrix(entries, a.class_names or b.class_names)
