"""Two-group F-test on severity matrices with bootstrap p-values.

Answers are indexed by group, true target class and confused class; the
statistic compares between-group to within-group variation over all
off-diagonal matrix cells at once:

    MS_B = sum_k sum_j  n(1,k) * (mean(1,k,j) - mean(.,k,j))**2
                      + n(2,k) * (mean(2,k,j) - mean(.,k,j))**2
    MS_W = (sum over all answers and cells of squared deviation from the
            group cell mean) / (total answers - 2 * N * (N - 1))
    F    = MS_B / MS_W

The p-value is simulated: group labels are reshuffled S times and the
fraction of shuffles with F_random strictly above the observed F is
reported. Shuffle i draws from a counter-based generator keyed on
(seed, i), so results are bit-identical for a given (seed, S) no matter
how iterations are batched or parallelized.
"""

from dataclasses import dataclass

import numpy as np

from .errors import (
    InsufficientData,
    InvalidShuffleCount,
    ShapeMismatch,
    ZeroWithinVariance,
)

SHUFFLE_MODES = ("pooled", "per_target")

# label order for the two standard splits (group 0 first)
_CANONICAL_LABELS = {
    "perspective": ("passenger", "external"),
    "gender": ("female", "male"),
}

_BATCH = 512
_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class GroupedAnswers:
    """Answer levels of exactly two groups, ready for the F-test.

    ``levels`` holds one row per answer with the exponent for each confused
    class and 0.0 in the target column (that cell carries no rating and
    contributes nothing to either variance term).
    """

    group: np.ndarray      # (n,) int8 in {0, 1}
    target: np.ndarray     # (n,) int8, 0-based true class
    levels: np.ndarray     # (n, N) float64
    labels: tuple          # names of group 0 and group 1
    n_classes: int = 6

    def __post_init__(self):
        g = np.array(self.group, dtype=np.int8, copy=True)
        t = np.array(self.target, dtype=np.int8, copy=True)
        x = np.array(self.levels, dtype=np.float64, copy=True)
        if not (g.shape[0] == t.shape[0] == x.shape[0]):
            raise ShapeMismatch("group, target and levels lengths differ")
        if x.ndim != 2 or x.shape[1] != self.n_classes:
            raise ShapeMismatch(f"levels must be (n, {self.n_classes})")
        if len(self.labels) != 2:
            raise ValueError("exactly two group labels required")
        for l in (0, 1):
            if not np.any(g == l):
                raise ValueError(f"group {self.labels[l]!r} is empty")
        for arr in (g, t, x):
            arr.flags.writeable = False
        object.__setattr__(self, "group", g)
        object.__setattr__(self, "target", t)
        object.__setattr__(self, "levels", x)
        object.__setattr__(self, "labels", tuple(self.labels))

    @property
    def n_answers(self):
        return self.group.shape[0]

    @property
    def cell_counts(self):
        """n(l, k): answers per (group, target class), shape (2, N)."""
        counts = np.zeros((2, self.n_classes), dtype=np.int64)
        for l in (0, 1):
            counts[l] = np.bincount(
                self.target[self.group == l], minlength=self.n_classes
            )
        return counts

    @property
    def group_cell_means(self):
        """Per-group mean exponent per (target, confused) cell, (2, N, N).

        Indexed [group, predicted j, true k]; NaN where no answers exist.
        """
        n = self.n_classes
        means = np.full((2, n, n), np.nan)
        for l in (0, 1):
            for k in range(n):
                sel = (self.group == l) & (self.target == k)
                if not np.any(sel):
                    continue
                col = self.levels[sel].mean(axis=0)
                for j in range(n):
                    if j != k:
                        means[l, j, k] = col[j]
        return means

    @classmethod
    def from_answers(cls, answers, split, labels=None, n_classes=6):
        """Build groups from a corpus by an attribute split.

        ``split`` is an AnswerRecord field name ("perspective", "gender", ...)
        or a callable returning a label per answer. Records whose label is
        None or outside the two ``labels`` are excluded. With ``labels``
        unset, the two distinct values found must be exactly two.
        """
        key = split if callable(split) else (lambda a: getattr(a, split))
        tagged = [(key(a), a) for a in answers]
        tagged = [(v, a) for v, a in tagged if v is not None]
        if labels is None and split in _CANONICAL_LABELS:
            labels = _CANONICAL_LABELS[split]
            tagged = [(v, a) for v, a in tagged if v in labels]
        elif labels is None:
            found = sorted({v for v, _ in tagged})
            if len(found) != 2:
                raise ValueError(
                    f"split produced {len(found)} labels {found}; pass "
                    "labels=(a, b) to select two"
                )
            labels = tuple(found)
        else:
            labels = tuple(labels)
            tagged = [(v, a) for v, a in tagged if v in labels]
        group, target, rows = [], [], []
        for v, a in tagged:
            group.append(labels.index(v))
            target.append(a.target_class - 1)
            row = np.zeros(n_classes)
            for j, level in a.severities.items():
                row[j - 1] = level
            rows.append(row)
        if not rows:
            raise ValueError("no answers left after the split")
        return cls(
            np.array(group, dtype=np.int8),
            np.array(target, dtype=np.int8),
            np.array(rows, dtype=np.float64),
            labels,
            n_classes,
        )


@dataclass(frozen=True)
class FTestResult:
    ms_between: float
    ms_within: float
    f: float
    p_value: float
    shuffles: int
    seed: int
    exceed_count: int
    shuffle_mode: str
    group_labels: tuple
    cell_counts: np.ndarray    # (2, N)
    group_means: np.ndarray    # (2, N, N), NaN off support

    def to_dict(self):
        means = [
            [[None if np.isnan(v) else v for v in row] for row in grid]
            for grid in self.group_means.tolist()
        ]
        return {
            "ms_between": self.ms_between,
            "ms_within": self.ms_within,
            "f": self.f,
            "p_value": self.p_value,
            "shuffles": self.shuffles,
            "seed": self.seed,
            "exceed_count": self.exceed_count,
            "shuffle_mode": self.shuffle_mode,
            "group_labels": list(self.group_labels),
            "cell_counts": self.cell_counts.tolist(),
            "group_means": means,
        }


def _df_constant(n_classes):
    # free cells of the two rating matrices: 2 * N * (N - 1)
    return 2 * n_classes * (n_classes - 1)


class _Strata:
    """Per-target-class views used by both the observed and shuffled stats."""

    def __init__(self, g):
        self.n = g.n_answers
        self.df = self.n - _df_constant(g.n_classes)
        self.items = []
        for k in range(g.n_classes):
            idx = np.nonzero(g.target == k)[0]
            if idx.size == 0:
                continue
            x = g.levels[idx]
            self.items.append({
                "idx": idx,
                "x": x,
                "xsq": x * x,
                "sum": x.sum(axis=0),
                "sumsq": (x * x).sum(axis=0),
                "size": idx.size,
            })


def _batch_stats(strata, labels_batch):
    """(ms_between, within_ss) for a (B, n) batch of 0/1 label vectors."""
    B = labels_batch.shape[0]
    msb = np.zeros(B)
    wss = np.zeros(B)
    for st in strata.items:
        lab = labels_batch[:, st["idx"]]
        mask0 = (lab == 0).astype(np.float64)
        n0 = mask0.sum(axis=1)
        n1 = st["size"] - n0
        s0 = mask0 @ st["x"]
        q0 = mask0 @ st["xsq"]
        s1 = st["sum"] - s0
        q1 = st["sumsq"] - q0
        mp = st["sum"] / st["size"]
        with np.errstate(divide="ignore", invalid="ignore"):
            m0 = np.where(n0[:, None] > 0, s0 / n0[:, None], 0.0)
            m1 = np.where(n1[:, None] > 0, s1 / n1[:, None], 0.0)
        d0 = np.where(n0[:, None] > 0, m0 - mp, 0.0)
        d1 = np.where(n1[:, None] > 0, m1 - mp, 0.0)
        msb += (n0[:, None] * d0 * d0 + n1[:, None] * d1 * d1).sum(axis=1)
        wss += (
            (q0 - n0[:, None] * m0 * m0) + (q1 - n1[:, None] * m1 * m1)
        ).sum(axis=1)
    # one-pass sums can round a hair below zero on constant cells
    np.maximum(wss, 0.0, out=wss)
    return msb, wss


def _f_from(msb, msw):
    """F with the degenerate conventions: 0/0 -> 0, x/0 -> inf."""
    if np.ndim(msb) == 0:
        if msw == 0.0:
            return 0.0 if msb == 0.0 else np.inf
        return float(msb / msw)
    with np.errstate(divide="ignore", invalid="ignore"):
        f = msb / msw
    f[(msw == 0.0) & (msb == 0.0)] = 0.0
    f[(msw == 0.0) & (msb > 0.0)] = np.inf
    return f


def f_statistic(g):
    """Observed (MS_B, MS_W, F) for a two-group corpus.

    Raises
    ------
    InsufficientData
        When the degrees of freedom (answers minus 2*N*(N-1)) are not
        positive.
    ZeroWithinVariance
        When all answers agree within every cell while the group means
        differ; F would be infinite.
    """
    strata = _Strata(g)
    if strata.df <= 0:
        raise InsufficientData(
            f"{g.n_answers} answers give df = {strata.df}; need more than "
            f"{_df_constant(g.n_classes)}"
        )
    msb, wss = _batch_stats(strata, g.group[np.newaxis, :])
    ms_between = float(msb[0])
    ms_within = float(wss[0] / strata.df)
    if ms_within == 0.0 and ms_between > 0.0:
        raise ZeroWithinVariance(
            "all answers identical within every cell while group means "
            "differ; F is undefined"
        )
    return ms_between, ms_within, _f_from(ms_between, ms_within)


def _iteration_rng(seed, i):
    key = np.array([seed & _MASK64, i], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _shuffled_labels(g, strata, seed, i, mode):
    """Label vector for shuffle ``i``; deterministic in (seed, i, mode)."""
    rng = _iteration_rng(seed, i)
    if mode == "pooled":
        return g.group[rng.permutation(g.n_answers)]
    out = np.empty_like(g.group)
    for st in strata.items:
        idx = st["idx"]
        out[idx] = g.group[idx][rng.permutation(idx.size)]
    return out


def bootstrap_p(g, shuffles, seed, mode="pooled"):
    """Simulated p-value: share of label reshuffles with F_random > F.

    Parameters
    ----------
    g : GroupedAnswers
    shuffles : int
        Number of reshuffles S (positive).
    seed : int
        64-bit key for the counter-based generator.
    mode : "pooled" or "per_target"
        "pooled" permutes labels across the whole corpus (group totals
        preserved); "per_target" permutes within each true-class stratum
        (per-cell counts preserved).
    """
    if not isinstance(shuffles, int) or shuffles < 1:
        raise InvalidShuffleCount(f"shuffle count must be >= 1, got {shuffles!r}")
    if mode not in SHUFFLE_MODES:
        raise ValueError(f"mode must be one of {SHUFFLE_MODES}")
    ms_between, ms_within, f_obs = f_statistic(g)
    strata = _Strata(g)
    exceed = 0
    for start in range(0, shuffles, _BATCH):
        stop = min(start + _BATCH, shuffles)
        batch = np.stack([
            _shuffled_labels(g, strata, seed, i, mode)
            for i in range(start, stop)
        ])
        msb, wss = _batch_stats(strata, batch)
        f_rand = _f_from(msb, wss / strata.df)
        exceed += int(np.count_nonzero(f_rand > f_obs))
    return FTestResult(
        ms_between=ms_between,
        ms_within=ms_within,
        f=float(f_obs),
        p_value=exceed / shuffles,
        shuffles=shuffles,
        seed=seed,
        exceed_count=exceed,
        shuffle_mode=mode,
        group_labels=g.labels,
        cell_counts=g.cell_counts,
        group_means=g.group_cell_means,
    )
