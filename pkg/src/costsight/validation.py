"""Input validation helpers for arrays crossing the public API.

All checks return validated ``float64``/integer arrays so downstream code can
assume clean inputs, mirroring the ``check_array`` idiom of scikit-learn.
"""

import warnings

import numpy as np

from .errors import InvalidProbability, RenormalizationWarning, ShapeMismatch

IGNORE_ID = 255

# |sum - 1| below this is accepted as-is; up to RENORM_TOL it is renormalized
# with a warning (serialized float32 softmax outputs drift); beyond it is an
# error.
SUM_TOL = 1e-6
RENORM_TOL = 1e-3


def check_cost_entries(entries, n_classes=None):
    """Validate an NxN cost array: zero diagonal, nonnegative, finite.

    Returns a read-only float64 copy.
    """
    c = np.asarray(entries, dtype=np.float64)
    if c.ndim != 2 or c.shape[0] != c.shape[1]:
        raise ShapeMismatch(f"cost matrix must be square, got shape {c.shape}")
    if n_classes is not None and c.shape[0] != n_classes:
        raise ShapeMismatch(
            f"cost matrix has {c.shape[0]} classes, expected {n_classes}"
        )
    if not np.all(np.isfinite(c)):
        raise ValueError("cost matrix entries must be finite")
    if np.any(np.diagonal(c) != 0.0):
        raise ValueError("cost matrix diagonal must be exactly 0")
    if np.any(c < 0.0):
        raise ValueError("cost matrix entries must be nonnegative")
    c = c.copy()
    c.flags.writeable = False
    return c


def check_probabilities(p, n_classes=None):
    """Validate probability vectors over the trailing axis.

    Accepts a single vector, an (n, N) batch, or an (H, W, N) map. Entries
    must lie in [0, 1]; each vector must sum to 1 within ``SUM_TOL``. Sums off
    by at most ``RENORM_TOL`` are renormalized with a warning, anything worse
    raises :class:`InvalidProbability`.

    Returns a float64 array of the same shape.
    """
    arr = np.asarray(p, dtype=np.float64)
    if arr.ndim == 0:
        raise InvalidProbability("probability input must have a class axis")
    if n_classes is not None and arr.shape[-1] != n_classes:
        raise ShapeMismatch(
            f"probability input has {arr.shape[-1]} classes, expected {n_classes}"
        )
    if not np.all(np.isfinite(arr)):
        raise InvalidProbability("probabilities must be finite")
    if np.any(arr < 0.0) or np.any(arr > 1.0):
        raise InvalidProbability("probabilities must lie in [0, 1]")
    sums = arr.sum(axis=-1)
    err = np.abs(sums - 1.0)
    worst = float(err.max()) if err.size else 0.0
    if worst > RENORM_TOL:
        raise InvalidProbability(
            f"probability vectors sum to 1 within {RENORM_TOL} at worst; "
            f"largest deviation {worst:.3g}"
        )
    if worst > SUM_TOL:
        warnings.warn(
            f"renormalizing probability vectors off the simplex by up to {worst:.3g}",
            RenormalizationWarning,
            stacklevel=2,
        )
        arr = arr / sums[..., np.newaxis]
    return arr


def check_label_map(labels, n_classes=None):
    """Validate an HxW label raster: every non-ignore id < n_classes."""
    lm = np.asarray(labels)
    if lm.ndim != 2:
        raise ShapeMismatch(f"label map must be 2-D, got shape {lm.shape}")
    if not np.issubdtype(lm.dtype, np.integer):
        raise ValueError("label map must have an integer dtype")
    valid = lm[lm != IGNORE_ID]
    if valid.size and (valid.min() < 0 or
                       (n_classes is not None and valid.max() >= n_classes)):
        raise ValueError(
            f"label ids must be in [0, {n_classes}) or {IGNORE_ID} (ignore)"
        )
    return lm


def check_same_shape(a, b, what="arrays"):
    if a.shape != b.shape:
        raise ShapeMismatch(f"{what} differ in shape: {a.shape} vs {b.shape}")
