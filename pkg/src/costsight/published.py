"""Mean valuations published from the original public elicitation campaign.

Four groups of respondents (split by assigned viewing perspective and by
gender) rated confusion severities on the exponent scale; the matrices below
are their per-cell mean exponents, rows = predicted class, columns = true
class. They are shipped as presets so decisions, diffs and what-if runs can
be reproduced without the raw answer corpus.

Values tagged "reference" (group sizes, significance levels, overlooked
counts) were obtained on the original corpus and full Cityscapes validation
pipeline; they are not recomputable from this package alone and serve as
orientation marks only.
"""

import numpy as np

from .costmatrix import MeanLogCostMatrix, robot_matrix, to_linear
from .taxonomy import COARSE_NAMES

_NAN = np.nan

_PASSENGER = [
    [_NAN, 4.12, 3.97, 3.75, 4.74, 3.97],
    [3.90, _NAN, 2.70, 3.18, 3.42, 3.30],
    [3.34, 2.50, _NAN, 2.70, 3.51, 3.07],
    [2.96, 2.96, 2.76, _NAN, 3.51, 3.13],
    [3.72, 3.00, 3.05, 3.41, _NAN, 3.18],
    [3.41, 3.17, 3.05, 3.41, 3.18, _NAN],
]

_EXTERNAL = [
    [_NAN, 4.42, 4.36, 4.00, 5.51, 4.71],
    [3.71, _NAN, 2.72, 3.06, 3.99, 3.40],
    [3.70, 2.13, _NAN, 2.41, 3.56, 3.46],
    [2.97, 2.46, 2.79, _NAN, 3.70, 3.08],
    [4.03, 3.04, 3.16, 3.40, _NAN, 3.50],
    [3.77, 2.84, 3.14, 3.34, 3.14, _NAN],
]

_FEMALE = [
    [_NAN, 4.45, 4.25, 4.23, 5.65, 4.47],
    [4.03, _NAN, 2.72, 3.32, 4.06, 3.79],
    [3.83, 2.26, _NAN, 2.48, 3.65, 3.36],
    [3.29, 2.92, 2.81, _NAN, 3.84, 3.41],
    [4.14, 3.09, 3.28, 3.54, _NAN, 3.44],
    [4.03, 3.07, 3.23, 3.56, 3.22, _NAN],
]

_MALE = [
    [_NAN, 4.33, 4.03, 3.58, 4.60, 4.17],
    [3.74, _NAN, 2.76, 2.98, 3.39, 3.04],
    [3.33, 2.43, _NAN, 2.64, 3.48, 3.15],
    [2.74, 2.54, 2.76, _NAN, 3.39, 2.88],
    [3.73, 3.02, 3.04, 3.32, _NAN, 3.24],
    [3.30, 2.98, 3.03, 3.24, 3.17, _NAN],
]


def _mean_log(rows):
    entries = np.array(rows, dtype=np.float64)
    counts = np.zeros_like(entries, dtype=np.int64)
    return MeanLogCostMatrix(entries, counts, COARSE_NAMES)


GROUP_MATRICES = {
    "passenger": _mean_log(_PASSENGER),
    "external": _mean_log(_EXTERNAL),
    "female": _mean_log(_FEMALE),
    "male": _mean_log(_MALE),
}

PRESET_NAMES = (*GROUP_MATRICES, "robot")

# Answers per group in the original corpus (520 participants, 5045 answers).
GROUP_SIZES = {
    "passenger": 2744,
    "external": 2301,
    "female": 2444,
    "male": 2523,
}

# Bootstrap significance of the group splits at 1M shuffles on the raw
# corpus: perspective split p = 0.52%, gender split p = 0.00%.
REFERENCE_P_VALUES = {"perspective": 0.0052, "gender": 0.0000}

# Reported overlooked-human counts on the Cityscapes validation set
# (zone max distance in meters -> rule -> count; totals 2394 and 817).
REFERENCE_OVERLOOKED = {
    46.5: {"total": 2394, "passenger": 534, "external": 607,
           "female": 599, "male": 550, "robot": 745},
    20.6: {"total": 817, "passenger": 77, "external": 82,
           "female": 81, "male": 79, "robot": 90},
}

# Entry sums of the reported difference matrices (definition of the
# normalization used there is not reproducible from the mean matrices; see
# README). Kept for orientation only.
REFERENCE_DIFF_TOTALS = {
    ("passenger", "external"): 4.0221,
    ("female", "male"): 3.6394,
    ("all", "robot"): 14.4036,
}


def preset(name):
    """Return a linear :class:`CostMatrix` for a named valuation.

    Names: "passenger", "external", "female", "male" (survey groups) and
    "robot" (uniform costs, equivalent to argmax).
    """
    if name == "robot":
        return robot_matrix(len(COARSE_NAMES), COARSE_NAMES)
    try:
        return to_linear(GROUP_MATRICES[name])
    except KeyError:
        raise KeyError(
            f"unknown preset {name!r}; available: {', '.join(PRESET_NAMES)}"
        ) from None
