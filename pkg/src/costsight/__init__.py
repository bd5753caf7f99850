"""Cost-sensitive perception toolkit.

Turns public severity judgments about class confusions into cost matrices,
applies cost-based decision rules to segmentation probability maps, compares
group valuations with a simulated F-test, and quantifies the safety
consequences for humans inside braking-distance zones.
"""

from .anova import FTestResult, GroupedAnswers, bootstrap_p, f_statistic
from .birdseye import birdseye_export, birdseye_points, birdseye_svg
from .consequence import (
    ConsequenceReport,
    DetectionVerdict,
    InstanceRecord,
    ZoneConfig,
    classify_instance,
    consequences,
    instance_recall,
    zone_membership,
)
from .costmatrix import (
    AnswerRecord,
    CostMatrix,
    DiffMatrix,
    MeanLogCostMatrix,
    aggregate_answers,
    diff_matrix,
    robot_log_matrix,
    robot_matrix,
    scale,
    to_linear,
)
from .decision import (
    CostSensitiveDecider,
    bayes_decide,
    bayes_decide_map,
    decide,
    decide_map,
    expected_costs,
)
from .metrics import ClassCounts, MetricsReport, compute_metrics, confusion_counts
from .published import GROUP_MATRICES, PRESET_NAMES, preset
from .taxonomy import (
    COARSE_NAMES,
    DEFAULT_TAXONOMY,
    FINE_NAMES,
    HUMAN_CLASS,
    ClassAggregator,
    ClassTaxonomy,
)
from .validation import IGNORE_ID

__version__ = "0.1.0"

__all__ = [
    "AnswerRecord",
    "ClassAggregator",
    "ClassCounts",
    "ClassTaxonomy",
    "COARSE_NAMES",
    "ConsequenceReport",
    "CostMatrix",
    "CostSensitiveDecider",
    "DEFAULT_TAXONOMY",
    "DetectionVerdict",
    "DiffMatrix",
    "FINE_NAMES",
    "FTestResult",
    "GROUP_MATRICES",
    "GroupedAnswers",
    "HUMAN_CLASS",
    "IGNORE_ID",
    "InstanceRecord",
    "MeanLogCostMatrix",
    "MetricsReport",
    "PRESET_NAMES",
    "ZoneConfig",
    "aggregate_answers",
    "bayes_decide",
    "bayes_decide_map",
    "birdseye_export",
    "birdseye_points",
    "birdseye_svg",
    "bootstrap_p",
    "classify_instance",
    "compute_metrics",
    "confusion_counts",
    "consequences",
    "decide",
    "decide_map",
    "diff_matrix",
    "expected_costs",
    "f_statistic",
    "instance_recall",
    "preset",
    "robot_log_matrix",
    "robot_matrix",
    "scale",
    "to_linear",
    "zone_membership",
]
