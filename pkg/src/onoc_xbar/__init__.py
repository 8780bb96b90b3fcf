"""Design-space exploration for on-chip optical crossbars on stacked silicon layers.

Models ring (ORNoC_ML), Matrix, lambda-router and Snake crossbars on one or two
optical layers and computes per-communication insertion losses, worst-case and
average losses and resource counts.
"""

from onoc_xbar.errors import (
    CollinearOverlap,
    DegenerateFrontier,
    MismatchedRuns,
    MissingCoefficient,
    NoRoute,
    SelfCommunication,
    UnsupportedSize,
    Unroutable,
)
from onoc_xbar.loss_model import (
    LossParams,
    PathCharacteristics,
    builtin_presets,
    compute_total_loss,
    get_preset,
)
from onoc_xbar.geometry import GridArchitecture, PhotonicLayout
from onoc_xbar.ornoc import OrnocML, assign_rings, assign_wavelengths
from onoc_xbar.crossbars import CrossbarInstance, build_crossbar, worst_case_crossings
from onoc_xbar.analysis import EvaluationResult, evaluate

__version__ = "0.1.0"

__all__ = [
    "CollinearOverlap",
    "CrossbarInstance",
    "DegenerateFrontier",
    "EvaluationResult",
    "GridArchitecture",
    "LossParams",
    "MismatchedRuns",
    "MissingCoefficient",
    "NoRoute",
    "OrnocML",
    "PathCharacteristics",
    "PhotonicLayout",
    "SelfCommunication",
    "UnsupportedSize",
    "Unroutable",
    "assign_rings",
    "assign_wavelengths",
    "build_crossbar",
    "builtin_presets",
    "compute_total_loss",
    "evaluate",
    "get_preset",
    "worst_case_crossings",
]
