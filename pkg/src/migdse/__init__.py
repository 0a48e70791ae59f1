"""Predictor-guided design space exploration over MIG optimisation recipes."""

from .kernels import BACKEND
from .metrics import MetricVector, compute_metrics
from .mig import Mig, check_equivalence, node_count

__version__ = "0.1.0"

__all__ = ["BACKEND", "Mig", "MetricVector", "check_equivalence", "compute_metrics",
           "node_count", "__version__"]
