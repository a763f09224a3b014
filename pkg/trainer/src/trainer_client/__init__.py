"""Reference RL-side consumer of the discourse reward scoring service.

A softmax bandit over fixed candidate essays pulls reward tensors from the
service over HTTP and applies clipped-surrogate policy updates, reproducing
the rising distinctive-motif trend at desk scale.
"""

__version__ = "0.1.0"

from .loop import PpoUpdateConfig, ServiceUnavailable, StepLog, TrajectoryLog, run_toy_alignment, simulate_alignment
from .policy import TemplatePolicy

__all__ = [
    "PpoUpdateConfig",
    "ServiceUnavailable",
    "StepLog",
    "TemplatePolicy",
    "TrajectoryLog",
    "run_toy_alignment",
    "simulate_alignment",
]
