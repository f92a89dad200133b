"""
Reactive forward-arc motion primitive planning for multirotors.

The planning library lives in `forward_arc.planning`, the synthetic world and
depth simulator in `forward_arc.sim`; `forward_arc.harness` runs trials and
batches on top of both.
"""

from .config import TrialConfig, load_config
from .const import VERSION
from .coordinator import Outcome
from .harness import BatchReport, TrialResult, run_batch, run_trial
from .planning.errors import (
    ConfigError,
    ForwardArcError,
    InvalidArgumentError,
    OutOfOrderStampError,
    ReportError,
    StartMismatchError,
)

__version__ = VERSION

__all__ = [
    "BatchReport",
    "ConfigError",
    "ForwardArcError",
    "InvalidArgumentError",
    "OutOfOrderStampError",
    "Outcome",
    "ReportError",
    "StartMismatchError",
    "TrialConfig",
    "TrialResult",
    "__version__",
    "load_config",
    "run_batch",
    "run_trial",
]
