"""Coalition-based semi-asynchronous hierarchical federated learning simulator."""
from .config import ExperimentConfig, LearnerConfig, PopulationConfig, load_config
from .experiment import run
from .metrics import RunMetrics

__all__ = ["ExperimentConfig", "LearnerConfig", "PopulationConfig", "RunMetrics", "load_config", "run"]
__version__ = "0.1.0"
