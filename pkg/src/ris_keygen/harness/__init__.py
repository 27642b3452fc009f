"""CLI, configuration and experiment orchestration."""

from .config import ConfigError, ExperimentConfig, build_config
from .experiment import Report, run_experiment
from .figures import FIGURES, reproduce_figure
