from .config import ExperimentConfig, parse_config_file, parse_config_text
from .tables import ResultTable
from .pipelines import run

__all__ = ["ExperimentConfig", "parse_config_file", "parse_config_text", "ResultTable", "run"]
