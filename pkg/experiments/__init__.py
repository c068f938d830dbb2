"""
End-to-end experiment stages and the canned recipes
"""
from experiments.pipeline import ExperimentRun, load_config
from experiments.recipes import RECIPES, reproduce

__all__ = ["ExperimentRun", "RECIPES", "load_config", "reproduce"]
