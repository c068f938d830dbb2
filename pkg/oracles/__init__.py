"""
Built-in target problems and their named loss oracles
"""
from errors import ConfigError
from oracles.base import LossOracle, OracleSet, TargetProblem
from oracles.convection import ConvectionProblem
from oracles.eigen import EigenProblem
from oracles.toy import ToyProblem
from schemas import ConvectionConfig, EigenConfig, ToyConfig

_PROBLEMS = {
    "convection": (ConvectionConfig, ConvectionProblem),
    "eigen": (EigenConfig, EigenProblem),
    "toy": (ToyConfig, ToyProblem),
}


def build_problem(config) -> TargetProblem:
    """Problem instance from a config model or its JSON-compatible dict"""
    if isinstance(config, dict):
        kind = config.get("kind")
        if kind not in _PROBLEMS:
            raise ConfigError(f"unknown problem kind {kind!r}")
        config = _PROBLEMS[kind][0].model_validate(config)
    if config.kind not in _PROBLEMS:
        raise ConfigError(f"unknown problem kind {config.kind!r}")
    return _PROBLEMS[config.kind][1](config)


def register_oracles(problem: TargetProblem) -> OracleSet:
    return problem.register_oracles()


__all__ = ["LossOracle", "OracleSet", "TargetProblem", "build_problem", "register_oracles"]
