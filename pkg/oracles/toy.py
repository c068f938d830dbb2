"""
Toy 1-D regression of sin(pi x), a single-term problem
"""
from typing import Dict

import numpy as np

from numerics.mlp import FlatParams, mlp_backward, mlp_forward
from numerics.rng import stream
from oracles.base import LossOracle, OracleSet, TargetProblem, TermValue
from schemas import MlpSpec, ToyConfig


def target(x) -> np.ndarray:
    return np.sin(np.pi * np.asarray(x))


class ToyProblem(TargetProblem):
    terms = ("MSE",)
    reference_term = "MSE"

    def __init__(self, config: ToyConfig):
        super().__init__(config)
        rng = stream(config.seed, "toy")
        self.train_x = rng.uniform(-1.0, 1.0, (config.n_train, 1))
        self.test_x = np.linspace(-1.0, 1.0, config.n_test)[:, None]
        for array in (self.train_x, self.test_x):
            array.setflags(write=False)

    def default_spec(self) -> MlpSpec:
        return MlpSpec(layer_sizes=(1, *self.config.hidden_sizes, 1))

    def _mse(self, net: FlatParams, x: np.ndarray, need_grad: bool):
        self.check_net(net)
        u, cache = mlp_forward(net, x)
        diff = u[:, 0] - target(x[:, 0])
        value = float(np.mean(diff ** 2))
        if not need_grad:
            return value, None
        grad, _ = mlp_backward(net, cache, (2.0 * diff / diff.size)[:, None])
        return value, grad

    def term_losses(self, net: FlatParams, need_grad: bool = True) -> Dict[str, TermValue]:
        return {"MSE": self._mse(net, self.train_x, need_grad)}

    def base_coefficients(self, epoch: int) -> Dict[str, float]:
        return {"MSE": 1.0}

    def register_oracles(self) -> OracleSet:
        return OracleSet([
            LossOracle("MSE", lambda net: self._mse(net, self.train_x, False)[0]),
            LossOracle("L_total", lambda net: self._mse(net, self.train_x, False)[0]),
            LossOracle("L_test", lambda net: self._mse(net, self.test_x, False)[0]),
        ])

    def probe_inputs(self, count: int, seed: int) -> np.ndarray:
        return stream(seed, "probe", "toy").uniform(-1.0, 1.0, (count, 1))
