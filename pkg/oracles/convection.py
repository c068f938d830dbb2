"""
Convection-equation PINN: residual u_t - beta * u_x on [0, 2pi] x [0, 1],
initial condition sin(x), periodic boundary
"""
import math
from typing import Dict, Optional, Tuple

import numpy as np

from numerics.mlp import FlatParams, mlp_backward, mlp_backward_dual, mlp_forward, mlp_forward_dual
from numerics.rng import stream
from oracles.base import LossOracle, OracleSet, TargetProblem, TermValue
from schemas import ConvectionConfig, MlpSpec

X_MAX = 2.0 * math.pi
T_MAX = 1.0


def exact_solution(x, t, beta: float) -> np.ndarray:
    """sin(x + beta t) solves u_t - beta u_x = 0 with u(x, 0) = sin x"""
    return np.sin(np.asarray(x) + beta * np.asarray(t))


class ConvectionProblem(TargetProblem):
    terms = ("L_r", "L_ic", "L_bc")
    reference_term = "L_r"

    def __init__(self, config: ConvectionConfig):
        super().__init__(config)
        rng = stream(config.seed, "collocation")
        self.residual_points = np.column_stack([
            rng.uniform(0.0, X_MAX, config.n_residual),
            rng.uniform(0.0, T_MAX, config.n_residual),
        ])
        ic_x = rng.uniform(0.0, X_MAX, config.n_initial)
        self.initial_points = np.column_stack([ic_x, np.zeros_like(ic_x)])
        self.initial_values = np.sin(ic_x)
        bc_t = rng.uniform(0.0, T_MAX, config.n_boundary)
        self.boundary_left = np.column_stack([np.zeros_like(bc_t), bc_t])
        self.boundary_right = np.column_stack([np.full_like(bc_t, X_MAX), bc_t])

        xs = np.linspace(0.0, X_MAX, config.test_resolution)
        ts = np.linspace(0.0, T_MAX, config.test_resolution)
        grid_x, grid_t = np.meshgrid(xs, ts)
        self.test_points = np.column_stack([grid_x.reshape(-1), grid_t.reshape(-1)])
        self.test_values = exact_solution(self.test_points[:, 0], self.test_points[:, 1], config.beta)

        for array in (self.residual_points, self.initial_points, self.initial_values,
                      self.boundary_left, self.boundary_right, self.test_points, self.test_values):
            array.setflags(write=False)

    @property
    def beta(self) -> float:
        return self.config.beta

    @property
    def residual_direction(self) -> np.ndarray:
        # (x, t) direction whose directional derivative is u_t - beta u_x
        return np.array([-self.beta, 1.0])

    def default_spec(self) -> MlpSpec:
        return MlpSpec(layer_sizes=(2, *self.config.hidden_sizes, 1))

    def term_losses(self, net: FlatParams, need_grad: bool = True) -> Dict[str, TermValue]:
        return {
            "L_r": _residual(self, net, need_grad),
            "L_ic": _initial(self, net, need_grad),
            "L_bc": _boundary(self, net, need_grad),
        }

    def base_coefficients(self, epoch: int) -> Dict[str, float]:
        return {"L_r": self.config.c_r, "L_ic": self.config.c_ic, "L_bc": self.config.c_bc}

    def register_oracles(self) -> OracleSet:
        c = self.config
        return OracleSet([
            LossOracle("L_r", lambda net: convection_residual_loss(self, net)),
            LossOracle("L_ic", lambda net: convection_ic_loss(self, net)),
            LossOracle("L_bc", lambda net: convection_bc_loss(self, net)),
            LossOracle("L_total", lambda net: (
                c.c_r * convection_residual_loss(self, net)
                + c.c_ic * convection_ic_loss(self, net)
                + c.c_bc * convection_bc_loss(self, net)
            )),
            LossOracle("L_total_physics", lambda net: (
                convection_residual_loss(self, net)
                + convection_ic_loss(self, net)
                + convection_bc_loss(self, net)
            )),
            LossOracle("L_test", lambda net: convection_test_loss(self, net)),
        ])

    def probe_inputs(self, count: int, seed: int) -> np.ndarray:
        rng = stream(seed, "probe", "convection")
        return np.column_stack([rng.uniform(0.0, X_MAX, count), rng.uniform(0.0, T_MAX, count)])


def _residual(problem: ConvectionProblem, net: FlatParams, need_grad: bool) -> Tuple[float, Optional[np.ndarray]]:
    problem.check_net(net)
    _, residual, cache = mlp_forward_dual(net, problem.residual_points, problem.residual_direction)
    n = residual.shape[0]
    value = float(np.mean(residual ** 2))
    if not need_grad:
        return value, None
    return value, mlp_backward_dual(net, cache, None, 2.0 * residual / n)


def _initial(problem: ConvectionProblem, net: FlatParams, need_grad: bool) -> Tuple[float, Optional[np.ndarray]]:
    problem.check_net(net)
    u, cache = mlp_forward(net, problem.initial_points)
    diff = u[:, 0] - problem.initial_values
    value = float(np.mean(diff ** 2))
    if not need_grad:
        return value, None
    grad, _ = mlp_backward(net, cache, (2.0 * diff / diff.size)[:, None])
    return value, grad


def _boundary(problem: ConvectionProblem, net: FlatParams, need_grad: bool) -> Tuple[float, Optional[np.ndarray]]:
    problem.check_net(net)
    u_left, cache_left = mlp_forward(net, problem.boundary_left)
    u_right, cache_right = mlp_forward(net, problem.boundary_right)
    diff = u_left[:, 0] - u_right[:, 0]
    value = float(np.mean(diff ** 2))
    if not need_grad:
        return value, None
    upstream = (2.0 * diff / diff.size)[:, None]
    grad_left, _ = mlp_backward(net, cache_left, upstream)
    grad_right, _ = mlp_backward(net, cache_right, -upstream)
    return value, grad_left + grad_right


def convection_residual_loss(problem: ConvectionProblem, net: FlatParams) -> float:
    """Mean squared PDE residual over the interior collocation points"""
    return _residual(problem, net, need_grad=False)[0]


def convection_ic_loss(problem: ConvectionProblem, net: FlatParams) -> float:
    return _initial(problem, net, need_grad=False)[0]


def convection_bc_loss(problem: ConvectionProblem, net: FlatParams) -> float:
    return _boundary(problem, net, need_grad=False)[0]


def convection_test_loss(problem: ConvectionProblem, net: FlatParams) -> float:
    """MSE against sin(x + beta t) on the uniform test grid"""
    problem.check_net(net)
    u, _ = mlp_forward(net, problem.test_points)
    return float(np.mean((u[:, 0] - problem.test_values) ** 2))
