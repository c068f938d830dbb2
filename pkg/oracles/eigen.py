"""
Desk-scale eigenpair PGNN: predict the smallest eigenpair of random symmetric matrices.

The network maps a flattened k x k matrix to (y_hat: k values, lambda_hat: 1 value).
"""
import logging
import math
from typing import Dict, Optional, Tuple

import numpy as np

from errors import DegenerateOutputError, InvalidInputError
from models import EigenVariant
from numerics.linalg import symmetric_eigen
from numerics.mlp import FlatParams, mlp_backward, mlp_forward
from numerics.rng import stream
from oracles.base import LossOracle, OracleSet, TargetProblem, TermValue
from schemas import EigenConfig, MlpSpec

logger = logging.getLogger(__name__)

NORM_FLOOR = 1e-12

VARIANT_TERMS = {
    EigenVariant.COPHY: ("Train-MSE", "C-Loss", "S-Loss"),
    EigenVariant.BLACK_BOX: ("Train-MSE",),
    EigenVariant.LABEL_FREE: ("C-Loss", "S-Loss"),
}


def random_symmetric(rng: np.random.Generator, k: int) -> np.ndarray:
    m = rng.uniform(-1.0, 1.0, size=(k, k))
    return 0.5 * (m + m.T)


class EigenProblem(TargetProblem):

    def __init__(self, config: EigenConfig):
        super().__init__(config)
        self.terms = VARIANT_TERMS[config.variant]
        self.reference_term = self.terms[0]
        k = config.dimension
        total = config.n_labeled + config.n_unlabeled + config.n_test
        rng = stream(config.seed, "dataset")

        matrices = np.empty((total, k, k))
        eigenvalues = np.empty(total)
        eigenvectors = np.empty((total, k))
        for i in range(total):
            a = random_symmetric(rng, k)
            values, vectors = symmetric_eigen(a)
            y = vectors[:, 0]
            residual = np.linalg.norm(a @ y - values[0] * y)
            if residual > 1e-10:
                raise InvalidInputError(f"ground-truth eigenpair {i} has residual {residual:.3e}")
            matrices[i], eigenvalues[i], eigenvectors[i] = a, values[0], y

        n_phys = config.n_labeled + config.n_unlabeled
        self.matrices = matrices
        self.inputs = matrices.reshape(total, k * k)
        self.eigenvalues = eigenvalues
        self.eigenvectors = eigenvectors
        # physics losses use labeled + unlabeled, Train-MSE the labeled head, Test-MSE the tail
        self.physics_slice = slice(0, n_phys)
        self.labeled_slice = slice(0, config.n_labeled)
        self.test_slice = slice(n_phys, total)
        for array in (self.matrices, self.inputs, self.eigenvalues, self.eigenvectors):
            array.setflags(write=False)

    @property
    def dimension(self) -> int:
        return self.config.dimension

    def lambda_c(self, epoch: float) -> float:
        """Cold-started C-Loss coefficient"""
        return self.config.c_C * (1.0 - math.exp(-epoch / self.config.tau))

    def lambda_s(self, epoch: float) -> float:
        """Annealed S-Loss coefficient"""
        return self.config.c_S * math.exp(-epoch / self.config.tau)

    def default_spec(self) -> MlpSpec:
        k = self.dimension
        return MlpSpec(layer_sizes=(k * k, *self.config.hidden_sizes, k + 1))

    def term_losses(self, net: FlatParams, need_grad: bool = True) -> Dict[str, TermValue]:
        values = _physics_terms(self, net, need_grad)
        return {name: values[name] for name in self.terms}

    def base_coefficients(self, epoch: int) -> Dict[str, float]:
        coefficients = {"Train-MSE": 1.0, "C-Loss": self.lambda_c(epoch), "S-Loss": self.lambda_s(epoch)}
        return {name: coefficients[name] for name in self.terms}

    def register_oracles(self) -> OracleSet:
        horizon = self.config.total_epochs

        def term(name):
            return lambda net: _physics_terms(self, net, need_grad=False)[name][0]

        def physics_total(net):
            values = _physics_terms(self, net, need_grad=False)
            return values["C-Loss"][0] + values["S-Loss"][0]

        return OracleSet([
            LossOracle("Train-MSE", term("Train-MSE")),
            LossOracle("C-Loss", term("C-Loss")),
            LossOracle("S-Loss", term("S-Loss")),
            LossOracle("E", lambda net: eigen_losses(self, net, horizon)["E"]),
            LossOracle("Test-MSE", lambda net: _aligned_mse(self, net, self.test_slice, False)[0]),
            LossOracle("L_total_physics", physics_total),
        ])

    def probe_inputs(self, count: int, seed: int) -> np.ndarray:
        rng = stream(seed, "probe", "eigen")
        k = self.dimension
        return np.stack([random_symmetric(rng, k).reshape(-1) for _ in range(count)])


def _split_outputs(problem: EigenProblem, out: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    k = problem.dimension
    y_hat, lam_hat = out[:, :k], out[:, k]
    norms = np.linalg.norm(y_hat, axis=1)
    if np.any(norms < NORM_FLOOR):
        index = int(np.argmin(norms))
        raise DegenerateOutputError(f"predicted eigenvector {index} has norm {norms[index]:.3e}")
    return y_hat, lam_hat


def _aligned_mse(problem: EigenProblem, net: FlatParams, rows: slice, need_grad: bool):
    """MSE between the normalized prediction (sign-aligned to the truth) and the true eigenvector"""
    problem.check_net(net)
    out, cache = mlp_forward(net, problem.inputs[rows])
    y_hat, _ = _split_outputs(problem, out)
    truth = problem.eigenvectors[rows]
    n, k = y_hat.shape
    norms = np.linalg.norm(y_hat, axis=1, keepdims=True)
    unit = y_hat / norms
    sign = np.where(np.sum(unit * truth, axis=1, keepdims=True) >= 0.0, 1.0, -1.0)
    err = sign * unit - truth
    value = float(np.sum(err ** 2) / (n * k))
    if not need_grad:
        return value, None
    g_unit = 2.0 * sign * err / (n * k)
    g_y = (g_unit - unit * np.sum(unit * g_unit, axis=1, keepdims=True)) / norms
    upstream = np.zeros_like(out)
    upstream[:, :k] = g_y
    grad, _ = mlp_backward(net, cache, upstream)
    return value, grad


def _physics_terms(problem: EigenProblem, net: FlatParams, need_grad: bool) -> Dict[str, Tuple[float, Optional[np.ndarray]]]:
    problem.check_net(net)
    out, cache = mlp_forward(net, problem.inputs[problem.physics_slice])
    y_hat, lam_hat = _split_outputs(problem, out)
    mats = problem.matrices[problem.physics_slice]
    targets = problem.eigenvalues[problem.physics_slice]
    n, k = y_hat.shape

    residual = np.einsum("nij,nj->ni", mats, y_hat) - lam_hat[:, None] * y_hat
    sq_norm = np.sum(y_hat ** 2, axis=1)
    sq_res = np.sum(residual ** 2, axis=1)
    c_loss = float(np.mean(sq_res / sq_norm))
    gap = lam_hat - targets
    s_loss = float(np.mean(gap ** 2))

    results = {}
    train_value, train_grad = _aligned_mse(problem, net, problem.labeled_slice, need_grad)
    results["Train-MSE"] = (train_value, train_grad)
    if not need_grad:
        results["C-Loss"] = (c_loss, None)
        results["S-Loss"] = (s_loss, None)
        return results

    shifted = np.einsum("nij,nj->ni", mats, residual) - lam_hat[:, None] * residual
    g_y = (2.0 * shifted / sq_norm[:, None] - 2.0 * (sq_res / sq_norm ** 2)[:, None] * y_hat) / n
    g_lam = -2.0 * np.sum(y_hat * residual, axis=1) / sq_norm / n
    upstream = np.zeros_like(out)
    upstream[:, :k] = g_y
    upstream[:, k] = g_lam
    results["C-Loss"] = (c_loss, mlp_backward(net, cache, upstream)[0])

    upstream = np.zeros_like(out)
    upstream[:, k] = 2.0 * gap / n
    results["S-Loss"] = (s_loss, mlp_backward(net, cache, upstream)[0])
    return results


def eigen_losses(problem: EigenProblem, net: FlatParams, t: float) -> Dict[str, float]:
    """Train-MSE, C-Loss, S-Loss, the scheduled objective E(t) and Test-MSE"""
    values = _physics_terms(problem, net, need_grad=False)
    train, c_loss, s_loss = values["Train-MSE"][0], values["C-Loss"][0], values["S-Loss"][0]
    return {
        "Train-MSE": train,
        "C-Loss": c_loss,
        "S-Loss": s_loss,
        "E": train + problem.lambda_c(t) * c_loss + problem.lambda_s(t) * s_loss,
        "Test-MSE": _aligned_mse(problem, net, problem.test_slice, False)[0],
    }
