"""
Full-batch Adam training of a target network with periodic checkpoints
"""
import logging
import math
from typing import Optional

import numpy as np

from errors import TrainingAbortedError
from harness.balancing import BalancingHistory, compute_weights
from harness.trajectory import Trajectory
from numerics.mlp import FlatParams
from numerics.optim import AdamState, adam_step
from oracles.base import TargetProblem
from schemas import BalancingScheme

logger = logging.getLogger(__name__)

LOG_EVERY = 100


def run_training(
    problem: TargetProblem,
    net_init: FlatParams,
    scheme: BalancingScheme,
    epochs: int,
    lr: float,
    stride: int,
    seed: int,
    oracle_names: Optional[list] = None,
) -> Trajectory:
    """
    Train `net_init` on the problem's balanced terms.

    Checkpoints are taken at epochs 0, stride, 2*stride, ... plus the final model;
    every checkpoint records every registered oracle (or `oracle_names`).
    """
    if stride < 1:
        raise ValueError("stride must be >= 1")
    problem.check_net(net_init)
    oracles = problem.register_oracles()
    names = list(oracle_names) if oracle_names is not None else list(oracles)
    selected = [oracles[name] for name in names]

    history = BalancingHistory(tuple(problem.terms), problem.reference_term)
    state = AdamState.zeros(net_init.spec.parameter_count, lr)
    theta = net_init.theta.copy()
    checkpoints, checkpoint_epochs = [], []

    for epoch in range(epochs):
        net = net_init.with_theta(theta)
        if epoch % stride == 0:
            checkpoints.append(net.theta)
            checkpoint_epochs.append(epoch)

        terms = problem.term_losses(net, need_grad=True)
        values = [terms[name][0] for name in problem.terms]
        for name, value in zip(problem.terms, values):
            if not math.isfinite(value):
                raise TrainingAbortedError(f"non-finite {name}", epoch=epoch, breakdown=dict(zip(problem.terms, values)),
                                           stage="train")
        grads = [terms[name][1] for name in problem.terms]
        history.record(values, grads)
        weights = compute_weights(scheme, history, epoch, seed)
        history.weights.append(weights)

        base = problem.base_coefficients(epoch)
        total_grad = np.zeros_like(theta)
        for name, weight, grad in zip(problem.terms, weights, grads):
            total_grad += base[name] * weight * grad
        theta, state = adam_step(state, theta, total_grad)

        if epoch % LOG_EVERY == 0:
            logger.debug("epoch %d: %s weights=%s", epoch,
                         " ".join(f"{n}={v:.4g}" for n, v in zip(problem.terms, values)), np.round(weights, 4))

    checkpoints.append(theta)
    checkpoint_epochs.append(epochs)

    losses = {name: np.empty(len(checkpoints)) for name in names}
    for i, flat in enumerate(checkpoints):
        net = net_init.with_theta(flat)
        for oracle in selected:
            losses[oracle.name][i] = oracle(net)

    logger.info("trained %s for %d epochs under %s: %d checkpoints", problem.kind, epochs, scheme.kind.value,
                len(checkpoints))
    return Trajectory(
        spec=net_init.spec,
        checkpoints=np.stack(checkpoints),
        epochs=tuple(checkpoint_epochs),
        losses=losses,
        stride=stride,
        seeds={"train": seed, "problem": getattr(problem.config, "seed", 0)},
        problem=problem.config.model_dump(mode="json"),
        scheme=scheme.model_dump(mode="json"),
    )
