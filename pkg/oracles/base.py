"""
Loss oracles and the target-problem interface
"""
from abc import ABC, abstractmethod
from collections.abc import Mapping
from dataclasses import dataclass
from typing import Callable, Dict, Iterable, Iterator, Tuple

import numpy as np

from errors import DuplicateOracleError, OracleNotFoundError, ShapeError
from numerics.mlp import FlatParams
from schemas import MlpSpec

# (value, gradient w.r.t. theta)
TermValue = Tuple[float, np.ndarray]


@dataclass(frozen=True)
class LossOracle:
    """A named, pure map from network parameters to one scalar loss"""
    name: str
    fn: Callable[[FlatParams], float]

    def __call__(self, params: FlatParams) -> float:
        return float(self.fn(params))

    evaluate = __call__


class OracleSet(Mapping):
    """Read-only name -> LossOracle registry"""

    def __init__(self, oracles: Iterable[LossOracle]):
        self._oracles: Dict[str, LossOracle] = {}
        for oracle in oracles:
            if oracle.name in self._oracles:
                raise DuplicateOracleError(f"oracle {oracle.name!r} registered twice")
            self._oracles[oracle.name] = oracle

    def __getitem__(self, name: str) -> LossOracle:
        try:
            return self._oracles[name]
        except KeyError:
            raise OracleNotFoundError(
                f"no oracle named {name!r}; registered: {sorted(self._oracles)}"
            ) from None

    def __iter__(self) -> Iterator[str]:
        return iter(self._oracles)

    def __len__(self) -> int:
        return len(self._oracles)

    def evaluate_all(self, params: FlatParams) -> Dict[str, float]:
        return {name: oracle(params) for name, oracle in self._oracles.items()}


class TargetProblem(ABC):
    """A problem whose loss terms generate the trajectories being visualized"""

    #: names of the loss terms combined during training, in order
    terms: Tuple[str, ...]
    #: term whose gradient statistics anchor LR-annealing
    reference_term: str

    def __init__(self, config):
        self.config = config

    @property
    def kind(self) -> str:
        return self.config.kind

    @abstractmethod
    def default_spec(self) -> MlpSpec:
        """Target network architecture for this problem"""

    @abstractmethod
    def term_losses(self, net: FlatParams, need_grad: bool = True) -> Dict[str, TermValue]:
        """Every training term's value (and gradient when asked)"""

    @abstractmethod
    def base_coefficients(self, epoch: int) -> Dict[str, float]:
        """Problem-level coefficient of each training term at an epoch"""

    @abstractmethod
    def register_oracles(self) -> OracleSet:
        """Every named loss this problem exposes"""

    @abstractmethod
    def probe_inputs(self, count: int, seed: int) -> np.ndarray:
        """Seeded inputs from the problem's domain, used as the CKA probe batch"""

    def check_net(self, net: FlatParams) -> None:
        expected = self.default_spec()
        spec = net.spec
        if spec.n_inputs != expected.n_inputs or spec.n_outputs != expected.n_outputs:
            raise ShapeError(
                f"{self.kind} problem needs a {expected.n_inputs}-input, {expected.n_outputs}-output net, "
                f"got {spec.n_inputs} -> {spec.n_outputs}"
            )

    def to_json(self) -> str:
        return self.config.model_dump_json()
