"""
Multilayer perceptrons over flat parameter vectors

Layout of `theta`: every weight matrix (layer order, row-major, shape out x in)
followed by every bias vector (layer order).
"""
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from errors import ShapeError, UsageError
from models import Activation
from numerics.rng import stream
from schemas import MlpSpec


@dataclass(frozen=True)
class FlatParams:
    spec: MlpSpec
    theta: np.ndarray

    def __post_init__(self):
        theta = np.array(self.theta, dtype=np.float64).reshape(-1)
        if theta.size != self.spec.parameter_count:
            raise ShapeError(
                f"theta has {theta.size} entries, spec {self.spec.layer_sizes} needs {self.spec.parameter_count}"
            )
        theta.setflags(write=False)
        object.__setattr__(self, "theta", theta)

    def with_theta(self, theta) -> "FlatParams":
        return FlatParams(self.spec, theta)

    def layers(self) -> List[Tuple[np.ndarray, np.ndarray]]:
        return list(zip(*layer_views(self.spec, self.theta)))

    def to_bytes(self) -> bytes:
        return self.theta.astype("<f8").tobytes()

    @classmethod
    def from_bytes(cls, spec: MlpSpec, data: bytes) -> "FlatParams":
        return cls(spec, np.frombuffer(data, dtype="<f8").astype(np.float64))


def layer_views(spec: MlpSpec, theta: np.ndarray) -> Tuple[List[np.ndarray], List[np.ndarray]]:
    """Weight matrices and bias vectors as views into theta"""
    weights, biases = [], []
    offset = 0
    for n_out, n_in in spec.weight_shapes:
        weights.append(theta[offset:offset + n_out * n_in].reshape(n_out, n_in))
        offset += n_out * n_in
    for n_out, _ in spec.weight_shapes:
        biases.append(theta[offset:offset + n_out])
        offset += n_out
    return weights, biases


def _pack(spec: MlpSpec, weights: List[np.ndarray], biases: List[np.ndarray]) -> np.ndarray:
    return np.concatenate([w.reshape(-1) for w in weights] + [b.reshape(-1) for b in biases])


def init_params(spec: MlpSpec, seed: int, label: str = "init") -> FlatParams:
    """Glorot-uniform weights on +-sqrt(6 / (fan_in + fan_out)), zero biases"""
    rng = stream(seed, label, *spec.layer_sizes)
    weights = []
    for n_out, n_in in spec.weight_shapes:
        limit = np.sqrt(6.0 / (n_in + n_out))
        weights.append(rng.uniform(-limit, limit, size=(n_out, n_in)))
    biases = [np.zeros(n_out) for n_out, _ in spec.weight_shapes]
    return FlatParams(spec, _pack(spec, weights, biases))


def _layer_activation(spec: MlpSpec, index: int) -> Activation:
    last = index == len(spec.weight_shapes) - 1
    return spec.output_activation if last else spec.hidden_activation


def _as_batch(spec: MlpSpec, x) -> Tuple[np.ndarray, bool]:
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    batch = x.reshape(1, -1) if single else x
    if batch.ndim != 2 or batch.shape[1] != spec.n_inputs:
        raise ShapeError(f"input shape {x.shape} does not match {spec.n_inputs} network inputs")
    return batch, single


@dataclass
class ForwardCache:
    spec: MlpSpec
    theta: np.ndarray
    activations: List[np.ndarray]  # a_0 = inputs ... a_L = outputs
    single: bool


def mlp_forward(params: FlatParams, x) -> Tuple[np.ndarray, ForwardCache]:
    """Forward pass on one input vector or a batch of rows"""
    a, single = _as_batch(params.spec, x)
    weights, biases = layer_views(params.spec, params.theta)
    activations = [a]
    for index, (W, b) in enumerate(zip(weights, biases)):
        z = a @ W.T + b
        a = np.tanh(z) if _layer_activation(params.spec, index) is Activation.TANH else z
        activations.append(a)
    out = a[0] if single else a
    return out, ForwardCache(params.spec, params.theta, activations, single)


def _check_cache(params: FlatParams, cache) -> None:
    if cache is None:
        raise UsageError("backward pass needs the cache returned by the forward pass")
    if cache.spec != params.spec or (
        cache.theta is not params.theta and not np.array_equal(cache.theta, params.theta)
    ):
        raise UsageError("forward cache was produced by different parameters")


def mlp_backward(params: FlatParams, cache: Optional[ForwardCache], upstream) -> Tuple[np.ndarray, np.ndarray]:
    """
    Reverse-mode gradient of <upstream, output>

    Returns:
        (gradient w.r.t. theta in the flat layout, gradient w.r.t. the inputs)
    """
    _check_cache(params, cache)
    spec = params.spec
    weights, _ = layer_views(spec, params.theta)
    acts = cache.activations
    g = np.asarray(upstream, dtype=np.float64).reshape(acts[-1].shape)

    grad_w: List[np.ndarray] = [None] * len(weights)
    grad_b: List[np.ndarray] = [None] * len(weights)
    for index in reversed(range(len(weights))):
        if _layer_activation(spec, index) is Activation.TANH:
            g = g * (1.0 - acts[index + 1] ** 2)
        grad_w[index] = g.T @ acts[index]
        grad_b[index] = g.sum(axis=0)
        g = g @ weights[index]
    grad_input = g[0] if cache.single else g
    return _pack(spec, grad_w, grad_b), grad_input


@dataclass
class DualCache:
    spec: MlpSpec
    theta: np.ndarray
    activations: List[np.ndarray]
    tangents: List[np.ndarray]  # d a_l along the input direction, tangents[0] = direction
    pre_tangents: List[np.ndarray]  # d z_l along the input direction
    single: bool


def mlp_forward_dual(params: FlatParams, x, direction) -> Tuple[np.ndarray, np.ndarray, DualCache]:
    """
    Forward pass carrying one tangent: returns outputs and the directional
    derivative of the outputs along `direction` in input space.
    """
    spec = params.spec
    a, single = _as_batch(spec, x)
    t = np.broadcast_to(np.asarray(direction, dtype=np.float64), a.shape).copy()
    weights, biases = layer_views(spec, params.theta)
    activations, tangents, pre_tangents = [a], [t], []
    for index, (W, b) in enumerate(zip(weights, biases)):
        z = a @ W.T + b
        zt = t @ W.T
        if _layer_activation(spec, index) is Activation.TANH:
            a = np.tanh(z)
            t = (1.0 - a ** 2) * zt
        else:
            a, t = z, zt
        activations.append(a)
        tangents.append(t)
        pre_tangents.append(zt)
    cache = DualCache(spec, params.theta, activations, tangents, pre_tangents, single)
    if single:
        return a[0], t[0], cache
    return a, t, cache


def mlp_backward_dual(params: FlatParams, cache: Optional[DualCache], upstream_out, upstream_tangent) -> np.ndarray:
    """Gradient w.r.t. theta of <g_out, output> + <g_tangent, directional derivative>"""
    _check_cache(params, cache)
    spec = params.spec
    weights, _ = layer_views(spec, params.theta)
    acts, tans, pre = cache.activations, cache.tangents, cache.pre_tangents
    shape = acts[-1].shape
    g_a = np.zeros(shape) if upstream_out is None else np.asarray(upstream_out, dtype=np.float64).reshape(shape)
    g_t = np.zeros(shape) if upstream_tangent is None else np.asarray(upstream_tangent, dtype=np.float64).reshape(shape)

    grad_w: List[np.ndarray] = [None] * len(weights)
    grad_b: List[np.ndarray] = [None] * len(weights)
    for index in reversed(range(len(weights))):
        if _layer_activation(spec, index) is Activation.TANH:
            a = acts[index + 1]
            slope = 1.0 - a ** 2
            curvature = -2.0 * a * slope
            g_z = g_a * slope + g_t * curvature * pre[index]
            g_zt = g_t * slope
        else:
            g_z, g_zt = g_a, g_t
        grad_w[index] = g_z.T @ acts[index] + g_zt.T @ tans[index]
        grad_b[index] = g_z.sum(axis=0)
        g_a = g_z @ weights[index]
        g_t = g_zt @ weights[index]
    return _pack(spec, grad_w, grad_b)


def mlp_input_derivatives(params: FlatParams, x) -> np.ndarray:
    """
    Exact first partials d out_k / d x_j by forward-mode tangent propagation.

    Returns shape (n_out, n_in) for a single input, (batch, n_out, n_in) for a batch.
    """
    batch, single = _as_batch(params.spec, x)
    n_in = params.spec.n_inputs
    columns = []
    for j in range(n_in):
        direction = np.zeros(n_in)
        direction[j] = 1.0
        _, tangent, _ = mlp_forward_dual(params, batch, direction)
        columns.append(tangent)
    jacobian = np.stack(columns, axis=-1)
    return jacobian[0] if single else jacobian


def hidden_features(params: FlatParams, x) -> np.ndarray:
    """Concatenated hidden-layer activations, one row per input"""
    _, cache = mlp_forward(params, np.atleast_2d(np.asarray(x, dtype=np.float64)))
    hidden = cache.activations[1:-1]
    if not hidden:
        return cache.activations[-1]
    return np.concatenate(hidden, axis=1)
