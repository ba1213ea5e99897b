"""
Feed-forward approximator with analytic gradients.

Hidden layers use ReLU; the output layer applies one of three activations and
an affine rescale ``y = scale * act(z) + offset``. Batched calls take arrays of
shape (N, in) and gradients are summed over the batch; a 1-D input is treated
as a batch of one and returns 1-D results.
"""
import hashlib
import io
import logging
from enum import Enum
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from app.core.exceptions import ContractViolationError, NonFiniteError

logger = logging.getLogger(__name__)

CHECKPOINT_FORMAT_VERSION = 1


class OutputActivation(str, Enum):
    IDENTITY = "identity"
    SOFTPLUS = "softplus"
    TANH = "tanh"


def _require_finite(array: np.ndarray, what: str) -> None:
    if not np.all(np.isfinite(array)):
        raise NonFiniteError(f"{what} contains non-finite values")


class Approximator:
    """
    Parameterized differentiable map (ReLU MLP).

    Args:
        layer_sizes: widths from input to output, at least two entries.
        output_activation: identity, softplus (non-negative) or tanh (bounded).
        output_scale / output_offset: affine rescale applied after the activation.
        rng: numpy Generator used for the ±1/sqrt(fan_in) uniform init.
        dtype: parameter precision (float32 for training, float64 for checks).
    """

    def __init__(
        self,
        layer_sizes: Sequence[int],
        output_activation: Union[OutputActivation, str] = OutputActivation.IDENTITY,
        output_scale: Optional[Union[float, Sequence[float]]] = None,
        output_offset: Optional[Union[float, Sequence[float]]] = None,
        rng: Optional[np.random.Generator] = None,
        dtype=np.float32,
    ):
        sizes = [int(n) for n in layer_sizes]
        if len(sizes) < 2 or any(n <= 0 for n in sizes):
            raise ContractViolationError(f"Invalid layer sizes: {list(layer_sizes)}")
        self.layer_sizes = sizes
        self.output_activation = OutputActivation(output_activation)
        self.dtype = np.dtype(dtype)
        rng = rng if rng is not None else np.random.default_rng()

        self.weights: List[np.ndarray] = []
        self.biases: List[np.ndarray] = []
        for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
            bound = 1.0 / np.sqrt(fan_in)
            self.weights.append(rng.uniform(-bound, bound, size=(fan_in, fan_out)).astype(self.dtype))
            self.biases.append(rng.uniform(-bound, bound, size=fan_out).astype(self.dtype))

        width = sizes[-1]
        self.output_scale = self._broadcast(output_scale, 1.0, width)
        self.output_offset = self._broadcast(output_offset, 0.0, width)

    def _broadcast(self, value, default: float, width: int) -> np.ndarray:
        value = default if value is None else value
        return np.broadcast_to(np.asarray(value, dtype=self.dtype), (width,)).copy()

    # ------------------------------------------------------------------ shape
    @property
    def input_size(self) -> int:
        return self.layer_sizes[0]

    @property
    def output_size(self) -> int:
        return self.layer_sizes[-1]

    @property
    def params(self) -> List[np.ndarray]:
        """Live references ordered [W0, b0, W1, b1, ...]; W has shape (in, out)."""
        out = []
        for w, b in zip(self.weights, self.biases):
            out.extend((w, b))
        return out

    def same_architecture(self, other: "Approximator") -> bool:
        return (self.layer_sizes == other.layer_sizes
                and self.output_activation == other.output_activation)

    def _as_batch(self, x) -> Tuple[np.ndarray, bool]:
        arr = np.asarray(x, dtype=self.dtype)
        single = arr.ndim == 1
        batch = arr[None, :] if single else arr
        if batch.ndim != 2 or batch.shape[1] != self.input_size:
            raise ContractViolationError(
                f"Input shape {arr.shape} does not match input width {self.input_size}")
        _require_finite(batch, "network input")
        return batch, single

    def _as_upstream(self, upstream, rows: int, single: bool) -> np.ndarray:
        up = np.asarray(upstream, dtype=self.dtype)
        expected = (self.output_size,) if single else (rows, self.output_size)
        if up.shape != expected:
            raise ContractViolationError(f"Upstream shape {up.shape} expected {expected}")
        return up.reshape(rows, self.output_size)

    # ---------------------------------------------------------------- forward
    def _trace(self, batch: np.ndarray) -> Tuple[List[np.ndarray], List[np.ndarray]]:
        inputs, pre = [], []
        h = batch
        last = len(self.weights) - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            inputs.append(h)
            z = h @ w + b
            pre.append(z)
            h = np.maximum(z, 0) if i < last else z
        return inputs, pre

    def _head(self, z: np.ndarray) -> np.ndarray:
        if self.output_activation == OutputActivation.SOFTPLUS:
            y = np.logaddexp(0, z).astype(self.dtype, copy=False)
        elif self.output_activation == OutputActivation.TANH:
            y = np.tanh(z)
        else:
            y = z
        return y * self.output_scale + self.output_offset

    def _head_derivative(self, z: np.ndarray) -> np.ndarray:
        if self.output_activation == OutputActivation.SOFTPLUS:
            # logistic sigmoid written through tanh to stay finite for large |z|
            d = 0.5 * (1.0 + np.tanh(0.5 * z))
        elif self.output_activation == OutputActivation.TANH:
            d = 1.0 - np.tanh(z) ** 2
        else:
            d = np.ones_like(z)
        return (d * self.output_scale).astype(self.dtype, copy=False)

    def forward(self, x) -> np.ndarray:
        batch, single = self._as_batch(x)
        _, pre = self._trace(batch)
        y = self._head(pre[-1])
        _require_finite(y, "network output")
        return y[0] if single else y

    __call__ = forward

    # --------------------------------------------------------------- backward
    def backward(self, x, upstream) -> Tuple[List[np.ndarray], np.ndarray]:
        """Gradients of sum(upstream * forward(x)) w.r.t. parameters and input."""
        batch, single = self._as_batch(x)
        up = self._as_upstream(upstream, batch.shape[0], single)
        inputs, pre = self._trace(batch)

        delta = up * self._head_derivative(pre[-1])
        grads: List[np.ndarray] = [None] * (2 * len(self.weights))
        for i in reversed(range(len(self.weights))):
            grads[2 * i] = inputs[i].T @ delta
            grads[2 * i + 1] = delta.sum(axis=0)
            delta = delta @ self.weights[i].T
            if i > 0:
                delta = delta * (pre[i - 1] > 0)
        for g in grads:
            _require_finite(g, "parameter gradient")
        _require_finite(delta, "input gradient")
        return grads, (delta[0] if single else delta)

    def grad_params(self, x, upstream) -> List[np.ndarray]:
        return self.backward(x, upstream)[0]

    def grad_input(self, x, upstream) -> np.ndarray:
        return self.backward(x, upstream)[1]

    # ----------------------------------------------------------------- copies
    def copy(self) -> "Approximator":
        return self.astype(self.dtype)

    def astype(self, dtype) -> "Approximator":
        clone = object.__new__(Approximator)
        clone.layer_sizes = list(self.layer_sizes)
        clone.output_activation = self.output_activation
        clone.dtype = np.dtype(dtype)
        clone.weights = [w.astype(clone.dtype, copy=True) for w in self.weights]
        clone.biases = [b.astype(clone.dtype, copy=True) for b in self.biases]
        clone.output_scale = self.output_scale.astype(clone.dtype, copy=True)
        clone.output_offset = self.output_offset.astype(clone.dtype, copy=True)
        return clone

    def set_params(self, params: Sequence[np.ndarray]) -> None:
        current = self.params
        if len(params) != len(current):
            raise ContractViolationError("Parameter count mismatch")
        for dst, src in zip(current, params):
            if dst.shape != np.shape(src):
                raise ContractViolationError(f"Parameter shape {np.shape(src)} expected {dst.shape}")
            dst[...] = src

    # ------------------------------------------------------------ persistence
    def state_dict(self, prefix: str = "") -> Dict[str, np.ndarray]:
        state = {
            f"{prefix}layer_sizes": np.asarray(self.layer_sizes, dtype=np.int64),
            f"{prefix}output_activation": np.asarray(self.output_activation.value),
            f"{prefix}output_scale": self.output_scale,
            f"{prefix}output_offset": self.output_offset,
        }
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            state[f"{prefix}W{i}"] = w
            state[f"{prefix}b{i}"] = b
        return state

    @classmethod
    def from_state_dict(cls, state, prefix: str = "") -> "Approximator":
        sizes = [int(n) for n in np.asarray(state[f"{prefix}layer_sizes"])]
        dtype = np.asarray(state[f"{prefix}W0"]).dtype
        net = object.__new__(cls)
        net.layer_sizes = sizes
        net.output_activation = OutputActivation(str(np.asarray(state[f"{prefix}output_activation"])))
        net.dtype = np.dtype(dtype)
        net.weights = [np.array(state[f"{prefix}W{i}"], dtype=dtype) for i in range(len(sizes) - 1)]
        net.biases = [np.array(state[f"{prefix}b{i}"], dtype=dtype) for i in range(len(sizes) - 1)]
        net.output_scale = np.array(state[f"{prefix}output_scale"], dtype=dtype)
        net.output_offset = np.array(state[f"{prefix}output_offset"], dtype=dtype)
        return net

    def save(self, path: Union[str, Path]) -> Path:
        return save_checkpoint(path, self.state_dict())

    @classmethod
    def load(cls, path: Union[str, Path]) -> "Approximator":
        return cls.from_state_dict(load_checkpoint(path))

    def digest(self) -> str:
        h = hashlib.sha256()
        h.update(np.asarray(self.layer_sizes, dtype=np.int64).tobytes())
        for p in self.params:
            h.update(np.ascontiguousarray(p).tobytes())
        return h.hexdigest()


def save_checkpoint(path: Union[str, Path], state: Dict[str, np.ndarray]) -> Path:
    """Writes a versioned npz archive; the suffix is kept as given."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    buffer = io.BytesIO()
    np.savez(buffer, format_version=np.asarray(CHECKPOINT_FORMAT_VERSION), **state)
    path.write_bytes(buffer.getvalue())
    return path


def load_checkpoint(path: Union[str, Path]) -> Dict[str, np.ndarray]:
    with np.load(Path(path), allow_pickle=False) as archive:
        version = int(archive["format_version"])
        if version != CHECKPOINT_FORMAT_VERSION:
            raise ContractViolationError(f"Unsupported checkpoint version {version}")
        return {key: archive[key] for key in archive.files}


def soft_update(target: Approximator, online: Approximator, tau: float) -> Approximator:
    """theta' <- tau * theta + (1 - tau) * theta', in place on ``target``."""
    if not target.same_architecture(online):
        raise ContractViolationError("soft_update requires identical architectures")
    if not 0.0 <= tau <= 1.0:
        raise ContractViolationError(f"tau must be in [0, 1], got {tau}")
    for p_target, p_online in zip(target.params, online.params):
        p_target[...] = tau * p_online + (1.0 - tau) * p_target
    return target


def parameter_distance(a: Approximator, b: Approximator) -> float:
    if not a.same_architecture(b):
        raise ContractViolationError("parameter_distance requires identical architectures")
    return float(np.sqrt(sum(np.sum((pa.astype(np.float64) - pb) ** 2) for pa, pb in zip(a.params, b.params))))
