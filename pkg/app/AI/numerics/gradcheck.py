"""Central finite-difference oracle, always evaluated in float64."""
from typing import Callable, List, Optional, Tuple

import numpy as np

from app.AI.numerics.network import Approximator
from app.schemas.report import GradCheckReport

DEFAULT_STEP = 1e-5
ABSOLUTE_FLOOR = 1e-8


def relative_error(analytic: np.ndarray, numeric: np.ndarray, floor: float = ABSOLUTE_FLOOR) -> np.ndarray:
    """Elementwise relative error; coordinates with |analytic| < floor are compared absolutely."""
    analytic = np.asarray(analytic, dtype=np.float64)
    numeric = np.asarray(numeric, dtype=np.float64)
    diff = np.abs(analytic - numeric)
    scale = np.maximum(np.abs(analytic), np.abs(numeric))
    return np.where(np.abs(analytic) < floor, diff, diff / np.maximum(scale, floor))


def numeric_param_gradient(net: Approximator, objective: Callable[[], float],
                           step: float = DEFAULT_STEP) -> List[np.ndarray]:
    """Perturbs every parameter of ``net`` in place and restores it."""
    grads = []
    for p in net.params:
        g = np.zeros(p.shape, dtype=np.float64)
        for j in range(p.size):
            original = p.flat[j]
            p.flat[j] = original + step
            plus = objective()
            p.flat[j] = original - step
            minus = objective()
            p.flat[j] = original
            g.flat[j] = (plus - minus) / (2.0 * step)
        grads.append(g)
    return grads


def numeric_input_gradient(fn: Callable[[np.ndarray], float], x: np.ndarray,
                           step: float = DEFAULT_STEP) -> np.ndarray:
    x = np.array(x, dtype=np.float64)
    g = np.zeros_like(x)
    for j in range(x.size):
        original = x.flat[j]
        x.flat[j] = original + step
        plus = fn(x)
        x.flat[j] = original - step
        minus = fn(x)
        x.flat[j] = original
        g.flat[j] = (plus - minus) / (2.0 * step)
    return g


def _worst(errors: List[np.ndarray]) -> Tuple[float, Optional[Tuple[int, int]]]:
    worst, where = 0.0, None
    for i, err in enumerate(errors):
        if err.size and float(err.max()) >= worst:
            worst, where = float(err.max()), (i, int(err.argmax()))
    return worst, where


def finite_diff_check(net: Approximator, x, tolerance: float = 1e-4, step: float = DEFAULT_STEP,
                      upstream: Optional[np.ndarray] = None,
                      rng: Optional[np.random.Generator] = None) -> GradCheckReport:
    """
    Compares grad_params and grad_input of ``net`` with central differences.

    The check runs on a float64 copy so ``net`` itself is never touched. The
    scalar checked is ``upstream . forward(x)`` with a random upstream by default.
    """
    copy64 = net.astype(np.float64)
    x = np.asarray(x, dtype=np.float64)
    if upstream is None:
        rng = rng if rng is not None else np.random.default_rng(0)
        shape = (copy64.output_size,) if x.ndim == 1 else (x.shape[0], copy64.output_size)
        upstream = rng.normal(size=shape)
    upstream = np.asarray(upstream, dtype=np.float64)

    analytic_params, analytic_input = copy64.backward(x, upstream)
    numeric_params = numeric_param_gradient(copy64, lambda: float(np.sum(upstream * copy64.forward(x))), step)
    numeric_input = numeric_input_gradient(lambda v: float(np.sum(upstream * copy64.forward(v))), x, step)

    param_error, worst_param = _worst([relative_error(a, n) for a, n in zip(analytic_params, numeric_params)])
    input_errors = relative_error(analytic_input, numeric_input).reshape(-1)
    input_error = float(input_errors.max()) if input_errors.size else 0.0
    return GradCheckReport(
        max_param_error=param_error,
        worst_param=worst_param,
        max_input_error=input_error,
        worst_input=int(input_errors.argmax()) if input_errors.size else None,
        tolerance=tolerance,
        passed=param_error < tolerance and input_error < tolerance,
    )
