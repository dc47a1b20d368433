"""
Central finite-difference gradient checking.

Used by the test-suite in float64 mode (see tensor.precision).
"""

from collections.abc import Callable, Sequence
from dataclasses import dataclass, field

import numpy as np

from src.services.autodiff.tensor import GradTape, Tensor

DEFAULT_STEP = 1e-5
DENOMINATOR_FLOOR = 1e-8

# One-sided slopes disagreeing by more than this (relative, plus an absolute floor)
# mean the +/- step straddles a ReLU or |x| kink.
KINK_TOLERANCE = 1e-3
KINK_FLOOR = 1e-6


def relative_error(analytic: np.ndarray, numeric: np.ndarray, floor: float = DENOMINATOR_FLOOR) -> float:
    """Max elementwise |a-b| / max(|a|, |b|, floor)."""
    if analytic.size == 0:
        return 0.0
    denom = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), floor)
    return float(np.max(np.abs(analytic - numeric) / denom))


def norm_relative_error(analytic: np.ndarray, numeric: np.ndarray, floor: float = DENOMINATOR_FLOOR) -> float:
    """||a-b|| / max(||a||, ||b||, floor) over a whole parameter tensor."""
    diff = float(np.linalg.norm(analytic - numeric))
    return diff / max(float(np.linalg.norm(analytic)), float(np.linalg.norm(numeric)), floor)


def finite_differences(
    loss_fn: Callable[[], Tensor], param: Tensor, step: float = DEFAULT_STEP
) -> tuple[np.ndarray, np.ndarray]:
    """
    Central differences of loss_fn() w.r.t. every element of param (perturbed in place).

    Returns:
        (gradient estimate, boolean mask of elements whose step straddles a kink)
    """
    base = loss_fn().item()
    grad = np.zeros(param.data.size, dtype=np.float64)
    kinks = np.zeros(param.data.size, dtype=bool)
    flat = param.data.reshape(-1)
    for i in range(flat.size):
        original = flat[i]
        flat[i] = original + step
        plus = loss_fn().item()
        flat[i] = original - step
        minus = loss_fn().item()
        flat[i] = original
        forward, backward = (plus - base) / step, (base - minus) / step
        grad[i] = (plus - minus) / (2.0 * step)
        kinks[i] = abs(forward - backward) > KINK_TOLERANCE * max(abs(forward), abs(backward)) + KINK_FLOOR
    return grad.reshape(param.shape), kinks.reshape(param.shape)


def analytic_gradients(loss_fn: Callable[[], Tensor], params: Sequence[Tensor]) -> list[np.ndarray]:
    """Gradients from one taped forward/backward pass; absent gradients come back as zeros."""
    with GradTape() as tape:
        loss = loss_fn()
    grads = tape.backward(loss)
    return [np.asarray(grads.get(p, np.zeros_like(p.data)), dtype=np.float64) for p in params]


@dataclass
class GradCheckResult:
    """Per-parameter errors of one gradient check."""

    errors: dict[str, float] = field(default_factory=dict)
    checked: int = 0
    skipped: int = 0

    @property
    def max_error(self) -> float:
        return max(self.errors.values(), default=0.0)

    @property
    def skipped_fraction(self) -> float:
        total = self.checked + self.skipped
        return self.skipped / total if total else 0.0

    def worst(self) -> tuple[str, float]:
        name = max(self.errors, key=self.errors.__getitem__)
        return name, self.errors[name]


def check_gradients(
    loss_fn: Callable[[], Tensor],
    params: Sequence[Tensor],
    step: float = DEFAULT_STEP,
    per_tensor_norm: bool = False,
    skip_kinks: bool = False,
) -> GradCheckResult:
    """
    Compare analytic and central-difference gradients for every parameter.

    Args:
        loss_fn: closure recomputing a scalar loss from the current parameter values
        params: tensors with requires_grad=True
        step: finite-difference step h
        per_tensor_norm: use the norm-wise relative error instead of the elementwise maximum
        skip_kinks: leave out elements whose +/- step crosses a non-differentiable point
            (counted in ``skipped``)

    Returns:
        GradCheckResult keyed by parameter name (or position)
    """
    analytic = analytic_gradients(loss_fn, params)
    result = GradCheckResult()
    metric = norm_relative_error if per_tensor_norm else relative_error
    for position, (param, grad) in enumerate(zip(params, analytic, strict=True)):
        numeric, kinks = finite_differences(loss_fn, param, step)
        if skip_kinks:
            keep = ~kinks
            grad, numeric = grad[keep], numeric[keep]
            result.skipped += int(kinks.sum())
        result.checked += int(grad.size)
        result.errors[param.name or f"param_{position}"] = metric(grad, numeric)
    return result
