"""
Adam with bias correction, and the epoch step-decay learning-rate schedule.
"""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass, field

import numpy as np

from src.services.autodiff.tensor import Tensor
from src.services.exceptions import ContractError
from src.services.network.layers import NamedParameters

BETA1 = 0.9
BETA2 = 0.999
EPSILON = 1e-8


@dataclass
class AdamState:
    """First/second moment estimates per parameter name, plus the step counter."""

    first: dict[str, np.ndarray] = field(default_factory=dict)
    second: dict[str, np.ndarray] = field(default_factory=dict)
    step: int = 0
    beta1: float = BETA1
    beta2: float = BETA2
    eps: float = EPSILON

    @classmethod
    def initialise(cls, params: NamedParameters) -> AdamState:
        names = [name for name, _ in params]
        if len(set(names)) != len(names):
            raise ContractError("parameter names must be unique")
        return cls(
            first={name: np.zeros_like(tensor.data) for name, tensor in params},
            second={name: np.zeros_like(tensor.data) for name, tensor in params},
        )


def adam_step(
    params: NamedParameters,
    grads: Mapping[Tensor, np.ndarray],
    state: AdamState,
    lr: float,
) -> AdamState:
    """
    One Adam update applied in place to every parameter.

    Raises:
        ContractError: a parameter has no gradient, or has no moments in ``state``
    """
    for name, tensor in params:
        if grads.get(tensor) is None:
            raise ContractError(f"missing gradient for parameter {name}")
        if name not in state.first or state.first[name].shape != tensor.shape:
            raise ContractError(f"optimizer state does not match parameter {name} {tensor.shape}")

    state.step += 1
    t = state.step
    correction1 = 1.0 - state.beta1**t
    correction2 = 1.0 - state.beta2**t
    for name, tensor in params:
        grad = grads[tensor]
        m = state.first[name]
        v = state.second[name]
        m *= state.beta1
        m += (1.0 - state.beta1) * grad
        v *= state.beta2
        v += (1.0 - state.beta2) * grad * grad
        m_hat = m / correction1
        v_hat = v / correction2
        tensor.data -= (lr * m_hat / (np.sqrt(v_hat) + state.eps)).astype(tensor.dtype, copy=False)
    return state


def learning_rate(base_lr: float, epoch: int, decay_every: int, decay_factor: float = 0.5) -> float:
    """lr of a 0-based epoch: base_lr * decay_factor ** (epoch // decay_every)."""
    if epoch < 0 or decay_every < 1:
        raise ContractError(f"invalid schedule position epoch={epoch}, decay_every={decay_every}")
    return base_lr * decay_factor ** (epoch // decay_every)
