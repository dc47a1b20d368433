"""
Dense tensors with a reverse-mode gradient tape.

A Tensor wraps a contiguous numpy array. Operations in ops.py record
themselves on the active GradTape when at least one input requires a
gradient; without an active tape they are plain, side-effect free
numpy computations (safe for concurrent inference).
"""

from __future__ import annotations

import contextlib
from collections.abc import Callable, Iterator, Sequence
from contextvars import ContextVar
from dataclasses import dataclass

import numpy as np

from src.services.exceptions import ContractError

BackwardFn = Callable[[np.ndarray], Sequence[np.ndarray | None]]

_DEFAULT_DTYPE: ContextVar[np.dtype] = ContextVar("aliif_default_dtype", default=np.dtype(np.float32))
_ACTIVE_TAPE: ContextVar[GradTape | None] = ContextVar("aliif_active_tape", default=None)


def default_dtype() -> np.dtype:
    """Floating dtype used for new tensors and parameter initialisation."""
    return _DEFAULT_DTYPE.get()


@contextlib.contextmanager
def precision(dtype: type | np.dtype) -> Iterator[None]:
    """Temporarily change the default dtype (float64 for gradient checks)."""
    token = _DEFAULT_DTYPE.set(np.dtype(dtype))
    try:
        yield
    finally:
        _DEFAULT_DTYPE.reset(token)


class Tensor:
    """
    Dense N-dimensional float array with optional gradient participation.

    Equality and hashing are by identity so tensors can key gradient maps.
    """

    __slots__ = ("data", "grad", "name", "requires_grad")

    def __init__(
        self,
        data: object,
        requires_grad: bool = False,
        name: str | None = None,
        dtype: type | np.dtype | None = None,
    ) -> None:
        if dtype is None:
            dtype = data.dtype if isinstance(data, np.ndarray) and data.dtype.kind == "f" else default_dtype()
        self.data: np.ndarray = np.ascontiguousarray(data, dtype=dtype)
        self.requires_grad = requires_grad
        self.grad: np.ndarray | None = None
        self.name = name

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    @property
    def dtype(self) -> np.dtype:
        return self.data.dtype

    def numpy(self) -> np.ndarray:
        return self.data

    def item(self) -> float:
        return float(self.data.reshape(-1)[0])

    def detach(self) -> Tensor:
        """Copy that does not participate in any tape."""
        return Tensor(self.data.copy(), requires_grad=False, name=self.name)

    def __repr__(self) -> str:
        label = f" name={self.name!r}" if self.name else ""
        return f"Tensor(shape={self.shape}, dtype={self.dtype}, requires_grad={self.requires_grad}{label})"


@dataclass
class _TapeRecord:
    op: str
    output: Tensor
    inputs: tuple[Tensor, ...]
    backward: BackwardFn


class GradientMap(dict):
    """Mapping Tensor -> gradient array. Tensors outside the loss graph are absent."""

    def of(self, tensor: Tensor) -> np.ndarray | None:
        return self.get(tensor)


class GradTape:
    """
    Ordered record of executed ops for one forward pass.

    Usage:
        with GradTape() as tape:
            loss = l1_loss(model(x), y)
        grads = tape.backward(loss)

    The tape is consumed by backward(); a second call raises ContractError.
    """

    def __init__(self) -> None:
        self._records: list[_TapeRecord] = []
        self._consumed = False
        self._token = None

    def __enter__(self) -> GradTape:
        self._token = _ACTIVE_TAPE.set(self)
        return self

    def __exit__(self, *exc_info: object) -> None:
        _ACTIVE_TAPE.reset(self._token)
        self._token = None

    def __len__(self) -> int:
        return len(self._records)

    @property
    def consumed(self) -> bool:
        return self._consumed

    @property
    def op_names(self) -> list[str]:
        return [record.op for record in self._records]

    def record(self, op: str, output: Tensor, inputs: tuple[Tensor, ...], backward_fn: BackwardFn) -> None:
        if self._consumed:
            raise ContractError("gradient tape already consumed by backward()")
        self._records.append(_TapeRecord(op=op, output=output, inputs=inputs, backward=backward_fn))

    def backward(self, loss: Tensor) -> GradientMap:
        """Propagate d(loss)/d(.) to every participating tensor, newest op first."""
        if self._consumed:
            raise ContractError("gradient tape already consumed by backward()")
        if loss.size != 1:
            raise ContractError(f"backward() needs a scalar loss, got shape {loss.shape}")
        if not loss.requires_grad:
            raise ContractError("loss is not on the gradient tape (no input requires a gradient)")

        grads: dict[int, np.ndarray] = {id(loss): np.ones_like(loss.data)}
        tensors: dict[int, Tensor] = {id(loss): loss}
        for record in reversed(self._records):
            upstream = grads.get(id(record.output))
            if upstream is None:
                continue
            input_grads = record.backward(upstream)
            for tensor, grad in zip(record.inputs, input_grads, strict=True):
                if grad is None or not tensor.requires_grad:
                    continue
                key = id(tensor)
                if key in grads:
                    grads[key] = grads[key] + grad
                else:
                    grads[key] = grad
                    tensors[key] = tensor

        self._records.clear()
        self._consumed = True

        result = GradientMap()
        for key, grad in grads.items():
            tensor = tensors[key]
            tensor.grad = grad.reshape(tensor.shape)
            result[tensor] = tensor.grad
        return result


def active_tape() -> GradTape | None:
    return _ACTIVE_TAPE.get()


def record_op(op: str, data: np.ndarray, inputs: tuple[Tensor, ...], backward_fn: BackwardFn) -> Tensor:
    """Wrap an op result; register it on the active tape when any input needs a gradient."""
    tape = _ACTIVE_TAPE.get()
    tracked = tape is not None and any(t.requires_grad for t in inputs)
    out = Tensor(data, requires_grad=tracked, dtype=data.dtype)
    if tracked:
        tape.record(op, out, inputs, backward_fn)
    return out


def backward(loss: Tensor, tape: GradTape | None = None) -> GradientMap:
    """Run the backward pass of ``tape`` (default: the active tape) from a scalar loss."""
    if tape is None:
        tape = _ACTIVE_TAPE.get()
    if tape is None:
        raise ContractError("backward() called without a gradient tape")
    return tape.backward(loss)
