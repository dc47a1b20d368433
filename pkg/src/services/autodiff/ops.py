"""
Differentiable tensor operations.

Each op computes its forward value with numpy and registers a backward
closure through record_op(). Broadcasting is limited to bias-add over the
last dimension and row scaling; every other op needs equal shapes.
"""

from __future__ import annotations

from collections.abc import Sequence

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from src.services.autodiff.tensor import Tensor, record_op
from src.services.exceptions import ContractError, DimensionError


def _require_same_shape(op: str, a: Tensor, b: Tensor) -> None:
    if a.shape != b.shape:
        raise DimensionError(f"{op}: shapes {a.shape} and {b.shape} differ")


# ---------------------------------------------------------------------------
# Linear algebra
# ---------------------------------------------------------------------------
def matmul(a: Tensor, b: Tensor) -> Tensor:
    """Matrix product of a [m, k] and b [k, n]."""
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise DimensionError(f"matmul: cannot multiply {a.shape} by {b.shape}")
    a_data, b_data = a.data, b.data

    def backward_fn(g: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return g @ b_data.T, a_data.T @ g

    return record_op("matmul", a_data @ b_data, (a, b), backward_fn)


def add_bias(x: Tensor, bias: Tensor) -> Tensor:
    """x[..., n] + bias[n], broadcast over every leading dimension."""
    if bias.ndim != 1 or x.ndim == 0 or x.shape[-1] != bias.shape[0]:
        raise DimensionError(f"add_bias: bias {bias.shape} does not match last dimension of {x.shape}")
    n = bias.shape[0]

    def backward_fn(g: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return g, g.reshape(-1, n).sum(axis=0)

    return record_op("add_bias", x.data + bias.data, (x, bias), backward_fn)


def linear(x: Tensor, weight: Tensor, bias: Tensor) -> Tensor:
    """Fully-connected layer: x @ weight + bias."""
    return add_bias(matmul(x, weight), bias)


# ---------------------------------------------------------------------------
# Elementwise
# ---------------------------------------------------------------------------
def add(a: Tensor, b: Tensor) -> Tensor:
    _require_same_shape("add", a, b)
    return record_op("add", a.data + b.data, (a, b), lambda g: (g, g))


def sub(a: Tensor, b: Tensor) -> Tensor:
    _require_same_shape("sub", a, b)
    return record_op("sub", a.data - b.data, (a, b), lambda g: (g, -g))


def mul(a: Tensor, b: Tensor) -> Tensor:
    _require_same_shape("mul", a, b)
    a_data, b_data = a.data, b.data
    return record_op("mul", a_data * b_data, (a, b), lambda g: (g * b_data, g * a_data))


def scale(x: Tensor, factor: float) -> Tensor:
    return record_op("scale", x.data * factor, (x,), lambda g: (g * factor,))


def relu(x: Tensor) -> Tensor:
    """max(0, x); the subgradient at exactly 0 is 0."""
    mask = x.data > 0
    return record_op("relu", np.where(mask, x.data, 0).astype(x.dtype), (x,), lambda g: (g * mask,))


def absolute(x: Tensor) -> Tensor:
    sign = np.sign(x.data)
    return record_op("abs", np.abs(x.data), (x,), lambda g: (g * sign,))


def softmax(x: Tensor) -> Tensor:
    """Softmax over the last axis, computed with max subtraction."""
    if x.ndim == 0 or x.shape[-1] == 0 or x.size == 0:
        raise DimensionError(f"softmax: empty input of shape {x.shape}")
    shifted = x.data - x.data.max(axis=-1, keepdims=True)
    exp = np.exp(shifted)
    y = exp / exp.sum(axis=-1, keepdims=True)

    def backward_fn(g: np.ndarray) -> tuple[np.ndarray]:
        return (y * (g - (g * y).sum(axis=-1, keepdims=True)),)

    return record_op("softmax", y, (x,), backward_fn)


def scale_rows(x: Tensor, weights: Tensor) -> Tensor:
    """x[n, c] * weights[n] (each row scaled by its own weight)."""
    if x.ndim != 2 or weights.shape != (x.shape[0],):
        raise DimensionError(f"scale_rows: weights {weights.shape} do not match rows of {x.shape}")
    x_data, w_data = x.data, weights.data

    def backward_fn(g: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return g * w_data[:, None], (g * x_data).sum(axis=1)

    return record_op("scale_rows", x_data * w_data[:, None], (x, weights), backward_fn)


# ---------------------------------------------------------------------------
# Reductions
# ---------------------------------------------------------------------------
def sum_all(x: Tensor) -> Tensor:
    shape, dtype = x.shape, x.dtype
    return record_op("sum", np.asarray(x.data.sum(), dtype=dtype), (x,), lambda g: (np.full(shape, g, dtype=dtype),))


def mean_all(x: Tensor) -> Tensor:
    if x.size == 0:
        raise DimensionError("mean of an empty tensor")
    count = x.size
    shape, dtype = x.shape, x.dtype
    return record_op(
        "mean",
        np.asarray(x.data.sum() / count, dtype=dtype),
        (x,),
        lambda g: (np.full(shape, g / count, dtype=dtype),),
    )


# ---------------------------------------------------------------------------
# Shape and indexing
# ---------------------------------------------------------------------------
def reshape(x: Tensor, shape: tuple[int, ...]) -> Tensor:
    original = x.shape
    return record_op("reshape", x.data.reshape(shape), (x,), lambda g: (g.reshape(original),))


def transpose(x: Tensor, axes: tuple[int, ...]) -> Tensor:
    inverse = tuple(np.argsort(axes))
    return record_op(
        "transpose",
        np.ascontiguousarray(x.data.transpose(axes)),
        (x,),
        lambda g: (np.ascontiguousarray(g.transpose(inverse)),),
    )


def gather_rows(x: Tensor, index: np.ndarray) -> Tensor:
    """Rows x[index] of a [m, c] tensor; gradients scatter-add back."""
    if x.ndim != 2:
        raise DimensionError(f"gather_rows needs a 2-D tensor, got {x.shape}")
    index = np.asarray(index, dtype=np.intp)
    if index.size and (index.min() < 0 or index.max() >= x.shape[0]):
        raise ContractError(f"gather_rows: index out of range for {x.shape[0]} rows")
    shape, dtype = x.shape, x.dtype

    def backward_fn(g: np.ndarray) -> tuple[np.ndarray]:
        grad = np.zeros(shape, dtype=dtype)
        np.add.at(grad, index, g)
        return (grad,)

    return record_op("gather_rows", x.data[index], (x,), backward_fn)


def take_column(x: Tensor, column: int) -> Tensor:
    """Column x[:, column] of a [n, k] tensor as a [n] tensor."""
    if x.ndim != 2 or not 0 <= column < x.shape[1]:
        raise DimensionError(f"take_column: column {column} outside {x.shape}")
    shape, dtype = x.shape, x.dtype

    def backward_fn(g: np.ndarray) -> tuple[np.ndarray]:
        grad = np.zeros(shape, dtype=dtype)
        grad[:, column] = g
        return (grad,)

    return record_op("take_column", x.data[:, column].copy(), (x,), backward_fn)


def concat(tensors: Sequence[Tensor], axis: int = -1) -> Tensor:
    if not tensors:
        raise DimensionError("concat of zero tensors")
    first = tensors[0]
    axis = axis % first.ndim
    other_dims = first.shape[:axis] + first.shape[axis + 1 :]
    for t in tensors[1:]:
        if t.ndim != first.ndim or t.shape[:axis] + t.shape[axis + 1 :] != other_dims:
            raise DimensionError(f"concat: {t.shape} does not align with {first.shape} on axis {axis}")
    splits = np.cumsum([t.shape[axis] for t in tensors])[:-1]

    def backward_fn(g: np.ndarray) -> list[np.ndarray]:
        return np.split(g, splits, axis=axis)

    data = np.concatenate([t.data for t in tensors], axis=axis)
    return record_op("concat", data, tuple(tensors), backward_fn)


# ---------------------------------------------------------------------------
# Convolution
# ---------------------------------------------------------------------------
def _im2col_3x3(padded: np.ndarray, height: int, width: int) -> np.ndarray:
    """[c, h+2, w+2] -> [c*9, h*w] with rows ordered (channel, ky, kx)."""
    channels = padded.shape[0]
    windows = sliding_window_view(padded, (3, 3), axis=(1, 2))
    return windows.transpose(0, 3, 4, 1, 2).reshape(channels * 9, height * width)


def conv2d(x: Tensor, kernel: Tensor, bias: Tensor | None = None, padding: int = 1) -> Tensor:
    """
    3x3 cross-correlation (no kernel flip) with zero padding 1.

    Args:
        x: input [C_in, H, W]
        kernel: [C_out, C_in, 3, 3]
        bias: optional per-output-channel bias [C_out]
        padding: must be 1 (spatial size is preserved)

    Returns:
        Tensor [C_out, H, W]
    """
    if padding != 1:
        raise ContractError(f"conv2d supports padding=1 only, got {padding}")
    if kernel.ndim != 4 or kernel.shape[2:] != (3, 3):
        raise ContractError(f"conv2d supports 3x3 kernels only, got {kernel.shape}")
    if x.ndim != 3 or x.shape[0] != kernel.shape[1]:
        raise DimensionError(f"conv2d: input {x.shape} does not match kernel {kernel.shape}")
    c_out, c_in = kernel.shape[:2]
    if bias is not None and bias.shape != (c_out,):
        raise DimensionError(f"conv2d: bias {bias.shape} does not match {c_out} output channels")

    _, height, width = x.shape
    padded = np.pad(x.data, ((0, 0), (1, 1), (1, 1)))
    cols = _im2col_3x3(padded, height, width)
    k2 = kernel.data.reshape(c_out, c_in * 9)
    out = k2 @ cols
    if bias is not None:
        out = out + bias.data[:, None]

    def backward_fn(g: np.ndarray) -> tuple[np.ndarray | None, ...]:
        g2 = g.reshape(c_out, height * width)
        grad_kernel = (g2 @ cols.T).reshape(kernel.shape)
        dcols = (k2.T @ g2).reshape(c_in, 3, 3, height, width)
        dpad = np.zeros_like(padded)
        for ky in range(3):
            for kx in range(3):
                dpad[:, ky : ky + height, kx : kx + width] += dcols[:, ky, kx]
        grad_input = dpad[:, 1 : height + 1, 1 : width + 1]
        if bias is None:
            return grad_input, grad_kernel
        return grad_input, grad_kernel, g2.sum(axis=1)

    inputs = (x, kernel) if bias is None else (x, kernel, bias)
    return record_op("conv2d", out.reshape(c_out, height, width), inputs, backward_fn)


# ---------------------------------------------------------------------------
# Losses
# ---------------------------------------------------------------------------
def l1_loss(pred: Tensor, target: Tensor) -> Tensor:
    """Mean absolute error over every value."""
    if pred.shape != target.shape:
        raise ContractError(f"l1_loss: prediction {pred.shape} and target {target.shape} differ")
    return mean_all(absolute(sub(pred, target)))
