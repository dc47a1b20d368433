"""
Parameter containers: fully-connected layers, MLPs and 3x3 convolutions.

Weights use Kaiming-uniform fan-in initialisation, biases start at zero.
Every container reports its tensors through named_parameters() in a fixed
declaration order; checkpoints and the optimizer rely on that order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from src.services.autodiff import ops
from src.services.autodiff.tensor import Tensor, default_dtype
from src.services.exceptions import ContractError

NamedParameters = list[tuple[str, Tensor]]


def kaiming_uniform(shape: tuple[int, ...], fan_in: int, rng: np.random.Generator) -> np.ndarray:
    bound = math.sqrt(6.0 / fan_in)
    return rng.uniform(-bound, bound, size=shape).astype(default_dtype())


def _param(data: np.ndarray, name: str) -> Tensor:
    return Tensor(data, requires_grad=True, name=name)


@dataclass
class Linear:
    """y = x @ weight + bias with weight [in, out]."""

    weight: Tensor
    bias: Tensor

    @classmethod
    def initialise(cls, in_features: int, out_features: int, rng: np.random.Generator, name: str) -> Linear:
        weight = kaiming_uniform((in_features, out_features), in_features, rng)
        return cls(
            weight=_param(weight, f"{name}.weight"),
            bias=_param(np.zeros(out_features, dtype=default_dtype()), f"{name}.bias"),
        )

    @property
    def in_features(self) -> int:
        return self.weight.shape[0]

    @property
    def out_features(self) -> int:
        return self.weight.shape[1]

    def __call__(self, x: Tensor) -> Tensor:
        return ops.linear(x, self.weight, self.bias)

    def named_parameters(self) -> NamedParameters:
        return [(self.weight.name, self.weight), (self.bias.name, self.bias)]


class MLP:
    """Stack of Linear layers with ReLU between them and no output activation."""

    def __init__(self, layers: list[Linear]) -> None:
        if not layers:
            raise ContractError("MLP needs at least one layer")
        for prev, nxt in zip(layers, layers[1:], strict=False):
            if prev.out_features != nxt.in_features:
                raise ContractError(f"MLP layer widths do not chain: {prev.out_features} -> {nxt.in_features}")
        self.layers = layers

    @classmethod
    def initialise(
        cls,
        in_features: int,
        hidden: int,
        out_features: int,
        depth: int,
        rng: np.random.Generator,
        name: str,
    ) -> MLP:
        """depth fully-connected layers: in -> hidden (x depth-1) -> out."""
        if depth < 1:
            raise ContractError(f"MLP depth must be >= 1, got {depth}")
        widths = [in_features] + [hidden] * (depth - 1) + [out_features]
        layers = [
            Linear.initialise(widths[i], widths[i + 1], rng, f"{name}.layers.{i}") for i in range(depth)
        ]
        return cls(layers)

    @property
    def in_features(self) -> int:
        return self.layers[0].in_features

    @property
    def out_features(self) -> int:
        return self.layers[-1].out_features

    @property
    def widths(self) -> tuple[int, ...]:
        return (self.in_features, *(layer.out_features for layer in self.layers))

    def __call__(self, x: Tensor) -> Tensor:
        if x.ndim != 2 or x.shape[1] != self.in_features:
            raise ContractError(f"MLP expects inputs of width {self.in_features}, got shape {x.shape}")
        return self.from_first_layer(self.layers[0](x))

    def from_first_layer(self, pre_activation: Tensor) -> Tensor:
        """Rest of the forward pass, given the first layer's output before its ReLU."""
        x = pre_activation
        for layer in self.layers[1:]:
            x = layer(ops.relu(x))
        return x

    def named_parameters(self) -> NamedParameters:
        return [item for layer in self.layers for item in layer.named_parameters()]


@dataclass
class Conv3x3:
    """3x3 convolution, zero padding 1, kernel [out, in, 3, 3]."""

    kernel: Tensor
    bias: Tensor

    @classmethod
    def initialise(cls, in_channels: int, out_channels: int, rng: np.random.Generator, name: str) -> Conv3x3:
        kernel = kaiming_uniform((out_channels, in_channels, 3, 3), in_channels * 9, rng)
        return cls(
            kernel=_param(kernel, f"{name}.kernel"),
            bias=_param(np.zeros(out_channels, dtype=default_dtype()), f"{name}.bias"),
        )

    @property
    def in_channels(self) -> int:
        return self.kernel.shape[1]

    @property
    def out_channels(self) -> int:
        return self.kernel.shape[0]

    def __call__(self, x: Tensor) -> Tensor:
        return ops.conv2d(x, self.kernel, self.bias)

    def named_parameters(self) -> NamedParameters:
        return [(self.kernel.name, self.kernel), (self.bias.name, self.bias)]
