"""Полносвязные слои и MLP поверх движка автодифференцирования."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from app.autodiff.node import DiffNode, as_node, linear, relu, reshape
from app.autodiff.optim import Parameter, ParameterSet


def xavier_bound(fan_in: int, fan_out: int) -> float:
    return float(np.sqrt(6.0 / (fan_in + fan_out)))


class Linear:
    """Слой `x @ W + b` с равномерной инициализацией Ксавье.

    Args:
        params: Набор, куда регистрируются `{name}.weight` и `{name}.bias`.
        name: Префикс имён параметров.
        fan_in: Ширина входа.
        fan_out: Ширина выхода.
        rng: Генератор для инициализации весов.
        scale: Множитель границы инициализации.
    """

    def __init__(
        self,
        params: ParameterSet,
        name: str,
        fan_in: int,
        fan_out: int,
        rng: np.random.Generator,
        *,
        scale: float = 1.0,
    ):
        bound = scale * xavier_bound(fan_in, fan_out)
        self.fan_in = fan_in
        self.fan_out = fan_out
        self.weight: Parameter = params.add(
            f'{name}.weight',
            rng.uniform(-bound, bound, size=(fan_in, fan_out)),
        )
        self.bias: Parameter = params.add(f'{name}.bias', np.zeros(fan_out))

    def __call__(self, x: DiffNode) -> DiffNode:
        return linear(x, self.weight.node, self.bias.node)


class MLP:
    """Последовательность Linear с ReLU между слоями.

    Последний слой линейный, если `final_activation` не включён.
    """

    def __init__(
        self,
        params: ParameterSet,
        name: str,
        widths: Sequence[int],
        rng: np.random.Generator,
        *,
        final_activation: bool = False,
        final_scale: float = 1.0,
    ):
        self.layers: list[Linear] = []
        last = len(widths) - 2
        for i, (fan_in, fan_out) in enumerate(zip(widths[:-1], widths[1:])):
            self.layers.append(
                Linear(
                    params,
                    f'{name}.{i}',
                    fan_in,
                    fan_out,
                    rng,
                    scale=final_scale if i == last else 1.0,
                )
            )
        self.final_activation = final_activation

    def __call__(self, x: DiffNode) -> DiffNode:
        h = as_node(x)
        for i, layer in enumerate(self.layers):
            h = layer(h)
            if i < len(self.layers) - 1 or self.final_activation:
                h = relu(h)
        return h


def as_batch(x) -> DiffNode:
    """Привести вектор (D,) к батчу (1, D); батч (N, D) не меняется."""
    node = as_node(x)
    if node.ndim == 1:
        node = reshape(node, (1, node.shape[0]))
    return node
