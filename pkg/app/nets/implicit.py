"""Условная неявная сеть SDF: s = F(q, f)."""

from __future__ import annotations

from typing import Optional

import numpy as np

from app.autodiff.grad import input_gradient
from app.autodiff.node import (
    DiffNode,
    broadcast_to,
    concat,
    reduce_sum,
    relu,
    variable,
)
from app.autodiff.optim import ParameterSet
from app.models.config import NetConfig
from app.nets.layers import Linear, as_batch
from app.validate.exceptions import ShapeError


class ImplicitNet:
    """MLP θ₂ над конкатенацией запроса и условия.

    Вход `[q, f]` повторно подклеивается к скрытому состоянию перед слоем
    `skip_layer` (0 — без повторной склейки). Последний слой линейный с
    одним выходом.
    """

    def __init__(
        self,
        cfg: NetConfig,
        rng: np.random.Generator,
        params: Optional[ParameterSet] = None,
    ):
        self.cfg = cfg
        self.params = params if params is not None else ParameterSet()
        in_dim = cfg.dim + cfg.cond_dim
        depth = cfg.implicit_depth
        self.layers: list[Linear] = []
        for i in range(depth):
            fan_in = in_dim if i == 0 else cfg.hidden
            if self._is_skip(i):
                fan_in = cfg.hidden + in_dim
            fan_out = 1 if i == depth - 1 else cfg.hidden
            self.layers.append(
                Linear(self.params, f'implicit.{i}', fan_in, fan_out, rng)
            )

    def _is_skip(self, i: int) -> bool:
        return self.cfg.skip_layer > 0 and i == self.cfg.skip_layer

    def _inputs(self, q, f) -> tuple[DiffNode, DiffNode]:
        q = as_batch(q)
        f = as_batch(f)
        if q.shape[1] != self.cfg.dim:
            raise ShapeError(
                f'ширина запроса {q.shape[1]} вместо {self.cfg.dim} '
                f'(формы q {q.shape}, f {f.shape})'
            )
        if f.shape[1] != self.cfg.cond_dim:
            raise ShapeError(
                f'ширина условия {f.shape[1]} вместо {self.cfg.cond_dim} '
                f'(формы q {q.shape}, f {f.shape})'
            )
        if f.shape[0] != q.shape[0]:
            if f.shape[0] != 1:
                raise ShapeError(
                    f'число условий {f.shape} не совпадает с запросами '
                    f'{q.shape}'
                )
            f = broadcast_to(f, (q.shape[0], f.shape[1]))
        return q, f

    def __call__(self, q, f) -> DiffNode:
        """Значения SDF формы (N, 1)."""
        q, f = self._inputs(q, f)
        x0 = concat([q, f], axis=1)
        h = x0
        last = len(self.layers) - 1
        for i, layer in enumerate(self.layers):
            if self._is_skip(i):
                h = concat([h, x0], axis=1)
            h = layer(h)
            if i < last:
                h = relu(h)
        return h

    def summary(self) -> str:
        return f'params={self.params.count()}'


def sdf_eval(net: ImplicitNet, q, f) -> DiffNode:
    """Предсказанное расстояние s = F(q, f), форма (N, 1)."""
    return net(q, f)


def sdf_eval_with_grad(net: ImplicitNet, q, f) -> tuple[DiffNode, DiffNode]:
    """Значение SDF и его градиент по запросу как узел графа.

    Если `q` не записан в граф (массив или константа), он оборачивается
    во вход с `requires_grad=True`. Строки батча независимы, поэтому
    градиент суммы по q даёт построчные градиенты.

    Returns:
        tuple[DiffNode, DiffNode]: s формы (N, 1) и ∇s формы (N, D).
    """
    q_node = as_batch(q)
    if not q_node.requires_grad:
        q_node = variable(q_node.value)
    s = net(q_node, f)
    grad_s = input_gradient(reduce_sum(s), q_node)
    return s, grad_s
