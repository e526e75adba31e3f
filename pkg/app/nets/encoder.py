"""Энкодер региона в стиле PointNet: поточечный MLP и max-pool."""

from __future__ import annotations

from typing import Optional

import numpy as np

from app.autodiff.node import DiffNode, as_node, max_pool
from app.autodiff.optim import ParameterSet
from app.models.config import NetConfig
from app.nets.layers import MLP
from app.validate.exceptions import EmptyCloudError, ShapeError


class RegionEncoder:
    """Энкодер θ₁: D → 64 → 128 → C с ReLU, затем максимум по точкам.

    Результат не зависит от порядка точек и от их повторов.
    """

    def __init__(
        self,
        cfg: NetConfig,
        rng: np.random.Generator,
        params: Optional[ParameterSet] = None,
    ):
        self.cfg = cfg
        self.params = params if params is not None else ParameterSet()
        widths = [cfg.dim, *cfg.encoder_widths, cfg.cond_dim]
        self.mlp = MLP(
            self.params,
            'encoder',
            widths,
            rng,
            final_activation=True,
        )

    def __call__(self, points) -> DiffNode:
        node = as_node(points)
        if node.value.size == 0:
            raise EmptyCloudError('Энкодер: пустой набор точек.')
        if node.ndim != 2 or node.shape[1] != self.cfg.dim:
            raise ShapeError(
                f'Энкодер: ожидается (N, {self.cfg.dim}), форма {node.shape}'
            )
        return max_pool(self.mlp(node))

    def summary(self) -> str:
        return f'params={self.params.count()}'


def encode_region(enc: RegionEncoder, points) -> DiffNode:
    """Признак региона f_l формы (1, C), дифференцируемый по θ₁."""
    return enc(points)
