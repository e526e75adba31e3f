"""Сеть предсказания запросов θ₃ и режимы абляции."""

from __future__ import annotations

from typing import Optional

import numpy as np

from app.autodiff.node import (
    DiffNode,
    add,
    broadcast_to,
    constant,
    identity,
    reshape,
    slice_axis,
)
from app.autodiff.optim import ParameterSet
from app.models.config import ABLATION_MODES, NetConfig
from app.nets.layers import MLP, as_batch
from app.validate.exceptions import ShapeError, UsageError
from app.validate.validators import validate_choice


def normalize_mode(mode: str) -> str:
    """`no-shift` -> `no_shift`; неизвестный режим отклоняется."""
    return validate_choice(mode.replace('-', '_'), ABLATION_MODES, 'mode')


class QueryNet:
    """MLP из `query_depth` слоёв: скрытые ReLU ширины hidden, выход C + D.

    Выход делится на условие f_l′ (первые C) и сдвиг Δq (последние D).
    Последний слой инициализирован в `query_init_scale` от обычного
    масштаба, поэтому в начале обучения Δq мал.
    """

    def __init__(
        self,
        cfg: NetConfig,
        rng: np.random.Generator,
        params: Optional[ParameterSet] = None,
    ):
        self.cfg = cfg
        self.params = params if params is not None else ParameterSet()
        widths = [
            cfg.dim,
            *([cfg.hidden] * (cfg.query_depth - 1)),
            cfg.cond_dim + cfg.dim,
        ]
        self.mlp = MLP(
            self.params,
            'query',
            widths,
            rng,
            final_scale=cfg.query_init_scale,
        )

    def __call__(self, q_g) -> tuple[DiffNode, DiffNode]:
        q_g = as_batch(q_g)
        if q_g.shape[1] != self.cfg.dim:
            raise ShapeError(
                f'ширина q_g {q_g.shape[1]} вместо {self.cfg.dim} '
                f'(форма {q_g.shape})'
            )
        out = self.mlp(q_g)
        c = self.cfg.cond_dim
        f = slice_axis(out, 1, 0, c)
        dq = slice_axis(out, 1, c, c + self.cfg.dim)
        return f, dq

    def summary(self) -> str:
        return f'params={self.params.count()}'


def predict_query(
    qnet: QueryNet,
    q_g,
    mode: str = 'full',
    condition: Optional[np.ndarray] = None,
) -> tuple[DiffNode, DiffNode]:
    """Предсказанный запрос q_l′ и условие f_l′ для глобальных запросов.

    Режимы:
        full, no_prior, joint_tune: q_l′ = q_g + Δq, f_l′ из сети.
        no_shift: q_l′ = q_g, f_l′ из сети.
        direct_q: q_l′ = последние D выходов сети.
        fixed_cond: q_l′ = q_g + Δq, f_l′ = переданное условие.

    Returns:
        tuple[DiffNode, DiffNode]: q_l′ (N, D) и f_l′ (N, C) или (1, C).

    Raises:
        UsageError: Неизвестный режим или fixed_cond без условия.
    """
    mode = normalize_mode(mode)
    q_g = as_batch(q_g)
    f, dq = qnet(q_g)

    if mode == 'no_shift':
        # Отдельная вершина: градиент по q_l′ не должен идти через f_l′(q_g).
        return identity(q_g), f
    if mode == 'direct_q':
        return dq, f

    q_l = add(q_g, dq)
    if mode == 'fixed_cond':
        if condition is None:
            raise UsageError('Режим fixed_cond требует внешнее условие.')
        cond = np.asarray(condition, dtype=np.float64).reshape(-1)
        if cond.shape[0] != qnet.cfg.cond_dim:
            raise ShapeError(
                f'условие длины {cond.shape[0]} вместо {qnet.cfg.cond_dim}'
            )
        f = broadcast_to(
            reshape(constant(cond), (1, cond.shape[0])),
            (q_g.shape[0], cond.shape[0]),
        )
    return q_l, f
