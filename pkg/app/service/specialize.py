"""Специализация приора на конкретное облако.

Неявная сеть приора замораживается, а сеть запросов учится переносить
глобальные запросы q_g в локальные q_l′ с условием f_l′ так, чтобы
притянутые запросы ложились на облако. В режимах `no_prior` и
`joint_tune` неявная сеть обучается вместе с сетью запросов.
"""

from __future__ import annotations

import copy
import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from app.autodiff.grad import backward
from app.autodiff.node import (
    DiffNode,
    constant,
    no_grad,
    set_grad_enabled,
    variable,
)
from app.autodiff.optim import Adam
from app.core.constants import DEFAULT_CHUNK_SIZE
from app.core.seeding import make_rng
from app.geometry.index import build_index
from app.geometry.regions import normalize_region
from app.geometry.sampling import sample_queries, select_queries
from app.logging import logged
from app.models.cloud import PointCloud
from app.models.config import NetConfig, SpecializeConfig
from app.nets.implicit import ImplicitNet, sdf_eval_with_grad
from app.nets.layers import as_batch
from app.nets.query import QueryNet, normalize_mode, predict_query
from app.service.prior import PriorCheckpoint, pulled_points, pulling_loss
from app.validate.exceptions import DataError, ShapeError, UsageError
from app.validate.validators import ensure_finite

logger = logging.getLogger(__name__)


@dataclass(eq=False)
class GlobalSdf:
    """Глобальная SDF облака: s′(q_g) = F(q_l′, f_l′).

    Объект вызывается на массиве точек (N, D) и возвращает значения (N,).
    Вычисление идёт порциями по `chunk_size` без записи графа.
    """

    implicit: ImplicitNet
    qnet: QueryNet
    mode: str = 'full'
    condition: Optional[np.ndarray] = None
    loss_history: list[float] = field(default_factory=list)
    chunk_size: int = DEFAULT_CHUNK_SIZE

    def __post_init__(self):
        self.mode = normalize_mode(self.mode)
        if self.condition is not None:
            self.condition = np.asarray(
                self.condition, dtype=np.float64
            ).reshape(-1)

    @property
    def dim(self) -> int:
        return self.qnet.cfg.dim

    @property
    def net_config(self) -> NetConfig:
        return self.qnet.cfg

    def forward(self, q_g) -> tuple[DiffNode, DiffNode, DiffNode]:
        """Запись в граф: (s′ (N, 1), q_l′ (N, D), f_l′)."""
        q_l, f = predict_query(self.qnet, q_g, self.mode, self.condition)
        return self.implicit(q_l, f), q_l, f

    def __call__(self, points) -> np.ndarray:
        pts = _as_queries(points, self.dim)
        out = np.empty(len(pts))
        with no_grad():
            for start in range(0, len(pts), self.chunk_size):
                chunk = pts[start:start + self.chunk_size]
                s, _, _ = self.forward(chunk)
                out[start:start + len(chunk)] = s.value[:, 0]
        return out

    def summary(self) -> str:
        return (
            f'mode={self.mode}, dim={self.dim}, '
            f'steps={len(self.loss_history)}'
        )


def _as_queries(points, dim: int) -> np.ndarray:
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim == 1:
        pts = pts[None, :]
    if pts.ndim != 2 or pts.shape[1] != dim:
        raise ShapeError(
            f'запросы формы {pts.shape} к SDF размерности {dim}'
        )
    return pts


def global_sdf_eval(g: GlobalSdf, q_g) -> np.ndarray:
    """Значения s′ в точках q_g, форма (N,)."""
    return g(q_g)


def pulled_query_points(g: GlobalSdf, q_g) -> np.ndarray:
    """Притянуть глобальные запросы: q_g − s′·∇s′/‖∇s′‖.

    Градиент берётся по входу неявной сети в точке q_l′ при
    фиксированном условии f_l′.
    """
    pts = _as_queries(q_g, g.dim)
    out = np.empty_like(pts)
    for start in range(0, len(pts), g.chunk_size):
        chunk = pts[start:start + g.chunk_size]
        with no_grad():
            q_l, f = predict_query(g.qnet, chunk, g.mode, g.condition)
        with set_grad_enabled(True):
            s, grad_s = sdf_eval_with_grad(
                g.implicit, variable(q_l.value), constant(f.value)
            )
        with no_grad():
            pulled = pulled_points(chunk, s, grad_s)
        out[start:start + len(chunk)] = pulled.value
    return out


def query_transport(g: GlobalSdf, q_g) -> tuple[np.ndarray, np.ndarray]:
    """Перенесённые запросы q_l′ и значения s′ для глобальных запросов."""
    pts = _as_queries(q_g, g.dim)
    with no_grad():
        s, q_l, _ = g.forward(pts)
    return q_l.value.copy(), s.value[:, 0].copy()


def derive_condition(prior: PriorCheckpoint, cloud: PointCloud) -> np.ndarray:
    """Признак энкодера приора для нормализованного облака, форма (C,).

    Облако нормализуется так же, как регионы при обучении приора.
    Используется как внешнее условие режима `fixed_cond`.
    """
    region = normalize_region(
        cloud.points, mode=prior.train_config.normalize
    )
    with no_grad():
        feature = prior.encoder(region.points)
    return feature.value.reshape(-1).copy()


def _build_networks(
    prior: Optional[PriorCheckpoint],
    net_cfg: NetConfig,
    cfg: SpecializeConfig,
    mode: str,
) -> tuple[ImplicitNet, QueryNet]:
    rng = make_rng(cfg.seed, 'init')
    if mode == 'no_prior':
        implicit = ImplicitNet(net_cfg, rng)
    else:
        implicit = copy.deepcopy(prior.implicit)
    qnet = QueryNet(net_cfg, rng)
    implicit.params.set_trainable(cfg.tunes_implicit)
    return implicit, qnet


@logged(level=logging.INFO)
def specialize(
    cloud: PointCloud,
    prior: Optional[PriorCheckpoint],
    cfg: SpecializeConfig,
    condition: Optional[np.ndarray] = None,
    net_cfg: Optional[NetConfig] = None,
) -> GlobalSdf:
    """Обучить сеть запросов на облаке cloud поверх приора.

    Облако используется в мировых координатах без нормализации. Пул
    запросов сэмплируется один раз; на каждом шаге из него выбирается
    `queries_per_step` запросов.

    Args:
        cloud: Целевое облако.
        prior: Обученный приор; может отсутствовать только в `no_prior`.
        cfg: Параметры специализации.
        condition: Внешнее условие (C,) для режима `fixed_cond`.
        net_cfg: Архитектура для `no_prior` без приора.

    Returns:
        GlobalSdf: Глобальная SDF с историей лосса.

    Raises:
        UsageError: Нет приора или условия, которых требует режим.
        DataError: Размерность приора не совпадает с облаком.
        NonFiniteError: Если лосс стал NaN/inf.
    """
    mode = normalize_mode(cfg.mode)
    if mode == 'fixed_cond' and condition is None:
        raise UsageError('Режим fixed_cond требует внешнее условие.')
    if prior is None and mode != 'no_prior':
        raise UsageError(f'Режим {mode} требует обученный приор.')
    if net_cfg is None:
        net_cfg = prior.net_config if prior is not None else NetConfig(
            dim=cloud.dim
        )
    if net_cfg.dim != cloud.dim:
        raise DataError(
            f'Приор обучен для D={net_cfg.dim}, облако имеет D={cloud.dim}.'
        )

    implicit, qnet = _build_networks(prior, net_cfg, cfg, mode)
    g = GlobalSdf(implicit, qnet, mode, condition)
    params = list(qnet.params)
    if cfg.tunes_implicit:
        params.extend(implicit.params)
    optimizer = Adam(
        params,
        cfg.lr,
        tuple(cfg.betas),
        cfg.eps,
        strict=cfg.strict_grads,
    )

    index = build_index(cloud)
    pool = sample_queries(
        cloud,
        index,
        cfg.per_point,
        cfg.k_sigma,
        make_rng(cfg.seed, 'sampling'),
        cfg.sigma_mode,
    )
    selection_rng = make_rng(cfg.seed, 'selection')
    logger.info(
        'Specializing: mode=%s, pool=%d queries, steps=%d',
        mode,
        len(pool),
        cfg.steps,
    )

    for step in range(cfg.steps):
        batch = select_queries(pool, cfg.queries_per_step, selection_rng)
        loss = specialization_loss(
            g, batch.queries, batch.nn_targets, cfg.loss_mode
        )
        ensure_finite(loss.value, 'loss', step=step, mode=mode)

        optimizer.zero_grad()
        backward(loss)
        optimizer.step()

        g.loss_history.append(loss.item())
        if (step + 1) % cfg.log_every == 0:
            logger.info(
                'Specialize step %d/%d: loss=%.6g',
                step + 1,
                cfg.steps,
                g.loss_history[-1],
            )

    implicit.params.set_trainable(False)
    return g


def specialization_loss(
    g: GlobalSdf,
    q_g,
    nn_targets,
    loss_mode: str = 'squared',
) -> DiffNode:
    """Стоимость притягивания глобальных запросов через q_l′ и f_l′.

    Градиент ∇s′ берётся по q_l′ как дифференцируемый узел, поэтому лосс
    обучает сеть запросов через s′, через направление сдвига и через
    само q_l′.
    """
    q_g = as_batch(np.asarray(q_g, dtype=np.float64))
    q_l, f = predict_query(g.qnet, q_g, g.mode, g.condition)
    s, grad_s = sdf_eval_with_grad(g.implicit, q_l, f)
    return pulling_loss(q_g, constant(nn_targets), s, grad_s, loss_mode)

