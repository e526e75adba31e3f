"""Обучение локального контекстного приора на нормализованных регионах.

Для каждого региона в каждой эпохе сэмплируются свежие запросы,
выбирается фиксированное число из них, а ближайшие соседи выбранных
запросов подаются в энкодер как описание региона. Энкодер и неявная
сеть обучаются совместно, минимизируя стоимость «притягивания» запроса
к его ближайшему соседу вдоль градиента SDF.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from app.autodiff.grad import backward
from app.autodiff.node import (
    DiffNode,
    add,
    as_node,
    broadcast_to,
    constant,
    div,
    mean,
    mul,
    norm,
    reduce_sum,
    sub,
)
from app.autodiff.optim import Adam
from app.core.constants import GRAD_NORM_EPS, LOSS_MODES
from app.core.seeding import make_rng
from app.geometry.index import SpatialIndex
from app.geometry.sampling import sample_queries, select_queries
from app.logging import logged
from app.models.cloud import LocalRegion, PointCloud
from app.models.config import NetConfig, TrainConfig
from app.nets.encoder import RegionEncoder
from app.nets.implicit import ImplicitNet, sdf_eval_with_grad
from app.validate.exceptions import DataError, EmptyCloudError
from app.validate.validators import ensure_finite, validate_choice

logger = logging.getLogger(__name__)


def pulled_points(q, s, grad_s) -> DiffNode:
    """Сдвинуть запросы на s вдоль нормированного градиента: q − s·∇s/‖∇s‖.

    Args:
        q: Запросы (N, D).
        s: Предсказанные расстояния (N, 1).
        grad_s: Градиенты SDF по запросам (N, D).

    Returns:
        DiffNode: Притянутые точки (N, D).
    """
    q = as_node(q)
    grad_s = as_node(grad_s)
    shape = grad_s.shape
    length = add(norm(grad_s, axis=1, keepdims=True), GRAD_NORM_EPS)
    direction = div(grad_s, broadcast_to(length, shape))
    step = mul(broadcast_to(as_node(s), shape), direction)
    return sub(q, step)


def pulling_loss(
    q,
    nn_q,
    s,
    grad_s,
    loss_mode: str = 'squared',
) -> DiffNode:
    """Средняя по батчу невязка между соседом и притянутым запросом.

    Args:
        q: Запросы (N, D).
        nn_q: Ближайшие точки облака (N, D).
        s: Предсказанные расстояния (N, 1).
        grad_s: Градиенты SDF по запросам (N, D).
        loss_mode: `squared` — квадрат нормы, `plain` — норма.

    Returns:
        DiffNode: Скалярный лосс.
    """
    validate_choice(loss_mode, LOSS_MODES, 'loss_mode')
    residual = sub(as_node(nn_q), pulled_points(q, s, grad_s))
    if loss_mode == 'squared':
        return mean(reduce_sum(mul(residual, residual), axis=1))
    return mean(norm(residual, axis=1))


@dataclass(eq=False)
class PriorCheckpoint:
    """Обученный приор: энкодер θ₁, неявная сеть θ₂ и история обучения."""

    encoder: RegionEncoder
    implicit: ImplicitNet
    net_config: NetConfig
    train_config: TrainConfig
    loss_history: list[float] = field(default_factory=list)

    @property
    def dim(self) -> int:
        return self.net_config.dim

    def summary(self) -> str:
        return (
            f'dim={self.dim}, steps={len(self.loss_history)}, '
            f'params={self.encoder.params.count()}'
            f'+{self.implicit.params.count()}'
        )


@dataclass(frozen=True, eq=False)
class _RegionData:
    cloud: PointCloud
    index: SpatialIndex
    grid_index: tuple[int, ...]


def _region_data(
    regions: Sequence[LocalRegion],
    dim: int,
) -> list[_RegionData]:
    prepared = []
    for region in regions:
        if region.dim != dim:
            raise DataError(
                f'Регион {region.grid_index}: размерность {region.dim}, '
                f'сеть ожидает {dim}.'
            )
        cloud = region.as_cloud()
        prepared.append(
            _RegionData(cloud, SpatialIndex(cloud.points), region.grid_index)
        )
    return prepared


def init_prior(
    net_cfg: NetConfig,
    cfg: TrainConfig,
) -> tuple[RegionEncoder, ImplicitNet]:
    """Инициализировать энкодер и неявную сеть из потока `init`."""
    rng = make_rng(cfg.seed, 'init')
    return RegionEncoder(net_cfg, rng), ImplicitNet(net_cfg, rng)


@logged(level=logging.INFO)
def train_local_prior(
    regions: Sequence[LocalRegion],
    cfg: TrainConfig,
    net_cfg: Optional[NetConfig] = None,
) -> PriorCheckpoint:
    """Обучить приор по списку нормализованных регионов.

    Эпоха проходит все регионы в перемешанном порядке; один регион даёт
    один шаг Adam. Выборки запросов зависят только от (seed, эпоха,
    регион), поэтому прогон воспроизводим.

    Args:
        regions: Нормализованные регионы.
        cfg: Параметры обучения.
        net_cfg: Архитектура; по умолчанию стандартная для D регионов.

    Returns:
        PriorCheckpoint: Обученные сети и история лосса по шагам.

    Raises:
        EmptyCloudError: Если регионов нет.
        DataError: Если размерность регионов не совпадает с сетью.
        NonFiniteError: Если лосс стал NaN/inf.
    """
    if not regions:
        raise EmptyCloudError('Нет регионов для обучения приора.')
    if net_cfg is None:
        net_cfg = NetConfig(dim=regions[0].dim)
    data = _region_data(regions, net_cfg.dim)

    encoder, implicit = init_prior(net_cfg, cfg)
    optimizer = Adam(
        [*encoder.params, *implicit.params],
        cfg.lr,
        tuple(cfg.betas),
        cfg.eps,
        strict=cfg.strict_grads,
    )
    history: list[float] = []

    for epoch in range(cfg.epochs):
        order = make_rng(cfg.seed, 'shuffle', epoch).permutation(len(data))
        epoch_losses = []
        for r in order:
            region = data[r]
            pool = sample_queries(
                region.cloud,
                region.index,
                cfg.per_point,
                cfg.k_sigma,
                make_rng(cfg.seed, 'sampling', epoch, r),
                cfg.sigma_mode,
            )
            batch = select_queries(
                pool,
                cfg.queries_per_region,
                make_rng(cfg.seed, 'selection', epoch, r),
            )

            f = encoder(batch.nn_targets)
            s, grad_s = sdf_eval_with_grad(implicit, batch.queries, f)
            loss = pulling_loss(
                constant(batch.queries),
                constant(batch.nn_targets),
                s,
                grad_s,
                cfg.loss_mode,
            )
            step = len(history)
            ensure_finite(
                loss.value,
                'loss',
                region=region.grid_index,
                epoch=epoch,
                step=step,
            )

            optimizer.zero_grad()
            backward(loss)
            optimizer.step()

            value = loss.item()
            history.append(value)
            epoch_losses.append(value)
            if (step + 1) % cfg.log_every == 0:
                logger.info('Prior step %d: loss=%.6g', step + 1, value)

        logger.info(
            'Prior epoch %d/%d: mean loss=%.6g',
            epoch + 1,
            cfg.epochs,
            float(np.mean(epoch_losses)),
        )

    return PriorCheckpoint(
        encoder=encoder,
        implicit=implicit,
        net_config=net_cfg,
        train_config=cfg,
        loss_history=history,
    )
