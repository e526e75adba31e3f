"""Гауссово сэмплирование запросов вокруг точек облака."""

from __future__ import annotations

import logging
from typing import Union

import numpy as np

from app.core.constants import (
    DEFAULT_K_SIGMA,
    DEFAULT_PER_POINT,
    SIGMA_MODES,
)
from app.core.seeding import make_rng
from app.geometry.index import SpatialIndex, kth_nn_distances_of_members
from app.models.cloud import PointCloud, QueryBatch
from app.validate.validators import validate_choice, validate_positive_int

logger = logging.getLogger(__name__)


def sampling_std(distance: np.ndarray, sigma_mode: str) -> np.ndarray:
    """Стандартное отклонение по расстоянию до k-го соседа.

    variance: расстояние трактуется как дисперсия, std = sqrt(d).
    stddev: расстояние и есть стандартное отклонение.
    """
    validate_choice(sigma_mode, SIGMA_MODES, 'sigma_mode')
    if sigma_mode == 'variance':
        return np.sqrt(distance)
    return np.asarray(distance, dtype=np.float64)


def _as_rng(seed: Union[int, np.random.Generator]) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return make_rng(int(seed), 'sampling')


def sample_queries(
    cloud: PointCloud,
    index: SpatialIndex,
    per_point: int = DEFAULT_PER_POINT,
    k_sigma: int = DEFAULT_K_SIGMA,
    seed: Union[int, np.random.Generator] = 0,
    sigma_mode: str = 'variance',
) -> QueryBatch:
    """Сэмплировать per_point запросов вокруг каждой точки облака.

    Args:
        cloud: Облако, вокруг точек которого строятся запросы.
        index: Индекс того же облака.
        per_point: Число запросов на точку.
        k_sigma: Номер соседа, задающего масштаб гауссианы.
        seed: Seed или готовый генератор.
        sigma_mode: Трактовка расстояния до k-го соседа.

    Returns:
        QueryBatch: per_point · N запросов, упорядоченных по якорям.
    """
    validate_positive_int(per_point, 'per_point')
    std = sampling_std(kth_nn_distances_of_members(index, k_sigma), sigma_mode)
    rng = _as_rng(seed)

    anchors = np.repeat(np.arange(len(cloud)), per_point)
    noise = rng.standard_normal((anchors.shape[0], cloud.dim))
    queries = cloud.points[anchors] + noise * std[anchors, None]
    _, nn_index = index.nearest(queries)
    return QueryBatch(
        queries=queries,
        anchors=anchors,
        nn_index=nn_index,
        nn_targets=index.points[nn_index],
    )


def select_queries(
    batch: QueryBatch,
    count: int,
    rng: np.random.Generator,
) -> QueryBatch:
    """Случайно выбрать count запросов без повторов (не больше пула)."""
    validate_positive_int(count, 'count')
    take = min(count, len(batch))
    if take < count:
        logger.debug('Query pool %d smaller than %d', len(batch), count)
    return batch.subset(rng.choice(len(batch), size=take, replace=False))
