"""Точный поиск ближайших соседей поверх scipy cKDTree.

cKDTree не гарантирует порядок среди равноудалённых точек, поэтому
кандидаты дерева перепроверяются расстояниями numpy и упорядочиваются по
паре (расстояние, индекс): при равенстве побеждает меньший индекс.
"""

from __future__ import annotations

import logging
from typing import Union

import numpy as np
from scipy.spatial import cKDTree

from app.models.cloud import PointCloud
from app.validate.exceptions import EmptyCloudError, ShapeError
from app.validate.validators import validate_positive_int

logger = logging.getLogger(__name__)

_CANDIDATES = 8


class SpatialIndex:
    """Неизменяемый индекс ближайших соседей облака.

    Args:
        points: Массив точек (N, D).
    """

    def __init__(self, points: np.ndarray):
        pts = np.array(points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[0] == 0:
            raise EmptyCloudError(
                f'Индекс: нужно непустое облако (N, D), форма {pts.shape}'
            )
        pts.setflags(write=False)
        self.points = pts
        self.tree = cKDTree(pts)
        self._member_kth: dict[int, np.ndarray] = {}

    def __len__(self) -> int:
        return int(self.points.shape[0])

    @property
    def dim(self) -> int:
        return int(self.points.shape[1])

    def _as_queries(self, queries) -> np.ndarray:
        q = np.asarray(queries, dtype=np.float64)
        if q.ndim == 1:
            q = q[None, :]
        if q.ndim != 2 or q.shape[1] != self.dim:
            raise ShapeError(
                f'запросы формы {q.shape} к индексу размерности {self.dim}'
            )
        return q

    def _distances(self, queries: np.ndarray, idx: np.ndarray) -> np.ndarray:
        return np.linalg.norm(
            self.points[idx] - queries[:, None, :],
            axis=-1,
        )

    def nearest(self, queries) -> tuple[np.ndarray, np.ndarray]:
        """Ближайшая точка облака для каждого запроса.

        Returns:
            tuple[np.ndarray, np.ndarray]: Расстояния (M,) и индексы (M,).
        """
        q = self._as_queries(queries)
        n = len(self)
        k = min(_CANDIDATES, n)
        _, idx = self.tree.query(q, k=k)
        idx = np.asarray(idx).reshape(len(q), k)
        dist = self._distances(q, idx)

        order = np.lexsort((idx, dist), axis=-1)
        rows = np.arange(len(q))
        best = idx[rows, order[:, 0]]
        best_dist = dist[rows, order[:, 0]]

        # Все кандидаты равноудалены: ничья могла уйти за пределы k.
        crowded = np.nonzero(dist.max(axis=1) == best_dist)[0]
        if k < n:
            for row in crowded:
                full = np.linalg.norm(self.points - q[row], axis=1)
                best[row] = int(np.argmin(full))
                best_dist[row] = full[best[row]]
        return best_dist, best

    def query(self, queries) -> tuple[np.ndarray, np.ndarray]:
        return self.nearest(queries)

    def knn_distances(self, queries, k: int) -> np.ndarray:
        """Отсортированные расстояния до k ближайших точек, форма (M, k)."""
        q = self._as_queries(queries)
        k = min(k, len(self))
        _, idx = self.tree.query(q, k=k)
        idx = np.asarray(idx).reshape(len(q), k)
        return np.sort(self._distances(q, idx), axis=1)

    def summary(self) -> str:
        return f'n={len(self)}, dim={self.dim}'


def build_index(cloud: Union[PointCloud, np.ndarray]) -> SpatialIndex:
    """Построить индекс ближайших соседей облака."""
    points = cloud.points if isinstance(cloud, PointCloud) else cloud
    return SpatialIndex(points)


def _clamp_k(k: int, available: int) -> int:
    if k > available:
        logger.warning(
            'k=%d exceeds available neighbours (%d); clamped', k, available
        )
        return available
    return k


def kth_nn_distance(index: SpatialIndex, p, k: int) -> float:
    """Расстояние до k-го ближайшего соседа точки p.

    Если p совпадает с точкой облака, она сама не считается соседом
    (исключается ровно одно нулевое расстояние). При нехватке соседей
    k уменьшается до доступного числа с предупреждением.

    Args:
        index: Индекс облака.
        p: Позиция (D,).
        k: Номер соседа, начиная с 1.

    Returns:
        float: Евклидово расстояние.
    """
    validate_positive_int(k, 'k')
    n = len(index)
    dist = index.knn_distances(p, min(k + 1, n))[0]
    member = dist[0] == 0.0
    available = n - 1 if member else n
    if available == 0:
        logger.warning('kth_nn_distance: cloud has no other points')
        return 0.0
    k = _clamp_k(k, available)
    return float(dist[k] if member else dist[k - 1])


def kth_nn_distances_of_members(index: SpatialIndex, k: int) -> np.ndarray:
    """k-е расстояние для каждой точки облака (сама точка исключена)."""
    validate_positive_int(k, 'k')
    cached = index._member_kth.get(k)
    if cached is not None:
        return cached
    n = len(index)
    if n == 1:
        logger.warning('kth_nn_distance: single-point cloud, sigma is zero')
        result = np.zeros(1)
    else:
        kk = _clamp_k(k, n - 1)
        result = index.knn_distances(index.points, kk + 1)[:, kk]
    result.setflags(write=False)
    index._member_kth[k] = result
    return result
