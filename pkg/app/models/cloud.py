"""Облака точек, локальные регионы и пакеты запросов."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from app.validate.exceptions import ShapeError
from app.validate.validators import validate_points


@dataclass(frozen=True, eq=False)
class PointCloud:
    """Упорядоченный набор D-мерных точек (D ∈ {2, 3}) в мировых единицах.

    Attributes:
        points: Массив (N, D) float64.
        normals: Необязательный массив нормалей (N, D).
    """

    points: np.ndarray
    normals: Optional[np.ndarray] = None

    def __post_init__(self):
        pts = validate_points(self.points)
        object.__setattr__(self, 'points', pts)
        if self.normals is not None:
            nrm = np.asarray(self.normals, dtype=np.float64)
            if nrm.shape != pts.shape:
                raise ShapeError(
                    f'нормали {nrm.shape} не совпадают с точками {pts.shape}'
                )
            object.__setattr__(self, 'normals', nrm)

    @property
    def dim(self) -> int:
        return int(self.points.shape[1])

    def __len__(self) -> int:
        return int(self.points.shape[0])

    def bbox(self) -> tuple[np.ndarray, np.ndarray]:
        return self.points.min(axis=0), self.points.max(axis=0)

    def summary(self) -> str:
        return f'n={len(self)}, dim={self.dim}'


@dataclass(frozen=True, eq=False)
class RegionCell:
    """Непустая ячейка разбиения по сетке до нормализации."""

    grid_index: tuple[int, ...]
    indices: np.ndarray
    points: np.ndarray

    def __len__(self) -> int:
        return int(self.indices.shape[0])

    def summary(self) -> str:
        return f'grid_index={self.grid_index}, n={len(self)}'


@dataclass(frozen=True, eq=False)
class LocalRegion:
    """Нормализованный локальный регион.

    Точки региона получены как `(x - center) / scale`. В режиме `full`
    center — центр bounding box, а scale — длина его наибольшего ребра,
    так что наибольшее ребро равно 1, а центр лежит в нуле. Режимы
    `center`, `scale` и `none` оставляют scale = 1 или center = 0.
    """

    points: np.ndarray
    center: np.ndarray
    scale: float
    grid_index: tuple[int, ...] = ()

    @property
    def dim(self) -> int:
        return int(self.points.shape[1])

    def __len__(self) -> int:
        return int(self.points.shape[0])

    def as_cloud(self) -> PointCloud:
        return PointCloud(self.points)

    def denormalize(self, points: np.ndarray) -> np.ndarray:
        """Вернуть нормализованные точки в мировые координаты."""
        return np.asarray(points, dtype=np.float64) * self.scale + self.center

    def summary(self) -> str:
        return (
            f'grid_index={self.grid_index}, n={len(self)}, '
            f'scale={self.scale:.4g}'
        )


@dataclass(frozen=True, eq=False)
class QueryBatch:
    """Запросы вокруг точек облака и их ближайшие соседи на облаке.

    Attributes:
        queries: Позиции запросов (M, D).
        anchors: Индекс точки облака, вокруг которой сэмплирован запрос.
        nn_index: Индекс ближайшей точки облака для каждого запроса.
        nn_targets: Координаты ближайших точек (M, D).
    """

    queries: np.ndarray
    anchors: np.ndarray
    nn_index: np.ndarray
    nn_targets: np.ndarray = field(repr=False)

    def __len__(self) -> int:
        return int(self.queries.shape[0])

    def subset(self, selection: np.ndarray) -> QueryBatch:
        return QueryBatch(
            queries=self.queries[selection],
            anchors=self.anchors[selection],
            nn_index=self.nn_index[selection],
            nn_targets=self.nn_targets[selection],
        )

    def summary(self) -> str:
        return f'm={len(self)}'
