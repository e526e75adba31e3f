"""Разбиение облака по сетке bounding box и нормализация регионов."""

from __future__ import annotations

import logging

import numpy as np

from app.core.constants import NORMALIZE_MODES
from app.models.cloud import LocalRegion, PointCloud, RegionCell
from app.validate.exceptions import DegenerateRegionError
from app.validate.validators import (
    validate_choice,
    validate_points,
    validate_positive_int,
)

logger = logging.getLogger(__name__)


def grid_cells(points: np.ndarray, grid_n: int) -> np.ndarray:
    """Индекс ячейки сетки grid_nᴰ для каждой точки, форма (N, D).

    Интервалы полуоткрытые [lo, hi), верхняя ячейка по каждой оси
    замкнута. Ось нулевой протяжённости целиком попадает в ячейку 0.
    """
    lo = points.min(axis=0)
    extent = points.max(axis=0) - lo
    safe = np.where(extent > 0, extent, 1.0)
    cells = np.floor((points - lo) * grid_n / safe).astype(np.int64)
    cells[:, extent == 0] = 0
    return np.clip(cells, 0, grid_n - 1)


def partition_regions(cloud: PointCloud, grid_n: int) -> list[RegionCell]:
    """Разбить облако на непустые ячейки сетки по его bounding box.

    Args:
        cloud: Облако в мировых координатах.
        grid_n: Число ячеек по каждой оси.

    Returns:
        list[RegionCell]: Ячейки в лексикографическом порядке индексов;
            каждая точка входит ровно в одну ячейку.
    """
    validate_positive_int(grid_n, 'grid_n')
    cells = grid_cells(cloud.points, grid_n)
    keys, inverse = np.unique(cells, axis=0, return_inverse=True)
    inverse = np.asarray(inverse).reshape(-1)

    regions = []
    for i, key in enumerate(keys):
        members = np.nonzero(inverse == i)[0]
        regions.append(
            RegionCell(
                grid_index=tuple(int(x) for x in key),
                indices=members,
                points=cloud.points[members],
            )
        )
    logger.debug(
        'Partitioned %d points into %d cells (grid=%d)',
        len(cloud),
        len(regions),
        grid_n,
    )
    return regions


def normalize_region(
    points,
    grid_index: tuple[int, ...] = (),
    mode: str = 'full',
) -> LocalRegion:
    """Привести регион к локальным координатам приора.

    Режимы:
        full — центр bounding box в ноль, наибольшее ребро равно 1;
        center — только перенос центра, масштаб 1;
        scale — только масштаб, центр остаётся в нуле мира;
        none — точки без изменений.

    Raises:
        DegenerateRegionError: Если все точки совпадают.
        UsageError: Неизвестный режим.
    """
    validate_choice(mode, NORMALIZE_MODES, 'normalize')
    pts = validate_points(points, name='region')
    lo = pts.min(axis=0)
    hi = pts.max(axis=0)
    extent = float((hi - lo).max())
    if extent == 0.0:
        raise DegenerateRegionError(
            f'Регион {grid_index}: все {len(pts)} точек совпадают.'
        )
    if mode in ('full', 'center'):
        center = (lo + hi) / 2.0
    else:
        center = np.zeros(pts.shape[1])
    scale = extent if mode in ('full', 'scale') else 1.0
    return LocalRegion(
        points=(pts - center) / scale,
        center=center,
        scale=scale,
        grid_index=tuple(grid_index),
    )


def denormalize(region: LocalRegion, points) -> np.ndarray:
    return region.denormalize(points)


def prepare_regions(
    cloud: PointCloud, grid_n: int, normalize: str = 'full'
) -> list[LocalRegion]:
    """Разбить облако и нормализовать ячейки, пропуская вырожденные."""
    regions = []
    for cell in partition_regions(cloud, grid_n):
        try:
            regions.append(
                normalize_region(cell.points, cell.grid_index, normalize)
            )
        except DegenerateRegionError as exc:
            logger.warning('Skipping degenerate region: %s', exc)
    return regions
