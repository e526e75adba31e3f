"""Решётка значений SDF и извлечение нулевого уровня.

3D: marching cubes со сваркой вершин по рёбрам решётки. Обход граней
согласуется с градиентом SDF отдельно в каждой компоненте связности.
2D: marching squares с разрешением седловых клеток по значению в центре
клетки.
Вершина ребра решётки однозначно задаётся ключом
`axis * N + linear_index(нижний конец)`, поэтому соседние клетки
ссылаются на одну и ту же вершину.
"""

from __future__ import annotations

import logging
from typing import Callable, Optional, Sequence, Union

import numpy as np
from scipy.interpolate import RegularGridInterpolator
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from app.core.constants import DEFAULT_BOUNDS_PADDING, DEFAULT_CHUNK_SIZE
from app.logging import logged
from app.models.cloud import PointCloud
from app.models.mesh import ContourSet, SdfGrid, TriangleMesh
from app.service.mc_tables import CORNERS, EDGES, TRI_TABLE
from app.validate.exceptions import MeshError, NonFiniteError, ShapeError
from app.validate.validators import validate_positive_int

logger = logging.getLogger(__name__)

SdfFn = Callable[[np.ndarray], np.ndarray]
Bounds = tuple[np.ndarray, np.ndarray]

# Рёбра квадрата: (угол a, угол b); углы c0 (i,j), c1 (i+1,j),
# c2 (i+1,j+1), c3 (i,j+1).
_SQUARE_CORNERS = np.array([[0, 0], [1, 0], [1, 1], [0, 1]], dtype=np.int64)
_SQUARE_EDGES = np.array([[0, 1], [1, 2], [3, 2], [0, 3]], dtype=np.int64)

# Отрезки (ребро начала, ребро конца); положительная область слева.
_SQUARE_SEGMENTS: dict[int, tuple[tuple[int, int], ...]] = {
    1: ((0, 3),),
    2: ((1, 0),),
    3: ((1, 3),),
    4: ((2, 1),),
    6: ((2, 0),),
    7: ((2, 3),),
    8: ((3, 2),),
    9: ((0, 2),),
    11: ((1, 2),),
    12: ((3, 1),),
    13: ((0, 1),),
    14: ((3, 0),),
}
_SADDLES = {
    5: {True: ((0, 1), (2, 3)), False: ((0, 3), (2, 1))},
    10: {True: ((3, 0), (1, 2)), False: ((1, 0), (3, 2))},
}


def default_bounds(
    cloud: PointCloud,
    padding: float = DEFAULT_BOUNDS_PADDING,
) -> Bounds:
    """Bounding box облака, расширенный на `padding` по каждой оси.

    Ось нулевой протяжённости получает протяжённость наибольшей оси.

    Raises:
        MeshError: Если все точки облака совпадают.
    """
    lo, hi = cloud.bbox()
    extent = hi - lo
    largest = float(extent.max())
    if largest == 0.0:
        raise MeshError('Нельзя построить решётку: все точки совпадают.')
    extent = np.where(extent > 0, extent, largest)
    center = (lo + hi) / 2.0
    half = extent * (1.0 + padding) / 2.0
    return center - half, center + half


def _resolution(resolution: Union[int, Sequence[int]], dim: int):
    if isinstance(resolution, (int, np.integer)):
        res = (int(resolution),) * dim
    else:
        res = tuple(int(r) for r in resolution)
    if len(res) != dim:
        raise ShapeError(f'разрешение {res} для размерности {dim}')
    for r in res:
        validate_positive_int(r, 'resolution')
        if r < 2:
            raise ShapeError(f'разрешение должно быть ≥ 2 по оси: {res}')
    return res


@logged(level=logging.INFO)
def eval_sdf_grid(
    sdf: SdfFn,
    bounds: Optional[Bounds] = None,
    resolution: Union[int, Sequence[int]] = 128,
    *,
    cloud: Optional[PointCloud] = None,
    padding: float = DEFAULT_BOUNDS_PADDING,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
) -> SdfGrid:
    """Вычислить SDF в узлах регулярной решётки.

    Args:
        sdf: Функция точек (N, D) -> значения (N,), например GlobalSdf.
        bounds: Пара (lo, hi); по умолчанию bbox облака с запасом.
        resolution: Число узлов по оси (одно на все оси или по осям).
        cloud: Облако для границ по умолчанию.
        padding: Относительный запас границ по умолчанию.
        chunk_size: Сколько узлов вычислять за один вызов.

    Returns:
        SdfGrid: Значения в C-порядке узлов.

    Raises:
        NonFiniteError: Если значение в узле не конечно.
    """
    if bounds is None:
        if cloud is None:
            raise ShapeError('Нужны границы решётки или облако.')
        bounds = default_bounds(cloud, padding)
    lo = np.asarray(bounds[0], dtype=np.float64)
    hi = np.asarray(bounds[1], dtype=np.float64)
    if lo.shape != hi.shape or lo.ndim != 1 or np.any(hi <= lo):
        raise ShapeError(f'вырожденные границы решётки: {lo} .. {hi}')
    validate_positive_int(chunk_size, 'chunk_size')

    res = _resolution(resolution, lo.shape[0])
    spacing = (hi - lo) / (np.asarray(res) - 1)
    lattice = SdfGrid(lo, spacing, np.zeros(res))
    coords = lattice.node_coordinates()

    values = np.empty(len(coords))
    for start in range(0, len(coords), chunk_size):
        stop = min(start + chunk_size, len(coords))
        values[start:stop] = np.asarray(sdf(coords[start:stop])).reshape(-1)

    bad = np.nonzero(~np.isfinite(values))[0]
    if bad.size:
        node = tuple(int(i) for i in np.unravel_index(bad[0], res))
        raise NonFiniteError(
            'SDF: нечисловое значение в узле решётки',
            node=node,
            position=tuple(np.round(coords[bad[0]], 9)),
        )
    return SdfGrid(lo, spacing, values.reshape(res))


def grid_gradient(grid: SdfGrid, points: np.ndarray) -> np.ndarray:
    """Градиент решётки (центральные разности) в точках, трилинейно."""
    grads = np.gradient(grid.values, *grid.spacing, edge_order=1)
    field = np.stack(grads, axis=-1)
    interp = RegularGridInterpolator(
        grid.axes(), field, bounds_error=False, fill_value=None
    )
    return interp(np.asarray(points, dtype=np.float64).reshape(-1, grid.dim))


def vertex_normals(grid: SdfGrid, vertices: np.ndarray) -> np.ndarray:
    """Единичные нормали как нормированный градиент SDF в вершинах."""
    g = grid_gradient(grid, vertices)
    length = np.linalg.norm(g, axis=1, keepdims=True)
    return g / np.where(length > 0, length, 1.0)


def orient_to_gradient(
    grid: SdfGrid, vertices: np.ndarray, triangles: np.ndarray
) -> np.ndarray:
    """Согласовать обход граней с ростом SDF в каждой компоненте связности.

    Для компоненты суммируется скалярное произведение векторных нормалей
    граней (длина равна удвоенной площади) с градиентом решётки в их
    центрах; компонента с отрицательной суммой переворачивается целиком.

    Returns:
        np.ndarray: Треугольники (F, 3) с исправленным обходом.
    """
    triangles = np.asarray(triangles, dtype=np.int64)
    if not len(triangles):
        return triangles
    n = len(vertices)
    adjacency = coo_matrix(
        (
            np.ones(triangles.size),
            (triangles.reshape(-1), triangles[:, [1, 2, 0]].reshape(-1)),
        ),
        shape=(n, n),
    )
    count, labels = connected_components(adjacency, directed=False)
    face_component = labels[triangles[:, 0]]

    corners = vertices[triangles]
    cross = np.cross(
        corners[:, 1] - corners[:, 0], corners[:, 2] - corners[:, 0]
    )
    gradient = grid_gradient(grid, corners.mean(axis=1))
    alignment = np.sum(cross * gradient, axis=1)
    score = np.bincount(face_component, weights=alignment, minlength=count)

    flip = score[face_component] < 0
    if flip.any():
        logger.warning(
            'Face winding opposes SDF gradient in %d of %d components; '
            'flipped',
            int(np.count_nonzero(score < 0)),
            count,
        )
        triangles = triangles.copy()
        triangles[flip] = triangles[flip][:, [0, 2, 1]]
    return triangles


def _edge_axes(corners: np.ndarray, edges: np.ndarray):
    """Ось и нижний угол каждого ребра клетки."""
    delta = corners[edges[:, 1]] - corners[edges[:, 0]]
    axis = np.argmax(np.abs(delta), axis=1)
    rising = delta[np.arange(len(edges)), axis] > 0
    lower = np.where(rising, edges[:, 0], edges[:, 1])
    return axis, lower


def _edge_keys(cells, edge_ids, corners, edges, shape) -> np.ndarray:
    """Глобальные ключи рёбер для пар (клетка, ребро клетки)."""
    axis, lower = _edge_axes(corners, edges)
    nodes = cells + corners[lower[edge_ids]]
    linear = np.ravel_multi_index(tuple(nodes.T), shape)
    return axis[edge_ids] * int(np.prod(shape)) + linear


def _edge_vertices(grid: SdfGrid, keys: np.ndarray, iso: float):
    """Точки пересечения уровня iso с рёбрами решётки по их ключам."""
    shape = grid.resolution
    total = int(np.prod(shape))
    axis = keys // total
    start = np.stack(np.unravel_index(keys % total, shape), axis=1)
    stop = start.copy()
    stop[np.arange(len(keys)), axis] += 1

    v0 = grid.values[tuple(start.T)]
    v1 = grid.values[tuple(stop.T)]
    t = (iso - v0) / (v1 - v0)
    nodes = start + (stop - start) * t[:, None]
    return grid.origin + nodes * grid.spacing


def _case_index(values: np.ndarray, corners: np.ndarray, iso: float):
    cells = tuple(n - 1 for n in values.shape)
    case = np.zeros(cells, dtype=np.int64)
    for bit, offset in enumerate(corners):
        window = tuple(
            slice(int(o), int(o) + n) for o, n in zip(offset, cells)
        )
        case |= (values[window] > iso).astype(np.int64) << bit
    return case


@logged(level=logging.INFO)
def marching_cubes(grid: SdfGrid, iso: float = 0.0) -> TriangleMesh:
    """Треугольный меш уровня iso трёхмерной решётки.

    Нормали граней направлены в сторону роста SDF; вершины сварены по
    рёбрам решётки, а нормали вершин взяты из градиента решётки.

    Raises:
        ShapeError: Если решётка не трёхмерная.
    """
    if grid.dim != 3:
        raise ShapeError(f'marching cubes требует 3D решётку: {grid.dim}D')

    case = _case_index(grid.values, CORNERS, iso)
    active = np.nonzero(TRI_TABLE[case, 0] >= 0)
    if active[0].size == 0:
        logger.warning('Grid has no crossing of iso=%g; empty mesh', iso)
        return TriangleMesh.empty()

    cells = np.stack(active, axis=1)
    rows = TRI_TABLE[case[active]]
    tri_cells = []
    tri_edges = []
    for slot in range(0, 15, 3):
        has = rows[:, slot] >= 0
        tri_cells.append(cells[has])
        tri_edges.append(rows[has, slot:slot + 3])
    tri_cells = np.concatenate(tri_cells)
    tri_edges = np.concatenate(tri_edges)

    keys = np.stack(
        [
            _edge_keys(
                tri_cells,
                tri_edges[:, c],
                CORNERS,
                EDGES,
                grid.resolution,
            )
            for c in range(3)
        ],
        axis=1,
    )
    unique, inverse = np.unique(keys, return_inverse=True)
    triangles = np.asarray(inverse).reshape(-1, 3)
    vertices = _edge_vertices(grid, unique, iso)
    triangles = orient_to_gradient(grid, vertices, triangles)

    logger.debug('Marching cubes: V=%d, F=%d', len(vertices), len(triangles))
    return TriangleMesh(vertices, triangles, vertex_normals(grid, vertices))


def _stitch(segments: np.ndarray) -> tuple[list[list[int]], list[bool]]:
    """Собрать ориентированные отрезки (S, 2) в полилинии.

    Сначала открытые цепочки (по возрастанию начального ключа), затем
    циклы.
    """
    successor = {int(a): int(b) for a, b in segments}
    has_incoming = {int(b) for b in segments[:, 1]}
    lines: list[list[int]] = []
    closed: list[bool] = []
    used: set[int] = set()

    for start in sorted(k for k in successor if k not in has_incoming):
        line = [start]
        node = start
        while node in successor:
            used.add(node)
            node = successor[node]
            line.append(node)
        lines.append(line)
        closed.append(False)

    for start in sorted(successor):
        if start in used:
            continue
        line = []
        node = start
        while node not in used:
            used.add(node)
            line.append(node)
            node = successor[node]
        lines.append(line)
        closed.append(True)
    return lines, closed


@logged(level=logging.INFO)
def marching_squares(
    grid: SdfGrid,
    iso: float = 0.0,
    sdf: Optional[SdfFn] = None,
) -> ContourSet:
    """Полилинии уровня iso двумерной решётки.

    Седловые клетки разрешаются значением в центре клетки: из `sdf`,
    если она передана, иначе средним по углам.

    Raises:
        ShapeError: Если решётка не двумерная.
    """
    if grid.dim != 2:
        raise ShapeError(f'marching squares требует 2D решётку: {grid.dim}D')

    case = _case_index(grid.values, _SQUARE_CORNERS, iso)
    saddle = np.nonzero((case == 5) | (case == 10))
    centre_positive = {}
    if saddle[0].size:
        saddle_cells = np.stack(saddle, axis=1)
        if sdf is not None:
            centres = grid.origin + (saddle_cells + 0.5) * grid.spacing
            centre = np.asarray(sdf(centres)).reshape(-1)
        else:
            v = grid.values
            i, j = saddle
            centre = (v[i, j] + v[i + 1, j] + v[i + 1, j + 1] + v[i, j + 1])
            centre = centre / 4.0
        for cell, value in zip(map(tuple, saddle_cells), centre):
            centre_positive[cell] = bool(value > iso)

    cells = []
    pairs = []
    for i, j in np.argwhere((case > 0) & (case < 15)):
        code = int(case[i, j])
        if code in _SADDLES:
            table = _SADDLES[code][centre_positive[(int(i), int(j))]]
        else:
            table = _SQUARE_SEGMENTS[code]
        for pair in table:
            cells.append((i, j))
            pairs.append(pair)

    if not pairs:
        logger.warning('Grid has no crossing of iso=%g; empty contour', iso)
        return ContourSet.empty()

    cells = np.asarray(cells, dtype=np.int64)
    pairs = np.asarray(pairs, dtype=np.int64)
    segments = np.stack(
        [
            _edge_keys(
                cells,
                pairs[:, c],
                _SQUARE_CORNERS,
                _SQUARE_EDGES,
                grid.resolution,
            )
            for c in range(2)
        ],
        axis=1,
    )
    lines, closed = _stitch(segments)

    unique = np.unique(segments)
    compact = dict(zip(unique.tolist(), range(len(unique))))
    polylines = tuple(
        np.array([compact[k] for k in line], dtype=np.int64)
        for line in lines
    )
    vertices = _edge_vertices(grid, unique, iso)
    logger.debug(
        'Marching squares: %d polylines, V=%d', len(polylines), len(unique)
    )
    return ContourSet(vertices, polylines, tuple(closed))


def extract_level_set(
    grid: SdfGrid,
    iso: float = 0.0,
    sdf: Optional[SdfFn] = None,
) -> Union[TriangleMesh, ContourSet]:
    """marching cubes для 3D решётки, marching squares для 2D."""
    if grid.dim == 3:
        return marching_cubes(grid, iso)
    return marching_squares(grid, iso, sdf)
