"""Решётка значений SDF, треугольные меши и 2D-контуры."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from app.validate.exceptions import MeshError, ShapeError


@dataclass(frozen=True, eq=False)
class SdfGrid:
    """Регулярная решётка значений SDF.

    Узел с индексом `idx` лежит в точке `origin + idx * spacing`.
    `values` имеет форму `resolution`.
    """

    origin: np.ndarray
    spacing: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        origin = np.asarray(self.origin, dtype=np.float64)
        spacing = np.asarray(self.spacing, dtype=np.float64)
        if origin.shape != (values.ndim,) or spacing.shape != origin.shape:
            raise ShapeError(
                f'origin {origin.shape} / spacing {spacing.shape} '
                f'не согласованы с решёткой {values.shape}'
            )
        if any(n < 2 for n in values.shape):
            raise ShapeError(
                f'решётка должна иметь ≥ 2 узлов по оси: {values.shape}'
            )
        if np.any(spacing <= 0):
            raise ShapeError(f'шаг решётки должен быть > 0: {spacing}')
        object.__setattr__(self, 'values', values)
        object.__setattr__(self, 'origin', origin)
        object.__setattr__(self, 'spacing', spacing)

    @property
    def dim(self) -> int:
        return int(self.values.ndim)

    @property
    def resolution(self) -> tuple[int, ...]:
        return tuple(int(n) for n in self.values.shape)

    def axes(self) -> list[np.ndarray]:
        return [
            self.origin[a] + np.arange(n) * self.spacing[a]
            for a, n in enumerate(self.resolution)
        ]

    def node_coordinates(self) -> np.ndarray:
        """Координаты всех узлов в C-порядке, форма (∏resolution, D)."""
        mesh = np.meshgrid(*self.axes(), indexing='ij')
        return np.stack([m.ravel() for m in mesh], axis=1)

    def cell_diagonal(self) -> float:
        return float(np.linalg.norm(self.spacing))

    def summary(self) -> str:
        return f'resolution={self.resolution}'


@dataclass(frozen=True, eq=False)
class TriangleMesh:
    """Треугольный меш: вершины (V, 3), треугольники (F, 3), нормали."""

    vertices: np.ndarray
    triangles: np.ndarray
    normals: Optional[np.ndarray] = None

    def __post_init__(self):
        verts = np.asarray(self.vertices, dtype=np.float64).reshape(-1, 3)
        tris = np.asarray(self.triangles, dtype=np.int64).reshape(-1, 3)
        if tris.size and (tris.min() < 0 or tris.max() >= len(verts)):
            raise MeshError('индекс треугольника вне диапазона вершин')
        if tris.size and np.any(
            (tris[:, 0] == tris[:, 1])
            | (tris[:, 1] == tris[:, 2])
            | (tris[:, 0] == tris[:, 2])
        ):
            raise MeshError('вырожденный треугольник с повтором вершины')
        object.__setattr__(self, 'vertices', verts)
        object.__setattr__(self, 'triangles', tris)
        if self.normals is not None:
            nrm = np.asarray(self.normals, dtype=np.float64).reshape(-1, 3)
            if nrm.shape != verts.shape:
                raise ShapeError(
                    f'нормали {nrm.shape} не совпадают с вершинами '
                    f'{verts.shape}'
                )
            object.__setattr__(self, 'normals', nrm)

    @classmethod
    def empty(cls) -> TriangleMesh:
        return cls(np.zeros((0, 3)), np.zeros((0, 3), dtype=np.int64))

    @property
    def is_empty(self) -> bool:
        return self.triangles.shape[0] == 0

    def face_cross(self) -> np.ndarray:
        v = self.vertices[self.triangles]
        return np.cross(v[:, 1] - v[:, 0], v[:, 2] - v[:, 0])

    def face_areas(self) -> np.ndarray:
        return 0.5 * np.linalg.norm(self.face_cross(), axis=1)

    def face_normals(self) -> np.ndarray:
        cross = self.face_cross()
        length = np.linalg.norm(cross, axis=1, keepdims=True)
        return cross / np.where(length > 0, length, 1.0)

    def edges(self) -> np.ndarray:
        """Неориентированные рёбра всех треугольников (с повторами)."""
        t = self.triangles
        e = np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
        return np.sort(e, axis=1)

    def euler_characteristic(self) -> int:
        unique_edges = np.unique(self.edges(), axis=0)
        return len(self.vertices) - len(unique_edges) + len(self.triangles)

    def is_watertight(self) -> bool:
        if self.is_empty:
            return False
        _, counts = np.unique(self.edges(), axis=0, return_counts=True)
        return bool(np.all(counts == 2))

    def transformed(self, scale: float, offset: np.ndarray) -> TriangleMesh:
        return TriangleMesh(
            self.vertices * scale + offset,
            self.triangles,
            self.normals,
        )

    def summary(self) -> str:
        return f'V={len(self.vertices)}, F={len(self.triangles)}'


@dataclass(frozen=True, eq=False)
class ContourSet:
    """Набор 2D-полилиний, выделенных marching squares.

    Attributes:
        vertices: Общие вершины (V, 2).
        polylines: Кортеж массивов индексов вершин по порядку обхода.
        closed: Признак замкнутости для каждой полилинии.
    """

    vertices: np.ndarray
    polylines: tuple[np.ndarray, ...] = ()
    closed: tuple[bool, ...] = ()

    @classmethod
    def empty(cls) -> ContourSet:
        return cls(np.zeros((0, 2)))

    @property
    def is_empty(self) -> bool:
        return len(self.polylines) == 0

    def segments(self) -> np.ndarray:
        """Пары индексов (S, 2) всех отрезков, включая замыкающие."""
        pairs = []
        for line, is_closed in zip(self.polylines, self.closed):
            if len(line) >= 2:
                pairs.append(np.stack([line[:-1], line[1:]], axis=1))
            if is_closed and len(line) >= 2:
                pairs.append(np.array([[line[-1], line[0]]]))
        if not pairs:
            return np.zeros((0, 2), dtype=np.int64)
        return np.concatenate(pairs).astype(np.int64)

    def total_length(self) -> float:
        seg = self.segments()
        if not len(seg):
            return 0.0
        d = self.vertices[seg[:, 1]] - self.vertices[seg[:, 0]]
        return float(np.linalg.norm(d, axis=1).sum())

    def summary(self) -> str:
        return (
            f'polylines={len(self.polylines)}, '
            f'closed={sum(self.closed)}, V={len(self.vertices)}'
        )
