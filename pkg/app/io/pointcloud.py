"""Чтение и запись облаков точек: ASCII XYZ и ASCII PLY.

XYZ — по точке на строку, координаты через пробелы; `#` начинает
комментарий, лишние столбцы игнорируются. PLY — элемент `vertex` со
свойствами x/y/z и, если есть, nx/ny/nz.
"""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Optional

import numpy as np

from app.io.formats import (
    POINTCLOUD_SUFFIXES,
    fmt_row,
    open_for_write,
    parse_ply_header,
    read_lines,
    resolve_format,
)
from app.logging import logged
from app.models.cloud import PointCloud
from app.validate.exceptions import EmptyCloudError, PointCloudFormatError

logger = logging.getLogger(__name__)

_AXES = ('x', 'y', 'z')
_NORMAL_AXES = ('nx', 'ny', 'nz')


def _parse_floats(parts: list[str], line: int) -> list[float]:
    try:
        return [float(p) for p in parts]
    except ValueError:
        raise PointCloudFormatError(
            f'ожидались числа, получено {" ".join(parts)!r}', line=line
        )


def _infer_dim(lines: list[str]) -> int:
    for raw in lines:
        parts = raw.split('#', 1)[0].split()
        if parts:
            return 2 if len(parts) == 2 else 3
    return 3


def parse_xyz(lines: list[str], dim: Optional[int] = None) -> np.ndarray:
    """Разобрать строки XYZ в массив (N, D).

    Args:
        lines: Строки файла.
        dim: Размерность; None — 2 для двух столбцов в первой строке
            данных, иначе 3.

    Raises:
        PointCloudFormatError: Строка с нечисловыми значениями или меньше
            чем D столбцами.
    """
    dim = dim or _infer_dim(lines)
    rows = []
    for i, raw in enumerate(lines, start=1):
        parts = raw.split('#', 1)[0].split()
        if not parts:
            continue
        if len(parts) < dim:
            raise PointCloudFormatError(
                f'ожидалось не меньше {dim} чисел, получено {len(parts)}',
                line=i,
            )
        rows.append(_parse_floats(parts[:dim], i))
    return np.array(rows, dtype=np.float64).reshape(-1, dim)


def parse_ply_points(
    lines: list[str],
) -> tuple[np.ndarray, Optional[np.ndarray]]:
    """Разобрать вершины ASCII PLY: координаты и нормали, если есть."""
    header = parse_ply_header(lines, PointCloudFormatError)
    vertex = header.element('vertex')
    if vertex is None:
        raise PointCloudFormatError('в PLY нет элемента vertex')
    props = vertex.properties
    axes = [a for a in _AXES if a in props]
    if axes not in (['x', 'y'], ['x', 'y', 'z']):
        raise PointCloudFormatError(
            f'у vertex должны быть свойства x, y (z): {props}'
        )
    normal_axes = list(_NORMAL_AXES[: len(axes)])
    has_normals = all(a in props for a in normal_axes)

    # Элементы перед vertex пропускаются целиком.
    start = header.body_start
    for element in header.elements:
        if element.name == 'vertex':
            break
        start += element.count

    coords = [props.index(a) for a in axes]
    normal_cols = [props.index(a) for a in normal_axes] if has_normals else []
    points = np.zeros((vertex.count, len(axes)))
    normals = np.zeros_like(points) if has_normals else None
    for k in range(vertex.count):
        line = start + k + 1
        if line > len(lines):
            raise PointCloudFormatError(
                f'ожидалось {vertex.count} вершин, файл закончился',
                line=len(lines),
            )
        parts = lines[line - 1].split()
        if len(parts) < len(props):
            raise PointCloudFormatError(
                f'ожидалось {len(props)} значений, получено {len(parts)}',
                line=line,
            )
        values = _parse_floats(parts[: len(props)], line)
        points[k] = [values[c] for c in coords]
        if normals is not None:
            normals[k] = [values[c] for c in normal_cols]
    return points, normals


@logged(level=logging.DEBUG)
def read_pointcloud(
    path: Path,
    fmt: Optional[str] = None,
    dim: Optional[int] = None,
) -> PointCloud:
    """Прочитать облако точек из XYZ или PLY.

    Args:
        path: Путь к файлу.
        fmt: `xyz` или `ply`; None — по расширению.
        dim: Размерность для XYZ; None — определить по первой строке.

    Returns:
        PointCloud: Облако (с нормалями, если они были в PLY).

    Raises:
        DataError: Файл не найден.
        PointCloudFormatError: Ошибка разбора с номером строки.
        EmptyCloudError: В файле нет точек.
    """
    path = Path(path)
    fmt = resolve_format(path, fmt, POINTCLOUD_SUFFIXES)
    lines = read_lines(path)
    if fmt == 'ply':
        points, normals = parse_ply_points(lines)
    else:
        points, normals = parse_xyz(lines, dim), None
    if points.shape[0] == 0:
        raise EmptyCloudError(f'В файле {path} нет точек.')
    cloud = PointCloud(points, normals)
    logger.info('Point cloud read: %s (%s)', path, cloud.summary())
    return cloud


@logged(level=logging.DEBUG)
def write_pointcloud(
    cloud: PointCloud,
    path: Path,
    fmt: Optional[str] = None,
) -> Path:
    """Записать облако в XYZ (только координаты) или PLY (и нормали)."""
    path = Path(path)
    fmt = resolve_format(path, fmt, POINTCLOUD_SUFFIXES)
    axes = _AXES[: cloud.dim]
    with open_for_write(path) as fh:
        if fmt == 'ply':
            fh.write('ply\nformat ascii 1.0\n')
            fh.write(f'element vertex {len(cloud)}\n')
            names = list(axes)
            if cloud.normals is not None:
                names += list(_NORMAL_AXES[: cloud.dim])
            for name in names:
                fh.write(f'property double {name}\n')
            fh.write('end_header\n')
        for k in range(len(cloud)):
            row = list(cloud.points[k])
            if fmt == 'ply' and cloud.normals is not None:
                row += list(cloud.normals[k])
            fh.write(fmt_row(row) + '\n')
    logger.info('Point cloud written: %s (%s)', path, cloud.summary())
    return path
