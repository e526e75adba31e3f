"""Запись и чтение мешей (OBJ, ASCII PLY) и 2D-контуров (OBJ `l`).

Числа пишутся с 9 значащими цифрами, индексы OBJ начинаются с 1.
Вывод детерминирован: одинаковый меш даёт побайтно одинаковый файл.
"""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Optional, Union

import numpy as np

from app.io.formats import (
    MESH_SUFFIXES,
    fmt_row,
    open_for_write,
    parse_ply_header,
    read_lines,
    resolve_format,
)
from app.logging import logged
from app.models.mesh import ContourSet, TriangleMesh
from app.validate.exceptions import MeshError, MeshFormatError

logger = logging.getLogger(__name__)


def _write_obj(mesh: TriangleMesh, fh) -> None:
    for v in mesh.vertices:
        fh.write('v ' + fmt_row(v) + '\n')
    if mesh.normals is not None:
        for n in mesh.normals:
            fh.write('vn ' + fmt_row(n) + '\n')
    for tri in mesh.triangles + 1:
        if mesh.normals is not None:
            fh.write('f ' + ' '.join(f'{i}//{i}' for i in tri) + '\n')
        else:
            fh.write(f'f {tri[0]} {tri[1]} {tri[2]}\n')


def _write_ply(mesh: TriangleMesh, fh) -> None:
    fh.write('ply\nformat ascii 1.0\n')
    fh.write(f'element vertex {len(mesh.vertices)}\n')
    names = ['x', 'y', 'z']
    if mesh.normals is not None:
        names += ['nx', 'ny', 'nz']
    for name in names:
        fh.write(f'property double {name}\n')
    fh.write(f'element face {len(mesh.triangles)}\n')
    fh.write('property list uchar int vertex_indices\n')
    fh.write('end_header\n')
    for k, v in enumerate(mesh.vertices):
        row = list(v)
        if mesh.normals is not None:
            row += list(mesh.normals[k])
        fh.write(fmt_row(row) + '\n')
    for tri in mesh.triangles:
        fh.write(f'3 {tri[0]} {tri[1]} {tri[2]}\n')


@logged(level=logging.INFO)
def write_mesh(
    mesh: TriangleMesh,
    path: Path,
    fmt: Optional[str] = None,
) -> Path:
    """Записать меш в OBJ или ASCII PLY.

    Args:
        mesh: Треугольный меш; нормали вершин пишутся, если есть.
        path: Путь к файлу.
        fmt: `obj` или `ply`; None — по расширению.

    Returns:
        Path: Путь к записанному файлу.

    Raises:
        MeshError: Если путь недоступен для записи.
    """
    path = Path(path)
    fmt = resolve_format(path, fmt, MESH_SUFFIXES)
    if mesh.is_empty:
        logger.warning('Writing empty mesh: %s', path)
    with open_for_write(path, MeshError) as fh:
        if fmt == 'ply':
            _write_ply(mesh, fh)
        else:
            _write_obj(mesh, fh)
    logger.info('Mesh written: %s (%s)', path, mesh.summary())
    return path


@logged(level=logging.INFO)
def write_contour(contour: ContourSet, path: Path) -> Path:
    """Записать контур в OBJ: вершины `v x y 0` и полилинии `l`.

    Замкнутая полилиния повторяет первый индекс в конце.
    """
    path = Path(path)
    if contour.is_empty:
        logger.warning('Writing empty contour: %s', path)
    with open_for_write(path, MeshError) as fh:
        for v in contour.vertices:
            fh.write('v ' + fmt_row([v[0], v[1], 0.0]) + '\n')
        for line, closed in zip(contour.polylines, contour.closed):
            idx = [int(i) + 1 for i in line]
            if closed:
                idx.append(idx[0])
            fh.write('l ' + ' '.join(map(str, idx)) + '\n')
    logger.info('Contour written: %s (%s)', path, contour.summary())
    return path


def _obj_index(token: str, count: int, line: int) -> int:
    head = token.split('/', 1)[0]
    try:
        idx = int(head)
    except ValueError:
        raise MeshFormatError(f'неверный индекс {token!r}', line=line)
    idx = idx - 1 if idx > 0 else count + idx
    if not 0 <= idx < count:
        raise MeshFormatError(f'индекс {token!r} вне диапазона', line=line)
    return idx


def _floats(parts: list[str], size: int, line: int) -> list[float]:
    if len(parts) < size:
        raise MeshFormatError(
            f'ожидалось {size} чисел, получено {len(parts)}', line=line
        )
    try:
        return [float(p) for p in parts[:size]]
    except ValueError:
        raise MeshFormatError(f'ожидались числа: {parts!r}', line=line)


def _parse_obj(lines: list[str]) -> tuple:
    verts, normals, faces, polylines = [], [], [], []
    for i, raw in enumerate(lines, start=1):
        parts = raw.split('#', 1)[0].split()
        if not parts:
            continue
        key, rest = parts[0], parts[1:]
        if key == 'v':
            verts.append(_floats(rest, 3, i))
        elif key == 'vn':
            normals.append(_floats(rest, 3, i))
        elif key == 'f':
            if len(rest) < 3:
                raise MeshFormatError('грань из < 3 вершин', line=i)
            idx = [_obj_index(t, len(verts), i) for t in rest]
            # Многоугольник разбивается веером от первой вершины.
            for k in range(1, len(idx) - 1):
                faces.append([idx[0], idx[k], idx[k + 1]])
        elif key == 'l':
            polylines.append([_obj_index(t, len(verts), i) for t in rest])
    return verts, normals, faces, polylines


def _ply_face(parts: list[str], line: int) -> list[int]:
    try:
        count = int(parts[0])
        idx = [int(p) for p in parts[1 : 1 + count]]
    except (ValueError, IndexError):
        raise MeshFormatError(f'неверная грань {parts!r}', line=line)
    if len(idx) != count or count < 3:
        raise MeshFormatError(f'неверная грань {parts!r}', line=line)
    return idx


def _parse_ply_mesh(lines: list[str]) -> TriangleMesh:
    header = parse_ply_header(lines, MeshFormatError)
    vertex = header.element('vertex')
    face = header.element('face')
    if vertex is None:
        raise MeshFormatError('в PLY нет элемента vertex')
    props = vertex.properties
    if not all(a in props for a in ('x', 'y', 'z')):
        raise MeshFormatError(f'у vertex нет x, y, z: {props}')
    has_normals = all(a in props for a in ('nx', 'ny', 'nz'))

    line = header.body_start
    verts, normals, faces = [], [], []
    for element in header.elements:
        for _ in range(element.count):
            line += 1
            if line > len(lines):
                raise MeshFormatError('файл закончился', line=len(lines))
            parts = lines[line - 1].split()
            if element is vertex:
                values = _floats(parts, len(props), line)
                verts.append([values[props.index(a)] for a in 'xyz'])
                if has_normals:
                    normals.append(
                        [values[props.index(a)] for a in ('nx', 'ny', 'nz')]
                    )
            elif element is face:
                idx = _ply_face(parts, line)
                for k in range(1, len(idx) - 1):
                    faces.append([idx[0], idx[k], idx[k + 1]])
    return TriangleMesh(
        np.array(verts).reshape(-1, 3),
        np.array(faces, dtype=np.int64).reshape(-1, 3),
        np.array(normals) if has_normals else None,
    )


@logged(level=logging.DEBUG)
def read_mesh(path: Path, fmt: Optional[str] = None) -> TriangleMesh:
    """Прочитать треугольный меш из OBJ или ASCII PLY.

    Нормали сохраняются, только если их число совпадает с числом
    вершин.

    Raises:
        MeshFormatError: Ошибка разбора с номером строки.
    """
    path = Path(path)
    fmt = resolve_format(path, fmt, MESH_SUFFIXES)
    lines = read_lines(path)
    if fmt == 'ply':
        mesh = _parse_ply_mesh(lines)
    else:
        verts, normals, faces, _ = _parse_obj(lines)
        if len(normals) != len(verts):
            normals = None
        mesh = TriangleMesh(
            np.array(verts).reshape(-1, 3),
            np.array(faces, dtype=np.int64).reshape(-1, 3),
            normals,
        )
    logger.info('Mesh read: %s (%s)', path, mesh.summary())
    return mesh


def read_contour(path: Path) -> ContourSet:
    """Прочитать контур, записанный `write_contour`."""
    verts, _, _, polylines = _parse_obj(read_lines(path))
    lines, closed = [], []
    for line in polylines:
        is_closed = len(line) > 2 and line[0] == line[-1]
        lines.append(np.array(line[:-1] if is_closed else line))
        closed.append(is_closed)
    vertices = np.array(verts).reshape(-1, 3)[:, :2]
    return ContourSet(vertices, tuple(lines), tuple(closed))


def read_surface(path: Path) -> Union[TriangleMesh, ContourSet]:
    """Меш или контур: OBJ без граней, но с `l`, читается как контур."""
    path = Path(path)
    fmt = resolve_format(path, None, MESH_SUFFIXES)
    if fmt == 'obj':
        _, _, faces, polylines = _parse_obj(read_lines(path))
        if not faces and polylines:
            return read_contour(path)
    return read_mesh(path, fmt)
