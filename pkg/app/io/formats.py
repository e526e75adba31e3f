"""Общие помощники чтения и записи артефактов."""

from __future__ import annotations

import logging
from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Optional, TextIO

from app.core.constants import MESH_FLOAT_FORMAT
from app.core.paths import ensure_parent_dir
from app.validate.exceptions import DataError, FileFormatError, UsageError

logger = logging.getLogger(__name__)

POINTCLOUD_SUFFIXES = {
    '.xyz': 'xyz',
    '.txt': 'xyz',
    '.pts': 'xyz',
    '.ply': 'ply',
}
MESH_SUFFIXES = {'.obj': 'obj', '.ply': 'ply'}


def resolve_format(
    path: Path,
    fmt: Optional[str],
    suffixes: dict[str, str],
) -> str:
    """Формат файла: явный или по расширению.

    Raises:
        UsageError: Если формат не задан и расширение неизвестно.
    """
    allowed = sorted(set(suffixes.values()))
    if fmt is not None:
        fmt = fmt.lower()
        if fmt not in allowed:
            raise UsageError(
                f'Неизвестный формат {fmt!r}; допустимо: {", ".join(allowed)}.'
            )
        return fmt
    suffix = Path(path).suffix.lower()
    if suffix not in suffixes:
        raise UsageError(
            f'Не удалось определить формат по расширению {suffix!r}: {path}'
        )
    return suffixes[suffix]


def fmt_float(value: float) -> str:
    return MESH_FLOAT_FORMAT % float(value)


def fmt_row(values) -> str:
    return ' '.join(fmt_float(v) for v in values)


def read_lines(path: Path) -> list[str]:
    """Прочитать текстовый файл целиком.

    Raises:
        DataError: Если файла нет или он не читается как текст.
    """
    p = Path(path)
    if not p.is_file():
        raise DataError(f'Файл не найден: {p}')
    try:
        return p.read_text(encoding='utf-8').splitlines()
    except (OSError, UnicodeDecodeError) as e:
        raise DataError(f'Не удалось прочитать {p}: {e}')


@contextmanager
def open_for_write(
    path: Path,
    error_cls: type[DataError] = DataError,
) -> Iterator[TextIO]:
    """Открыть файл на запись с `\\n` в конце строк.

    Raises:
        DataError: Если путь недоступен для записи.
    """
    p = Path(path)
    try:
        ensure_parent_dir(p)
        handle = p.open('w', encoding='utf-8', newline='\n')
    except OSError as e:
        logger.error('Cannot open for writing: %s (%s)', p, e)
        raise error_cls(f'Не удалось записать {p}: {e}')
    with handle:
        yield handle


@dataclass(frozen=True)
class PlyElement:
    name: str
    count: int
    properties: tuple[str, ...]
    is_list: bool = False


@dataclass(frozen=True)
class PlyHeader:
    """Разобранный заголовок ASCII PLY и номер первой строки данных."""

    elements: tuple[PlyElement, ...]
    body_start: int

    def element(self, name: str) -> Optional[PlyElement]:
        return next((e for e in self.elements if e.name == name), None)


def parse_ply_header(
    lines: list[str],
    error_cls: type[FileFormatError],
) -> PlyHeader:
    """Разобрать заголовок PLY.

    Поддерживается только `format ascii 1.0`.

    Raises:
        DataError: Класс `error_cls` с номером строки при ошибке.
    """
    if not lines or lines[0].strip() != 'ply':
        raise error_cls('ожидается заголовок "ply"', line=1)

    elements: list[PlyElement] = []
    current: Optional[dict] = None
    for i, raw in enumerate(lines[1:], start=2):
        parts = raw.split()
        if not parts or parts[0] in ('comment', 'obj_info'):
            continue
        key = parts[0]
        if key == 'format':
            if len(parts) < 2 or parts[1] != 'ascii':
                raise error_cls('поддерживается только ASCII PLY', line=i)
        elif key == 'element':
            if len(parts) != 3 or not parts[2].isdigit():
                raise error_cls(f'неверный element: {raw!r}', line=i)
            if current is not None:
                elements.append(PlyElement(**current))
            current = {
                'name': parts[1],
                'count': int(parts[2]),
                'properties': (),
            }
        elif key == 'property':
            if current is None or len(parts) < 3:
                raise error_cls(f'property вне element: {raw!r}', line=i)
            if parts[1] == 'list':
                current['is_list'] = True
            current['properties'] += (parts[-1],)
        elif key == 'end_header':
            if current is not None:
                elements.append(PlyElement(**current))
            return PlyHeader(tuple(elements), i)
        else:
            raise error_cls(f'неизвестная строка заголовка: {raw!r}', line=i)
    raise error_cls('нет end_header', line=len(lines))
