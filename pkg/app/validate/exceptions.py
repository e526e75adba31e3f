"""Исключения пайплайна.

Каждое исключение несёт код завершения CLI: 1 — ошибка использования,
2 — ошибка данных, 3 — численный сбой.
"""

from __future__ import annotations

from typing import Any, Optional

from app.core.constants import EXIT_DATA, EXIT_NUMERICAL, EXIT_USAGE


class PipelineError(RuntimeError):
    """Базовая ошибка пайплайна."""

    exit_code: int = EXIT_USAGE


class UsageError(PipelineError):
    """Неверные аргументы, конфигурация или режим."""

    exit_code = EXIT_USAGE


class DataError(PipelineError):
    """Входные данные или файлы непригодны."""

    exit_code = EXIT_DATA


class NumericalError(PipelineError):
    """Численный сбой: NaN/inf в лоссе или поле SDF."""

    exit_code = EXIT_NUMERICAL


class ShapeError(UsageError, ValueError):
    """Несовместимые формы операндов."""


class AutodiffError(UsageError):
    """Неверное использование графа: нескалярный корень, старые градиенты."""


class EmptyCloudError(DataError):
    """Пустое облако точек."""


class DegenerateRegionError(DataError):
    """Регион, все точки которого совпадают."""


class FileFormatError(DataError):
    """Ошибка разбора текстового файла; `line` — номер строки с 1."""

    def __init__(self, message: str, *, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f'строка {line}: {message}'
        super().__init__(message)


class PointCloudFormatError(FileFormatError):
    """Ошибка разбора файла облака точек."""


class MeshFormatError(FileFormatError):
    """Ошибка разбора файла меша или контура."""


class CheckpointError(DataError):
    """Повреждённый или несовместимый чекпоинт."""


class MeshError(DataError):
    """Непригодный меш или ошибка записи меша."""


class NonFiniteError(NumericalError):
    """Нечисловое значение лосса или SDF с диагностическим контекстом."""

    def __init__(self, message: str, **context: Any):
        self.context = context
        if context:
            details = ', '.join(f'{k}={v}' for k, v in context.items())
            message = f'{message} ({details})'
        super().__init__(message)
