"""Функции валидации входных данных."""

from __future__ import annotations

import logging
from typing import Any, Iterable, Optional, TypeVar

import numpy as np

from app.validate.exceptions import (
    EmptyCloudError,
    NonFiniteError,
    ShapeError,
    UsageError,
)

logger = logging.getLogger(__name__)
T = TypeVar('T')


def validate_positive_int(value: int, field_name: str) -> int:
    """Проверяет, что значение — целое больше нуля.

    Args:
        value: Проверяемое значение.
        field_name: Имя поля для сообщения об ошибке.

    Returns:
        int: Исходное значение.

    Raises:
        UsageError: Если значение не целое или меньше единицы.
    """
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
        raise UsageError(f'{field_name} должно быть целым числом.')
    if value <= 0:
        logger.info('Non-positive value blocked: %s=%s', field_name, value)
        raise UsageError(f'{field_name} должно быть больше нуля.')
    return int(value)


def validate_non_negative_int(value: int, field_name: str) -> int:
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
        raise UsageError(f'{field_name} должно быть целым числом.')
    if value < 0:
        logger.info('Negative value blocked: %s=%s', field_name, value)
        raise UsageError(f'{field_name} не может быть отрицательным.')
    return int(value)


def validate_positive_value(value: float, field_name: str) -> float:
    """Проверяет, что значение больше нуля.

    Args:
        value: Проверяемое значение.
        field_name: Имя поля для сообщения об ошибке.

    Returns:
        float: Исходное значение.

    Raises:
        UsageError: Если значение меньше либо равно нулю или не конечно.
    """
    if not np.isfinite(value) or value <= 0:
        logger.info('Non-positive value blocked: %s=%s', field_name, value)
        raise UsageError(
            f'{field_name} не может быть меньше или равной нулю.'
        )
    return value


def validate_choice(value: T, choices: Iterable[T], field_name: str) -> T:
    """Проверяет, что значение входит в допустимый набор.

    Args:
        value: Проверяемое значение.
        choices: Допустимые значения.
        field_name: Имя поля для сообщения об ошибке.

    Returns:
        T: Исходное значение.

    Raises:
        UsageError: Если значение не из набора.
    """
    allowed = tuple(choices)
    if value not in allowed:
        logger.info('Unknown choice blocked: %s=%r', field_name, value)
        raise UsageError(
            f'Неизвестное значение {field_name}={value!r}; '
            f'допустимо: {", ".join(map(str, allowed))}.'
        )
    return value


def validate_betas(betas: tuple[float, float]) -> tuple[float, float]:
    if len(betas) != 2 or not all(0.0 <= b < 1.0 for b in betas):
        raise UsageError(f'betas должны лежать в [0, 1): {betas}.')
    return float(betas[0]), float(betas[1])


def validate_points(
    points: Any,
    *,
    dim: Optional[int] = None,
    name: str = 'points',
) -> np.ndarray:
    """Привести массив точек к float64 (N, D) и проверить его.

    Args:
        points: Массив-подобный объект точек.
        dim: Ожидаемая размерность D или None (допустимы 2 и 3).
        name: Имя для сообщений об ошибках.

    Returns:
        np.ndarray: Массив формы (N, D).

    Raises:
        ShapeError: Если массив не двумерный или D не подходит.
        EmptyCloudError: Если точек нет.
        NonFiniteError: Если встречены NaN/inf.
    """
    arr = np.asarray(points, dtype=np.float64)
    if arr.size == 0:
        raise EmptyCloudError(f'{name}: облако точек пустое.')
    if arr.ndim != 2:
        raise ShapeError(
            f'{name}: ожидается форма (N, D), получено {arr.shape}'
        )
    if arr.shape[0] == 0:
        raise EmptyCloudError(f'{name}: облако точек пустое.')
    expected = (dim,) if dim is not None else (2, 3)
    if arr.shape[1] not in expected:
        raise ShapeError(
            f'{name}: размерность {arr.shape[1]} не из {expected} '
            f'(форма {arr.shape})'
        )
    ensure_finite(arr, name)
    return arr


def ensure_finite(values: Any, name: str, **context: Any) -> np.ndarray:
    """Проверяет, что все значения конечны.

    Args:
        values: Массив-подобный объект или число.
        name: Имя величины для сообщения.
        **context: Диагностический контекст (шаг, регион, узел решётки).

    Returns:
        np.ndarray: Массив значений.

    Raises:
        NonFiniteError: Если встречен NaN или inf.
    """
    arr = np.asarray(values)
    if not np.all(np.isfinite(arr)):
        logger.error('Non-finite %s detected: %s', name, context)
        raise NonFiniteError(f'{name}: нечисловое значение', **context)
    return arr
