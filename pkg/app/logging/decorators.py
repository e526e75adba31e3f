"""Декоратор `logged` и компактное описание аргументов для логов.

Большие массивы и сети в лог не попадают. Массив описывается формой и
dtype, объекты пакета с методом `summary()` описывают себя сами, у
конфигов выводятся только поля, отличные от значений по умолчанию.
"""

from __future__ import annotations

import dataclasses
import inspect
import logging
import time
from functools import wraps
from pathlib import PurePath
from typing import Any, Callable, Optional, TypeVar

import numpy as np

from app.core.constants import DEFAULT_MAXLEN, UNHANDLED
from app.validate.exceptions import PipelineError

F = TypeVar('F', bound=Callable[..., Any])

_DOMAIN_PACKAGES = (
    'app.models',
    'app.autodiff',
    'app.nets',
    'app.geometry',
    'app.service',
)
_ITEM_LIMIT = 6
_ITEM_MAXLEN = 80


def _clip(text: str, maxlen: int) -> str:
    return text if len(text) <= maxlen else text[: max(0, maxlen - 3)] + '...'


def _plain(value: Any, maxlen: int) -> str | object:
    if value is None or isinstance(value, (bool, int, float)):
        return repr(value)
    if isinstance(value, np.generic):
        return repr(value.item())
    if isinstance(value, str):
        return _clip(repr(value), maxlen)
    if isinstance(value, PurePath):
        return _clip(str(value), maxlen)
    return UNHANDLED


def _array(value: Any, maxlen: int) -> str | object:
    if isinstance(value, np.ndarray):
        return f'ndarray(shape={value.shape}, dtype={value.dtype})'
    return UNHANDLED


def _summarized(value: Any, maxlen: int) -> str | object:
    module = getattr(type(value), '__module__', '') or ''
    summary = getattr(value, 'summary', None)
    if not module.startswith(_DOMAIN_PACKAGES) or not callable(summary):
        return UNHANDLED
    return _clip(f'{type(value).__name__}({summary()})', maxlen)


def _config(value: Any, maxlen: int) -> str | object:
    # Конфиги: только поля, изменённые относительно значений по умолчанию.
    if not dataclasses.is_dataclass(value) or isinstance(value, type):
        return UNHANDLED
    changed = []
    for f in dataclasses.fields(value):
        current = getattr(value, f.name)
        if isinstance(current, np.ndarray):
            continue
        if f.default is not dataclasses.MISSING and current == f.default:
            continue
        changed.append(f'{f.name}={describe(current, maxlen=_ITEM_MAXLEN)}')
    return _clip(f'{type(value).__name__}({", ".join(changed)})', maxlen)


def _cli_namespace(value: Any, maxlen: int) -> str | object:
    if type(value).__name__ != 'Namespace' or not hasattr(value, '__dict__'):
        return UNHANDLED
    given = {
        k: v for k, v in vars(value).items()
        if v is not None and not callable(v)
    }
    return describe(given, maxlen=maxlen)


def _container(value: Any, maxlen: int) -> str | object:
    if isinstance(value, dict):
        items = [
            f'{describe(k, maxlen=40)}: {describe(v, maxlen=_ITEM_MAXLEN)}'
            for k, v in list(value.items())[:_ITEM_LIMIT]
        ]
        brackets = '{}'
    elif isinstance(value, (list, tuple, set, frozenset)):
        items = [
            describe(v, maxlen=_ITEM_MAXLEN)
            for v in list(value)[:_ITEM_LIMIT]
        ]
        brackets = {list: '[]', tuple: '()'}.get(type(value), '{}')
    else:
        return UNHANDLED
    if len(value) > _ITEM_LIMIT:
        items.append(f'...+{len(value) - _ITEM_LIMIT}')
    return _clip(brackets[0] + ', '.join(items) + brackets[1], maxlen)


_DESCRIBERS = (
    _plain,
    _array,
    _summarized,
    _config,
    _cli_namespace,
    _container,
)


def describe(value: Any, *, maxlen: int = DEFAULT_MAXLEN) -> str:
    """Короткое безопасное описание значения для строки лога.

    Args:
        value: Любое значение.
        maxlen: Максимальная длина результата.

    Returns:
        str: Описание не длиннее `maxlen`.
    """
    for describer in _DESCRIBERS:
        text = describer(value, maxlen)
        if text is not UNHANDLED:
            return text  # type: ignore[return-value]
    try:
        return _clip(repr(value), maxlen)
    except Exception:  # pragma: no cover
        return f'<unreprable {type(value).__name__}>'


def _format_call(
    func: Callable[..., Any],
    args: tuple[Any, ...],
    kwargs: dict[str, Any],
    *,
    maxlen: int,
    skip_none: bool,
) -> str:
    try:
        bound = inspect.signature(func).bind_partial(*args, **kwargs)
    except TypeError:
        return ''
    return ', '.join(
        f'{key}={describe(value, maxlen=maxlen)}'
        for key, value in bound.arguments.items()
        if key not in {'self', 'cls'} and not (skip_none and value is None)
    )


def logged(
    *,
    name: Optional[str] = None,
    logger: Optional[logging.Logger] = None,
    level: int = logging.INFO,
    log_args: bool = True,
    log_result: bool = False,
    maxlen: int = DEFAULT_MAXLEN,
    skip_none: bool = True,
) -> Callable[[F], F]:
    """Логировать вызов этапа пайплайна.

    Пишет события start/ok/error и время выполнения. Ошибки пайплайна
    (`PipelineError`) логируются одной строкой с кодом завершения, прочие
    исключения — с трассировкой.

    Args:
        name: Имя события; по умолчанию `модуль.функция`.
        logger: Логгер; по умолчанию логгер модуля функции.
        level: Уровень событий start/ok.
        log_args: Добавлять ли описание аргументов к start.
        log_result: Добавлять ли описание результата к ok.
        maxlen: Предел длины описания одного значения.
        skip_none: Не выводить аргументы со значением None.

    Returns:
        Callable[[F], F]: Декоратор.
    """

    def decorator(func: F) -> F:
        log = logger or logging.getLogger(func.__module__)
        event = name or f'{func.__module__}.{func.__qualname__}'

        @wraps(func)
        def wrapper(*args: Any, **kwargs: Any):
            call = ''
            if log_args:
                call = _format_call(
                    func, args, kwargs, maxlen=maxlen, skip_none=skip_none
                )
            suffix = f' ({call})' if call else ''
            log.log(level, '%s -> start%s', event, suffix)

            start = time.perf_counter()
            try:
                result = func(*args, **kwargs)
            except PipelineError as e:
                ms = (time.perf_counter() - start) * 1000
                log.error(
                    '%s -> %s exit=%d (%.1fms): %s',
                    event,
                    type(e).__name__,
                    e.exit_code,
                    ms,
                    e,
                )
                raise
            except Exception:
                ms = (time.perf_counter() - start) * 1000
                log.exception('%s -> error (%.1fms)', event, ms)
                raise

            ms = (time.perf_counter() - start) * 1000
            if log_result:
                log.log(
                    level,
                    '%s -> ok (%.1fms) result=%s',
                    event,
                    ms,
                    describe(result, maxlen=maxlen),
                )
            else:
                log.log(level, '%s -> ok (%.1fms)', event, ms)
            return result

        return wrapper

    return decorator
