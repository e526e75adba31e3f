"""Настройки запуска и подготовка runtime окружения.

Задачи модуля:
- читать файл конфигурации прогона (строки KEY=VALUE) без изменения
  переменных окружения процесса;
- собирать замороженные dataclass-конфиги по правилу приоритета
  «флаги CLI > файл конфигурации > встроенные значения по умолчанию»;
- настраивать matplotlib на запись кэша в каталог пользователя.
"""

from __future__ import annotations

import dataclasses
import json
import logging
import os
import typing
from pathlib import Path
from typing import Any, Mapping, Optional, TypeVar, Union

from dotenv import dotenv_values

from app.core.constants import APP_NAME
from app.core.paths import get_app_state_dir
from app.validate.exceptions import UsageError

logger = logging.getLogger(__name__)

ConfigT = TypeVar('ConfigT')

_TRUE = {'1', 'true', 'yes', 'on'}
_FALSE = {'0', 'false', 'no', 'off'}


def load_config_file(path: Optional[Path]) -> dict[str, str]:
    """Прочитать файл конфигурации прогона.

    Формат — строки `key=value`, комментарии через `#`. Ключи приводятся
    к нижнему регистру и совпадают с именами полей конфигов. Файл `.json`
    читается как манифест прогона: значения берутся из его `config`.

    Args:
        path: Путь к файлу или None.

    Returns:
        dict[str, str]: Сырые строковые значения (пусто, если файла нет).

    Raises:
        UsageError: Если указанный файл не существует.
    """
    if path is None:
        return {}

    p = Path(path)
    if not p.is_file():
        raise UsageError(f'Файл конфигурации не найден: {p}')

    if p.suffix.lower() == '.json':
        raw = _manifest_values(p)
    else:
        raw = dotenv_values(p)
    values = {
        key.strip().lower(): value
        for key, value in raw.items()
        if value is not None
    }
    logger.info('Config file loaded: %s (%d keys)', p, len(values))
    return values


def _raw_value(value: Any) -> Optional[str]:
    if value is None:
        return 'none'
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, (list, tuple)):
        return ','.join(str(v) for v in value)
    return str(value)


def _manifest_values(path: Path) -> dict[str, Optional[str]]:
    try:
        data = json.loads(path.read_text(encoding='utf-8'))
    except (OSError, ValueError) as e:
        raise UsageError(f'Не удалось прочитать манифест {path}: {e}')
    config = data.get('config', data) if isinstance(data, dict) else {}
    values: dict[str, Optional[str]] = {}
    for section in config.values():
        if isinstance(section, dict):
            for key, value in section.items():
                values[key] = _raw_value(value)
    return values


def _coerce(raw: Any, hint: Any, key: str) -> Any:
    if not isinstance(raw, str):
        return raw

    text = raw.strip()
    origin = typing.get_origin(hint)
    args = typing.get_args(hint)

    if origin is Union:
        if text.lower() in {'', 'none', 'null'}:
            return None
        inner = next(a for a in args if a is not type(None))
        return _coerce(text, inner, key)

    try:
        if origin is tuple:
            item_type = args[0] if args else float
            return tuple(
                _coerce(part, item_type, key)
                for part in text.split(',')
                if part.strip()
            )
        if hint is bool:
            lowered = text.lower()
            if lowered in _TRUE:
                return True
            if lowered in _FALSE:
                return False
            raise ValueError(text)
        if hint is int:
            return int(text)
        if hint is float:
            return float(text)
    except ValueError:
        raise UsageError(
            f'Неверное значение параметра {key}={raw!r} в конфигурации.'
        )
    return text


def resolve_config(
    cls: type[ConfigT],
    *,
    cli: Optional[Mapping[str, Any]] = None,
    file_values: Optional[Mapping[str, str]] = None,
) -> ConfigT:
    """Собрать конфиг по правилу приоритета.

    Значение флага CLI используется, если оно не None; иначе берётся
    значение из файла; иначе остаётся значение по умолчанию dataclass.

    Args:
        cls: Класс замороженного dataclass-конфига.
        cli: Значения из argparse (None означает «флаг не задан»).
        file_values: Сырые значения из файла конфигурации.

    Returns:
        ConfigT: Экземпляр конфига.
    """
    cli = cli or {}
    file_values = file_values or {}
    hints = typing.get_type_hints(cls)

    kwargs: dict[str, Any] = {}
    for field in dataclasses.fields(cls):
        name = field.name
        if cli.get(name) is not None:
            kwargs[name] = cli[name]
        elif name in file_values:
            kwargs[name] = _coerce(file_values[name], hints[name], name)

    return cls(**kwargs)


def warn_unknown_keys(
    file_values: Mapping[str, str],
    *classes: type,
) -> list[str]:
    """Предупредить о ключах файла, которые не принадлежат ни одному конфигу.

    Args:
        file_values: Сырые значения из файла конфигурации.
        *classes: Классы конфигов, которые собирает команда.

    Returns:
        list[str]: Неизвестные ключи в порядке сортировки.
    """
    known = {f.name for cls in classes for f in dataclasses.fields(cls)}
    unknown = sorted(set(file_values) - known)
    for key in unknown:
        logger.warning('Unknown config key ignored: %s', key)
    return unknown


def prepare_runtime_env(*, app_name: str = APP_NAME) -> None:
    """Подготовить окружение matplotlib.

    Кэш и настройки matplotlib направляются в каталог состояния
    пользователя, бэкенд — неинтерактивный Agg.

    Args:
        app_name: Имя приложения для каталога состояния.

    Returns:
        None
    """
    state_dir = get_app_state_dir(app_name)
    mpl_dir = state_dir / 'matplotlib'
    mpl_dir.mkdir(parents=True, exist_ok=True)

    os.environ.setdefault('MPLCONFIGDIR', str(mpl_dir))
    os.environ.setdefault('MPLBACKEND', 'Agg')
