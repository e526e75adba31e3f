"""Утилиты путей приложения.

Всё, что приложение **пишет** помимо явно заданных артефактов (логи,
кэш matplotlib), лежит в пользовательском каталоге состояния, а не рядом
с исходниками. Артефакты пайплайна (чекпоинты, меши, отчёты) всегда
пишутся туда, куда указал пользователь.
"""

from __future__ import annotations

import os
import sys
from pathlib import Path
from typing import Optional

from app.core.constants import APP_NAME


def get_app_state_dir(app_name: Optional[str] = None) -> Path:
    """Получить каталог состояния приложения.

    В Windows используется `%APPDATA%`, в macOS —
    `~/Library/Application Support`, в Linux — `$XDG_STATE_HOME`
    или `~/.local/state`.

    Args:
        app_name: Имя приложения для каталога. Если не задано — используется
            `APP_NAME`.

    Returns:
        Path: Путь к каталогу состояния приложения.
    """
    name = app_name or APP_NAME

    if os.name == 'nt':
        base = os.getenv('APPDATA')
        base_dir = Path(base) if base else Path.home() / 'AppData' / 'Roaming'
    elif sys.platform == 'darwin':
        base_dir = Path.home() / 'Library' / 'Application Support'
    else:
        base = os.getenv('XDG_STATE_HOME')
        base_dir = Path(base) if base else Path.home() / '.local' / 'state'

    path = base_dir / name
    path.mkdir(parents=True, exist_ok=True)
    return path


def get_logs_dir(app_name: Optional[str] = None) -> Path:
    """Получить каталог логов и гарантировать его существование.

    Args:
        app_name: Имя приложения для каталога.

    Returns:
        Path: Путь к каталогу логов.
    """
    path = get_app_state_dir(app_name) / 'logs'
    path.mkdir(parents=True, exist_ok=True)
    return path


def ensure_parent_dir(path: Path) -> Path:
    """Создать родительский каталог для файла артефакта.

    Args:
        path: Путь к файлу, который будет записан.

    Returns:
        Path: Тот же путь, приведённый к `Path`.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def sibling_path(path: Path, suffix: str) -> Path:
    """Путь рядом с артефактом: `mesh.obj` -> `mesh.manifest.json`.

    Args:
        path: Путь к основному артефакту.
        suffix: Новый хвост имени, например `.manifest.json`.

    Returns:
        Path: Путь к сопутствующему файлу.
    """
    path = Path(path)
    return path.with_name(path.stem + suffix)
