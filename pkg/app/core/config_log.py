"""Настройка логирования приложения.

Все прогоны за день пишут в один файл `logs_to_YYYY-MM-DD.log`, поэтому
каждая запись файла помечается тегом прогона (`train-prior#1a2b3c`).
Консоль получает короткий формат в stderr: stdout занят таблицами.
"""

from __future__ import annotations

import logging
import os
import sys
from datetime import date
from logging.handlers import RotatingFileHandler
from pathlib import Path
from typing import Optional, TextIO

from app.core.constants import (
    APP_NAME,
    BLUE,
    CONSOLE_FORMAT,
    DT_FORMAT,
    GREEN,
    LOG_FORMAT,
    LOG_ROTATE_BACKUP_COUNT,
    LOG_ROTATE_MAX_BYTES,
    NO_RUN_TAG,
    RED,
    RESET,
    YELLOW,
)
from app.core.paths import get_logs_dir

# Шумные сторонние логгеры, которым хватает WARNING.
_QUIET_LOGGERS = ('matplotlib', 'PIL')


class RunTagFilter(logging.Filter):
    """Добавляет в запись атрибут `run` с тегом текущего прогона."""

    def __init__(self, tag: Optional[str] = None):
        super().__init__()
        self.tag = tag or NO_RUN_TAG

    def filter(self, record: logging.LogRecord) -> bool:
        record.run = self.tag
        return True


def make_run_tag(command: Optional[str]) -> str:
    """Тег прогона: имя команды и pid в hex."""
    if not command:
        return NO_RUN_TAG
    return f'{command}#{os.getpid():x}'


class ColoredConsoleHandler(logging.StreamHandler):
    """Консольный хендлер, раскрашивающий уровни только для терминала."""

    COLOR_MAP = {
        logging.CRITICAL: RED,
        logging.ERROR: RED,
        logging.WARNING: YELLOW,
        logging.INFO: GREEN,
        logging.DEBUG: BLUE,
    }

    def __init__(self, stream: Optional[TextIO] = None):
        super().__init__(stream)
        isatty = getattr(self.stream, 'isatty', None)
        self.use_color = bool(callable(isatty) and isatty())

    def format(self, record: logging.LogRecord) -> str:
        message = super().format(record)
        if not self.use_color:
            return message
        color = self.COLOR_MAP.get(record.levelno, RESET)
        return f'{color}{message}{RESET}'


def console_level_from_flags(*, verbose: int = 0, quiet: bool = False) -> int:
    """Уровень консольного вывода по флагам `-v` / `--quiet`.

    Args:
        verbose: Сколько раз передан `-v`.
        quiet: Оставить в консоли только ошибки.

    Returns:
        int: Уровень из модуля `logging`.
    """
    if quiet:
        return logging.ERROR
    if verbose >= 1:
        return logging.DEBUG
    return logging.INFO


def configure_logging(
    *,
    log_level: int = logging.DEBUG,
    console_level: int = logging.INFO,
    enable_console: Optional[bool] = None,
    log_dir: Optional[Path] = None,
    run_tag: Optional[str] = None,
) -> Path:
    """Настроить корневое логирование приложения.

    Повторный вызов заменяет хендлеры, а не добавляет новые.

    Args:
        log_level: Уровень логов для файла.
        console_level: Уровень логов для консоли.
        enable_console: Явно включить/выключить консольный хендлер. Если
            `None`, включается при доступном `sys.stderr`.
        log_dir: Каталог логов. Если `None`, используется каталог состояния
            пользователя через `get_logs_dir()`.
        run_tag: Тег прогона для записей файла (см. `make_run_tag`).

    Returns:
        Path: Путь к текущему файлу логов.
    """
    root = logging.getLogger()
    root.setLevel(min(log_level, console_level))
    for handler in list(root.handlers):
        root.removeHandler(handler)
        handler.close()

    logging.captureWarnings(True)
    for name in _QUIET_LOGGERS:
        logging.getLogger(name).setLevel(logging.WARNING)

    log_dir = get_logs_dir(APP_NAME) if log_dir is None else Path(log_dir)
    log_dir.mkdir(parents=True, exist_ok=True)
    log_file = log_dir / f'logs_to_{date.today().isoformat()}.log'

    file_handler = RotatingFileHandler(
        log_file,
        maxBytes=LOG_ROTATE_MAX_BYTES,
        backupCount=LOG_ROTATE_BACKUP_COUNT,
        encoding='utf-8',
    )
    file_handler.setLevel(log_level)
    file_handler.addFilter(RunTagFilter(run_tag))
    file_handler.setFormatter(logging.Formatter(LOG_FORMAT, datefmt=DT_FORMAT))
    root.addHandler(file_handler)

    if enable_console is None:
        enable_console = sys.stderr is not None and hasattr(
            sys.stderr, 'write'
        )
    if enable_console:
        console_handler = ColoredConsoleHandler(stream=sys.stderr)
        console_handler.setLevel(console_level)
        console_handler.setFormatter(logging.Formatter(CONSOLE_FORMAT))
        root.addHandler(console_handler)

    return log_file
