"""Bootstrap приложения: логирование + runtime окружение.

Единая точка старта для CLI и тестовых прогонов, чтобы логи и кэш
matplotlib всегда настраивались одинаково.
"""

from __future__ import annotations

from pathlib import Path
from typing import Optional

from app.core.config_log import (
    configure_logging,
    console_level_from_flags,
    make_run_tag,
)
from app.core.settings import prepare_runtime_env


def init_app(
    *,
    enable_console_logs: bool,
    log_dir: Optional[Path] = None,
    verbose: int = 0,
    quiet: bool = False,
    command: Optional[str] = None,
) -> Path:
    """Инициализировать приложение: логирование и окружение.

    Args:
        enable_console_logs: Включить вывод логов в консоль.
        log_dir: Каталог логов. Если None — дефолтный (state dir/logs).
        verbose: Уровень подробности консоли (`-v`).
        quiet: Оставить в консоли только ошибки.
        command: Имя команды CLI для тега прогона в файле логов.

    Returns:
        Path: Путь к текущему файлу логов.
    """
    prepare_runtime_env()
    return configure_logging(
        enable_console=enable_console_logs,
        console_level=console_level_from_flags(verbose=verbose, quiet=quiet),
        log_dir=log_dir,
        run_tag=make_run_tag(command),
    )
