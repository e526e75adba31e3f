"""Точка входа CLI."""

from __future__ import annotations

import argparse
import logging
import sys
from typing import Optional, Sequence

from app.cli.demo2d import register_demo_commands
from app.cli.evaluate import register_evaluate_commands
from app.cli.grad_check import register_grad_check_commands
from app.cli.reconstruct import register_reconstruct_commands
from app.cli.train_prior import register_train_prior_commands
from app.core.bootstrap import init_app
from app.core.constants import APP_VERSION, EXIT_OK, EXIT_USAGE
from app.validate.exceptions import PipelineError

logger = logging.getLogger(__name__)


class PipelineArgumentParser(argparse.ArgumentParser):
    """Парсер, завершающий процесс с кодом 1 при ошибке использования."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f'{self.prog}: ошибка: {message}\n')


def build_parser() -> argparse.ArgumentParser:
    """Собрать argparse-парсер для CLI приложения.

    Создаёт корневой парсер `pcp` с общими опциями логирования и
    конфигурации и регистрирует подкоманды пайплайна: обучение приора,
    реконструкцию, оценку, 2D демонстрацию и проверку градиентов.

    Returns:
        argparse.ArgumentParser: Настроенный парсер верхнего уровня.
    """
    parser = PipelineArgumentParser(
        prog='pcp',
        description=(
            'Реконструкция поверхностей по облакам точек с '
            'предсказательным контекстным приором.'
        ),
    )
    parser.add_argument(
        '--version', action='version', version=f'%(prog)s {APP_VERSION}'
    )
    parser.add_argument(
        '--config',
        default=None,
        help='Файл конфигурации key=value или манифест прогона (.json)',
    )
    parser.add_argument(
        '--log-dir',
        dest='log_dir',
        default=None,
        help='Каталог логов (по умолчанию — каталог состояния)',
    )
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument(
        '-v',
        '--verbose',
        action='count',
        default=0,
        help='Подробный вывод в консоль',
    )
    verbosity.add_argument(
        '-q',
        '--quiet',
        action='store_true',
        help='Только ошибки в консоли',
    )

    subparsers = parser.add_subparsers(
        dest='command',
        required=True,
        parser_class=PipelineArgumentParser,
    )

    register_train_prior_commands(subparsers)
    register_reconstruct_commands(subparsers)
    register_evaluate_commands(subparsers)
    register_demo_commands(subparsers)
    register_grad_check_commands(subparsers)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Точка входа CLI.

    Настраивает логирование, парсит аргументы и выполняет обработчик
    команды (`args.func`). Ошибка пайплайна пишется в лог с именем
    команды и превращается в код завершения: 1 — использование,
    2 — данные, 3 — численный сбой.

    Returns:
        int: Код завершения.
    """
    parser = build_parser()
    args = parser.parse_args(argv)
    init_app(
        enable_console_logs=True,
        log_dir=args.log_dir,
        verbose=args.verbose,
        quiet=args.quiet,
        command=args.command,
    )

    try:
        code = args.func(args)
    except PipelineError as e:
        logger.error(
            'CLI command failed: command=%s, error=%s',
            args.command,
            e,
        )
        print(f'Ошибка: {e}', file=sys.stderr)
        return e.exit_code
    return EXIT_OK if code is None else int(code)


def run() -> None:
    """Запуск из консоли: код возврата `main` становится кодом процесса."""
    raise SystemExit(main())


if __name__ == '__main__':
    run()
