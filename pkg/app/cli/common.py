"""Общие утилиты CLI."""

from __future__ import annotations

import argparse
import logging
import time
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Any, Mapping, Optional, Sequence

from prettytable import PrettyTable

from app.core.constants import APP_VERSION, LOSS_MODES, SIGMA_MODES
from app.core.settings import (
    load_config_file,
    resolve_config,
    warn_unknown_keys,
)
from app.io.formats import read_lines
from app.io.manifest import manifest_path, write_manifest
from app.io.pointcloud import read_pointcloud
from app.models.cloud import PointCloud
from app.models.config import config_to_dict
from app.models.report import RunManifest
from app.nets.query import normalize_mode
from app.validate.exceptions import DataError, UsageError

logger = logging.getLogger(__name__)

CLOUD_SUFFIXES = ('.xyz', '.ply', '.txt', '.pts')


@dataclass(frozen=True)
class ArgSpec:
    args: tuple[str, ...]
    kwargs: Mapping[str, Any]


def add_args(parser: argparse.ArgumentParser, specs: Sequence[ArgSpec]):
    for spec in specs:
        parser.add_argument(*spec.args, **dict(spec.kwargs))


def parse_mode(value: str) -> str:
    """`no-shift` -> `no_shift` для argparse."""
    try:
        return normalize_mode(value)
    except UsageError as e:
        raise argparse.ArgumentTypeError(str(e))


def parse_int_tuple(value: str) -> tuple[int, ...]:
    """`64,128` -> (64, 128)."""
    try:
        return tuple(int(v) for v in value.split(',') if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(
            f'Ожидается список целых через запятую: {value!r}'
        )


def flag(*names: str, help: str) -> ArgSpec:
    """Булев флаг, который не перекрывает файл конфигурации, пока не задан."""
    return ArgSpec(
        names,
        {
            'action': 'store_const',
            'const': True,
            'default': None,
            'help': help,
        },
    )


# Флаги со значением None по умолчанию: None значит «взять из файла
# конфигурации или значение по умолчанию конфига».
SEED_ARGS = [
    ArgSpec(('--seed',), {'type': int, 'default': None, 'help': 'Seed'}),
]

OPTIMIZER_ARGS = [
    ArgSpec(('--lr',), {'type': float, 'default': None, 'help': 'Шаг Adam'}),
    ArgSpec(
        ('--per-point',),
        {
            'type': int,
            'default': None,
            'help': 'Запросов на точку облака в пуле (40)',
        },
    ),
    ArgSpec(
        ('--k-sigma',),
        {
            'type': int,
            'default': None,
            'help': 'k-й сосед для масштаба сэмплирования (50)',
        },
    ),
    ArgSpec(
        ('--sigma-mode',),
        {
            'choices': SIGMA_MODES,
            'default': None,
            'help': 'variance: std = sqrt(d); stddev: std = d',
        },
    ),
    ArgSpec(
        ('--loss-mode',),
        {
            'choices': LOSS_MODES,
            'default': None,
            'help': 'squared: ‖·‖²; plain: ‖·‖',
        },
    ),
    ArgSpec(
        ('--log-every',),
        {'type': int, 'default': None, 'help': 'Период логов лосса'},
    ),
    flag(
        '--strict-grads',
        help='Ошибка вместо предупреждения, если у параметра нет градиента',
    ),
]

NET_ARGS = [
    ArgSpec(
        ('--cond-dim',),
        {'type': int, 'default': None, 'help': 'Размер условия C (512)'},
    ),
    ArgSpec(
        ('--hidden',),
        {'type': int, 'default': None, 'help': 'Ширина скрытых слоёв'},
    ),
    ArgSpec(
        ('--implicit-depth',),
        {'type': int, 'default': None, 'help': 'Слоёв неявной сети'},
    ),
    ArgSpec(
        ('--skip-layer',),
        {'type': int, 'default': None, 'help': 'Слой повторной склейки'},
    ),
    ArgSpec(
        ('--query-depth',),
        {'type': int, 'default': None, 'help': 'Слоёв сети запросов'},
    ),
    ArgSpec(
        ('--encoder-widths',),
        {
            'type': parse_int_tuple,
            'default': None,
            'help': 'Ширины энкодера через запятую (64,128)',
        },
    ),
]


@dataclass
class CommandRun:
    """Контекст выполнения команды для манифеста."""

    command: str
    args: argparse.Namespace
    file_values: dict[str, str] = field(default_factory=dict)
    configs: dict[str, Any] = field(default_factory=dict)
    inputs: list[str] = field(default_factory=list)
    outputs: list[str] = field(default_factory=list)
    notes: dict[str, Any] = field(default_factory=dict)
    started_at: str = field(
        default_factory=lambda: datetime.now().isoformat(timespec='seconds')
    )
    _start: float = field(default_factory=time.perf_counter, repr=False)

    @classmethod
    def start(cls, command: str, args: argparse.Namespace) -> CommandRun:
        file_values = load_config_file(getattr(args, 'config', None))
        return cls(command, args, file_values)

    def resolve(
        self,
        section: str,
        cls: type,
        overrides: Optional[Mapping[str, Any]] = None,
        defaults: Optional[Mapping[str, Any]] = None,
    ):
        """Собрать конфиг: флаги CLI > файл > `defaults` > поля конфига.

        `overrides` действуют как флаги CLI.
        """
        cli = dict(vars(self.args))
        cli.update(overrides or {})
        file_values = {**(defaults or {}), **self.file_values}
        cfg = resolve_config(cls, cli=cli, file_values=file_values)
        self.configs[section] = cfg
        return cfg

    def check_file_keys(self) -> None:
        warn_unknown_keys(
            self.file_values, *(type(c) for c in self.configs.values())
        )

    def output(self, path: Path) -> Path:
        self.outputs.append(str(path))
        return path

    def manifest(self, seed: int, status: str = 'ok') -> RunManifest:
        return RunManifest(
            command=self.command,
            config={k: config_to_dict(v) for k, v in self.configs.items()},
            seed=seed,
            inputs=list(self.inputs),
            outputs=list(self.outputs),
            started_at=self.started_at,
            duration_s=round(time.perf_counter() - self._start, 3),
            version=APP_VERSION,
            status=status,
            notes=dict(self.notes),
        )

    def write_manifest(self, artifact: Path, seed: int) -> Path:
        """Записать манифест рядом с основным артефактом."""
        return write_manifest(self.manifest(seed), manifest_path(artifact))


def collect_cloud_paths(inputs: Sequence[str]) -> list[Path]:
    """Файлы облаков: явные пути и все облака из каталогов.

    Raises:
        DataError: Если путь не существует.
    """
    paths: list[Path] = []
    for item in inputs:
        p = Path(item)
        if p.is_dir():
            paths.extend(
                sorted(
                    f
                    for f in p.iterdir()
                    if f.is_file() and f.suffix.lower() in CLOUD_SUFFIXES
                )
            )
        elif p.is_file():
            paths.append(p)
        else:
            raise DataError(f'Путь не найден: {p}')
    return paths


def read_clouds(paths: Sequence[Path]) -> list[tuple[Path, PointCloud]]:
    """Прочитать все облака; нечитаемые пропускаются с ошибкой в логе.

    Raises:
        DataError: Если не прочитано ни одного облака или размерности
            облаков различаются.
    """
    clouds = []
    for path in paths:
        try:
            clouds.append((path, read_pointcloud(path)))
        except DataError as e:
            logger.error('Skipping unreadable cloud %s: %s', path, e)
    if not clouds:
        raise DataError('Не найдено ни одного читаемого облака точек.')
    dims = {cloud.dim for _, cloud in clouds}
    if len(dims) > 1:
        raise DataError(f'Облака разной размерности: {sorted(dims)}')
    return clouds


def read_condition(path: Optional[str]) -> Optional[Any]:
    """Вектор условия из текстового файла (числа через пробелы)."""
    if path is None:
        return None
    values = []
    for i, raw in enumerate(read_lines(Path(path)), start=1):
        for token in raw.split('#', 1)[0].split():
            try:
                values.append(float(token))
            except ValueError:
                raise UsageError(
                    f'{path}: строка {i}: неверное число {token!r}'
                )
    if not values:
        raise UsageError(f'{path}: пустой вектор условия')
    return values


def print_table(
    rows: Sequence[Sequence[Any]],
    headers: Sequence[str],
) -> None:
    """Вывести строки таблицей (PrettyTable)."""
    if not rows:
        print('(пусто)')
        return
    t = PrettyTable(list(headers))
    t.align = 'l'
    for row in rows:
        t.add_row([_cell(v) for v in row])
    print(t)


def print_item(data: Mapping[str, Any]) -> None:
    """Вывести словарь парами `ключ | значение`."""
    print_table([(k, v) for k, v in data.items()], ('Параметр', 'Значение'))


def _cell(value: Any) -> Any:
    if isinstance(value, float):
        return f'{value:.6g}'
    if value is None:
        return '—'
    return value
