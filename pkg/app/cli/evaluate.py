"""CLI-команда оценки реконструкции."""

from __future__ import annotations

import argparse
import logging
from pathlib import Path

from app.cli.common import (
    SEED_ARGS,
    ArgSpec,
    CommandRun,
    add_args,
    print_table,
)
from app.io.formats import POINTCLOUD_SUFFIXES
from app.io.mesh import read_surface
from app.io.pointcloud import read_pointcloud
from app.io.tables import write_metrics
from app.models.config import MetricConfig
from app.service.metrics import Surface, evaluate, evaluate_scene

logger = logging.getLogger(__name__)

EVALUATE_ARGS = [
    ArgSpec(('mesh',), {'help': 'Реконструкция: меш (.obj/.ply) или контур'}),
    ArgSpec(
        ('--reference',),
        {
            'required': True,
            'help': 'Эталон: облако (.xyz/.ply) или меш (.obj)',
        },
    ),
    ArgSpec(
        ('--reference-kind',),
        {
            'choices': ('auto', 'cloud', 'mesh'),
            'default': 'auto',
            'help': 'Как читать .ply эталона (auto: .ply — облако)',
        },
    ),
    ArgSpec(
        ('--samples',),
        {
            'dest': 'sample_count',
            'type': int,
            'default': None,
            'help': 'Сэмплов на поверхность (10000)',
        },
    ),
    ArgSpec(
        ('--fscore-threshold',),
        {'type': float, 'default': None, 'help': 'Порог μ F-score (0.002)'},
    ),
    ArgSpec(
        ('--density',),
        {
            'dest': 'sample_density',
            'type': float,
            'default': None,
            'help': 'Сэмплов на единицу площади вместо фиксированного числа',
        },
    ),
    ArgSpec(
        ('--protocol',),
        {
            'choices': ('shape', 'scene'),
            'default': 'shape',
            'help': 'scene: порог 0.025 и плотности 20/100/500/1000',
        },
    ),
    ArgSpec(
        ('--out',),
        {'default': None, 'help': 'Файл отчёта (.txt или .csv)'},
    ),
]

REPORT_HEADERS = (
    'Протокол',
    'Плотность',
    'CD-L1',
    'CD-L2',
    'F(μ)',
    'F(2μ)',
    'NC',
    'μ',
)


def register_evaluate_commands(
    subparsers: argparse._SubParsersAction,
) -> None:
    """Зарегистрировать команду `evaluate`."""
    pars = subparsers.add_parser(
        'evaluate',
        help='Сравнить реконструкцию с эталоном.',
    )
    add_args(pars, EVALUATE_ARGS)
    add_args(pars, SEED_ARGS)
    pars.set_defaults(func=cmd_evaluate)


def read_reference(path: Path, kind: str = 'auto') -> Surface:
    """Эталон: облако точек или меш/контур по расширению и `kind`."""
    suffix = path.suffix.lower()
    if kind == 'mesh' or (kind == 'auto' and suffix == '.obj'):
        return read_surface(path)
    if kind == 'cloud' or suffix in POINTCLOUD_SUFFIXES:
        return read_pointcloud(path)
    return read_surface(path)


def cmd_evaluate(args: argparse.Namespace) -> int:
    """Посчитать метрики и вывести их таблицей.

    Returns:
        int: Код завершения 0.
    """
    run = CommandRun.start('evaluate', args)
    cfg = run.resolve('metrics', MetricConfig)
    run.check_file_keys()

    reconstruction = read_surface(Path(args.mesh))
    reference = read_reference(Path(args.reference), args.reference_kind)
    run.inputs.extend([str(args.mesh), str(args.reference)])

    if args.protocol == 'scene':
        reports = evaluate_scene(reconstruction, reference, cfg)
    else:
        reports = [evaluate(reconstruction, reference, cfg)]

    print_table(
        [
            (
                r.protocol,
                r.density,
                r.chamfer_l1,
                r.chamfer_l2,
                r.fscore_mu,
                r.fscore_2mu,
                r.normal_consistency,
                r.threshold,
            )
            for r in reports
        ],
        REPORT_HEADERS,
    )
    if any(r.normal_consistency is None for r in reports):
        print('NC не посчитана: у одной из поверхностей нет нормалей.')

    if args.out:
        out = Path(args.out)
        run.output(write_metrics(reports, out))
        run.notes['protocol'] = args.protocol
        run.write_manifest(out, cfg.seed)
    return 0
