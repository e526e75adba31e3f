"""CLI-команда 2D демонстрации переноса запросов."""

from __future__ import annotations

import argparse
import logging
from pathlib import Path

from app.cli.common import (
    NET_ARGS,
    OPTIMIZER_ARGS,
    SEED_ARGS,
    ArgSpec,
    CommandRun,
    add_args,
    parse_mode,
    print_item,
    print_table,
)
from app.core.constants import EXIT_NUMERICAL, EXIT_OK
from app.io.mesh import write_contour
from app.io.tables import (
    write_ablation_table,
    write_loss_history,
    write_query_table,
)
from app.models.config import (
    DemoConfig,
    NetConfig,
    SpecializeConfig,
    TrainConfig,
)
from app.service.demo import (
    DEMO_NET_DEFAULTS,
    DEMO_SPEC_DEFAULTS,
    DEMO_TRAIN_DEFAULTS,
    run_demo2d,
)
from app.validate.exceptions import NumericalError

logger = logging.getLogger(__name__)

DEMO_ARGS = [
    ArgSpec(
        ('-o', '--out-dir'),
        {'required': True, 'help': 'Каталог для артефактов демонстрации'},
    ),
    ArgSpec(
        ('--epochs',),
        {'type': int, 'default': None, 'help': 'Эпох обучения приора'},
    ),
    ArgSpec(
        ('--grid',),
        {'type': int, 'default': None, 'help': 'Ячеек сетки по оси (2)'},
    ),
    ArgSpec(
        ('--queries-per-region',),
        {'type': int, 'default': None, 'help': 'Запросов региона на шаг'},
    ),
    ArgSpec(
        ('--steps',),
        {'type': int, 'default': None, 'help': 'Шагов специализации'},
    ),
    ArgSpec(
        ('--queries-per-step',),
        {'type': int, 'default': None, 'help': 'Запросов на шаг'},
    ),
    ArgSpec(
        ('--mode',),
        {
            'type': parse_mode,
            'default': None,
            'help': 'Режим специализации (full)',
        },
    ),
    ArgSpec(
        ('--table-queries',),
        {'type': int, 'default': None, 'help': 'Строк таблицы q_g (500)'},
    ),
    ArgSpec(
        ('--contour-res',),
        {'type': int, 'default': None, 'help': 'Узлов решётки по оси'},
    ),
    ArgSpec(
        ('--ablation',),
        {
            'action': 'store_true',
            'help': 'Сравнить full, no-shift и fixed-cond по chamfer контура',
        },
    ),
    ArgSpec(
        ('--plot',),
        {'action': 'store_true', 'help': 'Сохранить графики (PNG)'},
    ),
]


def register_demo_commands(subparsers: argparse._SubParsersAction) -> None:
    """Зарегистрировать команду `demo2d`."""
    pars = subparsers.add_parser(
        'demo2d',
        help='Приор на окружности, специализация на квадрат.',
    )
    add_args(pars, DEMO_ARGS)
    add_args(pars, OPTIMIZER_ARGS)
    add_args(pars, NET_ARGS)
    add_args(pars, SEED_ARGS)
    pars.set_defaults(func=cmd_demo2d)


def cmd_demo2d(args: argparse.Namespace) -> int:
    """Запустить демонстрацию и записать таблицы и контур.

    Артефакты в `--out-dir`: `contour.obj`, `queries.csv`
    (`qg_x,qg_y,ql_x,ql_y,s`), `prior_loss.csv`, `specialize_loss.csv`,
    при `--ablation` — `ablation.csv`, и `demo.manifest.json`.

    Returns:
        int: 0, если критерий притянутых точек выполнен, иначе 3.

    Raises:
        NumericalError: Если обучение разошлось.
    """
    run = CommandRun.start('demo2d', args)
    demo_cfg = run.resolve('demo', DemoConfig)
    train_cfg = run.resolve('train', TrainConfig, defaults=DEMO_TRAIN_DEFAULTS)
    spec_cfg = run.resolve(
        'specialize', SpecializeConfig, defaults=DEMO_SPEC_DEFAULTS
    )
    net_cfg = run.resolve(
        'net', NetConfig, {'dim': 2}, defaults=DEMO_NET_DEFAULTS
    )
    run.check_file_keys()

    try:
        result = run_demo2d(
            demo_cfg, train_cfg, spec_cfg, net_cfg, ablation=args.ablation
        )
    except NumericalError:
        logger.error('Demo diverged; see context above')
        raise

    out_dir = Path(args.out_dir)
    run.output(write_contour(result.contour, out_dir / 'contour.obj'))
    run.output(
        write_query_table(
            result.queries,
            result.transported,
            result.sdf_values,
            out_dir / 'queries.csv',
        )
    )
    run.output(
        write_loss_history(
            result.prior.loss_history, out_dir / 'prior_loss.csv'
        )
    )
    run.output(
        write_loss_history(
            result.sdf.loss_history, out_dir / 'specialize_loss.csv'
        )
    )
    if result.ablation:
        run.output(
            write_ablation_table(result.ablation, out_dir / 'ablation.csv')
        )
    if args.plot:
        _write_plots(result, out_dir, run)

    run.notes.update(
        {
            'within_fraction': result.within_fraction,
            'passed': result.passed,
            'frozen': result.frozen,
            'contour_chamfer': result.contour_chamfer,
        }
    )
    run.write_manifest(out_dir / 'demo', demo_cfg.seed)

    print_item(
        {
            'within_fraction': result.within_fraction,
            'tolerance': demo_cfg.tolerance,
            'passed': result.passed,
            'frozen_prior': result.frozen,
            'contour_chamfer_l1': result.contour_chamfer,
            'max_contour_chamfer': demo_cfg.max_contour_chamfer,
        }
    )
    if result.ablation:
        print_table(
            list(result.ablation.items()), ('Режим', 'Chamfer-L1 контура')
        )
    return EXIT_OK if result.passed and result.frozen else EXIT_NUMERICAL


def _write_plots(result, out_dir: Path, run: CommandRun) -> None:
    from app.service.plots import plot_loss_curve, plot_query_transport

    run.output(
        plot_loss_curve(
            result.prior.loss_history,
            out_dir / 'prior_loss.png',
            title='Обучение приора (окружность)',
        )
    )
    run.output(
        plot_loss_curve(
            result.sdf.loss_history,
            out_dir / 'specialize_loss.png',
            title='Специализация (квадрат)',
        )
    )
    run.output(
        plot_query_transport(
            result.queries,
            result.transported,
            out_dir / 'queries.png',
            contour=result.contour,
        )
    )
