"""CLI-команда обучения локального приора."""

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
    collect_cloud_paths,
    print_item,
    read_clouds,
)
from app.core.constants import NORMALIZE_MODES
from app.core.paths import sibling_path
from app.geometry.regions import prepare_regions
from app.io.checkpoint import save_prior
from app.io.tables import write_loss_history
from app.models.config import NetConfig, TrainConfig
from app.service.prior import train_local_prior
from app.validate.exceptions import EmptyCloudError

logger = logging.getLogger(__name__)

TRAIN_ARGS = [
    ArgSpec(
        ('inputs',),
        {
            'nargs': '+',
            'help': 'Файлы облаков (.xyz/.ply) или каталоги с ними',
        },
    ),
    ArgSpec(
        ('-o', '--out'),
        {'required': True, 'help': 'Путь к чекпоинту приора'},
    ),
    ArgSpec(
        ('--grid',),
        {
            'type': int,
            'default': None,
            'help': 'Ячеек сетки по оси bounding box (6)',
        },
    ),
    ArgSpec(
        ('--normalize',),
        {
            'choices': NORMALIZE_MODES,
            'default': None,
            'help': 'Нормализация регионов: центр и масштаб (full)',
        },
    ),
    ArgSpec(
        ('--epochs',),
        {'type': int, 'default': None, 'help': 'Число эпох (100)'},
    ),
    ArgSpec(
        ('--queries-per-region',),
        {
            'type': int,
            'default': None,
            'help': 'Запросов региона на шаг (2000)',
        },
    ),
    ArgSpec(
        ('--plot',),
        {'action': 'store_true', 'help': 'Сохранить график лосса (PNG)'},
    ),
]


def register_train_prior_commands(
    subparsers: argparse._SubParsersAction,
) -> None:
    """Зарегистрировать команду `train-prior`.

    Args:
        subparsers: Коллекция сабпарсеров верхнего уровня.

    Returns:
        None
    """
    pars = subparsers.add_parser(
        'train-prior',
        help='Обучить локальный приор по облакам точек.',
    )
    add_args(pars, TRAIN_ARGS)
    add_args(pars, OPTIMIZER_ARGS)
    add_args(pars, NET_ARGS)
    add_args(pars, SEED_ARGS)
    pars.set_defaults(func=cmd_train_prior)


def cmd_train_prior(args: argparse.Namespace) -> int:
    """Разбить облака на регионы, обучить приор и записать артефакты.

    Пишутся чекпоинт, `<имя>.loss.csv` и `<имя>.manifest.json`.

    Returns:
        int: Код завершения 0.

    Raises:
        DataError: Нет читаемых облаков или ни одного региона.
    """
    run = CommandRun.start('train-prior', args)
    clouds = read_clouds(collect_cloud_paths(args.inputs))
    dim = clouds[0][1].dim

    train_cfg = run.resolve('train', TrainConfig)
    net_cfg = run.resolve('net', NetConfig, {'dim': dim})
    run.check_file_keys()

    regions = []
    for path, cloud in clouds:
        cloud_regions = prepare_regions(
            cloud, train_cfg.grid, train_cfg.normalize
        )
        logger.info('%s: %d regions', path, len(cloud_regions))
        run.inputs.append(str(path))
        regions.extend(cloud_regions)
    if not regions:
        raise EmptyCloudError('Ни одно облако не дало регионов.')
    run.notes['regions'] = len(regions)

    prior = train_local_prior(regions, train_cfg, net_cfg)

    out = Path(args.out)
    run.output(save_prior(prior, out))
    run.output(
        write_loss_history(prior.loss_history, sibling_path(out, '.loss.csv'))
    )
    if args.plot:
        from app.service.plots import plot_loss_curve

        run.output(
            plot_loss_curve(
                prior.loss_history,
                sibling_path(out, '.loss.png'),
                title='Обучение приора',
            )
        )
    run.write_manifest(out, train_cfg.seed)

    print_item(
        {
            'checkpoint': str(out),
            'clouds': len(clouds),
            'regions': len(regions),
            'steps': len(prior.loss_history),
            'final_loss': (
                prior.loss_history[-1] if prior.loss_history else None
            ),
        }
    )
    return 0
