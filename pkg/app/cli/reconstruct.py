"""CLI-команда реконструкции поверхности по облаку."""

from __future__ import annotations

import argparse
import logging
from pathlib import Path
from typing import Optional

import numpy as np

from app.cli.common import (
    NET_ARGS,
    OPTIMIZER_ARGS,
    SEED_ARGS,
    ArgSpec,
    CommandRun,
    add_args,
    flag,
    parse_mode,
    print_item,
    read_condition,
)
from app.core.constants import FINE_MC_RES
from app.core.paths import sibling_path
from app.io.checkpoint import load_prior, save_global_sdf
from app.io.mesh import write_contour, write_mesh
from app.io.pointcloud import read_pointcloud, write_pointcloud
from app.io.tables import write_loss_history
from app.models.cloud import PointCloud
from app.models.config import (
    ABLATION_MODES,
    MeshConfig,
    MetricConfig,
    NetConfig,
    SpecializeConfig,
)
from app.models.mesh import ContourSet, TriangleMesh
from app.service.mesher import (
    default_bounds,
    eval_sdf_grid,
    extract_level_set,
)
from app.service.metrics import sample_surface
from app.service.prior import PriorCheckpoint
from app.service.specialize import derive_condition, specialize
from app.validate.exceptions import DataError, UsageError

logger = logging.getLogger(__name__)

MODE_CHOICES = tuple(m.replace('_', '-') for m in ABLATION_MODES)

RECONSTRUCT_ARGS = [
    ArgSpec(('input',), {'help': 'Облако точек (.xyz/.ply)'}),
    ArgSpec(
        ('-o', '--out'),
        {'required': True, 'help': 'Путь к мешу (.obj/.ply) или контуру'},
    ),
    ArgSpec(
        ('--prior',),
        {'default': None, 'help': 'Чекпоинт приора (не нужен в no-prior)'},
    ),
    ArgSpec(
        ('--mode',),
        {
            'type': parse_mode,
            'default': None,
            'metavar': '{' + ','.join(MODE_CHOICES) + '}',
            'help': 'Режим специализации (full)',
        },
    ),
    ArgSpec(
        ('--steps',),
        {'type': int, 'default': None, 'help': 'Шагов Adam (1000)'},
    ),
    ArgSpec(
        ('--queries-per-step',),
        {'type': int, 'default': None, 'help': 'Запросов на шаг (2000)'},
    ),
    ArgSpec(
        ('--mc-res',),
        {
            'dest': 'resolution',
            'type': int,
            'default': None,
            'help': 'Узлов решётки по оси (128)',
        },
    ),
    flag('--fine', help=f'Решётка {FINE_MC_RES} узлов по оси'),
    ArgSpec(
        ('--padding',),
        {
            'type': float,
            'default': None,
            'help': 'Запас решётки от bounding box облака (0.1)',
        },
    ),
    ArgSpec(
        ('--chunk-size',),
        {'type': int, 'default': None, 'help': 'Точек на порцию SDF'},
    ),
    ArgSpec(
        ('--format',),
        {
            'choices': ('obj', 'ply'),
            'default': None,
            'help': 'Формат меша (по расширению)',
        },
    ),
    ArgSpec(
        ('--pre-scale',),
        {
            'action': 'store_true',
            'help': 'Перевести облако в единичный куб и вернуть меш обратно',
        },
    ),
    ArgSpec(
        ('--condition',),
        {
            'default': None,
            'help': 'Файл с вектором условия для fixed-cond',
        },
    ),
    ArgSpec(
        ('--save-sdf',),
        {'default': None, 'help': 'Сохранить глобальную SDF (чекпоинт)'},
    ),
    ArgSpec(
        ('--samples-out',),
        {
            'default': None,
            'help': 'Записать сэмплы поверхности для метрик (.ply/.xyz)',
        },
    ),
    ArgSpec(
        ('--samples',),
        {
            'dest': 'sample_count',
            'type': int,
            'default': None,
            'help': 'Сэмплов для --samples-out (10000)',
        },
    ),
    ArgSpec(
        ('--plot',),
        {'action': 'store_true', 'help': 'Сохранить график лосса (PNG)'},
    ),
]


def register_reconstruct_commands(
    subparsers: argparse._SubParsersAction,
) -> None:
    """Зарегистрировать команду `reconstruct`."""
    pars = subparsers.add_parser(
        'reconstruct',
        help='Специализировать приор на облако и извлечь поверхность.',
    )
    add_args(pars, RECONSTRUCT_ARGS)
    add_args(pars, OPTIMIZER_ARGS)
    add_args(pars, NET_ARGS)
    add_args(pars, SEED_ARGS)
    pars.set_defaults(func=cmd_reconstruct)


def pre_scale(cloud: PointCloud) -> tuple[PointCloud, np.ndarray, float]:
    """Перевести облако в единичный бокс с центром в нуле.

    Returns:
        tuple: Масштабированное облако, центр и масштаб (длина наибольшего
            ребра bounding box).

    Raises:
        DataError: Если все точки совпадают.
    """
    lo, hi = cloud.bbox()
    scale = float(np.max(hi - lo))
    if scale <= 0:
        raise DataError('Нельзя масштабировать облако из одной точки.')
    center = 0.5 * (lo + hi)
    scaled = PointCloud((cloud.points - center) / scale, cloud.normals)
    return scaled, center, scale


def _restore(surface, center: np.ndarray, scale: float):
    if isinstance(surface, TriangleMesh):
        return surface.transformed(scale, center)
    return ContourSet(
        surface.vertices * scale + center,
        surface.polylines,
        surface.closed,
    )


def _condition(
    args: argparse.Namespace,
    mode: str,
    prior: Optional[PriorCheckpoint],
    cloud: PointCloud,
    run: CommandRun,
):
    if mode != 'fixed_cond':
        if args.condition is not None:
            logger.warning('--condition ignored in mode %s', mode)
        return None
    if args.condition is not None:
        run.inputs.append(args.condition)
        return np.asarray(read_condition(args.condition))
    # f_l самого облака через энкодер приора.
    run.notes['condition'] = 'encoder'
    return derive_condition(prior, cloud)


def cmd_reconstruct(args: argparse.Namespace) -> int:
    """Специализировать SDF и записать меш (3D) или контур (2D).

    Рядом с результатом пишутся `<имя>.loss.csv` и манифест.

    Returns:
        int: Код завершения 0.

    Raises:
        UsageError: Нет приора для режима, кроме no-prior.
        DataError: Размерность приора не совпадает с облаком.
    """
    run = CommandRun.start('reconstruct', args)
    cloud = read_pointcloud(args.input)
    run.inputs.append(str(args.input))

    spec_cfg = run.resolve('specialize', SpecializeConfig)
    overrides = {'resolution': FINE_MC_RES} if args.fine else {}
    mesh_cfg = run.resolve('mesh', MeshConfig, overrides)
    mode = spec_cfg.mode

    prior = None
    if args.prior is not None:
        prior = load_prior(args.prior)
        run.inputs.append(str(args.prior))
        if prior.dim != cloud.dim:
            raise DataError(
                f'Приор обучен для D={prior.dim}, облако имеет D={cloud.dim}.'
            )
        net_cfg = prior.net_config
        if mode == 'no_prior':
            logger.warning('Mode no_prior: prior weights are not used')
    elif mode != 'no_prior':
        raise UsageError(f'Режим {mode} требует --prior.')
    else:
        net_cfg = run.resolve('net', NetConfig, {'dim': cloud.dim})
    metric_cfg = run.resolve('samples', MetricConfig)
    run.check_file_keys()

    center, scale = np.zeros(cloud.dim), 1.0
    if args.pre_scale:
        cloud, center, scale = pre_scale(cloud)
        run.notes['pre_scale'] = {
            'center': [float(c) for c in center],
            'scale': scale,
        }

    condition = _condition(args, mode, prior, cloud, run)
    g = specialize(cloud, prior, spec_cfg, condition, net_cfg)
    g.chunk_size = mesh_cfg.chunk_size

    grid = eval_sdf_grid(
        g,
        default_bounds(cloud, mesh_cfg.padding),
        mesh_cfg.resolution,
        chunk_size=mesh_cfg.chunk_size,
    )
    surface = extract_level_set(grid, mesh_cfg.iso, sdf=g)
    if args.pre_scale:
        surface = _restore(surface, center, scale)

    out = Path(args.out)
    if isinstance(surface, TriangleMesh):
        run.output(write_mesh(surface, out, args.format))
    else:
        run.output(write_contour(surface, out))
    run.output(
        write_loss_history(g.loss_history, sibling_path(out, '.loss.csv'))
    )
    if args.save_sdf:
        run.output(save_global_sdf(g, Path(args.save_sdf)))
    if args.samples_out and surface.is_empty:
        logger.warning('Empty surface; --samples-out skipped')
    elif args.samples_out:
        points, normals = sample_surface(
            surface, metric_cfg.sample_count, metric_cfg.seed
        )
        run.output(
            write_pointcloud(
                PointCloud(points, normals), Path(args.samples_out)
            )
        )
    if args.plot:
        from app.service.plots import plot_loss_curve

        run.output(
            plot_loss_curve(
                g.loss_history,
                sibling_path(out, '.loss.png'),
                title=f'Специализация ({mode})',
            )
        )
    run.write_manifest(out, spec_cfg.seed)

    print_item(
        {
            'output': str(out),
            'mode': mode,
            'steps': len(g.loss_history),
            'final_loss': g.loss_history[-1] if g.loss_history else None,
            'surface': surface.summary(),
        }
    )
    return 0
