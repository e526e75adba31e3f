"""2D демонстрация: приор на окружности, специализация на квадрат.

Проверяет, что предсказанные запросы переносят знание об окружности на
квадрат: притянутые точки должны лечь на границу квадрата, а контур
нулевого уровня — совпасть с ней.
"""

from __future__ import annotations

import dataclasses
import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from app.core.seeding import make_rng
from app.geometry.index import build_index
from app.geometry.regions import prepare_regions
from app.geometry.sampling import sample_queries
from app.geometry.shapes import (
    distance_to_square,
    sample_circle,
    sample_square,
)
from app.logging import logged
from app.models.config import (
    DemoConfig,
    NetConfig,
    SpecializeConfig,
    TrainConfig,
)
from app.models.mesh import ContourSet
from app.service.mesher import default_bounds, eval_sdf_grid, marching_squares
from app.service.metrics import chamfer, sample_contour
from app.service.prior import PriorCheckpoint, train_local_prior
from app.service.specialize import (
    GlobalSdf,
    derive_condition,
    pulled_query_points,
    query_transport,
    specialize,
)
from app.validate.exceptions import EmptyCloudError

logger = logging.getLogger(__name__)

ABLATION_SWEEP = ('full', 'no_shift', 'fixed_cond')
CONTOUR_SAMPLES = 2000

# Демонстрация идёт на CPU за минуты: узкие сети, мелкие пулы запросов и
# масштаб сэмплирования std = d_k при k = 10.
DEMO_NET_DEFAULTS = {
    'dim': 2,
    'cond_dim': 32,
    'hidden': 64,
    'implicit_depth': 4,
    'skip_layer': 2,
    'query_depth': 4,
    'encoder_widths': (32, 64),
}
DEMO_TRAIN_DEFAULTS = {
    'grid': 2,
    'epochs': 300,
    'queries_per_region': 200,
    'per_point': 20,
    'k_sigma': 10,
    'sigma_mode': 'stddev',
    'lr': 1e-3,
}
DEMO_SPEC_DEFAULTS = {
    'steps': 1500,
    'queries_per_step': 400,
    'per_point': 20,
    'k_sigma': 10,
    'sigma_mode': 'stddev',
    'lr': 1e-3,
}


def demo_configs(
    seed: int = 0,
) -> tuple[NetConfig, TrainConfig, SpecializeConfig]:
    """Конфиги демонстрации по умолчанию."""
    return (
        NetConfig(**DEMO_NET_DEFAULTS),
        TrainConfig(seed=seed, **DEMO_TRAIN_DEFAULTS),
        SpecializeConfig(seed=seed, **DEMO_SPEC_DEFAULTS),
    )


@dataclass(eq=False)
class DemoResult:
    """Артефакты демонстрации и итог проверки притянутых точек."""

    prior: PriorCheckpoint
    sdf: GlobalSdf
    queries: np.ndarray
    transported: np.ndarray
    sdf_values: np.ndarray
    pulled: np.ndarray
    within_fraction: float
    passed: bool
    frozen: bool
    contour: ContourSet
    contour_chamfer: float
    ablation: dict[str, float] = field(default_factory=dict)

    def summary(self) -> str:
        return (
            f'within={self.within_fraction:.3f}, passed={self.passed}, '
            f'frozen={self.frozen}, chamfer={self.contour_chamfer:.4g}'
        )


def contour_chamfer(
    contour: ContourSet,
    half: float,
    seed: int,
    samples: int = CONTOUR_SAMPLES,
) -> float:
    """Chamfer-L1 между контуром и истинной границей квадрата."""
    if contour.is_empty:
        logger.warning('Empty contour; chamfer is infinite')
        return float('inf')
    points, _ = sample_contour(contour, samples, make_rng(seed, 'demo', 3))
    truth = sample_square(samples, half, make_rng(seed, 'demo', 4))
    return chamfer(points, truth.points, order=1)


def _contour(g: GlobalSdf, square, cfg: DemoConfig) -> ContourSet:
    grid = eval_sdf_grid(
        g,
        default_bounds(square),
        cfg.contour_res,
        chunk_size=g.chunk_size,
    )
    return marching_squares(grid, 0.0, sdf=g)


def _table_queries(square, spec_cfg: SpecializeConfig, cfg: DemoConfig):
    pool = sample_queries(
        square,
        build_index(square),
        spec_cfg.per_point,
        spec_cfg.k_sigma,
        make_rng(cfg.seed, 'demo', 2),
        spec_cfg.sigma_mode,
    )
    rng = make_rng(cfg.seed, 'demo', 5)
    take = min(cfg.table_queries, len(pool))
    pick = np.sort(rng.choice(len(pool), size=take, replace=False))
    return pool.queries[pick]


@logged(level=logging.INFO)
def run_demo2d(
    cfg: DemoConfig,
    train_cfg: TrainConfig,
    spec_cfg: SpecializeConfig,
    net_cfg: Optional[NetConfig] = None,
    *,
    ablation: bool = False,
) -> DemoResult:
    """Обучить приор на окружности и специализировать его на квадрат.

    Args:
        cfg: Параметры форм, таблицы и критерия.
        train_cfg: Обучение приора.
        spec_cfg: Специализация (режим из конфига).
        net_cfg: Архитектура 2D сетей.
        ablation: Дополнительно прогнать режимы full, no_shift и
            fixed_cond с тем же бюджетом.

    Returns:
        DemoResult: Таблица переноса, контур и итог критерия.
            Критерий пройден, если доля подтянутых точек не ниже
            `pass_fraction` и Chamfer-L1 контура меньше
            `max_contour_chamfer`.
    """
    net_cfg = net_cfg or NetConfig(dim=2)
    circle = sample_circle(
        cfg.circle_points, cfg.circle_radius, make_rng(cfg.seed, 'demo', 0)
    )
    square = sample_square(
        cfg.square_points, cfg.square_half, make_rng(cfg.seed, 'demo', 1)
    )

    regions = prepare_regions(circle, train_cfg.grid, train_cfg.normalize)
    if not regions:
        raise EmptyCloudError('Окружность не дала ни одного региона.')
    prior = train_local_prior(regions, train_cfg, net_cfg)
    before = prior.implicit.params.checksum()

    condition = None
    if spec_cfg.mode == 'fixed_cond':
        condition = derive_condition(prior, square)
    g = specialize(square, prior, spec_cfg, condition)
    frozen = spec_cfg.tunes_implicit or (
        g.implicit.params.checksum() == before
    )
    if not frozen:
        logger.error('Frozen implicit network changed during specialize')

    q_g = _table_queries(square, spec_cfg, cfg)
    q_l, s = query_transport(g, q_g)
    pulled = pulled_query_points(g, q_g)
    within = float(
        np.mean(distance_to_square(pulled, cfg.square_half) < cfg.tolerance)
    )
    contour = _contour(g, square, cfg)
    chamfer_l1 = contour_chamfer(contour, cfg.square_half, cfg.seed)
    result = DemoResult(
        prior=prior,
        sdf=g,
        queries=q_g,
        transported=q_l,
        sdf_values=s,
        pulled=pulled,
        within_fraction=within,
        passed=(
            within >= cfg.pass_fraction
            and chamfer_l1 < cfg.max_contour_chamfer
        ),
        frozen=frozen,
        contour=contour,
        contour_chamfer=chamfer_l1,
    )
    logger.info('Demo: %s', result.summary())

    if ablation:
        result.ablation = run_ablation(prior, square, spec_cfg, cfg, result)
    return result


def run_ablation(
    prior: PriorCheckpoint,
    square,
    spec_cfg: SpecializeConfig,
    cfg: DemoConfig,
    baseline: Optional[DemoResult] = None,
) -> dict[str, float]:
    """Chamfer-L1 контура для режимов full, no_shift, fixed_cond."""
    scores = {}
    for mode in ABLATION_SWEEP:
        if baseline is not None and mode == spec_cfg.mode:
            scores[mode] = baseline.contour_chamfer
            continue
        mode_cfg = dataclasses.replace(spec_cfg, mode=mode)
        condition = None
        if mode == 'fixed_cond':
            condition = derive_condition(prior, square)
        g = specialize(square, prior, mode_cfg, condition)
        scores[mode] = contour_chamfer(
            _contour(g, square, cfg), cfg.square_half, cfg.seed
        )
        logger.info('Ablation %s: contour chamfer=%.6g', mode, scores[mode])
    return scores
