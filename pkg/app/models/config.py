"""Замороженные конфиги фаз пайплайна.

Значения по умолчанию берутся из `app.core.constants`; каждый конфиг
проверяет себя в `__post_init__`, поэтому ошибка конфигурации всплывает
сразу при сборке, а не посреди обучения.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Any, Optional

from app.core.constants import (
    DEFAULT_BETAS,
    DEFAULT_BOUNDS_PADDING,
    DEFAULT_CHUNK_SIZE,
    DEFAULT_COND_DIM,
    DEFAULT_ENCODER_WIDTHS,
    DEFAULT_EPOCHS,
    DEFAULT_EPS,
    DEFAULT_FSCORE_THRESHOLD,
    DEFAULT_GRID,
    DEFAULT_HIDDEN,
    DEFAULT_IMPLICIT_DEPTH,
    DEFAULT_K_SIGMA,
    DEFAULT_LOG_EVERY,
    DEFAULT_LR,
    DEFAULT_MC_RES,
    DEFAULT_PER_POINT,
    DEFAULT_QUERIES_PER_REGION,
    DEFAULT_QUERY_DEPTH,
    DEFAULT_SAMPLE_COUNT,
    DEFAULT_SKIP_LAYER,
    DEFAULT_STEPS,
    DEMO_CIRCLE_POINTS,
    DEMO_CIRCLE_RADIUS,
    DEMO_CONTOUR_RES,
    DEMO_MAX_CONTOUR_CHAMFER,
    DEMO_PASS_FRACTION,
    DEMO_SQUARE_HALF,
    DEMO_SQUARE_POINTS,
    DEMO_TABLE_QUERIES,
    DEMO_TOLERANCE,
    LOSS_MODES,
    NORMALIZE_MODES,
    QUERY_HEAD_INIT_SCALE,
    SIGMA_MODES,
)
from app.validate.exceptions import UsageError
from app.validate.validators import (
    validate_betas,
    validate_choice,
    validate_non_negative_int,
    validate_positive_int,
    validate_positive_value,
)

ABLATION_MODES = (
    'full',
    'no_shift',
    'direct_q',
    'fixed_cond',
    'no_prior',
    'joint_tune',
)


def config_to_dict(cfg: Any) -> dict[str, Any]:
    """Плоский словарь конфига для манифеста и заголовка чекпоинта."""
    out = {}
    for key, value in dataclasses.asdict(cfg).items():
        out[key] = list(value) if isinstance(value, tuple) else value
    return out


def config_from_dict(cls: type, data: dict[str, Any]) -> Any:
    """Обратное преобразование; неизвестные ключи игнорируются."""
    names = {f.name for f in dataclasses.fields(cls)}
    kwargs = {}
    for key, value in data.items():
        if key in names:
            kwargs[key] = tuple(value) if isinstance(value, list) else value
    return cls(**kwargs)


@dataclass(frozen=True)
class NetConfig:
    """Архитектура сетей: размерность, ширины и глубины."""

    dim: int = 3
    cond_dim: int = DEFAULT_COND_DIM
    hidden: int = DEFAULT_HIDDEN
    implicit_depth: int = DEFAULT_IMPLICIT_DEPTH
    skip_layer: int = DEFAULT_SKIP_LAYER
    query_depth: int = DEFAULT_QUERY_DEPTH
    encoder_widths: tuple[int, ...] = DEFAULT_ENCODER_WIDTHS
    query_init_scale: float = QUERY_HEAD_INIT_SCALE

    def __post_init__(self):
        validate_choice(self.dim, (2, 3), 'dim')
        validate_positive_int(self.cond_dim, 'cond_dim')
        validate_positive_int(self.hidden, 'hidden')
        validate_positive_int(self.implicit_depth, 'implicit_depth')
        validate_positive_int(self.query_depth, 'query_depth')
        validate_positive_value(self.query_init_scale, 'query_init_scale')
        validate_non_negative_int(self.skip_layer, 'skip_layer')
        if self.skip_layer >= self.implicit_depth:
            raise UsageError(
                f'skip_layer={self.skip_layer} должен быть меньше '
                f'implicit_depth={self.implicit_depth}.'
            )
        for width in self.encoder_widths:
            validate_positive_int(width, 'encoder_widths')


@dataclass(frozen=True)
class TrainConfig:
    """Обучение локального приора (θ₁ энкодера и θ₂ неявной сети)."""

    epochs: int = DEFAULT_EPOCHS
    grid: int = DEFAULT_GRID
    queries_per_region: int = DEFAULT_QUERIES_PER_REGION
    per_point: int = DEFAULT_PER_POINT
    k_sigma: int = DEFAULT_K_SIGMA
    sigma_mode: str = 'variance'
    lr: float = DEFAULT_LR
    betas: tuple[float, ...] = DEFAULT_BETAS
    eps: float = DEFAULT_EPS
    seed: int = 0
    loss_mode: str = 'squared'
    strict_grads: bool = False
    log_every: int = DEFAULT_LOG_EVERY
    normalize: str = 'full'

    def __post_init__(self):
        validate_non_negative_int(self.epochs, 'epochs')
        validate_positive_int(self.grid, 'grid')
        validate_positive_int(self.queries_per_region, 'queries_per_region')
        validate_positive_int(self.per_point, 'per_point')
        validate_positive_int(self.k_sigma, 'k_sigma')
        validate_choice(self.sigma_mode, SIGMA_MODES, 'sigma_mode')
        validate_positive_value(self.lr, 'lr')
        validate_betas(self.betas)
        validate_positive_value(self.eps, 'eps')
        validate_non_negative_int(self.seed, 'seed')
        validate_choice(self.loss_mode, LOSS_MODES, 'loss_mode')
        validate_positive_int(self.log_every, 'log_every')
        validate_choice(self.normalize, NORMALIZE_MODES, 'normalize')


@dataclass(frozen=True)
class SpecializeConfig:
    """Специализация приора на конкретное облако (θ₃, иногда и θ₂)."""

    steps: int = DEFAULT_STEPS
    queries_per_step: int = DEFAULT_QUERIES_PER_REGION
    per_point: int = DEFAULT_PER_POINT
    k_sigma: int = DEFAULT_K_SIGMA
    sigma_mode: str = 'variance'
    lr: float = DEFAULT_LR
    betas: tuple[float, ...] = DEFAULT_BETAS
    eps: float = DEFAULT_EPS
    seed: int = 0
    loss_mode: str = 'squared'
    mode: str = 'full'
    strict_grads: bool = False
    log_every: int = DEFAULT_LOG_EVERY

    def __post_init__(self):
        validate_non_negative_int(self.steps, 'steps')
        validate_positive_int(self.queries_per_step, 'queries_per_step')
        validate_positive_int(self.per_point, 'per_point')
        validate_positive_int(self.k_sigma, 'k_sigma')
        validate_choice(self.sigma_mode, SIGMA_MODES, 'sigma_mode')
        validate_positive_value(self.lr, 'lr')
        validate_betas(self.betas)
        validate_positive_value(self.eps, 'eps')
        validate_non_negative_int(self.seed, 'seed')
        validate_choice(self.loss_mode, LOSS_MODES, 'loss_mode')
        validate_choice(self.mode, ABLATION_MODES, 'mode')
        validate_positive_int(self.log_every, 'log_every')

    @property
    def tunes_implicit(self) -> bool:
        return self.mode in ('no_prior', 'joint_tune')


@dataclass(frozen=True)
class MeshConfig:
    resolution: int = DEFAULT_MC_RES
    padding: float = DEFAULT_BOUNDS_PADDING
    iso: float = 0.0
    chunk_size: int = DEFAULT_CHUNK_SIZE

    def __post_init__(self):
        validate_positive_int(self.resolution, 'resolution')
        if self.resolution < 2:
            raise UsageError('resolution должно быть не меньше 2.')
        if self.padding < 0:
            raise UsageError('padding не может быть отрицательным.')
        validate_positive_int(self.chunk_size, 'chunk_size')


@dataclass(frozen=True)
class MetricConfig:
    """Протокол оценки: число сэмплов или плотность, порог F-score."""

    sample_count: int = DEFAULT_SAMPLE_COUNT
    fscore_threshold: float = DEFAULT_FSCORE_THRESHOLD
    seed: int = 0
    sample_density: Optional[float] = None

    def __post_init__(self):
        validate_positive_int(self.sample_count, 'sample_count')
        validate_positive_value(self.fscore_threshold, 'fscore_threshold')
        validate_non_negative_int(self.seed, 'seed')
        if self.sample_density is not None:
            validate_positive_value(self.sample_density, 'sample_density')


@dataclass(frozen=True)
class DemoConfig:
    """2D демонстрация: приор на окружности, специализация на квадрат."""

    circle_points: int = DEMO_CIRCLE_POINTS
    circle_radius: float = DEMO_CIRCLE_RADIUS
    square_points: int = DEMO_SQUARE_POINTS
    square_half: float = DEMO_SQUARE_HALF
    table_queries: int = DEMO_TABLE_QUERIES
    contour_res: int = DEMO_CONTOUR_RES
    tolerance: float = DEMO_TOLERANCE
    pass_fraction: float = DEMO_PASS_FRACTION
    max_contour_chamfer: float = DEMO_MAX_CONTOUR_CHAMFER
    seed: int = 0

    def __post_init__(self):
        validate_positive_int(self.circle_points, 'circle_points')
        validate_positive_value(self.circle_radius, 'circle_radius')
        validate_positive_int(self.square_points, 'square_points')
        validate_positive_value(self.square_half, 'square_half')
        validate_positive_int(self.table_queries, 'table_queries')
        validate_positive_int(self.contour_res, 'contour_res')
        validate_positive_value(self.tolerance, 'tolerance')
        if not 0.0 < self.pass_fraction <= 1.0:
            raise UsageError('pass_fraction должно лежать в (0, 1].')
        validate_positive_value(
            self.max_contour_chamfer, 'max_contour_chamfer'
        )
        validate_non_negative_int(self.seed, 'seed')
