"""Метрики реконструкции: Chamfer L1/L2, согласованность нормалей, F-score.

Chamfer считается как ½·(среднее d(x, Y)^p + среднее d(y, X)^p), где d —
евклидово расстояние до ближайшего соседа. Абсолютные значения зависят от
этого соглашения.
"""

from __future__ import annotations

import logging
import math
from typing import Optional, Union

import numpy as np

from app.core.constants import SCENE_DENSITIES, SCENE_FSCORE_THRESHOLD
from app.core.seeding import make_rng
from app.geometry.index import build_index
from app.logging import logged
from app.models.cloud import PointCloud
from app.models.config import MetricConfig
from app.models.mesh import ContourSet, TriangleMesh
from app.models.report import MetricReport
from app.validate.exceptions import MeshError, UsageError
from app.validate.validators import (
    validate_choice,
    validate_points,
    validate_positive_int,
    validate_positive_value,
)

logger = logging.getLogger(__name__)

Surface = Union[TriangleMesh, ContourSet, PointCloud]
Samples = tuple[np.ndarray, Optional[np.ndarray]]

UNIT_TOLERANCE = 1e-6


def _rng(seed: Union[int, np.random.Generator]) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return make_rng(int(seed), 'metrics')


def sample_mesh_surface(
    mesh: TriangleMesh,
    n: int,
    seed: Union[int, np.random.Generator] = 0,
) -> Samples:
    """Равномерные по площади точки на меше и нормали их граней.

    Raises:
        MeshError: Если меш пуст или его площадь нулевая.
    """
    validate_positive_int(n, 'n')
    if mesh.is_empty:
        raise MeshError('Нельзя сэмплировать пустой меш.')
    areas = mesh.face_areas()
    total = float(areas.sum())
    if total <= 0:
        raise MeshError('Площадь меша равна нулю.')

    rng = _rng(seed)
    faces = rng.choice(len(areas), size=n, p=areas / total)
    r1 = np.sqrt(rng.random(n))
    r2 = rng.random(n)
    bary = np.stack([1.0 - r1, r1 * (1.0 - r2), r1 * r2], axis=1)
    corners = mesh.vertices[mesh.triangles[faces]]
    points = np.einsum('nk,nkd->nd', bary, corners)
    return points, mesh.face_normals()[faces]


def sample_contour(
    contour: ContourSet,
    n: int,
    seed: Union[int, np.random.Generator] = 0,
) -> Samples:
    """Равномерные по длине точки на контуре и нормали его отрезков.

    Нормаль смотрит влево от направления обхода, в сторону
    положительной SDF.
    """
    validate_positive_int(n, 'n')
    seg = contour.segments()
    if not len(seg):
        raise MeshError('Нельзя сэмплировать пустой контур.')
    a = contour.vertices[seg[:, 0]]
    b = contour.vertices[seg[:, 1]]
    lengths = np.linalg.norm(b - a, axis=1)
    total = float(lengths.sum())
    if total <= 0:
        raise MeshError('Длина контура равна нулю.')

    rng = _rng(seed)
    pick = rng.choice(len(seg), size=n, p=lengths / total)
    t = rng.random(n)[:, None]
    points = a[pick] + t * (b[pick] - a[pick])
    direction = (b - a) / np.where(lengths > 0, lengths, 1.0)[:, None]
    normals = np.stack([-direction[:, 1], direction[:, 0]], axis=1)
    return points, normals[pick]


def surface_measure(surface: Surface) -> float:
    """Площадь меша или длина контура."""
    if isinstance(surface, TriangleMesh):
        return float(surface.face_areas().sum())
    if isinstance(surface, ContourSet):
        return surface.total_length()
    raise UsageError('Мера определена только для меша или контура.')


def sample_surface(
    surface: Surface,
    n: int,
    seed: Union[int, np.random.Generator] = 0,
) -> Samples:
    """Точки поверхности: сэмплы меша/контура или само облако."""
    if isinstance(surface, TriangleMesh):
        return sample_mesh_surface(surface, n, seed)
    if isinstance(surface, ContourSet):
        return sample_contour(surface, n, seed)
    return surface.points, surface.normals


def _nn_distances(x: np.ndarray, y: np.ndarray) -> tuple:
    dist, idx = build_index(y).nearest(x)
    return dist, idx


def chamfer(x, y, order: int = 2) -> float:
    """Chamfer-расстояние порядка 1 или 2."""
    validate_choice(order, (1, 2), 'order')
    x = validate_points(x, name='X')
    y = validate_points(y, name='Y', dim=x.shape[1])
    d_xy, _ = _nn_distances(x, y)
    d_yx, _ = _nn_distances(y, x)
    return 0.5 * float(np.mean(d_xy ** order) + np.mean(d_yx ** order))


def _unit(normals: np.ndarray, name: str) -> np.ndarray:
    n = np.asarray(normals, dtype=np.float64)
    length = np.linalg.norm(n, axis=1, keepdims=True)
    if np.any(np.abs(length - 1.0) > UNIT_TOLERANCE):
        logger.warning('%s: non-unit normals renormalized', name)
        n = n / np.where(length > 0, length, 1.0)
    return n


def normal_consistency(x, nx, y, ny) -> float:
    """Среднее |cos| между нормалями взаимно ближайших точек, в [0, 1]."""
    x = validate_points(x, name='X')
    y = validate_points(y, name='Y', dim=x.shape[1])
    nx = _unit(nx, 'X')
    ny = _unit(ny, 'Y')
    _, idx_xy = _nn_distances(x, y)
    _, idx_yx = _nn_distances(y, x)
    cos_xy = np.abs(np.sum(nx * ny[idx_xy], axis=1))
    cos_yx = np.abs(np.sum(ny * nx[idx_yx], axis=1))
    return 0.5 * float(cos_xy.mean() + cos_yx.mean())


def fscore(x, y, tau: float) -> float:
    """Гармоническое среднее точности и полноты при пороге tau.

    Точка засчитывается, если расстояние строго меньше tau.
    """
    validate_positive_value(tau, 'tau')
    x = validate_points(x, name='X')
    y = validate_points(y, name='Y', dim=x.shape[1])
    d_xy, _ = _nn_distances(x, y)
    d_yx, _ = _nn_distances(y, x)
    precision = float(np.mean(d_xy < tau))
    recall = float(np.mean(d_yx < tau))
    if precision + recall == 0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def _count(surface: Surface, cfg: MetricConfig, density) -> int:
    if density is None or isinstance(surface, PointCloud):
        return cfg.sample_count
    return max(1, math.ceil(density * surface_measure(surface)))


@logged(level=logging.INFO)
def evaluate(
    reconstruction: Surface,
    reference: Surface,
    cfg: MetricConfig = MetricConfig(),
    *,
    protocol: str = 'shape',
    density: Optional[float] = None,
) -> MetricReport:
    """Сравнить реконструкцию с эталонным облаком, мешем или контуром.

    Обе поверхности сэмплируются по `cfg` одним и тем же потоком `metrics`
    (облако берётся как есть), так что меш против своей копии даёт
    нулевой Chamfer и F-score 1. F-score считается при пороге μ и 2μ.
    Согласованность нормалей не считается, если у одной из сторон нет
    нормалей.
    """
    density = density if density is not None else cfg.sample_density
    x, nx = sample_surface(
        reconstruction,
        _count(reconstruction, cfg, density),
        make_rng(cfg.seed, 'metrics'),
    )
    y, ny = sample_surface(
        reference,
        _count(reference, cfg, density),
        make_rng(cfg.seed, 'metrics'),
    )

    mu = cfg.fscore_threshold
    nc = None
    if nx is not None and ny is not None:
        nc = normal_consistency(x, nx, y, ny)
    else:
        logger.info('Normals unavailable; normal consistency omitted')

    return MetricReport(
        chamfer_l1=chamfer(x, y, 1),
        chamfer_l2=chamfer(x, y, 2),
        fscore_mu=fscore(x, y, mu),
        fscore_2mu=fscore(x, y, 2 * mu),
        normal_consistency=nc,
        threshold=mu,
        sample_count=len(x),
        protocol=protocol,
        density=density,
    )


def evaluate_scene(
    reconstruction: Surface,
    reference: Surface,
    cfg: MetricConfig = MetricConfig(),
    densities=SCENE_DENSITIES,
) -> list[MetricReport]:
    """Протокол сцен: порог 0.025 и несколько плотностей сэмплирования."""
    scene_cfg = MetricConfig(
        sample_count=cfg.sample_count,
        fscore_threshold=SCENE_FSCORE_THRESHOLD,
        seed=cfg.seed,
    )
    return [
        evaluate(
            reconstruction,
            reference,
            scene_cfg,
            protocol='scene',
            density=float(d),
        )
        for d in densities
    ]
