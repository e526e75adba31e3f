"""Аналитические формы: сэмплеры поверхностей и точные SDF."""

from __future__ import annotations

import numpy as np

from app.models.cloud import PointCloud
from app.validate.validators import validate_positive_int


def sample_circle(
    n: int,
    radius: float,
    rng: np.random.Generator,
    center=(0.0, 0.0),
) -> PointCloud:
    """n точек на окружности со случайными углами."""
    validate_positive_int(n, 'n')
    theta = rng.uniform(0.0, 2.0 * np.pi, n)
    dirs = np.stack([np.cos(theta), np.sin(theta)], axis=1)
    return PointCloud(np.asarray(center) + radius * dirs, normals=dirs)


def sample_square(
    n: int,
    half: float,
    rng: np.random.Generator,
) -> PointCloud:
    """n точек равномерно по периметру квадрата [-half, half]²."""
    validate_positive_int(n, 'n')
    t = rng.uniform(0.0, 4.0, n)
    side = np.minimum(t.astype(np.int64), 3)
    u = (t - side) * 2.0 * half - half

    points = np.empty((n, 2))
    normals = np.zeros((n, 2))
    signs = np.array([1.0, 1.0, -1.0, -1.0])
    axis = side % 2
    sign = signs[side]
    rows = np.arange(n)
    points[rows, axis] = sign * half
    points[rows, 1 - axis] = u
    normals[rows, axis] = sign
    return PointCloud(points, normals=normals)


def sample_sphere(
    n: int,
    radius: float,
    rng: np.random.Generator,
) -> PointCloud:
    """n точек на сфере: нормированные гауссовы векторы."""
    validate_positive_int(n, 'n')
    dirs = rng.standard_normal((n, 3))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    return PointCloud(radius * dirs, normals=dirs)


def circle_sdf(points, radius: float, center=(0.0, 0.0)) -> np.ndarray:
    pts = np.asarray(points, dtype=np.float64)
    return np.linalg.norm(pts - np.asarray(center), axis=-1) - radius


def sphere_sdf(points, radius: float) -> np.ndarray:
    pts = np.asarray(points, dtype=np.float64)
    return np.linalg.norm(pts, axis=-1) - radius


def box_sdf(points, half) -> np.ndarray:
    """Точное евклидово SDF осевого бокса [-half, half]ᴰ."""
    pts = np.asarray(points, dtype=np.float64)
    q = np.abs(pts) - np.asarray(half)
    outside = np.linalg.norm(np.maximum(q, 0.0), axis=-1)
    inside = np.minimum(q.max(axis=-1), 0.0)
    return outside + inside


def square_maxnorm_sdf(points, half: float) -> np.ndarray:
    """SDF квадрата в max-норме: ‖x‖∞ − half."""
    pts = np.asarray(points, dtype=np.float64)
    return np.abs(pts).max(axis=-1) - half


def distance_to_square(points, half: float) -> np.ndarray:
    """Евклидово расстояние до границы квадрата [-half, half]²."""
    return np.abs(box_sdf(points, half))
