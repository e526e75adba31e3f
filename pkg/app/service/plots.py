"""Графики: кривая лосса и перенос запросов 2D демонстрации."""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
from matplotlib.figure import Figure

from app.core.constants import PLOT_FIGSIZE
from app.core.paths import ensure_parent_dir
from app.models.mesh import ContourSet

logger = logging.getLogger(__name__)


def plot_loss_curve(
    history: Sequence[float],
    path: Path,
    title: str = 'Лосс',
) -> Path:
    """Сохранить кривую лосса по шагам (логарифмическая шкала)."""
    figure = Figure(figsize=PLOT_FIGSIZE)
    ax = figure.add_subplot(111)
    values = np.asarray(history, dtype=np.float64)
    if values.size:
        ax.plot(np.arange(1, values.size + 1), values, linewidth=1)
        if np.all(values > 0):
            ax.set_yscale('log')
    ax.set_title(title, pad=14, fontsize=12, fontweight='bold')
    ax.set_xlabel('Шаг')
    ax.set_ylabel('Лосс')
    ax.grid(True)
    figure.tight_layout()
    ensure_parent_dir(path)
    figure.savefig(path)
    logger.info('Loss curve saved: %s', path)
    return path


def plot_query_transport(
    queries: np.ndarray,
    transported: np.ndarray,
    path: Path,
    contour: Optional[ContourSet] = None,
) -> Path:
    """q_g слева и q_l′ справа, цвет по углу q_g."""
    figure = Figure(figsize=(PLOT_FIGSIZE[0] * 2, PLOT_FIGSIZE[1]))
    left = figure.add_subplot(121)
    right = figure.add_subplot(122)
    angle = np.arctan2(queries[:, 1], queries[:, 0])

    left.scatter(queries[:, 0], queries[:, 1], c=angle, s=4, cmap='hsv')
    right.scatter(
        transported[:, 0], transported[:, 1], c=angle, s=4, cmap='hsv'
    )
    if contour is not None:
        for line, closed in zip(contour.polylines, contour.closed):
            idx = np.append(line, line[0]) if closed else line
            pts = contour.vertices[idx]
            left.plot(pts[:, 0], pts[:, 1], color='black', linewidth=1)

    left.set_title('q_g')
    right.set_title("q_l'")
    for ax in (left, right):
        ax.set_aspect('equal')
        ax.grid(True)
    figure.tight_layout()
    ensure_parent_dir(path)
    figure.savefig(path)
    logger.info('Query transport plot saved: %s', path)
    return path
