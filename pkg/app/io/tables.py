"""Табличные артефакты (CSV через pandas)."""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np
import pandas as pd

from app.core.constants import MESH_FLOAT_FORMAT
from app.core.paths import ensure_parent_dir
from app.models.report import MetricReport
from app.validate.exceptions import DataError, ShapeError

logger = logging.getLogger(__name__)

_AXES = ('x', 'y', 'z')


def _to_csv(frame: pd.DataFrame, path: Path) -> Path:
    path = Path(path)
    try:
        ensure_parent_dir(path)
        frame.to_csv(
            path,
            index=False,
            float_format=MESH_FLOAT_FORMAT,
            lineterminator='\n',
        )
    except OSError as e:
        raise DataError(f'Не удалось записать {path}: {e}')
    logger.info('Table written: %s (%d rows)', path, len(frame))
    return path


def loss_history_frame(history: Sequence[float]) -> pd.DataFrame:
    values = np.asarray(history, dtype=np.float64)
    return pd.DataFrame(
        {'step': np.arange(1, values.size + 1), 'loss': values}
    )


def write_loss_history(history: Sequence[float], path: Path) -> Path:
    """CSV `step,loss` с шагами от 1."""
    return _to_csv(loss_history_frame(history), path)


def query_table_frame(
    queries: np.ndarray,
    transported: np.ndarray,
    sdf_values: np.ndarray,
) -> pd.DataFrame:
    """Таблица переноса: `qg_x,qg_y[,qg_z],ql_x,ql_y[,ql_z],s`."""
    q_g = np.asarray(queries, dtype=np.float64)
    q_l = np.asarray(transported, dtype=np.float64)
    s = np.asarray(sdf_values, dtype=np.float64).reshape(-1)
    if q_g.shape != q_l.shape or q_g.shape[0] != s.shape[0]:
        raise ShapeError(
            f'q_g {q_g.shape}, q_l {q_l.shape} и s {s.shape} не согласованы'
        )
    data = {}
    for prefix, arr in (('qg', q_g), ('ql', q_l)):
        for a in range(arr.shape[1]):
            data[f'{prefix}_{_AXES[a]}'] = arr[:, a]
    data['s'] = s
    return pd.DataFrame(data)


def write_query_table(
    queries: np.ndarray,
    transported: np.ndarray,
    sdf_values: np.ndarray,
    path: Path,
) -> Path:
    return _to_csv(query_table_frame(queries, transported, sdf_values), path)


def write_ablation_table(scores: Mapping[str, float], path: Path) -> Path:
    """CSV `mode,contour_chamfer` в порядке прогона режимов."""
    frame = pd.DataFrame(
        {
            'mode': list(scores),
            'contour_chamfer': [float(v) for v in scores.values()],
        }
    )
    return _to_csv(frame, path)


def metrics_frame(reports: Sequence[MetricReport]) -> pd.DataFrame:
    return pd.DataFrame([r.to_dict() for r in reports])


def write_metrics(reports: Sequence[MetricReport], path: Path) -> Path:
    """Отчёт метрик: `.csv` — таблица, иначе плоский текст name=value.

    Несколько отчётов в текстовом виде разделяются пустой строкой.
    """
    path = Path(path)
    if path.suffix.lower() == '.csv':
        return _to_csv(metrics_frame(reports), path)
    text = '\n'.join(r.to_text() for r in reports)
    try:
        ensure_parent_dir(path)
        path.write_text(text, encoding='utf-8', newline='\n')
    except OSError as e:
        raise DataError(f'Не удалось записать {path}: {e}')
    logger.info('Metric report written: %s', path)
    return path
