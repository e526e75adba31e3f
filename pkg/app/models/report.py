"""Отчёт метрик и манифест прогона."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Any, Optional


@dataclass(frozen=True)
class MetricReport:
    """Метрики сравнения реконструкции с эталоном.

    `normal_consistency` равно None, если у одной из сторон нет нормалей.
    """

    chamfer_l1: float
    chamfer_l2: float
    fscore_mu: float
    fscore_2mu: float
    normal_consistency: Optional[float] = None
    threshold: float = 0.0
    sample_count: int = 0
    protocol: str = 'shape'
    density: Optional[float] = None

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    def to_text(self) -> str:
        """Плоская запись `name=value`, по одной строке на поле."""
        lines = []
        for key, value in self.to_dict().items():
            if value is None:
                continue
            if isinstance(value, float):
                value = f'{value:.9g}'
            lines.append(f'{key}={value}')
        return '\n'.join(lines) + '\n'


@dataclass
class RunManifest:
    """Сводка прогона команды для воспроизведения.

    Время запуска и длительность есть только здесь: артефакты прогона их
    не содержат.
    """

    command: str
    config: dict[str, Any]
    seed: int
    inputs: list[str] = field(default_factory=list)
    outputs: list[str] = field(default_factory=list)
    started_at: str = ''
    duration_s: float = 0.0
    version: str = ''
    status: str = 'ok'
    notes: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)
