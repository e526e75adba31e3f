"""Пакет моделей домена."""

from .cloud import LocalRegion, PointCloud, QueryBatch, RegionCell  # noqa
from .config import (  # noqa
    ABLATION_MODES,
    DemoConfig,
    MeshConfig,
    MetricConfig,
    NetConfig,
    SpecializeConfig,
    TrainConfig,
)
from .mesh import ContourSet, SdfGrid, TriangleMesh  # noqa
from .report import MetricReport, RunManifest  # noqa
