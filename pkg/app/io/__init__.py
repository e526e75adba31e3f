"""Чтение и запись файлов пайплайна."""

from .checkpoint import (  # noqa
    CheckpointFile,
    load_checkpoint,
    load_global_sdf,
    load_prior,
    save_checkpoint,
    save_global_sdf,
    save_prior,
)
from .manifest import manifest_path, read_manifest, write_manifest  # noqa
from .mesh import (  # noqa
    read_contour,
    read_mesh,
    read_surface,
    write_contour,
    write_mesh,
)
from .pointcloud import read_pointcloud, write_pointcloud  # noqa
from .tables import (  # noqa
    write_ablation_table,
    write_loss_history,
    write_metrics,
    write_query_table,
)
