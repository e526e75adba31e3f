"""Манифест прогона рядом с артефактом."""

from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Any

from app.core.paths import ensure_parent_dir, sibling_path
from app.models.report import RunManifest
from app.validate.exceptions import DataError

logger = logging.getLogger(__name__)

MANIFEST_SUFFIX = '.manifest.json'


def manifest_path(artifact: Path) -> Path:
    """`mesh.obj` -> `mesh.manifest.json`."""
    return sibling_path(artifact, MANIFEST_SUFFIX)


def write_manifest(manifest: RunManifest, path: Path) -> Path:
    path = Path(path)
    text = json.dumps(
        manifest.to_dict(),
        indent=2,
        sort_keys=True,
        ensure_ascii=False,
        default=str,
    )
    try:
        ensure_parent_dir(path)
        path.write_text(text + '\n', encoding='utf-8', newline='\n')
    except OSError as e:
        raise DataError(f'Не удалось записать манифест {path}: {e}')
    logger.info('Manifest written: %s', path)
    return path


def read_manifest(path: Path) -> dict[str, Any]:
    """Прочитать манифест как словарь.

    Raises:
        DataError: Файл отсутствует или это не JSON.
    """
    path = Path(path)
    try:
        return json.loads(path.read_text(encoding='utf-8'))
    except (OSError, ValueError) as e:
        raise DataError(f'Не удалось прочитать манифест {path}: {e}')
