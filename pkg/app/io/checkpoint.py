"""Версионированный формат чекпоинтов.

Раскладка файла:
    b'PCPR'                   4 байта, сигнатура;
    uint32 LE                 версия формата;
    uint32 LE                 длина заголовка в байтах;
    заголовок                 JSON (UTF-8, ключи отсортированы);
    полезная нагрузка         тензоры float32 LE в C-порядке подряд.

Заголовок хранит `meta` (архитектура, снимок конфига) и `tensors` —
каталог `[{name, shape, offset, nbytes}]`, где offset отсчитывается от
начала полезной нагрузки. Тензоры хранятся в одинарной точности, даже
если обучение шло в двойной.
"""

from __future__ import annotations

import json
import logging
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from app.core.constants import CHECKPOINT_MAGIC, CHECKPOINT_VERSION
from app.core.paths import ensure_parent_dir
from app.core.seeding import make_rng
from app.logging import logged
from app.models.config import (
    NetConfig,
    TrainConfig,
    config_from_dict,
    config_to_dict,
)
from app.nets.encoder import RegionEncoder
from app.nets.implicit import ImplicitNet
from app.nets.query import QueryNet
from app.service.prior import PriorCheckpoint
from app.service.specialize import GlobalSdf
from app.validate.exceptions import CheckpointError, UsageError

logger = logging.getLogger(__name__)

_PREAMBLE = struct.Struct('<4sII')
_DTYPE = np.dtype('<f4')

KIND_PRIOR = 'prior'
KIND_GLOBAL_SDF = 'global_sdf'


@dataclass
class CheckpointFile:
    """Содержимое чекпоинта: версия, метаданные и именованные тензоры."""

    meta: dict[str, Any]
    tensors: dict[str, np.ndarray] = field(default_factory=dict)
    version: int = CHECKPOINT_VERSION

    def summary(self) -> str:
        return (
            f'kind={self.meta.get("kind")}, tensors={len(self.tensors)}, '
            f'version={self.version}'
        )


def encode_checkpoint(ckpt: CheckpointFile) -> bytes:
    """Сериализовать чекпоинт в байты (детерминированно)."""
    directory = []
    chunks = []
    offset = 0
    for name in sorted(ckpt.tensors):
        data = np.ascontiguousarray(ckpt.tensors[name], dtype=_DTYPE)
        raw = data.tobytes(order='C')
        directory.append(
            {
                'name': name,
                'shape': list(data.shape),
                'offset': offset,
                'nbytes': len(raw),
            }
        )
        chunks.append(raw)
        offset += len(raw)

    header = json.dumps(
        {'meta': ckpt.meta, 'tensors': directory},
        sort_keys=True,
        separators=(',', ':'),
        ensure_ascii=True,
    ).encode('utf-8')
    preamble = _PREAMBLE.pack(CHECKPOINT_MAGIC, ckpt.version, len(header))
    return preamble + header + b''.join(chunks)


def decode_checkpoint(blob: bytes) -> CheckpointFile:
    """Разобрать байты чекпоинта.

    Raises:
        CheckpointError: С конкретной причиной: bad magic, unsupported
            version, повреждённый заголовок или payload shorter than
            directory.
    """
    if len(blob) < _PREAMBLE.size:
        raise CheckpointError('bad magic: файл короче сигнатуры')
    magic, version, header_len = _PREAMBLE.unpack_from(blob)
    if magic != CHECKPOINT_MAGIC:
        raise CheckpointError(f'bad magic: {magic!r}')
    if version != CHECKPOINT_VERSION:
        raise CheckpointError(
            f'unsupported version {version} '
            f'(поддерживается {CHECKPOINT_VERSION})'
        )

    start = _PREAMBLE.size
    header_bytes = blob[start : start + header_len]
    if len(header_bytes) != header_len:
        raise CheckpointError('truncated header: заголовок обрезан')
    try:
        header = json.loads(header_bytes.decode('utf-8'))
        meta = dict(header['meta'])
        directory = list(header['tensors'])
    except (ValueError, KeyError, TypeError) as e:
        raise CheckpointError(f'corrupt header: {e}')

    payload = memoryview(blob)[start + header_len :]
    tensors = {}
    for entry in directory:
        name = entry['name']
        shape = tuple(int(n) for n in entry['shape'])
        offset = int(entry['offset'])
        nbytes = int(entry['nbytes'])
        if nbytes != int(np.prod(shape, dtype=np.int64)) * _DTYPE.itemsize:
            raise CheckpointError(
                f'corrupt directory: {name} nbytes={nbytes}, форма {shape}'
            )
        if offset < 0 or offset + nbytes > len(payload):
            raise CheckpointError(
                f'payload shorter than directory: {name} требует байты '
                f'[{offset}, {offset + nbytes}), есть {len(payload)}'
            )
        data = np.frombuffer(payload[offset : offset + nbytes], dtype=_DTYPE)
        tensors[name] = data.reshape(shape).astype(np.float64)
    return CheckpointFile(meta, tensors, version)


@logged(level=logging.INFO)
def save_checkpoint(ckpt: CheckpointFile, path: Path) -> Path:
    """Записать чекпоинт на диск.

    Raises:
        CheckpointError: Если путь недоступен для записи.
    """
    path = Path(path)
    blob = encode_checkpoint(ckpt)
    try:
        ensure_parent_dir(path)
        path.write_bytes(blob)
    except OSError as e:
        raise CheckpointError(f'Не удалось записать {path}: {e}')
    logger.info('Checkpoint saved: %s (%d bytes)', path, len(blob))
    return path


@logged(level=logging.INFO)
def load_checkpoint(path: Path) -> CheckpointFile:
    """Прочитать чекпоинт с диска.

    Raises:
        CheckpointError: Файл отсутствует или повреждён.
    """
    path = Path(path)
    try:
        blob = path.read_bytes()
    except OSError as e:
        raise CheckpointError(f'Не удалось прочитать {path}: {e}')
    return decode_checkpoint(blob)


def _state(*param_sets) -> dict[str, np.ndarray]:
    state = {}
    for params in param_sets:
        state.update(params.state_dict())
    return state


def _subset(tensors: Mapping[str, np.ndarray], prefix: str) -> dict:
    return {k: v for k, v in tensors.items() if k.startswith(prefix + '.')}


def _load_params(params, tensors: Mapping[str, np.ndarray], what: str):
    try:
        params.load_state_dict(tensors)
    except UsageError as e:
        raise CheckpointError(f'{what}: {e}')


def _expect_kind(ckpt: CheckpointFile, kind: str) -> None:
    found = ckpt.meta.get('kind')
    if found != kind:
        raise CheckpointError(f'Ожидался чекпоинт {kind!r}, найден {found!r}')


def prior_to_checkpoint(prior: PriorCheckpoint) -> CheckpointFile:
    meta = {
        'kind': KIND_PRIOR,
        'net_config': config_to_dict(prior.net_config),
        'train_config': config_to_dict(prior.train_config),
        'steps': len(prior.loss_history),
    }
    return CheckpointFile(
        meta, _state(prior.encoder.params, prior.implicit.params)
    )


def prior_from_checkpoint(ckpt: CheckpointFile) -> PriorCheckpoint:
    _expect_kind(ckpt, KIND_PRIOR)
    net_cfg = config_from_dict(NetConfig, ckpt.meta['net_config'])
    train_cfg = config_from_dict(TrainConfig, ckpt.meta['train_config'])
    # Веса перезаписываются из файла, генератор нужен только конструкторам.
    rng = make_rng(train_cfg.seed, 'init')
    encoder = RegionEncoder(net_cfg, rng)
    implicit = ImplicitNet(net_cfg, rng)
    _load_params(encoder.params, _subset(ckpt.tensors, 'encoder'), 'encoder')
    _load_params(
        implicit.params, _subset(ckpt.tensors, 'implicit'), 'implicit'
    )
    return PriorCheckpoint(encoder, implicit, net_cfg, train_cfg)


def global_sdf_to_checkpoint(g: GlobalSdf) -> CheckpointFile:
    meta = {
        'kind': KIND_GLOBAL_SDF,
        'net_config': config_to_dict(g.net_config),
        'mode': g.mode,
        'condition': (
            None
            if g.condition is None
            else [float(x) for x in g.condition]
        ),
        'steps': len(g.loss_history),
    }
    return CheckpointFile(meta, _state(g.implicit.params, g.qnet.params))


def global_sdf_from_checkpoint(ckpt: CheckpointFile) -> GlobalSdf:
    _expect_kind(ckpt, KIND_GLOBAL_SDF)
    net_cfg = config_from_dict(NetConfig, ckpt.meta['net_config'])
    rng = make_rng(0, 'init')
    implicit = ImplicitNet(net_cfg, rng)
    qnet = QueryNet(net_cfg, rng)
    _load_params(
        implicit.params, _subset(ckpt.tensors, 'implicit'), 'implicit'
    )
    _load_params(qnet.params, _subset(ckpt.tensors, 'query'), 'query')
    implicit.params.set_trainable(False)
    qnet.params.set_trainable(False)
    return GlobalSdf(
        implicit,
        qnet,
        ckpt.meta.get('mode', 'full'),
        ckpt.meta.get('condition'),
    )


def save_prior(prior: PriorCheckpoint, path: Path) -> Path:
    return save_checkpoint(prior_to_checkpoint(prior), path)


def load_prior(path: Path) -> PriorCheckpoint:
    """Загрузить приор; ошибка, если в файле не приор."""
    prior = prior_from_checkpoint(load_checkpoint(path))
    logger.info('Prior loaded: %s (%s)', path, prior.summary())
    return prior


def save_global_sdf(g: GlobalSdf, path: Path) -> Path:
    return save_checkpoint(global_sdf_to_checkpoint(g), path)


def load_global_sdf(path: Path) -> GlobalSdf:
    g = global_sdf_from_checkpoint(load_checkpoint(path))
    logger.info('Global SDF loaded: %s (%s)', path, g.summary())
    return g
