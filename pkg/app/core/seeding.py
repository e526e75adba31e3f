"""Именованные потоки случайности.

Все случайные решения пайплайна выводятся из одного `--seed` через
независимые подпотоки, поэтому, например, смена инициализации весов не
сдвигает выборку запросов.
"""

from __future__ import annotations

import zlib

import numpy as np

from app.core.constants import RNG_STREAMS
from app.validate.validators import validate_choice


def stream_key(stream: str) -> int:
    """Стабильный числовой ключ имени потока (не зависит от PYTHONHASHSEED)."""
    return zlib.crc32(stream.encode('utf-8'))


def make_rng(seed: int, stream: str, *extra: int) -> np.random.Generator:
    """Создать генератор для именованного подпотока.

    Args:
        seed: Общий seed прогона.
        stream: Имя подпотока из `RNG_STREAMS`.
        *extra: Дополнительные целые ключи (эпоха, номер региона и т.п.).

    Returns:
        np.random.Generator: Независимый детерминированный генератор.
    """
    validate_choice(stream, RNG_STREAMS, 'stream')
    entropy = [int(seed), stream_key(stream), *(int(x) for x in extra)]
    return np.random.default_rng(np.random.SeedSequence(entropy))
