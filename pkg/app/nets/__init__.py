"""Сети пайплайна: энкодер региона, неявная SDF и сеть запросов."""

from .encoder import RegionEncoder, encode_region  # noqa
from .implicit import ImplicitNet, sdf_eval, sdf_eval_with_grad  # noqa
from .query import QueryNet, normalize_mode, predict_query  # noqa
