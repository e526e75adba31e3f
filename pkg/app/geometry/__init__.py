"""Поиск соседей, разбиение на регионы и сэмплирование запросов."""

from .index import (  # noqa
    SpatialIndex,
    build_index,
    kth_nn_distance,
    kth_nn_distances_of_members,
)
from .regions import (  # noqa
    denormalize,
    normalize_region,
    partition_regions,
    prepare_regions,
)
from .sampling import sample_queries, sampling_std, select_queries  # noqa
from .shapes import (  # noqa
    box_sdf,
    circle_sdf,
    distance_to_square,
    sample_circle,
    sample_sphere,
    sample_square,
    sphere_sdf,
    square_maxnorm_sdf,
)
