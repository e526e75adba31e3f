"""Тесты сэмплирования запросов и аналитических форм."""

import numpy as np
import pytest
from app.core.seeding import make_rng
from app.geometry.index import build_index
from app.geometry.sampling import sample_queries, sampling_std, select_queries
from app.geometry.shapes import (
    box_sdf,
    circle_sdf,
    distance_to_square,
    sample_square,
)
from app.models.cloud import PointCloud


def test_sample_count_is_per_point_times_n(circle_cloud):
    batch = sample_queries(circle_cloud, build_index(circle_cloud), 40, 5)
    assert len(batch) == 40 * len(circle_cloud)
    np.testing.assert_array_equal(
        batch.anchors, np.repeat(np.arange(len(circle_cloud)), 40)
    )


def test_same_seed_gives_identical_batch(circle_cloud):
    index = build_index(circle_cloud)
    a = sample_queries(circle_cloud, index, 4, 3, seed=7)
    b = sample_queries(circle_cloud, index, 4, 3, seed=7)
    assert a.queries.tobytes() == b.queries.tobytes()
    np.testing.assert_array_equal(a.nn_index, b.nn_index)


def test_nn_targets_are_nearest_cloud_points(circle_cloud):
    index = build_index(circle_cloud)
    batch = sample_queries(circle_cloud, index, 4, 3, seed=1)
    _, expected = index.nearest(batch.queries)
    np.testing.assert_array_equal(batch.nn_index, expected)
    np.testing.assert_array_equal(
        batch.nn_targets, circle_cloud.points[expected]
    )


def test_single_point_cloud_targets_itself():
    cloud = PointCloud([[0.2, 0.3, 0.4]])
    batch = sample_queries(cloud, build_index(cloud), 10, 5)
    np.testing.assert_array_equal(
        batch.nn_targets, np.tile(cloud.points, (10, 1))
    )


def test_sigma_modes():
    d = np.array([0.04, 0.25])
    np.testing.assert_allclose(sampling_std(d, 'variance'), [0.2, 0.5])
    np.testing.assert_allclose(sampling_std(d, 'stddev'), d)


def test_select_queries_without_repeats(circle_cloud):
    batch = sample_queries(circle_cloud, build_index(circle_cloud), 4, 3)
    picked = select_queries(batch, 50, make_rng(0, 'selection'))
    assert len(picked) == 50
    rows = {tuple(q) for q in picked.queries}
    assert len(rows) == 50


def test_select_queries_capped_by_pool(circle_cloud):
    batch = sample_queries(circle_cloud, build_index(circle_cloud), 1, 3)
    picked = select_queries(batch, 10_000, make_rng(0, 'selection'))
    assert len(picked) == len(batch)


def test_square_samples_lie_on_perimeter():
    square = sample_square(300, 0.35, make_rng(0, 'demo'))
    np.testing.assert_allclose(
        distance_to_square(square.points, 0.35), 0.0, atol=1e-12
    )
    np.testing.assert_allclose(np.linalg.norm(square.normals, axis=1), 1.0)


def test_analytic_sdfs():
    assert circle_sdf([[0.0, 0.0]], 0.3)[0] == pytest.approx(-0.3)
    assert box_sdf([[1.0, 0.0]], 0.5)[0] == pytest.approx(0.5)
    assert box_sdf([[0.0, 0.0]], 0.5)[0] == pytest.approx(-0.5)
    assert box_sdf([[1.0, 1.0]], 0.5)[0] == pytest.approx(np.sqrt(0.5))
