"""Тесты разбиения на регионы и нормализации."""

import itertools

import numpy as np
import pytest
from app.core.seeding import make_rng
from app.geometry.regions import (
    normalize_region,
    partition_regions,
    prepare_regions,
)
from app.models.cloud import PointCloud
from app.validate.exceptions import DegenerateRegionError, UsageError


def test_single_cell_holds_all_points(sphere_cloud):
    regions = partition_regions(sphere_cloud, 1)
    assert len(regions) == 1
    assert len(regions[0]) == len(sphere_cloud)


def test_cube_corners_split_into_eight_cells():
    corners = np.array(list(itertools.product((0.0, 1.0), repeat=3)))
    regions = partition_regions(PointCloud(corners), 2)
    assert len(regions) == 8
    assert all(len(r) == 1 for r in regions)
    assert [r.grid_index for r in regions] == sorted(
        r.grid_index for r in regions
    )


def test_partition_is_disjoint_cover():
    points = make_rng(3, 'demo').random((1000, 3))
    regions = partition_regions(PointCloud(points), 6)
    assert len(regions) <= 216
    members = np.concatenate([r.indices for r in regions])
    assert len(members) == len(points)
    np.testing.assert_array_equal(np.sort(members), np.arange(len(points)))


def test_flat_axis_goes_to_first_cell():
    points = np.array([[0.0, 0.0, 1.0], [1.0, 1.0, 1.0], [0.2, 0.9, 1.0]])
    regions = partition_regions(PointCloud(points), 2)
    assert all(r.grid_index[2] == 0 for r in regions)


def test_normalize_region_two_points():
    region = normalize_region(np.array([[1.0, 1.0, 1.0], [3.0, 1.0, 1.0]]))
    np.testing.assert_allclose(
        region.points, [[-0.5, 0.0, 0.0], [0.5, 0.0, 0.0]]
    )
    np.testing.assert_allclose(region.center, [2.0, 1.0, 1.0])
    assert region.scale == 2.0


def test_normalize_region_idempotent():
    points = make_rng(4, 'demo').random((50, 2))
    once = normalize_region(points)
    twice = normalize_region(once.points)
    np.testing.assert_allclose(twice.points, once.points, atol=1e-12)
    assert twice.scale == pytest.approx(1.0)


def test_denormalize_restores_world_points():
    points = make_rng(5, 'demo').random((30, 3)) * 4.0 - 1.0
    region = normalize_region(points)
    np.testing.assert_allclose(region.denormalize(region.points), points)


def test_degenerate_region_rejected():
    with pytest.raises(DegenerateRegionError):
        normalize_region(np.ones((4, 3)))


def test_prepare_regions_skips_degenerate(caplog):
    points = np.array(
        [[0.0, 0.0], [0.0, 0.0], [0.9, 0.9], [1.0, 1.0], [0.95, 0.8]]
    )
    regions = prepare_regions(PointCloud(points), 2)
    assert len(regions) == 1
    assert regions[0].grid_index == (1, 1)
    assert 'degenerate' in caplog.text


@pytest.mark.parametrize(
    'mode, center, scale',
    [
        ('full', [2.0, 3.0], 4.0),
        ('center', [2.0, 3.0], 1.0),
        ('scale', [0.0, 0.0], 4.0),
        ('none', [0.0, 0.0], 1.0),
    ],
)
def test_normalize_modes(mode, center, scale):
    points = np.array([[0.0, 2.0], [4.0, 4.0], [1.0, 3.0]])
    region = normalize_region(points, mode=mode)
    np.testing.assert_allclose(region.center, center)
    assert region.scale == scale
    np.testing.assert_allclose(
        region.points, (points - np.asarray(center)) / scale
    )
    np.testing.assert_allclose(region.denormalize(region.points), points)


def test_unknown_normalize_mode_rejected():
    with pytest.raises(UsageError):
        normalize_region(np.eye(3), mode='unit')


def test_prepare_regions_passes_mode(square_cloud):
    regions = prepare_regions(square_cloud, 2, 'none')
    assert regions
    assert all(r.scale == 1.0 for r in regions)
    for region in regions:
        np.testing.assert_array_equal(region.center, np.zeros(2))
