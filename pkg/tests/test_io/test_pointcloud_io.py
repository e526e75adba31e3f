"""Тесты чтения и записи облаков точек."""

import numpy as np
import pytest
from app.io import read_pointcloud, write_pointcloud
from app.models.cloud import PointCloud
from app.validate.exceptions import (
    DataError,
    EmptyCloudError,
    PointCloudFormatError,
    UsageError,
)


def test_read_xyz(tmp_path):
    path = tmp_path / 'cloud.xyz'
    path.write_text('0 0 0\n1 0 0\n', encoding='utf-8')
    cloud = read_pointcloud(path)
    assert cloud.points.shape == (2, 3)
    np.testing.assert_array_equal(cloud.points[1], [1.0, 0.0, 0.0])
    assert cloud.normals is None


def test_xyz_comments_and_extra_columns(tmp_path):
    path = tmp_path / 'cloud.txt'
    path.write_text(
        '# header\n0 0 0 7 7\n\n1 2 3  # tail\n', encoding='utf-8'
    )
    cloud = read_pointcloud(path)
    np.testing.assert_array_equal(cloud.points, [[0, 0, 0], [1, 2, 3]])


def test_xyz_two_columns_is_planar(tmp_path):
    path = tmp_path / 'cloud.xyz'
    path.write_text('0.5 0.25\n-1 1\n', encoding='utf-8')
    assert read_pointcloud(path).dim == 2


def test_bad_number_reports_line(tmp_path):
    path = tmp_path / 'cloud.xyz'
    path.write_text('a b c\n', encoding='utf-8')
    with pytest.raises(PointCloudFormatError) as excinfo:
        read_pointcloud(path)
    assert excinfo.value.line == 1
    assert 'строка 1' in str(excinfo.value)


def test_short_row_reports_line(tmp_path):
    path = tmp_path / 'cloud.xyz'
    path.write_text('0 0 0\n1 2\n', encoding='utf-8')
    with pytest.raises(PointCloudFormatError) as excinfo:
        read_pointcloud(path)
    assert excinfo.value.line == 2


def test_empty_file_rejected(tmp_path):
    path = tmp_path / 'cloud.xyz'
    path.write_text('# nothing\n', encoding='utf-8')
    with pytest.raises(EmptyCloudError):
        read_pointcloud(path)


def test_missing_file_is_data_error(tmp_path):
    with pytest.raises(DataError):
        read_pointcloud(tmp_path / 'absent.xyz')


def test_unknown_suffix_is_usage_error(tmp_path):
    with pytest.raises(UsageError):
        read_pointcloud(tmp_path / 'cloud.bin')


def test_ply_round_trip_with_normals(tmp_path, sphere_cloud):
    cloud = PointCloud(sphere_cloud.points[:100], sphere_cloud.normals[:100])
    path = write_pointcloud(cloud, tmp_path / 'cloud.ply')
    back = read_pointcloud(path)
    np.testing.assert_allclose(back.points, cloud.points, rtol=1e-8)
    np.testing.assert_allclose(back.normals, cloud.normals, rtol=1e-8)


def test_planar_xyz_round_trip(tmp_path, circle_cloud):
    path = write_pointcloud(circle_cloud, tmp_path / 'circle.xyz')
    back = read_pointcloud(path)
    assert back.dim == 2
    np.testing.assert_allclose(back.points, circle_cloud.points, rtol=1e-8)
