"""Тесты записи и чтения мешей и контуров."""

import numpy as np
import pytest
from app.core.seeding import make_rng
from app.io import (
    read_contour,
    read_mesh,
    read_surface,
    write_contour,
    write_mesh,
)
from app.models.mesh import ContourSet, TriangleMesh
from app.validate.exceptions import MeshFormatError


@pytest.fixture
def triangle():
    return TriangleMesh(
        np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]),
        np.array([[0, 1, 2]]),
    )


def test_single_triangle_obj(tmp_path, triangle):
    path = write_mesh(triangle, tmp_path / 'tri.obj')
    lines = path.read_text(encoding='utf-8').splitlines()
    assert sum(line.startswith('v ') for line in lines) == 3
    assert 'f 1 2 3' in lines


def test_obj_round_trip(tmp_path):
    rng = make_rng(0, 'demo')
    mesh = TriangleMesh(
        rng.random((6, 3)), np.array([[0, 1, 2], [2, 3, 4], [4, 5, 0]])
    )
    back = read_mesh(write_mesh(mesh, tmp_path / 'mesh.obj'))
    np.testing.assert_allclose(back.vertices, mesh.vertices, atol=1e-7)
    np.testing.assert_array_equal(back.triangles, mesh.triangles)


def test_ply_round_trip_with_normals(tmp_path, triangle):
    normals = np.tile([0.0, 0.0, 1.0], (3, 1))
    mesh = TriangleMesh(triangle.vertices, triangle.triangles, normals)
    back = read_mesh(write_mesh(mesh, tmp_path / 'tri.ply'))
    np.testing.assert_allclose(back.vertices, mesh.vertices, atol=1e-7)
    np.testing.assert_array_equal(back.triangles, mesh.triangles)
    np.testing.assert_allclose(back.normals, normals)


def test_output_is_deterministic(tmp_path, triangle):
    a = write_mesh(triangle, tmp_path / 'a.obj').read_bytes()
    b = write_mesh(triangle, tmp_path / 'b.obj').read_bytes()
    assert a == b


def test_empty_mesh_written_with_warning(tmp_path, caplog):
    path = write_mesh(TriangleMesh.empty(), tmp_path / 'empty.obj')
    assert path.exists()
    assert 'empty mesh' in caplog.text


def test_bad_face_index_reports_line(tmp_path):
    path = tmp_path / 'bad.obj'
    path.write_text('v 0 0 0\nv 1 0 0\nf 1 2 9\n', encoding='utf-8')
    with pytest.raises(MeshFormatError) as excinfo:
        read_mesh(path)
    assert excinfo.value.line == 3


def test_contour_round_trip(tmp_path):
    contour = ContourSet(
        np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [2.0, 2.0], [3.0, 2.0]]),
        (np.array([0, 1, 2]), np.array([3, 4])),
        (True, False),
    )
    path = write_contour(contour, tmp_path / 'contour.obj')
    assert 'l 1 2 3 1' in path.read_text(encoding='utf-8').splitlines()

    back = read_contour(path)
    np.testing.assert_allclose(back.vertices, contour.vertices)
    assert back.closed == (True, False)
    np.testing.assert_array_equal(back.polylines[0], [0, 1, 2])
    np.testing.assert_array_equal(back.polylines[1], [3, 4])


def test_read_surface_detects_contour(tmp_path, triangle):
    contour = ContourSet(
        np.array([[0.0, 0.0], [1.0, 0.0]]), (np.array([0, 1]),), (False,)
    )
    assert isinstance(
        read_surface(write_contour(contour, tmp_path / 'c.obj')), ContourSet
    )
    assert isinstance(
        read_surface(write_mesh(triangle, tmp_path / 'm.obj')), TriangleMesh
    )
