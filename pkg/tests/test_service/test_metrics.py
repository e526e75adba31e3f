"""Тесты метрик реконструкции и сэмплирования поверхностей."""

import numpy as np
import pytest
from app.core.seeding import make_rng
from app.models.config import MetricConfig
from app.models.mesh import ContourSet, TriangleMesh
from app.service.metrics import (
    chamfer,
    evaluate,
    evaluate_scene,
    fscore,
    normal_consistency,
    sample_contour,
    sample_mesh_surface,
    surface_measure,
)
from app.validate.exceptions import MeshError, UsageError


def _tetrahedron():
    vertices = np.array(
        [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
    )
    triangles = np.array([[0, 2, 1], [0, 1, 3], [0, 3, 2], [1, 2, 3]])
    return TriangleMesh(vertices, triangles)


def test_chamfer_identical_sets_is_zero():
    x = make_rng(0, 'demo').random((50, 3))
    assert chamfer(x, x, 1) == 0.0
    assert chamfer(x, x, 2) == 0.0


def test_chamfer_single_pair():
    x = np.array([[0.0, 0.0, 0.0]])
    y = np.array([[1.0, 0.0, 0.0]])
    assert chamfer(x, y, 1) == pytest.approx(1.0)
    assert chamfer(x, y, 2) == pytest.approx(1.0)


def _pair(seed):
    rng = make_rng(seed, 'demo')
    dim = 2 + seed % 2
    n, m = rng.integers(1, 501, size=2)
    x = rng.random((n, dim))
    y = rng.random((m, dim)) * 1.2 - 0.1
    nx = rng.normal(size=(n, dim))
    ny = rng.normal(size=(m, dim))
    nx /= np.linalg.norm(nx, axis=1, keepdims=True)
    ny /= np.linalg.norm(ny, axis=1, keepdims=True)
    return x, nx, y, ny


@pytest.mark.parametrize('seed', range(50))
def test_metrics_match_brute_force(seed):
    x, nx, y, ny = _pair(seed)
    full = np.linalg.norm(x[:, None, :] - y[None, :, :], axis=-1)
    d_xy = full.min(axis=1)
    d_yx = full.min(axis=0)

    for order in (1, 2):
        expected = 0.5 * (np.mean(d_xy ** order) + np.mean(d_yx ** order))
        assert chamfer(x, y, order) == pytest.approx(expected, abs=1e-12)

    tau = 0.05
    precision = np.mean(d_xy < tau)
    recall = np.mean(d_yx < tau)
    expected = 0.0
    if precision + recall > 0:
        expected = 2 * precision * recall / (precision + recall)
    assert fscore(x, y, tau) == pytest.approx(expected, abs=1e-12)

    cos_xy = np.abs(np.sum(nx * ny[full.argmin(axis=1)], axis=1))
    cos_yx = np.abs(np.sum(ny * nx[full.argmin(axis=0)], axis=1))
    expected = 0.5 * (cos_xy.mean() + cos_yx.mean())
    assert normal_consistency(x, nx, y, ny) == pytest.approx(
        expected, abs=1e-12
    )


@pytest.mark.parametrize('seed', range(5))
def test_chamfer_is_symmetric(seed):
    x, _, y, _ = _pair(seed)
    for order in (1, 2):
        assert chamfer(x, y, order) == chamfer(y, x, order)


@pytest.mark.parametrize('seed', range(5))
def test_fscore_grows_with_threshold(seed):
    x, _, y, _ = _pair(seed)
    scores = [fscore(x, y, tau) for tau in np.linspace(0.005, 0.5, 25)]
    assert all(a <= b for a, b in zip(scores, scores[1:]))


def test_chamfer_rejects_bad_order():
    with pytest.raises(UsageError):
        chamfer(np.zeros((1, 3)), np.zeros((1, 3)), 3)


def test_normal_consistency_ignores_orientation():
    x = make_rng(2, 'demo').random((30, 3))
    normals = np.tile([0.0, 0.0, 1.0], (30, 1))
    assert normal_consistency(x, normals, x, normals) == pytest.approx(1.0)
    assert normal_consistency(x, normals, x, -normals) == pytest.approx(1.0)
    side = np.tile([1.0, 0.0, 0.0], (30, 1))
    assert normal_consistency(x, normals, x, side) == pytest.approx(0.0)


def test_normal_consistency_renormalizes(caplog):
    x = np.array([[0.0, 0.0, 0.0]])
    value = normal_consistency(x, [[0.0, 0.0, 2.0]], x, [[0.0, 0.0, 1.0]])
    assert value == pytest.approx(1.0)
    assert 'renormalized' in caplog.text


def test_fscore_bounds():
    x = make_rng(3, 'demo').random((40, 3))
    assert fscore(x, x, 0.01) == 1.0
    assert fscore(x, x + 10.0, 0.01) == 0.0


def test_fscore_precision_recall_mix():
    x = np.array([[0.0, 0.0, 0.0]])
    y = np.array([[0.0, 0.0, 0.0], [5.0, 0.0, 0.0]])
    assert fscore(x, y, 0.1) == pytest.approx(2.0 / 3.0)


def test_fscore_threshold_is_strict():
    x = np.array([[0.0, 0.0]])
    y = np.array([[0.5, 0.0]])
    assert fscore(x, y, 0.5) == 0.0


def test_points_at_threshold_do_not_count():
    x = np.array([[0.0, 0.0], [4.0, 0.0], [8.0, 0.0]])
    y = x + [0.0, 1.0]
    assert fscore(x, y, 1.0) == 0.0
    assert fscore(x, np.vstack([y, x[:1]]), 1.0) == pytest.approx(
        2 * (1 / 3) * (1 / 4) / (1 / 3 + 1 / 4)
    )


def test_triangle_samples_stay_inside():
    mesh = TriangleMesh(
        np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]),
        np.array([[0, 1, 2]]),
    )
    points, normals = sample_mesh_surface(mesh, 1000, 0)
    assert np.all(points[:, 0] >= 0.0)
    assert np.all(points[:, 1] >= 0.0)
    assert np.all(points[:, 0] + points[:, 1] <= 1.0 + 1e-12)
    np.testing.assert_array_equal(points[:, 2], 0.0)
    np.testing.assert_allclose(np.abs(normals[:, 2]), 1.0)


def test_samples_follow_face_area():
    vertices = np.array(
        [
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [10.0, 0.0, 0.0],
            [13.0, 0.0, 0.0],
            [10.0, 1.0, 0.0],
        ]
    )
    mesh = TriangleMesh(vertices, np.array([[0, 1, 2], [3, 4, 5]]))
    points, _ = sample_mesh_surface(mesh, 100_000, 0)
    share = np.mean(points[:, 0] >= 10.0)
    assert share == pytest.approx(0.75, abs=0.03)


def test_same_seed_same_samples():
    mesh = _tetrahedron()
    a, _ = sample_mesh_surface(mesh, 500, 4)
    b, _ = sample_mesh_surface(mesh, 500, 4)
    assert a.tobytes() == b.tobytes()


def test_empty_mesh_cannot_be_sampled():
    with pytest.raises(MeshError):
        sample_mesh_surface(TriangleMesh.empty(), 10)


def test_contour_samples_on_segments():
    contour = ContourSet(
        np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]),
        (np.arange(4),),
        (True,),
    )
    assert surface_measure(contour) == pytest.approx(4.0)
    points, normals = sample_contour(contour, 2000, 0)
    on_edge = np.minimum(
        np.minimum(np.abs(points[:, 0]), np.abs(points[:, 0] - 1.0)),
        np.minimum(np.abs(points[:, 1]), np.abs(points[:, 1] - 1.0)),
    )
    np.testing.assert_allclose(on_edge, 0.0, atol=1e-12)
    np.testing.assert_allclose(np.linalg.norm(normals, axis=1), 1.0)


def test_evaluate_mesh_against_itself():
    mesh = _tetrahedron()
    report = evaluate(mesh, mesh, MetricConfig(sample_count=2000))
    assert report.chamfer_l1 == 0.0
    assert report.chamfer_l2 == 0.0
    assert report.fscore_mu == 1.0
    assert report.fscore_2mu == 1.0
    assert report.normal_consistency == pytest.approx(1.0)
    assert report.sample_count == 2000
    assert 'chamfer_l1=0\n' in report.to_text()


def test_evaluate_mesh_against_copy():
    mesh = _tetrahedron()
    copy = TriangleMesh(mesh.vertices.copy(), mesh.triangles.copy())
    report = evaluate(mesh, copy)
    assert report.chamfer_l1 == 0.0
    assert report.fscore_mu == 1.0


def test_evaluate_identical_samples_give_exact_scores(sphere_cloud):
    report = evaluate(sphere_cloud, sphere_cloud)
    assert report.chamfer_l1 == 0.0
    assert report.chamfer_l2 == 0.0
    assert report.fscore_mu == 1.0


def test_scene_protocol_uses_densities():
    mesh = _tetrahedron()
    reports = evaluate_scene(mesh, mesh, MetricConfig(sample_count=100))
    assert len(reports) == 4
    assert all(r.protocol == 'scene' for r in reports)
    assert all(r.threshold == 0.025 for r in reports)
    counts = [r.sample_count for r in reports]
    assert counts == sorted(counts)
