"""Тесты табличных артефактов и манифеста."""

import numpy as np
import pandas as pd
import pytest
from app.io import (
    manifest_path,
    read_manifest,
    write_ablation_table,
    write_loss_history,
    write_manifest,
    write_metrics,
    write_query_table,
)
from app.io.tables import query_table_frame
from app.models.report import MetricReport, RunManifest
from app.validate.exceptions import DataError, ShapeError


@pytest.fixture
def report():
    return MetricReport(
        chamfer_l1=0.01,
        chamfer_l2=0.0002,
        fscore_mu=0.9,
        fscore_2mu=0.99,
        threshold=0.005,
        sample_count=100,
    )


def test_loss_history_csv(tmp_path):
    path = write_loss_history([0.5, 0.25], tmp_path / 'loss.csv')
    lines = path.read_text(encoding='utf-8').splitlines()
    assert lines[0] == 'step,loss'
    assert lines[1:] == ['1,0.5', '2,0.25']


def test_query_table_columns():
    frame = query_table_frame(np.zeros((3, 2)), np.ones((3, 2)), np.zeros(3))
    assert list(frame.columns) == ['qg_x', 'qg_y', 'ql_x', 'ql_y', 's']
    with pytest.raises(ShapeError):
        query_table_frame(np.zeros((3, 2)), np.ones((2, 2)), np.zeros(3))


def test_query_table_csv(tmp_path):
    path = write_query_table(
        np.zeros((2, 3)), np.ones((2, 3)), [0.1, -0.2], tmp_path / 'q.csv'
    )
    frame = pd.read_csv(path)
    assert list(frame.columns) == [
        'qg_x', 'qg_y', 'qg_z', 'ql_x', 'ql_y', 'ql_z', 's'
    ]
    np.testing.assert_allclose(frame['s'], [0.1, -0.2])


def test_ablation_table_keeps_order(tmp_path):
    scores = {'full': 0.01, 'no_shift': 0.02, 'fixed_cond': 0.03}
    frame = pd.read_csv(write_ablation_table(scores, tmp_path / 'a.csv'))
    assert list(frame['mode']) == ['full', 'no_shift', 'fixed_cond']


def test_metrics_text(tmp_path, report):
    path = write_metrics([report], tmp_path / 'metrics.txt')
    lines = path.read_text(encoding='utf-8').splitlines()
    assert 'chamfer_l1=0.01' in lines
    assert not any(line.startswith('normal_consistency') for line in lines)


def test_metrics_csv(tmp_path, report):
    frame = pd.read_csv(write_metrics([report, report], tmp_path / 'm.csv'))
    assert len(frame) == 2
    assert frame['fscore_2mu'].tolist() == [0.99, 0.99]


def test_manifest_round_trip(tmp_path):
    artifact = tmp_path / 'mesh.obj'
    path = manifest_path(artifact)
    assert path.name == 'mesh.manifest.json'

    manifest = RunManifest(
        command='reconstruct',
        config={'steps': 3},
        seed=7,
        outputs=[str(artifact)],
    )
    data = read_manifest(write_manifest(manifest, path))
    assert data['command'] == 'reconstruct'
    assert data['config'] == {'steps': 3}
    assert data['seed'] == 7


def test_manifest_missing(tmp_path):
    with pytest.raises(DataError):
        read_manifest(tmp_path / 'absent.manifest.json')
