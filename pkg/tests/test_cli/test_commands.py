"""Тесты команд CLI и кодов завершения."""

import numpy as np
import pandas as pd
import pytest
from app.cli.main import main
from app.io import (
    load_prior,
    read_contour,
    read_manifest,
    write_mesh,
    write_pointcloud,
)
from app.models.mesh import TriangleMesh

TINY_NET = [
    '--cond-dim', '8',
    '--hidden', '16',
    '--implicit-depth', '3',
    '--skip-layer', '1',
    '--query-depth', '2',
    '--encoder-widths', '8',
]
TINY_SAMPLING = ['--per-point', '2', '--k-sigma', '3']


@pytest.fixture
def cli(tmp_path):
    logs = str(tmp_path / 'logs')

    def run(*argv):
        return main(['--log-dir', logs, '-q', *map(str, argv)])

    return run


@pytest.fixture
def circle_file(tmp_path, circle_cloud):
    return write_pointcloud(circle_cloud, tmp_path / 'circle.xyz')


@pytest.fixture
def tetra_file(tmp_path):
    mesh = TriangleMesh(
        np.array(
            [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0, 0, 1.0]]
        ),
        np.array([[0, 2, 1], [0, 1, 3], [0, 3, 2], [1, 2, 3]]),
    )
    return write_mesh(mesh, tmp_path / 'tetra.obj')


def _train(cli, circle_file, out, *extra):
    return cli(
        'train-prior', circle_file,
        '-o', out,
        '--grid', 1,
        '--epochs', 1,
        '--queries-per-region', 16,
        *TINY_SAMPLING,
        *TINY_NET,
        *extra,
    )


def test_unknown_command_is_usage_error(cli):
    with pytest.raises(SystemExit) as excinfo:
        cli('fly')
    assert excinfo.value.code == 1


def test_bad_mode_is_usage_error(cli, circle_file, tmp_path):
    with pytest.raises(SystemExit) as excinfo:
        cli(
            'reconstruct', circle_file,
            '-o', tmp_path / 'c.obj',
            '--mode', 'sideways',
        )
    assert excinfo.value.code == 1


def test_missing_input_is_data_error(cli, tmp_path):
    code = cli(
        'reconstruct', tmp_path / 'absent.xyz',
        '-o', tmp_path / 'c.obj',
        '--mode', 'no-prior',
    )
    assert code == 2


def test_full_mode_without_prior_is_usage_error(cli, circle_file, tmp_path):
    code = cli('reconstruct', circle_file, '-o', tmp_path / 'c.obj')
    assert code == 1


def test_grad_check_small(cli):
    assert cli('grad-check', '--instances', 3, '--double-instances', 1) == 0


def test_train_prior_writes_artifacts(cli, circle_file, tmp_path):
    out = tmp_path / 'prior.ckpt'
    assert _train(cli, circle_file, out) == 0
    assert out.read_bytes()[:4] == b'PCPR'

    loss = pd.read_csv(tmp_path / 'prior.loss.csv')
    assert list(loss.columns) == ['step', 'loss']
    assert len(loss) == 1

    manifest = read_manifest(tmp_path / 'prior.manifest.json')
    assert manifest['command'] == 'train-prior'
    assert manifest['config']['train']['epochs'] == 1
    assert manifest['config']['net']['dim'] == 2
    assert str(out) in manifest['outputs']


def test_train_prior_is_reproducible(cli, circle_file, tmp_path):
    a = tmp_path / 'a.ckpt'
    b = tmp_path / 'b.ckpt'
    assert _train(cli, circle_file, a) == 0
    assert _train(cli, circle_file, b) == 0
    assert a.read_bytes() == b.read_bytes()


def test_train_prior_keeps_normalize_mode(cli, circle_file, tmp_path):
    out = tmp_path / 'prior.ckpt'
    assert _train(cli, circle_file, out, '--normalize', 'center') == 0
    assert load_prior(out).train_config.normalize == 'center'
    manifest = read_manifest(tmp_path / 'prior.manifest.json')
    assert manifest['config']['train']['normalize'] == 'center'


def test_config_file_fills_missing_flags(cli, circle_file, tmp_path):
    config = tmp_path / 'run.env'
    config.write_text('epochs=2\nseed=5\n', encoding='utf-8')
    out = tmp_path / 'prior.ckpt'
    code = cli(
        '--config', config,
        'train-prior', circle_file,
        '-o', out,
        '--grid', 1,
        '--queries-per-region', 16,
        *TINY_SAMPLING,
        *TINY_NET,
    )
    assert code == 0
    manifest = read_manifest(tmp_path / 'prior.manifest.json')
    assert manifest['config']['train']['epochs'] == 2
    assert manifest['seed'] == 5


def test_reconstruct_contour_without_prior(cli, circle_file, tmp_path):
    out = tmp_path / 'contour.obj'
    code = cli(
        'reconstruct', circle_file,
        '-o', out,
        '--mode', 'no-prior',
        '--steps', 0,
        '--mc-res', 16,
        *TINY_SAMPLING,
        *TINY_NET,
    )
    assert code == 0
    assert out.exists()
    read_contour(out)
    loss = pd.read_csv(tmp_path / 'contour.loss.csv')
    assert list(loss.columns) == ['step', 'loss']
    assert len(loss) == 0


def test_reconstruct_with_prior(cli, circle_file, tmp_path):
    prior = tmp_path / 'prior.ckpt'
    assert _train(cli, circle_file, prior) == 0
    out = tmp_path / 'contour.obj'
    code = cli(
        'reconstruct', circle_file,
        '-o', out,
        '--prior', prior,
        '--steps', 2,
        '--queries-per-step', 16,
        '--mc-res', 16,
        '--save-sdf', tmp_path / 'sdf.ckpt',
        *TINY_SAMPLING,
    )
    assert code == 0
    assert (tmp_path / 'sdf.ckpt').read_bytes()[:4] == b'PCPR'
    manifest = read_manifest(tmp_path / 'contour.manifest.json')
    assert manifest['config']['specialize']['steps'] == 2
    assert str(prior) in manifest['inputs']


def test_reconstruct_is_reproducible(cli, circle_file, tmp_path):
    prior = tmp_path / 'prior.ckpt'
    assert _train(cli, circle_file, prior) == 0
    for run in ('a', 'b'):
        (tmp_path / run).mkdir()
        code = cli(
            'reconstruct', circle_file,
            '-o', tmp_path / run / 'contour.obj',
            '--prior', prior,
            '--steps', 2,
            '--queries-per-step', 16,
            '--mc-res', 16,
            '--seed', 7,
            '--save-sdf', tmp_path / run / 'sdf.ckpt',
            *TINY_SAMPLING,
        )
        assert code == 0
    for name in ('contour.obj', 'sdf.ckpt'):
        a = (tmp_path / 'a' / name).read_bytes()
        assert a
        assert a == (tmp_path / 'b' / name).read_bytes()


def test_evaluate_mesh_against_itself(cli, tetra_file, tmp_path):
    out = tmp_path / 'report.txt'
    code = cli(
        'evaluate', tetra_file,
        '--reference', tetra_file,
        '--samples', 500,
        '--out', out,
    )
    assert code == 0
    lines = out.read_text(encoding='utf-8').splitlines()
    values = dict(line.split('=', 1) for line in lines if '=' in line)
    assert float(values['chamfer_l1']) == 0.0
    assert float(values['chamfer_l2']) == 0.0
    assert float(values['fscore_mu']) == 1.0
    assert (tmp_path / 'report.manifest.json').exists()


def test_evaluate_without_out_writes_nothing(cli, tetra_file, tmp_path):
    code = cli(
        'evaluate', tetra_file, '--reference', tetra_file, '--samples', 100
    )
    assert code == 0
    assert not list(tmp_path.glob('*.manifest.json'))
