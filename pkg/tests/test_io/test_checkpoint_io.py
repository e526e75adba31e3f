"""Тесты формата чекпоинтов."""

import struct

import numpy as np
import pytest
from app.core.seeding import make_rng
from app.io import load_global_sdf, load_prior, save_global_sdf, save_prior
from app.io.checkpoint import (
    CheckpointFile,
    decode_checkpoint,
    encode_checkpoint,
)
from app.service.specialize import specialize
from app.validate.exceptions import CheckpointError


@pytest.fixture
def global_sdf(square_cloud, trained_prior, spec_cfg):
    return specialize(square_cloud, trained_prior, spec_cfg)


def _blob():
    ckpt = CheckpointFile(
        {'kind': 'test', 'note': 'ok'},
        {'b': np.ones((2, 3)), 'a': np.arange(4.0)},
    )
    return encode_checkpoint(ckpt)


def test_encode_is_deterministic():
    assert _blob() == _blob()
    assert _blob()[:4] == b'PCPR'


def test_decode_restores_tensors():
    ckpt = decode_checkpoint(_blob())
    assert ckpt.meta == {'kind': 'test', 'note': 'ok'}
    assert sorted(ckpt.tensors) == ['a', 'b']
    np.testing.assert_array_equal(ckpt.tensors['b'], np.ones((2, 3)))
    assert ckpt.tensors['a'].dtype == np.float64


def test_bad_magic():
    blob = b'XXXX' + _blob()[4:]
    with pytest.raises(CheckpointError, match='bad magic'):
        decode_checkpoint(blob)
    with pytest.raises(CheckpointError, match='bad magic'):
        decode_checkpoint(b'PC')


def test_unsupported_version():
    blob = bytearray(_blob())
    struct.pack_into('<I', blob, 4, 2)
    with pytest.raises(CheckpointError, match='unsupported version'):
        decode_checkpoint(bytes(blob))


def test_truncated_payload():
    blob = _blob()
    with pytest.raises(CheckpointError, match='payload shorter'):
        decode_checkpoint(blob[:-4])


def test_truncated_header():
    with pytest.raises(CheckpointError, match='truncated header'):
        decode_checkpoint(_blob()[:20])


def test_global_sdf_round_trip(tmp_path, global_sdf):
    path = save_global_sdf(global_sdf, tmp_path / 'sdf.ckpt')
    loaded = load_global_sdf(path)
    assert loaded.mode == global_sdf.mode

    for params, original in (
        (loaded.qnet.params, global_sdf.qnet.params),
        (loaded.implicit.params, global_sdf.implicit.params),
    ):
        saved = original.state_dict()
        for name, value in params.state_dict().items():
            np.testing.assert_allclose(value, saved[name], rtol=1e-6)

    q = make_rng(0, 'demo').uniform(-0.5, 0.5, size=(16, 2))
    np.testing.assert_allclose(
        loaded(q), global_sdf(q), rtol=1e-4, atol=1e-6
    )


def test_save_is_byte_stable(tmp_path, global_sdf):
    a = save_global_sdf(global_sdf, tmp_path / 'a.ckpt').read_bytes()
    b = save_global_sdf(global_sdf, tmp_path / 'b.ckpt').read_bytes()
    assert a == b


def test_prior_round_trip(tmp_path, trained_prior):
    path = save_prior(trained_prior, tmp_path / 'prior.ckpt')
    loaded = load_prior(path)
    assert loaded.net_config == trained_prior.net_config
    assert loaded.train_config == trained_prior.train_config
    saved = trained_prior.implicit.params.state_dict()
    for name, value in loaded.implicit.params.state_dict().items():
        np.testing.assert_allclose(value, saved[name], rtol=1e-6)


def test_wrong_kind_rejected(tmp_path, trained_prior):
    path = save_prior(trained_prior, tmp_path / 'prior.ckpt')
    with pytest.raises(CheckpointError):
        load_global_sdf(path)


def test_missing_file(tmp_path):
    with pytest.raises(CheckpointError):
        load_prior(tmp_path / 'absent.ckpt')
