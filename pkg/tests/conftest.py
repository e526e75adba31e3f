"""Фикстуры и общие настройки тестов."""

import logging

import numpy as np
import pytest
from app.core.seeding import make_rng
from app.geometry.regions import prepare_regions
from app.geometry.shapes import sample_circle, sample_sphere, sample_square
from app.models.config import NetConfig, SpecializeConfig, TrainConfig
from app.service.prior import train_local_prior


@pytest.fixture(autouse=True)
def isolated_state(monkeypatch, tmp_path):
    """Каталог состояния и хендлеры логов не протекают между тестами."""
    monkeypatch.setenv('XDG_STATE_HOME', str(tmp_path / 'state'))
    monkeypatch.setenv('MPLBACKEND', 'Agg')
    root = logging.getLogger()
    handlers = list(root.handlers)
    level = root.level

    yield

    for handler in list(root.handlers):
        if handler not in handlers:
            root.removeHandler(handler)
            handler.close()
    for handler in handlers:
        if handler not in root.handlers:
            root.addHandler(handler)
    root.setLevel(level)


@pytest.fixture
def rng():
    return make_rng(0, 'demo')


@pytest.fixture
def net_cfg_2d():
    return NetConfig(
        dim=2,
        cond_dim=8,
        hidden=16,
        implicit_depth=3,
        skip_layer=1,
        query_depth=2,
        encoder_widths=(8,),
    )


@pytest.fixture
def net_cfg_3d():
    return NetConfig(
        dim=3,
        cond_dim=8,
        hidden=16,
        implicit_depth=3,
        skip_layer=1,
        query_depth=2,
        encoder_widths=(8,),
    )


@pytest.fixture
def train_cfg():
    return TrainConfig(
        epochs=2,
        grid=1,
        queries_per_region=32,
        per_point=4,
        k_sigma=3,
        sigma_mode='stddev',
        lr=1e-3,
        log_every=1,
    )


@pytest.fixture
def spec_cfg():
    return SpecializeConfig(
        steps=3,
        queries_per_step=32,
        per_point=4,
        k_sigma=3,
        sigma_mode='stddev',
        lr=1e-3,
        log_every=1,
    )


@pytest.fixture
def circle_cloud(rng):
    return sample_circle(64, 0.5, rng)


@pytest.fixture
def square_cloud():
    return sample_square(64, 0.35, make_rng(0, 'demo', 1))


@pytest.fixture
def sphere_cloud():
    return sample_sphere(200, 0.4, make_rng(0, 'demo', 2))


@pytest.fixture
def trained_prior(circle_cloud, train_cfg, net_cfg_2d):
    regions = prepare_regions(circle_cloud, train_cfg.grid)
    return train_local_prior(regions, train_cfg, net_cfg_2d)


@pytest.fixture
def unit_square_points():
    return np.array(
        [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]],
        dtype=np.float64,
    )
