"""Тесты лосса притягивания и обучения приора."""

import dataclasses

import numpy as np
import pytest
from app.core.seeding import make_rng
from app.geometry.regions import prepare_regions
from app.geometry.shapes import sample_circle
from app.service.demo import demo_configs
from app.service.prior import (
    init_prior,
    pulled_points,
    pulling_loss,
    train_local_prior,
)
from app.validate.exceptions import DataError, EmptyCloudError, UsageError


def test_exact_pull_gives_zero_loss():
    loss = pulling_loss(
        np.array([[0.0, 0.0, 2.0]]),
        np.array([[0.0, 0.0, 1.0]]),
        np.array([[1.0]]),
        np.array([[0.0, 0.0, 1.0]]),
    )
    assert loss.item() == pytest.approx(0.0, abs=1e-20)


def test_gradient_is_normalized_before_pull():
    q = np.array([[0.0, 0.0, 2.0]])
    pulled = pulled_points(q, np.array([[0.5]]), np.array([[0.0, 0.0, 2.0]]))
    np.testing.assert_allclose(pulled.value, [[0.0, 0.0, 1.5]])

    loss = pulling_loss(
        q,
        np.array([[0.0, 0.0, 1.0]]),
        np.array([[0.5]]),
        np.array([[0.0, 0.0, 2.0]]),
    )
    assert loss.item() == pytest.approx(0.25)


def test_plain_loss_is_norm():
    loss = pulling_loss(
        np.array([[0.0, 0.0, 2.0]]),
        np.array([[0.0, 0.0, 1.0]]),
        np.array([[0.5]]),
        np.array([[0.0, 0.0, 2.0]]),
        loss_mode='plain',
    )
    assert loss.item() == pytest.approx(0.5)


def test_query_on_surface_with_zero_distance():
    q = np.array([[0.3, -0.1]])
    loss = pulling_loss(q, q, np.array([[0.0]]), np.array([[1.0, 0.0]]))
    assert loss.item() == 0.0


def test_zero_gradient_stays_finite():
    loss = pulling_loss(
        np.array([[1.0, 1.0]]),
        np.array([[0.0, 0.0]]),
        np.array([[0.2]]),
        np.array([[0.0, 0.0]]),
    )
    assert loss.item() == pytest.approx(2.0)


def test_unknown_loss_mode_rejected():
    with pytest.raises(UsageError):
        pulling_loss(
            np.zeros((1, 2)),
            np.zeros((1, 2)),
            np.zeros((1, 1)),
            np.ones((1, 2)),
            loss_mode='cubic',
        )


def test_zero_epochs_returns_initialization(
    circle_cloud, train_cfg, net_cfg_2d
):
    cfg = dataclasses.replace(train_cfg, epochs=0)
    prior = train_local_prior(
        prepare_regions(circle_cloud, cfg.grid), cfg, net_cfg_2d
    )
    encoder, implicit = init_prior(net_cfg_2d, cfg)
    assert prior.loss_history == []
    assert prior.encoder.params.checksum() == encoder.params.checksum()
    assert prior.implicit.params.checksum() == implicit.params.checksum()


def test_training_is_reproducible(circle_cloud, train_cfg, net_cfg_2d):
    regions = prepare_regions(circle_cloud, train_cfg.grid)
    a = train_local_prior(regions, train_cfg, net_cfg_2d)
    b = train_local_prior(regions, train_cfg, net_cfg_2d)
    assert a.loss_history == b.loss_history
    assert a.implicit.params.checksum() == b.implicit.params.checksum()
    assert a.encoder.params.checksum() == b.encoder.params.checksum()


def test_one_step_per_region_per_epoch(circle_cloud, train_cfg, net_cfg_2d):
    cfg = dataclasses.replace(train_cfg, grid=2)
    regions = prepare_regions(circle_cloud, cfg.grid)
    prior = train_local_prior(regions, cfg, net_cfg_2d)
    assert len(prior.loss_history) == cfg.epochs * len(regions)
    assert all(np.isfinite(prior.loss_history))


def test_training_changes_parameters(trained_prior, train_cfg, net_cfg_2d):
    _, implicit = init_prior(net_cfg_2d, train_cfg)
    assert trained_prior.implicit.params.checksum() != (
        implicit.params.checksum()
    )


def test_no_regions_rejected(train_cfg):
    with pytest.raises(EmptyCloudError):
        train_local_prior([], train_cfg)


def test_region_dimension_mismatch(sphere_cloud, train_cfg, net_cfg_2d):
    regions = prepare_regions(sphere_cloud, 1)
    with pytest.raises(DataError):
        train_local_prior(regions, train_cfg, net_cfg_2d)


@pytest.mark.slow
def test_loss_decreases_on_circle(circle_cloud, train_cfg, net_cfg_2d):
    cfg = dataclasses.replace(
        train_cfg, epochs=300, queries_per_region=64, lr=1e-3
    )
    prior = train_local_prior(
        prepare_regions(circle_cloud, cfg.grid), cfg, net_cfg_2d
    )
    history = np.asarray(prior.loss_history)
    assert history[-20:].mean() < history[:20].mean()


@pytest.mark.slow
def test_epoch_loss_drops_tenfold_on_unit_circle():
    net_cfg, train_cfg, _ = demo_configs(seed=0)
    cfg = dataclasses.replace(train_cfg, epochs=2000)
    circle = sample_circle(200, 1.0, make_rng(0, 'demo'))
    regions = prepare_regions(circle, cfg.grid)
    prior = train_local_prior(regions, cfg, net_cfg)

    per_epoch = np.asarray(prior.loss_history).reshape(
        cfg.epochs, len(regions)
    )
    first, last = per_epoch.mean(axis=1)[[0, -1]]
    assert last < 0.1 * first
