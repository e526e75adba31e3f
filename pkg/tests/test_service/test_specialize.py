"""Тесты специализации приора и глобальной SDF."""

import dataclasses

import numpy as np
import pytest
from app.core.seeding import make_rng
from app.geometry.shapes import sample_sphere
from app.models.config import MetricConfig, NetConfig, SpecializeConfig
from app.nets import QueryNet
from app.service.mesher import default_bounds, eval_sdf_grid, marching_cubes
from app.service.metrics import evaluate
from app.service.specialize import (
    derive_condition,
    global_sdf_eval,
    pulled_query_points,
    query_transport,
    specialization_loss,
    specialize,
)
from app.validate.exceptions import DataError, ShapeError, UsageError


def test_frozen_prior_is_untouched(square_cloud, trained_prior, spec_cfg):
    before = trained_prior.implicit.params.checksum()
    g = specialize(square_cloud, trained_prior, spec_cfg)
    assert g.implicit.params.checksum() == before
    assert trained_prior.implicit.params.checksum() == before
    assert len(g.loss_history) == spec_cfg.steps
    assert not any(p.node.requires_grad for p in g.implicit.params)


def test_joint_tune_updates_copy_only(
    square_cloud, trained_prior, spec_cfg
):
    before = trained_prior.implicit.params.checksum()
    cfg = dataclasses.replace(spec_cfg, mode='joint_tune')
    g = specialize(square_cloud, trained_prior, cfg)
    assert g.implicit.params.checksum() != before
    assert trained_prior.implicit.params.checksum() == before


def test_zero_steps_keeps_query_init(
    square_cloud, trained_prior, spec_cfg, net_cfg_2d
):
    cfg = dataclasses.replace(spec_cfg, steps=0)
    g = specialize(square_cloud, trained_prior, cfg)
    assert g.loss_history == []
    fresh = QueryNet(net_cfg_2d, make_rng(cfg.seed, 'init'))
    assert g.qnet.params.checksum() == fresh.params.checksum()


def test_specialization_is_reproducible(
    square_cloud, trained_prior, spec_cfg
):
    a = specialize(square_cloud, trained_prior, spec_cfg)
    b = specialize(square_cloud, trained_prior, spec_cfg)
    assert a.loss_history == b.loss_history
    q = make_rng(0, 'demo').uniform(-0.5, 0.5, size=(20, 2))
    assert global_sdf_eval(a, q).tobytes() == global_sdf_eval(b, q).tobytes()


def test_fixed_cond_requires_condition(
    square_cloud, trained_prior, spec_cfg
):
    cfg = dataclasses.replace(spec_cfg, mode='fixed_cond')
    with pytest.raises(UsageError):
        specialize(square_cloud, trained_prior, cfg)

    condition = derive_condition(trained_prior, square_cloud)
    assert condition.shape == (trained_prior.net_config.cond_dim,)
    g = specialize(square_cloud, trained_prior, cfg, condition=condition)
    assert len(g.loss_history) == cfg.steps


def test_prior_required_outside_no_prior(square_cloud, spec_cfg):
    with pytest.raises(UsageError):
        specialize(square_cloud, None, spec_cfg)


def test_no_prior_trains_from_scratch(square_cloud, spec_cfg, net_cfg_2d):
    cfg = dataclasses.replace(spec_cfg, mode='no_prior')
    g = specialize(square_cloud, None, cfg, net_cfg=net_cfg_2d)
    assert g.mode == 'no_prior'
    assert len(g.loss_history) == cfg.steps


def test_dimension_mismatch(sphere_cloud, trained_prior, spec_cfg):
    with pytest.raises(DataError):
        specialize(sphere_cloud, trained_prior, spec_cfg)


def test_global_sdf_shapes(square_cloud, trained_prior, spec_cfg):
    g = specialize(square_cloud, trained_prior, spec_cfg)
    q = make_rng(1, 'demo').uniform(-0.5, 0.5, size=(7, 2))

    values = global_sdf_eval(g, q)
    assert values.shape == (7,)
    assert np.all(np.isfinite(values))

    q_l, s = query_transport(g, q)
    assert q_l.shape == (7, 2)
    np.testing.assert_allclose(s, values)

    assert pulled_query_points(g, q).shape == (7, 2)
    assert global_sdf_eval(g, q[0]).shape == (1,)


def test_chunked_evaluation_matches(square_cloud, trained_prior, spec_cfg):
    g = specialize(square_cloud, trained_prior, spec_cfg)
    q = make_rng(2, 'demo').uniform(-0.5, 0.5, size=(25, 2))
    whole = g(q)
    g.chunk_size = 4
    np.testing.assert_allclose(g(q), whole, rtol=0, atol=1e-12)


def test_global_sdf_rejects_wrong_width(
    square_cloud, trained_prior, spec_cfg
):
    g = specialize(square_cloud, trained_prior, spec_cfg)
    with pytest.raises(ShapeError):
        g(np.zeros((3, 3)))


def test_specialization_loss_is_scalar(
    square_cloud, trained_prior, spec_cfg
):
    g = specialize(square_cloud, trained_prior, spec_cfg)
    loss = specialization_loss(g, square_cloud.points, square_cloud.points)
    assert loss.shape == ()
    assert loss.item() >= 0.0


@pytest.mark.slow
def test_sphere_reconstruction_without_prior():
    cloud = sample_sphere(2000, 1.0, make_rng(0, 'demo', 10))
    cfg = SpecializeConfig(mode='no_prior', steps=20_000, lr=1e-4)
    net_cfg = NetConfig(dim=3, cond_dim=64, hidden=128, encoder_widths=(64,))
    g = specialize(cloud, None, cfg, net_cfg=net_cfg)

    assert np.mean(np.abs(g(cloud.points))) < 0.01
    grid = eval_sdf_grid(g, default_bounds(cloud), 128)
    mesh = marching_cubes(grid)
    truth = sample_sphere(10_000, 1.0, make_rng(0, 'demo', 11))
    report = evaluate(mesh, truth, MetricConfig(sample_count=10_000))
    assert report.chamfer_l2 < 1e-3
