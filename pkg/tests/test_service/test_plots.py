"""Тесты графиков."""

import numpy as np
from app.core.seeding import make_rng
from app.models.mesh import ContourSet
from app.service.plots import plot_loss_curve, plot_query_transport

PNG_MAGIC = b'\x89PNG'


def test_loss_curve_written(tmp_path):
    path = plot_loss_curve([1.0, 0.5, 0.25], tmp_path / 'plots' / 'loss.png')
    assert path.read_bytes()[:4] == PNG_MAGIC


def test_loss_curve_accepts_empty_history(tmp_path):
    path = plot_loss_curve([], tmp_path / 'empty.png')
    assert path.exists()


def test_query_transport_with_contour(tmp_path):
    queries = make_rng(0, 'demo').uniform(-0.5, 0.5, size=(50, 2))
    contour = ContourSet(
        np.array([[0.0, 0.0], [0.2, 0.0], [0.2, 0.2]]),
        (np.arange(3),),
        (True,),
    )
    path = plot_query_transport(
        queries, queries * 0.5, tmp_path / 'queries.png', contour
    )
    assert path.read_bytes()[:4] == PNG_MAGIC
