"""Тесты сверки градиентов с конечными разностями."""

import pytest
from app.service.gradcheck import relative_error, run_grad_check


def test_relative_error():
    assert relative_error([1.0, 2.0], [1.0, 2.0]) == 0.0
    assert relative_error([1.0, 2.0], [1.0, 1.0]) == pytest.approx(0.5)
    assert relative_error([], []) == 0.0
    assert relative_error([0.0], [0.0]) == 0.0


def test_small_grad_check_passes():
    results = run_grad_check(seed=0, first_order=5, double_backprop=2)
    assert [r.suite for r in results] == ['first_order', 'double_backprop']
    for result in results:
        assert result.passed, result.summary()
        assert result.checked > 0


def test_grad_check_is_reproducible():
    a = run_grad_check(seed=3, first_order=2, double_backprop=0, layers=2)
    b = run_grad_check(seed=3, first_order=2, double_backprop=0, layers=2)
    assert a == b


def test_empty_suite_skipped():
    results = run_grad_check(first_order=0, double_backprop=1)
    assert [r.suite for r in results] == ['double_backprop']


@pytest.mark.slow
def test_full_grad_check_passes():
    for result in run_grad_check(seed=0):
        assert result.passed, result.summary()
