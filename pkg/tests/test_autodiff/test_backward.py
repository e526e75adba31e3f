"""Тесты обратного прохода и градиента по входу."""

import numpy as np
import pytest
from app.autodiff import (
    backward,
    constant,
    grad,
    input_gradient,
    mul,
    norm,
    reduce_sum,
    relu,
    variable,
    zero_grad,
)
from app.validate.exceptions import AutodiffError


def test_product_rule():
    w = variable(3.0)
    root = mul(w, constant(2.0))
    backward(root)
    assert float(w.grad) == pytest.approx(2.0)


def test_norm_gradient():
    v = variable([3.0, 4.0])
    backward(norm(v))
    np.testing.assert_allclose(v.grad, [0.6, 0.8])


def test_norm_gradient_at_zero_is_zero():
    v = variable([0.0, 0.0])
    backward(norm(v))
    np.testing.assert_array_equal(v.grad, [0.0, 0.0])


def test_fan_out_adjoints_are_summed():
    x = variable(2.0)
    root = mul(x, x)
    backward(root)
    assert float(x.grad) == pytest.approx(4.0)


def test_non_scalar_root_rejected():
    x = variable([1.0, 2.0])
    with pytest.raises(AutodiffError):
        backward(mul(x, x))


def test_stale_gradient_rejected_until_zero_grad():
    x = variable([1.0, 2.0])
    backward(reduce_sum(x))
    with pytest.raises(AutodiffError):
        backward(reduce_sum(x))
    zero_grad([x])
    backward(reduce_sum(x))
    np.testing.assert_array_equal(x.grad, [1.0, 1.0])


def test_grad_returns_none_for_unrelated_input():
    x = variable(1.0)
    y = variable(2.0)
    assert grad(mul(x, 3.0), [y]) == [None]


def test_input_gradient_of_squared_norm():
    q = variable([1.0, 2.0, 3.0])
    g = input_gradient(reduce_sum(mul(q, q)), q)
    np.testing.assert_allclose(g.value, [2.0, 4.0, 6.0])


def test_input_gradient_of_constant_is_zero():
    q = variable([1.0, 2.0, 3.0])
    g = input_gradient(reduce_sum(constant([5.0, 6.0])), q)
    np.testing.assert_array_equal(g.value, [0.0, 0.0, 0.0])
    assert g.op == 'disconnected'


def test_input_gradient_non_scalar_rejected():
    q = variable([1.0, 2.0])
    with pytest.raises(AutodiffError):
        input_gradient(mul(q, q), q)


def test_double_backprop_through_input_gradient():
    w = variable(1.5)
    q = variable([1.0, 2.0, 3.0])
    s = reduce_sum(mul(w, mul(q, q)))
    grad_q = input_gradient(s, q)
    np.testing.assert_allclose(grad_q.value, [3.0, 6.0, 9.0])

    backward(reduce_sum(grad_q))
    # d/dw Σ 2·w·q = 2·Σq
    assert float(w.grad) == pytest.approx(12.0)


def test_relu_second_derivative_is_zero():
    w = variable(2.0)
    q = variable([1.0, -1.0])
    s = reduce_sum(relu(mul(w, q)))
    grad_q = input_gradient(s, q)
    np.testing.assert_allclose(grad_q.value, [2.0, 0.0])
    backward(reduce_sum(mul(grad_q, grad_q)))
    # (∂s/∂q₁)² = w², d/dw = 2w
    assert float(w.grad) == pytest.approx(4.0)
