"""Тесты примитивов графа."""

import numpy as np
import pytest
from app.autodiff import (
    add,
    backward,
    concat,
    constant,
    div,
    matmul,
    matvec,
    max_pool,
    mul,
    no_grad,
    norm,
    reduce_sum,
    relu,
    sub,
    variable,
)
from app.validate.exceptions import ShapeError


def test_add_componentwise():
    out = add(constant([1.0, 2.0]), constant([3.0, 4.0]))
    np.testing.assert_array_equal(out.value, [4.0, 6.0])


def test_relu_clamps_negative():
    out = relu(constant([-1.0, 2.0]))
    np.testing.assert_array_equal(out.value, [0.0, 2.0])


def test_matmul_identity_returns_vector():
    v = np.array([0.3, -1.5, 2.0])
    out = matmul(constant(np.eye(3)), constant(v))
    np.testing.assert_array_equal(out.value, v)
    np.testing.assert_array_equal(
        matvec(constant(np.eye(3)), constant(v)).value, v
    )


def test_scalar_broadcast_in_mul_and_div():
    x = constant([2.0, 4.0])
    np.testing.assert_array_equal(mul(x, 0.5).value, [1.0, 2.0])
    np.testing.assert_array_equal(div(x, 2.0).value, [1.0, 2.0])
    np.testing.assert_array_equal(sub(x, 1.0).value, [1.0, 3.0])


def test_shape_mismatch_names_both_shapes():
    with pytest.raises(ShapeError) as exc:
        add(constant([1.0, 2.0]), constant([1.0, 2.0, 3.0]))
    assert '(2,)' in str(exc.value)
    assert '(3,)' in str(exc.value)


def test_matmul_shape_mismatch():
    with pytest.raises(ShapeError):
        matmul(constant(np.ones((2, 3))), constant(np.ones((2, 3))))


def test_norm_of_vector():
    assert norm(constant([3.0, 4.0])).item() == pytest.approx(5.0)


def test_max_pool_takes_column_maximum():
    x = constant([[1.0, 5.0], [3.0, 2.0]])
    np.testing.assert_array_equal(max_pool(x).value, [[3.0, 5.0]])


def test_max_pool_tie_sends_gradient_to_first_row():
    x = variable([[2.0, 1.0], [2.0, 0.0]])
    backward(reduce_sum(max_pool(x)))
    np.testing.assert_array_equal(x.grad, [[1.0, 1.0], [0.0, 0.0]])


def test_max_pool_rejects_empty():
    with pytest.raises(ShapeError):
        max_pool(constant(np.zeros((0, 3))))


def test_concat_splits_gradient():
    a = variable([[1.0, 2.0]])
    b = variable([[3.0]])
    out = concat([a, b], axis=1)
    np.testing.assert_array_equal(out.value, [[1.0, 2.0, 3.0]])
    weights = constant([[1.0, 2.0, 3.0]])
    backward(reduce_sum(mul(out, weights)))
    np.testing.assert_array_equal(a.grad, [[1.0, 2.0]])
    np.testing.assert_array_equal(b.grad, [[3.0]])


def test_no_grad_does_not_record_graph():
    x = variable([1.0, 2.0])
    with no_grad():
        out = mul(x, x)
    assert not out.requires_grad
    assert out.is_leaf
