"""Движок обратного автодифференцирования над массивами numpy."""

from .grad import backward, grad, input_gradient, zero_grad  # noqa
from .node import (  # noqa
    DiffNode,
    add,
    broadcast_to,
    concat,
    constant,
    div,
    identity,
    linear,
    matmul,
    matvec,
    max_pool,
    mean,
    mul,
    neg,
    no_grad,
    norm,
    reduce_sum,
    relu,
    reshape,
    slice_axis,
    sqrt,
    sub,
    transpose,
    variable,
)
from .optim import Adam, Parameter, ParameterSet, adam_step  # noqa
