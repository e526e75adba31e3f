"""Сверка градиентов движка с центральными конечными разностями.

Две серии:
    first_order: случайные MLP, лосс — взвешенная сумма выходов.
    double_backprop: лосс притягивания, содержащий градиент SDF по
        входу; проверяются производные по весам неявной сети и сети
        запросов.

Компонент веса исключается из сравнения, если возмущение ±h меняет
маску хотя бы одного ReLU: в изломе разностная оценка не определена.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from app.autodiff.grad import backward
from app.autodiff.node import (
    DiffNode,
    constant,
    mul,
    reduce_sum,
    trace_relu_patterns,
)
from app.autodiff.optim import Parameter, ParameterSet
from app.core.constants import (
    DOUBLE_BACKPROP_TOLERANCE,
    FD_STEP,
    FIRST_ORDER_TOLERANCE,
)
from app.core.seeding import make_rng
from app.logging import logged
from app.models.config import NetConfig
from app.nets.implicit import ImplicitNet, sdf_eval_with_grad
from app.nets.layers import MLP
from app.nets.query import QueryNet
from app.service.prior import pulling_loss
from app.service.specialize import GlobalSdf, specialization_loss
from app.validate.validators import validate_positive_int

logger = logging.getLogger(__name__)

TINY = 1e-300
MAX_ENTRIES = 6
DEFAULT_MAX_WIDTH = 32
MAX_LAYERS = 5

LossFn = Callable[[], DiffNode]


@dataclass(frozen=True)
class GradCheckResult:
    """Итог одной серии проверок."""

    suite: str
    instances: int
    max_rel_error: float
    tolerance: float
    checked: int
    excluded: int

    @property
    def passed(self) -> bool:
        return self.max_rel_error < self.tolerance

    def summary(self) -> str:
        return (
            f'{self.suite}: max_rel_error={self.max_rel_error:.3e} '
            f'(tol {self.tolerance:g}), checked={self.checked}'
        )


def relative_error(a, b) -> float:
    """max|a − b| / max(max|a|, max|b|)."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.size == 0:
        return 0.0
    scale = max(np.abs(a).max(), np.abs(b).max(), TINY)
    return float(np.abs(a - b).max() / scale)


def _evaluate(loss_fn: LossFn) -> tuple[float, list[np.ndarray]]:
    with trace_relu_patterns() as masks:
        value = loss_fn().item()
    return value, masks


def _same_masks(a: list[np.ndarray], b: list[np.ndarray]) -> bool:
    return len(a) == len(b) and all(
        np.array_equal(x, y) for x, y in zip(a, b)
    )


def _central_difference(
    loss_fn: LossFn,
    param: Parameter,
    entry: int,
    step: float,
    base_masks: list[np.ndarray],
) -> tuple[float, bool]:
    """Разностная производная по одной компоненте и признак излома."""
    original = param.node.value
    values = []
    kinked = False
    for sign in (1.0, -1.0):
        shifted = original.copy()
        shifted.reshape(-1)[entry] += sign * step
        param.node.value = shifted
        value, masks = _evaluate(loss_fn)
        values.append(value)
        kinked = kinked or not _same_masks(base_masks, masks)
    param.node.value = original
    return (values[0] - values[1]) / (2.0 * step), kinked


def check_instance(
    loss_fn: LossFn,
    params: ParameterSet,
    rng: np.random.Generator,
    step: float = FD_STEP,
    max_entries: int = MAX_ENTRIES,
) -> tuple[np.ndarray, np.ndarray, int]:
    """Аналитические и разностные производные по выборке компонент весов.

    Returns:
        tuple: Аналитические значения, разностные значения и число
            исключённых компонент.
    """
    params.zero_grad()
    backward(loss_fn())
    analytic = {p.name: p.grad.reshape(-1).copy() for p in params}
    params.zero_grad()
    _, base_masks = _evaluate(loss_fn)

    got, expected = [], []
    excluded = 0
    for p in params:
        size = p.node.value.size
        picks = rng.choice(size, size=min(max_entries, size), replace=False)
        for entry in picks:
            fd, kinked = _central_difference(
                loss_fn, p, int(entry), step, base_masks
            )
            if kinked:
                excluded += 1
                continue
            got.append(analytic[p.name][entry])
            expected.append(fd)
    return np.array(got), np.array(expected), excluded


def _randomize_biases(params: ParameterSet, rng: np.random.Generator):
    for p in params:
        if p.name.endswith('.bias'):
            p.node.value = rng.normal(0.0, 0.1, size=p.shape)


def first_order_instance(
    rng: np.random.Generator,
    layers: int,
    max_width: int,
) -> tuple[LossFn, ParameterSet]:
    """Случайный MLP и лосс Σ c ⊙ mlp(x)."""
    d_in = int(rng.integers(1, 5))
    d_out = int(rng.integers(1, 4))
    hidden = [int(rng.integers(2, max_width + 1)) for _ in range(layers - 1)]
    params = ParameterSet()
    mlp = MLP(params, 'mlp', [d_in, *hidden, d_out], rng)
    _randomize_biases(params, rng)

    x = constant(rng.normal(size=(8, d_in)))
    c = constant(rng.normal(size=(8, d_out)))

    def loss_fn() -> DiffNode:
        return reduce_sum(mul(mlp(x), c))

    return loss_fn, params


def _small_net_config(dim: int) -> NetConfig:
    return NetConfig(
        dim=dim,
        cond_dim=4,
        hidden=12,
        implicit_depth=3,
        skip_layer=1,
        query_depth=2,
        encoder_widths=(8,),
        query_init_scale=1.0,
    )


def double_backprop_instance(
    rng: np.random.Generator,
    through_query_net: bool,
) -> tuple[LossFn, ParameterSet]:
    """Лосс притягивания по весам неявной сети или сети запросов."""
    dim = int(rng.integers(2, 4))
    cfg = _small_net_config(dim)
    implicit = ImplicitNet(cfg, rng)
    _randomize_biases(implicit.params, rng)
    q = 0.5 * rng.normal(size=(6, dim))
    nn_q = 0.5 * rng.normal(size=(6, dim))

    if through_query_net:
        qnet = QueryNet(cfg, rng)
        _randomize_biases(qnet.params, rng)
        implicit.params.set_trainable(False)
        g = GlobalSdf(implicit, qnet, 'full')

        def loss_fn() -> DiffNode:
            return specialization_loss(g, q, nn_q)

        return loss_fn, qnet.params

    f = constant(rng.normal(size=(1, cfg.cond_dim)))

    def prior_loss() -> DiffNode:
        s, grad_s = sdf_eval_with_grad(implicit, q, f)
        return pulling_loss(constant(q), constant(nn_q), s, grad_s)

    return prior_loss, implicit.params


def _run_suite(
    suite: str,
    instances: int,
    tolerance: float,
    build: Callable[[np.random.Generator, int], tuple],
    seed: int,
    stream_id: int,
) -> GradCheckResult:
    worst = 0.0
    checked = 0
    excluded = 0
    for i in range(instances):
        rng = make_rng(seed, 'init', stream_id, i)
        loss_fn, params = build(rng, i)
        got, expected, skipped = check_instance(loss_fn, params, rng)
        worst = max(worst, relative_error(got, expected))
        checked += len(got)
        excluded += skipped
    result = GradCheckResult(
        suite, instances, worst, tolerance, checked, excluded
    )
    logger.info('Grad check %s', result.summary())
    return result


@logged(level=logging.INFO)
def run_grad_check(
    seed: int = 0,
    first_order: int = 100,
    double_backprop: int = 20,
    layers: Optional[int] = None,
    max_width: int = DEFAULT_MAX_WIDTH,
) -> list[GradCheckResult]:
    """Запустить обе серии проверок.

    Args:
        seed: Общий seed.
        first_order: Число случайных MLP.
        double_backprop: Число экземпляров лосса притягивания.
        layers: Фиксированное число слоёв MLP (иначе от 1 до 5).
        max_width: Наибольшая ширина скрытого слоя.

    Returns:
        list[GradCheckResult]: Результаты first_order и double_backprop;
            серия с нулём экземпляров пропускается.
    """
    if layers is not None:
        validate_positive_int(layers, 'layers')
    validate_positive_int(max_width, 'max_width')
    if max_width < 2:
        max_width = 2

    def first(rng: np.random.Generator, _: int):
        depth = layers or int(rng.integers(1, MAX_LAYERS + 1))
        return first_order_instance(rng, depth, max_width)

    def double(rng: np.random.Generator, i: int):
        return double_backprop_instance(rng, through_query_net=bool(i % 2))

    results = []
    if first_order:
        results.append(
            _run_suite(
                'first_order',
                first_order,
                FIRST_ORDER_TOLERANCE,
                first,
                seed,
                1,
            )
        )
    if double_backprop:
        results.append(
            _run_suite(
                'double_backprop',
                double_backprop,
                DOUBLE_BACKPROP_TOLERANCE,
                double,
                seed,
                2,
            )
        )
    return results
