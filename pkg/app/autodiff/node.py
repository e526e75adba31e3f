"""Узлы динамического графа вычислений и примитивные операции.

Каждая операция создаёт новый `DiffNode` и хранит ссылки на операнды.
Функция обратного прохода (VJP) каждой операции записана через те же
операции над узлами, поэтому сопряжённые значения сами могут быть частью
графа. Это нужно для двойного обратного прохода: лосс содержит градиент
сети по входу, а оптимизируются веса этой сети.

Тензоры — массивы numpy float64. Поэлементные операции требуют равных
форм; единственное разрешённое расширение — скаляр с тензором.
"""

from __future__ import annotations

import contextlib
import logging
from typing import Any, Callable, Iterator, Optional, Sequence, Union

import numpy as np

from app.validate.exceptions import ShapeError

logger = logging.getLogger(__name__)

ArrayLike = Union['DiffNode', np.ndarray, float, int]

_GRAD_ENABLED = True
_RELU_TRACE: Optional[list[np.ndarray]] = None


def is_grad_enabled() -> bool:
    return _GRAD_ENABLED


@contextlib.contextmanager
def set_grad_enabled(enabled: bool) -> Iterator[None]:
    """Включить или выключить запись графа внутри блока."""
    global _GRAD_ENABLED
    previous = _GRAD_ENABLED
    _GRAD_ENABLED = bool(enabled)
    try:
        yield
    finally:
        _GRAD_ENABLED = previous


def no_grad() -> contextlib.AbstractContextManager:
    """Блок без записи графа (инференс, оценка на решётке)."""
    return set_grad_enabled(False)


@contextlib.contextmanager
def trace_relu_patterns() -> Iterator[list[np.ndarray]]:
    """Собирать маски активности ReLU, созданные внутри блока.

    Используется проверкой конечными разностями: если возмущение веса
    переключает хотя бы один ReLU, разностная оценка в этой точке
    некорректна и компонент исключается из сравнения.
    """
    global _RELU_TRACE
    previous = _RELU_TRACE
    _RELU_TRACE = []
    try:
        yield _RELU_TRACE
    finally:
        _RELU_TRACE = previous


class DiffNode:
    """Узел графа: значение, операция, операнды и накопленный градиент.

    Attributes:
        value: Плотный массив float64 (скаляр, вектор или матрица).
        op: Тег операции (`leaf` для листьев).
        parents: Операнды узла (пусто у листьев и у узлов вне графа).
        grad: Сопряжённое значение после `backward` или None.
        requires_grad: Узел зависит от обучаемого листа.
        name: Необязательное имя (для параметров).
    """

    __slots__ = (
        'value',
        'op',
        'parents',
        'grad',
        'requires_grad',
        'name',
        'ctx',
    )

    def __init__(
        self,
        value: Any,
        *,
        op: str = 'leaf',
        parents: Sequence[DiffNode] = (),
        requires_grad: bool = False,
        name: Optional[str] = None,
        ctx: Optional[dict[str, Any]] = None,
    ):
        self.value = np.asarray(value, dtype=np.float64)
        self.op = op
        self.parents = tuple(parents)
        self.grad: Optional[np.ndarray] = None
        self.requires_grad = requires_grad
        self.name = name
        self.ctx = ctx or {}

    @property
    def shape(self) -> tuple[int, ...]:
        return self.value.shape

    @property
    def ndim(self) -> int:
        return self.value.ndim

    @property
    def is_leaf(self) -> bool:
        return not self.parents

    def item(self) -> float:
        return float(self.value)

    def numpy(self) -> np.ndarray:
        return self.value

    def detach(self) -> DiffNode:
        return DiffNode(self.value)

    def summary(self) -> str:
        return f'op={self.op}, shape={self.shape}'

    def __repr__(self) -> str:
        return f'DiffNode({self.summary()})'

    def __add__(self, other: ArrayLike) -> DiffNode:
        return add(self, other)

    def __radd__(self, other: ArrayLike) -> DiffNode:
        return add(other, self)

    def __sub__(self, other: ArrayLike) -> DiffNode:
        return sub(self, other)

    def __rsub__(self, other: ArrayLike) -> DiffNode:
        return sub(other, self)

    def __mul__(self, other: ArrayLike) -> DiffNode:
        return mul(self, other)

    def __rmul__(self, other: ArrayLike) -> DiffNode:
        return mul(other, self)

    def __truediv__(self, other: ArrayLike) -> DiffNode:
        return div(self, other)

    def __rtruediv__(self, other: ArrayLike) -> DiffNode:
        return div(other, self)

    def __neg__(self) -> DiffNode:
        return neg(self)

    def __matmul__(self, other: ArrayLike) -> DiffNode:
        return matmul(self, other)

    @property
    def T(self) -> DiffNode:
        return transpose(self)

    def sum(self, axis: Optional[int] = None, keepdims: bool = False):
        return reduce_sum(self, axis=axis, keepdims=keepdims)


def as_node(x: ArrayLike) -> DiffNode:
    """Обернуть массив или число в константный узел."""
    return x if isinstance(x, DiffNode) else DiffNode(x)


def constant(x: Any) -> DiffNode:
    return DiffNode(x)


def variable(x: Any, name: Optional[str] = None) -> DiffNode:
    """Обучаемый лист (или вход, по которому берётся градиент)."""
    return DiffNode(x, requires_grad=True, name=name)


def zeros_like(node: DiffNode) -> DiffNode:
    return DiffNode(np.zeros_like(node.value))


# Таблица VJP: op -> f(узел, сопряжённое значение) -> сопряжённые операндов.
_VJP: dict[str, Callable[[DiffNode, DiffNode], tuple]] = {}


def _register(op: str):
    def decorator(fn):
        _VJP[op] = fn
        return fn

    return decorator


def vjp(node: DiffNode, adjoint: DiffNode) -> tuple[Optional[DiffNode], ...]:
    """Сопряжённые значения операндов узла для данного сопряжённого."""
    return _VJP[node.op](node, adjoint)


def _make(
    value: np.ndarray,
    op: str,
    parents: Sequence[DiffNode],
    **ctx: Any,
) -> DiffNode:
    track = _GRAD_ENABLED and any(p.requires_grad for p in parents)
    return DiffNode(
        value,
        op=op,
        parents=parents if track else (),
        requires_grad=track,
        ctx=ctx,
    )


def _pair(a: ArrayLike, b: ArrayLike, op: str) -> tuple[DiffNode, DiffNode]:
    a, b = as_node(a), as_node(b)
    if a.shape == b.shape:
        return a, b
    if a.ndim == 0:
        return broadcast_to(a, b.shape), b
    if b.ndim == 0:
        return a, broadcast_to(b, a.shape)
    raise ShapeError(f'{op}: несовместимые формы {a.shape} и {b.shape}')


# ---------- поэлементные операции ----------
def add(a: ArrayLike, b: ArrayLike) -> DiffNode:
    a, b = _pair(a, b, 'add')
    return _make(a.value + b.value, 'add', (a, b))


@_register('add')
def _vjp_add(node, g):
    return g, g


def sub(a: ArrayLike, b: ArrayLike) -> DiffNode:
    a, b = _pair(a, b, 'sub')
    return _make(a.value - b.value, 'sub', (a, b))


@_register('sub')
def _vjp_sub(node, g):
    return g, neg(g)


def neg(a: ArrayLike) -> DiffNode:
    a = as_node(a)
    return _make(-a.value, 'neg', (a,))


@_register('neg')
def _vjp_neg(node, g):
    return (neg(g),)


def mul(a: ArrayLike, b: ArrayLike) -> DiffNode:
    a, b = _pair(a, b, 'mul')
    return _make(a.value * b.value, 'mul', (a, b))


@_register('mul')
def _vjp_mul(node, g):
    a, b = node.parents
    return mul(g, b), mul(g, a)


def div(a: ArrayLike, b: ArrayLike) -> DiffNode:
    a, b = _pair(a, b, 'div')
    return _make(a.value / b.value, 'div', (a, b))


@_register('div')
def _vjp_div(node, g):
    a, b = node.parents
    return div(g, b), neg(div(mul(g, a), mul(b, b)))


def identity(a: ArrayLike) -> DiffNode:
    """Копия узла: отдельная вершина графа с тем же значением."""
    a = as_node(a)
    return _make(a.value.copy(), 'identity', (a,))


@_register('identity')
def _vjp_identity(node, g):
    return (g,)


def relu(a: ArrayLike) -> DiffNode:
    a = as_node(a)
    mask = a.value > 0
    if _RELU_TRACE is not None:
        _RELU_TRACE.append(mask.copy())
    return _make(np.where(mask, a.value, 0.0), 'relu', (a,), mask=mask)


@_register('relu')
def _vjp_relu(node, g):
    # Вторая производная ReLU равна нулю: маска не дифференцируется.
    return (mul(g, constant(node.ctx['mask'].astype(np.float64))),)


def sqrt(a: ArrayLike) -> DiffNode:
    a = as_node(a)
    return _make(np.sqrt(a.value), 'sqrt', (a,))


@_register('sqrt')
def _vjp_sqrt(node, g):
    return (div(g, mul(2.0, node)),)


# ---------- форма ----------
def reshape(a: ArrayLike, shape: Sequence[int]) -> DiffNode:
    a = as_node(a)
    return _make(a.value.reshape(tuple(shape)), 'reshape', (a,))


@_register('reshape')
def _vjp_reshape(node, g):
    return (reshape(g, node.parents[0].shape),)


def transpose(a: ArrayLike) -> DiffNode:
    a = as_node(a)
    if a.ndim != 2:
        raise ShapeError(f'transpose: ожидается матрица, форма {a.shape}')
    return _make(a.value.T.copy(), 'transpose', (a,))


@_register('transpose')
def _vjp_transpose(node, g):
    return (transpose(g),)


def broadcast_to(a: ArrayLike, shape: Sequence[int]) -> DiffNode:
    """Расширение скаляра или осей длины 1 до формы `shape`."""
    a = as_node(a)
    shape = tuple(shape)
    if a.ndim not in (0, len(shape)) or any(
        s not in (1, t) for s, t in zip(a.shape, shape)
    ):
        raise ShapeError(
            f'broadcast_to: несовместимые формы {a.shape} и {shape}'
        )
    value = np.broadcast_to(a.value, shape).copy()
    return _make(value, 'broadcast_to', (a,))


@_register('broadcast_to')
def _vjp_broadcast_to(node, g):
    src = node.parents[0].shape
    if len(src) == 0:
        return (reduce_sum(g),)
    out = g
    for axis, (s, t) in enumerate(zip(src, node.shape)):
        if s == 1 and t != 1:
            out = reduce_sum(out, axis=axis, keepdims=True)
    return (reshape(out, src),)


def reduce_sum(
    a: ArrayLike,
    axis: Optional[int] = None,
    keepdims: bool = False,
) -> DiffNode:
    a = as_node(a)
    value = np.sum(a.value, axis=axis, keepdims=keepdims)
    return _make(value, 'sum', (a,), axis=axis, keepdims=keepdims)


def _kept_shape(shape: tuple[int, ...], axis: Optional[int]):
    if axis is None:
        return (1,) * len(shape)
    axis = axis % len(shape)
    return tuple(1 if i == axis else n for i, n in enumerate(shape))


@_register('sum')
def _vjp_sum(node, g):
    src = node.parents[0].shape
    kept = _kept_shape(src, node.ctx['axis'])
    if not src:
        return (g,)
    return (broadcast_to(reshape(g, kept), src),)


def mean(a: ArrayLike, axis: Optional[int] = None) -> DiffNode:
    a = as_node(a)
    count = a.value.size if axis is None else a.shape[axis]
    return div(reduce_sum(a, axis=axis), float(count))


def concat(parts: Sequence[ArrayLike], axis: int = -1) -> DiffNode:
    nodes = [as_node(p) for p in parts]
    if not nodes:
        raise ShapeError('concat: пустой список операндов')
    ndim = nodes[0].ndim
    axis = axis % ndim
    for n in nodes[1:]:
        other = [s for i, s in enumerate(n.shape) if i != axis]
        first = [s for i, s in enumerate(nodes[0].shape) if i != axis]
        if n.ndim != ndim or other != first:
            raise ShapeError(
                f'concat: несовместимые формы {nodes[0].shape} и {n.shape}'
            )
    sizes = [n.shape[axis] for n in nodes]
    value = np.concatenate([n.value for n in nodes], axis=axis)
    return _make(value, 'concat', nodes, axis=axis, sizes=sizes)


@_register('concat')
def _vjp_concat(node, g):
    axis = node.ctx['axis']
    out = []
    start = 0
    for size in node.ctx['sizes']:
        out.append(slice_axis(g, axis, start, start + size))
        start += size
    return tuple(out)


def slice_axis(a: ArrayLike, axis: int, start: int, stop: int) -> DiffNode:
    """Срез [start, stop) вдоль оси."""
    a = as_node(a)
    axis = axis % a.ndim
    index = [slice(None)] * a.ndim
    index[axis] = slice(start, stop)
    value = a.value[tuple(index)].copy()
    return _make(value, 'slice', (a,), axis=axis, start=start, stop=stop)


@_register('slice')
def _vjp_slice(node, g):
    src = node.parents[0].shape
    axis, start, stop = (
        node.ctx['axis'],
        node.ctx['start'],
        node.ctx['stop'],
    )
    pieces = []
    if start > 0:
        shape = list(src)
        shape[axis] = start
        pieces.append(constant(np.zeros(shape)))
    pieces.append(g)
    if stop < src[axis]:
        shape = list(src)
        shape[axis] = src[axis] - stop
        pieces.append(constant(np.zeros(shape)))
    if len(pieces) == 1:
        return (g,)
    return (concat(pieces, axis=axis),)


# ---------- линейная алгебра ----------
def matmul(a: ArrayLike, b: ArrayLike) -> DiffNode:
    """Матричное произведение; векторы приводятся к матрицам."""
    a, b = as_node(a), as_node(b)
    if a.ndim == 1 and b.ndim == 1:
        return reshape(
            matmul(reshape(a, (1, -1)), reshape(b, (-1, 1))), ()
        )
    if b.ndim == 1:
        return reshape(matmul(a, reshape(b, (-1, 1))), (a.shape[0],))
    if a.ndim == 1:
        return reshape(matmul(reshape(a, (1, -1)), b), (b.shape[1],))
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ShapeError(
            f'matmul: несовместимые формы {a.shape} и {b.shape}'
        )
    return _make(a.value @ b.value, 'matmul', (a, b))


@_register('matmul')
def _vjp_matmul(node, g):
    a, b = node.parents
    return matmul(g, transpose(b)), matmul(transpose(a), g)


def matvec(m: ArrayLike, v: ArrayLike) -> DiffNode:
    m, v = as_node(m), as_node(v)
    if m.ndim != 2 or v.ndim != 1:
        raise ShapeError(
            f'matvec: ожидаются матрица и вектор, формы {m.shape} и {v.shape}'
        )
    return matmul(m, v)


def linear(x: ArrayLike, weight: DiffNode, bias: DiffNode) -> DiffNode:
    """Аффинное отображение батча: x (N, in) @ W (in, out) + b (out,)."""
    x = as_node(x)
    out = matmul(x, weight)
    b = broadcast_to(reshape(bias, (1, bias.shape[0])), out.shape)
    return add(out, b)


def norm(
    a: ArrayLike,
    axis: Optional[int] = None,
    keepdims: bool = False,
) -> DiffNode:
    """Евклидова норма; при нулевом векторе производная равна нулю."""
    a = as_node(a)
    value = np.sqrt(np.sum(a.value * a.value, axis=axis, keepdims=keepdims))
    return _make(value, 'norm', (a,), axis=axis, keepdims=keepdims)


@_register('norm')
def _vjp_norm(node, g):
    x = node.parents[0]
    if not x.shape:
        kept = ()
    else:
        kept = _kept_shape(x.shape, node.ctx['axis'])
    out = reshape(node, kept)
    # В нуле знаменатель заменяется на 1, числитель там и так нулевой.
    safe = constant(np.where(out.value == 0, 1.0, 0.0))
    denom = broadcast_to(add(out, safe), x.shape)
    gk = broadcast_to(reshape(g, kept), x.shape)
    return (mul(gk, div(x, denom)),)


def max_pool(a: ArrayLike) -> DiffNode:
    """Максимум по оси 0 матрицы (N, C) с сохранением оси: (1, C).

    При равных значениях градиент получает первая по порядку строка.
    """
    a = as_node(a)
    if a.ndim != 2 or a.shape[0] == 0:
        raise ShapeError(f'max_pool: ожидается непустая (N, C), {a.shape}')
    arg = np.argmax(a.value, axis=0)
    mask = np.zeros_like(a.value)
    mask[arg, np.arange(a.shape[1])] = 1.0
    value = a.value[arg, np.arange(a.shape[1])][None, :]
    return _make(value, 'max_pool', (a,), mask=mask)


@_register('max_pool')
def _vjp_max_pool(node, g):
    x = node.parents[0]
    return (mul(broadcast_to(g, x.shape), constant(node.ctx['mask'])),)
