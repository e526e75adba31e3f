"""Обратный проход по графу: градиенты, backward и градиент по входу."""

from __future__ import annotations

import logging
from typing import Iterable, Optional, Sequence

import numpy as np

from app.autodiff.node import (
    DiffNode,
    add,
    constant,
    set_grad_enabled,
    vjp,
)
from app.validate.exceptions import AutodiffError

logger = logging.getLogger(__name__)


def topological_order(root: DiffNode) -> list[DiffNode]:
    """Узлы, достижимые из `root`, в порядке «операнды раньше результата».

    Обход итеративный, чтобы глубокие графы не упирались в предел рекурсии.
    """
    order: list[DiffNode] = []
    visited: set[int] = set()
    stack: list[tuple[DiffNode, bool]] = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in visited:
            continue
        visited.add(id(node))
        stack.append((node, True))
        for parent in reversed(node.parents):
            if id(parent) not in visited:
                stack.append((parent, False))
    return order


def grad(
    output: DiffNode,
    inputs: Sequence[DiffNode],
    *,
    grad_output: Optional[DiffNode] = None,
    create_graph: bool = False,
) -> list[Optional[DiffNode]]:
    """Сопряжённые значения `output` по каждому из `inputs`.

    Распространение идёт только по узлам, лежащим на пути от входов к
    выходу; на самих входах обход останавливается. Сопряжённые значения
    нескольких путей складываются.

    Args:
        output: Узел, который дифференцируется.
        inputs: Узлы, по которым берутся производные.
        grad_output: Сопряжённое значение выхода (по умолчанию единицы).
        create_graph: Записывать граф обратного прохода, чтобы результат
            можно было дифференцировать ещё раз.

    Returns:
        list[Optional[DiffNode]]: Градиент для каждого входа или None,
        если вход не влияет на выход.
    """
    order = topological_order(output)
    targets = {id(node) for node in inputs}

    relevant: set[int] = set()
    for node in order:
        if id(node) in targets or any(
            id(p) in relevant for p in node.parents
        ):
            relevant.add(id(node))

    if id(output) not in relevant:
        return [None for _ in inputs]

    seed = grad_output
    if seed is None:
        seed = constant(np.ones_like(output.value))

    adjoints: dict[int, DiffNode] = {id(output): seed}
    with set_grad_enabled(create_graph):
        for node in reversed(order):
            g = adjoints.get(id(node))
            if g is None or id(node) in targets or not node.parents:
                continue
            for parent, pg in zip(node.parents, vjp(node, g)):
                if pg is None or id(parent) not in relevant:
                    continue
                prev = adjoints.get(id(parent))
                adjoints[id(parent)] = pg if prev is None else add(prev, pg)

    return [adjoints.get(id(node)) for node in inputs]


def zero_grad(nodes: Iterable[DiffNode]) -> None:
    """Сбросить накопленные сопряжённые значения."""
    for node in nodes:
        node.grad = None


def backward(root: DiffNode) -> list[DiffNode]:
    """Записать сопряжённые значения во все обучаемые листья графа.

    Перед каждым вызовом градиенты листьев должны быть сброшены через
    `zero_grad`: неявное накопление между вызовами запрещено.

    Args:
        root: Скалярный узел (обычно лосс).

    Returns:
        list[DiffNode]: Листья, получившие градиент.

    Raises:
        AutodiffError: Если корень не скаляр или у листа остался градиент
            предыдущего прохода.
    """
    if root.value.shape != ():
        raise AutodiffError(
            f'backward: корень должен быть скаляром, форма {root.shape}'
        )

    leaves = [
        node
        for node in topological_order(root)
        if node.requires_grad and not node.parents
    ]
    stale = [node.name or node.op for node in leaves if node.grad is not None]
    if stale:
        raise AutodiffError(
            'backward: градиенты не сброшены перед проходом (нужен '
            f'zero_grad): {", ".join(map(str, stale[:5]))}'
        )

    grads = grad(root, leaves, create_graph=False)
    for leaf, g in zip(leaves, grads):
        leaf.grad = (
            np.zeros_like(leaf.value) if g is None else g.value.copy()
        )
    return leaves


def input_gradient(output: DiffNode, input: DiffNode) -> DiffNode:
    """Градиент скалярного выхода по входу как дифференцируемый узел.

    Результат сохраняет зависимость от всех весов внутреннего прохода,
    поэтому лосс, содержащий этот градиент, обучает эти веса.

    Args:
        output: Скалярный узел.
        input: Узел-вход, созданный с `requires_grad=True`
            (см. `variable`) или вычисленный из обучаемых узлов.

    Returns:
        DiffNode: Градиент формы входа. Если вход не является предком
        выхода — нулевой узел с тегом `disconnected`.

    Raises:
        AutodiffError: Если выход не скаляр.
    """
    if output.value.shape != ():
        raise AutodiffError(
            'input_gradient: выход должен быть скаляром, '
            f'форма {output.shape}'
        )

    result = grad(output, [input], create_graph=True)[0]
    if result is None:
        logger.warning(
            'input_gradient: input %s is not an ancestor of output; '
            'returning zeros',
            input.shape,
        )
        return DiffNode(np.zeros_like(input.value), op='disconnected')
    return result
