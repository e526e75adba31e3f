"""Параметры сетей и оптимизатор Adam."""

from __future__ import annotations

import hashlib
import logging
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Optional

import numpy as np

from app.autodiff.node import DiffNode
from app.core.constants import DEFAULT_BETAS, DEFAULT_EPS, DEFAULT_LR
from app.validate.exceptions import AutodiffError, ShapeError, UsageError

logger = logging.getLogger(__name__)


@dataclass(eq=False)
class Parameter:
    """Обучаемый тензор и состояние оптимизатора для него.

    Attributes:
        name: Уникальное имя в наборе параметров.
        node: Лист графа с `requires_grad=True`.
        m: Первый момент Adam.
        v: Второй момент Adam.
        t: Число выполненных шагов Adam для этого параметра.
    """

    name: str
    node: DiffNode
    m: np.ndarray = field(init=False, repr=False)
    v: np.ndarray = field(init=False, repr=False)
    t: int = 0

    def __post_init__(self):
        self.node.requires_grad = True
        self.node.name = self.name
        self.reset_state()

    @property
    def value(self) -> np.ndarray:
        return self.node.value

    @property
    def grad(self) -> Optional[np.ndarray]:
        return self.node.grad

    @property
    def shape(self) -> tuple[int, ...]:
        return self.node.shape

    def reset_state(self) -> None:
        self.m = np.zeros_like(self.node.value)
        self.v = np.zeros_like(self.node.value)
        self.t = 0


class ParameterSet:
    """Упорядоченный набор параметров с уникальными именами."""

    def __init__(self, params: Iterable[Parameter] = ()):
        self._params: dict[str, Parameter] = {}
        for p in params:
            self._insert(p)

    def _insert(self, param: Parameter) -> Parameter:
        if param.name in self._params:
            raise UsageError(f'Параметр {param.name!r} уже существует.')
        self._params[param.name] = param
        return param

    def add(self, name: str, value: np.ndarray) -> Parameter:
        return self._insert(Parameter(name, DiffNode(value)))

    def __iter__(self) -> Iterator[Parameter]:
        return iter(self._params.values())

    def __len__(self) -> int:
        return len(self._params)

    def __getitem__(self, name: str) -> Parameter:
        return self._params[name]

    def __contains__(self, name: str) -> bool:
        return name in self._params

    def names(self) -> list[str]:
        return list(self._params)

    def merged(self, other: ParameterSet) -> ParameterSet:
        return ParameterSet([*self, *other])

    def zero_grad(self) -> None:
        for p in self:
            p.node.grad = None

    def set_trainable(self, trainable: bool) -> None:
        """Заморозить или разморозить параметры.

        Замороженные параметры не записываются в граф как обучаемые листья
        и не получают градиентов.
        """
        for p in self:
            p.node.requires_grad = trainable
            p.node.grad = None

    def count(self) -> int:
        return int(sum(p.value.size for p in self))

    def state_dict(self) -> dict[str, np.ndarray]:
        return {name: p.value.copy() for name, p in self._params.items()}

    def load_state_dict(
        self,
        state: Mapping[str, np.ndarray],
        *,
        strict: bool = True,
    ) -> None:
        """Загрузить значения параметров по именам.

        Raises:
            ShapeError: Если форма тензора не совпадает.
            UsageError: Если в strict-режиме наборы имён различаются.
        """
        if strict:
            missing = sorted(set(self._params) - set(state))
            extra = sorted(set(state) - set(self._params))
            if missing or extra:
                raise UsageError(
                    f'Несовпадение параметров: нет {missing}, лишние {extra}'
                )
        for name, value in state.items():
            if name not in self._params:
                continue
            param = self._params[name]
            arr = np.asarray(value, dtype=np.float64)
            if arr.shape != param.shape:
                raise ShapeError(
                    f'{name}: форма {arr.shape} вместо {param.shape}'
                )
            param.node.value = arr.copy()
            param.node.grad = None
            param.reset_state()

    def checksum(self) -> str:
        """SHA-256 значений всех параметров в порядке имён."""
        digest = hashlib.sha256()
        for name in sorted(self._params):
            value = np.ascontiguousarray(self._params[name].value)
            digest.update(name.encode('utf-8'))
            digest.update(str(value.shape).encode('ascii'))
            digest.update(value.tobytes())
        return digest.hexdigest()


def adam_step(
    params: Iterable[Parameter],
    lr: float = DEFAULT_LR,
    betas: tuple[float, float] = DEFAULT_BETAS,
    eps: float = DEFAULT_EPS,
    *,
    strict: bool = False,
) -> int:
    """Один шаг Adam с коррекцией смещения; градиенты затем сбрасываются.

    Args:
        params: Параметры со свежими градиентами.
        lr: Шаг обучения.
        betas: Коэффициенты затухания моментов.
        eps: Добавка в знаменатель.
        strict: Ошибка вместо предупреждения при отсутствии градиента.

    Returns:
        int: Сколько параметров обновлено.

    Raises:
        AutodiffError: Если в strict-режиме у параметра нет градиента.
    """
    beta1, beta2 = betas
    params = list(params)
    missing = [p.name for p in params if p.node.grad is None]
    if missing:
        if strict:
            raise AutodiffError(f'Нет градиента у параметров: {missing}')
        logger.warning('Adam: skipping parameters without grad: %s', missing)

    updated = 0
    for p in params:
        g = p.node.grad
        if g is None:
            continue
        p.t += 1
        p.m = beta1 * p.m + (1.0 - beta1) * g
        p.v = beta2 * p.v + (1.0 - beta2) * g * g
        m_hat = p.m / (1.0 - beta1 ** p.t)
        v_hat = p.v / (1.0 - beta2 ** p.t)
        p.node.value = p.node.value - lr * m_hat / (np.sqrt(v_hat) + eps)
        updated += 1

    for p in params:
        p.node.grad = None
    return updated


class Adam:
    """Оптимизатор Adam над фиксированным набором параметров."""

    def __init__(
        self,
        params: Iterable[Parameter],
        lr: float = DEFAULT_LR,
        betas: tuple[float, float] = DEFAULT_BETAS,
        eps: float = DEFAULT_EPS,
        *,
        strict: bool = False,
    ):
        self.params = list(params)
        self.lr = lr
        self.betas = (float(betas[0]), float(betas[1]))
        self.eps = eps
        self.strict = strict
        self.steps = 0

    def zero_grad(self) -> None:
        for p in self.params:
            p.node.grad = None

    def step(self) -> int:
        self.steps += 1
        return adam_step(
            self.params,
            self.lr,
            self.betas,
            self.eps,
            strict=self.strict,
        )
