"""CLI-команда самопроверки градиентов."""

from __future__ import annotations

import argparse

from app.cli.common import ArgSpec, add_args, print_table
from app.core.constants import EXIT_NUMERICAL, EXIT_OK
from app.service.gradcheck import DEFAULT_MAX_WIDTH, run_grad_check

GRAD_CHECK_ARGS = [
    ArgSpec(('--seed',), {'type': int, 'default': 0, 'help': 'Seed (0)'}),
    ArgSpec(
        ('--layers',),
        {
            'type': int,
            'default': None,
            'help': 'Фиксированное число слоёв MLP (иначе 1–5)',
        },
    ),
    ArgSpec(
        ('--instances',),
        {
            'type': int,
            'default': 100,
            'help': 'Случайных MLP первого порядка (100)',
        },
    ),
    ArgSpec(
        ('--double-instances',),
        {
            'type': int,
            'default': 20,
            'help': 'Экземпляров лосса притягивания (20)',
        },
    ),
    ArgSpec(
        ('--max-width',),
        {
            'type': int,
            'default': DEFAULT_MAX_WIDTH,
            'help': f'Наибольшая ширина слоя ({DEFAULT_MAX_WIDTH})',
        },
    ),
]


def register_grad_check_commands(
    subparsers: argparse._SubParsersAction,
) -> None:
    """Зарегистрировать команду `grad-check`."""
    pars = subparsers.add_parser(
        'grad-check',
        help='Сверить градиенты с конечными разностями.',
    )
    add_args(pars, GRAD_CHECK_ARGS)
    pars.set_defaults(func=cmd_grad_check)


def cmd_grad_check(args: argparse.Namespace) -> int:
    """Запустить обе серии и вывести наибольшие относительные ошибки.

    Returns:
        int: 0, если все серии прошли, иначе 3.
    """
    results = run_grad_check(
        seed=args.seed,
        first_order=args.instances,
        double_backprop=args.double_instances,
        layers=args.layers,
        max_width=args.max_width,
    )
    print_table(
        [
            (
                r.suite,
                r.instances,
                f'{r.max_rel_error:.3e}',
                f'{r.tolerance:g}',
                r.checked,
                r.excluded,
                'ok' if r.passed else 'FAIL',
            )
            for r in results
        ],
        (
            'Серия',
            'Экземпляров',
            'Макс. отн. ошибка',
            'Порог',
            'Проверено',
            'Исключено',
            'Итог',
        ),
    )
    return EXIT_OK if all(r.passed for r in results) else EXIT_NUMERICAL
