"""Enumeration caps.

Every cap counts enumerated cases (coordinate tuples, sign outcomes,
matrices, ...).  ``OFFORD_BUDGET`` in the environment replaces every
default; an explicit ``budget=`` argument beats both.
"""
from __future__ import annotations

import os

from .errors import BudgetError

ENV_VAR = "OFFORD_BUDGET"

DEFAULTS = {
    "gap_volume": 10**7,
    "walk_support": 10**7,
    "halasz_tuples": 10**8,
    "bilinear_outcomes": 2**16,
    # 3**13 lazy outcomes; admits bernoulli up to n = 20
    "quadratic_outcomes": 3**13,
    # 2**8 cuts times 3**8 lazy outcomes
    "decoupling_cases": 2**8 * 3**8,
    "qn_exact_matrices": 2**28,
    "odlyzko_vectors": 2**24,
}


def resolve(name: str, budget: int | None = None) -> int:
    if budget is not None:
        return int(budget)
    env = os.environ.get(ENV_VAR)
    if env:
        return int(env)
    return DEFAULTS[name]


def check(name: str, required: int, budget: int | None = None) -> None:
    cap = resolve(name, budget)
    if required > cap:
        raise BudgetError(name, cap, required)
