"""Shared exhaustive formula families used as test corpora.

``table_family``: all truth tables realizable by fan-in-2 formulas of depth
<= d over <= n variables, one minimal-depth representative each (layered
closure, deduplicated by truth table).  ``structural_family``: literally
every fan-in-2 formula shape of depth <= 2 over 2 variables.
"""

from __future__ import annotations

import itertools
import random
from functools import lru_cache

from sclab.formulas import AND, OR, Formula, Gate, Leaf, Lit, evaluate, formula


def _table(node, n_vars: int) -> tuple:
    f = Formula(node, n_vars)
    return tuple(evaluate(f, z) for z in itertools.product((0, 1), repeat=n_vars))


@lru_cache(maxsize=None)
def table_family(n_vars: int = 3, max_depth: int = 3) -> tuple[Formula, ...]:
    reps: dict[tuple, object] = {}
    for v in range(1, n_vars + 1):
        for neg in (False, True):
            node = Leaf(Lit(v, neg))
            reps.setdefault(_table(node, n_vars), node)
    frontier = list(reps.items())
    known = dict(reps)
    for _ in range(max_depth):
        new: dict[tuple, object] = {}
        items = list(known.items())
        for (_, a), (_, b) in itertools.product(items, repeat=2):
            for kind in (AND, OR):
                node = Gate(kind, (a, b))
                t = _table(node, n_vars)
                if t not in known and t not in new:
                    new[t] = node
        known.update(new)
        if not new:
            break
    return tuple(Formula(node, n_vars) for node in known.values())


@lru_cache(maxsize=None)
def structural_family(n_vars: int = 2, max_depth: int = 2) -> tuple[Formula, ...]:
    def level(d: int) -> list:
        lits = [Leaf(Lit(v, neg)) for v in range(1, n_vars + 1) for neg in (False, True)]
        if d == 0:
            return lits
        below = level(d - 1)
        out = list(lits)
        for a, b in itertools.product(below, repeat=2):
            out.append(Gate(AND, (a, b)))
            out.append(Gate(OR, (a, b)))
        return out

    return tuple(Formula(node, n_vars) for node in level(max_depth))


def random_formula(rng: random.Random, n_vars: int, max_depth: int):
    """A random fan-in-2 formula node tree."""
    if max_depth == 0 or rng.random() < 0.3:
        return Leaf(Lit(rng.randrange(1, n_vars + 1), rng.random() < 0.5))
    kind = AND if rng.random() < 0.5 else OR
    return Gate(
        kind,
        (
            random_formula(rng, n_vars, max_depth - 1),
            random_formula(rng, n_vars, max_depth - 1),
        ),
    )


def regression_corpus(seed: int = 11, count: int = 40) -> list[Formula]:
    """Mixed bag used for balance / resilience regressions."""
    from sclab.formulas import gand, gor, leaf, parity_formula

    rng = random.Random(seed)
    out: list[Formula] = []
    # left-leaning AND chain of 8 leaves
    node = leaf(1)
    for v in [2, 3, 4, 5, 6, 7, 8]:
        node = gand(node, leaf(v))
    out.append(formula(node))
    # alternating AND/OR chain, depth 16
    node = leaf(1)
    for i in range(16):
        kind = gand if i % 2 == 0 else gor
        node = kind(node, leaf(1 + (i % 3)))
    out.append(formula(node, 3))
    out.append(parity_formula(1))
    out.append(parity_formula(4))
    out.append(parity_formula(6))
    for _ in range(count):
        out.append(formula(random_formula(rng, 4, rng.randrange(1, 6)), 4))
    return out
