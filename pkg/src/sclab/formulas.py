"""Boolean formulas under short-circuit faults.

A formula is a rooted tree of AND/OR gates (arity >= 1) with literal leaves.
A short-circuit pattern wires the output of a faulty gate to one of its
input legs; the adversary picks which leg, per gate.  Patterns are sparse
maps from a gate's address to the chosen child index; an unlisted gate is
healthy.  Gate addresses are root-to-gate child-index paths, e.g. ``(0, 1)``
is the second child of the first child of the root (the root itself is
``()``).

Text format for formulas (parenthesized prefix form)::

    (and (or x1 (not x2)) x3)

Pattern JSON format: ``{"0.1": 0, "": "*"}`` maps the dotted gate path to a
forced child index or ``"*"`` (healthy; same as omitting the key).  The root
gate's path is the empty string.
"""

from __future__ import annotations

import itertools
import math
import random
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterator, Mapping, Sequence, Union

AND = "and"
OR = "or"


class FormulaError(ValueError):
    pass


class PatternError(ValueError):
    pass


class EnumerationCapError(RuntimeError):
    """Raised when an exhaustive enumeration would exceed the configured cap."""


@dataclass(frozen=True)
class Lit:
    """A literal: variable ``x<var>`` (1-based) or its negation."""

    var: int
    neg: bool = False

    def value(self, z: Sequence[int]) -> int:
        bit = z[self.var - 1]
        return 1 - bit if self.neg else bit

    def negated(self) -> "Lit":
        return Lit(self.var, not self.neg)

    def __str__(self) -> str:
        return f"(not x{self.var})" if self.neg else f"x{self.var}"


@dataclass(frozen=True)
class Leaf:
    lit: Lit


@dataclass(frozen=True)
class Gate:
    kind: str  # AND | OR
    children: tuple

    def __post_init__(self):
        if self.kind not in (AND, OR):
            raise FormulaError(f"unknown gate kind {self.kind!r}")
        if len(self.children) < 1:
            raise FormulaError("gates need arity >= 1")


Node = Union[Leaf, Gate]

# A sparse short-circuit pattern: gate path -> forced child index.
Pattern = Mapping[tuple, int]


@dataclass(frozen=True)
class Formula:
    root: Node
    n_vars: int

    def __post_init__(self):
        for _, node in walk(self.root):
            if isinstance(node, Leaf):
                if not 1 <= node.lit.var <= self.n_vars:
                    raise FormulaError(
                        f"leaf {node.lit} out of range for {self.n_vars} variables"
                    )


def leaf(var: int, neg: bool = False) -> Leaf:
    return Leaf(Lit(var, neg))


def gand(*children: Node) -> Gate:
    return Gate(AND, tuple(children))


def gor(*children: Node) -> Gate:
    return Gate(OR, tuple(children))


def formula(root: Node, n_vars: int | None = None) -> Formula:
    """Wrap a node tree; infers the variable count when not given."""
    if n_vars is None:
        n_vars = max(
            (n.lit.var for _, n in walk(root) if isinstance(n, Leaf)), default=0
        )
    return Formula(root, n_vars)


def walk(node: Node, path: tuple = ()) -> Iterator[tuple[tuple, Node]]:
    """Yield (path, node) pairs in preorder."""
    stack = [(path, node)]
    while stack:
        p, n = stack.pop()
        yield p, n
        if isinstance(n, Gate):
            for i in reversed(range(len(n.children))):
                stack.append((p + (i,), n.children[i]))


def gates(f: Formula | Node) -> list[tuple[tuple, Gate]]:
    root = f.root if isinstance(f, Formula) else f
    return [(p, n) for p, n in walk(root) if isinstance(n, Gate)]


def node_at(f: Formula | Node, path: tuple) -> Node:
    node = f.root if isinstance(f, Formula) else f
    for i in path:
        if not isinstance(node, Gate) or i >= len(node.children):
            raise FormulaError(f"no node at path {path}")
        node = node.children[i]
    return node


def size(f: Formula | Node) -> int:
    root = f.root if isinstance(f, Formula) else f
    return sum(1 for _ in walk(root))


def depth(f: Formula | Node) -> int:
    root = f.root if isinstance(f, Formula) else f

    def d(n: Node) -> int:
        if isinstance(n, Leaf):
            return 0
        return 1 + max(d(c) for c in n.children)

    return d(root)


def max_arity(f: Formula | Node) -> int:
    root = f.root if isinstance(f, Formula) else f
    return max((len(n.children) for _, n in walk(root) if isinstance(n, Gate)), default=0)


def evaluate(f: Formula, z: Sequence[int]) -> int:
    """Noiseless recursive AND/OR/literal evaluation."""
    if len(z) != f.n_vars:
        raise FormulaError(f"input has {len(z)} bits, formula takes {f.n_vars}")
    return _eval(f.root, (), {}, z)


def eval_noisy(f: Formula, pattern: Pattern, z: Sequence[int]) -> int:
    """Evaluate under a short-circuit pattern: a gate with directive ``i``
    returns the value of its i-th child; healthy gates evaluate normally."""
    if len(z) != f.n_vars:
        raise FormulaError(f"input has {len(z)} bits, formula takes {f.n_vars}")
    validate_pattern(f, pattern)
    return _eval(f.root, (), pattern, z)


def _eval(node: Node, path: tuple, pattern: Pattern, z: Sequence[int]) -> int:
    if isinstance(node, Leaf):
        return node.lit.value(z)
    d = pattern.get(path)
    if d is not None:
        return _eval(node.children[d], path + (d,), pattern, z)
    if node.kind == AND:
        for i, c in enumerate(node.children):
            if not _eval(c, path + (i,), pattern, z):
                return 0
        return 1
    for i, c in enumerate(node.children):
        if _eval(c, path + (i,), pattern, z):
            return 1
    return 0


def validate_pattern(f: Formula | Node, pattern: Pattern) -> None:
    for path, d in pattern.items():
        node = node_at(f, path)
        if not isinstance(node, Gate):
            raise PatternError(f"directive on non-gate at {path}")
        if not 0 <= d < len(node.children):
            raise PatternError(f"directive {d} out of arity range at {path}")


@dataclass(frozen=True)
class CorruptionBudget:
    """Per-path budget: at most floor(alpha*depth) corrupted AND gates and
    floor(beta*depth) corrupted OR gates on any leaf-to-root path."""

    alpha: Fraction
    beta: Fraction

    def __post_init__(self):
        object.__setattr__(self, "alpha", as_fraction(self.alpha))
        object.__setattr__(self, "beta", as_fraction(self.beta))
        if not (0 <= self.alpha <= 1 and 0 <= self.beta <= 1):
            raise FormulaError("budget fractions must lie in [0, 1]")

    def limits(self, f: Formula | Node) -> tuple[int, int]:
        n = depth(f)
        return (math.floor(self.alpha * n), math.floor(self.beta * n))


def as_fraction(x) -> Fraction:
    """Exact rational coercion; floats go through their decimal repr so that
    0.1 means 1/10, not the nearest binary fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(str(x))
    return Fraction(x)


def path_costs(f: Formula, pattern: Pattern) -> list[tuple[int, int]]:
    """Per leaf-to-root path, the (corrupted AND, corrupted OR) counts."""
    out: list[tuple[int, int]] = []

    def go(node: Node, path: tuple, ca: int, cb: int) -> None:
        if isinstance(node, Leaf):
            out.append((ca, cb))
            return
        hit = path in pattern
        na = ca + (1 if hit and node.kind == AND else 0)
        nb = cb + (1 if hit and node.kind == OR else 0)
        for i, c in enumerate(node.children):
            go(c, path + (i,), na, nb)

    go(f.root, (), 0, 0)
    return out


def is_ab_corruption(f: Formula, pattern: Pattern, budget: CorruptionBudget) -> bool:
    """True iff every leaf-to-root path stays within the budget.  The pattern
    itself is what is budgeted: a directive counts even if it does not change
    the gate's value."""
    validate_pattern(f, pattern)
    lim_a, lim_b = budget.limits(f)
    return all(ca <= lim_a and cb <= lim_b for ca, cb in path_costs(f, pattern))


def restrict(f: Formula, pattern: Pattern, kind: str) -> dict:
    """Keep only the directives sitting on gates of the given kind."""
    if kind not in (AND, OR):
        raise FormulaError(f"unknown gate kind {kind!r}")
    out = {}
    for path, d in pattern.items():
        node = node_at(f, path)
        if isinstance(node, Gate) and node.kind == kind:
            out[path] = d
    return out


def count_corruptions(f: Formula, budget: CorruptionBudget) -> int:
    """Exact number of budget-valid patterns, without enumerating them."""
    lim_a, lim_b = budget.limits(f)
    memo: dict = {}

    def count(node: Node, ca: int, cb: int) -> int:
        if isinstance(node, Leaf):
            return 1
        key = (id(node), ca, cb)
        got = memo.get(key)
        if got is not None:
            return got
        total = 0
        for corrupt in (False, True):
            copies = len(node.children) if corrupt else 1
            na = ca + (1 if corrupt and node.kind == AND else 0)
            nb = cb + (1 if corrupt and node.kind == OR else 0)
            if na > lim_a or nb > lim_b:
                continue
            prod = 1
            for c in node.children:
                prod *= count(c, na, nb)
            total += prod * copies
        memo[key] = total
        return total

    return count(f.root, 0, 0)


def enumerate_corruptions(
    f: Formula, budget: CorruptionBudget, cap: int = 10**7
) -> Iterator[dict]:
    """Yield every pattern satisfying is_ab_corruption, each exactly once.

    Refuses up front when the budget-pruned pattern count exceeds ``cap``.
    """
    total = count_corruptions(f, budget)
    if total > cap:
        raise EnumerationCapError(f"{total} budget-valid patterns exceed cap {cap}")
    lim_a, lim_b = budget.limits(f)

    def go(node: Node, path: tuple, ca: int, cb: int) -> Iterator[dict]:
        # Yields patterns for the subtree; (ca, cb) is the cost on the path
        # above this node.
        if isinstance(node, Leaf):
            yield {}
            return
        options: list[int | None] = [None] + list(range(len(node.children)))
        for d in options:
            corrupt = d is not None
            na = ca + (1 if corrupt and node.kind == AND else 0)
            nb = cb + (1 if corrupt and node.kind == OR else 0)
            if na > lim_a or nb > lim_b:
                continue
            parts = [list(go(c, path + (i,), na, nb)) for i, c in enumerate(node.children)]
            for combo in itertools.product(*parts):
                merged: dict = {}
                for part in combo:
                    merged.update(part)
                if corrupt:
                    merged[path] = d
                yield merged

    yield from go(f.root, (), 0, 0)


@dataclass
class VerifyReport:
    ok: bool
    counterexample: tuple[dict, tuple] | None
    patterns_checked: int
    pairs_checked: int
    mode: str


def verify_resilience(
    f: Formula,
    reference: Callable[[Sequence[int]], int] | Sequence[int],
    budget: CorruptionBudget,
    mode: str = "exhaustive",
    seed: int | None = None,
    trials: int = 1000,
    cap: int = 10**7,
) -> VerifyReport:
    """Check eval_noisy(f, E, z) == reference(z) for all (E, z) in scope.

    ``mode`` is "exhaustive" (all budget-valid patterns x all inputs, subject
    to the enumeration cap) or "sampled" (seeded random patterns/inputs).
    """
    ref = _as_reference(reference, f.n_vars)
    inputs = list(itertools.product((0, 1), repeat=f.n_vars))
    patterns_checked = pairs_checked = 0
    if mode == "exhaustive":
        for pattern in enumerate_corruptions(f, budget, cap=cap):
            patterns_checked += 1
            for z in inputs:
                pairs_checked += 1
                if pairs_checked > cap:
                    raise EnumerationCapError(f"verification exceeded cap {cap}")
                if _eval(f.root, (), pattern, z) != ref(z):
                    return VerifyReport(False, (pattern, z), patterns_checked, pairs_checked, mode)
        return VerifyReport(True, None, patterns_checked, pairs_checked, mode)
    if mode != "sampled":
        raise FormulaError(f"unknown mode {mode!r}")
    if seed is None:
        raise FormulaError("sampled mode needs a seed")
    rng = random.Random(seed)
    for _ in range(trials):
        pattern = sample_corruption(f, budget, rng)
        z = tuple(rng.randrange(2) for _ in range(f.n_vars))
        patterns_checked += 1
        pairs_checked += 1
        if _eval(f.root, (), pattern, z) != ref(z):
            return VerifyReport(False, (pattern, z), patterns_checked, pairs_checked, mode)
    return VerifyReport(True, None, patterns_checked, pairs_checked, mode)


def sample_corruption(f: Formula, budget: CorruptionBudget, rng: random.Random) -> dict:
    """Draw a random budget-valid pattern (greedy top-down with path budgets)."""
    lim_a, lim_b = budget.limits(f)
    pattern: dict = {}

    def go(node: Node, path: tuple, ca: int, cb: int) -> None:
        if isinstance(node, Leaf):
            return
        room = (ca < lim_a) if node.kind == AND else (cb < lim_b)
        corrupt = room and rng.random() < 0.5
        na, nb = ca, cb
        if corrupt:
            pattern[path] = rng.randrange(len(node.children))
            if node.kind == AND:
                na += 1
            else:
                nb += 1
        for i, c in enumerate(node.children):
            go(c, path + (i,), na, nb)

    go(f.root, (), 0, 0)
    return pattern


def _as_reference(reference, n_vars: int) -> Callable[[Sequence[int]], int]:
    if callable(reference):
        return reference
    table = list(reference)
    if len(table) != 2**n_vars:
        raise FormulaError("truth table length mismatch")

    def ref(z: Sequence[int]) -> int:
        idx = 0
        for b in z:
            idx = (idx << 1) | b
        return table[idx]

    return ref


def truth_table(f: Formula) -> tuple[int, ...]:
    """Truth table indexed by the input read as a big-endian integer."""
    if f.n_vars > 20:
        raise FormulaError("truth table too large")
    return tuple(
        evaluate(f, z) for z in itertools.product((0, 1), repeat=f.n_vars)
    )


# ---------------------------------------------------------------------------
# Balancing


def balance(f: Formula, check: bool = True) -> Formula:
    """Restructure a fan-in-2 formula to depth <= 3*log2(|F|).

    Same-kind runs are flattened and rebuilt as complete trees; alternating
    chains fall back to separator-based restructuring.  The truth table is
    verified exhaustively for n_vars <= 12; above that the equivalence check
    is skipped with a warning.
    """
    if max_arity(f) > 2:
        raise FormulaError("balance expects fan-in 2")
    out = formula(_balance_node(f.root), f.n_vars)
    if size(f) > 1:
        bound = 3 * math.log2(size(f))
        if depth(out) > bound:
            raise FormulaError(
                f"balanced depth {depth(out)} exceeds 3*log2(|F|) = {bound:.2f}"
            )
    if check:
        if f.n_vars <= 12:
            if truth_table(f) != truth_table(out):
                raise FormulaError("balance changed the truth table")
        else:
            warnings.warn("balance: equivalence check skipped for n_vars > 12")
    return out


def _balance_node(node: Node) -> Node:
    if isinstance(node, Leaf):
        return node
    ops = [_balance_node(c) for c in _flatten(node, node.kind)]
    built = _build_balanced(node.kind, ops)
    m = _tree_size(node)
    if m > 1 and _tree_depth(built) > 3 * math.log2(m):
        built = _separator_balance(node)
    return built


def _flatten(node: Node, kind: str) -> list[Node]:
    if isinstance(node, Gate) and (node.kind == kind or len(node.children) == 1):
        out: list[Node] = []
        for c in node.children:
            out.extend(_flatten(c, kind))
        return out
    return [node]


def _build_balanced(kind: str, ops: list[Node]) -> Node:
    if len(ops) == 1:
        return ops[0]
    mid = (len(ops) + 1) // 2
    return Gate(kind, (_build_balanced(kind, ops[:mid]), _build_balanced(kind, ops[mid:])))


def _tree_size(node: Node) -> int:
    return sum(1 for _ in walk(node))


def _tree_depth(node: Node) -> int:
    if isinstance(node, Leaf):
        return 0
    return 1 + max(_tree_depth(c) for c in node.children)


_ZERO, _ONE = "const0", "const1"


def _separator_balance(node: Node) -> Node:
    """Classic separator restructuring: F = (S and F[S:=1]) or (~S and F[S:=0])."""
    m = _tree_size(node)
    if m <= 7:
        return _build_balanced(node.kind, [_balance_node(c) for c in _flatten(node, node.kind)]) if isinstance(node, Gate) else node
    sep = ()
    cur = node
    while _tree_size(cur) > (2 * m) // 3:
        kid = max(range(len(cur.children)), key=lambda i: _tree_size(cur.children[i]))
        sep = sep + (kid,)
        cur = cur.children[kid]
    s_pos = _balance_node(cur)
    s_neg = _balance_node(_dual(cur))
    f1 = _substitute(node, sep, _ONE)
    f0 = _substitute(node, sep, _ZERO)
    branches = []
    for guard, rest in ((s_pos, f1), (s_neg, f0)):
        if rest == _ONE:
            branches.append(guard)
        elif rest != _ZERO:
            branches.append(Gate(AND, (guard, _balance_node(rest))))
    if not branches:
        # Both substitutions collapse to 0: F is constant 0 over the separator,
        # which cannot happen for a separator on a live path.
        raise FormulaError("separator balance hit a constant formula")
    if len(branches) == 1:
        return branches[0]
    return Gate(OR, tuple(branches))


def _dual(node: Node) -> Node:
    if isinstance(node, Leaf):
        return Leaf(node.lit.negated())
    kind = OR if node.kind == AND else AND
    return Gate(kind, tuple(_dual(c) for c in node.children))


def _substitute(node: Node, path: tuple, const: str):
    """Replace the node at ``path`` with a constant and fold constants away.
    Returns a Node or one of the constant markers."""
    if not path:
        return const
    assert isinstance(node, Gate)
    parts = []
    for i, c in enumerate(node.children):
        parts.append(_substitute(c, path[1:], const) if i == path[0] else c)
    absorbing = _ZERO if node.kind == AND else _ONE
    neutral = _ONE if node.kind == AND else _ZERO
    if any(p == absorbing for p in parts):
        return absorbing
    live = [p for p in parts if p != neutral]
    if not live:
        return neutral
    if len(live) == 1:
        return live[0]
    return Gate(node.kind, tuple(live))


# ---------------------------------------------------------------------------
# Parity


def parity_formula(n: int) -> Formula:
    """Fan-in-2 formula for n-bit parity via the dual-rail XOR construction."""
    if n < 1:
        raise FormulaError("parity needs n >= 1")
    pos, _neg = _parity_rails(tuple(range(1, n + 1)))
    return Formula(pos, n)


def _parity_rails(vars_: tuple[int, ...]) -> tuple[Node, Node]:
    if len(vars_) == 1:
        v = vars_[0]
        return Leaf(Lit(v)), Leaf(Lit(v, True))
    mid = (len(vars_) + 1) // 2
    lp, ln = _parity_rails(vars_[:mid])
    rp, rn = _parity_rails(vars_[mid:])
    pos = Gate(OR, (Gate(AND, (lp, rn)), Gate(AND, (ln, rp))))
    lp2, ln2 = _parity_rails(vars_[:mid])
    rp2, rn2 = _parity_rails(vars_[mid:])
    neg = Gate(OR, (Gate(AND, (lp2, rp2)), Gate(AND, (ln2, rn2))))
    return pos, neg


# ---------------------------------------------------------------------------
# Text and JSON formats


def format_formula(f: Formula | Node) -> str:
    node = f.root if isinstance(f, Formula) else f

    def fmt(n: Node) -> str:
        if isinstance(n, Leaf):
            return str(n.lit)
        return "(" + n.kind + " " + " ".join(fmt(c) for c in n.children) + ")"

    return fmt(node)


def parse_formula(text: str, n_vars: int | None = None) -> Formula:
    tokens = text.replace("(", " ( ").replace(")", " ) ").split()
    pos = 0

    def parse() -> Node:
        nonlocal pos
        if pos >= len(tokens):
            raise FormulaError("unexpected end of formula text")
        tok = tokens[pos]
        pos += 1
        if tok == "(":
            head = tokens[pos]
            pos += 1
            if head == "not":
                inner = parse()
                if not isinstance(inner, Leaf) or inner.lit.neg:
                    raise FormulaError("(not ...) takes a plain variable")
                node: Node = Leaf(inner.lit.negated())
            elif head in (AND, OR):
                children = []
                while tokens[pos] != ")":
                    children.append(parse())
                node = Gate(head, tuple(children))
            else:
                raise FormulaError(f"unknown operator {head!r}")
            if tokens[pos] != ")":
                raise FormulaError("missing close paren")
            pos += 1
            return node
        if tok.startswith("x"):
            return Leaf(Lit(int(tok[1:])))
        raise FormulaError(f"unexpected token {tok!r}")

    root = parse()
    if pos != len(tokens):
        raise FormulaError("trailing tokens in formula text")
    return formula(root, n_vars)


def pattern_to_json(pattern: Pattern) -> dict:
    return {".".join(str(i) for i in path): d for path, d in sorted(pattern.items())}


def pattern_from_json(obj: Mapping[str, object]) -> dict:
    out: dict = {}
    for key, val in obj.items():
        path = tuple(int(p) for p in key.split(".")) if key else ()
        if val == "*":
            continue
        out[path] = int(val)  # type: ignore[arg-type]
    return out
