"""Protocol trees and the Karchmer-Wigderson transforms.

In the KW game for a boolean function f, Alice holds x with f(x)=0, Bob
holds y with f(y)=1, and they must agree on a literal ell with ell(x)=0 and
ell(y)=1.  A formula for f becomes a protocol for the game (AND gates are
Alice's nodes, OR gates Bob's) and vice versa; both directions here also
come in noise-aware variants, where channel noise may force the walk into a
child the owner did not pick.

Channel noise on a protocol is a sparse map from node path to a forced
child index, mirroring short-circuit patterns on formulas over the same
tree.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Iterator, Mapping, Sequence

from .formulas import (
    AND,
    OR,
    CorruptionBudget,
    Formula,
    Gate,
    Leaf,
    Lit,
    eval_noisy,
    evaluate,
    formula,
)

ALICE, BOB = 0, 1
SIDES = ("alice", "bob")


class ProtocolError(ValueError):
    pass


class NotResilientError(RuntimeError):
    """The resilient transform found the formula is not resilient to the
    requested budget; carries a concrete witness."""

    def __init__(self, message, witness):
        super().__init__(message)
        self.witness = witness


@dataclass(frozen=True)
class PNode:
    owner: int  # ALICE | BOB
    children: tuple
    # owner-input -> child index; partial (only inputs that can reach here)
    moves: Mapping[tuple, int]


@dataclass(frozen=True)
class PLeaf:
    lit: Lit


@dataclass(frozen=True)
class Protocol:
    root: object  # PNode | PLeaf
    n_vars: int
    alphabet: int
    x_domain: tuple    # Alice's inputs (bit tuples)
    y_domain: tuple    # Bob's inputs


def kw_valid_outputs(x: Sequence[int], y: Sequence[int]) -> frozenset:
    """All literals ell with ell(x)=0 and ell(y)=1."""
    if tuple(x) == tuple(y):
        raise ProtocolError("KW game needs x != y")
    out = set()
    for i, (a, b) in enumerate(zip(x, y), start=1):
        if a != b:
            out.add(Lit(i, neg=(a == 1)))
    return frozenset(out)


def protocol_depth(p: Protocol) -> int:
    def d(node) -> int:
        if isinstance(node, PLeaf):
            return 0
        return 1 + max(d(c) for c in node.children)

    return d(p.root)


def pnode_at(p: Protocol, path: tuple):
    node = p.root
    for i in path:
        node = node.children[i]
    return node


def enumerate_domains(f: Formula, max_vars: int = 12) -> tuple[tuple, tuple]:
    if f.n_vars > max_vars:
        raise ProtocolError(f"domain enumeration capped at {max_vars} variables")
    xs, ys = [], []
    for z in itertools.product((0, 1), repeat=f.n_vars):
        (ys if evaluate(f, z) else xs).append(z)
    if not xs or not ys:
        raise ProtocolError("constant formula has an empty KW domain")
    return tuple(xs), tuple(ys)


def formula_to_protocol(f: Formula, max_vars: int = 12) -> Protocol:
    """Noiseless KW transform: same tree, AND -> Alice, OR -> Bob; at an AND
    node Alice moves to the leftmost child evaluating to 0 on x, at an OR
    node Bob to the leftmost child evaluating to 1 on y."""
    xs, ys = enumerate_domains(f, max_vars)

    def build(node) -> object:
        if isinstance(node, Leaf):
            return PLeaf(node.lit)
        owner = ALICE if node.kind == AND else BOB
        want = 0 if owner == ALICE else 1
        domain = xs if owner == ALICE else ys
        moves = {}
        for z in domain:
            sub = [evaluate(formula(c, f.n_vars), z) for c in node.children]
            for i, v in enumerate(sub):
                if v == want:
                    moves[z] = i
                    break
        return PNode(owner, tuple(build(c) for c in node.children), moves)

    return Protocol(build(f.root), f.n_vars, max(2, _fanin(f.root)), xs, ys)


def noisy_formula_to_protocol(f: Formula, pattern: Mapping, max_vars: int = 12) -> Protocol:
    """KW transform of the noisy formula F_E: moves follow the evaluation of
    subformulas under the given short-circuit pattern; domains are
    F_E^{-1}(0) x F_E^{-1}(1)."""
    if f.n_vars > max_vars:
        raise ProtocolError(f"domain enumeration capped at {max_vars} variables")
    xs, ys = [], []
    for z in itertools.product((0, 1), repeat=f.n_vars):
        (ys if eval_noisy(f, pattern, z) else xs).append(z)
    if not xs or not ys:
        raise ProtocolError("noisy formula is constant on the hypercube")

    def noisy_sub(node, path, z):
        from .formulas import _eval

        return _eval(node, path, pattern, z)

    def build(node, path) -> object:
        if isinstance(node, Leaf):
            return PLeaf(node.lit)
        owner = ALICE if node.kind == AND else BOB
        want = 0 if owner == ALICE else 1
        domain = xs if owner == ALICE else ys
        moves = {}
        for z in domain:
            for i, c in enumerate(node.children):
                if noisy_sub(c, path + (i,), z) == want:
                    moves[z] = i
                    break
        return PNode(owner, tuple(build(c, path + (i,)) for i, c in enumerate(node.children)), moves)

    return Protocol(build(f.root, ()), f.n_vars, max(2, _fanin(f.root)), tuple(xs), tuple(ys))


def _fanin(node) -> int:
    best = 0
    stack = [node]
    while stack:
        n = stack.pop()
        if isinstance(n, (Gate, PNode)):
            best = max(best, len(n.children))
            stack.extend(n.children)
    return best


@dataclass
class RunOutcome:
    literal: Lit
    path: list          # node paths visited, root first, leaf last
    forced_rounds: list  # indices into path where noise forced the move


def run_protocol(
    p: Protocol,
    x: Sequence[int],
    y: Sequence[int],
    noise: Mapping[tuple, int] | None = None,
    on_visit: Callable[[tuple, object], None] | None = None,
) -> RunOutcome:
    """Walk the tree from the root.  At each node take the forced child if
    the noise pattern directs one, else the owner's move.  Both parties see
    the realized path (feedback), so conditioning on it is automatic."""
    x, y = tuple(x), tuple(y)
    if x not in p.x_domain or y not in p.y_domain:
        raise ProtocolError("inputs outside the declared domains")
    noise = noise or {}
    node = p.root
    path: tuple = ()
    visited = [path]
    forced = []
    if on_visit:
        on_visit(path, node)
    while isinstance(node, PNode):
        d = noise.get(path)
        if d is not None:
            if not 0 <= d < len(node.children):
                raise ProtocolError(f"forced index {d} out of range at {path}")
            forced.append(len(visited) - 1)
        else:
            z = x if node.owner == ALICE else y
            d = node.moves.get(z)
            if d is None:
                raise ProtocolError(
                    f"move undefined at node {path} for input {z} (construction bug)"
                )
        node = node.children[d]
        path = path + (d,)
        visited.append(path)
        if on_visit:
            on_visit(path, node)
    return RunOutcome(node.lit, visited, forced)


def protocol_to_formula(p: Protocol) -> Formula:
    """Reverse KW transform: Alice node -> AND, Bob node -> OR, leaf -> literal."""

    def build(node):
        if isinstance(node, PLeaf):
            return Leaf(node.lit)
        kind = AND if node.owner == ALICE else OR
        return Gate(kind, tuple(build(c) for c in node.children))

    return formula(build(p.root), p.n_vars)


# ---------------------------------------------------------------------------
# Channel-noise helpers over protocol trees


def iter_noisy_runs(
    p: Protocol, x, y, limit_a: int, limit_b: int
) -> Iterator[tuple[Lit, dict, tuple[int, int]]]:
    """All behaviors reachable under per-path budgets: yields (leaf literal,
    the forcing pattern used, (alice corruptions, bob corruptions)).  A
    corruption of Alice's transmission is a forced move at an Alice node.
    Equivalent to running every budget-valid full noise pattern."""
    x, y = tuple(x), tuple(y)

    def go(node, path, ca, cb, pat):
        if isinstance(node, PLeaf):
            yield node.lit, dict(pat), (ca, cb)
            return
        z = x if node.owner == ALICE else y
        own = node.moves.get(z)
        for i in range(len(node.children)):
            if i == own:
                yield from go(node.children[i], path + (i,), ca, cb, pat)
            else:
                na = ca + (1 if node.owner == ALICE else 0)
                nb = cb + (1 if node.owner == BOB else 0)
                if na > limit_a or nb > limit_b:
                    continue
                pat[path] = i
                yield from go(node.children[i], path + (i,), na, nb, pat)
                del pat[path]

    yield from go(p.root, (), 0, 0, {})


# ---------------------------------------------------------------------------
# Noise-preserving transform (resilient formulas -> resilient protocols)


def resilient_formula_to_protocol(f: Formula, budget: CorruptionBudget, max_vars: int = 12) -> Protocol:
    """Build a protocol for KW_f that stays correct under every budget-valid
    channel noise pattern, provided f itself is resilient to the budget.

    Nodes are processed in BFS order.  At each node and input, the move goes
    to a child whose subformula evaluates to the safe value under every
    noise pattern that can steer some run here within budget.  If no child
    qualifies, or a leaf is reachable with the wrong literal value, the
    formula was not resilient and the witnessing noise is raised.
    """
    xs, ys = enumerate_domains(f, max_vars)
    lim_a, lim_b = budget.limits(f)

    root_node = f.root
    # formula subtree per path
    subtree: dict[tuple, object] = {p: n for p, n in _walk_paths(root_node)}
    children_of = {
        p: [p + (i,) for i in range(len(n.children))]
        for p, n in subtree.items()
        if isinstance(n, Gate)
    }
    moves: dict[tuple, dict] = {p: {} for p in subtree}

    force_memo: dict = {}

    def can_force(path, z, target, a, b):
        """A pattern on the subtree at `path` making it evaluate to `target`
        on z within per-path budgets (a AND-corruptions, b OR-corruptions),
        or None.  Corrupting an AND gate only ever helps raise a value, an
        OR gate only ever helps lower it."""
        key = (path, z, target, a, b)
        if key in force_memo:
            return force_memo[key]
        node = subtree[path]
        result = None
        if isinstance(node, Leaf):
            result = {} if node.lit.value(z) == target else None
        else:
            helped = (node.kind == AND and target == 1) or (node.kind == OR and target == 0)
            need_all = (node.kind == AND and target == 1) or (node.kind == OR and target == 0)
            if need_all:
                parts = []
                for i in range(len(node.children)):
                    w = can_force(path + (i,), z, target, a, b)
                    if w is None:
                        parts = None
                        break
                    parts.append(w)
                if parts is not None:
                    merged: dict = {}
                    for w in parts:
                        merged.update(w)
                    result = merged
                if result is None and helped:
                    na, nb = (a - 1, b) if node.kind == AND else (a, b - 1)
                    if na >= 0 and nb >= 0:
                        for i in range(len(node.children)):
                            w = can_force(path + (i,), z, target, na, nb)
                            if w is not None:
                                result = dict(w)
                                result[path] = i
                                break
            else:
                for i in range(len(node.children)):
                    w = can_force(path + (i,), z, target, a, b)
                    if w is not None:
                        result = w
                        break
        force_memo[key] = result
        return result

    def steering_costs(path, z, side):
        """Pareto-minimal (AND, OR) corruption counts over noise patterns that
        steer some run with this side's input z to `path`, each with one
        witnessing pattern.  Returns {} when unreachable."""
        opp_domain = ys if side == ALICE else xs
        found: dict[tuple, dict] = {}

        def dfs(i, ca, cb, opp, pat):
            if i == len(path):
                key = (ca, cb)
                if key not in found:
                    found[key] = dict(pat)
                return
            node_path = path[:i]
            node = subtree[node_path]
            nxt = path[i]
            owner_input = z if (node.kind == AND) == (side == ALICE) else opp
            mv = moves[node_path].get(owner_input)
            if mv == nxt:
                dfs(i + 1, ca, cb, opp, pat)
            na = ca + (1 if node.kind == AND else 0)
            nb = cb + (1 if node.kind == OR else 0)
            if na <= lim_a and nb <= lim_b:
                pat[node_path] = nxt
                dfs(i + 1, na, nb, opp, pat)
                del pat[node_path]

        for opp in opp_domain:
            dfs(0, 0, 0, opp, {})
        # prune dominated cost pairs
        pareto = {}
        for (ca, cb), pat in sorted(found.items()):
            if not any(pa <= ca and pb <= cb and (pa, pb) != (ca, cb) for (pa, pb) in found):
                pareto[(ca, cb)] = pat
        return pareto

    order = sorted(subtree, key=len)  # BFS by depth
    for path in order:
        node = subtree[path]
        if isinstance(node, Gate):
            owner = ALICE if node.kind == AND else BOB
            want = 0 if owner == ALICE else 1
            domain = xs if owner == ALICE else ys
            for z in domain:
                pareto = steering_costs(path, z, owner)
                if not pareto:
                    continue  # unreachable for this input; leave undefined
                chosen = None
                blockers = []
                for i in range(len(node.children)):
                    bad = None
                    for (ca, cb), steer in pareto.items():
                        w = can_force(path + (i,), z, 1 - want, lim_a - ca, lim_b - cb)
                        if w is not None:
                            full = dict(steer)
                            full.update(w)
                            bad = full
                            break
                    if bad is None:
                        chosen = i
                        break
                    blockers.append((i, bad))
                if chosen is None:
                    raise NotResilientError(
                        f"no safe child at node {path} for input {z}",
                        {"node": path, "input": z, "blocking_patterns": blockers},
                    )
                moves[path][z] = chosen
        else:
            for side, domain, want in ((ALICE, xs, 0), (BOB, ys, 1)):
                for z in domain:
                    pareto = steering_costs(path, z, side)
                    if pareto and node.lit.value(z) != want:
                        (ca, cb), steer = next(iter(pareto.items()))
                        raise NotResilientError(
                            f"leaf {node.lit} reachable with wrong value on {z}",
                            {"node": path, "input": z, "blocking_patterns": [(None, steer)]},
                        )

    def build(path):
        node = subtree[path]
        if isinstance(node, Leaf):
            return PLeaf(node.lit)
        owner = ALICE if node.kind == AND else BOB
        return PNode(owner, tuple(build(c) for c in children_of[path]), dict(moves[path]))

    return Protocol(build(()), f.n_vars, max(2, _fanin(f.root)), xs, ys)


def _walk_paths(node, path=()):
    yield path, node
    if isinstance(node, Gate):
        for i, c in enumerate(node.children):
            yield from _walk_paths(c, path + (i,))


# ---------------------------------------------------------------------------
# JSON serialization


def protocol_to_json(p: Protocol) -> dict:
    def enc(node):
        if isinstance(node, PLeaf):
            return {"leaf": str(node.lit)}
        return {
            "owner": SIDES[node.owner],
            "children": [enc(c) for c in node.children],
            "moves": {"".join(map(str, z)): i for z, i in sorted(node.moves.items())},
        }

    return {
        "alphabet": p.alphabet,
        "n_vars": p.n_vars,
        "x_domain": ["".join(map(str, z)) for z in p.x_domain],
        "y_domain": ["".join(map(str, z)) for z in p.y_domain],
        "tree": enc(p.root),
    }


def protocol_from_json(obj: Mapping) -> Protocol:
    def parse_lit(s: str) -> Lit:
        s = s.strip()
        if s.startswith("(not "):
            return Lit(int(s[len("(not x"):-1]), True)
        return Lit(int(s[1:]))

    def dec(node):
        if "leaf" in node:
            return PLeaf(parse_lit(node["leaf"]))
        return PNode(
            SIDES.index(node["owner"]),
            tuple(dec(c) for c in node["children"]),
            {tuple(int(b) for b in k): v for k, v in node["moves"].items()},
        )

    return Protocol(
        dec(obj["tree"]),
        obj["n_vars"],
        obj["alphabet"],
        tuple(tuple(int(b) for b in s) for s in obj["x_domain"]),
        tuple(tuple(int(b) for b in s) for s in obj["y_domain"]),
    )
