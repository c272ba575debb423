"""Formula hardening: balance, encode through the constant-alphabet scheme,
and convert back, with reachability pruning of the resilient protocol tree.

The pipeline equips a formula with short-circuit resilience: balance it,
turn it into a game protocol, wrap that protocol in the coding scheme
(giving an n-round protocol over the constant alphabet resilient to
(1/5-2eps, 1/5-2eps)-corruptions), and read the result back as a formula.
Materializing the full output formula is astronomically large even for tiny
parameters, so the artifact carries depth/fan-in accounting plus an
executable resilient protocol; the formula itself is only built when the
reachable tree fits under a node cap, with every node certified by the
reachability check.

A node of the resilient protocol is addressed by its received-symbol path.
Reachability under a noise-pattern predicate Phi reduces, per input pair,
to a deterministic replay: honest senders are replayed along the path, the
corrupted rounds are exactly those where the path symbol differs from the
replayed transmission, and the node is reachable iff some input pair's
corruption counts satisfy Phi.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction

from .channel import ALICE
from .coding_small import (
    alphabet_params,
    replay_forced_run,
    simulate_small,
)
from .formulas import (
    AND,
    OR,
    Formula,
    Gate,
    Leaf,
    as_fraction,
    balance,
    formula,
)
from .kw import PLeaf, PNode, Protocol, formula_to_protocol, kw_valid_outputs
from .pi0 import TreeAlternatingProtocol


class HardeningError(RuntimeError):
    pass


class MaterializationCapError(HardeningError):
    """The reachable tree walk exceeded the configured node cap."""


class BudgetPhi:
    """Noise patterns corrupting at most floor(alpha*n) of Alice's and
    floor(beta*n) of Bob's transmissions."""

    def __init__(self, alpha, beta, n: int):
        self.alpha = as_fraction(alpha)
        self.beta = as_fraction(beta)
        self.n = n
        self.limits = (math.floor(self.alpha * n), math.floor(self.beta * n))

    def allows(self, count_a: int, count_b: int) -> bool:
        return count_a <= self.limits[0] and count_b <= self.limits[1]

    def __repr__(self):
        return f"BudgetPhi({self.alpha}, {self.beta}, n={self.n})"


# ---------------------------------------------------------------------------
# Reachability


class TreeReachModel:
    """Reachability over a plain protocol tree.  Moves are replayed per
    input pair; a path round is corrupted exactly when its branch differs
    from the owner's move."""

    def __init__(self, protocol: Protocol):
        self.protocol = protocol

    def node(self, path: tuple):
        node = self.protocol.root
        for i in path:
            if isinstance(node, PLeaf):
                return None
            if i >= len(node.children):
                return None
            node = node.children[i]
        return node

    def children_count(self, path: tuple) -> int:
        node = self.node(path)
        return len(node.children) if isinstance(node, PNode) else 0

    def cost_profiles(self, path: tuple):
        """Per input pair, the corruption counts needed to force this path,
        or None when a move is undefined along the way."""
        p = self.protocol
        for x in p.x_domain:
            for y in p.y_domain:
                counts = [0, 0]
                ok = True
                node = p.root
                for branch in path:
                    if not isinstance(node, PNode):
                        ok = False
                        break
                    z = x if node.owner == ALICE else y
                    mv = node.moves.get(z)
                    if mv is None:
                        ok = False
                        break
                    if mv != branch:
                        counts[node.owner] += 1
                    node = node.children[branch]
                if ok:
                    yield tuple(counts), (x, y)


class SchemeReachModel:
    """Reachability over the coding scheme run on a base protocol: nodes are
    received-symbol paths, replayed per input pair."""

    def __init__(self, pi0: TreeAlternatingProtocol, eps, base: Protocol):
        self.pi0 = pi0
        self.eps = as_fraction(eps)
        self.base = base
        self.C, self.alphabet_size = alphabet_params(eps)
        self.n = math.ceil(Fraction(pi0.length) / self.eps)

    def cost_profiles(self, path: tuple):
        for x in self.base.x_domain:
            for y in self.base.y_domain:
                rep = replay_forced_run(self.pi0, self.eps, x, y, path)
                yield rep.counts, (x, y)


def reach(phi, path: tuple, model) -> bool:
    """Reachable iff some input pair forces the path within Phi's budget."""
    for counts, _pair in model.cost_profiles(path):
        if phi.allows(*counts):
            return True
    return False


# ---------------------------------------------------------------------------
# Materialization (reverse transform over the reachable tree)


def materialize_from_tree(protocol: Protocol, phi, node_cap: int = 20000) -> Formula:
    """Reverse transform keeping only Phi-reachable nodes.  A gate keeps its
    reachable children (arity may drop; a single kept child is the
    duplicate-child completion in identity form)."""
    model = TreeReachModel(protocol)
    budget = [node_cap]

    def build(path, node):
        budget[0] -= 1
        if budget[0] < 0:
            raise MaterializationCapError(f"node cap {node_cap} exceeded")
        if isinstance(node, PLeaf):
            return Leaf(node.lit)
        kept = []
        for i, child in enumerate(node.children):
            if reach(phi, path + (i,), model):
                kept.append(build(path + (i,), child))
        if not kept:
            raise HardeningError(f"reachable node {path} has no reachable child")
        kind = AND if node.owner == ALICE else OR
        return Gate(kind, tuple(kept))

    if not reach(phi, (), model):
        raise HardeningError("root unreachable (empty domain?)")
    return formula(build((), protocol.root), protocol.n_vars)


def _iter_alphabet(c: int):
    from .coding_small import CONT, START, STD, STOP

    for link in range(c + 1):
        for typ in (STD, START, STOP, CONT):
            msgs = (0, 1, None) if typ == STD else tuple(range(c))
            for msg in msgs:
                yield (link, typ, msg)


def materialize_from_scheme(artifact: "HardenedArtifact", phi=None,
                            node_cap: int = 20000) -> Formula:
    """Materialize the hardened formula from the resilient protocol's
    Phi-reachable tree.  Children are generated from the consistent replays
    at each node: the honest next symbols, plus the whole alphabet whenever
    some consistent replay still has corruption budget for the speaker."""
    pi0 = artifact.pi0
    eps = artifact.eps
    model = SchemeReachModel(pi0, eps, artifact.base_protocol)
    n = model.n
    if phi is None:
        phi = BudgetPhi(artifact.budget, artifact.budget, n)
    budget = [node_cap]
    L = pi0.length

    def consistent(path):
        return [
            (counts, pair)
            for counts, pair in model.cost_profiles(path)
            if phi.allows(*counts)
        ]

    def build(path, worlds):
        budget[0] -= 1
        if budget[0] < 0:
            raise MaterializationCapError(f"node cap {node_cap} exceeded")
        if len(path) == n:
            lits = set()
            for _counts, (x, y) in worlds:
                rep = replay_forced_run(pi0, eps, x, y, path)
                for out in rep.outputs(pi0):
                    if len(out) < L:
                        raise HardeningError(
                            "consistent run fails to complete the base protocol"
                        )
                    lits.add(pi0.literal_of(out))
            if len(lits) != 1:
                raise HardeningError(f"ambiguous leaf literal at depth-{n} node: {lits}")
            return Leaf(lits.pop())
        # speaker at the next round is path-determined
        probe = replay_forced_run(pi0, eps, *worlds[0][1], path + ((0, 0, None),))
        speaker = probe.speakers[-1]
        candidates = set()
        can_corrupt = False
        for counts, (x, y) in worlds:
            rep = replay_forced_run(pi0, eps, x, y, path + ((0, 0, None),))
            candidates.add(rep.sents[-1])
            limit = phi.limits[speaker]
            if counts[speaker] < limit:
                can_corrupt = True
        if can_corrupt:
            candidates.update(_iter_alphabet(model.C))
        kept = []
        for sym in sorted(candidates, key=lambda s: (s[0], s[1], -1 if s[2] is None else s[2])):
            child = path + (sym,)
            child_worlds = consistent(child)
            if child_worlds:
                kept.append(build(child, child_worlds))
        if not kept:
            raise HardeningError(f"reachable node at depth {len(path)} has no child")
        kind = AND if speaker == ALICE else OR
        return Gate(kind, tuple(kept))

    worlds = consistent(())
    if not worlds:
        raise HardeningError("root unreachable")
    return formula(build((), worlds), artifact.source.n_vars)


# ---------------------------------------------------------------------------
# The pipeline


def materialize_resilient_formula(source, phi=None, node_cap: int = 20000) -> Formula:
    """Reverse transform over the Phi-reachable tree: a hardened artifact's
    resilient protocol, or a plain protocol tree."""
    if isinstance(source, HardenedArtifact):
        return materialize_from_scheme(source, phi, node_cap)
    return materialize_from_tree(source, phi, node_cap)


@dataclass
class HardenedArtifact:
    source: Formula
    balanced: Formula
    base_protocol: Protocol
    pi0: TreeAlternatingProtocol
    eps: Fraction
    n_rounds: int
    C: int
    fan_in: int
    budget: Fraction          # per-direction corruption fraction of pi-prime
    accounting: dict
    fprime: Formula | None = None
    notes: list = field(default_factory=list)


def harden(f: Formula, eps, materialize: bool = True, node_cap: int = 20000) -> HardenedArtifact:
    """End-to-end pipeline: balance, forward transform, wrap in the
    constant-alphabet scheme, account for the reverse transform; the output
    formula itself is materialized only under the node cap."""
    eps = as_fraction(eps)
    if not Fraction(0) < eps <= Fraction(1, 10):
        raise HardeningError("hardening needs 0 < eps <= 1/10")
    balanced = balance(f)
    base = formula_to_protocol(balanced)  # rejects constant formulas
    pi0 = TreeAlternatingProtocol(base)
    c, fan_in = alphabet_params(eps)
    n = math.ceil(Fraction(pi0.length) / eps)
    budget = Fraction(1, 5) - 2 * eps
    accounting = {
        "base_length": pi0.length,
        "rounds": n,
        "depth": n,
        "C": c,
        "fan_in": fan_in,
        "alphabet_size": fan_in,
        "overhead_ratio": Fraction(n, pi0.length),
        "size_bound": fan_in**n,
        "channel_budget": (budget, budget),
        "path_budget_limits": (math.floor(budget * n), math.floor(budget * n)),
    }
    artifact = HardenedArtifact(
        source=f, balanced=balanced, base_protocol=base, pi0=pi0, eps=eps,
        n_rounds=n, C=c, fan_in=fan_in, budget=budget, accounting=accounting,
    )
    if materialize:
        try:
            artifact.fprime = materialize_from_scheme(artifact, node_cap=node_cap)
        except MaterializationCapError as exc:
            artifact.notes.append(f"materialization skipped: {exc}")
    else:
        artifact.notes.append("materialization not requested")
    return artifact


def certify_protocol_resilience(artifact: HardenedArtifact, adversaries=None,
                                trials: int = 200, seed: int = 0) -> dict:
    """Run the resilient protocol across sampled input pairs and adversaries;
    every decoded output must be a valid game answer."""
    from .attacks import stock_adversaries

    rng = random.Random(seed)
    advs = adversaries if adversaries is not None else stock_adversaries(seed=seed)
    names = sorted(advs)
    base = artifact.base_protocol
    report = {
        "runs": 0,
        "failures": [],
        "violations": [],
        "budget_usage": {0: 0, 1: 0},
        "by_adversary": {name: 0 for name in names},
    }
    for t in range(trials):
        x = base.x_domain[rng.randrange(len(base.x_domain))]
        y = base.y_domain[rng.randrange(len(base.y_domain))]
        name = names[rng.randrange(len(names))]
        res = simulate_small(artifact.pi0, artifact.eps, x, y, advs[name],
                             seed=rng.randrange(2**31))
        report["runs"] += 1
        report["by_adversary"][name] += 1
        report["budget_usage"][0] += res.used[0]
        report["budget_usage"][1] += res.used[1]
        if res.failures:
            report["failures"].append((t, name, x, y, res.failures))
            continue
        for out in (res.output_a, res.output_b):
            lit = artifact.pi0.literal_of(out)
            if lit not in kw_valid_outputs(x, y):
                report["failures"].append((t, name, x, y, f"invalid literal {lit}"))
        if res.violations:
            report["violations"].append((t, name, x, y, res.violations))
    return report


def attack_length_precondition(artifact: HardenedArtifact, n_bits: int | None = None) -> dict:
    """Whether the confusion attack's length precondition applies to the
    resilient protocol: it needs n_bits >= rounds * log2(alphabet) + 1, which
    the scheme's blowup rules out for any real parameters."""
    if n_bits is None:
        n_bits = artifact.source.n_vars
    required = artifact.n_rounds * max(1, (artifact.fan_in - 1).bit_length()) + 1
    return {
        "applies": n_bits >= required,
        "n_bits": n_bits,
        "required_bits": required,
        "rounds": artifact.n_rounds,
        "alphabet": artifact.fan_in,
    }
