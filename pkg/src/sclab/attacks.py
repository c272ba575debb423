"""Adversaries: generic stress strategies for the coding schemes, and the
optimal confusion attack against short protocols for the parity game.

The confusion attack builds a received-transcript T out of four noiseless
segments spliced across confusable inputs, then realizes T twice with
budget-respecting noise so that one party sees byte-identical views on two
input pairs whose valid outputs are disjoint; that party must err on one of
the runs.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from typing import Sequence

from .channel import ALICE, BOB, Adversary
from .coding_small import STD
from .formulas import Lit
from .kw import PLeaf, PNode, Protocol, kw_valid_outputs


class AttackError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# Stock adversaries for the coding schemes


class NullAdversary(Adversary):
    name = "null"


class RandomAdversary(Adversary):
    """Corrupts each transmission independently with probability p, with a
    uniformly random in-alphabet replacement."""

    name = "random"

    def __init__(self, p: float = 0.5, seed: int = 0):
        self.p = p
        self.seed = seed
        self.rng = random.Random(seed)

    def fresh(self, seed: int) -> "RandomAdversary":
        return RandomAdversary(self.p, f"{self.seed}/{seed}")

    def decide(self, ctx, index, speaker, symbol, remaining):
        if remaining[speaker] <= 0 or self.rng.random() >= self.p:
            return None
        return random_symbol(ctx, self.rng, index)


class BurstAdversary(Adversary):
    """Corrupts the target party's start-th through (start+length-1)-th own
    transmissions (1-based among that party's rounds)."""

    name = "burst"

    def __init__(self, target: int = ALICE, start: int = 1, length: int = 10**9,
                 seed: int = 0):
        self.target = target
        self.start = start
        self.length = length
        self.seed = seed
        self.rng = random.Random(seed)
        self.seen = 0

    def fresh(self, seed: int) -> "BurstAdversary":
        return BurstAdversary(self.target, self.start, self.length, f"{self.seed}/{seed}")

    def decide(self, ctx, index, speaker, symbol, remaining):
        if speaker != self.target:
            return None
        self.seen += 1
        if not self.start <= self.seen < self.start + self.length:
            return None
        if remaining[speaker] <= 0:
            return None
        return garbled_symbol(ctx, self.rng, index, symbol)


class ChainForkerAdversary(Adversary):
    """Lets the victim build a real chain, then corrupts its transmissions so
    the received symbols extend a forged fork of that chain with garbage
    payload bits, spending the whole budget on a long corrupt chain."""

    name = "chain_forker"

    def __init__(self, seed: int = 0):
        self.seed = seed
        self.rng = random.Random(seed)
        self.victim = None
        self.fork_head = None

    def fresh(self, seed: int) -> "ChainForkerAdversary":
        return ChainForkerAdversary(f"{self.seed}/{seed}")

    def decide(self, ctx, index, speaker, symbol, remaining):
        if self.victim is None:
            self.victim = self.rng.randrange(2)
            self.threshold = max(1, ctx.n // 5 - self.rng.randrange(3))
        if speaker != self.victim or remaining[speaker] <= 0:
            return None
        if ctx._parse_len_now(speaker) < self.threshold:
            return None  # let the real chain grow before forking off its tip
        head = self.fork_head if self.fork_head else ctx.last_unc[speaker]
        bit = self.rng.randrange(2)
        if ctx.small:
            offset = index - head if head else 0
            forged = (min(offset, ctx.C), STD, bit)
        else:
            forged = (head, bit)
        if forged == symbol:
            forged = forged[:-1] + (1 - bit,)
        self.fork_head = index
        return forged


def random_symbol(ctx, rng: random.Random, index: int) -> tuple:
    if ctx.small:
        c = ctx.C
        typ = rng.randrange(4)
        if typ == STD:
            msg = rng.choice((0, 1, None))
        else:
            msg = rng.randrange(c)
        return (rng.randrange(0, c + 1), typ, msg)
    return (rng.randrange(0, index), rng.choice((0, 1, None)))


def garbled_symbol(ctx, rng: random.Random, index: int, symbol: tuple) -> tuple:
    for _ in range(8):
        cand = random_symbol(ctx, rng, index)
        if cand != symbol:
            return cand
    return None


def stock_adversaries(seed: int = 0, p: float = 0.6) -> dict:
    return {
        "null": NullAdversary(),
        "random": RandomAdversary(p=p, seed=seed),
        "burst": BurstAdversary(target=ALICE, start=1, seed=seed),
        "chain_forker": ChainForkerAdversary(seed=seed),
    }


# ---------------------------------------------------------------------------
# Protocols as received-path machines (for the confusion attack)


class PathProtocol:
    """Protocol viewed through received transcripts: the owner and the sent
    symbol at a node depend only on the received prefix (feedback makes both
    parties track it), the leaf literal only on the full received path."""

    length: int
    alphabet: int
    n_vars: int

    def owner(self, path: tuple) -> int:
        raise NotImplementedError

    def symbol(self, path: tuple, own_input) -> int:
        raise NotImplementedError

    def literal(self, path: tuple) -> Lit:
        raise NotImplementedError

    def x_inputs(self) -> Sequence:
        raise NotImplementedError

    def y_inputs(self) -> Sequence:
        raise NotImplementedError


class TreePathProtocol(PathProtocol):
    """Adapter over an explicit protocol tree; rounds past a leaf are dummy
    zeros, so the length can be padded to a multiple of 5."""

    def __init__(self, protocol: Protocol, pad_to_multiple_of: int = 5):
        self.base = protocol
        from .kw import protocol_depth

        self.length = protocol_depth(protocol)
        if pad_to_multiple_of:
            self.length = -(-self.length // pad_to_multiple_of) * pad_to_multiple_of
        self.alphabet = protocol.alphabet
        self.n_vars = protocol.n_vars

    def _node(self, path: tuple):
        node = self.base.root
        for i in path:
            if isinstance(node, PLeaf):
                return node
            node = node.children[min(i, len(node.children) - 1)]
        return node

    def owner(self, path):
        node = self._node(path)
        return node.owner if isinstance(node, PNode) else len(path) % 2

    def symbol(self, path, own_input):
        node = self._node(path)
        if isinstance(node, PLeaf):
            return 0
        mv = node.moves.get(tuple(own_input))
        return mv if mv is not None else 0

    def literal(self, path):
        node = self._node(path)
        while not isinstance(node, PLeaf):
            node = node.children[0]
        return node.lit

    def x_inputs(self):
        return self.base.x_domain

    def y_inputs(self):
        return self.base.y_domain


class BisectionParityProtocol(PathProtocol):
    """The folklore log-depth protocol for the parity game: both parties
    announce the parity of the current interval's left half and recurse into
    the half where the parities differ; a final round sends Alice's bit at
    the surviving index.  Rounds strictly alternate (Alice on even depths);
    rounds after the answer is pinned are dummy zeros.  ``length`` pads to a
    multiple of 5."""

    alphabet = 2

    def __init__(self, n_bits: int, pad_to_multiple_of: int = 5):
        self.n_vars = n_bits
        base = 2 * max(1, (n_bits - 1).bit_length()) + 1
        self.base_length = base
        length = base
        if pad_to_multiple_of:
            length = -(-base // pad_to_multiple_of) * pad_to_multiple_of
        self.length = length

    def owner(self, path):
        return len(path) % 2

    def _state(self, path: tuple):
        """Replay the received bits: returns (lo, hi, i) with [lo, hi) the
        current interval and i the number of bits consumed by full
        announcement pairs.  Bits come in pairs, so path[-1] is a pending
        half-pair exactly when the depth is odd."""
        lo, hi = 0, self.n_vars
        i = 0
        while hi - lo > 1 and i + 1 < len(path):
            mid = (lo + hi + 1) // 2
            if path[i] != path[i + 1]:
                hi = mid
            else:
                lo = mid
            i += 2
        return lo, hi, i

    def symbol(self, path, own_input):
        lo, hi, i = self._state(path)
        if hi - lo == 1 and i < len(path):
            return 0  # answer already sent; dummy padding rounds
        if hi - lo > 1:
            mid = (lo + hi + 1) // 2
            return _par(own_input, lo, mid)
        return own_input[lo]  # Alice announces her bit at the surviving index

    def literal(self, path):
        lo, hi, i = self._state(path)
        if hi - lo != 1 or i >= len(path):
            raise AttackError("path does not decide the parity game")
        return Lit(lo + 1, neg=(path[i] == 1))

    def x_inputs(self):
        return [z for z in itertools.product((0, 1), repeat=self.n_vars) if _par(z, 0, self.n_vars) == 0]

    def y_inputs(self):
        return [z for z in itertools.product((0, 1), repeat=self.n_vars) if _par(z, 0, self.n_vars) == 1]


def _par(z, lo, hi) -> int:
    out = 0
    for i in range(lo, hi):
        out ^= z[i]
    return out


# ---------------------------------------------------------------------------
# The confusion attack


@dataclass
class ConfusableInputs:
    lesser: int          # the party that speaks less in the early window
    x: tuple
    x_prime: tuple
    y: tuple
    y_prime: tuple


@dataclass
class AttackPlan:
    inputs: ConfusableInputs
    segments: tuple      # (|T1|, |T2|, |T3|, |T4|)
    transcript: tuple    # the full crafted received transcript T
    case: str            # "confuse-listener" (T4 empty) or "confuse-speaker"
    confused: int        # side index of the confused party
    run_pairs: tuple     # the two (x, y) pairs presented to the confused party
    forced: tuple        # per run: {round index (1-based) -> forced symbol}


def find_confusable_inputs(protocol: PathProtocol, n_bits: int) -> ConfusableInputs:
    """Inputs realizing the confusion preconditions: two same-prefix inputs
    for the chattier party, and a flipped input for the quieter one making
    the relevant output sets disjoint."""
    r = protocol.length
    if r % 5 != 0:
        raise AttackError("protocol length must be padded to a multiple of 5")
    if n_bits < r * max(1, (protocol.alphabet - 1).bit_length()) + 1:
        raise AttackError("input too short for the protocol length precondition")
    prefix_len = 2 * r // 5
    xs = list(protocol.x_inputs())
    ys = list(protocol.y_inputs())

    def run_prefix(x, y):
        path = []
        counts = [0, 0]
        for _ in range(prefix_len):
            o = protocol.owner(tuple(path))
            counts[o] += 1
            path.append(protocol.symbol(tuple(path), x if o == ALICE else y))
        return tuple(path), counts

    # Exact speaker counts over all pairs, via prefix-tree partitioning of
    # the input sets (each (x, y) pair follows exactly one prefix path).
    totals = [0, 0]
    leaves: list[tuple[tuple, list, list, tuple]] = []

    def dfs(path, cur_x, cur_y, ca, cb):
        if len(path) == prefix_len:
            leaves.append((path, cur_x, cur_y, (ca, cb)))
            return
        o = protocol.owner(path)
        totals[o] += len(cur_x) * len(cur_y)
        groups: dict = {}
        movers = cur_x if o == ALICE else cur_y
        for z in movers:
            groups.setdefault(protocol.symbol(path, z), []).append(z)
        for s in sorted(groups):
            sub = groups[s]
            nxt_x, nxt_y = (sub, cur_y) if o == ALICE else (cur_x, sub)
            dfs(path + (s,), nxt_x, nxt_y,
                ca + (1 if o == ALICE else 0), cb + (1 if o == BOB else 0))

    dfs((), xs, ys, 0, 0)
    lesser = ALICE if totals[0] <= totals[1] else BOB

    # the fixed input of the lesser party maximizing how many opposite inputs
    # keep it quiet in the early window
    quiet_opposites: dict = {}
    for _, leaf_x, leaf_y, (ca, cb) in leaves:
        counts = (ca, cb)
        if counts[lesser] > counts[1 - lesser]:
            continue
        fixed_side, opp_side = (leaf_x, leaf_y) if lesser == ALICE else (leaf_y, leaf_x)
        for fixed in fixed_side:
            bucket = quiet_opposites.setdefault(fixed, [])
            bucket.extend(opp_side)
    fixed_domain = xs if lesser == ALICE else ys
    best_fixed, best_set = None, []
    for fixed in fixed_domain:  # lexicographic; strict improvement keeps the first
        good = quiet_opposites.get(fixed, [])
        if len(good) > len(best_set):
            best_fixed, best_set = fixed, sorted(good)
    if best_fixed is None or len(best_set) < 2:
        raise AttackError("no early-window-quiet input found")

    buckets: dict = {}
    pair = None
    for other in best_set:  # lexicographic scan; first prefix collision wins
        x, y = (best_fixed, other) if lesser == ALICE else (other, best_fixed)
        prefix, _ = run_prefix(x, y)
        if prefix in buckets:
            pair = (buckets[prefix], other)
            break
        buckets[prefix] = other
    if pair is None:
        raise AttackError("pigeonhole failed: no agreeing prefixes (precondition violated?)")

    if lesser == ALICE:
        x = best_fixed
        y, y_prime = pair
        x_prime = tuple(
            y[i] if y[i] == y_prime[i] else 1 - x[i] for i in range(n_bits)
        )
        ci = ConfusableInputs(ALICE, x, x_prime, y, y_prime)
        assert _par(x_prime, 0, n_bits) == 0
        assert not (kw_valid_outputs(x_prime, y) & kw_valid_outputs(x_prime, y_prime))
        assert not (kw_valid_outputs(x_prime, y) & kw_valid_outputs(x, y))
    else:
        y = best_fixed
        x, x_prime = pair
        y_prime = tuple(
            x[i] if x[i] == x_prime[i] else 1 - y[i] for i in range(n_bits)
        )
        ci = ConfusableInputs(BOB, x, x_prime, y, y_prime)
        assert _par(y_prime, 0, n_bits) == 1
        assert not (kw_valid_outputs(x, y_prime) & kw_valid_outputs(x_prime, y_prime))
        assert not (kw_valid_outputs(x, y_prime) & kw_valid_outputs(x, y))
    return ci


def build_attack(protocol: PathProtocol, inputs: ConfusableInputs) -> AttackPlan:
    """Craft the spliced transcript T and the two noise maps realizing it."""
    r = protocol.length
    if r % 5 != 0:
        raise AttackError("protocol length must be a multiple of 5")
    lesser = inputs.lesser
    chatty = 1 - lesser
    if lesser == ALICE:
        pair_1 = (inputs.x, inputs.y)                 # (x0, y0)
        pair_2 = (inputs.x_prime, inputs.y)           # (x1, y0)
        pair_3 = (inputs.x_prime, inputs.y_prime)     # (x1, y1)
    else:
        pair_1 = (inputs.x, inputs.y)
        pair_2 = (inputs.x, inputs.y_prime)
        pair_3 = (inputs.x_prime, inputs.y_prime)

    def extend(path, pair, stop_chatty=None, stop_len=None):
        """Noiseless continuation from the received prefix; stops after the
        chatty party sent ``stop_chatty`` more symbols or at length r."""
        x, y = pair
        sent = 0
        seg = []
        while len(path) + len(seg) < (stop_len or r):
            p = tuple(path) + tuple(seg)
            o = protocol.owner(p)
            seg.append(protocol.symbol(p, x if o == ALICE else y))
            if o == chatty:
                sent += 1
                if stop_chatty is not None and sent == stop_chatty:
                    break
        return seg

    t1 = extend([], pair_1, stop_len=2 * r // 5)
    t2 = extend(t1, pair_2, stop_chatty=r // 5)
    t3 = extend(t1 + t2, pair_3, stop_chatty=r // 5) if len(t1) + len(t2) < r else []
    t4 = extend(t1 + t2 + t3, pair_2) if len(t1) + len(t2) + len(t3) < r else []
    transcript = tuple(t1 + t2 + t3 + t4)
    segs = (len(t1), len(t2), len(t3), len(t4))
    b1 = segs[0]
    b2 = b1 + segs[1]
    b3 = b2 + segs[2]

    owners = []
    for d in range(r):
        owners.append(protocol.owner(transcript[:d]))

    def force(rounds, side):
        return {d + 1: transcript[d] for d in rounds if owners[d] == side}

    if not t4:
        # the lesser party cannot tell pair_2 from pair_3
        case = "confuse-listener"
        confused = lesser
        run_pairs = (pair_2, pair_3)
        forced = (
            {**force(range(b1), lesser), **force(range(b2, b3), chatty)},
            {**force(range(b1), lesser), **force(range(b1, b2), chatty)},
        )
    else:
        # the chatty party cannot tell pair_1 from pair_2
        case = "confuse-speaker"
        confused = chatty
        run_pairs = (pair_1, pair_2)
        forced = (
            {**force(range(b1, r), lesser), **force(range(b2, b3), chatty)},
            {**force(range(b1), lesser), **force(range(b2, b3), chatty)},
        )
    return AttackPlan(inputs, segs, transcript, case, confused, run_pairs, forced)


@dataclass
class AttackReport:
    plan: AttackPlan
    views: tuple           # per run: (confused party's input, received transcript)
    outputs: tuple         # per run: output literal
    valid: tuple           # per run: literal valid for the true inputs?
    corruptions: tuple     # per run: (alice count, bob count)
    confused: int

    @property
    def succeeded(self) -> bool:
        return self.views[0] == self.views[1] and not all(self.valid)


def execute_attack(protocol: PathProtocol, plan: AttackPlan) -> AttackReport:
    """Run the protocol twice under the plan's noise and audit the claim."""
    r = protocol.length
    views = []
    outputs = []
    valid = []
    budgets = []
    for (x, y), noise in zip(plan.run_pairs, plan.forced):
        path = []
        counts = [0, 0]
        for d in range(r):
            p = tuple(path)
            o = protocol.owner(p)
            sent = protocol.symbol(p, x if o == ALICE else y)
            recv = noise.get(d + 1, sent)
            if recv != sent:
                counts[o] += 1
            path.append(recv)
        if tuple(path) != plan.transcript:
            raise AttackError("realized transcript differs from the crafted one")
        lit = protocol.literal(tuple(path))
        conf_input = x if plan.confused == ALICE else y
        views.append((conf_input, tuple(path)))
        outputs.append(lit)
        valid.append(lit in kw_valid_outputs(x, y))
        budgets.append(tuple(counts))
        if counts[0] > r // 5 or counts[1] > r // 5:
            raise AttackError("attack exceeded the (1/5, 1/5) budget")
    if views[0] != views[1]:
        raise AttackError("confused party's views differ (plan construction bug)")
    return AttackReport(plan, tuple(views), tuple(outputs), tuple(valid),
                        tuple(budgets), plan.confused)


def attack_kw_parity(n_bits: int = 12) -> AttackReport:
    """End-to-end demonstration against the bisection parity protocol."""
    protocol = BisectionParityProtocol(n_bits)
    inputs = find_confusable_inputs(protocol, n_bits)
    plan = build_attack(protocol, inputs)
    return execute_attack(protocol, plan)
