"""Chain-linking coding scheme over a polynomial-size alphabet.

Each transmitted symbol is ``(link, b)``: ``link`` is the absolute index of
the sender's latest uncorrupted round (0 if none) and ``b`` is the next
base-protocol bit given the sender's current view, or None when it is the
other party's turn (or the base protocol has finished).  Walking the links
from the latest received symbol recovers a chain of rounds; the transcript
implied by the good rounds provably extends the base protocol, and at the
end each party outputs the transcript implied by its longest chain.

The speaking order is epoch-driven: each epoch opens with a fixed
Alice-then-Bob pair of rounds, and a third round exists exactly when one
party's parsed chain is still short (at most n/5) while the other's is not;
the short-chained party skips and the other speaks again.

``simulate`` runs a full instrumented simulation; ``parse_chain``,
``next_speaker`` and ``temp_transcript`` are the standalone procedures it
is built from.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from . import channel as ch
from .channel import ALICE, BOB, Adversary, BudgetLedger
from .formulas import as_fraction


class SchemeError(ValueError):
    pass


def make_symbol(link: int, b: int | None) -> tuple:
    return (link, b)


def parse_chain(messages: Sequence[tuple]) -> list[int]:
    """Walk links from the last message; positions are 1-based."""
    return parse_chain_at({i: m for i, m in enumerate(messages, start=1)})


def parse_chain_at(stream: Mapping[int, tuple], head: int | None = None) -> list[int]:
    """Parse one party's received stream (round -> symbol) from ``head``
    (default: the latest round).  A self- or forward-pointing link at the
    head yields the empty chain; mid-walk, an invalid link ends the walk
    with the rounds collected so far.  Ascending round order."""
    if head is None:
        head = max(stream, default=0)
    if head == 0 or head not in stream:
        return []
    if stream[head][0] >= head:
        return []
    chain = [head]
    j = head
    while True:
        nxt = stream[j][0]
        if nxt <= 0 or nxt >= j or nxt not in stream:
            break
        j = nxt
        chain.append(j)
    chain.reverse()
    return chain


def next_speaker(r_a: Mapping[int, tuple], r_b: Mapping[int, tuple], n: int,
                 parse=parse_chain_at) -> int:
    """Speaker of the next round, replaying the epoch structure from round 1.

    ``r_a``/``r_b`` are the symbols received by Alice resp. Bob so far (so
    ``r_b`` holds Alice's transmissions).  The first two rounds of an epoch
    are fixed Alice, Bob; a third exists iff exactly one party's chain is
    short (<= n/5), and the short party skips it."""
    i = len(r_a) + len(r_b) + 1
    j = 1
    while True:
        if i == j:
            return ALICE
        if i == j + 1:
            return BOB
        alice_len = len(parse({r: s for r, s in r_b.items() if r < j + 2}))
        bob_len = len(parse({r: s for r, s in r_a.items() if r < j + 2}))
        a_skip = 5 * alice_len <= n
        b_skip = 5 * bob_len <= n
        if a_skip != b_skip:
            if i == j + 2:
                return BOB if a_skip else ALICE
            j += 3
        else:
            j += 2


def temp_transcript(
    own_sent: Mapping[int, tuple],
    own_delivered: Mapping[int, tuple],
    other_received: Mapping[int, tuple],
    parse=parse_chain_at,
    payload=lambda sym: sym[1],
    good_sym=lambda sym: True,
    speakers: Sequence[int] | None = None,
    own_side: int | None = None,
) -> str:
    """The transcript implied by the viewer's information.

    Good own rounds are those whose delivered symbol matches what was sent
    (known via feedback); the other party's good rounds are estimated by
    parsing the received stream.  A round joins the good chain when it and
    the latest preceding opposite round are both good; the returned string
    concatenates their payload bits in round order.

    ``speakers`` optionally supplies the full speaker schedule (1-based) so
    truncated views still see the true round structure.
    """
    good_own = {
        i
        for i, sym in own_delivered.items()
        if own_sent.get(i) == sym and good_sym(sym)
    }
    g = good_own | set(parse(other_received))
    if speakers is not None:
        if own_side is None:
            raise SchemeError("own_side required with explicit speakers")
        rounds = [(i, speakers[i] == own_side) for i in range(1, len(speakers))]
    else:
        own_rounds = set(own_sent) | set(own_delivered)
        rounds = [(i, i in own_rounds) for i in sorted(own_rounds | set(other_received))]
    bits = []
    last_own = last_other = 0
    for i, mine in rounds:
        prev = last_other if mine else last_own
        if i in g and (prev == 0 or prev in g):
            sym = own_delivered.get(i) if mine else other_received.get(i)
            if sym is not None:
                b = payload(sym)
                if b is not None:
                    bits.append(str(b))
        if mine:
            last_own = i
        else:
            last_other = i
    return "".join(bits)


@dataclass
class RunResult:
    n: int
    base_length: int
    output_a: str
    output_b: str
    ok_a: bool
    ok_b: bool
    failures: list
    violations: list
    flags: list
    used: tuple
    limits: tuple
    skip_counts: tuple
    round_counts: tuple
    records: list
    rounds: list | None
    extras: dict

    @property
    def ok(self) -> bool:
        return not self.failures and not self.violations


ROUND_COLUMNS = (
    "index", "speaker", "corrupted", "t_len",
    "skip_a", "skip_b", "chain_a", "chain_b",
)


class _Simulation:
    """One instrumented run.  Incremental chain/transcript caches are used in
    the hot loop; their semantics are pinned by the standalone procedures
    above (cross-checked in the test suite)."""

    small = False

    def __init__(self, pi0, eps, x, y, adversary: Adversary, seed: int = 0,
                 checks: bool = True, collect_rounds: bool = False):
        eps = as_fraction(eps)
        self._check_eps(eps)
        self.pi0 = pi0
        self.eps = eps
        self.L = pi0.length
        self.n = n = math.ceil(Fraction(self.L) / eps)
        self.inputs = (x, y)
        budget = self._budget_fraction(eps)
        self.ledger = BudgetLedger(n, budget, budget)
        self.adversary = adversary.fresh(seed)
        self.checks = checks
        self.collect_rounds = collect_rounds
        self.pi_ref = pi0.transcript(x, y)
        self.cap = self.L + 4

        size = n + 1
        self.speaker = [0] * size
        self.sent = [None] * size
        self.recv = [None] * size
        self.corrupt = [False] * size
        self.prev_opp = [0] * size
        self.chainprev = [0] * size
        self.chainlen = [0] * size
        self.headok = [True] * size
        self.chain_true = [False] * size
        self.eff = [False] * size
        self.streams = ({}, {})       # per party: round -> received symbol
        self.rounds_of = ([], [])
        self.last_round = [0, 0]
        self.last_unc = [0, 0]
        self.best = [(0, 0), (0, 0)]  # per party: (chain len, head round)
        self.rc = [0, 0]
        self.used_first = [0, 0]
        self.fl_n5 = n // 5
        self.fl_2n5 = (2 * n) // 5

        self.ttmemo = ({}, {})
        self.ttzero = [["", 0, 0], ["", 0, 0]]  # bits, tlen, scanned-upto
        self.t_true = []
        self.tlen_true = 0
        self.good_count = 0

        self.ep_j = 1
        self.ep_flags = None
        self.epochs = []
        self.skip = [0, 0]
        self.skip_unc = [0, 0]
        self.extra_rounds = [0, 0]  # uncorrupted third-round speeches past 2n/5
        self._round_kind = 0        # 0/1/2 = first/second/third round of its epoch

        self.records = []
        self.violations = []
        self.failures = []
        self.flags = []
        self.round_rows = [] if collect_rounds else None
        self.i_done = 0

    # -- scheme-specific hooks ------------------------------------------

    def _check_eps(self, eps: Fraction) -> None:
        if not Fraction(0) < eps < Fraction(1, 5):
            raise SchemeError("large scheme needs 0 < eps < 1/5")

    def _budget_fraction(self, eps: Fraction) -> Fraction:
        return Fraction(1, 5) - eps

    def _payload(self, sym):
        return sym[1]

    def _sent_is_chain_round(self, sym) -> bool:
        return True

    def _register(self, i: int, p: int, sym: tuple, corrupted: bool) -> None:
        lnk = sym[0]
        pu = self.last_unc[p]
        ok_head = True
        if lnk == 0:
            prev, ln = 0, 1
        elif lnk >= i:
            prev, ln, ok_head = 0, 1, False
        elif self.speaker[lnk] == p and self.recv[lnk] is not None:
            prev, ln = lnk, self.chainlen[lnk] + 1
        else:
            prev, ln = 0, 1
        self.chainprev[i] = prev
        self.chainlen[i] = ln
        self.headok[i] = ok_head
        self.chain_true[i] = (
            not corrupted and prev == pu and (pu == 0 or self.chain_true[pu])
        )
        self.eff[i] = not corrupted

    def _sender_symbol(self, i: int, p: int) -> tuple:
        bits, tlen = self._sender_tt(p, i)
        b = self._next_bit(p, bits, tlen)
        return (self.last_unc[p], b)

    def _after_send(self, i: int, p: int, sym: tuple, corrupted: bool) -> None:
        pass

    # -- shared machinery -------------------------------------------------

    def _next_bit(self, p: int, bits: str, tlen: int):
        if tlen >= self.L:
            return None
        if self.pi0.speaker_of(tlen + 1) != p:
            return None
        return self.pi0.next_bit(p, self.inputs[p], bits[:tlen])

    def _headlen(self, r: int) -> int:
        if r == 0 or not self.headok[r]:
            return 0
        return self.chainlen[r]

    def _parse_len_now(self, p: int) -> int:
        return self._headlen(self.last_round[p])

    def _speaker_for(self, i: int) -> int:
        while True:
            if i == self.ep_j:
                self._round_kind = 0
                return ALICE
            if i == self.ep_j + 1:
                self._round_kind = 1
                return BOB
            if self.ep_flags is None:
                self._record_epoch_flags()
            a_skip, b_skip = self.ep_flags
            if a_skip != b_skip:
                if i == self.ep_j + 2:
                    self._round_kind = 2
                    return BOB if a_skip else ALICE
                self.ep_j += 3
            else:
                self.ep_j += 2
            self.ep_flags = None

    def _record_epoch_flags(self) -> None:
        j = self.ep_j
        a_skip = 5 * self._parse_len_now(ALICE) <= self.n
        b_skip = 5 * self._parse_len_now(BOB) <= self.n
        self.ep_flags = (a_skip, b_skip)
        self.epochs.append((j, a_skip, b_skip))
        if a_skip:
            self.skip[ALICE] += 1
            if j <= self.i_done and not self.corrupt[j]:
                self.skip_unc[ALICE] += 1
        if b_skip:
            self.skip[BOB] += 1
            if j + 1 <= self.i_done and not self.corrupt[j + 1]:
                self.skip_unc[BOB] += 1

    def _tt_zero(self, v: int) -> tuple[str, int]:
        st = self.ttzero[v]
        bits, tlen, scanned = st
        for r in range(scanned + 1, self.i_done + 1):
            if self.speaker[r] == v and self.eff[r] and self.prev_opp[r] == 0:
                b = self._payload(self.sent[r])
                if b is not None:
                    if tlen < self.cap:
                        bits += str(b)
                    tlen += 1
        st[0], st[1], st[2] = bits, tlen, self.i_done
        return bits, tlen

    def _tt(self, v: int, head: int) -> tuple[str, int]:
        if head == 0 or not self.headok[head]:
            return self._tt_zero(v)
        memo = self.ttmemo[v]
        got = memo.get(head)
        if got is not None:
            return got
        stack = []
        h = head
        while h != 0 and h not in memo:
            stack.append(h)
            h = self.chainprev[h]
        cur = memo[h] if h != 0 else ("", 0)
        while stack:
            h2 = stack.pop()
            q = self.chainprev[h2]
            bits, tlen = cur
            for r in range(q + 1, h2 + 1):
                b = None
                if r == h2:
                    pv = self.prev_opp[h2]
                    if pv == 0 or self.eff[pv]:
                        b = self._payload(self.recv[h2])
                elif self.speaker[r] == v and self.eff[r] and self.prev_opp[r] == q:
                    b = self._payload(self.sent[r])
                if b is not None:
                    if tlen < self.cap:
                        bits += str(b)
                    tlen += 1
            cur = (bits, tlen)
            memo[h2] = cur
        return cur

    def _sender_tt(self, p: int, i: int) -> tuple[str, int]:
        head = self.last_round[1 - p]
        if head == 0 or not self.headok[head]:
            return self._tt_zero(p)
        bits, tlen = self._tt(p, head)
        for r in range(head + 1, i):
            if self.speaker[r] == p and self.eff[r] and self.prev_opp[r] == head:
                b = self._payload(self.sent[r])
                if b is not None:
                    if tlen < self.cap:
                        bits += str(b)
                    tlen += 1
        return bits, tlen

    def _viol(self, msg: str) -> None:
        self.violations.append(msg)

    # -- main loop ---------------------------------------------------------

    def run(self) -> RunResult:
        n = self.n
        for i in range(1, n + 1):
            p = self._speaker_for(i)
            self.speaker[i] = p
            self.prev_opp[i] = self.last_round[1 - p]
            sym = self._sender_symbol(i, p)
            self.sent[i] = sym
            record, flag = ch.step(self.ledger, i, p, sym, self.adversary, self)
            if flag:
                self.flags.append(flag)
            recv = record.received
            corrupted = record.corrupted
            self.records.append(record)
            self.recv[i] = recv
            self.corrupt[i] = corrupted
            self.streams[p][i] = recv
            self.rounds_of[p].append(i)
            self.rc[p] += 1
            if corrupted and i <= self.fl_2n5:
                self.used_first[p] += 1
            if self._round_kind == 2 and not corrupted and i > self.fl_2n5:
                self.extra_rounds[p] += 1
            self._register(i, p, recv, corrupted)
            if not corrupted:
                self.last_unc[p] = i
            hl = self._headlen(i)
            if hl > 0 and hl >= self.best[p][0]:
                self.best[p] = (hl, i)
            self.last_round[p] = i
            self.i_done = i
            self._after_send(i, p, self.sent[i], corrupted)

            # true good rounds and the implied transcript
            po = self.prev_opp[i]
            if self.eff[i] and (po == 0 or self.eff[po]):
                self.good_count += 1
                b = self._payload(self.sent[i])
                if b is not None:
                    if self.tlen_true >= self.L:
                        self._viol(f"round {i}: good round extends past the base protocol")
                    elif self.pi_ref[self.tlen_true] != str(b):
                        self._viol(f"round {i}: implied transcript leaves the base protocol")
                    self.t_true.append(str(b))
                    self.tlen_true += 1

            if self.checks:
                self._round_checks(i, p, corrupted)
            if self.round_rows is not None:
                self.round_rows.append((
                    i, p, int(corrupted), self.tlen_true,
                    self.skip[0], self.skip[1],
                    self._parse_len_now(ALICE), self._parse_len_now(BOB),
                ))
        if self.ep_flags is None and self.ep_j <= n:
            self._record_epoch_flags()
        self._final_checks()
        out_a = self._final_output(ALICE)
        out_b = self._final_output(BOB)
        ok_a = len(out_a) >= self.L and out_a[: self.L] == self.pi_ref
        ok_b = len(out_b) >= self.L and out_b[: self.L] == self.pi_ref
        if not ok_a:
            self.failures.append("alice output does not contain the base transcript")
        if not ok_b:
            self.failures.append("bob output does not contain the base transcript")
        return RunResult(
            n=self.n, base_length=self.L,
            output_a=out_a, output_b=out_b, ok_a=ok_a, ok_b=ok_b,
            failures=self.failures, violations=self.violations, flags=self.flags,
            used=tuple(self.ledger.used), limits=self.ledger.limits,
            skip_counts=tuple(self.skip), round_counts=tuple(self.rc),
            records=self.records, rounds=self.round_rows,
            extras=self._extras(),
        )

    def _extras(self) -> dict:
        return {"t_true": "".join(self.t_true), "good_rounds": self.good_count}

    def _round_checks(self, i: int, p: int, corrupted: bool) -> None:
        if not corrupted:
            if not self.chain_true[i]:
                self._viol(f"round {i}: uncorrupted round's chain is not the good set")
            bits, tlen = self._tt(1 - p, i)
            t_bits = "".join(self.t_true[: self.cap])
            if tlen != self.tlen_true or bits != t_bits:
                self._viol(f"round {i}: receiver transcript differs from the implied one")
        t = self.tlen_true
        cap_l = self.L
        usable_a = self.skip_unc[ALICE] - self.ledger.used[BOB]
        usable_b = self.skip_unc[BOB] - self.ledger.used[ALICE]
        if t < min(usable_a, cap_l) or t < min(usable_b, cap_l):
            self._viol(f"round {i}: transcript shorter than the skip/corruption bound")
        if i <= self.fl_2n5:
            used_total = self.ledger.used[0] + self.ledger.used[1]
            if t < min(i // 2 - used_total, cap_l):
                self._viol(f"round {i}: alternating-phase progress bound violated")

    def _final_checks(self) -> None:
        if not self.checks:
            return
        n = self.n
        for p in (ALICE, BOB):
            o = 1 - p
            if abs(2 * self.rc[p] - (n - self.skip[p] + self.skip[o])) > 4:
                self._viol("final: round-count / skip-count relation out of slack")
            # skip-count growth: the chain also grows on extra third-round
            # speeches, which eat into the skips the early corruptions owe
            if self.skip[p] + self.extra_rounds[p] < self.fl_n5 + self.used_first[p]:
                self._viol("final: skip counter below n/5 + early corruptions")
            best_len, best_round = self.best[p]
            limit = self.ledger.limits[p]
            if best_len < self.rc[p] - limit:
                self._viol("final: longest chain shorter than rounds minus budget")
            chain = set()
            r = best_round
            while r:
                chain.add(r)
                r = self.chainprev[r]
            nc = sum(1 for r in chain if not self.corrupt[r])
            d = len(chain) - nc
            j_off = self.ledger.used[p] - d
            if j_off + d > limit:
                self._viol("final: on/off-chain corruption split exceeds the budget")
            if best_round and nc + d != best_len:
                self._viol("final: chain classification does not add up")
            if nc + limit - j_off < self.rc[p] - limit:
                self._viol("final: chain noise inequality violated")

    def _final_output(self, side: int) -> str:
        own_cut = self._prefix_cut(side)
        other_cut = self._prefix_cut(1 - side)
        own_rounds = self.rounds_of[side]
        other_rounds = self.rounds_of[1 - side]
        own_sent = {r: self.sent[r] for r in own_rounds}
        own_delivered = {r: self.recv[r] for r in own_rounds if r <= own_cut}
        other_received = {r: self.recv[r] for r in other_rounds if r <= other_cut}
        return temp_transcript(
            own_sent, own_delivered, other_received,
            parse=self._reference_parse(),
            payload=self._payload,
            good_sym=self._good_sym(),
            speakers=self.speaker,
            own_side=side,
        )

    def _reference_parse(self):
        return parse_chain_at

    def _good_sym(self):
        return lambda sym: True

    def _prefix_cut(self, p: int) -> int:
        best_len, best_round = self.best[p]
        if best_round == 0:
            return self.n
        if self._parse_len_now(p) == best_len:
            return self.n
        rounds = self.rounds_of[p]
        import bisect

        k = bisect.bisect_right(rounds, best_round)
        return rounds[k] - 1 if k < len(rounds) else self.n


def simulate(pi0, eps, x, y, adversary: Adversary | None = None, seed: int = 0,
             checks: bool = True, collect_rounds: bool = False) -> RunResult:
    """Run the large-alphabet scheme for ``ceil(len/eps)`` rounds against the
    given adversary (budgets (1/5-eps, 1/5-eps), floored)."""
    adversary = adversary or ch.NullAdversary()
    return _Simulation(pi0, eps, x, y, adversary, seed, checks, collect_rounds).run()
