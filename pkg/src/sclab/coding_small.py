"""Constant-alphabet coding scheme with variable-length link encoding.

Symbols are ``(link, type, msg)`` with ``link`` in 0..C, ``type`` one of
std/start/stop/cont and ``msg`` a base-protocol bit (or None) for std
symbols or a base-C pointer digit for encoding fragments.  A std symbol's
link is the relative offset to the sender's latest uncorrupted round; when
that offset exceeds C the sender first transmits the offset as a digit
sequence: a start fragment, cont fragments, and a stop fragment, each
fragment's own link chaining to the previous uncorrupted round.  Decoding
walks fragments backward from a stop, recursing into nested encodings, and
lands ``value`` rounds before the start fragment.

``C`` is ``2**ceil(log2(1/eps))`` and the per-direction budget is
``floor((1/5 - 2*eps) * n)``.  Parsing, speaker selection and transcript
reconstruction mirror the large-alphabet scheme, with encoding fragments
treated as opaque: a fragment at the head of a received stream parses to
the empty chain, exactly matching the corrupted rounds its transformed
large-alphabet twin would carry.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from . import channel as ch
from . import coding_large as cl
from .channel import ALICE, BOB, Adversary
from .coding_large import RunResult, SchemeError, temp_transcript
from .formulas import as_fraction

STD, START, STOP, CONT = 0, 1, 2, 3
TYPE_NAMES = ("std", "start", "stop", "cont")


def alphabet_params(eps) -> tuple[int, int]:
    """(C, alphabet size) for a given eps: C = 2**ceil(log2(1/eps)) and
    |Sigma| = (C+1) * 4 * (C+3)."""
    eps = as_fraction(eps)
    if eps <= 0:
        raise SchemeError("eps must be positive")
    inv = math.ceil(Fraction(1) / eps)
    c = 1 << max(1, (inv - 1).bit_length())
    return c, (c + 1) * 4 * (c + 3)


def encode_gap(gap: int, c: int) -> list[int]:
    """Big-endian log2(C)-bit digit groups of the gap, zero-padded to whole
    groups.  Always at least two digits for gaps above C."""
    logc = c.bit_length() - 1
    nbits = max(gap.bit_length(), 1)
    groups = -(-nbits // logc)
    return [(gap >> ((groups - 1 - k) * logc)) & (c - 1) for k in range(groups)]


def _decode(stream: Mapping[int, tuple], t: int, c: int):
    """Walk an encoding backward from the stop fragment at round t.

    Returns (value, landing, ok): the decoded gap, the absolute round it
    points at (start round minus value), and whether the walk was well
    formed.  Nested encodings are resolved first and the outer walk resumes
    from their landing point.
    """
    sym = stream.get(t)
    if sym is None or sym[1] != STOP or not _digit_ok(sym[2], c):
        return 0, 0, False
    digits = [sym[2]]
    prev = t
    j = t - sym[0]
    while 0 < j < prev:
        s = stream.get(j)
        if s is None:
            return 0, 0, False
        typ = s[1]
        if typ == CONT:
            if not _digit_ok(s[2], c):
                return 0, 0, False
            digits.append(s[2])
            prev, j = j, j - s[0]
        elif typ == START:
            if not _digit_ok(s[2], c):
                return 0, 0, False
            digits.append(s[2])
            value = 0
            for d in reversed(digits):
                value = value * c + d
            landing = j - value
            return value, landing, value > 0 and landing >= 0
        elif typ == STOP:
            _v, landing, ok = _decode(stream, j, c)
            if not ok or not 0 < landing < j:
                return 0, 0, False
            prev, j = j, landing
        else:  # std inside an encoding: malformed
            return 0, 0, False
    return 0, 0, False


def _digit_ok(d, c: int) -> bool:
    return isinstance(d, int) and 0 <= d < c


def effective_address(messages: Sequence[tuple], c: int) -> int:
    """Decoded gap value of the encoding ending at the last message, or the
    error value 0 when the last message is not a well-formed stop."""
    stream = {i: m for i, m in enumerate(messages, start=1)}
    value, _landing, ok = _decode(stream, len(messages), c)
    return value if ok else 0


def resolve_link_target(stream: Mapping[int, tuple], t: int, c: int) -> int:
    """Resolve a link target through any stop fragments to the std round the
    chain continues at; 0 when the walk dead-ends."""
    while True:
        if t <= 0:
            return 0
        sym = stream.get(t)
        if sym is None:
            return 0
        if sym[1] == STD:
            return t
        if sym[1] == STOP:
            _v, landing, ok = _decode(stream, t, c)
            if not ok or landing >= t:
                return 0
            t = landing
        else:
            return 0


def parse_chain_small(messages: Sequence[tuple], c: int) -> list[int]:
    return parse_chain_small_at({i: m for i, m in enumerate(messages, start=1)}, c)


def parse_chain_small_at(stream: Mapping[int, tuple], c: int,
                         head: int | None = None) -> list[int]:
    """Parse one party's received stream: std messages join the chain, stop
    fragments reroute the walk via the decoded gap, and a non-std symbol at
    the head parses to the empty chain (fragments are not real messages)."""
    if head is None:
        head = max(stream, default=0)
    if head == 0 or head not in stream:
        return []
    if stream[head][1] != STD:
        return []
    chain = [head]
    j = head
    while True:
        lnk = stream[j][0]
        if lnk == 0:
            break
        t = j - lnk
        if t <= 0:
            break
        q = resolve_link_target(stream, t, c)
        if q == 0 or q >= j:
            break
        chain.append(q)
        j = q
    chain.reverse()
    return chain


def next_speaker_small(r_a, r_b, n: int, c: int) -> int:
    return cl.next_speaker(r_a, r_b, n, parse=lambda s: parse_chain_small_at(s, c))


def _std_payload(sym):
    return sym[2] if sym[1] == STD else None


def temp_transcript_small(own_sent, own_delivered, other_received, c: int,
                          speakers=None, own_side=None) -> str:
    return temp_transcript(
        own_sent, own_delivered, other_received,
        parse=lambda s: parse_chain_small_at(s, c),
        payload=_std_payload,
        good_sym=lambda sym: sym[1] == STD,
        speakers=speakers,
        own_side=own_side,
    )


# ---------------------------------------------------------------------------
# Reduction to the large-alphabet scheme


def to_large_instance(records: Sequence[ch.RoundRecord], c: int):
    """Map a small-scheme transcript to its large-alphabet twin.

    Std symbols get their link resolved to an absolute round index (through
    stop fragments); encoding fragments and corrupted rounds become
    corrupted large-alphabet rounds (fragments carry a self-link so their
    chain parses empty, matching the small-side parse).  Returns a list of
    (index, speaker, large_symbol, corrupted_in_large).
    """
    streams: tuple[dict, dict] = ({}, {})
    out = []
    for rec in records:
        stream = streams[rec.speaker]
        stream[rec.index] = rec.received
        sym = rec.received
        if sym[1] != STD:
            out.append((rec.index, rec.speaker, (rec.index, None), True))
            continue
        lnk = sym[0]
        q = 0
        if lnk:
            t = rec.index - lnk
            q = resolve_link_target(stream, t, c) if t > 0 else 0
            if q >= rec.index:
                q = 0
        out.append((rec.index, rec.speaker, (q, sym[2]), rec.corrupted))
    return out


def parse_equality_report(records: Sequence[ch.RoundRecord], c: int) -> list[str]:
    """Reference per-round check: after every round, each party's parsed
    chain equals the large-alphabet parse of the transformed prefix."""
    problems = []
    large = to_large_instance(records, c)
    small_streams: tuple[dict, dict] = ({}, {})
    large_streams: tuple[dict, dict] = ({}, {})
    for rec, (_, _, lsym, _) in zip(records, large):
        p = rec.speaker
        small_streams[p][rec.index] = rec.received
        large_streams[p][rec.index] = lsym
        got_small = parse_chain_small_at(small_streams[p], c)
        got_large = cl.parse_chain_at(large_streams[p])
        if got_small != got_large:
            problems.append(
                f"round {rec.index}: parse mismatch {got_small} != {got_large}"
            )
    return problems


# ---------------------------------------------------------------------------
# Simulation


class _SmallSimulation(cl._Simulation):
    small = True

    def __init__(self, pi0, eps, x, y, adversary, seed=0, checks=True,
                 collect_rounds=False):
        self.C, self.alphabet_size = alphabet_params(eps)
        super().__init__(pi0, eps, x, y, adversary, seed, checks, collect_rounds)
        self.stacks = ([], [])       # per party: list of frames (lists of (type, digit))
        self.enc_unc = 0             # uncorrupted non-std rounds
        self.max_stack_depth = 0
        self.fragments_sent = [0, 0]
        self.large_link = [0] * (self.n + 1)
        self.large_len = [0] * (self.n + 1)
        self.large_headok = [True] * (self.n + 1)
        self.large_corrupt = [False] * (self.n + 1)
        self._decode_memo: tuple[dict, dict] = ({}, {})

    def _check_eps(self, eps: Fraction) -> None:
        if not Fraction(0) < eps <= Fraction(1, 10):
            raise SchemeError("small scheme needs 0 < eps <= 1/10")

    def _budget_fraction(self, eps: Fraction) -> Fraction:
        return Fraction(1, 5) - 2 * eps

    def _payload(self, sym):
        return sym[2] if sym[1] == STD else None

    def _resolve(self, p: int, t: int) -> int:
        memo = self._decode_memo[p]
        got = memo.get(t)
        if got is None:
            got = resolve_link_target(self.streams[p], t, self.C)
            memo[t] = got
        return got

    def _register(self, i: int, p: int, sym: tuple, corrupted: bool) -> None:
        typ = sym[1]
        if typ == STD:
            lnk = sym[0]
            prev = 0
            if lnk:
                t = i - lnk
                if t > 0:
                    q = self._resolve(p, t)
                    if 0 < q < i:
                        prev = q
            self.chainprev[i] = prev
            self.chainlen[i] = self.chainlen[prev] + 1 if prev else 1
            self.headok[i] = True
        else:
            self.chainprev[i] = 0
            self.chainlen[i] = 1
            self.headok[i] = False
        self.eff[i] = not corrupted and self.sent[i][1] == STD
        # transformed large-alphabet twin
        if typ != STD:
            self.large_link[i], self.large_corrupt[i] = i, True
            self.large_len[i], self.large_headok[i] = 1, False
        else:
            q = self.chainprev[i]
            self.large_link[i] = q
            self.large_corrupt[i] = corrupted
            valid = 0 < q < i and self.speaker[q] == p
            self.large_len[i] = self.large_len[q] + 1 if valid else 1
            self.large_headok[i] = True

    def _sender_symbol(self, i: int, p: int) -> tuple:
        c = self.C
        lu = self.last_unc[p]
        gap = i - lu if lu else 0
        stack = self.stacks[p]
        top = stack[-1][0] if stack else None
        if gap > c and (top is None or top[0] != START):
            digits = encode_gap(gap, c)
            frame = [(START, digits[0])]
            frame += [(CONT, d) for d in digits[1:-1]]
            frame.append((STOP, digits[-1]))
            stack.append(frame)
            top = frame[0]
            if len(stack) > self.max_stack_depth:
                self.max_stack_depth = len(stack)
        if top is not None:
            typ, digit = top
            self.fragments_sent[p] += 1
            link = 0 if typ == START else gap
            return (link, typ, digit)
        bits, tlen = self._sender_tt(p, i)
        return (gap, STD, self._next_bit(p, bits, tlen))

    def _after_send(self, i: int, p: int, sent_sym: tuple, corrupted: bool) -> None:
        typ = sent_sym[1]
        stack = self.stacks[p]
        if typ != STD and stack:
            if not corrupted:
                frame = stack[-1]
                frame.pop(0)
                if not frame:
                    stack.pop()
            elif typ == START:
                # the pending gap value was measured from this round; discard
                # the whole frame and re-encode fresh on the next turn
                stack.pop()
        if typ != STD and not corrupted:
            self.enc_unc += 1
        if self.checks and self.headok[i]:
            if self._headlen(i) != (self.large_len[i] if self.large_headok[i] else 0):
                self._viol(f"round {i}: transformed-instance chain length differs")

    def _round_checks(self, i: int, p: int, corrupted: bool) -> None:
        pass  # the large-alphabet invariants are carried by the reduction

    def _final_checks(self) -> None:
        if not self.checks:
            return
        if self.enc_unc > self.eps * self.n:
            self._viol("final: uncorrupted encoding rounds exceed eps*n")
        large_limit = math.floor((Fraction(1, 5) - self.eps) * self.n)
        for p in (ALICE, BOB):
            mapped = sum(
                1 for r in self.rounds_of[p]
                if self.large_corrupt[r]
            )
            if mapped > large_limit:
                self._viol("final: transformed instance exceeds the (1/5-eps) budget")
        # full-chain equality between both parses at the final heads
        for p in (ALICE, BOB):
            small = parse_chain_small_at(self.streams[p], self.C)
            large = cl.parse_chain_at(
                {r: (self.large_link[r], None) for r in self.rounds_of[p]}
            )
            if small != large:
                self._viol("final: parse mismatch against the transformed instance")

    def _extras(self) -> dict:
        out = super()._extras()
        out["C"] = self.C
        out["alphabet_size"] = self.alphabet_size
        out["uncorrupted_fragments"] = self.enc_unc
        out["fragments_sent"] = tuple(self.fragments_sent)
        out["max_stack_depth"] = self.max_stack_depth
        return out

    def _reference_parse(self):
        c = self.C
        return lambda s: parse_chain_small_at(s, c)

    def _good_sym(self):
        return lambda sym: sym[1] == STD


@dataclass
class ForcedReplay:
    """Deterministic replay of both honest senders when every received symbol
    is forced.  The corruption set is exactly the rounds where the forced
    symbol differs from what the sender (replayed honestly) transmitted."""

    n: int
    C: int
    speakers: list
    sents: list
    corrupted: list
    counts: tuple      # per-side corruption counts
    _state: dict

    def outputs(self, pi0, speakers_full=None):
        sent_by, recv_of = self._state["sent_by"], self._state["recv_of"]
        c = self.C
        outs = []
        full = [0] + self.speakers
        for side in (ALICE, BOB):
            j_own = _argmax_prefix_small(recv_of[side], self.n, c)
            j_other = _argmax_prefix_small(recv_of[1 - side], self.n, c)
            outs.append(
                temp_transcript_small(
                    sent_by[side],
                    {r: s for r, s in recv_of[side].items() if r <= j_own},
                    {r: s for r, s in recv_of[1 - side].items() if r <= j_other},
                    c,
                    speakers=full,
                    own_side=side,
                )
            )
        return tuple(outs)


def _argmax_prefix_small(stream, n, c):
    best_len, best_j = 0, 0
    for j in range(n + 1):
        ln = len(parse_chain_small_at({r: s for r, s in stream.items() if r <= j}, c))
        if ln >= best_len:
            best_len, best_j = ln, j
    return best_j


def replay_forced_run(pi0, eps, x, y, received: Sequence[tuple]) -> ForcedReplay:
    """Replay the scheme with the given received symbols (round 1 onward,
    possibly a strict prefix of the n rounds)."""
    eps = as_fraction(eps)
    L = pi0.length
    n = math.ceil(Fraction(L) / eps)
    c, _ = alphabet_params(eps)
    if len(received) > n:
        raise SchemeError("forced path longer than the run")
    inputs = (x, y)
    sent_by: tuple[dict, dict] = ({}, {})
    recv_of: tuple[dict, dict] = ({}, {})
    last_unc = [0, 0]
    stacks: tuple[list, list] = ([], [])
    speakers, sents, corrupted = [], [], []
    counts = [0, 0]
    for i, recv in enumerate(received, start=1):
        p = next_speaker_small(recv_of[BOB], recv_of[ALICE], n, c)
        gap = i - last_unc[p] if last_unc[p] else 0
        stack = stacks[p]
        top = stack[-1][0] if stack else None
        if gap > c and (top is None or top[0] != START):
            digits = encode_gap(gap, c)
            frame = [(START, digits[0])]
            frame += [(CONT, d) for d in digits[1:-1]]
            frame.append((STOP, digits[-1]))
            stack.append(frame)
            top = frame[0]
        if top is not None:
            typ, digit = top
            sym = (0 if typ == START else gap, typ, digit)
        else:
            t = temp_transcript_small(sent_by[p], recv_of[p], recv_of[1 - p], c)
            b = None
            if len(t) < L and pi0.speaker_of(len(t) + 1) == p:
                b = pi0.next_bit(p, inputs[p], t)
            sym = (gap, STD, b)
        corr = recv != sym
        if corr:
            counts[p] += 1
        if sym[1] != STD and stack:
            if not corr:
                stack[-1].pop(0)
                if not stack[-1]:
                    stack.pop()
            elif sym[1] == START:
                stack.pop()
        sent_by[p][i] = sym
        recv_of[p][i] = recv
        if not corr:
            last_unc[p] = i
        speakers.append(p)
        sents.append(sym)
        corrupted.append(corr)
    return ForcedReplay(
        n, c, speakers, sents, corrupted, tuple(counts),
        {"sent_by": sent_by, "recv_of": recv_of},
    )


def simulate_small(pi0, eps, x, y, adversary: Adversary | None = None, seed: int = 0,
                   checks: bool = True, collect_rounds: bool = False) -> RunResult:
    """Run the constant-alphabet scheme for ``ceil(len/eps)`` rounds against
    the given adversary (budgets (1/5-2*eps, 1/5-2*eps), floored)."""
    adversary = adversary or ch.NullAdversary()
    return _SmallSimulation(pi0, eps, x, y, adversary, seed, checks, collect_rounds).run()
