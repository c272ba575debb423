"""Round-driven noisy channel with noiseless feedback.

Every transmission produces a RoundRecord holding what was sent and what
the receiver got.  Feedback is noiseless: after the round, both parties
know the received symbol, so the sent/received pair is common knowledge to
the sender and the received symbol to both.  An adversary may replace the
symbol in flight, charged against a per-sender budget ledger; over-budget
or no-op replacements are downgraded to Keep and flagged.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Sequence

from .formulas import as_fraction

ALICE, BOB = 0, 1
SIDE_NAMES = ("alice", "bob")


@dataclass(frozen=True, slots=True)
class RoundRecord:
    index: int
    speaker: int
    sent: tuple
    received: tuple
    corrupted: bool

    def __post_init__(self):
        if self.corrupted != (self.sent != self.received):
            raise ValueError("corrupted flag must mirror sent != received")


class BudgetLedger:
    """Counts corruptions per sender against floor(alpha*n) / floor(beta*n)."""

    def __init__(self, n: int, alpha, beta):
        self.n = n
        self.alpha = as_fraction(alpha)
        self.beta = as_fraction(beta)
        self.limits = (math.floor(self.alpha * n), math.floor(self.beta * n))
        self.used = [0, 0]

    def remaining(self) -> tuple[int, int]:
        return (self.limits[0] - self.used[0], self.limits[1] - self.used[1])

    def charge(self, side: int) -> None:
        if self.used[side] >= self.limits[side]:
            raise RuntimeError("ledger overdrawn")
        self.used[side] += 1


class Adversary:
    """Decision contract: sees the full history, both inputs, the current
    speaker and symbol, and the remaining budgets; returns None (Keep) or a
    replacement symbol.  ``fresh`` hands out a per-run instance so a single
    adversary object can drive many concurrent simulations."""

    name = "adversary"

    def fresh(self, seed: int) -> "Adversary":
        return self

    def decide(self, ctx, index: int, speaker: int, symbol: tuple, remaining: tuple):
        return None


class NullAdversary(Adversary):
    name = "null"


def step(ledger: BudgetLedger, index: int, speaker: int, sent: tuple,
         adversary: Adversary, ctx=None) -> tuple[RoundRecord, str | None]:
    """One channel round: ask the adversary, enforce the budget, and emit the
    record.  Feedback is implicit: the record is visible to both parties."""
    decision = adversary.decide(ctx, index, speaker, sent, ledger.remaining())
    flag = None
    received = sent
    if decision is not None:
        if decision == sent:
            flag = f"round {index}: replacement equals sent symbol, kept"
        elif ledger.remaining()[speaker] <= 0:
            flag = f"round {index}: over-budget replacement ignored"
        else:
            ledger.charge(speaker)
            received = decision
    return RoundRecord(index, speaker, sent, received, received != sent), flag


def views(records: Sequence[RoundRecord]):
    """Reconstruct (S_A, S_B, R_A, R_B) as round->symbol maps.  R_A is what
    Alice received (Bob's rounds), R_B what Bob received (Alice's rounds);
    with noiseless feedback both parties know both R maps."""
    s = ({}, {})
    r = ({}, {})
    for rec in records:
        s[rec.speaker][rec.index] = rec.sent
        r[1 - rec.speaker][rec.index] = rec.received
    return s[0], s[1], r[0], r[1]


def transcript_json(records: Sequence[RoundRecord]) -> list[dict]:
    return [
        {
            "index": r.index,
            "speaker": SIDE_NAMES[r.speaker],
            "sent": list(r.sent),
            "received": list(r.received),
            "corrupted": r.corrupted,
        }
        for r in records
    ]


def dump_transcript(records: Sequence[RoundRecord]) -> str:
    return json.dumps(transcript_json(records), sort_keys=True, indent=1)
