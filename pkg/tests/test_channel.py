import json

import pytest

from sclab.channel import (
    ALICE,
    BOB,
    Adversary,
    BudgetLedger,
    NullAdversary,
    RoundRecord,
    dump_transcript,
    step,
    views,
)


class ForceOnce(Adversary):
    def __init__(self, symbol):
        self.symbol = symbol
        self.done = False

    def decide(self, ctx, index, speaker, sent, remaining):
        if self.done:
            return None
        self.done = True
        return self.symbol


def test_null_step():
    ledger = BudgetLedger(10, "0.1", "0.1")
    rec, flag = step(ledger, 1, ALICE, (0, 1), NullAdversary())
    assert rec.received == rec.sent and not rec.corrupted and flag is None
    assert ledger.used == [0, 0]


def test_replace_within_budget():
    ledger = BudgetLedger(10, "0.1", "0.1")
    rec, flag = step(ledger, 1, ALICE, (0, 1), ForceOnce((0, 0)))
    assert rec.corrupted and rec.received == (0, 0)
    assert ledger.used == [1, 0] and flag is None


def test_replace_over_budget_flagged():
    ledger = BudgetLedger(10, 0, 0)
    rec, flag = step(ledger, 1, BOB, (0, 1), ForceOnce((0, 0)))
    assert not rec.corrupted and rec.received == rec.sent
    assert "over-budget" in flag
    assert ledger.used == [0, 0]


def test_noop_replacement_flagged_uncharged():
    ledger = BudgetLedger(10, "0.5", "0.5")
    rec, flag = step(ledger, 3, ALICE, (0, 1), ForceOnce((0, 1)))
    assert not rec.corrupted and "equals sent" in flag
    assert ledger.used == [0, 0]


def test_ledger_limits_floor():
    ledger = BudgetLedger(20, "0.1", "0.1")
    assert ledger.limits == (2, 2)
    ledger = BudgetLedger(30, "0.1", "0.1")  # floor(3), exact rational
    assert ledger.limits == (3, 3)


def test_record_flag_consistency():
    with pytest.raises(ValueError):
        RoundRecord(1, ALICE, (0, 1), (0, 1), True)


def test_views_consistent_for_both_parties():
    records = [
        RoundRecord(1, ALICE, (0, 1), (0, 1), False),
        RoundRecord(2, BOB, (0, 0), (0, 1), True),
        RoundRecord(3, ALICE, (1, None), (1, None), False),
    ]
    s_a, s_b, r_a, r_b = views(records)
    # feedback: each party can reconstruct every received symbol either way
    assert r_b == {1: (0, 1), 3: (1, None)}
    assert r_a == {2: (0, 1)}
    assert s_a == {1: (0, 1), 3: (1, None)}
    # corrupted flags derive from sent-vs-received on the sender's side
    assert [i for i in s_b if s_b[i] != r_a[i]] == [2]


def test_transcript_dump_deterministic():
    records = [
        RoundRecord(1, ALICE, (0, 1), (0, 1), False),
        RoundRecord(2, BOB, (3, 0), (0, 1), True),
    ]
    a = dump_transcript(records)
    b = dump_transcript(list(records))
    assert a == b
    parsed = json.loads(a)
    assert parsed[1]["corrupted"] is True
