#!/usr/bin/env python3
"""Walkthrough: why one fifth per direction is the ceiling.

Against any short protocol for the parity game, a (1/5, 1/5)-corruption can
splice four noiseless segments across confusable inputs into one crafted
transcript, leaving some party with byte-identical views on two input pairs
whose valid answers are disjoint.  That party must answer one of them
wrongly.
"""

from sclab.attacks import (
    BisectionParityProtocol,
    attack_kw_parity,
    build_attack,
    find_confusable_inputs,
)
from sclab.channel import SIDE_NAMES

protocol = BisectionParityProtocol(12)
print(f"bisection protocol for 12-bit parity: {protocol.base_length} rounds,"
      f" padded to {protocol.length}")

inputs = find_confusable_inputs(protocol, 12)
print("\nconfusable inputs (lesser early speaker:", SIDE_NAMES[inputs.lesser] + ")")
for name in ("x", "x_prime", "y", "y_prime"):
    print(f"  {name:8s}", "".join(map(str, getattr(inputs, name))))

plan = build_attack(protocol, inputs)
print("\nsegment lengths |T1..T4|:", plan.segments, "->", plan.case)
print("crafted received transcript:", "".join(map(str, plan.transcript)))

report = attack_kw_parity(12)
print(f"\nconfused party: {SIDE_NAMES[report.confused]}")
for (pair, lit, ok, counts) in zip(report.plan.run_pairs, report.outputs,
                                   report.valid, report.corruptions):
    shown = ["".join(map(str, z)) for z in pair]
    print(f"  run on (x={shown[0]}, y={shown[1]}): output {lit}, "
          f"valid={ok}, corruptions alice/bob = {counts}")
print("views byte-identical:", report.views[0] == report.views[1])
print("attack succeeded:", report.succeeded)
