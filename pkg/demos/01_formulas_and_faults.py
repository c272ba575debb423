#!/usr/bin/env python3
"""Walkthrough: boolean formulas under short-circuit faults.

A faulty gate is wired to one of its inputs, adversarially.  This script
evaluates a small formula under every fault pattern, shows the one-sided
nature of the noise, and certifies a trivially fault-tolerant formula.
"""

from sclab.formulas import (
    AND,
    OR,
    CorruptionBudget,
    enumerate_corruptions,
    eval_noisy,
    evaluate,
    format_formula,
    formula,
    gand,
    leaf,
    parse_formula,
    restrict,
    truth_table,
    verify_resilience,
)

f = parse_formula("(or (and x1 x2) x3)")
print("formula:", format_formula(f))
print("truth table:", truth_table(f))

z = (1, 0, 0)
print(f"\nnoiseless value on {z}:", evaluate(f, z))
print("short-circuit the AND gate to its first leg:",
      eval_noisy(f, {(0,): 0}, z))

print("\nall fault patterns within per-path budget (1/3, 1/3):")
budget = CorruptionBudget("1/3", "1/3")
for pattern in enumerate_corruptions(f, budget):
    vals = tuple(eval_noisy(f, pattern, zz) for zz in
                 ((0, 0, 0), (1, 1, 0), (1, 0, 0)))
    print(f"  pattern {pattern or '{}'} -> values {vals}")

print("\none-sided noise: faulty ANDs can only raise a value, faulty ORs")
print("can only lower it.  Check on every pattern of this formula:")
ok = True
for pattern in enumerate_corruptions(f, CorruptionBudget(1, 1)):
    for zz in ((0, 0, 0), (0, 1, 0), (1, 1, 1)):
        if eval_noisy(f, restrict(f, pattern, AND), zz) == 0:
            ok = ok and eval_noisy(f, pattern, zz) == 0
        if eval_noisy(f, restrict(f, pattern, OR), zz) == 1:
            ok = ok and eval_noisy(f, pattern, zz) == 1
print("  holds:", ok)

print("\na duplicate-child chain is immune to any single fault per path:")
node = leaf(1)
for _ in range(3):
    node = gand(node, node)
dup = formula(node)
report = verify_resilience(dup, truth_table(dup), CorruptionBudget(1, 1))
print(f"  verified over {report.patterns_checked} patterns: ok={report.ok}")

print("\nAND(x1, x2) is not: the root fault flips it:")
bad = formula(gand(leaf(1), leaf(2)))
report = verify_resilience(bad, truth_table(bad), CorruptionBudget(1, 1))
print("  counterexample (pattern, input):", report.counterexample)
