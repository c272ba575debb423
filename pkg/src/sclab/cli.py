"""Command-line front end: seeded experiment sweeps and report emission.

Subcommands: simulate | attack | harden | verify | bench.  All randomness
flows from --seed, reports are machine-readable JSON/CSV with a
schema_version field, and identical configurations produce byte-identical
reports.  The exit status is nonzero iff a failure or invariant violation
was observed.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import random
import sys
from fractions import Fraction
from pathlib import Path

from . import attacks, hardening
from .channel import SIDE_NAMES
from .coding_large import ROUND_COLUMNS, simulate
from .coding_small import TYPE_NAMES, simulate_small
from .formulas import (
    CorruptionBudget,
    as_fraction,
    depth,
    parse_formula,
    size,
    truth_table,
    verify_resilience,
)
from .kw import protocol_from_json
from .pi0 import RandomAlternatingProtocol

SCHEMA_VERSION = 1


def _frac(s: str) -> Fraction:
    return as_fraction(s)


def _sym_json(sym, small: bool):
    if small:
        return {"link": sym[0], "type": TYPE_NAMES[sym[1]], "msg": sym[2]}
    return {"link": sym[0], "b": sym[1]}


def _records_json(records, small: bool):
    return [
        {
            "index": r.index,
            "speaker": SIDE_NAMES[r.speaker],
            "sent": _sym_json(r.sent, small),
            "received": _sym_json(r.received, small),
            "corrupted": r.corrupted,
        }
        for r in records
    ]


def _write_json(path: Path, payload) -> None:
    path.write_text(json.dumps(payload, sort_keys=True, indent=1, default=_json_default) + "\n")


def _json_default(obj):
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, (set, frozenset)):
        return sorted(str(v) for v in obj)
    if isinstance(obj, tuple):
        return list(obj)
    return str(obj)


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_simulate(args) -> int:
    if args.trials < 0:
        raise SystemExit("--trials must be >= 0")
    out = _out_dir(args)
    eps = _frac(args.eps)
    rng = random.Random(args.seed)
    adversaries = attacks.stock_adversaries(seed=args.seed, p=args.noise_prob)
    if args.adversary not in adversaries:
        raise SystemExit(f"unknown adversary {args.adversary!r}")
    adv = adversaries[args.adversary]
    run_fn = simulate_small if args.scheme == "small" else simulate
    small = args.scheme == "small"

    failures = violations = 0
    used_total = [0, 0]
    first_transcript = None
    first_rounds = None
    for trial in range(args.trials):
        pi0 = RandomAlternatingProtocol(args.len, seed=rng.randrange(2**31),
                                        first_speaker=rng.randrange(2))
        x, y = pi0.random_input(rng), pi0.random_input(rng)
        res = run_fn(pi0, eps, x, y, adv, seed=rng.randrange(2**31),
                     collect_rounds=(trial == 0))
        failures += len(res.failures)
        violations += len(res.violations)
        used_total[0] += res.used[0]
        used_total[1] += res.used[1]
        if trial == 0:
            first_transcript = _records_json(res.records, small)
            first_rounds = res.rounds
    summary = {
        "schema_version": SCHEMA_VERSION,
        "command": "simulate",
        "scheme": args.scheme,
        "eps": str(eps),
        "len": args.len,
        "adversary": args.adversary,
        "trials": args.trials,
        "seed": args.seed,
        "failures": failures,
        "invariant_violations": violations,
        "budget_usage": {"alice": used_total[0], "bob": used_total[1]},
    }
    _write_json(out / "summary.json", summary)
    _write_json(out / "transcript.json", first_transcript or [])
    with (out / "rounds.csv").open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(ROUND_COLUMNS)
        for row in first_rounds or []:
            writer.writerow(row)
    print(json.dumps(summary, sort_keys=True))
    return 1 if failures or violations else 0


def cmd_attack(args) -> int:
    out = _out_dir(args)
    try:
        if args.protocol:
            proto = attacks.TreePathProtocol(
                protocol_from_json(json.loads(Path(args.protocol).read_text()))
            )
            report_protocol = args.protocol
            inputs = attacks.find_confusable_inputs(proto, args.nbits)
            plan = attacks.build_attack(proto, inputs)
            rep = attacks.execute_attack(proto, plan)
        else:
            report_protocol = f"bisection-parity({args.nbits})"
            rep = attacks.attack_kw_parity(args.nbits)
    except attacks.AttackError as exc:
        payload = {
            "schema_version": SCHEMA_VERSION,
            "command": "attack",
            "protocol": args.protocol or f"bisection-parity({args.nbits})",
            "n_bits": args.nbits,
            "verdict": "precondition-rejected",
            "reason": str(exc),
        }
        _write_json(out / "attack.json", payload)
        print(json.dumps(payload, sort_keys=True))
        return 1
    payload = {
        "schema_version": SCHEMA_VERSION,
        "command": "attack",
        "protocol": report_protocol,
        "n_bits": args.nbits,
        "case": rep.plan.case,
        "confused_party": SIDE_NAMES[rep.confused],
        "segments": list(rep.plan.segments),
        "inputs": {
            "x": "".join(map(str, rep.plan.inputs.x)),
            "x_prime": "".join(map(str, rep.plan.inputs.x_prime)),
            "y": "".join(map(str, rep.plan.inputs.y)),
            "y_prime": "".join(map(str, rep.plan.inputs.y_prime)),
        },
        "crafted_transcript": list(rep.plan.transcript),
        "runs": [
            {
                "pair": ["".join(map(str, z)) for z in pair],
                "forced_rounds": {str(k): v for k, v in sorted(forced.items())},
                "output": str(lit),
                "output_valid": ok,
                "corruptions": {"alice": c[0], "bob": c[1]},
            }
            for pair, forced, lit, ok, c in zip(
                rep.plan.run_pairs, rep.plan.forced, rep.outputs, rep.valid,
                rep.corruptions,
            )
        ],
        "views_identical": rep.views[0] == rep.views[1],
        "verdict": "confused" if rep.succeeded else "not-confused",
    }
    _write_json(out / "attack.json", payload)
    print(json.dumps(payload, sort_keys=True))
    return 0 if rep.succeeded else 1


def cmd_harden(args) -> int:
    out = _out_dir(args)
    f = parse_formula(Path(args.formula).read_text())
    art = hardening.harden(f, _frac(args.eps), materialize=not args.no_materialize,
                           node_cap=args.cap)
    cert = hardening.certify_protocol_resilience(art, trials=args.trials, seed=args.seed)
    attack_info = hardening.attack_length_precondition(art)
    manifest = {
        "schema_version": SCHEMA_VERSION,
        "command": "harden",
        "eps": str(art.eps),
        "source_size": size(f),
        "source_depth": depth(f),
        "balanced_depth": depth(art.balanced),
        "accounting": {k: v for k, v in art.accounting.items()},
        "budget_per_direction": str(art.budget),
        "certification": {
            "trials": cert["runs"],
            "failures": len(cert["failures"]),
            "violations": len(cert["violations"]),
        },
        "confusion_attack_precondition": attack_info,
        "materialized": art.fprime is not None,
        "notes": art.notes,
    }
    if art.fprime is not None:
        from .formulas import format_formula

        (out / "fprime.txt").write_text(format_formula(art.fprime) + "\n")
        manifest["fprime_size"] = size(art.fprime)
        manifest["fprime_depth"] = depth(art.fprime)
    _write_json(out / "harden.json", manifest)
    print(json.dumps(manifest, sort_keys=True, default=_json_default))
    return 1 if cert["failures"] or cert["violations"] else 0


def cmd_verify(args) -> int:
    out = _out_dir(args)
    f = parse_formula(Path(args.formula).read_text())
    budget = CorruptionBudget(_frac(args.alpha), _frac(args.beta))
    rep = verify_resilience(
        f, truth_table(f), budget, mode=args.mode, seed=args.seed,
        trials=args.trials, cap=args.cap,
    )
    payload = {
        "schema_version": SCHEMA_VERSION,
        "command": "verify",
        "alpha": args.alpha,
        "beta": args.beta,
        "mode": rep.mode,
        "ok": rep.ok,
        "patterns_checked": rep.patterns_checked,
        "pairs_checked": rep.pairs_checked,
        "counterexample": None
        if rep.counterexample is None
        else {
            "pattern": {".".join(map(str, k)): v for k, v in rep.counterexample[0].items()},
            "input": "".join(map(str, rep.counterexample[1])),
        },
    }
    _write_json(out / "verify.json", payload)
    print(json.dumps(payload, sort_keys=True))
    return 0 if rep.ok else 1


def cmd_bench(args) -> int:
    out = _out_dir(args)
    eps = _frac(args.eps)
    from .coding_small import alphabet_params

    c, fan = alphabet_params(eps)
    rows = []
    for length in args.len:
        n = math.ceil(Fraction(length) / eps)
        rows.append({
            "base_length": length,
            "rounds": n,
            "overhead_ratio": str(Fraction(n, length)),
            "C": c,
            "alphabet_size": fan,
        })
    payload = {
        "schema_version": SCHEMA_VERSION,
        "command": "bench",
        "eps": str(eps),
        "rows": rows,
    }
    _write_json(out / "bench.json", payload)
    print(json.dumps(payload, sort_keys=True))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sclab",
        description="short-circuit-resilient formulas and feedback coding lab",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run a coding-scheme sweep")
    p.add_argument("--scheme", choices=("large", "small"), default="small")
    p.add_argument("--eps", default="0.05")
    p.add_argument("--len", type=int, default=4, help="base protocol length")
    p.add_argument("--adversary", default="null")
    p.add_argument("--noise-prob", type=float, default=0.6)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", default="reports")
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("attack", help="run the confusion attack")
    p.add_argument("--protocol", help="protocol JSON file (default: bisection parity)")
    p.add_argument("--nbits", type=int, default=12)
    p.add_argument("--out", default="reports")
    p.set_defaults(fn=cmd_attack)

    p = sub.add_parser("harden", help="run the hardening pipeline on a formula")
    p.add_argument("--formula", required=True, help="formula text file")
    p.add_argument("--eps", default="0.1")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--cap", type=int, default=20000)
    p.add_argument("--no-materialize", action="store_true")
    p.add_argument("--out", default="reports")
    p.set_defaults(fn=cmd_harden)

    p = sub.add_parser("verify", help="verify a formula's fault resilience")
    p.add_argument("--formula", required=True)
    p.add_argument("--alpha", default="0.2")
    p.add_argument("--beta", default="0.2")
    p.add_argument("--mode", choices=("exhaustive", "sampled"), default="exhaustive")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--cap", type=int, default=10**7)
    p.add_argument("--out", default="reports")
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("bench", help="round-overhead table")
    p.add_argument("--eps", default="0.1")
    p.add_argument("--len", type=int, nargs="+", default=[10, 100])
    p.add_argument("--out", default="reports")
    p.set_defaults(fn=cmd_bench)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
