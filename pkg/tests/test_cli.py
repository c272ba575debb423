import json

from sclab.cli import main


def read(path):
    return path.read_text()


def test_simulate_small_null(tmp_path):
    out = tmp_path / "r"
    code = main([
        "simulate", "--scheme", "small", "--eps", "0.05", "--len", "2",
        "--adversary", "null", "--trials", "3", "--seed", "7",
        "--out", str(out),
    ])
    assert code == 0
    summary = json.loads(read(out / "summary.json"))
    assert summary["failures"] == 0 and summary["invariant_violations"] == 0
    assert summary["budget_usage"] == {"alice": 0, "bob": 0}
    transcript = json.loads(read(out / "transcript.json"))
    assert all(not r["corrupted"] for r in transcript)
    rounds = read(out / "rounds.csv").splitlines()
    assert rounds[0].startswith("index,speaker,corrupted")
    assert len(rounds) == 1 + len(transcript)


def test_simulate_zero_trials(tmp_path):
    out = tmp_path / "r"
    code = main([
        "simulate", "--scheme", "large", "--eps", "0.1", "--len", "2",
        "--adversary", "null", "--trials", "0", "--seed", "1", "--out", str(out),
    ])
    assert code == 0
    assert json.loads(read(out / "transcript.json")) == []


def test_simulate_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    argv = ["simulate", "--scheme", "small", "--eps", "0.05", "--len", "4",
            "--adversary", "chain_forker", "--trials", "5", "--seed", "3"]
    assert main(argv + ["--out", str(a)]) == 0
    assert main(argv + ["--out", str(b)]) == 0
    for name in ("summary.json", "transcript.json", "rounds.csv"):
        assert read(a / name) == read(b / name)


def test_attack_cli(tmp_path):
    out = tmp_path / "r"
    code = main(["attack", "--nbits", "12", "--out", str(out)])
    assert code == 0
    rep = json.loads(read(out / "attack.json"))
    assert rep["verdict"] == "confused"
    assert rep["views_identical"] is True
    for run in rep["runs"]:
        assert run["corruptions"]["alice"] <= 2
        assert run["corruptions"]["bob"] <= 2
    assert [run["output_valid"] for run in rep["runs"]].count(False) >= 1


def test_verify_cli(tmp_path):
    f = tmp_path / "f.txt"
    f.write_text("(and x1 x2)")
    out = tmp_path / "r"
    code = main(["verify", "--formula", str(f), "--alpha", "1", "--beta", "1",
                 "--mode", "exhaustive", "--out", str(out)])
    assert code == 1  # AND(x1,x2) is not resilient
    rep = json.loads(read(out / "verify.json"))
    assert rep["ok"] is False and rep["counterexample"] is not None


def test_verify_resilient_cli(tmp_path):
    f = tmp_path / "f.txt"
    f.write_text("(and x1 x1)")
    out = tmp_path / "r"
    code = main(["verify", "--formula", str(f), "--alpha", "1", "--beta", "1",
                 "--out", str(out)])
    assert code == 0


def test_bench_cli(tmp_path):
    out = tmp_path / "r"
    code = main(["bench", "--eps", "0.1", "--len", "100", "--out", str(out)])
    assert code == 0
    rep = json.loads(read(out / "bench.json"))
    row = rep["rows"][0]
    assert row["rounds"] == 1000 and row["overhead_ratio"] == "10"


def test_harden_cli(tmp_path):
    f = tmp_path / "f.txt"
    f.write_text("(or (and x1 (not x2)) (and (not x1) x2))")
    out = tmp_path / "r"
    code = main(["harden", "--formula", str(f), "--eps", "0.1", "--trials", "10",
                 "--seed", "5", "--out", str(out)])
    assert code == 0
    rep = json.loads(read(out / "harden.json"))
    assert rep["accounting"]["fan_in"] == 17 * 4 * 19
    assert rep["certification"]["failures"] == 0
    assert rep["materialized"] is True
    assert (out / "fprime.txt").exists()
