import json
from pathlib import Path

from argos.cli import main

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_solve_winter_fox_symbolic_only(capsys):
    code, out, err = run_cli(
        capsys,
        "solve", str(FIXTURES / "winter_fox" / "problem.json"),
        "--backend", "oracle",
        "--oracle-kb", str(FIXTURES / "winter_fox" / "kb.json"),
        "--no-sc",
    )
    assert code == 0
    assert out.startswith("False (sat, 3 clauses)")
    assert "turns_white(fox, winter) -> reflects(fox, sun)" in out
    assert err.startswith("config:")


def test_solve_missing_file_exits_2(capsys):
    code, out, err = run_cli(capsys, "solve", "no/such/problem.json")
    assert code == 2
    assert "error" in err


def test_solve_max_cot_zero_reports_fallback(tmp_path, capsys):
    problem = {
        "id": "undecided",
        "entities": ["a"],
        "premises": ["p(a)"],
        "query": "q(a)",
    }
    path = tmp_path / "undecided.json"
    path.write_text(json.dumps(problem))
    kb = tmp_path / "kb.json"
    kb.write_text(json.dumps({"rules": []}))
    code, out, err = run_cli(
        capsys, "solve", str(path), "--oracle-kb", str(kb), "--max-cot", "0"
    )
    assert code == 0
    assert "(fallback, 0 clauses)" in out


def test_solve_writes_trace_and_dimacs(tmp_path, capsys):
    trace = tmp_path / "trace.jsonl"
    dimacs = tmp_path / "problem.cnf"
    code, out, err = run_cli(
        capsys,
        "solve", str(FIXTURES / "winter_fox" / "problem.json"),
        "--oracle-kb", str(FIXTURES / "winter_fox" / "kb.json"),
        "--no-sc", "--trace", str(trace), "--dimacs", str(dimacs),
    )
    assert code == 0
    events = [json.loads(l) for l in trace.read_text().splitlines()]
    assert events[0]["event"] == "sat_solve"
    assert events[-1]["event"] == "result"
    assert dimacs.read_text().splitlines()[0].startswith("c var 1 = ")
    assert any(l.startswith("p cnf ") for l in dimacs.read_text().splitlines())


def test_gen_solve_bench_round_trip(tmp_path, capsys):
    corpus = tmp_path / "corpus"
    code, out, err = run_cli(
        capsys, "gen", "--out", str(corpus), "--count", "4", "--depth", "2",
        "--seed", "7",
    )
    assert code == 0
    files = sorted(f.name for f in corpus.iterdir())
    assert files == ["0000.json", "0001.json", "0002.json", "0003.json",
                     "config.json", "exemplars.json", "kb.json"]

    code, out, err = run_cli(
        capsys, "solve", str(corpus / "0000.json"), "--oracle-depth", "0"
    )
    assert code == 0
    assert "(sat, " in out

    out_dir = tmp_path / "report"
    code, out, err = run_cli(
        capsys, "bench", str(corpus), "--systems", "argos,sat,sc5",
        "--out", str(out_dir), "--oracle-depth", "0",
    )
    assert code == 0
    assert (out_dir / "summary.csv").exists()
    assert (out_dir / "records-argos.csv").exists()
    assert (out_dir / "records-sat.csv").exists()
    assert (out_dir / "records-sc5.csv").exists()
    assert (out_dir / "flips.csv").exists()
    assert (out_dir / "cost_histogram.csv").exists()
    traces = list((out_dir / "traces").glob("*.jsonl"))
    assert len(traces) == 4
    summary = (out_dir / "summary.csv").read_text()
    argos_row = [l for l in summary.splitlines() if l.startswith("argos,")][0]
    assert argos_row.split(",")[2] == "1.000000"


def test_gen_depth_one_usage_error(tmp_path, capsys):
    code, out, err = run_cli(
        capsys, "gen", "--out", str(tmp_path / "c"), "--count", "1", "--depth", "1"
    )
    assert code == 2


def test_gen_existing_dir_needs_force(tmp_path, capsys):
    corpus = tmp_path / "corpus"
    corpus.mkdir()
    (corpus / "stale.json").write_text("{}")
    code, out, err = run_cli(
        capsys, "gen", "--out", str(corpus), "--count", "1", "--depth", "2"
    )
    assert code == 2
    code, out, err = run_cli(
        capsys, "gen", "--out", str(corpus), "--count", "1", "--depth", "2", "--force"
    )
    assert code == 0


def test_gen_rerun_same_seed_byte_identical(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    for out_dir in (a, b):
        code, _, _ = run_cli(
            capsys, "gen", "--out", str(out_dir), "--count", "3", "--depth", "3",
            "--seed", "42",
        )
        assert code == 0
    for f in sorted(a.iterdir()):
        assert f.read_bytes() == (b / f.name).read_bytes(), f.name


def test_bench_unknown_system_exits_2(tmp_path, capsys):
    corpus = tmp_path / "corpus"
    run_cli(capsys, "gen", "--out", str(corpus), "--count", "1", "--depth", "2")
    code, out, err = run_cli(
        capsys, "bench", str(corpus), "--systems", "argos,warp",
        "--out", str(tmp_path / "r"),
    )
    assert code == 2
    assert "unknown system" in err


def test_bench_empty_corpus(tmp_path, capsys):
    corpus = tmp_path / "empty"
    corpus.mkdir()
    code, out, err = run_cli(
        capsys, "bench", str(corpus), "--systems", "argos",
        "--out", str(tmp_path / "r"),
    )
    assert code == 0
    assert (tmp_path / "r" / "summary.csv").exists()


def test_trace_inspection(tmp_path, capsys):
    trace = tmp_path / "trace.jsonl"
    run_cli(
        capsys,
        "solve", str(FIXTURES / "winter_fox" / "problem.json"),
        "--oracle-kb", str(FIXTURES / "winter_fox" / "kb.json"),
        "--no-sc", "--trace", str(trace),
    )
    code, out, err = run_cli(capsys, "trace", str(trace))
    assert code == 0
    assert "sat_solve" in out
    code, out, err = run_cli(capsys, "trace", str(trace), "--summary")
    assert code == 0
    assert any(l.startswith("result: 1") for l in out.splitlines())
    code, out, err = run_cli(capsys, "trace", str(tmp_path / "missing.jsonl"))
    assert code == 2


def test_config_file_defaults_and_flag_override(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"no_sc": True, "oracle_kb": str(FIXTURES / "winter_fox" / "kb.json")}))
    code, out, err = run_cli(
        capsys, "solve", str(FIXTURES / "winter_fox" / "problem.json"),
        "--config", str(cfg),
    )
    assert code == 0
    assert out.startswith("False (sat, 3 clauses)")
    # flags win over the file
    code, out, err = run_cli(
        capsys, "solve", str(FIXTURES / "winter_fox" / "problem.json"),
        "--config", str(cfg), "--tau", "0.99",
    )
    assert code == 0
    assert '"tau": 0.99' in err
