"""Benchmark driver: start generation, aggregation, table formats, exit codes."""

import json

import numpy as np
import pytest

from smoothncp import (
    BenchRun,
    ProblemSpec,
    format_table,
    generate_starts,
    main,
    run_bench,
    run_trace,
)

COLUMNS = ["problem", "n", "kernel", "OutIter", "InIter", "Res", "Feas", "converged", "cpu_s"]


def small_run(**overrides):
    kwargs = dict(
        problems=(ProblemSpec.from_selector("analytic2d"),),
        kernels=("rational", "exp"),
        starts_per_problem=2,
        rng_seed=1,
    )
    kwargs.update(overrides)
    return BenchRun(**kwargs)


def rows_without_timing(rows):
    return [{k: v for k, v in row.items() if k != "cpu_s"} for row in rows]


# --- protocol starts -------------------------------------------------------------


def test_single_start_is_ones():
    starts = generate_starts(4, 1, seed=99)
    assert len(starts) == 1
    assert np.array_equal(starts[0], np.ones(4))


def test_starts_land_in_open_box():
    starts = generate_starts(2, 11, seed=42)
    assert len(starts) == 11
    assert np.array_equal(starts[0], np.ones(2))
    tail = np.array(starts[1:])
    assert np.all(tail > 0.0) and np.all(tail < 20.0)


def test_starts_deterministic():
    a = generate_starts(3, 5, seed=7)
    b = generate_starts(3, 5, seed=7)
    assert all(np.array_equal(x, y) for x, y in zip(a, b))
    c = generate_starts(3, 5, seed=8)
    assert not np.array_equal(a[1], c[1])


def test_starts_stable_under_count():
    short = generate_starts(2, 5, seed=42)
    long = generate_starts(2, 11, seed=42)
    for i in range(5):
        assert np.array_equal(short[i], long[i])


def test_starts_stable_under_dimension():
    narrow = generate_starts(2, 3, seed=7)
    wide = generate_starts(6, 3, seed=7)
    for i in range(3):
        assert np.array_equal(narrow[i], wide[i][:2])


def test_starts_reject_bad_count():
    with pytest.raises(ValueError):
        generate_starts(2, 0, seed=1)


# --- run configuration -------------------------------------------------------------


def test_bench_run_defaults():
    run = BenchRun(problems=(), kernels=("exp",))
    assert run.starts_per_problem == 11
    assert run.rng_seed == 1
    assert run.output_format == "md"
    assert run.tol == 1e-8
    assert run.verbose is False


def test_bench_run_validation():
    with pytest.raises(TypeError, match="ProblemSpec"):
        BenchRun(problems=("analytic2d",), kernels=("exp",))
    with pytest.raises(ValueError, match="unknown kernel"):
        small_run(kernels=("cubic",))
    with pytest.raises(ValueError, match="starts_per_problem"):
        small_run(starts_per_problem=0)


# --- aggregation ---------------------------------------------------------------------


def test_bench_empty_suite():
    assert run_bench(BenchRun(problems=(), kernels=("exp",))) == ([], [], True)


def test_bench_rows_and_detail():
    rows, detail, ok = run_bench(small_run())
    assert ok is True
    assert [r["kernel"] for r in rows] == ["rational", "exp"]
    for row in rows:
        assert list(row.keys()) == COLUMNS
        assert row["problem"] == "analytic2d" and row["n"] == 2
        assert row["converged"] == "2/2"
    assert len(detail) == 4
    assert {d["status"] for d in detail} == {"converged"}
    # worst-case aggregation over the per-start detail
    for row in rows:
        mine = [d for d in detail if d["kernel"] == row["kernel"]]
        assert row["OutIter"] == max(d["OutIter"] for d in mine)
        assert row["InIter"] == max(d["InIter"] for d in mine)
        assert row["Res"] == max(d["Res"] for d in mine)


def test_bench_deterministic_modulo_timing():
    rows_a, detail_a, _ = run_bench(small_run())
    rows_b, detail_b, _ = run_bench(small_run())
    assert rows_without_timing(rows_a) == rows_without_timing(rows_b)
    assert rows_without_timing(detail_a) == rows_without_timing(detail_b)


# --- table formats ---------------------------------------------------------------------


def test_format_md():
    rows, _, _ = run_bench(small_run())
    lines = format_table(rows, "md").splitlines()
    header = next(l for l in lines if l.startswith("| "))
    assert header == "| " + " | ".join(COLUMNS) + " |"
    assert sum(1 for l in lines if l.startswith("| analytic2d")) == 2


def test_format_csv():
    rows, _, _ = run_bench(small_run())
    lines = format_table(rows, "csv").splitlines()
    body = [l for l in lines if not l.startswith("#")]
    assert body[0] == ",".join(COLUMNS)
    assert len(body) == 3


def test_format_json():
    rows, _, _ = run_bench(small_run())
    doc = json.loads(format_table(rows, "json"))
    assert set(doc) == {"notes", "columns", "rows"}
    assert doc["columns"] == COLUMNS
    assert len(doc["rows"]) == 2
    assert list(doc["rows"][0].keys()) == COLUMNS


# --- trace -------------------------------------------------------------------------------


def test_trace_lines():
    lines = run_trace(ProblemSpec.from_selector("analytic2d"), ["rational", "exp"], np.ones(2))
    assert lines[0] == "kernel,outer_index,r,x_1,x_2,F_1,F_2,res,feas"
    for selector in ("rational", "exp"):
        block = [l.split(",") for l in lines[1:] if l.startswith(selector + ",")]
        assert block, f"no rows for {selector}"
        rs = [float(row[2]) for row in block]
        assert all(b < a for a, b in zip(rs, rs[1:]))
        assert [int(row[1]) for row in block] == list(range(len(block)))
        assert float(block[-1][6 + 2]) <= 1e-8


# --- command line entry -------------------------------------------------------------------


def test_main_solve_exit_code(capsys):
    assert main(["solve", "--problem", "analytic2d", "--theta", "exp"]) == 0
    assert "analytic2d" in capsys.readouterr().out


def test_main_analyze_exit_codes(capsys):
    assert main(["analyze", "--theta", "rational", "--check", "concavity"]) == 0
    assert main(["analyze", "--theta", "rational", "--check", "ha", "--a", "0.25"]) == 0
    assert main(["analyze", "--theta", "rational", "--check", "ha", "--a", "0.75"]) == 1
    capsys.readouterr()


def test_main_rejects_unknown_check(capsys):
    with pytest.raises(SystemExit) as excinfo:
        main(["analyze", "--theta", "rational", "--check", "nonsense"])
    assert excinfo.value.code == 2
    capsys.readouterr()


def test_main_bench_writes_file(tmp_path, capsys):
    out = tmp_path / "table.csv"
    code = main([
        "bench", "--problem", "analytic2d", "--theta", "exp",
        "--starts", "2", "--format", "csv", "--out", str(out),
    ])
    assert code == 0
    body = [l for l in out.read_text().splitlines() if not l.startswith("#")]
    assert body[0] == ",".join(COLUMNS)
    capsys.readouterr()


def test_main_trace_writes_file(tmp_path, capsys):
    out = tmp_path / "trace.csv"
    code = main(["trace", "--problem", "analytic2d", "--theta", "exp", "--out", str(out)])
    assert code == 0
    assert out.read_text().splitlines()[0] == "kernel,outer_index,r,x_1,x_2,F_1,F_2,res,feas"
    capsys.readouterr()


def test_main_unwritable_output(capsys):
    code = main([
        "bench", "--problem", "analytic2d", "--theta", "exp",
        "--starts", "1", "--out", "/nonexistent_dir_xyz/table.md",
    ])
    assert code == 1
    code = main([
        "trace", "--problem", "analytic2d", "--theta", "exp",
        "--out", "/nonexistent_dir_xyz/trace.csv",
    ])
    assert code == 1
    capsys.readouterr()
