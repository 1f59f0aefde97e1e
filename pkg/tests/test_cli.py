from __future__ import annotations

import pytest

import cli
from services.bench import TABLE_COLUMNS, read_table
from services.instance_loader import load_instance
from services.result_codec import load_pareto_run, load_solution


def _args(points_file, tmp_path, *extra):
    return [
        "--instance", str(points_file),
        "--radius", "2",
        "--budget", "card:1",
        "--out", str(tmp_path / "out"),
        *extra,
    ]


def test_fuzzify_writes_canonical_instance(points_file, tmp_path, capsys):
    assert cli.main(["fuzzify", *_args(points_file, tmp_path, "--seed", "3")]) == 0

    target = tmp_path / "out" / "tiny-seed3.xml"
    fuzzy = load_instance(target)
    assert fuzzy.seed == 3
    assert str(target) in capsys.readouterr().out


def test_solve_crisp_prints_cross_evaluation(points_file, tmp_path, capsys):
    assert cli.main(["solve", *_args(points_file, tmp_path)]) == 0

    out = capsys.readouterr().out
    assert "open {2} (1 facilities)" in out
    assert "fuzzy served" in out
    solution = load_solution(tmp_path / "out" / "tiny-crisp-seed1.xml")
    assert solution.open == (2,)
    assert solution.F.f2 == 35.0


@pytest.mark.parametrize("mode", ["single", "csp1", "cspinf", "tcheby"])
def test_solve_fuzzy_modes(points_file, tmp_path, mode):
    assert cli.main(["solve", *_args(points_file, tmp_path, "--mode", mode, "--weight", "1,1,1,0.001")]) == 0
    solution = load_solution(tmp_path / "out" / "tiny-{}-seed1.xml".format(mode))
    assert solution.feasible


def test_frontier_with_oracle(points_file, tmp_path, capsys):
    assert cli.main(["frontier", *_args(points_file, tmp_path, "--oracle", "--no-early-stop")]) == 0

    run = load_pareto_run(tmp_path / "out" / "tiny-frontier-seed1.xml")
    assert len(run.trace) == 9
    assert all(run.oracle_verified)
    assert "oracle-DOMINATED" not in capsys.readouterr().out


def test_bench_writes_both_tables(points_file, tmp_path):
    args = ["bench", "--instance", str(points_file), "--radius", "2", "--budget", "card",
            "--params", "1-2", "--seed", "1,2", "--out", str(tmp_path / "out")]
    assert cli.main(args) == 0

    rows = read_table(tmp_path / "out" / "bench_table.csv")
    assert [row["param"] for row in rows] == ["1", "2"]
    assert list(rows[0]) == list(TABLE_COLUMNS)
    assert len(read_table(tmp_path / "out" / "bench_raw.csv")) == 4


def test_verify_reports_no_mismatch(points_file, tmp_path, capsys):
    assert cli.main(["verify", *_args(points_file, tmp_path, "--seed", "1-3")]) == 0
    assert "3 instance(s) checked, 0 mismatch(es)" in capsys.readouterr().out


@pytest.mark.parametrize(
    "extra",
    [("--spread", "0"), ("--costs", "normal"), ("--radius", "-3")],
)
def test_domain_errors_exit_with_status_two(points_file, tmp_path, capsys, extra):
    assert cli.main(["solve", *_args(points_file, tmp_path, *extra)]) == 2
    assert "error:" in capsys.readouterr().err


def test_missing_instance_file_exits_with_status_two(tmp_path):
    args = ["solve", "--instance", str(tmp_path / "nope.txt"), "--radius", "1", "--out", str(tmp_path)]
    assert cli.main(args) == 2


def test_missing_radius_is_a_domain_error(points_file, tmp_path):
    assert cli.main(["solve", "--instance", str(points_file), "--out", str(tmp_path)]) == 2


def test_usage_errors_exit_through_argparse(points_file):
    with pytest.raises(SystemExit) as excinfo:
        cli.main(["solve", "--instance", str(points_file), "--mode", "exotic"])
    assert excinfo.value.code == 2


def test_bench_exits_with_status_one_when_a_cell_fails(points_file, tmp_path):
    broken = tmp_path / "broken.txt"
    broken.write_text("1\n0 0 ten\n", encoding="utf-8")
    args = ["bench", "--instance", str(points_file), "--instance", str(broken), "--radius", "2",
            "--budget", "card:1", "--out", str(tmp_path / "out")]
    assert cli.main(args) == 1

    raw = read_table(tmp_path / "out" / "bench_raw.csv")
    assert [row["status"] for row in raw][0] == "ok"
    assert raw[1]["status"].startswith("error:")
    assert [row["param"] for row in read_table(tmp_path / "out" / "bench_table.csv")] == ["1"]


def test_undecodable_instance_exits_with_status_two(tmp_path, capsys):
    broken = tmp_path / "broken.txt"
    broken.write_bytes(b"1\n0 0 \xff\n")
    assert cli.main(["solve", "--instance", str(broken), "--radius", "1", "--out", str(tmp_path)]) == 2
    assert "invalid UTF-8" in capsys.readouterr().err


def test_fuzzify_command_rewrites_identical_documents(points_file, tmp_path):
    first = tmp_path / "first"
    second = tmp_path / "second"
    for out in (first, second):
        args = ["fuzzify", "--instance", str(points_file), "--radius", "2", "--budget", "card:1",
                "--seed", "1,2", "--out", str(out)]
        assert cli.main(args) == 0

    for name in ("tiny-seed1.xml", "tiny-seed2.xml"):
        assert (first / name).read_bytes() == (second / name).read_bytes()

    one = load_instance(first / "tiny-seed1.xml")
    two = load_instance(first / "tiny-seed2.xml")
    assert one.demands[:, 1].tolist() == two.demands[:, 1].tolist() == [10.0, 20.0, 30.0, 5.0]
    assert one.center.points == two.center.points
