import json
from fractions import Fraction

import pytest

from irsa_flpa import cli
from irsa_flpa.cli import (
    HEADER_LINE,
    compare,
    compare_to_csv,
    main,
    read_csv,
    read_json,
    rows_to_csv,
    rows_to_json,
    run,
    scenario_from_args,
)


def scenario(argv):
    sc, _ = scenario_from_args(cli.build_parser().parse_args(argv))
    return sc


def test_reference_row(capsys):
    assert main(["--k", "4", "--t", "6", "--lambda", "2:0.25,3:0.75", "--mode", "exact"]) == 0
    out = capsys.readouterr().out
    assert "0.262186" in out
    rows = run(scenario(["--k", "4", "--t", "6", "--lambda", "2:0.25,3:0.75"]))
    assert len(rows) == 1
    assert rows[0].P_L_exact is not None and f"{rows[0].P_L:.6f}" == "0.262186"


def test_single_user_row():
    (row,) = run(scenario(["--k", "1", "--t", "4", "--lambda", "2:1", "--mode", "exact"]))
    assert row.P_L == 0 and row.throughput == 0.25


def test_sweep_grid():
    rows = run(scenario(["--t", "6", "--lambda", "1:0.2,2:0.5,4:0.3", "--sweep-k", "2..4",
                         "--mode", "exact,simulate", "--trials", "1000", "--seed", "7"]))
    assert [(r.k, r.mode) for r in rows] == [(k, m) for k in (2, 3, 4) for m in ("exact", "simulate")]
    for r in rows:
        assert r.throughput == pytest.approx((1 - r.P_L) * r.k / r.t, abs=1e-15)
        assert (r.stderr is not None) == (r.mode == "simulate")


def test_sweep_g_conversion():
    assert scenario(["--t", "6", "--lambda", "1:1", "--sweep-g", "0.5,2/3,1"]).ks == [3, 4, 6]


def test_compare_exact_vs_oracle():
    rows = run(scenario(["--k", "3", "--t", "4", "--lambda", "2:1", "--mode", "exact,oracle"]))
    (rec,) = compare(rows)
    assert rec["delta_oracle"] == 0.0
    assert list(rec)[:5] == ["G", "k", "t", "exact", "oracle"]


def test_compare_exact_vs_mlv_zero():
    rows = run(scenario(["--t", "6", "--lambda", "1:0.2,2:0.5,4:0.3", "--sweep-k", "2..5",
                         "--mode", "exact,mlv", "--mlv-threshold", "0"]))
    assert all(rec["delta_mlv"] == 0.0 for rec in compare(rows))


def test_compare_exact_vs_simulate():
    rows = run(scenario(["--k", "4", "--t", "6", "--lambda", "2:0.25,3:0.75",
                         "--mode", "simulate,exact,asymptotic", "--trials", "10000", "--seed", "3"]))
    (rec,) = compare(rows)
    assert abs(rec["delta_simulate"]) < 3 * rec["simulate_stderr"]
    assert [c for c in rec if c in cli.MODES] == ["simulate", "asymptotic", "exact"]
    text = compare_to_csv([rec])
    assert text.startswith(HEADER_LINE + "\nG,k,t,simulate,asymptotic,exact,")


def test_csv_and_json_round_trip():
    rows = run(scenario(["--t", "6", "--lambda", "1:0.2,2:0.5,4:0.3", "--sweep-k", "2..4",
                         "--mode", "exact,mlv,simulate,asymptotic", "--trials", "300"]))
    text = rows_to_csv(rows)
    assert text.splitlines()[0] == HEADER_LINE
    assert read_csv(text) == rows
    assert read_json(rows_to_json(rows)) == rows


def test_byte_identical_output(tmp_path):
    argv = ["--t", "6", "--lambda", "1:0.2,2:0.5,4:0.3", "--sweep-k", "2..4",
            "--mode", "exact,simulate,asymptotic", "--trials", "500", "--seed", "7",
            "--no-timing", "--quiet"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(argv + ["--out", str(a)]) == 0
    assert main(argv + ["--out", str(b), "--workers", "2"]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_json_output_and_compare_file(tmp_path):
    out, cmp_out = tmp_path / "rows.json", tmp_path / "cmp.csv"
    assert main(["--k", "3", "--t", "4", "--lambda", "1:1/2,2:1/2", "--mode", "exact,oracle",
                 "--out", str(out), "--compare-out", str(cmp_out), "--quiet"]) == 0
    doc = json.loads(out.read_text())
    assert doc["schema"] == HEADER_LINE[2:]
    assert [r["mode"] for r in doc["rows"]] == ["exact", "oracle"]
    assert doc["rows"][0]["P_L_exact"] == doc["rows"][1]["P_L_exact"]
    assert "delta_oracle" in cmp_out.read_text()


def test_scenario_file(tmp_path):
    path = tmp_path / "scenario.json"
    path.write_text(json.dumps({"t": 6, "lambda": {"2": "0.25", "3": "0.75"}, "k": 4, "mode": "exact"}))
    sc = scenario(["--scenario", str(path)])
    assert sc.ks == [4] and sc.lam.probs == {2: Fraction(1, 4), 3: Fraction(3, 4)}
    sc = scenario(["--scenario", str(path), "--mode", "simulate", "--trials", "50"])
    assert sc.modes == ("simulate",) and sc.trials == 50


@pytest.mark.parametrize("argv", [
    ["--k", "4", "--t", "6", "--lambda", "2:0.25,3:0.7"],          # does not sum to 1
    ["--k", "4", "--t", "6", "--lambda", "2-0.25"],                # malformed entry
    ["--k", "4", "--t", "6", "--lambda", "2:1", "--mode", "magic"],
    ["--t", "6", "--lambda", "2:1", "--sweep-g", "0.67"],          # non-integer k
    ["--k", "4", "--lambda", "2:1"],                               # missing t
    ["--k", "4", "--t", "3", "--lambda", "4:1"],                   # degree > t
    ["--k", "4", "--sweep-k", "2..3", "--t", "6", "--lambda", "2:1"],
    ["--scenario", "/nonexistent.json"],
])
def test_config_errors_exit_2(argv, capsys):
    assert main(argv) == 2
    assert "error" in capsys.readouterr().err


def test_argparse_errors_exit_2():
    with pytest.raises(SystemExit) as info:
        main(["--k", "four"])
    assert info.value.code == 2


def test_budget_exit_3_with_partial_output(tmp_path):
    out = tmp_path / "partial.csv"
    code = main(["--t", "6", "--lambda", "1:0.2,2:0.5,4:0.3", "--sweep-k", "2..6",
                 "--budget", "5000", "--out", str(out), "--quiet"])
    assert code == 3
    lines = out.read_text().splitlines()
    assert lines[0] == HEADER_LINE
    assert lines[-1].startswith("# aborted:")
    rows = read_csv(out.read_text())
    assert rows and all(r.k < 6 for r in rows)


def test_oracle_budget_exit_3():
    assert main(["--k", "4", "--t", "6", "--lambda", "2:0.25,3:0.75", "--mode", "oracle",
                 "--budget", "100", "--quiet"]) == 3
