import csv
import json
from pathlib import Path

import pytest

from lindeberg import cli


def run_cli(args):
    return cli.main(args)


def read_summary(out_dir: Path, command: str) -> dict:
    stem = command.replace("-", "_")
    with open(out_dir / f"{stem}_summary.json") as fh:
        return json.load(fh)


def read_rows(out_dir: Path, command: str):
    stem = command.replace("-", "_")
    with open(out_dir / f"{stem}.csv", newline="") as fh:
        return list(csv.DictReader(fh))


def test_identities_with_explicit_multiset(tmp_path):
    out = tmp_path / "run"
    code = run_cli(["identities", "--n", "5", "--multiset", "-2,-1,0,1,2",
                    "--out", str(out)])
    assert code == 0
    summary = read_summary(out, "identities")
    assert summary["all_passed"]
    assert any(k.startswith("covariance_gap") for k in summary["checks"])
    rows = read_rows(out, "identities")
    assert rows[0]["schema_version"] == "1"


def test_semicircle_table_density_row(tmp_path):
    out = tmp_path / "t"
    assert run_cli(["semicircle-table", "--x", "0", "--out", str(out)]) == 0
    rows = read_rows(out, "semicircle-table")
    assert len(rows) == 1
    assert float(rows[0]["density"]) == pytest.approx(0.3183098861837907)


def test_semicircle_table_transform_rows(tmp_path):
    out = tmp_path / "t"
    assert run_cli(["semicircle-table", "--z", "1j,2j", "--out", str(out)]) == 0
    rows = read_rows(out, "semicircle-table")
    assert [r["kind"] for r in rows] == ["z", "z"]
    assert float(rows[0]["m_im"]) == pytest.approx(0.6180339887498949)


def test_thm11_single_cell(tmp_path):
    out = tmp_path / "s"
    code = run_cli(["thm11-check", "--specs", "iid-uniform", "--n", "5",
                    "--functions", "cos", "--replicates", "4000",
                    "--out", str(out)])
    assert code == 0
    rows = read_rows(out, "thm11-check")
    assert len(rows) == 1
    assert rows[0]["dominated"] == "True"


def test_thm12_small(tmp_path):
    out = tmp_path / "s"
    assert run_cli(["thm12-check", "--n", "10", "--replicates", "5000",
                    "--out", str(out)]) == 0
    assert len(read_rows(out, "thm12-check")) == 2


def test_resolvent_check_small(tmp_path):
    out = tmp_path / "r"
    code = run_cli(["resolvent-check", "--tuples", "6", "--trials", "20",
                    "--out", str(out)])
    assert code == 0
    summary = read_summary(out, "resolvent-check")
    assert summary["checks"]["finite_difference_order3"]
    assert summary["checks"]["trace_bound_ratios"]


def test_wigner_sweep_row_count_and_median(tmp_path):
    out = tmp_path / "w"
    code = run_cli(["wigner-sweep", "--N", "20,40", "--seeds", "3",
                    "--ensemble", "gaussian", "--out", str(out)])
    assert code == 0
    rows = read_rows(out, "wigner-sweep")
    assert len(rows) == 6
    summary = read_summary(out, "wigner-sweep")
    assert set(summary["median_ks"]) == {"20", "40"}


def test_wigner_sweep_is_byte_deterministic(tmp_path):
    args = ["wigner-sweep", "--N", "25", "--seeds", "2", "--seed", "11"]
    run_cli(args + ["--out", str(tmp_path / "a")])
    run_cli(args + ["--out", str(tmp_path / "b")])
    a = (tmp_path / "a" / "wigner_sweep.csv").read_bytes()
    b = (tmp_path / "b" / "wigner_sweep.csv").read_bytes()
    assert a == b


def test_threads_do_not_change_output(tmp_path):
    base = ["wigner-sweep", "--N", "20,30", "--seeds", "2", "--seed", "5"]
    run_cli(base + ["--threads", "1", "--out", str(tmp_path / "one")])
    run_cli(base + ["--threads", "4", "--out", str(tmp_path / "four")])
    assert ((tmp_path / "one" / "wigner_sweep.csv").read_bytes()
            == (tmp_path / "four" / "wigner_sweep.csv").read_bytes())


def test_unknown_command_exits_2(capsys):
    with pytest.raises(SystemExit) as exc:
        run_cli(["no-such-command"])
    assert exc.value.code == 2


def test_help_exits_0():
    for command in ("identities", "thm11-check", "thm12-check",
                    "resolvent-check", "wigner-sweep", "semicircle-table"):
        with pytest.raises(SystemExit) as exc:
            run_cli([command, "--help"])
        assert exc.value.code == 0


def test_invalid_config_exits_2(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run_cli(["identities", "--config", str(bad)]) == 2

    wrong = tmp_path / "wrong.json"
    wrong.write_text(json.dumps({"command": "wigner-sweep"}))
    assert run_cli(["identities", "--config", str(wrong)]) == 2


def test_failing_check_exits_1(tmp_path, monkeypatch, capsys):
    def broken(cfg):
        return ["schema_version", "v"], [{"schema_version": 1, "v": 0.0}], {"broken": False}

    monkeypatch.setitem(cli._COMMANDS, "semicircle-table", broken)
    code = run_cli(["semicircle-table", "--out", str(tmp_path)])
    assert code == 1
    assert "broken" in capsys.readouterr().err


def test_config_file_with_flag_override(tmp_path):
    cfg = cli.ExperimentConfig(command="semicircle-table", seed=3,
                               x_values=[0.0, 1.0], out=str(tmp_path / "c"))
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg.to_dict()))
    code = run_cli(["semicircle-table", "--config", str(path),
                    "--seed", "9", "--out", str(tmp_path / "d")])
    assert code == 0
    summary = read_summary(tmp_path / "d", "semicircle-table")
    assert summary["seed"] == 9
    assert len(read_rows(tmp_path / "d", "semicircle-table")) == 2


def test_config_round_trip():
    cfg = cli.ExperimentConfig(command="wigner-sweep", seed=4, N_list=[50, 100],
                               ensemble="gaussian", z_grid=["1j"], seeds=7)
    assert cli.ExperimentConfig.from_dict(cfg.to_dict()) == cfg


def test_custom_spec_json_document(tmp_path):
    from lindeberg import MultisetPermutation, spec_to_json

    spec_path = tmp_path / "spec.json"
    values = [-1.0, -1.0, 1.0, 1.0, 0.0]
    spec_path.write_text(spec_to_json(MultisetPermutation(tuple(values))))
    out = tmp_path / "o"
    code = run_cli(["thm11-check", "--spec-json", str(spec_path),
                    "--functions", "cos", "--replicates", "4000",
                    "--out", str(out)])
    assert code == 0
    rows = read_rows(out, "thm11-check")
    assert len(rows) == 1
    assert rows[0]["spec"] == "multiset"
    assert rows[0]["n"] == "5"
    assert rows[0]["dominated"] == "True"


def test_bad_ensemble_exits_2(tmp_path):
    with pytest.raises(SystemExit) as exc:
        run_cli(["wigner-sweep", "--ensemble", "bogus", "--out", str(tmp_path)])
    assert exc.value.code == 2


def test_env_var_sets_default_threads(tmp_path, monkeypatch):
    monkeypatch.setenv("LINDEBERG_THREADS", "3")
    parser_args = cli._build_parser().parse_args(
        ["semicircle-table", "--x", "0", "--out", str(tmp_path)])
    cfg = cli.build_config(parser_args)
    assert cfg.threads == 3
