"""CLI scenario assembly, table builders, writers, and exit codes.

The checked-in scenario files must reproduce the builtin presets exactly,
figure outputs must be deterministic for a fixed config and seed, and the
emitted JSON must validate against the shipped schema.
"""
import argparse
import importlib.resources
import json
import math
from pathlib import Path

import jsonschema
import pytest

from scatterlink import cli
from scatterlink.cli import (
    FIG2_COLUMNS,
    FIG3_COLUMNS,
    FIG4_COLUMNS,
    Scenario,
    SweepSpec,
    build_fig2_rows,
    build_fig3_rows,
    build_fig4_rows,
    load_scenario,
    main,
    write_csv,
    write_json,
)
from scatterlink.specfun import DomainError

SCENARIO_DIR = Path(__file__).resolve().parents[1] / "scenarios"


def small_fig3_toml(tmp_path: Path, mc: bool, n_samples: int = 20_000) -> Path:
    path = tmp_path / "small.toml"
    path.write_text(
        "[query]\n"
        "thresholds_db = [2.0]\n"
        "rho_bars_db = [3.0]\n"
        "[mc]\n"
        f"enabled = {'true' if mc else 'false'}\n"
        f"n_samples = {n_samples}\n"
        "seed = 123\n"
        "batch_size = 8000\n"
        "[[sweep]]\n"
        'axis = "snr_db"\n'
        "lo = 0.0\n"
        "hi = 10.0\n"
        "n_points = 3\n"
    )
    return path


def load_schema() -> dict:
    return json.loads(importlib.resources.files("scatterlink")
                      .joinpath("output_schema.json").read_text())


class TestSweepSpec:
    def test_grid_endpoints(self):
        grid = SweepSpec(axis="snr_db", lo=0.0, hi=40.0, n_points=21).grid()
        assert grid[0] == 0.0 and grid[-1] == 40.0 and len(grid) == 21

    @pytest.mark.parametrize("kwargs", [
        {"axis": "bogus", "lo": 0.0, "hi": 1.0, "n_points": 2},
        {"axis": "snr_db", "lo": 1.0, "hi": 1.0, "n_points": 2},
        {"axis": "snr_db", "lo": 2.0, "hi": 1.0, "n_points": 2},
        {"axis": "snr_db", "lo": 0.0, "hi": 1.0, "n_points": 1},
    ])
    def test_validation(self, kwargs):
        with pytest.raises(DomainError):
            SweepSpec(**kwargs)


class TestScenarioAssembly:
    @pytest.mark.parametrize("command", ["fig2", "fig3", "fig4"])
    def test_checked_in_files_mirror_builtins(self, command):
        builtin = load_scenario(command)
        from_file = load_scenario(command, str(SCENARIO_DIR / f"{command}.toml"))
        assert from_file == builtin

    def test_builtin_presets(self):
        fig2 = load_scenario("fig2")
        assert fig2.thresholds_db == (-3.0, 7.0)
        assert fig2.sweep("terms").n_points == 16
        fig3 = load_scenario("fig3")
        assert fig3.mc_enabled and fig3.mc.n_samples == 1_000_000
        fig4 = load_scenario("fig4")
        assert fig4.params.d_sr == 20.0
        assert fig4.accuracy.max_terms == 2000
        assert fig4.rho_bars_db == (10.0, 20.0)

    def test_flag_overrides(self, tmp_path):
        args = argparse.Namespace(seed=99, mc_samples=555, tol=1e-7, mc=True,
                                  out_format="json", prefix="p")
        scenario = load_scenario("fig2", None, args)
        assert scenario.mc.seed == 99
        assert scenario.mc.n_samples == 555
        assert scenario.abs_tol == 1e-7
        assert scenario.mc_enabled
        assert scenario.out_format == "json"
        assert scenario.prefix == "p"

    def test_missing_sweep_axis_rejected(self):
        scenario = load_scenario("fig2")
        with pytest.raises(DomainError):
            scenario.sweep("d_tr")

    def test_scenario_validation(self):
        base = load_scenario("fig2")
        with pytest.raises(DomainError):
            Scenario(params=base.params, sweeps=base.sweeps,
                     thresholds_db=base.thresholds_db,
                     rho_bars_db=base.rho_bars_db, abs_tol=base.abs_tol,
                     accuracy=base.accuracy, mc=base.mc, mc_enabled=False,
                     out_format="xml", prefix="x")
        with pytest.raises(DomainError):
            Scenario(params=base.params, sweeps=base.sweeps,
                     thresholds_db=(), rho_bars_db=base.rho_bars_db,
                     abs_tol=base.abs_tol, accuracy=base.accuracy, mc=base.mc,
                     mc_enabled=False, out_format="csv", prefix="x")


class TestTableBuilders:
    def test_fig2_rows(self):
        rows = build_fig2_rows(load_scenario("fig2"))
        assert len(rows) == 32
        assert [r["n_terms"] for r in rows[:16]] == list(range(16))
        for row in rows:
            assert row["rel_err_bound"] >= row["rel_err_truncation"] - 5e-12

    def test_fig3_rows_without_mc(self, tmp_path):
        scenario = load_scenario("fig3", str(small_fig3_toml(tmp_path, mc=False)))
        rows = build_fig3_rows(scenario)
        assert len(rows) == 3
        assert [r["snr_db"] for r in rows] == [0.0, 5.0, 10.0]
        for row in rows:
            assert row["po_mc_b0"] is None and row["mc_stderr_b1"] is None
            assert 0.0 <= row["po_exact_b1"] <= row["po_exact_b0"] <= 1.0

    def test_fig3_rows_with_mc(self, tmp_path):
        scenario = load_scenario("fig3", str(small_fig3_toml(tmp_path, mc=True)))
        rows = build_fig3_rows(scenario)
        for row in rows:
            assert row["po_mc_b1"] is not None
            assert abs(row["po_mc_b1"] - row["po_exact_b1"]) \
                < 6.0 * row["mc_stderr_b1"]

    def test_fig4_rows_absorbing_constant(self, tmp_path):
        path = tmp_path / "f4.toml"
        path.write_text(
            "[query]\nrho_bars_db = [20.0]\n"
            "[[sweep]]\naxis = \"d_tr\"\nlo = 0.5\nhi = 10.0\nn_points = 4\n"
        )
        rows = build_fig4_rows(load_scenario("fig4", str(path)))
        assert len(rows) == 4
        assert len({r["po_b0"] for r in rows}) == 1
        d = [r["d_tr"] for r in rows]
        po = [r["po_b1"] for r in rows]
        assert all(a <= b for a, b in zip(po[:-1], po[1:]))
        assert d == sorted(d)


class TestWriters:
    def test_csv_none_becomes_empty_cell(self, tmp_path):
        path = tmp_path / "t.csv"
        write_csv(path, ("a", "b"), [{"a": 1.5, "b": None}])
        assert path.read_bytes() == b"a,b\r\n1.5,\r\n"

    def test_json_envelope_and_key_order(self, tmp_path):
        path = tmp_path / "t.json"
        write_json(path, "fig4", ("x", "y"), [{"y": 2.0, "x": 1.0}])
        doc = json.loads(path.read_text())
        assert doc["command"] == "fig4"
        assert doc["columns"] == ["x", "y"]
        assert list(doc["rows"][0]) == ["x", "y"]


class TestMain:
    def test_fig2_end_to_end(self, tmp_path, capsys):
        assert main(["fig2", "--out-dir", str(tmp_path), "--format", "json"]) == 0
        out = capsys.readouterr().out
        assert "wrote" in out
        doc = json.loads((tmp_path / "ref_fig2.json").read_text())
        jsonschema.validate(doc, load_schema())
        assert doc["columns"] == list(FIG2_COLUMNS)
        plot = (tmp_path / "ref_fig2_plot.py").read_text()
        compile(plot, "ref_fig2_plot.py", "exec")

    def test_fig3_json_validates(self, tmp_path):
        config = small_fig3_toml(tmp_path, mc=True)
        assert main(["fig3", "--config", str(config), "--out-dir",
                     str(tmp_path), "--format", "json"]) == 0
        doc = json.loads((tmp_path / "ref_fig3.json").read_text())
        jsonschema.validate(doc, load_schema())
        assert doc["columns"] == list(FIG3_COLUMNS)

    def test_fig4_json_validates(self, tmp_path):
        path = tmp_path / "f4.toml"
        path.write_text(
            "[query]\nrho_bars_db = [20.0]\n"
            "[[sweep]]\naxis = \"d_tr\"\nlo = 0.5\nhi = 10.0\nn_points = 3\n"
        )
        assert main(["fig4", "--config", str(path), "--out-dir",
                     str(tmp_path), "--format", "json"]) == 0
        doc = json.loads((tmp_path / "ref_fig4.json").read_text())
        jsonschema.validate(doc, load_schema())
        assert doc["columns"] == list(FIG4_COLUMNS)

    def test_deterministic_across_runs(self, tmp_path):
        config = small_fig3_toml(tmp_path, mc=True)
        for sub in ("a", "b"):
            assert main(["fig3", "--config", str(config),
                         "--out-dir", str(tmp_path / sub)]) == 0
        assert (tmp_path / "a" / "ref_fig3.csv").read_bytes() == \
            (tmp_path / "b" / "ref_fig3.csv").read_bytes()

    def test_eval_record(self, capsys):
        assert main(["eval", "--state", "1", "--snr-db", "3",
                     "--threshold-db", "7"]) == 0
        record = json.loads(capsys.readouterr().out)
        jsonschema.validate(record, load_schema())
        assert record["state"] == 1
        assert record["po_exact"] == pytest.approx(0.7382514307395, abs=2e-9)
        assert record["converged"] is True
        assert record["po_mc"] is None

    def test_eval_with_mc_and_target(self, capsys):
        assert main(["eval", "--state", "1", "--snr-db", "20",
                     "--threshold-db", "2", "--mc-samples", "20000",
                     "--target-po", "0.05"]) == 0
        record = json.loads(capsys.readouterr().out)
        jsonschema.validate(record, load_schema())
        assert record["po_mc"] is not None
        assert abs(record["po_mc"] - record["po_exact"]) \
            < 6.0 * record["mc_stderr"]
        assert 1e-3 < record["max_d_tr"] < 10.0

    def test_usage_error_exits_2(self):
        with pytest.raises(SystemExit) as exc:
            main(["eval", "--state", "2", "--snr-db", "0",
                  "--threshold-db", "0"])
        assert exc.value.code == 2

    def test_convergence_error_exits_3(self, capsys):
        # threshold far above the SNR: the tail bound cannot reach abs_tol
        # within the default term budget
        assert main(["eval", "--state", "1", "--snr-db", "0",
                     "--threshold-db", "40"]) == 3
        assert "convergence" in capsys.readouterr().err

    def test_domain_error_exits_4(self, capsys):
        assert main(["eval", "--state", "0", "--snr-db", "10",
                     "--threshold-db", "2", "--target-po", "1e-4"]) == 4
        assert "domain" in capsys.readouterr().err

    def test_missing_config_exits_4(self, tmp_path, capsys):
        missing = tmp_path / "nope.toml"
        assert main(["fig2", "--config", str(missing)]) == 4
        assert "configuration" in capsys.readouterr().err

    def test_bad_toml_exits_4(self, tmp_path, capsys):
        bad = tmp_path / "bad.toml"
        bad.write_text("query = [unclosed")
        assert main(["fig2", "--config", str(bad)]) == 4
        assert "configuration" in capsys.readouterr().err
