import csv
import json
from pathlib import Path

import numpy as np
import pytest

from eolstop import ConfigError, ExperimentConfig
from eolstop.cli import main

TINY = {
    "schema_version": 1,
    "intensity": {"kind": "convex", "horizon": 8, "total_demand": 24.0},
    "costs": {"c_bar": 100.0, "c1": 1.0, "c2_bar": 200.0, "c3_bar": 200.0,
              "gamma": 0.01, "c4": 25.0, "delta": 0.005},
    "setup_costs": [0.0, 200.0],
    "x0": [0, 4],
    "models": ["D/inf/F", "D/1/Z"],
    "x_max": 60,
    "paths": 400,
    "seed": 11,
}


def write_cfg(tmp_path, **overrides):
    raw = {**TINY, **overrides}
    f = tmp_path / "cfg.json"
    f.write_text(json.dumps(raw))
    return f


class TestConfigValidation:
    def test_round_trip(self, tmp_path):
        cfg = ExperimentConfig.from_json(write_cfg(tmp_path))
        assert cfg.models == ("D/inf/F", "D/1/Z")
        assert ExperimentConfig.from_dict(cfg.to_dict()).digest() == cfg.digest()

    def test_unknown_top_level_key(self, tmp_path):
        with pytest.raises(ConfigError, match="unknown config keys"):
            ExperimentConfig.from_json(write_cfg(tmp_path, typo_field=1))

    def test_missing_schema_version(self, tmp_path):
        raw = {k: v for k, v in TINY.items() if k != "schema_version"}
        f = tmp_path / "c.json"
        f.write_text(json.dumps(raw))
        with pytest.raises(ConfigError, match="schema_version"):
            ExperimentConfig.from_json(f)

    def test_empty_model_list(self, tmp_path):
        with pytest.raises(ConfigError, match="at least one"):
            ExperimentConfig.from_json(write_cfg(tmp_path, models=[]))

    def test_bad_model_label(self, tmp_path):
        with pytest.raises(Exception):
            ExperimentConfig.from_json(write_cfg(tmp_path, models=["D/inf/Z"]))

    def test_costs_field_completeness(self, tmp_path):
        costs = dict(TINY["costs"])
        del costs["gamma"]
        with pytest.raises(ConfigError, match="gamma"):
            ExperimentConfig.from_json(write_cfg(tmp_path, costs=costs))

    def test_x0_within_cap(self, tmp_path):
        with pytest.raises(ConfigError, match="x_max"):
            ExperimentConfig.from_json(write_cfg(tmp_path, x0=[0, 100], x_max=50))

    def test_custom_rates_file(self, tmp_path):
        rates = tmp_path / "rates.txt"
        rates.write_text("2.0\n1.0\n0.5\n")
        f = write_cfg(tmp_path, intensity={"kind": "custom", "rates_file": str(rates)},
                      x0=[0], x_max=30)
        cfg = ExperimentConfig.from_json(f)
        model = cfg.build_model()
        assert model.horizon == 3
        assert np.allclose(model.rates, [2.0, 1.0, 0.5])

    def test_base_case_helper(self):
        cfg = ExperimentConfig.base_case()
        assert cfg.intensity["kind"] == "convex"
        assert cfg.setup_costs == (0.0, 1000.0, 5000.0)


class TestCli:
    def test_compare_writes_grid(self, tmp_path, capsys):
        cfg = write_cfg(tmp_path)
        out = tmp_path / "out"
        rc = main(["compare", "--config", str(cfg), "--out", str(out),
                   "D/1/Z", "D/inf/F"])
        assert rc == 0
        grid = out / "compare_D1Z_vs_DinfF.csv"
        assert grid.exists()
        rows = list(csv.reader(grid.open()))
        assert rows[0] == ["K\\x0", "0", "4"]
        assert len(rows) == 3
        vals = np.array([[float(v) for v in r[1:]] for r in rows[1:]])
        assert np.all(vals >= -1e-9)  # restricting flexibility can't be cheaper
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["command"] == "compare" and manifest["config_digest"]

    def test_compare_same_model_is_zero(self, tmp_path):
        cfg = write_cfg(tmp_path)
        out = tmp_path / "o2"
        assert main(["compare", "--config", str(cfg), "--out", str(out),
                     "D/inf/F", "D/inf/F"]) == 0
        rows = list(csv.reader((out / "compare_DinfF_vs_DinfF.csv").open()))
        vals = [float(v) for r in rows[1:] for v in r[1:]]
        assert all(v == 0.0 for v in vals)

    def test_solve_outputs(self, tmp_path):
        cfg = write_cfg(tmp_path)
        out = tmp_path / "o3"
        assert main(["solve", "--config", str(cfg), "--out", str(out)]) == 0
        assert (out / "values.csv").exists()
        assert (out / "regions_DinfF_K0.csv").exists()
        assert (out / "taudist_D1Z_K200_x4.csv").exists()
        with (out / "values.csv").open() as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 2 * 2 * 2  # models x K x x0

    def test_taudist_masses(self, tmp_path):
        cfg = write_cfg(tmp_path)
        out = tmp_path / "o4"
        assert main(["taudist", "--config", str(cfg), "--out", str(out)]) == 0
        rows = list(csv.reader((out / "taudist_DinfF_K0_x0.csv").open()))[1:]
        total = sum(float(r[1]) for r in rows)
        assert total == pytest.approx(1.0, abs=1e-9)

    def test_bounds_and_simulate(self, tmp_path):
        cfg = write_cfg(tmp_path)
        out = tmp_path / "o5"
        assert main(["bounds", "--config", str(cfg), "--out", str(out)]) == 0
        assert (out / "bounds.csv").exists()
        assert main(["simulate", "--config", str(cfg), "--out", str(out),
                     "--paths", "300"]) == 0
        rows = list(csv.reader((out / "simulate.csv").open()))
        assert len(rows) == 1 + 2 * 2 * 2

    def test_sweep_single_setting(self, tmp_path):
        cfg = write_cfg(tmp_path, x0=[0], setup_costs=[0.0], x_max=1200)
        out = tmp_path / "o6"
        rc = main(["sweep", "--config", str(cfg), "--out", str(out),
                   "--settings", "1", "D/1/Z", "D/inf/F"])
        assert rc == 0
        rows = list(csv.reader((out / "sweep_D1Z_vs_DinfF.csv").open()))
        header, row = rows[0], rows[1]
        rec = dict(zip(header, row))
        assert rec["max_setting"] == rec["min_setting"] == "1"
        assert float(rec["max_pct"]) == pytest.approx(float(rec["min_pct"]))
        assert float(rec["max_pct"]) == pytest.approx(12.12, abs=0.05)

    def test_settings_list(self, capsys):
        assert main(["settings", "list"]) == 0
        out = capsys.readouterr().out
        assert "125" in out and "constant" in out

    def test_validation_error_exit_code(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({**TINY, "models": []}))
        assert main(["solve", "--config", str(bad), "--out", str(tmp_path / "x")]) == 2

    def test_numerical_error_exit_code(self, tmp_path):
        # cap far below what the optimal order-up-to needs; no stopping escape
        cfg = write_cfg(tmp_path, x_max=3, x0=[0], models=["T/inf/F"],
                        intensity={"kind": "constant", "horizon": 6, "total_demand": 30.0},
                        costs={**TINY["costs"], "c2_bar": 5000.0})
        assert main(["solve", "--config", str(cfg), "--out", str(tmp_path / "y")]) == 3

    def test_report_emission_deterministic(self, tmp_path):
        cfg = write_cfg(tmp_path)
        outs = []
        for name in ("r1", "r2"):
            out = tmp_path / name
            assert main(["compare", "--config", str(cfg), "--out", str(out),
                         "D/1/Z", "D/inf/F"]) == 0
            outs.append((out / "compare_D1Z_vs_DinfF.csv").read_bytes())
        assert outs[0] == outs[1]

    def test_convention_override(self, tmp_path):
        cfg = write_cfg(tmp_path)
        out = tmp_path / "o7"
        rc = main(["compare", "--config", str(cfg), "--out", str(out),
                   "--convention", "paper", "D/1/Z", "D/inf/F"])
        assert rc == 0
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["config"]["convention"] == "paper"
