"""CLI subcommands, exit codes, and output determinism."""

import re

import numpy as np
import pytest

import socchange as sc
from socchange.cli import main

from conftest import write_scenario_inputs


def _read_totals(path):
    traj = sc.read_trajectory(path)
    return traj


class TestSimulateCommand:
    def test_writes_csv_and_prints_annual_means(self, tmp_path, capsys):
        config = write_scenario_inputs(tmp_path)
        out = tmp_path / "out"
        assert main(["simulate", str(config), "--out", str(out)]) == 0
        captured = capsys.readouterr()
        assert "annual mean dsoc" in captured.out
        assert (out / "trajectory.csv").exists()
        years = re.findall(r"^\s+(\d{4})\s", captured.out, re.MULTILINE)
        assert years[0] == "2006" and years[-1] == "2019"

    def test_negative_ratio_exits_one(self, tmp_path, capsys):
        config = write_scenario_inputs(tmp_path, r=-0.5)
        assert main(["simulate", str(config)]) == 1
        assert "error" in capsys.readouterr().err

    def test_missing_climate_exits_two(self, tmp_path, capsys):
        config = write_scenario_inputs(tmp_path)
        (tmp_path / "climate.csv").unlink()
        assert main(["simulate", str(config)]) == 2
        assert "data error" in capsys.readouterr().err

    def test_deterministic_outputs(self, tmp_path):
        config = write_scenario_inputs(tmp_path, fym_baseline_tc_ha_yr=0.5,
                                       plant_input_tc_ha_yr=0.5)
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        for out in (out_a, out_b):
            assert main(["simulate", str(config), "--out", str(out)]) == 0
            assert main(["sensitivity", str(config), "--param", "np1",
                         "--out", str(out)]) == 0
            assert main(["control", str(config), "--epsilon", "0.3",
                         "--out", str(out)]) == 0
        for name in ("trajectory.csv", "sensitivity_np1.csv",
                     "control_eps0p3.csv", "trajectory_eps0p3.csv"):
            assert (out_a / name).read_bytes() == (out_b / name).read_bytes()

    def test_scheme_override_and_plot(self, tmp_path):
        config = write_scenario_inputs(tmp_path)
        out = tmp_path / "out"
        assert main(["simulate", str(config), "--scheme", "rothc_discrete",
                     "--out", str(out), "--plot"]) == 0
        header = (out / "trajectory.csv").read_text().splitlines()[0]
        assert "scheme=rothc_discrete" in header
        svg = (out / "trajectory.svg").read_text()
        assert svg.startswith("<svg") and "polyline" in svg

    def test_absolute_mode(self, tmp_path):
        config = write_scenario_inputs(tmp_path)
        out = tmp_path / "out"
        assert main(["simulate", str(config), "--mode", "absolute",
                     "--out", str(out)]) == 0
        traj = _read_totals(out / "trajectory.csv")
        assert np.all(traj.states >= -1e-12)
        assert traj.meta["mode"] == "absolute"


class TestSensitivityCommand:
    def test_np1_summary_nonnegative(self, tmp_path, capsys):
        config = write_scenario_inputs(tmp_path)
        out = tmp_path / "out"
        assert main(["sensitivity", str(config), "--param", "np1",
                     "--out", str(out)]) == 0
        summary = capsys.readouterr().out
        match = re.search(r"min=(\S+) max=(\S+) final=(\S+)", summary)
        assert match and float(match.group(1)) >= 0.0
        assert (out / "sensitivity_np1.csv").exists()

    def test_temp1_summary_nonpositive(self, tmp_path, capsys):
        config = write_scenario_inputs(tmp_path)
        assert main(["sensitivity", str(config), "--param", "temp1",
                     "--out", str(tmp_path / "out")]) == 0
        match = re.search(r"max=(\S+)", capsys.readouterr().out)
        assert float(match.group(1)) <= 0.0

    def test_r_series_spans_horizon(self, tmp_path):
        config = write_scenario_inputs(tmp_path)
        out = tmp_path / "out"
        assert main(["sensitivity", str(config), "--param", "r", "--dt", "0.05",
                     "--out", str(out)]) == 0
        lines = (out / "sensitivity_r.csv").read_text().splitlines()
        last_t = float(lines[-1].split(",")[0])
        assert last_t == pytest.approx(12.0 * 15)

    def test_unknown_param_rejected_by_argparse(self, tmp_path):
        config = write_scenario_inputs(tmp_path)
        with pytest.raises(SystemExit):
            main(["sensitivity", str(config), "--param", "clay"])


class TestControlCommand:
    def test_epsilon_zero_maintenance(self, tmp_path):
        config = write_scenario_inputs(tmp_path, fym_baseline_tc_ha_yr=0.5,
                                       plant_input_tc_ha_yr=0.5)
        out = tmp_path / "out"
        assert main(["control", str(config), "--epsilon", "0",
                     "--out", str(out)]) == 0
        traj = _read_totals(out / "trajectory_eps0.csv")
        assert np.max(np.abs(traj.totals)) <= 1e-9
        assert (out / "control_eps0.csv").exists()

    def test_sweep_ordering_and_file_count(self, tmp_path):
        config = write_scenario_inputs(tmp_path, warming=0.15, np_trend=0.0,
                                       r=1.0, fym_baseline_tc_ha_yr=0.5,
                                       plant_input_tc_ha_yr=0.5)
        out = tmp_path / "out"
        assert main(["control", str(config),
                     "--epsilon", "0,0.2,0.5,0.8", "--out", str(out)]) == 0
        files = sorted(out.glob("trajectory_eps*.csv"))
        assert len(files) == 4
        means = []
        for eps in ("0", "0p2", "0p5", "0p8"):
            traj = _read_totals(out / f"trajectory_eps{eps}.csv")
            means.append([traj.annual_means()[y] for y in range(2006, 2020)])
        means = np.array(means)
        assert np.all(np.diff(means, axis=0) >= -1e-12)

    def test_epsilon_one_routed_to_uncontrolled(self, tmp_path, capsys):
        config = write_scenario_inputs(tmp_path, fym_baseline_tc_ha_yr=0.5,
                                       plant_input_tc_ha_yr=0.5)
        out = tmp_path / "out"
        assert main(["control", str(config), "--epsilon", "1",
                     "--out", str(out)]) == 0
        captured = capsys.readouterr()
        assert "no manure" in captured.err
        assert (out / "trajectory_eps1.csv").exists()
        assert not (out / "control_eps1.csv").exists()

    def test_bad_epsilon_list(self, tmp_path, capsys):
        config = write_scenario_inputs(tmp_path, fym_baseline_tc_ha_yr=0.5)
        assert main(["control", str(config), "--epsilon", "0.2;0.5"]) == 1


class TestEquilibriumCommand:
    def test_inputs_then_soc_round_trip(self, tmp_path, capsys):
        config = write_scenario_inputs(tmp_path)
        assert main(["equilibrium", str(config), "--inputs", "1", "0"]) == 0
        out = capsys.readouterr().out
        pools = {m.group(1): float(m.group(2)) for m in
                 re.finditer(r"c0\.(\w+) = (\S+)", out)}
        soc_active = sum(pools.values())
        assert main(["equilibrium", str(config), "--soc",
                     str(soc_active)]) == 0
        out2 = capsys.readouterr().out
        p0 = float(re.search(r"P0 = (\S+)", out2).group(1))
        assert p0 == pytest.approx(1.0, rel=1e-9)

    def test_zero_soc_all_zero_report(self, tmp_path, capsys):
        config = write_scenario_inputs(tmp_path)
        assert main(["equilibrium", str(config), "--soc", "0"]) == 0
        out = capsys.readouterr().out
        assert re.search(r"P0 = 0(\.0)?\b", out)
        assert "c_iom = 0" in out

    def test_residual_always_tiny(self, tmp_path, capsys):
        config = write_scenario_inputs(tmp_path)
        for argv in (["--inputs", "2.5", "0.5"], ["--soc", "35"]):
            assert main(["equilibrium", str(config)] + argv) == 0
            out = capsys.readouterr().out
            residual = float(re.search(r"residual = (\S+)", out).group(1))
            assert residual < 1e-10

    def test_infeasible_baseline_exits_three(self, tmp_path, capsys):
        config = write_scenario_inputs(tmp_path, fym_baseline_tc_ha_yr=100.0)
        assert main(["equilibrium", str(config), "--soc", "1.0"]) == 3
        assert "negative" in capsys.readouterr().err


class TestVersion:
    def test_version_prints_scheme_identifiers(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["--version"])
        assert exc.value.code == 0
        out = capsys.readouterr().out
        assert "socchange" in out and "nonstandard" in out
