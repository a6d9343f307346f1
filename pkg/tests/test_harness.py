"""Experiment harness and CLI: config parsing, CSV determinism, exit codes."""

import copy
import csv

import numpy as np
import pytest

from fwvip import cli, harness
from fwvip.harness import (
    CSV_COLUMNS,
    ConfigError,
    build_problem,
    load_config,
    parse_config,
    run_experiment,
)

BASE_CONFIG = {
    "problem": {"kind": "affine", "dim": 6, "mu": 1.0, "skew_scale": 2.0, "seed": 3},
    "solvers": ["PGD", "Extragradient"],
    "epsilon": 1e-5,
    "budgets": {"max_outer": 200, "max_inner": 5000, "max_oracle_calls": 200_000},
}


def make_config(**overrides):
    data = copy.deepcopy(BASE_CONFIG)
    data.update(overrides)
    return data


class TestConfigParsing:
    def test_minimal_config(self):
        cfg = parse_config(make_config())
        assert cfg.problem.kind == "affine" and cfg.problem.dim == 6
        assert [s.name for s in cfg.solvers] == ["PGD", "Extragradient"]
        assert cfg.epsilon == 1e-5
        assert cfg.budgets.max_inner == 5000

    def test_solver_with_parameters(self):
        cfg = parse_config(make_config(
            solvers=[{"name": "FW-VIP", "parameters": {"max_outer": 50}}]))
        assert cfg.solvers[0].parameters == {"max_outer": 50}

    def test_demand_keys_parsed_as_od_pairs(self):
        cfg = parse_config(make_config(
            problem={"kind": "tap", "demands": {"1,4": 0.2, "2-5": 0.3}}))
        assert cfg.problem.demands == {(1, 4): 0.2, (2, 5): 0.3}

    @pytest.mark.parametrize("mutate,match", [
        (lambda d: d.pop("problem"), "bad config"),
        (lambda d: d["problem"].update(kind="lp"), "unknown problem kind"),
        (lambda d: d.update(solvers=[]), "at least one solver"),
        (lambda d: d.update(solvers=["Simplex"]), "unknown solver"),
        (lambda d: d.update(epsilon=0.0), "epsilon"),
        (lambda d: d.update(reference="exact"), "unknown reference"),
        (lambda d: d["problem"].update(demands={"ab": 1}), "bad OD key"),
        (lambda d: d.update(budgets={"max_epochs": 3}), "bad config"),
    ])
    def test_malformed_configs_raise(self, mutate, match):
        data = make_config()
        mutate(data)
        with pytest.raises(ConfigError, match=match):
            parse_config(data)

    def test_non_mapping_root_raises(self):
        with pytest.raises(ConfigError, match="mapping"):
            parse_config(["not", "a", "dict"])

    def test_load_config_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="cannot read"):
            load_config(str(tmp_path / "nope.yaml"))

    def test_load_config_invalid_yaml(self, tmp_path):
        p = tmp_path / "bad.yaml"
        p.write_text("problem: [unclosed\n")
        with pytest.raises(ConfigError, match="invalid YAML"):
            load_config(str(p))


class TestBuildProblem:
    def test_affine_uses_exact_constants(self):
        cfg = parse_config(make_config())
        built = build_problem(cfg.problem)
        assert built.instance is None and built.constants is None
        assert built.vi.L >= built.vi.mu > 0

    def test_tap_estimates_constants(self):
        cfg = parse_config(make_config(problem={"kind": "tap", "n_samples": 200}))
        built = build_problem(cfg.problem)
        assert built.instance is not None
        assert built.constants is not None
        assert built.vi.gamma >= 1.0


class TestRunExperiment:
    def test_records_cover_all_solvers(self):
        result = run_experiment(parse_config(make_config()))
        assert result.converged
        assert {r.solver for r in result.records} == {"PGD", "Extragradient"}
        assert {s.solver for s in result.summaries} == {"PGD", "Extragradient"}

    def test_cumulative_counters_monotone_within_solver(self):
        result = run_experiment(parse_config(make_config(
            solvers=["FW-VIP", "PGD"], budgets={"max_outer": 30, "max_inner": 2000})))
        by_solver = {}
        for r in result.records:
            by_solver.setdefault(r.solver, []).append(r)
        for rows in by_solver.values():
            for a, b in zip(rows, rows[1:]):
                assert b.iter == a.iter + 1
                assert b.cum_lmo >= a.cum_lmo and b.cum_proj >= a.cum_proj
                assert b.cum_g_evals >= a.cum_g_evals

    def test_fw_vip_uses_no_algorithmic_projections(self):
        result = run_experiment(parse_config(make_config(solvers=["FW-VIP"])))
        fw = [s for s in result.summaries if s.solver == "FW-VIP"][0]
        assert fw.counters.proj == 0
        assert fw.counters.lmo > 0

    def test_reference_fills_distance_column(self):
        result = run_experiment(parse_config(make_config(reference="extragradient")))
        assert result.reference is not None
        assert all(np.isfinite(r.dist_to_oracle) for r in result.records)
        assert result.records[-1].dist_to_oracle <= 1e-3

    def test_without_reference_distance_is_nan(self):
        result = run_experiment(parse_config(make_config()))
        assert all(np.isnan(r.dist_to_oracle) for r in result.records)

    def test_unknown_solver_parameter_raises(self):
        cfg = parse_config(make_config(
            solvers=[{"name": "FW-VIP", "parameters": {"momentum": 0.9}}]))
        with pytest.raises(ConfigError, match="unknown FW-VIP parameters"):
            run_experiment(cfg)

    def test_record_every_strides_baseline_rows(self):
        cfg = parse_config(make_config(
            solvers=[{"name": "PGD", "parameters": {"record_every": 10}}]))
        result = run_experiment(cfg)
        iters = [r.iter for r in result.records]
        assert iters[0] == 0
        assert all(i % 10 == 0 for i in iters[:-1])  # last row always kept


class TestCsvOutput:
    def run_to_csv(self, tmp_path, name="trace.csv", **overrides):
        path = tmp_path / name
        cfg = parse_config(make_config(output_path=str(path), **overrides))
        run_experiment(cfg)
        return path.read_bytes()

    def test_header_matches_schema(self, tmp_path):
        raw = self.run_to_csv(tmp_path)
        header = raw.decode().splitlines()[0]
        assert tuple(header.split(",")) == CSV_COLUMNS

    def test_reruns_are_byte_identical(self, tmp_path):
        a = self.run_to_csv(tmp_path, "a.csv")
        b = self.run_to_csv(tmp_path, "b.csv")
        assert a == b

    def test_wall_time_off_by_default(self, tmp_path):
        raw = self.run_to_csv(tmp_path)
        rows = list(csv.DictReader(raw.decode().splitlines()))
        assert all(row["wall_ns"] == "0" for row in rows)

    def test_float_columns_round_trip_exactly(self, tmp_path):
        path = tmp_path / "trace.csv"
        cfg = parse_config(make_config(output_path=str(path)))
        result = run_experiment(cfg)
        rows = list(csv.DictReader(path.read_text().splitlines()))
        assert len(rows) == len(result.records)
        for row, rec in zip(rows, result.records):
            assert float(row["gap"]) == rec.gap


class TestSelftest:
    def test_selftest_passes(self):
        assert harness.selftest() == []


class TestCli:
    def write_cfg(self, tmp_path, data):
        import yaml
        p = tmp_path / "cfg.yaml"
        p.write_text(yaml.safe_dump(data))
        return str(p)

    def test_run_success_exit_zero(self, tmp_path, capsys):
        cfg = self.write_cfg(tmp_path, make_config(
            output_path=str(tmp_path / "out.csv")))
        assert cli.main(["run", cfg]) == cli.EXIT_OK
        out = capsys.readouterr().out
        assert "PGD: converged" in out and "trace written" in out
        assert (tmp_path / "out.csv").exists()

    def test_run_config_error_exit_one(self, tmp_path, capsys):
        cfg = self.write_cfg(tmp_path, make_config(solvers=["Simplex"]))
        assert cli.main(["run", cfg]) == cli.EXIT_CONFIG
        assert "config error" in capsys.readouterr().err

    def test_run_budget_exhausted_exit_two(self, tmp_path, capsys):
        cfg = self.write_cfg(tmp_path, make_config(
            epsilon=1e-13, budgets={"max_oracle_calls": 50}))
        assert cli.main(["run", cfg, "--quiet"]) == cli.EXIT_NO_CONVERGENCE

    def test_run_output_override(self, tmp_path):
        cfg = self.write_cfg(tmp_path, make_config())
        dest = tmp_path / "override.csv"
        assert cli.main(["run", cfg, "--quiet", "--output", str(dest)]) == cli.EXIT_OK
        assert dest.exists()

    def test_tap_export_round_trip(self, tmp_path):
        from fwvip import tap
        dest = tmp_path / "instance.txt"
        assert cli.main(["tap-export", "--output", str(dest)]) == cli.EXIT_OK
        rebuilt = tap.parse_instance(dest.read_text())
        assert tap.instances_equal(rebuilt, tap.build_instance())

    def test_estimate_prints_constants(self, tmp_path, capsys):
        cfg = self.write_cfg(tmp_path, make_config())
        assert cli.main(["estimate", cfg]) == cli.EXIT_OK
        assert "exact constants" in capsys.readouterr().out

    def test_estimate_tap_prints_sampled_constants(self, tmp_path, capsys):
        cfg = self.write_cfg(tmp_path, make_config(
            problem={"kind": "tap", "n_samples": 200}))
        assert cli.main(["estimate", cfg, "--samples", "100"]) == cli.EXIT_OK
        assert "estimated over 100 samples" in capsys.readouterr().out

    def test_selftest_command(self, capsys):
        assert cli.main(["selftest"]) == cli.EXIT_OK
        assert "all checks passed" in capsys.readouterr().out
