import csv
import io

import numpy as np
import numpy.testing as npt
import pytest

from ncrelay.cli import build_config, main, read_config_file
from ncrelay.experiments import (CSV_HEADER, ExperimentConfig, ResultRow,
                                 ResultTable, emit_csv, format_table,
                                 run_experiment)


def _cfg(**kw):
    base = dict(scenario="fourhop-lmmse", snr_db=(0.0,), rho=(0.0,),
                trials=40, seed=7)
    base.update(kw)
    return ExperimentConfig(**base)


class TestConfig:
    def test_validation(self):
        with pytest.raises(ValueError):
            _cfg(scenario="nope")
        with pytest.raises(ValueError):
            _cfg(trials=0)
        with pytest.raises(ValueError):
            _cfg(rho=(1.0,))
        with pytest.raises(ValueError):
            _cfg(n_hops=(1,))
        with pytest.raises(ValueError):
            _cfg(workers=0)


class TestDeterminism:
    def test_rerun_identical(self):
        t1 = run_experiment(_cfg())
        t2 = run_experiment(_cfg())
        assert format_table(t1) == format_table(t2)

    @pytest.mark.parametrize("workers", [3, 5])
    def test_worker_count_irrelevant(self, workers):
        ref = format_table(run_experiment(_cfg(trials=60)))
        out = format_table(run_experiment(_cfg(trials=60, workers=workers)))
        assert out == ref

    def test_seed_changes_output(self):
        a = format_table(run_experiment(_cfg()))
        b = format_table(run_experiment(_cfg(seed=8)))
        assert a != b


class TestScenarios:
    @pytest.mark.parametrize("scenario,n_metrics", [
        ("fourhop-lmmse", 2),
        ("fourhop-ml", 2),
        ("fourhop-aesnr", 1),
        ("fourhop-baseline", 4),
    ])
    def test_fourhop_row_counts(self, scenario, n_metrics):
        cfg = _cfg(scenario=scenario, snr_db=(0.0, 10.0), rho=(0.0, 0.5))
        table = run_experiment(cfg)
        assert len(table.rows) == 4 * n_metrics

    def test_multihop_row_counts(self):
        cfg = _cfg(scenario="multihop-sweep", n_hops=(2, 4), sigma2=0.5)
        table = run_experiment(cfg)
        assert len(table.rows) == 2 * 4

    def test_asymptotic_rows(self):
        cfg = _cfg(scenario="asymptotic-check", n_hops=(8,), sigma2=0.5)
        table = run_experiment(cfg)
        metrics = {r.metric for r in table.rows}
        assert metrics == {"noise_factor", "noise_factor_asymptote"}

    def test_lmmse_mse_nonincreasing_in_snr(self):
        cfg = _cfg(scenario="fourhop-lmmse", snr_db=(0.0, 10.0, 20.0),
                   trials=2000)
        table = run_experiment(cfg)
        vals = [r.empirical for r in table.rows if r.metric == "mse_theta1"]
        assert vals[0] > vals[1] > vals[2]


class TestCsv:
    def test_header_and_roundtrip(self, tmp_path):
        table = ResultTable(rows=[ResultRow("fourhop-lmmse", 10.0, 0.5, 2,
                                            "mse_theta1", 1.2345678901e-3,
                                            1.3e-3, 100, 7)])
        path = tmp_path / "out.csv"
        emit_csv(table, str(path))
        raw = path.read_bytes()
        assert b"\r" not in raw
        text = raw.decode("utf-8")
        lines = text.strip().split("\n")
        assert lines[0] == CSV_HEADER
        row = next(csv.DictReader(io.StringIO(text)))
        npt.assert_allclose(float(row["empirical"]), 1.2345678901e-3, rtol=1e-9)
        assert row["scenario"] == "fourhop-lmmse"
        assert row["trials"] == "100"

    def test_empty_table(self, tmp_path):
        path = tmp_path / "empty.csv"
        emit_csv(ResultTable(), str(path))
        assert path.read_text() == CSV_HEADER + "\n"


class TestCli:
    def test_config_file_and_overrides(self, tmp_path):
        cfgfile = tmp_path / "exp.cfg"
        cfgfile.write_text("scenario = fourhop-lmmse\n"
                           "snr_db = 0,10\n"
                           "# a comment\n"
                           "trials = 50\n")
        values = read_config_file(str(cfgfile))
        cfg = build_config(values, {"seed": 9, "rho": "0,0.5"})
        assert cfg.scenario == "fourhop-lmmse"
        assert cfg.snr_db == (0.0, 10.0)
        assert cfg.rho == (0.0, 0.5)
        assert cfg.trials == 50
        assert cfg.seed == 9

    def test_unknown_key_rejected(self):
        with pytest.raises(ValueError):
            build_config({"bogus": "1"}, {})

    def test_list_scenarios(self, capsys):
        assert main(["list-scenarios"]) == 0
        out = capsys.readouterr().out
        assert "fourhop-lmmse" in out and "multihop-sweep" in out

    def test_validate_config(self, capsys):
        rc = main(["validate-config", "--scenario", "fourhop-lmmse",
                   "--trials", "10"])
        assert rc == 0
        assert "ok:" in capsys.readouterr().out

    def test_run_writes_csv(self, tmp_path, capsys):
        out = tmp_path / "r.csv"
        rc = main(["run", "--scenario", "fourhop-lmmse", "--snr", "0",
                   "--rho", "0", "--trials", "20", "--seed", "3",
                   "--out", str(out)])
        assert rc == 0
        assert out.read_text().startswith(CSV_HEADER)

    def test_bad_config_returns_error(self, capsys):
        rc = main(["run", "--trials", "10"])
        assert rc == 2
