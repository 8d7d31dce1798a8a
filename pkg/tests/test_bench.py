import csv
import json
import math

import numpy as np
import pytest

from eigenplace import (
    BenchmarkConfig,
    ConfigError,
    EnsembleSpec,
    StoppingRule,
    place_file,
    run_campaign,
    timing_study,
)
from eigenplace.bench import CSV_COLUMNS
from eigenplace.cli import main


def tiny_config(tmp_path, **overrides):
    base = dict(
        ensemble=EnsembleSpec("gaussian", 10, 2, seed=77),
        trials=3,
        algorithms=("mpme", "random"),
        k_min=2,
        k_max=4,
        records_csv=str(tmp_path / "records.csv"),
        summary_json=str(tmp_path / "summary.json"),
    )
    base.update(overrides)
    return BenchmarkConfig(**base)


def write_three_row_csv(path):
    path.write_text("1,0\n0,1\n1,1\n")
    return str(path)


class TestCampaign:
    def test_single_record(self, tmp_path):
        cfg = tiny_config(
            tmp_path, trials=1, algorithms=("random",), k_min=2, k_max=2
        )
        report = run_campaign(cfg)
        assert len(report.records) == 1

    def test_record_count_contract(self, tmp_path):
        cfg = tiny_config(tmp_path)
        report = run_campaign(cfg)
        assert len(report.records) == 3 * 2 * 3  # trials x algorithms x ks

    def test_mean_matches_records(self, tmp_path):
        cfg = tiny_config(tmp_path)
        report = run_campaign(cfg)
        for alg in cfg.algorithms:
            for k in range(cfg.k_min, cfg.k_max + 1):
                vals = [
                    r.wcev_index for r in report.records
                    if r.algorithm == alg and r.k == k
                ]
                mean = sum(vals) / len(vals)
                got = report.means[alg][k]["wcev_index"]
                if math.isinf(mean):
                    assert math.isinf(got)
                else:
                    assert got == pytest.approx(mean, rel=1e-12)

    def test_csv_columns_and_reproducibility(self, tmp_path):
        cfg = tiny_config(tmp_path)
        run_campaign(cfg)
        first = (tmp_path / "records.csv").read_text().splitlines()
        run_campaign(cfg)
        second = (tmp_path / "records.csv").read_text().splitlines()
        assert first[0] == ",".join(CSV_COLUMNS)
        assert len(first) == len(second)
        runtime_col = CSV_COLUMNS.index("runtime_seconds")
        for a, b in zip(first[1:], second[1:]):
            ca, cb = a.split(","), b.split(",")
            del ca[runtime_col], cb[runtime_col]
            assert ca == cb  # byte-identical apart from wall-clock

    def test_workers_give_identical_data(self, tmp_path):
        serial = run_campaign(tiny_config(tmp_path, workers=1))
        parallel = run_campaign(tiny_config(tmp_path, workers=2))
        for a, b in zip(serial.records, parallel.records):
            assert (a.trial, a.algorithm, a.k) == (b.trial, b.algorithm, b.k)
            assert a.wcev_index == b.wcev_index
            assert a.mse_index == b.mse_index

    def test_threshold_bookkeeping(self, tmp_path):
        cfg = tiny_config(tmp_path, wcev_index_threshold=5.0)
        report = run_campaign(cfg)
        for r in report.records:
            assert r.satisfied == (r.wcev_index <= 5.0)
            per_alg = [
                x.k for x in report.records
                if x.trial == r.trial and x.algorithm == r.algorithm
                and x.satisfied
            ]
            expected = min(per_alg) if per_alg else None
            assert r.M_required == expected
        assert "wcev" in report.m_required_mean_curve

    def test_summary_json_written(self, tmp_path):
        cfg = tiny_config(tmp_path, wcev_index_threshold=5.0)
        run_campaign(cfg)
        doc = json.loads((tmp_path / "summary.json").read_text())
        assert doc["schema_version"] == 1
        assert "mpme" in doc["means"]
        assert doc["config"]["trials"] == 3

    def test_local_opt_campaign(self, tmp_path):
        plain = run_campaign(tiny_config(tmp_path, algorithms=("random",)))
        polished = run_campaign(
            tiny_config(tmp_path, algorithms=("random",), local_opt="wcev")
        )
        for k in range(2, 5):
            assert (
                polished.means["random"][k]["wcev_index"]
                <= plain.means["random"][k]["wcev_index"] + 1e-9
            )

    def test_config_validation(self, tmp_path):
        with pytest.raises(ConfigError):
            tiny_config(tmp_path, trials=0)
        with pytest.raises(ConfigError):
            tiny_config(tmp_path, algorithms=("mpme", "bogus"))
        with pytest.raises(ConfigError):
            tiny_config(tmp_path, k_min=1)  # below n
        with pytest.raises(ConfigError):
            tiny_config(tmp_path, k_max=11)  # above N


class TestPlaceFile:
    def test_golden_mpme_json(self, tmp_path):
        matrix = write_three_row_csv(tmp_path / "pool.csv")
        out = tmp_path / "result.json"
        doc = place_file(matrix, "mpme", StoppingRule.fixed_count(2), out=out)
        assert doc["selected"] == [2, 0]
        assert doc["M"] == 2
        assert doc["lambda_n"] == pytest.approx((3 - math.sqrt(5)) / 2)
        on_disk = json.loads(out.read_text())
        assert on_disk["selected"] == [2, 0]
        assert on_disk["schema_version"] == 1

    def test_local_opt_flag(self, tmp_path):
        matrix = write_three_row_csv(tmp_path / "pool.csv")
        doc = place_file(
            matrix, "mpme", StoppingRule.fixed_count(2), local_opt="wcev"
        )
        assert sorted(doc["selected"]) == [0, 1]
        assert doc["lambda_n"] == pytest.approx(1.0)

    def test_framesense_threshold_minimum_count(self, tmp_path):
        rs = np.random.default_rng(0)
        mat = rs.normal(size=(20, 3))
        path = tmp_path / "pool.csv"
        np.savetxt(path, mat, delimiter=",")
        doc = place_file(str(path), "framesense", StoppingRule.wcev_threshold(1.0))
        assert doc["satisfied"] is True
        assert doc["lambda_n"] >= 1.0
        # one fewer row along the same elimination would break the constraint
        assert doc["M"] < 20

    def test_random_needs_fixed_count(self, tmp_path):
        matrix = write_three_row_csv(tmp_path / "pool.csv")
        with pytest.raises(ConfigError):
            place_file(matrix, "random", StoppingRule.wcev_threshold(1.0))


class TestCli:
    def test_place_roundtrip(self, tmp_path, capsys):
        matrix = write_three_row_csv(tmp_path / "pool.csv")
        out = tmp_path / "res.json"
        code = main([
            "place", "--matrix", matrix, "--algorithm", "mpme",
            "--M", "2", "--out", str(out),
        ])
        assert code == 0
        doc = json.loads(out.read_text())
        assert doc["selected"] == [2, 0]
        assert json.loads(capsys.readouterr().out)["M"] == 2

    def test_malformed_csv_exit_2(self, tmp_path, capsys):
        bad = tmp_path / "bad.csv"
        bad.write_text("1,0\nnot-a-number,1\n")
        code = main([
            "place", "--matrix", str(bad), "--algorithm", "mpme", "--M", "2",
        ])
        assert code == 2

    def test_rank_deficient_exit_3(self, tmp_path, capsys):
        wide = tmp_path / "wide.csv"
        wide.write_text("1,0,0\n0,1,0\n")  # N < n
        code = main([
            "place", "--matrix", str(wide), "--algorithm", "mpme", "--M", "2",
        ])
        assert code == 3

    def test_conflicting_rules_exit_4(self, tmp_path, capsys):
        matrix = write_three_row_csv(tmp_path / "pool.csv")
        code = main([
            "place", "--matrix", matrix, "--algorithm", "mpme",
            "--M", "2", "--gamma", "0.5",
        ])
        assert code == 4

    def test_oracle_subcommand(self, tmp_path, capsys):
        matrix = write_three_row_csv(tmp_path / "pool.csv")
        code = main(["oracle", "--matrix", matrix, "--M", "2"])
        assert code == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["selected"] == [0, 1]
        assert doc["lambda_n"] == pytest.approx(1.0)

    def test_campaign_from_config_file(self, tmp_path, capsys):
        cfg = {
            "ensemble": {"kind": "gaussian", "N": 10, "n": 2, "seed": 5},
            "trials": 2,
            "algorithms": ["mpme"],
            "sensor_range": [2, 3],
            "thresholds": {"wcev_index": 5.0},
            "output": {"records_csv": str(tmp_path / "rec.csv")},
        }
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps(cfg))
        code = main(["campaign", "--config", str(cfg_path)])
        assert code == 0
        rows = list(csv.DictReader((tmp_path / "rec.csv").open()))
        assert len(rows) == 2 * 1 * 2
        assert list(rows[0].keys()) == list(CSV_COLUMNS)

    def test_campaign_bad_config_exit_4(self, tmp_path, capsys):
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps({"trials": 1}))
        assert main(["campaign", "--config", str(cfg_path)]) == 4

    def test_campaign_from_flags(self, tmp_path, capsys):
        out = tmp_path / "rec.csv"
        code = main([
            "campaign", "--ensemble-kind", "gaussian", "--N", "8", "--n", "2",
            "--seed", "3", "--trials", "2", "--algorithms", "mpme,random",
            "--k-min", "2", "--k-max", "3", "--out", str(out),
        ])
        assert code == 0
        rows = list(csv.DictReader(out.open()))
        assert len(rows) == 2 * 2 * 2

    def test_campaign_missing_flags_exit_4(self, capsys):
        assert main(["campaign", "--trials", "2"]) == 4

    def test_timing_subcommand(self, tmp_path, capsys):
        out = tmp_path / "timing.csv"
        code = main([
            "timing", "--n", "3", "--M", "3", "--N-sweep", "20,40",
            "--algorithms", "mpme", "--trials", "1", "--out", str(out),
        ])
        assert code == 0
        assert "slope[mpme]" in capsys.readouterr().out
        rows = list(csv.reader(out.open()))
        assert rows[0] == ["algorithm", "N", "mean_seconds"]
        assert len(rows) == 3


class TestTimingStudy:
    def test_zero_trials_config_error(self):
        with pytest.raises(ConfigError):
            timing_study(n=3, M=3, N_values=[10, 20], trials=0)

    def test_report_shape(self):
        report = timing_study(
            n=3, M=3, N_values=[20, 40], algorithms=("mpme",), trials=1
        )
        assert len(report.rows) == 2
        assert "mpme" in report.slopes
