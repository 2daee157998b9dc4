"""Harness behavior: runs, traces, CSV files, config parsing, and the CLI."""

import csv
import json

import numpy as np
import pytest

from bspapa import (
    ConfigError,
    EchoScenario,
    ExperimentConfig,
    FilterConfig,
    experiment_from_dict,
    make_block_sparse_ir,
    misalignment_db,
    preset_config,
    run_experiment,
    synthesize_scenario,
    write_traces_csv,
)
from bspapa.bench import RunSummary, SegmentSummary, with_seed
from bspapa.cli import main as cli_main


def small_scenario(seed=5, total=1200, switch=600, snr_db=30.0, kind="ar1"):
    first = make_block_sparse_ir(32, [(9, 12)], seed=11)
    second = make_block_sparse_ir(32, [(9, 12), (25, 28)], seed=12)
    schedule = [(0, first)]
    if switch is not None and switch < total:
        schedule.append((switch, second))
    return EchoScenario(
        schedule=tuple(schedule),
        excitation=kind,
        pole=0.8 if kind == "ar1" else None,
        snr_db=snr_db,
        seed=seed,
        total_samples=total,
    )


def small_panel(**overrides):
    base = dict(filter_length=32, projection_order=4, step_size=0.2, regularization=0.01)
    base.update(overrides)
    return [
        ("BS-PAPA(P=4)", FilterConfig("bs-papa", group_size=4, **base)),
        ("PAPA", FilterConfig("papa", **base)),
    ]


class TestScenarioSynthesis:
    def test_deterministic(self):
        xa, da = synthesize_scenario(small_scenario())
        xb, db = synthesize_scenario(small_scenario())
        np.testing.assert_array_equal(xa, xb)
        np.testing.assert_array_equal(da, db)

    def test_snr_holds_per_segment(self):
        sc = small_scenario(snr_db=20.0)
        x, d = synthesize_scenario(sc)
        for start, end, response in sc.segments():
            from scipy.signal import lfilter

            clean = lfilter(response.taps, [1.0], x)[start:end]
            noise = d[start:end] - clean
            realized = 10.0 * np.log10(np.mean(clean**2) / np.mean(noise**2))
            assert realized == pytest.approx(20.0, abs=1e-9)

    def test_noiseless_mode(self):
        sc = small_scenario(snr_db=None, switch=None)
        x, d = synthesize_scenario(sc)
        from scipy.signal import lfilter

        np.testing.assert_allclose(d, lfilter(sc.schedule[0][1].taps, [1.0], x), rtol=1e-12)


class TestRunExperiment:
    def test_frozen_panel_entry_stays_at_zero_db(self):
        frozen = [("frozen", FilterConfig("apa", 32, 4, step_size=0.0))]
        exp = ExperimentConfig(scenario=small_scenario(), panel=frozen, trace_decimation=1)
        traces, summary = run_experiment(exp)
        np.testing.assert_array_equal(traces[0].values, np.zeros(1200))
        assert summary.row("frozen", 0).time_to_threshold is None

    def test_misalignment_jump_at_switch(self):
        exp = ExperimentConfig(scenario=small_scenario(), panel=small_panel(), trace_decimation=1)
        traces, _ = run_experiment(exp)
        for trace in traces:
            assert trace.values[600] > trace.values[599]

    def test_trace_matches_misalignment_op(self):
        # the inlined hot-loop metric must agree with the public function
        sc = small_scenario(total=300, switch=None)
        cfg = FilterConfig("bs-papa", 32, 4, group_size=4, step_size=0.2)
        exp = ExperimentConfig(scenario=sc, panel=[("one", cfg)], trace_decimation=1)
        traces, _ = run_experiment(exp)

        from bspapa import AdaptiveFilter

        x, d = synthesize_scenario(sc)
        filt = AdaptiveFilter(cfg)
        expected = np.empty(300)
        for n in range(300):
            filt.process(x[n], d[n])
            expected[n] = misalignment_db(sc.schedule[0][1].taps, filt.weights)
        np.testing.assert_allclose(traces[0].values, expected, rtol=1e-12, atol=1e-12)

    def test_panel_independence(self):
        exp_full = ExperimentConfig(scenario=small_scenario(), panel=small_panel(), trace_decimation=7)
        exp_single = ExperimentConfig(
            scenario=small_scenario(), panel=small_panel()[1:], trace_decimation=7
        )
        full, _ = run_experiment(exp_full)
        single, _ = run_experiment(exp_single)
        np.testing.assert_array_equal(full[1].values, single[0].values)

    def test_solver_failure_recorded_other_runs_continue(self):
        # delta=0 on silent input: the first projection system is exactly singular
        sc = small_scenario(total=50, switch=None)
        doomed = FilterConfig("apa", 32, 4, step_size=0.1, regularization=0.0)
        healthy = FilterConfig("apa", 32, 4, step_size=0.1, regularization=0.01)
        exp = ExperimentConfig(
            scenario=sc, panel=[("doomed", doomed), ("healthy", healthy)], trace_decimation=1
        )
        with pytest.warns(Warning):
            traces, summary = run_experiment(exp)
        assert [t.label for t in traces] == ["healthy"]
        assert "doomed" in summary.failures
        # apa pins group_size to L=32; efficient count is (P+M-1)*N = 35
        assert summary.row("healthy", 0).mults_per_step == 35
        assert summary.rows[0].label == "healthy"

    def test_steady_state_is_tail_mean(self):
        exp = ExperimentConfig(scenario=small_scenario(switch=None, total=1000),
                               panel=small_panel(), trace_decimation=1)
        traces, summary = run_experiment(exp)
        for trace in traces:
            row = summary.row(trace.label, 0)
            assert row.steady_state_db == pytest.approx(float(np.mean(trace.values[-100:])))


class TestCsvOutput:
    def test_structure_and_roundtrip(self, tmp_path):
        from bspapa import MisalignmentTrace

        trace = MisalignmentTrace(
            "demo", np.array([0, 10, 20]), np.array([0.0, -3.141592653589793, -21.5])
        )
        summary = RunSummary(rows=[SegmentSummary("demo", 0, 17, -21.456789, 96)])
        path, sidecar = write_traces_csv([trace], summary, tmp_path / "out.csv")
        lines = path.read_text().splitlines()
        assert lines[0] == "sample,label,misalignment_db"
        assert len(lines) == 4
        with open(path) as fh:
            rows = list(csv.DictReader(fh))
        for row, expected in zip(rows, trace.values):
            assert float(row["misalignment_db"]) == pytest.approx(expected, rel=2e-6)
        assert sidecar.name == "out.csv.summary.csv"
        with open(sidecar) as fh:
            srows = list(csv.DictReader(fh))
        assert srows[0]["time_to_minus15db"] == "17"
        assert float(srows[0]["steady_state_db"]) == pytest.approx(-21.456789, rel=2e-6)
        assert srows[0]["mults_per_step"] == "96"

    def test_never_reached_threshold_is_empty_field(self, tmp_path):
        from bspapa import MisalignmentTrace

        trace = MisalignmentTrace("x", np.array([0]), np.array([-1.0]))
        summary = RunSummary(rows=[SegmentSummary("x", 0, None, -1.0, 8)])
        _, sidecar = write_traces_csv([trace], summary, tmp_path / "o.csv")
        with open(sidecar) as fh:
            srows = list(csv.DictReader(fh))
        assert srows[0]["time_to_minus15db"] == ""

    def test_decimation_row_count(self, tmp_path):
        exp = ExperimentConfig(
            scenario=small_scenario(total=3000, switch=None),
            panel=small_panel(),
            trace_decimation=100,
        )
        traces, summary = run_experiment(exp)
        path, _ = write_traces_csv(traces, summary, tmp_path / "dec.csv")
        lines = path.read_text().splitlines()
        assert len(lines) == 1 + 2 * 30  # header + 30 rows per label

    def test_empty_traces_rejected(self, tmp_path):
        with pytest.raises(ValueError):
            write_traces_csv([], RunSummary(rows=[]), tmp_path / "x.csv")


class TestExperimentConfigValidation:
    def test_duplicate_labels_rejected(self):
        cfg = FilterConfig("apa", 32, 4)
        with pytest.raises(ConfigError):
            ExperimentConfig(scenario=small_scenario(), panel=[("a", cfg), ("a", cfg)])

    def test_length_mismatch_rejected(self):
        cfg = FilterConfig("apa", 64, 4)
        with pytest.raises(ConfigError) as excinfo:
            ExperimentConfig(scenario=small_scenario(), panel=[("a", cfg)])
        assert "filter_length" in str(excinfo.value)

    def test_empty_panel_rejected(self):
        with pytest.raises(ConfigError):
            ExperimentConfig(scenario=small_scenario(), panel=[])


class TestConfigParsing:
    def raw(self):
        return {
            "scenario": {
                "filter_length": 32,
                "total_samples": 400,
                "seed": 3,
                "snr_db": 30.0,
                "excitation": "ar1",
                "pole": 0.8,
                "schedule": [
                    {"switch_sample": 0, "clusters": [[9, 12]], "seed": 11},
                    {"switch_sample": 200, "clusters": [[9, 12], [25, 28]], "seed": 12},
                ],
            },
            "panel": [
                {
                    "label": "BS-PAPA(P=4)",
                    "variant": "bs-papa",
                    "group_size": 4,
                    "projection_order": 4,
                    "step_size": 0.2,
                    "regularization": 0.01,
                    "rho": 0.01,
                    "q": 0.01,
                }
            ],
            "trace_decimation": 4,
            "output_path": "out.csv",
        }

    def test_parses(self):
        exp = experiment_from_dict(self.raw())
        assert exp.scenario.total_samples == 400
        assert exp.panel[0][0] == "BS-PAPA(P=4)"
        assert exp.panel[0][1].group_size == 4
        assert exp.trace_decimation == 4
        assert exp.output_path == "out.csv"

    def test_missing_field_names_path(self):
        raw = self.raw()
        del raw["scenario"]["total_samples"]
        with pytest.raises(ConfigError) as excinfo:
            experiment_from_dict(raw)
        assert "scenario.total_samples" in str(excinfo.value)

    def test_bad_variant_names_panel_entry(self):
        raw = self.raw()
        raw["panel"][0]["variant"] = "rls"
        with pytest.raises(ConfigError) as excinfo:
            experiment_from_dict(raw)
        assert "panel[0]" in str(excinfo.value)

    def test_bad_cluster_names_schedule_entry(self):
        raw = self.raw()
        raw["scenario"]["schedule"][1]["clusters"] = [[0, 5]]
        with pytest.raises(ConfigError) as excinfo:
            experiment_from_dict(raw)
        assert "scenario.schedule[1].clusters" in str(excinfo.value)

    def test_with_seed_replaces_only_seed(self):
        exp = experiment_from_dict(self.raw())
        reseeded = with_seed(exp, 99)
        assert reseeded.scenario.seed == 99
        assert reseeded.scenario.total_samples == exp.scenario.total_samples
        assert reseeded.panel == exp.panel


class TestPresets:
    def test_fig2_panel(self):
        exp = preset_config("fig2")
        labels = [label for label, _ in exp.panel]
        assert labels == ["P=1", "P=4", "P=16", "P=32", "P=64", "P=1024"]
        for _, cfg in exp.panel:
            assert cfg.variant == "bs-papa"
            assert cfg.projection_order == 8
            assert cfg.step_size == 0.01
            assert cfg.regularization == 0.01
            assert cfg.guards.rho == 0.01 and cfg.guards.q == 0.01

    def test_fig3_panel(self):
        exp = preset_config("fig3")
        labels = [label for label, _ in exp.panel]
        assert labels == ["APA", "PAPA", "MPAPA", "BS-PAPA(P=32)", "BS-MPAPA(P=32)"]
        variants = [cfg.variant for _, cfg in exp.panel]
        assert variants == ["apa", "papa", "mpapa", "bs-papa", "bs-mpapa"]
        assert exp.panel[3][1].group_size == 32
        assert exp.panel[4][1].group_size == 32

    def test_scenario_parameters(self):
        sc = preset_config("fig3").scenario
        assert sc.filter_length == 1024
        assert sc.total_samples == 60000
        assert sc.excitation == "ar1" and sc.pole == 0.8
        assert sc.snr_db == 30.0
        assert [s for s, _ in sc.schedule] == [0, 30000]
        assert np.count_nonzero(sc.schedule[0][1].taps) == 32
        assert np.count_nonzero(sc.schedule[1][1].taps) == 64

    def test_unknown_preset(self):
        with pytest.raises(ConfigError):
            preset_config("fig9")


class TestCli:
    def write_config(self, tmp_path):
        raw = TestConfigParsing().raw()
        path = tmp_path / "exp.json"
        path.write_text(json.dumps(raw))
        return path

    def test_run_writes_deterministic_files(self, tmp_path, capsys):
        config = self.write_config(tmp_path)
        out_a = tmp_path / "a.csv"
        out_b = tmp_path / "b.csv"
        assert cli_main(["run", "--config", str(config), "--out", str(out_a)]) == 0
        assert cli_main(["run", "--config", str(config), "--out", str(out_b)]) == 0
        assert out_a.read_bytes() == out_b.read_bytes()
        assert (tmp_path / "a.csv.summary.csv").read_bytes() == (
            tmp_path / "b.csv.summary.csv"
        ).read_bytes()

    def test_run_seed_override_changes_output(self, tmp_path):
        config = self.write_config(tmp_path)
        out_a = tmp_path / "a.csv"
        out_b = tmp_path / "b.csv"
        assert cli_main(["run", "--config", str(config), "--out", str(out_a)]) == 0
        assert cli_main(["run", "--config", str(config), "--out", str(out_b), "--seed", "99"]) == 0
        assert out_a.read_bytes() != out_b.read_bytes()

    def test_run_rejects_bad_config(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({"scenario": {}}))
        assert cli_main(["run", "--config", str(bad)]) == 1
        assert "scenario" in capsys.readouterr().err

    def test_count_mults(self, capsys):
        assert cli_main(["count-mults", "--L", "1024", "--M", "8", "--P", "32"]) == 0
        out = capsys.readouterr().out
        assert "8192" in out and "1248" in out

    def test_count_mults_rejects_indivisible(self, capsys):
        assert cli_main(["count-mults", "--L", "10", "--M", "8", "--P", "3"]) == 1

    def test_equiv_suite(self, capsys):
        assert cli_main(["equiv-suite"]) == 0
        out = capsys.readouterr().out
        assert out.count("ok") == 4

    def test_preset_small_run(self, tmp_path):
        out = tmp_path / "mini.csv"
        assert (
            cli_main(
                [
                    "preset",
                    "fig3",
                    "--out",
                    str(out),
                    "--total-samples",
                    "400",
                    "--decimation",
                    "50",
                ]
            )
            == 0
        )
        lines = out.read_text().splitlines()
        assert lines[0] == "sample,label,misalignment_db"
        assert len(lines) == 1 + 5 * 8  # 5 labels, 400/50 rows each
