"""Session fixtures for the long benchmark runs shared by acceptance tests."""

import time
from pathlib import Path

import pytest

from bspapa import preset_config, run_experiment
from bspapa.cli import main as cli_main


@pytest.fixture(scope="session")
def fig2_results():
    """Full group-size sweep; returns (traces, summary, elapsed_seconds)."""
    start = time.perf_counter()
    traces, summary = run_experiment(preset_config("fig2"))
    return traces, summary, time.perf_counter() - start


@pytest.fixture(scope="session")
def fig3_artifacts(tmp_path_factory):
    """One CLI invocation of the algorithm-comparison preset.

    Returns (trace_csv, summary_csv, elapsed_seconds); a second invocation
    for the determinism check happens inside the test that needs it.
    """
    out = tmp_path_factory.mktemp("fig3") / "fig3.csv"
    start = time.perf_counter()
    rc = cli_main(["preset", "fig3", "--out", str(out)])
    elapsed = time.perf_counter() - start
    assert rc == 0, "preset fig3 failed"
    return out, Path(str(out) + ".summary.csv"), elapsed
