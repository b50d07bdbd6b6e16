"""tests for cli module."""

from __future__ import annotations

import json
import subprocess
from pathlib import Path

import pytest

from sirx.cli import async_main

SMALL_CONFIG = """\
network:
  dataset: karate
params:
  beta0: 0.2
  gamma0: 0.1
  w_total: 2.0
  horizon: 4.0
  steps: 40
initial:
  i0: 0.1
strategies: [optimal, un, dc+, unc]
fbs:
  max_iterations: 50
"""


@pytest.fixture
def config_file(tmp_path: Path) -> Path:
    path = tmp_path / "small.yaml"
    path.write_text(SMALL_CONFIG)
    return path


def test_version_flag_long() -> None:
    """test --version flag displays version."""
    result = subprocess.run(
        ["sirx", "--version"],
        capture_output=True,
        text=True,
        check=False,
    )
    assert result.returncode == 0
    assert result.stdout.strip().startswith("sirx ")


def test_version_flag_short() -> None:
    """test -v flag displays version."""
    result = subprocess.run(
        ["sirx", "-v"],
        capture_output=True,
        text=True,
        check=False,
    )
    assert result.returncode == 0
    assert result.stdout.strip().startswith("sirx ")


async def test_no_command_prints_help(capsys: pytest.CaptureFixture[str]) -> None:
    """test a bare invocation shows usage and exits 1."""
    assert await async_main([]) == 1
    assert "usage: sirx" in capsys.readouterr().out


class TestStats:
    async def test_csv(self, capsys: pytest.CaptureFixture[str]) -> None:
        """test stats for the shipped karate network."""
        assert await async_main(["stats", "karate", "-o", "csv"]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[0].startswith("n,m,mean_degree")
        assert lines[1].startswith("34,78,")

    async def test_generator_source(self, capsys: pytest.CaptureFixture[str]) -> None:
        """test a generator kind with key=value parameters."""
        assert await async_main(["stats", "er", "n=30", "m=40", "seed=2", "-o", "json"]) == 0
        record = json.loads(capsys.readouterr().out)[0]
        assert (record["n"], record["m"]) == (30, 40)

    async def test_missing_file(self, tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
        """test a missing edge list exits with the input error code."""
        assert await async_main(["stats", str(tmp_path / "missing.edges")]) == 2
        assert "error:" in capsys.readouterr().err

    async def test_bad_generator_args(self) -> None:
        """test a generator missing its parameters exits 2."""
        assert await async_main(["stats", "ba", "n=10"]) == 2


class TestCentrality:
    async def test_selected_metrics(self, capsys: pytest.CaptureFixture[str]) -> None:
        """test repeated -m picks the columns."""
        assert await async_main(["centrality", "karate", "-m", "dc", "-m", "cc", "-o", "csv"]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[0] == "node,label,dc,cc"
        assert len(lines) == 35

    async def test_unknown_metric(self) -> None:
        """test an unknown metric is an input error."""
        assert await async_main(["centrality", "karate", "-m", "pagerank"]) == 2


class TestCompare:
    async def test_writes_results(self, config_file: Path, tmp_path: Path) -> None:
        """test compare writes curves, trajectories, metrics and the manifest."""
        out = tmp_path / "out"
        assert await async_main(["compare", "-c", str(config_file), "--out", str(out)]) == 0

        names = {p.name for p in out.iterdir()}
        assert {
            "curves.csv",
            "metrics.csv",
            "trajectory_optimal.csv",
            "trajectory_dc_plus.csv",
            "control_optimal.csv",
            "adjoint_optimal.csv",
            "fbs_report.csv",
            "manifest.json",
        } <= names
        header = (out / "curves.csv").read_text().splitlines()[0]
        assert header == "t,optimal,un,dc+,unc"
        manifest = json.loads((out / "manifest.json").read_text())
        assert len(manifest["config_sha256"]) == 64
        assert "curves.csv" in manifest["files"]

    async def test_deterministic(self, config_file: Path, tmp_path: Path) -> None:
        """test two runs of the same config write identical bytes."""
        first, second = tmp_path / "a", tmp_path / "b"
        for out in (first, second):
            assert await async_main(["compare", "-c", str(config_file), "--out", str(out)]) == 0
        for path in sorted(first.iterdir()):
            assert path.read_bytes() == (second / path.name).read_bytes(), path.name

    async def test_single_strategy_warns(
        self, config_file: Path, tmp_path: Path, capsys: pytest.CaptureFixture[str]
    ) -> None:
        """test one strategy still succeeds and warns that efficiency is skipped."""
        code = await async_main(
            ["compare", "-c", str(config_file), "--strategy", "un", "--out", str(tmp_path / "one")]
        )
        assert code == 0
        assert "fewer than 2" in capsys.readouterr().err

    async def test_set_override(self, config_file: Path, tmp_path: Path) -> None:
        """test --set reaches the run and changes the config hash."""
        base, changed = tmp_path / "base", tmp_path / "changed"
        args = ["compare", "-c", str(config_file), "--strategy", "un", "--strategy", "unc"]
        assert await async_main([*args, "--out", str(base)]) == 0
        assert await async_main([*args, "--out", str(changed), "--set", "params.w_total=5"]) == 0
        hashes = [json.loads((d / "manifest.json").read_text())["config_sha256"] for d in (base, changed)]
        assert hashes[0] != hashes[1]

    async def test_missing_config(self, tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
        """test a missing config file exits 2."""
        assert await async_main(["compare", "-c", str(tmp_path / "nope.yaml")]) == 2
        assert "config file not found" in capsys.readouterr().err

    async def test_unknown_strategy(self, config_file: Path) -> None:
        """test an unknown --strategy exits 2."""
        assert await async_main(["compare", "-c", str(config_file), "--strategy", "xx"]) == 2


class TestOtherRunCommands:
    async def test_simulate_defaults_to_uncontrolled(self, tmp_path: Path) -> None:
        """test simulate without strategies runs only unc and skips metrics."""
        config = tmp_path / "plain.yaml"
        config.write_text("network:\n  dataset: karate\nparams:\n  beta0: 0.2\n  steps: 100\n")
        out = tmp_path / "sim"
        assert await async_main(["simulate", "-c", str(config), "--out", str(out)]) == 0
        assert (out / "curves.csv").read_text().splitlines()[0] == "t,unc"
        assert not (out / "metrics.csv").exists()

    async def test_optimize(self, config_file: Path, tmp_path: Path) -> None:
        """test optimize writes the sweep outputs."""
        out = tmp_path / "opt"
        assert await async_main(["optimize", "-c", str(config_file), "--out", str(out)]) == 0
        for name in ("trajectory_optimal.csv", "control_optimal.csv", "fbs_report.csv", "manifest.json"):
            assert (out / name).is_file()
        control_header = (out / "control_optimal.csv").read_text().splitlines()[0]
        assert control_header.split(",")[:2] == ["t", "w_0"]

    async def test_correlate(self, config_file: Path, tmp_path: Path) -> None:
        """test correlate writes the correlation and degree-class series."""
        out = tmp_path / "corr"
        code = await async_main(
            ["correlate", "-c", str(config_file), "--out", str(out), "--set", "analysis.metrics=[\"dc\",\"bc\"]"]
        )
        assert code == 0
        header = (out / "correlation.csv").read_text().splitlines()[0]
        assert header == "t,r_dc,defined_dc,r_bc,defined_bc"
        assert (out / "degree_classes.csv").is_file()
