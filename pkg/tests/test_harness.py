"""Experiment orchestration: config resolution, run directories, CLI contract."""

from __future__ import annotations

import csv
import warnings
from pathlib import Path

import numpy as np
import pytest

from proxgossip.cli import main
from proxgossip.errors import ConfigError
from proxgossip.harness import (EXPERIMENTS, TOPOLOGIES, default_config,
                                merge_config, parse_config_file,
                                run_experiment, validate_network)
from proxgossip.models import DataSet
from proxgossip.samplers import max_stepsize, pick_agents
from proxgossip.harness import _split_train_test


def tiny_sample1d(out, **overrides):
    base = dict(topologies=("complete",), n_agents=6, iterations=40,
                n_chains=10, record_every=5, threads=1)
    base.update(overrides)
    return default_config("sample1d", out_dir=str(out), **base)


def read_trace(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


# ---------------------------------------------------------------------------
# configuration resolution
# ---------------------------------------------------------------------------

def test_default_config_per_experiment():
    s = default_config("sample1d")
    assert (s.n_agents, s.eta, s.gamma) == (30, 5e-4, 3.3e-4)
    assert (s.iterations, s.n_chains, s.batch) == (300, 100, 1)
    assert s.set_kind == "box" and s.bounds == (-1.0, 1.0)

    b = default_config("blr2d")
    assert (b.n_agents, b.eta, b.gamma) == (20, 5e-4, 5e-5)
    assert (b.iterations, b.n_chains, b.batch) == (500, 300, 100)
    assert b.set_kind == "l2" and b.n_samples == 10000

    l = default_config("logreg")
    assert (l.n_agents, l.eta, l.gamma) == (5, 0.005, 0.16)
    assert (l.iterations, l.n_chains, l.batch) == (1000, 1000, 10)

    for cfg in (s, b, l):
        assert cfg.topologies == TOPOLOGIES
        assert cfg.samplers == ("depsgld", "psgld")
        assert cfg.init == "zero" and cfg.threads == 1 and cfg.seed == 0


def test_default_burnin_is_half_the_iterations():
    assert default_config("sample1d").burnin == 150
    assert default_config("sample1d", iterations=41).burnin == 20
    assert default_config("sample1d", burnin=7).burnin == 7


def test_unknown_override_rejected():
    with pytest.raises(ConfigError, match="unknown configuration keys"):
        default_config("sample1d", stepsize=0.1)
    with pytest.raises(ConfigError, match="experiment"):
        default_config("pca")


def test_config_field_validation():
    cases = [
        dict(topologies=("torus",)),
        dict(topologies=()),
        dict(samplers=("metropolis",)),
        dict(init="warm"),
        dict(set_kind="simplex"),
        dict(burnin=301),
        dict(test_frac=1.0),
        dict(threads=0),
        dict(bounds=(1.0, -1.0)),
        dict(radius=-2.0),
    ]
    for bad in cases:
        with pytest.raises(ConfigError):
            default_config("sample1d", **bad)


def test_parse_config_file_roundtrip(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text(
        "# experiment tweaks\n"
        "\n"
        "eta = 0.001\n"
        "topology=ring\n"
        "bounds=-2,2\n"
        "standardize=false\n"
        "agents=8\n")
    got = parse_config_file(path)
    assert got == {"eta": 0.001, "topologies": ("ring",),
                   "bounds": (-2.0, 2.0), "standardize": False,
                   "n_agents": 8}


def test_parse_config_file_errors(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("eta=0.001\nstep=0.5\n")
    with pytest.raises(ConfigError, match=r"2: unknown key 'step'.*valid keys"):
        parse_config_file(path)
    path.write_text("just words\n")
    with pytest.raises(ConfigError, match="expected key=value"):
        parse_config_file(path)
    path.write_text("agents=many\n")
    with pytest.raises(ConfigError, match="bad value for agents"):
        parse_config_file(path)
    with pytest.raises(ConfigError, match="cannot read config file"):
        parse_config_file(tmp_path / "absent.cfg")


def test_merge_precedence_cli_over_file_over_defaults():
    file_overrides = {"eta": 1e-3, "n_agents": 12}
    cli = {"eta": 2e-3, "n_agents": None, "seed": 5}
    cfg = merge_config("sample1d", file_overrides, cli)
    assert cfg.eta == 2e-3          # CLI wins
    assert cfg.n_agents == 12       # None CLI flag defers to the file
    assert cfg.seed == 5
    assert cfg.gamma == 3.3e-4      # untouched default


# ---------------------------------------------------------------------------
# network validation reports
# ---------------------------------------------------------------------------

def parsed(lines, key):
    (value,) = [line.split("=", 1)[1] for line in lines
                if line.startswith(key + "=")]
    return float(value)


def test_validate_network_complete_reports_zero_rho():
    lines = validate_network("complete", 30, delta=1.0 / 30)
    assert parsed(lines, "rho") <= 1e-12
    assert any(line.startswith("symmetry") and "pass" in line
               for line in lines)


def test_validate_network_ring6_default_delta():
    # C6 Laplacian spectrum {0,1,1,3,3,4} -> delta=1/4 -> rho = 0.75
    lines = validate_network("ring", 6)
    assert "rho=0.75" in lines
    assert abs(parsed(lines, "lambda_min")) <= 1e-12


def test_validate_network_disconnected_warns():
    lines = validate_network("disconnected", 4)
    assert any("non-contracting" in line for line in lines)
    assert "rho=1.0" in lines


def test_validate_network_appends_stepsize_bound():
    lines = validate_network("complete", 4, mu=1.0, l_smooth=2.0, gamma=0.1)
    expected = max_stepsize(1.0, 2.0, 4, 0.1, 0.0)
    assert f"eta_max={expected!r}" in lines
    assert not any(line.startswith("eta_max")
                   for line in validate_network("complete", 4, mu=1.0))


# ---------------------------------------------------------------------------
# train/test splitting
# ---------------------------------------------------------------------------

def test_split_zero_fraction_returns_data_unchanged():
    data = DataSet(features=np.arange(20.0)[:, None], labels=np.zeros(20))
    train, test = _split_train_test(data, 0.0, seed=0)
    assert train is data and test is data


def test_split_is_disjoint_exhaustive_and_deterministic():
    data = DataSet(features=np.arange(20.0)[:, None], labels=np.zeros(20))
    train, test = _split_train_test(data, 0.25, seed=3)
    assert (train.n, test.n) == (15, 5)
    both = np.concatenate([train.features, test.features]).ravel()
    assert sorted(both.tolist()) == list(map(float, range(20)))
    train2, test2 = _split_train_test(data, 0.25, seed=3)
    assert np.array_equal(train.features, train2.features)
    other, _ = _split_train_test(data, 0.25, seed=4)
    assert not np.array_equal(train.features, other.features)


def test_split_rejects_empty_parts():
    data = DataSet(features=np.arange(20.0)[:, None], labels=np.zeros(20))
    with pytest.raises(ConfigError, match="empty split"):
        _split_train_test(data, 0.001, seed=0)


# ---------------------------------------------------------------------------
# tiny end-to-end runs per experiment
# ---------------------------------------------------------------------------

def test_sample1d_run_directory_contents(tmp_path):
    cfg = tiny_sample1d(tmp_path / "a", topologies=("complete", "disconnected"))
    summary = run_experiment(cfg)
    assert set(summary["dirs"]) == {"complete", "disconnected"}
    for kind, run_dir in summary["dirs"].items():
        run_dir = Path(run_dir)
        for name in ("config.txt", "manifest.txt", "trace.csv", "samples.csv",
                     "samples_central.csv", "diagnostics.txt"):
            assert (run_dir / name).exists(), (kind, name)
        config = (run_dir / "config.txt").read_text()
        assert "experiment=sample1d" in config
        assert "eta=0.0005" in config
        manifest = (run_dir / "manifest.txt").read_text()
        assert manifest.startswith("seed=0 wall_time_s=")
        assert "numpy=" in manifest and "proxgossip=" in manifest
        diag = (run_dir / "diagnostics.txt").read_text()
        assert "sup_grad_sq=" in diag and "consensus k=" in diag

    rows = read_trace(Path(summary["dirs"]["complete"]) / "trace.csv")
    grid = [5, 10, 15, 20, 25, 30, 35, 40]
    shown = pick_agents(0, 6)
    for agent in [str(i) for i in shown] + ["mean"]:
        iters = [int(r["iter"]) for r in rows
                 if r["agent"] == agent and r["metric"] == "w2"]
        assert iters == grid, agent
    psgld = [int(r["iter"]) for r in rows if r["metric"] == "w2_psgld"]
    assert psgld == grid
    # the centralized comparator's samples are tagged by sampler kind
    central = (Path(summary["dirs"]["complete"]) / "samples_central.csv")
    tags = {line.split(",")[2] for line in
            central.read_text().splitlines()[1:]}
    assert tags == {"psgld"}


def test_sample1d_rerun_is_byte_identical(tmp_path):
    a = run_experiment(tiny_sample1d(tmp_path / "a"))
    b = run_experiment(tiny_sample1d(tmp_path / "b"))
    for name in ("trace.csv", "samples.csv", "samples_central.csv"):
        assert ((Path(a["dirs"]["complete"]) / name).read_bytes()
                == (Path(b["dirs"]["complete"]) / name).read_bytes()), name


def test_blr_run_directory_contents(tmp_path):
    cfg = default_config("blr2d", out_dir=str(tmp_path / "blr"),
                         topologies=("complete",), n_samples=400, n_agents=4,
                         iterations=40, n_chains=20, batch=50,
                         record_every=10, threads=1)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")  # tiny run trips the stepsize guard
        summary = run_experiment(cfg)
    run_dir = Path(summary["dirs"]["complete"])
    assert (run_dir / "posterior.txt").exists()
    posterior = (run_dir / "posterior.txt").read_text()
    assert "beta_ols=" in posterior and "[psgld]" in posterior
    assert "[complete/mean]" in posterior and "[complete/agents]" in posterior
    rows = read_trace(run_dir / "trace.csv")
    metrics = {r["metric"] for r in rows}
    assert metrics == {"consensus", "mean_norm", "feas_frac"}
    assert np.isfinite(np.linalg.norm(summary["beta_ols"]))
    assert summary["radius"] == pytest.approx(
        0.8 * np.linalg.norm(summary["beta_ols"]))
    # samples.csv carries 2-D vectors
    header = (run_dir / "samples.csv").read_text().splitlines()[0]
    assert header == "replica,iter,agent,dim0,dim1"


def test_logreg_run_directory_contents(tmp_path):
    cfg = default_config("logreg", out_dir=str(tmp_path / "lr"),
                         topologies=("complete",), iterations=30, n_chains=20,
                         record_every=5, threads=1)
    summary = run_experiment(cfg)
    run_dir = Path(summary["dirs"]["complete"])
    mle = (run_dir / "mle.txt").read_text()
    assert "accuracy_mle=" in mle and "radius=" in mle
    assert "positives (malignant) = 212" in mle
    assert summary["acc_mle"] == pytest.approx(0.9965, abs=0.002)
    rows = read_trace(run_dir / "trace.csv")
    grid = [5, 10, 15, 20, 25, 30]
    for agent in [str(i) for i in range(5)] + ["mean"]:
        iters = [int(r["iter"]) for r in rows
                 if r["agent"] == agent and r["metric"] == "accuracy"]
        assert iters == grid, agent
    psgld = [int(r["iter"]) for r in rows if r["metric"] == "accuracy_psgld"]
    assert psgld == grid
    accs = [float(r["value"]) for r in rows if r["metric"] == "accuracy"]
    assert all(0.0 <= a <= 1.0 for a in accs)


# ---------------------------------------------------------------------------
# command-line interface
# ---------------------------------------------------------------------------

def test_cli_tiny_run_succeeds(tmp_path, capsys):
    code = main(["sample-1d", "--out", str(tmp_path / "cli"), "--topology",
                 "complete", "--iters", "20", "--chains", "5", "--agents",
                 "4", "--record-every", "5"])
    assert code == 0
    out = capsys.readouterr().out
    assert out.startswith("complete: ")
    assert (tmp_path / "cli" / "complete" / "trace.csv").exists()


def test_cli_config_file_merges_under_flags(tmp_path):
    cfg_file = tmp_path / "run.cfg"
    cfg_file.write_text("iters=20\nchains=5\nagents=4\ntopology=complete\n"
                        "record-every=5\nseed=9\n")
    code = main(["sample-1d", "--config", str(cfg_file), "--out",
                 str(tmp_path / "out"), "--seed", "3"])
    assert code == 0
    config = (tmp_path / "out" / "complete" / "config.txt").read_text()
    assert "seed=3" in config          # CLI beats the file
    assert "iterations=20" in config   # file beats the defaults
    assert "n_agents=4" in config


def test_cli_invalid_configuration_exits_2(tmp_path, capsys):
    # a ring needs at least three agents
    assert main(["sample-1d", "--topology", "ring", "--agents", "2",
                 "--iters", "5", "--chains", "2",
                 "--out", str(tmp_path / "x")]) == 2
    assert "error:" in capsys.readouterr().err
    # unknown key in the config file
    bad = tmp_path / "bad.cfg"
    bad.write_text("stepsize=1\n")
    assert main(["sample-1d", "--config", str(bad),
                 "--out", str(tmp_path / "y")]) == 2
    # malformed bounds flag
    assert main(["sample-1d", "--bounds", "1", "--iters", "5", "--chains",
                 "2", "--agents", "4", "--out", str(tmp_path / "z")]) == 2


def test_cli_missing_dataset_exits_3(tmp_path, capsys):
    code = main(["logreg", "--data", str(tmp_path / "absent.csv"),
                 "--iters", "5", "--chains", "2", "--topology", "complete",
                 "--out", str(tmp_path / "x")])
    assert code == 3
    assert "569 rows x 30 features" in capsys.readouterr().err


def test_cli_numeric_failure_exits_4(tmp_path, capsys):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)  # quartic overflow
        code = main(["sample-1d", "--bounds=-1e200,1e200", "--iters", "5",
                     "--chains", "2", "--agents", "4", "--topology",
                     "complete", "--out", str(tmp_path / "x")])
    assert code == 4
    assert "numeric failure" in capsys.readouterr().err


def test_cli_validate_network_prints_report(capsys):
    assert main(["validate-network", "--topology", "ring", "--agents",
                 "6"]) == 0
    out = capsys.readouterr().out
    assert "rho=0.75" in out
    assert "double stochasticity" in out


def test_experiments_registry_is_complete():
    assert set(EXPERIMENTS) == {"sample1d", "blr2d", "logreg"}
