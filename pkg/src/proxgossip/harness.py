"""Experiment orchestration: configuration, run directories, CSV emission.

Each experiment writes one run directory per topology containing:

    config.txt       the fully resolved configuration, one key=value per line
    manifest.txt     one line: seed, wall time, component versions
    trace.csv        metric rows ``replica,iter,agent,metric,value``
    samples.csv      sample vectors ``replica,iter,agent,dim0,...``

plus experiment-specific reports (``diagnostics.txt``, ``posterior.txt``,
``mle.txt``).  Centralized comparator series share the trace with metric
names suffixed by the sampler kind (for example ``w2_psgld``); their sample
vectors go to ``samples_central.csv`` with the sampler kind in the agent
column.

Runs parallelize across a thread pool, but every chain's trajectory is a
pure function of the seed, and rows are assembled in a fixed order after
all workers finish — so trace bytes never depend on ``--threads``.
"""

from __future__ import annotations

import platform
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from .constraints import ConvexSet, interval_box, l1_ball, l2_ball
from .errors import ConfigError
from .metrics import (RunTrace, classification_accuracy, consensus_distance,
                      feasibility_stats, posterior_summary,
                      predictive_accuracy, true_quantile_1d, wasserstein2_1d,
                      write_samples_csv)
from .models import (DataSet, fit_logreg_mle, fit_ols, generate_blr_data,
                     linreg_potential, load_wdbc, logreg_potential, quartic_1d)
from .samplers import (CENTRALIZED_SAMPLERS, SamplerConfig, consensus_bound,
                       pick_agents, run_centralized, run_depsgld)
from .topology import build_graph, mixing_matrix, validate_mixing

__all__ = [
    "ExperimentConfig",
    "EXPERIMENTS",
    "TOPOLOGIES",
    "SAMPLER_CHOICES",
    "default_config",
    "parse_config_file",
    "merge_config",
    "run_sample1d",
    "run_blr2d",
    "run_logreg",
    "validate_network",
    "run_experiment",
]

EXPERIMENTS = ("sample1d", "blr2d", "logreg")
TOPOLOGIES = ("complete", "ring", "star", "disconnected")
SAMPLER_CHOICES = ("depsgld",) + CENTRALIZED_SAMPLERS
SET_KINDS = ("box", "l2", "l1")
INIT_KINDS = ("zero", "uniform-in-K")

_SALT_SPLIT = 8
_BLR_NOISE_VAR = 0.25  # generation and likelihood share this variance
_FEAS_SCALE = 5.0      # feasibility threshold: 5 * sqrt(gamma)


@dataclass(frozen=True)
class ExperimentConfig:
    """Fully resolved settings for one experiment invocation."""

    experiment: str
    out_dir: str
    topologies: tuple[str, ...]
    n_agents: int
    delta: float | None
    eta: float
    gamma: float
    iterations: int
    n_chains: int
    batch: int
    record_every: int
    seed: int
    samplers: tuple[str, ...]
    init: str
    burnin: int
    set_kind: str
    radius: float | None
    bounds: tuple[float, float]
    n_samples: int
    data_path: str | None
    standardize: bool
    test_frac: float
    predictive: bool
    threads: int

    def __post_init__(self) -> None:
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(
                f"experiment must be one of {EXPERIMENTS}, got {self.experiment!r}")
        bad = [t for t in self.topologies if t not in TOPOLOGIES]
        if bad or not self.topologies:
            raise ConfigError(
                f"topologies must be drawn from {TOPOLOGIES}, got {self.topologies}")
        bad = [s for s in self.samplers if s not in SAMPLER_CHOICES]
        if bad or not self.samplers:
            raise ConfigError(
                f"samplers must be drawn from {SAMPLER_CHOICES}, got {self.samplers}")
        if self.init not in INIT_KINDS:
            raise ConfigError(f"init must be one of {INIT_KINDS}, got {self.init!r}")
        if self.set_kind not in SET_KINDS:
            raise ConfigError(
                f"set kind must be one of {SET_KINDS}, got {self.set_kind!r}")
        if not 0 <= self.burnin <= self.iterations:
            raise ConfigError(
                f"burnin must lie in [0, {self.iterations}], got {self.burnin}")
        if not 0.0 <= self.test_frac < 1.0:
            raise ConfigError(
                f"test-frac must lie in [0, 1), got {self.test_frac}")
        if self.threads < 1:
            raise ConfigError(f"threads must be positive, got {self.threads}")
        if not self.bounds[1] > self.bounds[0]:
            raise ConfigError(
                f"bounds must satisfy lower < upper, got {self.bounds}")
        if self.radius is not None and not self.radius > 0:
            raise ConfigError(f"radius must be positive, got {self.radius}")

    def sampler_config(self) -> SamplerConfig:
        return SamplerConfig(eta=self.eta, gamma=self.gamma,
                             iterations=self.iterations, batch=self.batch,
                             n_chains=self.n_chains, seed=self.seed,
                             record_every=self.record_every)


_DEFAULTS = {
    "sample1d": dict(n_agents=30, eta=5e-4, gamma=3.3e-4, iterations=300,
                     n_chains=100, batch=1, record_every=1, set_kind="box"),
    "blr2d": dict(n_agents=20, eta=5e-4, gamma=5e-5, iterations=500,
                  n_chains=300, batch=100, record_every=10, set_kind="l2"),
    "logreg": dict(n_agents=5, eta=0.005, gamma=0.16, iterations=1000,
                   n_chains=1000, batch=10, record_every=1, set_kind="l2"),
}


def default_config(experiment: str, out_dir: str | None = None,
                   **overrides) -> ExperimentConfig:
    """The experiment's stock configuration, with keyword overrides.

    ``burnin`` defaults to half the (possibly overridden) iteration count.
    """
    if experiment not in _DEFAULTS:
        raise ConfigError(
            f"experiment must be one of {EXPERIMENTS}, got {experiment!r}")
    base = dict(
        experiment=experiment,
        out_dir=out_dir if out_dir is not None else f"runs/{experiment}",
        topologies=TOPOLOGIES,
        delta=None,
        seed=0,
        samplers=("depsgld", "psgld"),
        init="zero",
        burnin=None,
        radius=None,
        bounds=(-1.0, 1.0),
        n_samples=10000,
        data_path=None,
        standardize=True,
        test_frac=0.0,
        predictive=False,
        threads=1,
    )
    base.update(_DEFAULTS[experiment])
    unknown = set(overrides) - {f.name for f in fields(ExperimentConfig)}
    if unknown:
        raise ConfigError(f"unknown configuration keys: {sorted(unknown)}")
    base.update(overrides)
    if base["burnin"] is None:
        base["burnin"] = base["iterations"] // 2
    return ExperimentConfig(**base)


# --------------------------------------------------------------------------
# Configuration file handling
# --------------------------------------------------------------------------

def _parse_bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("true", "1", "yes", "on"):
        return True
    if low in ("false", "0", "no", "off"):
        return False
    raise ConfigError(f"expected a boolean, got {text!r}")


def _parse_bounds(text: str) -> tuple[float, float]:
    parts = [p for p in text.replace(",", " ").split() if p]
    if len(parts) != 2:
        raise ConfigError(f"bounds need two numbers 'lo,hi', got {text!r}")
    return (float(parts[0]), float(parts[1]))


def _parse_topology(text: str) -> tuple[str, ...]:
    if text == "all":
        return TOPOLOGIES
    return (text,)


def _parse_sampler(text: str) -> tuple[str, ...]:
    if text == "all":
        return ("depsgld",) + CENTRALIZED_SAMPLERS
    if text == "depsgld":
        return ("depsgld", "psgld")  # the stock comparator pairing
    return (text,)


# key -> (config field, converter)
_CONFIG_KEYS = {
    "out": ("out_dir", str),
    "topology": ("topologies", _parse_topology),
    "agents": ("n_agents", int),
    "delta": ("delta", float),
    "eta": ("eta", float),
    "gamma": ("gamma", float),
    "iters": ("iterations", int),
    "chains": ("n_chains", int),
    "batch": ("batch", int),
    "record-every": ("record_every", int),
    "seed": ("seed", int),
    "sampler": ("samplers", _parse_sampler),
    "init": ("init", str),
    "burnin": ("burnin", int),
    "set": ("set_kind", str),
    "radius": ("radius", float),
    "bounds": ("bounds", _parse_bounds),
    "n-samples": ("n_samples", int),
    "data": ("data_path", str),
    "standardize": ("standardize", _parse_bool),
    "test-frac": ("test_frac", float),
    "predictive": ("predictive", _parse_bool),
    "threads": ("threads", int),
}


def parse_config_file(path) -> dict:
    """Read a plain ``key=value`` file (``#`` comments, blank lines allowed).

    Keys are the CLI flag names without leading dashes.  Returns a dict of
    config-field overrides.

    Raises:
        ConfigError: unknown key, malformed line, or unparseable value.
    """
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    overrides = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        if key not in _CONFIG_KEYS:
            raise ConfigError(
                f"{path}:{lineno}: unknown key {key!r}; valid keys: "
                f"{', '.join(sorted(_CONFIG_KEYS))}")
        field_name, convert = _CONFIG_KEYS[key]
        try:
            overrides[field_name] = convert(value.strip())
        except (ValueError, ConfigError) as exc:
            raise ConfigError(f"{path}:{lineno}: bad value for {key}: {exc}") from exc
    return overrides


def merge_config(experiment: str, file_overrides: dict,
                 cli_overrides: dict) -> ExperimentConfig:
    """Resolve a config: experiment defaults, then file, then CLI flags."""
    merged = dict(file_overrides)
    merged.update({k: v for k, v in cli_overrides.items() if v is not None})
    return default_config(experiment, **merged)


# --------------------------------------------------------------------------
# Run-directory plumbing
# --------------------------------------------------------------------------

def _config_lines(cfg: ExperimentConfig) -> list[str]:
    lines = []
    for f in sorted(fields(ExperimentConfig), key=lambda f: f.name):
        v = getattr(cfg, f.name)
        if isinstance(v, tuple):
            v = ",".join(str(x) for x in v)
        lines.append(f"{f.name}={v}")
    return lines


def _versions() -> str:
    try:
        from importlib.metadata import version
        own = version("proxgossip")
    except Exception:
        own = "unknown"
    return (f"python={platform.python_version()} numpy={np.__version__} "
            f"proxgossip={own}")


def _write_lines(path: Path, lines) -> None:
    path.write_text("".join(line + "\n" for line in lines), encoding="utf-8")


def _write_run_dir(run_dir: Path, cfg: ExperimentConfig, trace: RunTrace,
                   sample_rows, dim: int, wall_s: float,
                   central_rows=None, extra: dict[str, list[str]] | None = None) -> None:
    run_dir.mkdir(parents=True, exist_ok=True)
    _write_lines(run_dir / "config.txt", _config_lines(cfg))
    _write_lines(run_dir / "manifest.txt",
                 [f"seed={cfg.seed} wall_time_s={wall_s:.3f} {_versions()}"])
    trace.write_csv(run_dir / "trace.csv")
    write_samples_csv(run_dir / "samples.csv", sample_rows, dim)
    if central_rows is not None:
        write_samples_csv(run_dir / "samples_central.csv", central_rows, dim)
    for name, lines in (extra or {}).items():
        _write_lines(run_dir / name, lines)


def _run_jobs(jobs, threads: int):
    """Evaluate callables, possibly in a pool; results keep submission order."""
    if threads <= 1 or len(jobs) <= 1:
        return [job() for job in jobs]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures = [pool.submit(job) for job in jobs]
        return [f.result() for f in futures]


def _fmt(value: float) -> str:
    return repr(float(value))


# --------------------------------------------------------------------------
# sample-1d: quartic target on an interval
# --------------------------------------------------------------------------

def run_sample1d(cfg: ExperimentConfig) -> dict:
    """Quartic-target study: Wasserstein decay per agent/mean/comparator.

    Per topology, runs the decentralized sampler over ``n_chains`` replicas
    and records, at every recorded iteration, the 1-D 2-Wasserstein
    distance of the cross-replica bank against the true constrained target
    (for three representative agents and the mean chain) plus the consensus
    distance and its diagnostic envelope inputs.
    """
    t_start = time.perf_counter()
    if cfg.experiment != "sample1d":
        raise ConfigError(f"expected experiment=sample1d, got {cfg.experiment}")
    lower, upper = cfg.bounds
    potential = quartic_1d(cfg.n_agents)
    cset = _make_constraint(cfg, dim=1)
    quant = true_quantile_1d(potential, lower, upper)
    shown = pick_agents(cfg.seed, cfg.n_agents)
    scfg = cfg.sampler_config()

    central_kinds = [s for s in cfg.samplers if s != "depsgld"]
    run_network = "depsgld" in cfg.samplers

    def central_job(kind):
        series, final = [], {}
        def observer(state):
            series.append((state.iteration,
                           wasserstein2_1d(state.agents[:, 0, 0], quant)))
        res = run_centralized(kind, quartic_1d(1), cset, scfg,
                              init=cfg.init, observer=observer,
                              n_agents=cfg.n_agents)
        final["bank"] = res.state.agents[:, 0, :]
        return kind, series, final

    def topology_job(kind):
        mixing = mixing_matrix(build_graph(kind, cfg.n_agents), cfg.delta)
        w2_rows, extras = [], {"consensus": [], "w2_mean": []}
        def observer(state):
            k = state.iteration
            for i in shown:
                w2_rows.append(("pooled", k, i, "w2",
                                wasserstein2_1d(state.agents[:, i, 0], quant)))
            w2m = wasserstein2_1d(state.mean[:, 0], quant)
            extras["w2_mean"].append((k, w2m))
            w2_rows.append(("pooled", k, "mean", "w2", w2m))
        res = run_depsgld(mixing, potential, cset, scfg, init=cfg.init,
                          observer=observer, diagnostics=True)
        diag = res.diagnostics
        for k, v in diag.consensus:
            w2_rows.append(("pooled", k, "mean", "consensus", v))
            extras["consensus"].append((k, v))
        bound_checks = []
        for k, v in diag.consensus:
            b = consensus_bound(mixing.rho, cfg.eta, 1, cfg.n_agents, k,
                                diag.sup_grad_sq, diag.sigma_hat_sq)
            bound_checks.append((k, v, b))
        diag_lines = [
            f"rho={_fmt(mixing.rho)}",
            f"eta={_fmt(cfg.eta)}",
            f"dim=1",
            f"n_agents={cfg.n_agents}",
            f"sup_grad_sq={_fmt(diag.sup_grad_sq)}",
            f"sigma_hat_sq={_fmt(diag.sigma_hat_sq)}",
        ] + [f"consensus k={k} measured={_fmt(v)} bound={_fmt(b)}"
             for k, v, b in bound_checks]
        return kind, mixing, w2_rows, extras, diag_lines, res.state

    jobs = [lambda kind=k: central_job(kind) for k in central_kinds]
    if run_network:
        jobs += [lambda kind=t: topology_job(kind) for t in cfg.topologies]
    results = _run_jobs(jobs, cfg.threads)
    central_results = results[:len(central_kinds)]
    network_results = results[len(central_kinds):]

    wall_s = time.perf_counter() - t_start
    out = Path(cfg.out_dir)
    summary = {"out": out, "dirs": {}, "quantile": quant, "topologies": {},
               "central": {}, "agents_shown": shown}

    central_trace_rows = []
    central_sample_rows = []
    for kind, series, final in central_results:
        for k, v in series:
            central_trace_rows.append(("pooled", k, "mean", f"w2_{kind}", v))
        for r in range(cfg.n_chains):
            central_sample_rows.append((r, cfg.iterations, kind, final["bank"][r]))
        summary["central"][kind] = {"w2": series, "final": final["bank"]}

    if run_network:
        for kind, mixing, w2_rows, extras, diag_lines, state in network_results:
            trace = RunTrace()
            trace.extend(w2_rows)
            trace.extend(central_trace_rows)
            sample_rows = []
            for i in range(cfg.n_agents):
                for r in range(cfg.n_chains):
                    sample_rows.append((r, cfg.iterations, i, state.agents[r, i]))
            for r in range(cfg.n_chains):
                sample_rows.append((r, cfg.iterations, "mean", state.mean[r]))
            run_dir = out / kind
            _write_run_dir(run_dir, cfg, trace, sample_rows, 1, wall_s,
                           central_rows=central_sample_rows or None,
                           extra={"diagnostics.txt": diag_lines})
            summary["dirs"][kind] = run_dir
            summary["topologies"][kind] = {
                "rho": mixing.rho,
                "w2_mean": extras["w2_mean"],
                "consensus": extras["consensus"],
                "diagnostics": diag_lines,
                "final_bank": state.agents,
            }
    else:
        trace = RunTrace()
        trace.extend(central_trace_rows)
        run_dir = out / "central"
        _write_run_dir(run_dir, cfg, trace, central_sample_rows, 1, wall_s)
        summary["dirs"]["central"] = run_dir
    return summary


# --------------------------------------------------------------------------
# blr2d: 2-D Bayesian linear regression on a ball
# --------------------------------------------------------------------------

def _angle_deg(a: np.ndarray, b: np.ndarray) -> float:
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        return 90.0
    return float(np.degrees(np.arccos(np.clip(a @ b / (na * nb), -1.0, 1.0))))


def run_blr2d(cfg: ExperimentConfig) -> dict:
    """Constrained 2-D linear-regression posterior across the topologies.

    Generates synthetic regression data, fits ordinary least squares, sets
    the constraint ball radius to 0.8 times the OLS norm, then compares the
    decentralized sampler on every requested topology against the
    centralized proximal comparator.  Retained (post-burn-in) sample clouds
    and posterior summaries are written per topology.
    """
    t_start = time.perf_counter()
    if cfg.experiment != "blr2d":
        raise ConfigError(f"expected experiment=blr2d, got {cfg.experiment}")
    data = generate_blr_data(cfg.n_samples, cfg.seed)
    potential = linreg_potential(data, cfg.n_agents, _BLR_NOISE_VAR)
    beta_ols = fit_ols(data)
    radius = cfg.radius if cfg.radius is not None else 0.8 * float(np.linalg.norm(beta_ols))
    cset = _make_constraint(cfg, dim=2, derived_radius=radius)
    beta_star = np.ones(2)
    target = cset.project(beta_star)
    feas_tol = _FEAS_SCALE * np.sqrt(cfg.gamma)
    scfg = cfg.sampler_config()

    central_kinds = [s for s in cfg.samplers if s != "depsgld"]
    run_network = "depsgld" in cfg.samplers

    def central_job(kind):
        kept = []
        def observer(state):
            if state.iteration >= cfg.burnin:
                kept.append((state.iteration, state.agents[:, 0, :].copy()))
        run_centralized(kind, potential, cset, scfg, init=cfg.init,
                        observer=observer, n_agents=cfg.n_agents)
        return kind, kept

    def topology_job(kind):
        mixing = mixing_matrix(build_graph(kind, cfg.n_agents), cfg.delta)
        rows, kept = [], []
        def observer(state):
            k = state.iteration
            rows.append(("pooled", k, "mean", "consensus",
                         consensus_distance(state)))
            bank_mean = state.mean.mean(axis=0)
            rows.append(("pooled", k, "mean", "mean_norm",
                         float(np.linalg.norm(bank_mean))))
            dist = cset.distance(state.agents)
            rows.append(("pooled", k, "mean", "feas_frac",
                         float(np.mean(dist <= feas_tol))))
            if k >= cfg.burnin:
                kept.append((k, state.agents.copy()))
        run_depsgld(mixing, potential, cset, scfg, init=cfg.init,
                    observer=observer)
        return kind, mixing, rows, kept

    jobs = [lambda kind=k: central_job(kind) for k in central_kinds]
    if run_network:
        jobs += [lambda kind=t: topology_job(kind) for t in cfg.topologies]
    results = _run_jobs(jobs, cfg.threads)
    central_results = results[:len(central_kinds)]
    network_results = results[len(central_kinds):]

    wall_s = time.perf_counter() - t_start
    out = Path(cfg.out_dir)
    summary = {"out": out, "dirs": {}, "beta_ols": beta_ols, "radius": radius,
               "topologies": {}, "central": {}}

    def _posterior_lines(tag, samples, agents_summary=None):
        mean, cov = posterior_summary(samples)
        frac, msd = feasibility_stats(samples, cset)
        near = float(np.mean(cset.distance(samples) <= feas_tol))
        lines = [
            f"[{tag}] mean={_fmt(mean[0])},{_fmt(mean[1])}",
            f"[{tag}] norm={_fmt(np.linalg.norm(mean))}",
            f"[{tag}] angle_deg={_fmt(_angle_deg(mean, beta_star))}",
            f"[{tag}] err_vs_projected_truth={_fmt(np.linalg.norm(mean - target))}",
            f"[{tag}] frac_inside={_fmt(frac)}",
            f"[{tag}] frac_within_5rootgamma={_fmt(near)}",
            f"[{tag}] mean_sq_distance={_fmt(msd)}",
            f"[{tag}] n_samples={samples.shape[0]}",
        ]
        stats = {"mean": mean, "cov": cov, "norm": float(np.linalg.norm(mean)),
                 "angle_deg": _angle_deg(mean, beta_star),
                 "err": float(np.linalg.norm(mean - target)),
                 "frac_within_5rootgamma": near, "n": samples.shape[0]}
        return lines, stats

    central_lines, central_sample_rows = [], []
    for kind, kept in central_results:
        pooled = np.concatenate([bank for _, bank in kept], axis=0)
        lines, stats = _posterior_lines(kind, pooled)
        central_lines += lines
        summary["central"][kind] = stats
        for k, bank in kept:
            for r in range(cfg.n_chains):
                central_sample_rows.append((r, k, kind, bank[r]))

    shared_lines = [
        f"beta_ols={_fmt(beta_ols[0])},{_fmt(beta_ols[1])}",
        f"radius={_fmt(radius)}",
        f"projected_truth={_fmt(target[0])},{_fmt(target[1])}",
        f"feasibility_tolerance={_fmt(feas_tol)}",
    ]

    if run_network:
        for kind, mixing, rows, kept in network_results:
            trace = RunTrace()
            trace.extend(rows)
            sample_rows = []
            for k, bank in kept:
                for i in range(cfg.n_agents):
                    for r in range(cfg.n_chains):
                        sample_rows.append((r, k, i, bank[r, i]))
                mean_bank = bank.mean(axis=1)
                for r in range(cfg.n_chains):
                    sample_rows.append((r, k, "mean", mean_bank[r]))
            mean_samples = np.concatenate([b.mean(axis=1) for _, b in kept], axis=0)
            agent_samples = np.concatenate([b.reshape(-1, 2) for _, b in kept], axis=0)
            lines, stats = _posterior_lines(f"{kind}/mean", mean_samples)
            agent_lines, agent_stats = _posterior_lines(f"{kind}/agents", agent_samples)
            run_dir = out / kind
            _write_run_dir(run_dir, cfg, trace, sample_rows, 2, wall_s,
                           central_rows=central_sample_rows or None,
                           extra={"posterior.txt": shared_lines + lines
                                  + agent_lines + central_lines})
            summary["dirs"][kind] = run_dir
            stats["agents"] = agent_stats
            stats["rho"] = mixing.rho
            summary["topologies"][kind] = stats
    else:
        run_dir = out / "central"
        trace = RunTrace()
        _write_run_dir(run_dir, cfg, trace, central_sample_rows, 2, wall_s,
                       extra={"posterior.txt": shared_lines + central_lines})
        summary["dirs"]["central"] = run_dir
    return summary


# --------------------------------------------------------------------------
# logreg: 30-D constrained Bayesian logistic regression
# --------------------------------------------------------------------------

def _split_train_test(data: DataSet, test_frac: float, seed: int):
    if test_frac <= 0.0:
        return data, data
    seq = np.random.SeedSequence(entropy=seed % (1 << 64),
                                 spawn_key=(_SALT_SPLIT, 0))
    rng = np.random.Generator(np.random.Philox(seq))
    order = rng.permutation(data.n)
    n_test = int(round(test_frac * data.n))
    if n_test == 0 or n_test == data.n:
        raise ConfigError(
            f"test-frac={test_frac} leaves an empty split for n={data.n}")
    test_idx, train_idx = order[:n_test], order[n_test:]
    train = DataSet(features=data.features[train_idx],
                    labels=data.labels[train_idx])
    test = DataSet(features=data.features[test_idx],
                   labels=data.labels[test_idx])
    return train, test


def run_logreg(cfg: ExperimentConfig) -> dict:
    """Constrained logistic regression on the diagnostic dataset.

    Ingests the 569x30 dataset, fits the unconstrained MLE (its norm sets
    the constraint ball), and tracks classification accuracy per iteration
    for each agent, the mean chain, and the centralized comparator.
    """
    t_start = time.perf_counter()
    if cfg.experiment != "logreg":
        raise ConfigError(f"expected experiment=logreg, got {cfg.experiment}")
    data, report = load_wdbc(cfg.data_path, standardize=cfg.standardize,
                             report=True)
    train, evaluation = _split_train_test(data, cfg.test_frac, cfg.seed)
    beta_mle = fit_logreg_mle(train)
    radius = cfg.radius if cfg.radius is not None else 0.8 * float(np.linalg.norm(beta_mle))
    cset = _make_constraint(cfg, dim=data.p, derived_radius=radius)
    potential = logreg_potential(train, cfg.n_agents)
    acc_mle = classification_accuracy(beta_mle, evaluation)
    scfg = cfg.sampler_config()

    central_kinds = [s for s in cfg.samplers if s != "depsgld"]
    run_network = "depsgld" in cfg.samplers

    def _mean_accuracy(bank_mean: np.ndarray) -> float:
        if cfg.predictive:
            return predictive_accuracy(bank_mean, evaluation)
        return classification_accuracy(bank_mean.mean(axis=0), evaluation)

    def central_job(kind):
        series, final = [], {}
        def observer(state):
            series.append((state.iteration, _mean_accuracy(state.agents[:, 0, :])))
        res = run_centralized(kind, potential, cset, scfg, init=cfg.init,
                              observer=observer, n_agents=cfg.n_agents)
        final["bank"] = res.state.agents[:, 0, :]
        return kind, series, final

    def topology_job(kind):
        mixing = mixing_matrix(build_graph(kind, cfg.n_agents), cfg.delta)
        rows, acc_mean = [], []
        def observer(state):
            k = state.iteration
            for i in range(cfg.n_agents):
                beta_i = state.agents[:, i, :].mean(axis=0)
                rows.append(("pooled", k, i, "accuracy",
                             classification_accuracy(beta_i, evaluation)))
            acc = _mean_accuracy(state.mean)
            acc_mean.append((k, acc))
            rows.append(("pooled", k, "mean", "accuracy", acc))
            rows.append(("pooled", k, "mean", "consensus",
                         consensus_distance(state)))
        res = run_depsgld(mixing, potential, cset, scfg, init=cfg.init,
                          observer=observer)
        return kind, mixing, rows, acc_mean, res.state

    jobs = [lambda kind=k: central_job(kind) for k in central_kinds]
    if run_network:
        jobs += [lambda kind=t: topology_job(kind) for t in cfg.topologies]
    results = _run_jobs(jobs, cfg.threads)
    central_results = results[:len(central_kinds)]
    network_results = results[len(central_kinds):]

    wall_s = time.perf_counter() - t_start
    out = Path(cfg.out_dir)
    summary = {"out": out, "dirs": {}, "beta_mle": beta_mle, "radius": radius,
               "acc_mle": acc_mle, "topologies": {}, "central": {},
               "report": report}

    mle_lines = [
        f"mle_norm={_fmt(np.linalg.norm(beta_mle))}",
        f"radius={_fmt(radius)}",
        f"accuracy_mle={_fmt(acc_mle)}",
        f"accuracy_zero={_fmt(classification_accuracy(np.zeros(data.p), evaluation))}",
        f"test_frac={_fmt(cfg.test_frac)}",
        f"predictive={cfg.predictive}",
    ] + report.lines()

    central_trace_rows, central_sample_rows = [], []
    for kind, series, final in central_results:
        for k, v in series:
            central_trace_rows.append(("pooled", k, "mean", f"accuracy_{kind}", v))
        for r in range(cfg.n_chains):
            central_sample_rows.append((r, cfg.iterations, kind, final["bank"][r]))
        summary["central"][kind] = {"accuracy": series,
                                    "final_acc": series[-1][1] if series else None}

    if run_network:
        for kind, mixing, rows, acc_mean, state in network_results:
            trace = RunTrace()
            trace.extend(rows)
            trace.extend(central_trace_rows)
            sample_rows = []
            for i in range(cfg.n_agents):
                for r in range(cfg.n_chains):
                    sample_rows.append((r, cfg.iterations, i, state.agents[r, i]))
            mean_bank = state.mean
            for r in range(cfg.n_chains):
                sample_rows.append((r, cfg.iterations, "mean", mean_bank[r]))
            run_dir = out / kind
            _write_run_dir(run_dir, cfg, trace, sample_rows, data.p, wall_s,
                           central_rows=central_sample_rows or None,
                           extra={"mle.txt": mle_lines})
            summary["dirs"][kind] = run_dir
            summary["topologies"][kind] = {
                "rho": mixing.rho,
                "accuracy_mean": acc_mean,
                "final_acc_mean": acc_mean[-1][1] if acc_mean else None,
                "final_bank": state.agents,
            }
    else:
        run_dir = out / "central"
        trace = RunTrace()
        trace.extend(central_trace_rows)
        _write_run_dir(run_dir, cfg, trace, central_sample_rows, data.p,
                       wall_s, extra={"mle.txt": mle_lines})
        summary["dirs"]["central"] = run_dir
    return summary


# --------------------------------------------------------------------------
# validate-network
# --------------------------------------------------------------------------

def validate_network(kind: str, n_agents: int, delta: float | None = None,
                     mu: float | None = None, l_smooth: float | None = None,
                     gamma: float | None = None) -> list[str]:
    """Build and validate one mixing matrix; return the report lines.

    When ``mu``, ``l_smooth``, and ``gamma`` are all provided, the maximal
    admissible stepsize is appended to the report.
    """
    mixing = mixing_matrix(build_graph(kind, n_agents), delta)
    report = validate_mixing(mixing)
    lines = list(report.lines())
    lines.append(f"rho={_fmt(mixing.rho)}")
    lines.append(f"spectral_gap={_fmt(1.0 - mixing.rho)}")
    lines.append(f"lambda_min={_fmt(mixing.lambda_min)}")
    if mu is not None and l_smooth is not None and gamma is not None:
        from .samplers import max_stepsize
        eta_max = max_stepsize(mu, l_smooth, n_agents, gamma, mixing.lambda_min)
        lines.append(f"eta_max={_fmt(eta_max)}")
    return lines


_RUNNERS = {"sample1d": run_sample1d, "blr2d": run_blr2d, "logreg": run_logreg}


def run_experiment(cfg: ExperimentConfig) -> dict:
    """Dispatch an experiment configuration to its runner."""
    return _RUNNERS[cfg.experiment](cfg)


def _make_constraint(cfg: ExperimentConfig, dim: int,
                     derived_radius: float | None = None) -> ConvexSet:
    """The configured constraint set in the given dimension."""
    if cfg.set_kind == "box":
        lo, hi = cfg.bounds
        return interval_box(np.full(dim, lo), np.full(dim, hi))
    radius = cfg.radius if cfg.radius is not None else derived_radius
    if radius is None:
        raise ConfigError(
            f"set kind {cfg.set_kind!r} needs --radius (no data-derived default here)")
    if cfg.set_kind == "l2":
        return l2_ball(np.zeros(dim), radius)
    return l1_ball(radius, dim)
