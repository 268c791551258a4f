"""Langevin samplers: the decentralized proximal update and its baselines.

The decentralized update (one synchronous round) for agent i is

    x_i+ = sum_j W[i,j] x_j - eta * (g_i(x_i) + (x_i - P_K(x_i)) / (N gamma))
           + sqrt(2 eta) w_i,

where ``g_i`` is agent i's (possibly minibatch) gradient, ``P_K`` the
projection onto the constraint set, and ``w_i`` a standard normal draw.
Gossip mixes the pre-update snapshot; gradients and the proximal pull are
evaluated at each agent's own pre-update iterate.

Baselines: the centralized proximal sampler (full proximal weight
``1/gamma``), the mean-chain analogue (weights and noise scaled by ``1/N``),
projected Langevin (project after every step), and plain SGLD.

Randomness is counter-based: each iteration's noise and minibatch blocks
are generated from ``(seed, salt, iteration)`` keys, so a run's trajectory
is a pure function of the seed — independent of thread count, execution
order, or how many replicas run in one bank.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .constraints import ConvexSet
from .errors import InvalidArgumentError
from .models import Potential
from .topology import MixingMatrix

__all__ = [
    "SamplerConfig",
    "StreamPlan",
    "NetworkState",
    "RunDiagnostics",
    "RunResult",
    "CENTRALIZED_SAMPLERS",
    "max_stepsize",
    "init_network_state",
    "depsgld_step",
    "run_depsgld",
    "psgld_step",
    "pla_mean_chain_step",
    "projected_lmc_step",
    "sgld_step",
    "run_centralized",
    "consensus_bound",
    "pick_agents",
]

# Salts separating the independent stream families derived from one seed.
_SALT_NET_NOISE = 1
_SALT_NET_BATCH = 2
_SALT_CENTRAL_NOISE = 3
_SALT_CENTRAL_BATCH = 4
_SALT_INIT = 5
_SALT_PICK = 6
_SALT_DIAG = 7

CENTRALIZED_SAMPLERS = ("psgld", "pla", "plmc", "sgld")


@dataclass(frozen=True)
class SamplerConfig:
    """Hyperparameters shared by all samplers.

    ``eta`` may be 0 (degenerate: pure gossip / identity steps, used by the
    reduction tests).  ``noise_mode='zero'`` replaces the Gaussian streams
    with zeros for exactness tests.
    """

    eta: float
    gamma: float
    iterations: int
    batch: int = 1
    n_chains: int = 1
    seed: int = 0
    record_every: int = 1
    noise_mode: str = "gaussian"

    def __post_init__(self) -> None:
        if self.eta < 0:
            raise InvalidArgumentError(f"eta must be nonnegative, got {self.eta}")
        if not self.gamma > 0:
            raise InvalidArgumentError(f"gamma must be positive, got {self.gamma}")
        for name in ("iterations", "batch", "n_chains", "record_every"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or v < 1:
                raise InvalidArgumentError(f"{name} must be a positive integer, got {v}")
        if self.noise_mode not in ("gaussian", "zero"):
            raise InvalidArgumentError(
                f"noise_mode must be 'gaussian' or 'zero', got {self.noise_mode!r}")


@dataclass(frozen=True)
class StreamPlan:
    """Counter-based random streams for one run.

    Blocks are keyed by ``(seed, salt, iteration)``; slicing a block along
    its (replica, agent) axes yields that pair's independent stream.  The
    same key always regenerates the same block, so state at iteration k is
    reproducible without replaying earlier iterations.
    """

    seed: int
    noise_salt: int = _SALT_NET_NOISE
    batch_salt: int = _SALT_NET_BATCH

    def _generator(self, salt: int, k: int) -> np.random.Generator:
        seq = np.random.SeedSequence(entropy=self.seed % (1 << 64),
                                     spawn_key=(salt, k))
        return np.random.Generator(np.random.Philox(seq))

    def normal_block(self, k: int, shape: tuple[int, ...]) -> np.ndarray:
        return self._generator(self.noise_salt, k).standard_normal(shape)

    def uniform_block(self, k: int, shape: tuple[int, ...]) -> np.ndarray:
        return self._generator(self.batch_salt, k).random(shape)


@dataclass(frozen=True, eq=False)
class NetworkState:
    """Agent iterates at one iteration, with their noise streams.

    ``agents`` has shape ``(..., N, d)``; a leading axis, when present,
    indexes independent replicas advancing in lockstep.
    """

    agents: np.ndarray
    iteration: int
    rng_streams: StreamPlan

    @property
    def n_agents(self) -> int:
        return self.agents.shape[-2]

    @property
    def dim(self) -> int:
        return self.agents.shape[-1]

    @property
    def mean(self) -> np.ndarray:
        """The network mean chain, shape ``(..., d)``."""
        return self.agents.mean(axis=-2)


def max_stepsize(mu: float, l_smooth: float, n_agents: int, gamma: float,
                 lambda_min_w: float) -> float:
    """Largest admissible stepsize for the decentralized proximal sampler.

    Returns ``min(2N / L_g, (1 + lam_N) / L_g, 1 / (L_g + mu))`` with
    ``L_g = L + 2 / (N gamma)``.

    Raises:
        InvalidArgumentError: nonpositive inputs, ``l_smooth <= mu``, or
            ``lambda_min_w`` outside ``(-1, 1]``.
    """
    if not mu > 0:
        raise InvalidArgumentError(f"mu must be positive, got {mu}")
    if not l_smooth > mu:
        raise InvalidArgumentError(
            f"l_smooth must exceed mu, got L={l_smooth}, mu={mu}")
    if n_agents < 1:
        raise InvalidArgumentError(f"n_agents must be positive, got {n_agents}")
    if not gamma > 0:
        raise InvalidArgumentError(f"gamma must be positive, got {gamma}")
    if not -1.0 < lambda_min_w <= 1.0:
        raise InvalidArgumentError(
            f"lambda_min_w must lie in (-1, 1], got {lambda_min_w}")
    l_gamma = l_smooth + 2.0 / (n_agents * gamma)
    return min(2.0 * n_agents / l_gamma,
               (1.0 + lambda_min_w) / l_gamma,
               1.0 / (l_gamma + mu))


def _stepsize_guard(cfg: SamplerConfig, potential: Potential,
                    lambda_min_w: float) -> None:
    """Warn (never raise) when eta exceeds the admissible bound."""
    if potential.mu is None or potential.l_smooth is None:
        return
    bound = max_stepsize(potential.mu, potential.l_smooth,
                         potential.n_agents, cfg.gamma, lambda_min_w)
    if cfg.eta > bound:
        warnings.warn(
            f"eta={cfg.eta} exceeds the admissible stepsize bound "
            f"{bound:.6g}; convergence guarantees do not apply", stacklevel=3)


def _uniform_in_set(cset: ConvexSet, rng: np.random.Generator,
                    shape: tuple[int, ...]) -> np.ndarray:
    """Uniform draws inside the constraint set."""
    from .constraints import IntervalBox, L1Ball, L2Ball

    d = cset.dim
    if isinstance(cset, IntervalBox):
        u = rng.random((*shape, d))
        return cset.lower + u * (cset.upper - cset.lower)
    if isinstance(cset, L2Ball):
        z = rng.standard_normal((*shape, d))
        z /= np.linalg.norm(z, axis=-1, keepdims=True)
        radii = cset.radius * rng.random(shape) ** (1.0 / d)
        return cset.center + z * radii[..., None]
    if isinstance(cset, L1Ball):
        e = rng.standard_exponential((*shape, d))
        e /= e.sum(axis=-1, keepdims=True)
        signs = np.where(rng.random((*shape, d)) < 0.5, -1.0, 1.0)
        radii = cset.radius * rng.random(shape) ** (1.0 / d)
        return signs * e * radii[..., None]
    raise InvalidArgumentError(f"cannot sample uniformly in {type(cset).__name__}")


def init_network_state(potential: Potential, cset: ConvexSet,
                       cfg: SamplerConfig, init: str = "zero",
                       streams: StreamPlan | None = None) -> NetworkState:
    """Bank of ``n_chains`` replicas at iteration 0.

    ``init`` is ``zero`` (the origin, interior by assumption) or
    ``uniform-in-K``.
    """
    if streams is None:
        streams = StreamPlan(seed=cfg.seed)
    shape = (cfg.n_chains, potential.n_agents, potential.dim)
    if init == "zero":
        agents = np.zeros(shape)
    elif init == "uniform-in-K":
        seq = np.random.SeedSequence(entropy=cfg.seed % (1 << 64),
                                     spawn_key=(_SALT_INIT, 0))
        rng = np.random.Generator(np.random.Philox(seq))
        agents = _uniform_in_set(cset, rng, shape[:-1])
    else:
        raise InvalidArgumentError(
            f"init must be 'zero' or 'uniform-in-K', got {init!r}")
    return NetworkState(agents=agents, iteration=0, rng_streams=streams)


def _needs_minibatch(potential: Potential, batch: int) -> bool:
    return potential.has_data and batch < int(np.max(potential.shard_sizes))


def depsgld_step(state: NetworkState, mixing: MixingMatrix,
                 potential: Potential, cset: ConvexSet, cfg: SamplerConfig,
                 *, noise: np.ndarray | None = None,
                 batch_uniforms: np.ndarray | None = None) -> NetworkState:
    """One synchronous decentralized proximal Langevin round.

    Gossip uses the pre-update snapshot of all agents; the gradient and the
    proximal pull are evaluated at each agent's own pre-update iterate.
    ``noise`` and ``batch_uniforms`` override the streams for exactness
    tests; by default they come from the state's counter-based plan.
    """
    x = state.agents
    n = state.n_agents
    if mixing.w.shape != (n, n):
        raise InvalidArgumentError(
            f"mixing matrix is {mixing.w.shape}, state has {n} agents")
    if potential.n_agents != n:
        raise InvalidArgumentError(
            f"potential has {potential.n_agents} components, state has {n} agents")
    k = state.iteration

    if _needs_minibatch(potential, cfg.batch):
        if batch_uniforms is None:
            m = int(np.max(potential.shard_sizes))
            batch_uniforms = state.rng_streams.uniform_block(
                k, (*x.shape[:-2], n, m))
        grads = potential.agent_stochastic_gradients(x, cfg.batch, batch_uniforms)
    else:
        grads = potential.agent_gradients(x)

    pull = (x - cset.project(x)) / (n * cfg.gamma)
    if noise is None:
        if cfg.noise_mode == "zero":
            noise = np.zeros_like(x)
        else:
            noise = state.rng_streams.normal_block(k, x.shape)

    mixed = np.einsum("ij,...jd->...id", mixing.w, x)
    agents = mixed - cfg.eta * (grads + pull) + math.sqrt(2.0 * cfg.eta) * noise
    return NetworkState(agents=agents, iteration=k + 1,
                        rng_streams=state.rng_streams)


@dataclass
class RunDiagnostics:
    """Quantities the consensus-bound check needs, measured along a run.

    ``sup_grad_sq`` is the largest observed squared norm of the stacked
    per-agent gradients (including the proximal pull) over all recorded
    states and replicas; ``sigma_hat_sq`` the largest observed mean squared
    minibatch-gradient deviation; ``consensus`` the replica-averaged
    consensus distance per recorded iteration.
    """

    sup_grad_sq: float = 0.0
    sigma_hat_sq: float = 0.0
    consensus: list[tuple[int, float]] = field(default_factory=list)


@dataclass
class RunResult:
    """Final state of a run plus whatever the observer collected."""

    state: NetworkState
    recorded_iterations: list[int]
    diagnostics: RunDiagnostics | None


def _record_grid(iterations: int, record_every: int) -> list[int]:
    ks = list(range(record_every, iterations + 1, record_every))
    if not ks or ks[-1] != iterations:
        ks.append(iterations)
    return ks


def _update_diagnostics(diag: RunDiagnostics, state: NetworkState,
                        potential: Potential, cset: ConvexSet,
                        cfg: SamplerConfig, diag_streams: StreamPlan) -> None:
    x = state.agents
    n = state.n_agents
    exact = potential.agent_gradients(x)
    pull = (x - cset.project(x)) / (n * cfg.gamma)
    stacked = exact + pull
    sq = np.sum(stacked * stacked, axis=(-2, -1))  # per replica
    diag.sup_grad_sq = max(diag.sup_grad_sq, float(np.max(sq)))

    if _needs_minibatch(potential, cfg.batch):
        m = int(np.max(potential.shard_sizes))
        u = diag_streams.uniform_block(state.iteration, (*x.shape[:-2], n, m))
        noisy = potential.agent_stochastic_gradients(x, cfg.batch, u)
        dev = noisy - exact
        diag.sigma_hat_sq = max(diag.sigma_hat_sq,
                                float(np.mean(np.sum(dev * dev, axis=-1))))

    xbar = state.mean[..., None, :]
    dist_sq = np.sum((x - xbar) ** 2, axis=-1).mean(axis=-1)  # per replica
    diag.consensus.append((state.iteration, float(np.mean(dist_sq))))


def run_depsgld(mixing: MixingMatrix, potential: Potential, cset: ConvexSet,
                cfg: SamplerConfig, *, init: str = "zero", observer=None,
                diagnostics: bool = False) -> RunResult:
    """Run ``n_chains`` synchronized replicas for ``iterations`` rounds.

    ``observer(state)`` is called at every recorded iteration (multiples of
    ``record_every``, plus the final one); it is the hook through which the
    harness extracts sample banks and metrics.  With ``diagnostics=True``
    the run also measures the gradient and noise magnitudes the consensus
    bound is assembled from.
    """
    _stepsize_guard(cfg, potential, mixing.lambda_min)
    potential.check_batch(cfg.batch)
    state = init_network_state(potential, cset, cfg, init=init)
    grid = set(_record_grid(cfg.iterations, cfg.record_every))

    diag = RunDiagnostics() if diagnostics else None
    diag_streams = StreamPlan(seed=cfg.seed, noise_salt=_SALT_DIAG,
                              batch_salt=_SALT_DIAG)
    recorded = []
    for _ in range(cfg.iterations):
        state = depsgld_step(state, mixing, potential, cset, cfg)
        if state.iteration in grid:
            recorded.append(state.iteration)
            if diag is not None:
                _update_diagnostics(diag, state, potential, cset, cfg,
                                    diag_streams)
            if observer is not None:
                observer(state)
    return RunResult(state=state, recorded_iterations=recorded,
                     diagnostics=diag)


# --------------------------------------------------------------------------
# Centralized baselines.  All take the iterate bank x of shape (..., d).
# --------------------------------------------------------------------------

def _central_stochastic_gradient(potential: Potential, x: np.ndarray,
                                 cfg: SamplerConfig,
                                 batch_uniforms: np.ndarray | None,
                                 streams: StreamPlan | None,
                                 k: int) -> np.ndarray:
    """Minibatch gradient of the full objective from the pooled dataset."""
    if not potential.has_data or cfg.batch >= potential.data.n:
        return potential.gradient(x)
    if batch_uniforms is None:
        batch_uniforms = streams.uniform_block(
            k, (*x.shape[:-1], potential.data.n))
    return potential.full_stochastic_gradient(x, cfg.batch, batch_uniforms)


def psgld_step(x: np.ndarray, potential: Potential, cset: ConvexSet,
               cfg: SamplerConfig, *, noise: np.ndarray,
               batch_uniforms: np.ndarray | None = None,
               streams: StreamPlan | None = None, k: int = 0) -> np.ndarray:
    """Centralized proximal step: full proximal weight ``1/gamma``."""
    x = np.asarray(x, dtype=float)
    grad = _central_stochastic_gradient(potential, x, cfg, batch_uniforms,
                                        streams, k)
    pull = (x - cset.project(x)) / cfg.gamma
    return x - cfg.eta * (grad + pull) + math.sqrt(2.0 * cfg.eta) * noise


def pla_mean_chain_step(x: np.ndarray, potential: Potential, cset: ConvexSet,
                        cfg: SamplerConfig, n_agents: int, *,
                        noise: np.ndarray) -> np.ndarray:
    """Mean-chain analysis step: drift and proximal weight scaled by 1/N.

    The noise has variance ``2 eta / N`` — pass the coupled ``sqrt(N) *
    (average of agent noises)`` to track a decentralized mean chain.
    """
    if n_agents < 1:
        raise InvalidArgumentError(f"n_agents must be positive, got {n_agents}")
    x = np.asarray(x, dtype=float)
    grad = potential.gradient(x)
    pull = (x - cset.project(x)) / cfg.gamma
    return (x - (cfg.eta / n_agents) * (grad + pull)
            + math.sqrt(2.0 * cfg.eta / n_agents) * noise)


def projected_lmc_step(x: np.ndarray, potential: Potential, cset: ConvexSet,
                       cfg: SamplerConfig, *, noise: np.ndarray) -> np.ndarray:
    """Projected Langevin step: project after a full-gradient Langevin move."""
    x = np.asarray(x, dtype=float)
    y = x - cfg.eta * potential.gradient(x) + math.sqrt(2.0 * cfg.eta) * noise
    return cset.project(y)


def sgld_step(x: np.ndarray, potential: Potential, cfg: SamplerConfig, *,
              noise: np.ndarray, batch_uniforms: np.ndarray | None = None,
              streams: StreamPlan | None = None, k: int = 0) -> np.ndarray:
    """Unconstrained stochastic gradient Langevin step."""
    x = np.asarray(x, dtype=float)
    grad = _central_stochastic_gradient(potential, x, cfg, batch_uniforms,
                                        streams, k)
    return x - cfg.eta * grad + math.sqrt(2.0 * cfg.eta) * noise


def run_centralized(kind: str, potential: Potential, cset: ConvexSet,
                    cfg: SamplerConfig, *, init: str = "zero",
                    observer=None, n_agents: int | None = None) -> RunResult:
    """Run a bank of centralized chains (psgld, pla, plmc, or sgld)."""
    if kind not in CENTRALIZED_SAMPLERS:
        raise InvalidArgumentError(
            f"unknown centralized sampler {kind!r}; expected one of "
            f"{CENTRALIZED_SAMPLERS}")
    streams = StreamPlan(seed=cfg.seed, noise_salt=_SALT_CENTRAL_NOISE,
                         batch_salt=_SALT_CENTRAL_BATCH)
    if init == "zero":
        x = np.zeros((cfg.n_chains, potential.dim))
    elif init == "uniform-in-K":
        seq = np.random.SeedSequence(entropy=cfg.seed % (1 << 64),
                                     spawn_key=(_SALT_INIT, 1))
        rng = np.random.Generator(np.random.Philox(seq))
        x = _uniform_in_set(cset, rng, (cfg.n_chains,))
    else:
        raise InvalidArgumentError(
            f"init must be 'zero' or 'uniform-in-K', got {init!r}")

    n_for_pla = n_agents if n_agents is not None else potential.n_agents
    grid = set(_record_grid(cfg.iterations, cfg.record_every))
    recorded = []
    for k in range(cfg.iterations):
        if cfg.noise_mode == "zero":
            noise = np.zeros_like(x)
        else:
            noise = streams.normal_block(k, x.shape)
        if kind == "psgld":
            x = psgld_step(x, potential, cset, cfg, noise=noise,
                           streams=streams, k=k)
        elif kind == "pla":
            x = pla_mean_chain_step(x, potential, cset, cfg, n_for_pla,
                                    noise=noise)
        elif kind == "plmc":
            x = projected_lmc_step(x, potential, cset, cfg, noise=noise)
        else:
            x = sgld_step(x, potential, cfg, noise=noise, streams=streams, k=k)
        if k + 1 in grid:
            recorded.append(k + 1)
            if observer is not None:
                observer(_CentralState(agents=x[..., None, :], iteration=k + 1,
                                       rng_streams=streams))
    return RunResult(state=_CentralState(agents=x[..., None, :],
                                         iteration=cfg.iterations,
                                         rng_streams=streams),
                     recorded_iterations=recorded, diagnostics=None)


class _CentralState(NetworkState):
    """A centralized bank viewed as a one-agent network state."""


def consensus_bound(rho: float, eta: float, d: int, n_agents: int, k: int,
                    sup_grad_sq: float, sigma_hat_sq: float,
                    init_sq_mean: float = 0.0) -> float:
    """Envelope on the expected consensus distance at iteration k.

    Evaluates ``4 rho^{2k} E|x0|^2 / N + 4 eta^2 G^2 / (N (1-rho)^2)
    + 4 eta^2 s^2 / (1 - rho^2) + 8 eta d / (1 - rho^2)`` with ``G^2`` the
    largest observed squared stacked-gradient norm and ``s^2`` the measured
    minibatch-noise second moment.  Infinite when ``rho >= 1`` (the gossip
    matrix does not contract).
    """
    if not 0.0 <= rho:
        raise InvalidArgumentError(f"rho must be nonnegative, got {rho}")
    if rho >= 1.0:
        return math.inf
    decay = rho ** (2 * k) if rho > 0.0 else (1.0 if k == 0 else 0.0)
    return (4.0 * decay * init_sq_mean / n_agents
            + 4.0 * eta**2 * sup_grad_sq / (n_agents * (1.0 - rho) ** 2)
            + 4.0 * eta**2 * sigma_hat_sq / (1.0 - rho**2)
            + 8.0 * eta * d / (1.0 - rho**2))


def pick_agents(seed: int, n_agents: int, count: int = 3) -> list[int]:
    """Deterministically sample representative agent ids for reporting."""
    count = min(count, n_agents)
    seq = np.random.SeedSequence(entropy=seed % (1 << 64),
                                 spawn_key=(_SALT_PICK, 0))
    rng = np.random.Generator(np.random.Philox(seq))
    return sorted(int(i) for i in rng.choice(n_agents, size=count, replace=False))
