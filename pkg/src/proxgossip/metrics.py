"""Run diagnostics: 1-D Wasserstein distance, consensus, feasibility,
posterior summaries, classification accuracy, and the trace table.

The 1-D 2-Wasserstein distance between an empirical sample and a target is
computed through quantiles: with sorted samples ``x_(1) <= ... <= x_(n)``
and ``u_k = (k - 1/2)/n``,

    W2 = sqrt( (1/n) * sum_k (Q(u_k) - x_(k))^2 ),

where ``Q`` is the target quantile function, tabulated once by trapezoid
integration of the unnormalized density on a uniform grid.
"""

from __future__ import annotations

import csv
import threading
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError, NumericError
from .models import DataSet, sigmoid

__all__ = [
    "Quantile1D",
    "RunTrace",
    "true_quantile_1d",
    "wasserstein2_1d",
    "wasserstein2_1d_empirical",
    "consensus_distance",
    "feasibility_stats",
    "classification_accuracy",
    "predictive_accuracy",
    "posterior_summary",
    "write_samples_csv",
]

_INSIDE_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class Quantile1D:
    """Tabulated CDF of a 1-D target with linear-interpolation inverse.

    ``grid`` spans exactly the support interval; ``cdf`` is nondecreasing
    with endpoints 0 and 1 and is strictly increasing wherever the density
    is positive.
    """

    grid: np.ndarray
    cdf: np.ndarray

    def __post_init__(self) -> None:
        grid = np.asarray(self.grid, dtype=float)
        cdf = np.asarray(self.cdf, dtype=float)
        if grid.ndim != 1 or grid.size < 2 or cdf.shape != grid.shape:
            raise InvalidArgumentError(
                "grid and cdf must be matching 1-D vectors of length >= 2")
        if np.any(np.diff(grid) <= 0):
            raise InvalidArgumentError("grid must be strictly increasing")
        if np.any(np.diff(cdf) < 0) or cdf[0] != 0.0 or cdf[-1] != 1.0:
            raise InvalidArgumentError(
                "cdf must be nondecreasing with endpoints 0 and 1")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "cdf", cdf)

    def quantile(self, u: np.ndarray) -> np.ndarray:
        """Q(u) by linear interpolation of the inverse CDF."""
        u = np.asarray(u, dtype=float)
        if np.any(u < 0.0) or np.any(u > 1.0):
            raise InvalidArgumentError("quantile levels must lie in [0, 1]")
        return np.interp(u, self.cdf, self.grid)

    def cdf_at(self, x: np.ndarray) -> np.ndarray:
        """F(x) by linear interpolation (clamped outside the grid)."""
        return np.interp(np.asarray(x, dtype=float), self.grid, self.cdf)


def true_quantile_1d(f, lower: float, upper: float,
                     grid_size: int = 4001) -> Quantile1D:
    """Tabulate the quantile function of the density ``exp(-f)`` on an interval.

    ``f`` is either a potential object (its ``value`` is evaluated on the
    grid) or a vectorized callable on scalars.  The unnormalized density is
    integrated by the trapezoid rule on a uniform grid of ``grid_size``
    points and normalized so the CDF reaches 1 at ``upper``.

    Raises:
        InvalidArgumentError: ``upper <= lower`` or ``grid_size < 1000``.
        NumericError: non-finite potential values on the grid.
    """
    if not upper > lower:
        raise InvalidArgumentError(f"need upper > lower, got [{lower}, {upper}]")
    if grid_size < 1000:
        raise InvalidArgumentError(
            f"grid_size must be at least 1000, got {grid_size}")
    grid = np.linspace(float(lower), float(upper), int(grid_size))
    if hasattr(f, "value"):
        vals = np.asarray(f.value(grid[:, None]), dtype=float)
    else:
        vals = np.asarray(f(grid), dtype=float)
    if vals.shape != grid.shape:
        raise InvalidArgumentError(
            f"potential returned shape {vals.shape}, expected {grid.shape}")
    if not np.isfinite(vals).all():
        raise NumericError("potential is non-finite on the quantile grid")
    density = np.exp(vals.min() - vals)  # shift-invariant, max density 1
    steps = np.diff(grid) * 0.5 * (density[1:] + density[:-1])
    cdf = np.concatenate(([0.0], np.cumsum(steps)))
    total = cdf[-1]
    if not total > 0:
        raise NumericError("density integrates to zero on the grid")
    cdf = cdf / total
    cdf[-1] = 1.0
    return Quantile1D(grid=grid, cdf=cdf)


def wasserstein2_1d(samples: np.ndarray, q: Quantile1D) -> float:
    """2-Wasserstein distance between an empirical sample and a 1-D target."""
    x = np.asarray(samples, dtype=float).reshape(-1)
    if x.size == 0:
        raise InvalidArgumentError("samples must be nonempty")
    x = np.sort(x)
    u = (np.arange(1, x.size + 1) - 0.5) / x.size
    diff = q.quantile(u) - x
    return float(np.sqrt(np.mean(diff * diff)))


def wasserstein2_1d_empirical(a: np.ndarray, b: np.ndarray) -> float:
    """2-Wasserstein distance between two equal-size empirical samples."""
    a = np.asarray(a, dtype=float).reshape(-1)
    b = np.asarray(b, dtype=float).reshape(-1)
    if a.size == 0 or a.size != b.size:
        raise InvalidArgumentError(
            f"need two nonempty samples of equal size, got {a.size} and {b.size}")
    diff = np.sort(a) - np.sort(b)
    return float(np.sqrt(np.mean(diff * diff)))


def consensus_distance(state) -> float:
    """Mean squared deviation from the network mean, ``(1/N) sum_i |x_i - xbar|^2``.

    Accepts a network state or a raw array of shape ``(..., N, d)``; leading
    replica axes are averaged.
    """
    x = np.asarray(getattr(state, "agents", state), dtype=float)
    if x.ndim < 2:
        raise InvalidArgumentError(
            f"expected an (..., N, d) agent array, got shape {x.shape}")
    xbar = x.mean(axis=-2, keepdims=True)
    per_replica = np.sum((x - xbar) ** 2, axis=-1).mean(axis=-1)
    return float(np.mean(per_replica))


def feasibility_stats(samples: np.ndarray, cset) -> tuple[float, float]:
    """Fraction of samples inside the set and their mean squared distance.

    A sample counts as inside when its distance to the set is at most 1e-9.
    """
    x = np.asarray(samples, dtype=float)
    if x.size == 0:
        raise InvalidArgumentError("samples must be nonempty")
    x = x.reshape(-1, x.shape[-1])
    dist = cset.distance(x)
    return float(np.mean(dist <= _INSIDE_TOL)), float(np.mean(dist * dist))


def classification_accuracy(beta: np.ndarray, data: DataSet) -> float:
    """Plug-in accuracy of the linear classifier ``sigmoid(x . beta) >= 1/2``.

    Ties (score exactly on the boundary) classify as class 1.
    """
    beta = np.asarray(beta, dtype=float)
    if beta.shape != (data.p,):
        raise InvalidArgumentError(
            f"beta has shape {beta.shape}, data has {data.p} features")
    predicted = (data.features @ beta >= 0.0)
    return float(np.mean(predicted == (data.labels == 1.0)))


def predictive_accuracy(betas: np.ndarray, data: DataSet) -> float:
    """Accuracy of the sample-averaged predictive probability.

    ``betas`` has shape (n_samples, p); each row's predicted probability is
    averaged before thresholding at 1/2 (ties toward class 1).
    """
    betas = np.asarray(betas, dtype=float)
    if betas.ndim != 2 or betas.shape[1] != data.p:
        raise InvalidArgumentError(
            f"betas must be (n_samples, {data.p}), got {betas.shape}")
    if betas.shape[0] == 0:
        raise InvalidArgumentError("betas must be nonempty")
    probs = sigmoid(data.features @ betas.T).mean(axis=1)
    predicted = probs >= 0.5
    return float(np.mean(predicted == (data.labels == 1.0)))


def posterior_summary(samples: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Sample mean vector and unbiased covariance matrix."""
    x = np.asarray(samples, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2 or x.shape[0] < 2:
        raise InvalidArgumentError(
            f"need at least 2 samples of shape (n, d), got shape {x.shape}")
    mean = x.mean(axis=0)
    centered = x - mean
    cov = centered.T @ centered / (x.shape[0] - 1)
    return mean, cov


class RunTrace:
    """Append-only metric table with a serialized sink.

    Rows are ``(replica-or-pooled tag, iteration, agent id or 'mean',
    metric name, value)``.  Appends are validated: iterations must be
    nondecreasing within each (replica, agent, metric) series and exact key
    duplicates are rejected.
    """

    def __init__(self) -> None:
        self._rows: list[tuple[str, int, str, str, float]] = []
        self._last: dict[tuple[str, str, str], int] = {}
        self._keys: set[tuple[str, int, str, str]] = set()
        self._lock = threading.Lock()

    def append(self, replica, iteration: int, agent, metric: str,
               value: float) -> None:
        replica = str(replica)
        agent = str(agent)
        metric = str(metric)
        iteration = int(iteration)
        key = (replica, iteration, agent, metric)
        series = (replica, agent, metric)
        with self._lock:
            if key in self._keys:
                raise InvalidArgumentError(f"duplicate trace row {key}")
            last = self._last.get(series)
            if last is not None and iteration < last:
                raise InvalidArgumentError(
                    f"iteration {iteration} precedes {last} in series {series}")
            self._keys.add(key)
            self._last[series] = iteration
            self._rows.append((replica, iteration, agent, metric, float(value)))

    def extend(self, rows) -> None:
        for row in rows:
            self.append(*row)

    @property
    def rows(self) -> list[tuple[str, int, str, str, float]]:
        with self._lock:
            return list(self._rows)

    def series(self, replica, agent, metric: str) -> list[tuple[int, float]]:
        """The (iteration, value) pairs of one metric series, in order."""
        replica, agent = str(replica), str(agent)
        return [(it, v) for rep, it, ag, met, v in self.rows
                if rep == replica and ag == agent and met == metric]

    def write_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["replica", "iter", "agent", "metric", "value"])
            for replica, iteration, agent, metric, value in self.rows:
                writer.writerow([replica, iteration, agent, metric,
                                 repr(float(value))])


def write_samples_csv(path, rows, dim: int) -> None:
    """Write sample vectors as ``replica,iter,agent,dim0,...`` lines.

    ``rows`` yields ``(replica, iteration, agent, vector)`` tuples.
    """
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["replica", "iter", "agent"]
                        + [f"dim{j}" for j in range(dim)])
        for replica, iteration, agent, vec in rows:
            vec = np.asarray(vec, dtype=float).reshape(-1)
            if vec.size != dim:
                raise InvalidArgumentError(
                    f"sample has dimension {vec.size}, expected {dim}")
            writer.writerow([str(replica), int(iteration), str(agent)]
                            + [repr(float(v)) for v in vec])
