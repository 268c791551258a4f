"""Target potentials, data sharding, and stochastic gradients.

A :class:`Potential` is a sum ``f = sum_i f_i`` of per-agent components.
Data-backed potentials shard their dataset into contiguous, disjoint,
near-equal blocks (agent 0 first) and expose unbiased minibatch gradients:
uniform draws without replacement, rescaled by ``n_i / batch``.  The prior
is uniform on the constraint set, so it contributes nothing to ``f_i``
inside the set; the proximal term carries the constraint instead.

All gradient evaluations are vectorized: ``x`` may have shape ``(..., d)``
and per-agent banks shape ``(..., N, d)``.
"""

from __future__ import annotations

import csv
import importlib.resources
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DataError, InvalidArgumentError, NumericError

__all__ = [
    "DataSet",
    "IngestReport",
    "Potential",
    "QuarticPotential",
    "LinearRegressionPotential",
    "LogisticRegressionPotential",
    "quartic_1d",
    "generate_blr_data",
    "linreg_potential",
    "logreg_potential",
    "stochastic_gradient",
    "fit_ols",
    "fit_logreg_mle",
    "load_wdbc",
    "sigmoid",
]


@dataclass(frozen=True, eq=False)
class DataSet:
    """An n x p design matrix with a length-n label vector."""

    features: np.ndarray
    labels: np.ndarray

    def __post_init__(self) -> None:
        X = np.asarray(self.features, dtype=float)
        y = np.asarray(self.labels, dtype=float)
        if X.ndim != 2 or X.shape[0] == 0:
            raise InvalidArgumentError("features must be a nonempty n x p matrix")
        if y.shape != (X.shape[0],):
            raise InvalidArgumentError("labels must be a length-n vector")
        if not (np.isfinite(X).all() and np.isfinite(y).all()):
            raise DataError("dataset contains non-finite values")
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "labels", y)

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def p(self) -> int:
        return self.features.shape[1]


@dataclass(frozen=True)
class IngestReport:
    """Summary of a dataset ingestion, including class counts."""

    n: int
    p: int
    positives: int
    negatives: int
    standardized: bool

    def lines(self) -> list[str]:
        return [
            f"rows = {self.n}",
            f"features = {self.p}",
            f"positives (malignant) = {self.positives}",
            f"negatives (benign) = {self.negatives}",
            f"standardized = {self.standardized}",
        ]


def sigmoid(z: np.ndarray) -> np.ndarray:
    """Overflow-safe logistic function."""
    return 0.5 * (1.0 + np.tanh(0.5 * np.asarray(z)))


class Potential:
    """A sharded objective ``f = sum_i f_i`` over ``n_agents`` components.

    Attributes:
        dim: dimension d of the sampling space.
        n_agents: number of components N.
        mu: strong-convexity constant of every f_i, or None when unknown.
        l_smooth: smoothness constant of every f_i, or None when unknown.
        noise_sigma2: bound on the stochastic-gradient noise second moment,
            when analytic (0 for exact-gradient potentials), else None.
        shard_sizes: per-agent data counts, or None for data-free potentials.
    """

    def __init__(self, dim: int, n_agents: int, mu: float | None,
                 l_smooth: float | None, noise_sigma2: float | None,
                 shard_sizes: np.ndarray | None) -> None:
        if dim < 1 or n_agents < 1:
            raise InvalidArgumentError("dim and n_agents must be positive")
        if mu is not None and l_smooth is not None and not 0 < mu < l_smooth:
            raise InvalidArgumentError(
                f"strong convexity/smoothness must satisfy 0 < mu < L, "
                f"got mu={mu}, L={l_smooth}")
        self.dim = int(dim)
        self.n_agents = int(n_agents)
        self.mu = mu
        self.l_smooth = l_smooth
        self.noise_sigma2 = noise_sigma2
        self.shard_sizes = shard_sizes

    # -- interface -----------------------------------------------------------
    def value(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def gradient(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def agent_value(self, agent: int, x: np.ndarray) -> np.ndarray:
        """Value of the single component ``f_agent`` at ``x``."""
        raise NotImplementedError

    def agent_gradient(self, agent: int, x: np.ndarray) -> np.ndarray:
        """Exact gradient of the single component ``f_agent`` at ``x``."""
        raise NotImplementedError

    def agent_gradients(self, xs: np.ndarray) -> np.ndarray:
        """Exact per-agent gradients for a bank ``xs`` of shape (..., N, d)."""
        cols = [self.agent_gradient(i, xs[..., i, :])
                for i in range(self.n_agents)]
        return np.stack(cols, axis=-2)

    def agent_minibatch_gradient(self, agent: int, x: np.ndarray,
                                 rows: np.ndarray) -> np.ndarray:
        """Rescaled minibatch gradient of ``f_agent`` over the given rows."""
        raise NotImplementedError(
            "this potential has no data; its gradients are exact")

    def agent_stochastic_gradients(self, xs: np.ndarray, batch: int,
                                   uniforms: np.ndarray) -> np.ndarray:
        """Vectorized minibatch gradients for a bank of agent iterates.

        ``uniforms`` is a block of uniform(0,1) draws with shape
        broadcastable to ``(..., N, max shard size)``; each agent's batch is
        the ``batch`` smallest draws in its slice, which is a uniform
        without-replacement sample.  Data-free potentials ignore it and
        return exact gradients.
        """
        del batch, uniforms
        return self.agent_gradients(xs)

    def full_stochastic_gradient(self, x: np.ndarray, batch: int,
                                 uniforms: np.ndarray) -> np.ndarray:
        """Rescaled minibatch gradient of the pooled objective ``sum_i f_i``.

        The batch is drawn from the whole dataset (not per shard): the
        ``batch`` smallest entries of ``uniforms`` (shape broadcastable to
        ``(..., n)``) index the rows, and the sum is rescaled by
        ``n / batch``.  Data-free potentials return the exact gradient.
        """
        del batch, uniforms
        return self.gradient(x)

    @property
    def has_data(self) -> bool:
        return self.shard_sizes is not None

    def check_batch(self, batch: int) -> None:
        if batch < 1:
            raise InvalidArgumentError(f"batch must be positive, got {batch}")
        if self.shard_sizes is not None and batch > int(np.min(self.shard_sizes)):
            raise InvalidArgumentError(
                f"batch={batch} exceeds the smallest shard "
                f"({int(np.min(self.shard_sizes))})")

    def estimate_gradient_noise(self, x: np.ndarray, batch: int, draws: int,
                                seed: int) -> float:
        """Monte-Carlo estimate of ``max_i E ||grad_i~ - grad_i||^2`` at x."""
        if not self.has_data:
            return 0.0
        self.check_batch(batch)
        rng = np.random.default_rng(seed)
        worst = 0.0
        for i in range(self.n_agents):
            exact = self.agent_gradient(i, x)
            acc = 0.0
            for _ in range(draws):
                rows = rng.choice(int(self.shard_sizes[i]), size=batch,
                                  replace=False)
                diff = self.agent_minibatch_gradient(i, x, rows) - exact
                acc += float(diff @ diff)
            worst = max(worst, acc / draws)
        return worst


class QuarticPotential(Potential):
    """1-D quartic ``f(x) = x^2/2 + x^4/8 - x`` split evenly: f_i = f / N."""

    def __init__(self, n_agents: int = 1) -> None:
        super().__init__(dim=1, n_agents=n_agents, mu=None, l_smooth=None,
                         noise_sigma2=0.0, shard_sizes=None)

    def value(self, x: np.ndarray) -> np.ndarray:
        t = np.asarray(x, dtype=float)[..., 0]
        return 0.5 * t**2 + 0.125 * t**4 - t

    def gradient(self, x: np.ndarray) -> np.ndarray:
        t = np.asarray(x, dtype=float)
        return t + 0.5 * t**3 - 1.0

    def agent_value(self, agent: int, x: np.ndarray) -> np.ndarray:
        self._check_agent(agent)
        return self.value(x) / self.n_agents

    def agent_gradient(self, agent: int, x: np.ndarray) -> np.ndarray:
        self._check_agent(agent)
        return self.gradient(x) / self.n_agents

    def agent_gradients(self, xs: np.ndarray) -> np.ndarray:
        return self.gradient(xs) / self.n_agents

    def _check_agent(self, agent: int) -> None:
        if not 0 <= agent < self.n_agents:
            raise InvalidArgumentError(f"agent {agent} out of range")


class _ShardedDataPotential(Potential):
    """Common machinery for data-backed potentials with padded shard arrays."""

    def __init__(self, data: DataSet, n_agents: int, mu: float | None,
                 l_smooth: float | None) -> None:
        blocks = np.array_split(np.arange(data.n), n_agents)
        if any(len(b) == 0 for b in blocks):
            raise InvalidArgumentError(
                f"{data.n} rows cannot feed {n_agents} nonempty shards")
        sizes = np.array([len(b) for b in blocks])
        m = int(sizes.max())
        xs = np.zeros((n_agents, m, data.p))
        ys = np.zeros((n_agents, m))
        mask = np.zeros((n_agents, m))
        for i, b in enumerate(blocks):
            xs[i, :len(b)] = data.features[b]
            ys[i, :len(b)] = data.labels[b]
            mask[i, :len(b)] = 1.0
        self.data = data
        self.shard_features = xs
        self.shard_labels = ys
        self.shard_mask = mask
        super().__init__(dim=data.p, n_agents=n_agents, mu=mu,
                         l_smooth=l_smooth, noise_sigma2=None,
                         shard_sizes=sizes)

    def _point_gradients(self, scores: np.ndarray, labels: np.ndarray) -> np.ndarray:
        """Per-point residual-like factor; shape matches ``scores``."""
        raise NotImplementedError

    def _point_values(self, scores: np.ndarray, labels: np.ndarray) -> np.ndarray:
        """Per-point loss; shape matches ``scores``."""
        raise NotImplementedError

    def agent_value(self, agent: int, x: np.ndarray) -> np.ndarray:
        if not 0 <= agent < self.n_agents:
            raise InvalidArgumentError(f"agent {agent} out of range")
        m = int(self.shard_sizes[agent])
        X = self.shard_features[agent, :m]
        y = self.shard_labels[agent, :m]
        scores = np.asarray(x, dtype=float) @ X.T
        return np.sum(self._point_values(scores, y), axis=-1)

    # Exact per-agent gradients: sum of per-point gradients over the shard.
    def agent_gradients(self, xs: np.ndarray) -> np.ndarray:
        scores = np.einsum("...np,nmp->...nm", xs, self.shard_features)
        fac = self._point_gradients(scores, self.shard_labels) * self.shard_mask
        return np.einsum("...nm,nmp->...np", fac, self.shard_features)

    def agent_gradient(self, agent: int, x: np.ndarray) -> np.ndarray:
        if not 0 <= agent < self.n_agents:
            raise InvalidArgumentError(f"agent {agent} out of range")
        m = int(self.shard_sizes[agent])
        X = self.shard_features[agent, :m]
        y = self.shard_labels[agent, :m]
        scores = np.asarray(x, dtype=float) @ X.T
        return self._point_gradients(scores, y) @ X

    def agent_minibatch_gradient(self, agent: int, x: np.ndarray,
                                 rows: np.ndarray) -> np.ndarray:
        if not 0 <= agent < self.n_agents:
            raise InvalidArgumentError(f"agent {agent} out of range")
        rows = np.asarray(rows)
        X = self.shard_features[agent, rows]
        y = self.shard_labels[agent, rows]
        scores = np.asarray(x, dtype=float) @ X.T
        scale = float(self.shard_sizes[agent]) / rows.shape[-1]
        return scale * (self._point_gradients(scores, y) @ X)

    def agent_stochastic_gradients(self, xs: np.ndarray, batch: int,
                                   uniforms: np.ndarray) -> np.ndarray:
        self.check_batch(batch)
        m = self.shard_features.shape[1]
        lead = np.broadcast_shapes(uniforms.shape[:-2], xs.shape[:-2])
        u = np.where(self.shard_mask > 0, uniforms, 2.0)
        idx = np.argpartition(u, batch - 1, axis=-1)[..., :batch]
        xb = np.take_along_axis(
            np.broadcast_to(self.shard_features,
                            (*lead, self.n_agents, m, self.dim)),
            idx[..., None], axis=-2)
        yb = np.take_along_axis(
            np.broadcast_to(self.shard_labels, (*lead, self.n_agents, m)),
            idx, axis=-1)
        scores = np.einsum("...np,...nbp->...nb", xs, xb)
        fac = self._point_gradients(scores, yb)
        scale = self.shard_sizes.astype(float) / batch
        return np.einsum("...nb,...nbp->...np", fac, xb) * scale[:, None]

    def full_stochastic_gradient(self, x: np.ndarray, batch: int,
                                 uniforms: np.ndarray) -> np.ndarray:
        n = self.data.n
        if not 1 <= batch <= n:
            raise InvalidArgumentError(
                f"batch must lie in [1, {n}], got {batch}")
        x = np.asarray(x, dtype=float)
        lead = np.broadcast_shapes(uniforms.shape[:-1], x.shape[:-1])
        idx = np.argpartition(uniforms, batch - 1, axis=-1)[..., :batch]
        idx = np.broadcast_to(idx, (*lead, batch))
        xb = np.take_along_axis(
            np.broadcast_to(self.data.features, (*lead, n, self.dim)),
            idx[..., None], axis=-2)
        yb = np.take_along_axis(
            np.broadcast_to(self.data.labels, (*lead, n)), idx, axis=-1)
        scores = np.einsum("...p,...bp->...b", x, xb)
        fac = self._point_gradients(scores, yb)
        return (n / batch) * np.einsum("...b,...bp->...p", fac, xb)

    def full_gradient_from_agents(self, x: np.ndarray) -> np.ndarray:
        xs = np.broadcast_to(np.asarray(x, dtype=float)[..., None, :],
                             (*np.shape(x)[:-1], self.n_agents, self.dim))
        return self.agent_gradients(xs).sum(axis=-2)


class LinearRegressionPotential(_ShardedDataPotential):
    """Gaussian-likelihood least squares: f_i = sum_shard (y - b.x)^2 / (2 s^2)."""

    def __init__(self, data: DataSet, n_agents: int, noise_var: float) -> None:
        if not noise_var > 0:
            raise InvalidArgumentError(f"noise_var must be positive, got {noise_var}")
        self.noise_var = float(noise_var)
        super().__init__(data, n_agents, mu=None, l_smooth=None)
        # Assumption-style constants from the extreme shard Gram eigenvalues.
        mus, ls = [], []
        for i in range(n_agents):
            m = int(self.shard_sizes[i])
            X = self.shard_features[i, :m]
            eig = np.linalg.eigvalsh(X.T @ X) / self.noise_var
            mus.append(float(eig[0]))
            ls.append(float(eig[-1]))
        mu = min(mus)
        self.mu = mu if mu > 1e-12 else None
        self.l_smooth = max(ls)

    def value(self, x: np.ndarray) -> np.ndarray:
        r = self.data.labels - np.asarray(x, dtype=float) @ self.data.features.T
        return 0.5 / self.noise_var * np.sum(r * r, axis=-1)

    def gradient(self, x: np.ndarray) -> np.ndarray:
        r = np.asarray(x, dtype=float) @ self.data.features.T - self.data.labels
        return (r @ self.data.features) / self.noise_var

    def _point_gradients(self, scores, labels):
        return (scores - labels) / self.noise_var

    def _point_values(self, scores, labels):
        r = labels - scores
        return 0.5 * r * r / self.noise_var


class LogisticRegressionPotential(_ShardedDataPotential):
    """Logistic negative log-likelihood: f_i = sum_shard log(1+e^z) - y z."""

    def __init__(self, data: DataSet, n_agents: int) -> None:
        if not np.isin(data.labels, (0.0, 1.0)).all():
            raise InvalidArgumentError("logistic labels must be 0 or 1")
        super().__init__(data, n_agents, mu=None, l_smooth=None)
        gram_top = float(np.linalg.eigvalsh(data.features.T @ data.features)[-1])
        self.l_smooth = gram_top / 4.0

    def value(self, x: np.ndarray) -> np.ndarray:
        z = np.asarray(x, dtype=float) @ self.data.features.T
        return np.sum(np.logaddexp(0.0, z) - self.data.labels * z, axis=-1)

    def gradient(self, x: np.ndarray) -> np.ndarray:
        z = np.asarray(x, dtype=float) @ self.data.features.T
        return (sigmoid(z) - self.data.labels) @ self.data.features

    def _point_gradients(self, scores, labels):
        return sigmoid(scores) - labels

    def _point_values(self, scores, labels):
        return np.logaddexp(0.0, scores) - labels * scores


def quartic_1d(n_agents: int = 1) -> QuarticPotential:
    """The 1-D quartic target potential, split evenly across agents."""
    return QuarticPotential(n_agents=n_agents)


def generate_blr_data(n: int, seed: int) -> DataSet:
    """Synthetic regression data: x ~ N(0, I_2), y = x1 + x2 + N(0, 0.25)."""
    if n < 1:
        raise InvalidArgumentError(f"need n >= 1, got {n}")
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, 2))
    y = X @ np.ones(2) + 0.5 * rng.standard_normal(n)
    return DataSet(features=X, labels=y)


def linreg_potential(data: DataSet, n_agents: int,
                     noise_var: float) -> LinearRegressionPotential:
    """Least-squares potential over equal contiguous shards.

    When ``n`` is not divisible by ``n_agents`` the trailing remainder rows
    are dropped with a warning so every shard has equal size.
    """
    if data.n % n_agents:
        kept = (data.n // n_agents) * n_agents
        if kept == 0:
            raise InvalidArgumentError(
                f"{data.n} rows cannot feed {n_agents} nonempty shards")
        warnings.warn(
            f"dropping {data.n - kept} trailing rows so {kept} split evenly "
            f"across {n_agents} agents", stacklevel=2)
        data = DataSet(features=data.features[:kept], labels=data.labels[:kept])
    return LinearRegressionPotential(data, n_agents, noise_var)


def logreg_potential(data: DataSet, n_agents: int) -> LogisticRegressionPotential:
    """Logistic potential over contiguous near-equal shards."""
    return LogisticRegressionPotential(data, n_agents)


def stochastic_gradient(p: Potential, agent: int, x: np.ndarray, batch: int,
                        rng: np.random.Generator) -> np.ndarray:
    """Unbiased minibatch gradient of ``f_agent`` at ``x``.

    Draws ``batch`` shard rows uniformly without replacement and rescales by
    ``n_i / batch``; its expectation over draws is the exact shard gradient.
    Potentials without data return their exact gradient.
    """
    p.check_batch(batch)
    if not p.has_data:
        return p.agent_gradient(agent, x)
    n_i = int(p.shard_sizes[agent])
    rows = rng.choice(n_i, size=batch, replace=False)
    return p.agent_minibatch_gradient(agent, x, rows)


def fit_ols(data: DataSet) -> np.ndarray:
    """Ordinary least squares via the normal equations."""
    gram = data.features.T @ data.features
    cond = float(np.linalg.cond(gram))
    if not np.isfinite(cond) or cond > 1e12:
        raise NumericError(f"singular Gram matrix (condition estimate {cond:.3e})")
    return np.linalg.solve(gram, data.features.T @ data.labels)


def fit_logreg_mle(data: DataSet, tol: float = 1e-6,
                   max_iters: int = 100_000) -> np.ndarray:
    """Unconstrained logistic MLE by gradient descent with backtracking.

    Stops when the gradient norm falls below ``tol`` or after ``max_iters``
    iterations (the cap guards against separable data, where the MLE
    diverges).
    """
    if not np.isin(data.labels, (0.0, 1.0)).all():
        raise InvalidArgumentError("logistic labels must be 0 or 1")
    X, y = data.features, data.labels

    def nll(beta):
        z = X @ beta
        return float(np.sum(np.logaddexp(0.0, z) - y * z))

    beta = np.zeros(data.p)
    value = nll(beta)
    step = 1.0
    for _ in range(max_iters):
        z = X @ beta
        grad = (sigmoid(z) - y) @ X
        gnorm2 = float(grad @ grad)
        if np.sqrt(gnorm2) <= tol:
            break
        step *= 2.0  # optimistic warm start, then backtrack
        while True:
            cand = beta - step * grad
            cand_value = nll(cand)
            if cand_value <= value - 1e-4 * step * gnorm2 or step < 1e-18:
                break
            step *= 0.5
        beta, value = cand, cand_value
    return beta


_WDBC_ROWS = 569
_WDBC_FEATURES = 30
_WDBC_POSITIVES = 212  # malignant
_WDBC_NEGATIVES = 357  # benign


def load_wdbc(path=None, standardize: bool = True, report: bool = False):
    """Load the breast-cancer diagnostic dataset (569 x 30, labels M/B).

    Reads the standard comma-separated layout ``id, diagnosis, 30 features``
    (a copy ships with the package; pass ``path`` to read another file).
    Malignant rows become label 1, benign 0.  Columns are standardized to
    zero mean and unit variance unless ``standardize=False``.

    Returns the :class:`DataSet`, or ``(DataSet, IngestReport)`` when
    ``report=True``.

    Raises:
        DataError: wrong row/feature/class counts, or an unparseable field
            (the message names the offending line).
    """
    try:
        if path is None:
            resource = importlib.resources.files("proxgossip") / "data" / "wdbc.csv"
            text = resource.read_text(encoding="utf-8")
        else:
            with open(path, "r", encoding="utf-8") as fh:
                text = fh.read()
    except OSError as exc:
        raise DataError(
            f"cannot read dataset (expected 569 rows x 30 features): {exc}") from exc

    feats, labels = [], []
    for lineno, row in enumerate(csv.reader(text.splitlines()), start=1):
        if not row:
            continue
        if len(row) != 2 + _WDBC_FEATURES:
            raise DataError(
                f"line {lineno}: expected {2 + _WDBC_FEATURES} fields "
                f"(id, diagnosis, {_WDBC_FEATURES} features), got {len(row)}")
        diag = row[1].strip()
        if diag not in ("M", "B"):
            raise DataError(f"line {lineno}: diagnosis must be M or B, got {diag!r}")
        try:
            feats.append([float(v) for v in row[2:]])
        except ValueError as exc:
            raise DataError(f"line {lineno}: unparseable feature: {exc}") from exc
        labels.append(1.0 if diag == "M" else 0.0)

    X = np.asarray(feats)
    y = np.asarray(labels)
    if X.shape[0] != _WDBC_ROWS:
        raise DataError(f"expected {_WDBC_ROWS} rows, found {X.shape[0]}")
    pos, neg = int(y.sum()), int((1 - y).sum())
    if (pos, neg) != (_WDBC_POSITIVES, _WDBC_NEGATIVES):
        raise DataError(
            f"expected {_WDBC_POSITIVES} malignant / {_WDBC_NEGATIVES} benign, "
            f"found {pos} / {neg}")

    if standardize:
        std = X.std(axis=0)
        if np.any(std == 0):
            raise DataError("constant feature column cannot be standardized")
        X = (X - X.mean(axis=0)) / std

    data = DataSet(features=X, labels=y)
    if report:
        return data, IngestReport(n=data.n, p=data.p, positives=pos,
                                  negatives=neg, standardized=standardize)
    return data
