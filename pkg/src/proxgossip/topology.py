"""Communication graphs and their gossip mixing matrices.

A network of agents is described by an undirected graph; gossip averaging
uses the matrix ``W = I - delta * L`` built from the graph Laplacian ``L``.
``W`` is symmetric and doubly stochastic, so repeated multiplication
contracts every vector toward its mean at rate ``rho``, the second-largest
eigenvalue magnitude.  The disconnected graph is admitted as a degenerate
baseline with ``W = I`` and ``rho = 1`` (no contraction).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgumentError

__all__ = [
    "Graph",
    "MixingMatrix",
    "MixingReport",
    "TOPOLOGY_KINDS",
    "build_graph",
    "laplacian",
    "mixing_matrix",
    "validate_mixing",
]

TOPOLOGY_KINDS = ("complete", "ring", "star", "disconnected")


@dataclass(frozen=True)
class Graph:
    """An undirected communication graph over ``n_agents`` vertices.

    Edges are stored as a frozenset of sorted pairs; self-loops and
    duplicates are excluded by construction.
    """

    kind: str
    n_agents: int
    edges: frozenset[tuple[int, int]]

    def degrees(self) -> np.ndarray:
        """Vertex degrees as an integer array of length ``n_agents``."""
        deg = np.zeros(self.n_agents, dtype=int)
        for i, j in self.edges:
            deg[i] += 1
            deg[j] += 1
        return deg


@dataclass(frozen=True, eq=False)
class MixingMatrix:
    """A gossip matrix ``w = I - delta * L`` with its cached spectrum.

    Attributes:
        w: the symmetric doubly-stochastic matrix itself.
        rho: second-largest absolute eigenvalue, ``max(|lam_2|, |lam_N|)``;
            the contraction factor of gossip on mean-zero vectors.
        lambda_min: smallest eigenvalue of ``w``.
        delta: the Laplacian step used to build ``w``.
        graph: the graph ``w`` was built from.
    """

    w: np.ndarray
    rho: float
    lambda_min: float
    delta: float
    graph: Graph = field(repr=False)

    @property
    def n_agents(self) -> int:
        return self.w.shape[0]


def build_graph(kind: str, n: int) -> Graph:
    """Construct one of the four supported topologies.

    Args:
        kind: one of ``complete``, ``ring``, ``star``, ``disconnected``.
        n: number of agents; at least 2, and at least 3 for a ring.

    Returns:
        The requested :class:`Graph`.  The star's hub is agent 0.

    Raises:
        InvalidArgumentError: unknown kind or ``n`` below the minimum.
    """
    if kind not in TOPOLOGY_KINDS:
        raise InvalidArgumentError(
            f"unknown topology {kind!r}; expected one of {TOPOLOGY_KINDS}")
    if n < 2:
        raise InvalidArgumentError(f"need at least 2 agents, got {n}")
    if kind == "ring" and n < 3:
        raise InvalidArgumentError(f"a ring needs at least 3 agents, got {n}")

    if kind == "complete":
        edges = frozenset((i, j) for i in range(n) for j in range(i + 1, n))
    elif kind == "ring":
        edges = frozenset(tuple(sorted((i, (i + 1) % n))) for i in range(n))
    elif kind == "star":
        edges = frozenset((0, j) for j in range(1, n))
    else:  # disconnected
        edges = frozenset()
    return Graph(kind=kind, n_agents=n, edges=edges)


def laplacian(g: Graph) -> np.ndarray:
    """Graph Laplacian ``L = D - A`` (symmetric PSD, ``L @ 1 = 0``)."""
    lap = np.zeros((g.n_agents, g.n_agents))
    for i, j in g.edges:
        lap[i, j] -= 1.0
        lap[j, i] -= 1.0
        lap[i, i] += 1.0
        lap[j, j] += 1.0
    return lap


def mixing_matrix(g: Graph, delta: float | None = None) -> MixingMatrix:
    """Build ``W = I - delta * L`` and populate its spectral summary.

    ``delta`` must lie strictly inside ``(0, 2 / lambda_max(L))`` for a graph
    with edges.  When omitted it defaults to ``1 / lambda_max(L)``, the
    midpoint of the admissible interval.  The disconnected graph accepts any
    ``delta`` (its Laplacian is zero, so ``W = I`` regardless); the default
    there is 1.0.

    Raises:
        InvalidArgumentError: ``delta`` outside the admissible interval.
    """
    lap = laplacian(g)
    if not g.edges:
        if delta is None:
            delta = 1.0
        w = np.eye(g.n_agents)
        return MixingMatrix(w=w, rho=1.0, lambda_min=1.0,
                            delta=float(delta), graph=g)

    lam_max = float(np.linalg.eigvalsh(lap)[-1])
    if delta is None:
        delta = 1.0 / lam_max
    if not 0.0 < delta < 2.0 / lam_max:
        raise InvalidArgumentError(
            f"delta={delta} outside the admissible interval "
            f"(0, {2.0 / lam_max}) for this graph")

    w = np.eye(g.n_agents) - delta * lap
    eig = np.linalg.eigvalsh(w)  # ascending
    rho = max(abs(float(eig[-2])), abs(float(eig[0])))
    return MixingMatrix(w=w, rho=rho, lambda_min=float(eig[0]),
                        delta=float(delta), graph=g)


@dataclass(frozen=True)
class MixingReport:
    """Outcome of :func:`validate_mixing`.

    ``checks`` maps a property name to ``(passed, worst_residual)``.
    ``non_contracting`` flags ``rho >= 1`` (gossip cannot contract);
    ``repeated_eigenvalues`` notes spectra where the theoretical strict
    ordering ``lam_1 > lam_2 > ... > lam_N`` fails to be strict.
    """

    checks: dict[str, tuple[bool, float]]
    non_contracting: bool
    repeated_eigenvalues: bool
    rho: float
    lambda_min: float

    @property
    def passed(self) -> bool:
        return all(ok for ok, _ in self.checks.values())

    def lines(self) -> list[str]:
        out = []
        for name, (ok, residual) in self.checks.items():
            status = "pass" if ok else "FAIL"
            out.append(f"{name:24s} {status}  worst residual {residual:.3e}")
        out.append(f"{'rho':24s} {self.rho:.12g}")
        out.append(f"{'spectral gap 1-rho':24s} {1.0 - self.rho:.12g}")
        out.append(f"{'lambda_min':24s} {self.lambda_min:.12g}")
        if self.non_contracting:
            out.append("warning: rho = 1, non-contracting gossip "
                       "(disconnected or degenerate delta)")
        if self.repeated_eigenvalues:
            out.append("note: spectrum has repeated eigenvalues; the strict "
                       "ordering lam_1 > lam_2 > ... > lam_N holds only "
                       "non-strictly")
        return out

    def __str__(self) -> str:  # pragma: no cover - cosmetic
        return "\n".join(self.lines())


_TOL = 1e-12


def validate_mixing(m: MixingMatrix) -> MixingReport:
    """Check the gossip-matrix properties and report residuals.

    Verifies symmetry, double stochasticity, the sign/positivity pattern
    (``w[i, j] > 0`` exactly on edges and the diagonal, for connected
    kinds), and the eigenvalue ordering ``1 = lam_1 >= lam_2 >= ... >=
    lam_N > -1``.  Report-only: never raises.
    """
    w = m.w
    n = m.n_agents
    checks: dict[str, tuple[bool, float]] = {}

    sym = float(np.max(np.abs(w - w.T)))
    checks["symmetry"] = (sym <= _TOL, sym)

    rows = float(np.max(np.abs(w.sum(axis=1) - 1.0)))
    cols = float(np.max(np.abs(w.sum(axis=0) - 1.0)))
    stoch = max(rows, cols)
    checks["double stochasticity"] = (stoch <= _TOL, stoch)

    neg = float(max(0.0, -np.min(w)))
    checks["nonnegativity"] = (neg <= _TOL, neg)

    if m.graph.edges:
        allowed = np.eye(n, dtype=bool)
        for i, j in m.graph.edges:
            allowed[i, j] = allowed[j, i] = True
        off_support = float(np.max(np.abs(w[~allowed]))) if (~allowed).any() else 0.0
        on_support = float(np.min(w[allowed]))
        pattern_ok = off_support <= _TOL and on_support > _TOL
        checks["positivity pattern"] = (pattern_ok, off_support)
    else:
        identity_dev = float(np.max(np.abs(w - np.eye(n))))
        checks["positivity pattern"] = (identity_dev <= _TOL, identity_dev)

    eig = np.linalg.eigvalsh(w)[::-1]  # descending
    top_dev = abs(float(eig[0]) - 1.0)
    ordering_ok = top_dev <= 1e-9 and float(eig[-1]) > -1.0 + 1e-12
    checks["eigenvalue ordering"] = (ordering_ok, top_dev)

    repeated = bool(np.min(np.abs(np.diff(eig))) < 1e-9) if n > 1 else False
    non_contracting = m.rho >= 1.0 - _TOL
    return MixingReport(checks=checks, non_contracting=non_contracting,
                        repeated_eigenvalues=repeated, rho=m.rho,
                        lambda_min=m.lambda_min)
