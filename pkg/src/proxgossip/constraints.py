"""Convex constraint sets with exact projections and proximal smoothing.

Each set supports Euclidean projection, distance, and the quadratic
proximal envelope ``dist(x, K)^2 / (2 * gamma)`` whose gradient
``(x - P_K(x)) / gamma`` is exactly ``1/gamma``-Lipschitz.  All operations
are vectorized over leading axes: ``x`` may have shape ``(..., d)``.

Sets are origin-centered by default; an off-center ball (or a box that
does not contain the origin in its interior) is supported but flagged via
``origin_interior=False``, since the sampler's theory assumes a ball
``B(0, r)`` inside the set.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgumentError

__all__ = [
    "ConvexSet",
    "IntervalBox",
    "L2Ball",
    "L1Ball",
    "ProxParams",
    "interval_box",
    "l2_ball",
    "l1_ball",
    "project",
    "distance",
    "moreau_envelope",
    "moreau_gradient",
]


@dataclass(frozen=True)
class ProxParams:
    """Moreau-Yosida regularization strength.

    Warns when ``gamma >= 1/e``: the regularized target is only a good
    proxy for the constrained one when gamma is small.
    """

    gamma: float

    def __post_init__(self) -> None:
        if not self.gamma > 0:
            raise InvalidArgumentError(f"gamma must be positive, got {self.gamma}")
        if self.gamma >= 1.0 / np.e:
            warnings.warn(
                f"gamma={self.gamma} is >= 1/e; the proximal approximation "
                "degrades for large gamma", stacklevel=2)


class ConvexSet:
    """Interface shared by the constraint shapes.

    Subclasses populate ``dim``, ``inner_radius`` (largest r with
    ``B(0, r)`` inside the set, 0 if the origin is not interior) and
    ``outer_radius`` (smallest R with the set inside ``B(0, R)``), and
    implement :meth:`project`.
    """

    dim: int
    inner_radius: float
    outer_radius: float
    origin_interior: bool

    def project(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _check_dim(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape[-1:] != (self.dim,):
            raise InvalidArgumentError(
                f"point dimension {x.shape[-1:]} does not match set "
                f"dimension {self.dim}")
        return x

    def distance(self, x: np.ndarray) -> np.ndarray:
        """Euclidean distance from ``x`` to the set (0 inside)."""
        x = self._check_dim(x)
        return np.linalg.norm(x - self.project(x), axis=-1)

    def contains(self, x: np.ndarray, tol: float = 1e-10) -> np.ndarray:
        return self.distance(x) <= tol


@dataclass(frozen=True, eq=False)
class IntervalBox(ConvexSet):
    """Axis-aligned box ``{x : lower <= x <= upper}``."""

    lower: np.ndarray
    upper: np.ndarray
    dim: int = field(init=False)
    inner_radius: float = field(init=False)
    outer_radius: float = field(init=False)
    origin_interior: bool = field(init=False)

    def __post_init__(self) -> None:
        lo = np.atleast_1d(np.asarray(self.lower, dtype=float))
        hi = np.atleast_1d(np.asarray(self.upper, dtype=float))
        if lo.shape != hi.shape or lo.ndim != 1:
            raise InvalidArgumentError("lower and upper must be 1-D of equal length")
        if not np.all(lo < hi):
            raise InvalidArgumentError("lower < upper must hold componentwise")
        interior = bool(np.all(lo < 0) and np.all(hi > 0))
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)
        object.__setattr__(self, "dim", lo.size)
        object.__setattr__(self, "origin_interior", interior)
        r = float(np.min(np.minimum(np.abs(lo), hi))) if interior else 0.0
        object.__setattr__(self, "inner_radius", r)
        object.__setattr__(
            self, "outer_radius",
            float(np.linalg.norm(np.maximum(np.abs(lo), np.abs(hi)))))
        if not interior:
            warnings.warn("box does not contain the origin in its interior; "
                          "outside the sampler's standing assumption",
                          stacklevel=3)

    def project(self, x: np.ndarray) -> np.ndarray:
        x = self._check_dim(x)
        return np.clip(x, self.lower, self.upper)


@dataclass(frozen=True, eq=False)
class L2Ball(ConvexSet):
    """Euclidean ball ``{x : ||x - center|| <= radius}``."""

    center: np.ndarray
    radius: float
    dim: int = field(init=False)
    inner_radius: float = field(init=False)
    outer_radius: float = field(init=False)
    origin_interior: bool = field(init=False)

    def __post_init__(self) -> None:
        c = np.atleast_1d(np.asarray(self.center, dtype=float))
        if not self.radius > 0:
            raise InvalidArgumentError(f"radius must be positive, got {self.radius}")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "dim", c.size)
        off = float(np.linalg.norm(c))
        interior = off < self.radius
        object.__setattr__(self, "origin_interior", interior)
        object.__setattr__(self, "inner_radius", max(0.0, self.radius - off))
        object.__setattr__(self, "outer_radius", self.radius + off)
        if off > 0:
            warnings.warn("off-center ball; outside the sampler's standing "
                          "assumption of an origin-centered constraint",
                          stacklevel=3)

    def project(self, x: np.ndarray) -> np.ndarray:
        x = self._check_dim(x)
        shifted = x - self.center
        norm = np.linalg.norm(shifted, axis=-1, keepdims=True)
        scale = np.where(norm > self.radius,
                         self.radius / np.where(norm == 0.0, 1.0, norm), 1.0)
        # inside points keep their exact floating representation (scale 1)
        return np.where(norm > self.radius, self.center + shifted * scale, x)


@dataclass(frozen=True, eq=False)
class L1Ball(ConvexSet):
    """The l1 ball ``{x : sum_i |x_i| <= radius}`` centered at the origin."""

    radius: float
    dim: int
    inner_radius: float = field(init=False)
    outer_radius: float = field(init=False)
    origin_interior: bool = field(init=False)

    def __post_init__(self) -> None:
        if not self.radius > 0:
            raise InvalidArgumentError(f"radius must be positive, got {self.radius}")
        if self.dim < 1:
            raise InvalidArgumentError(f"dim must be positive, got {self.dim}")
        object.__setattr__(self, "origin_interior", True)
        object.__setattr__(self, "inner_radius", self.radius / np.sqrt(self.dim))
        object.__setattr__(self, "outer_radius", float(self.radius))

    def project(self, x: np.ndarray) -> np.ndarray:
        """Sort-and-threshold projection (exact, O(d log d) per point)."""
        x = self._check_dim(x)
        a = np.abs(x)
        inside = a.sum(axis=-1, keepdims=True) <= self.radius
        s = np.sort(a, axis=-1)[..., ::-1]
        css = np.cumsum(s, axis=-1)
        k = np.arange(1, self.dim + 1, dtype=float)
        active = s - (css - self.radius) / k > 0
        nnz = np.count_nonzero(active, axis=-1, keepdims=True)
        css_at = np.take_along_axis(css, nnz - 1, axis=-1)
        theta = (css_at - self.radius) / nnz
        shrunk = np.sign(x) * np.maximum(a - theta, 0.0)
        return np.where(inside, x, shrunk)


def interval_box(lower, upper) -> IntervalBox:
    """Box constraint from componentwise bounds."""
    return IntervalBox(lower=np.asarray(lower, dtype=float),
                       upper=np.asarray(upper, dtype=float))


def l2_ball(center, radius: float) -> L2Ball:
    """Euclidean ball; pass an array center (its length fixes the dimension)."""
    return L2Ball(center=np.asarray(center, dtype=float), radius=float(radius))


def l1_ball(radius: float, dim: int) -> L1Ball:
    return L1Ball(radius=float(radius), dim=int(dim))


def project(cset: ConvexSet, x: np.ndarray) -> np.ndarray:
    """Euclidean projection of ``x`` onto the set."""
    return cset.project(x)


def distance(cset: ConvexSet, x: np.ndarray) -> np.ndarray:
    return cset.distance(x)


def moreau_envelope(cset: ConvexSet, prox: ProxParams, x: np.ndarray) -> np.ndarray:
    """Proximal envelope ``dist(x, K)^2 / (2 gamma)``; zero exactly on K."""
    d = cset.distance(x)
    return d * d / (2.0 * prox.gamma)


def moreau_gradient(cset: ConvexSet, prox: ProxParams, x: np.ndarray) -> np.ndarray:
    """Envelope gradient ``(x - P_K(x)) / gamma``; ``1/gamma``-Lipschitz."""
    x = cset._check_dim(x)
    return (x - cset.project(x)) / prox.gamma
