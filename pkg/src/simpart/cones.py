"""Tangent cones of simplices and their solid-angle measure.

The tangent cone of a simplex S at a point p collects the directions one
can move in from p without leaving S.  Its size is measured as a
fraction of the full sphere of directions, estimated by Monte Carlo.
Two bounds tie the measure to the regularity ratio:

* at any vertex of a simplex with rho(S) >= eta, the solid-angle
  fraction is at least eta * (d / (2 e pi))^(d/2);
* consequently at most (2 e pi / d)^(d/2) / eta cells of an eta-regular
  partition can meet at a point.

Both are computed from one shared base so their product telescopes
exactly.  Estimates come in two flavors drawing from distinct streams:
uniform directions, and Gaussian points whose hit count measures the
integral of exp(-|x - apex|^2) over the cone.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from .errors import InvalidEta, PointOutsideSimplex, UnsupportedDimension
from .geometry import MEMBERSHIP_TOL, Simplex, as_point, barycentric, regular_simplex_ratio

# SeedSequence entropy tags keeping the two estimator streams disjoint.
_DIRECTION_TAG = 101
_GAUSSIAN_TAG = 202


@dataclass(frozen=True)
class MonteCarloConfig:
    """Sampling budget for solid-angle estimates.

    ``samples`` is the total draw count, split across ``shards`` whose
    streams are seeded independently from (seed, tag, shard).  Estimates
    are reproducible for a fixed (seed, shards) pair.
    """

    samples: int = 1_000_000
    seed: int = 42
    shards: int = 4

    def __post_init__(self):
        if self.samples < 1:
            raise ValueError(f"samples must be positive, got {self.samples}")
        if self.shards < 1 or self.shards > self.samples:
            raise ValueError(f"shards must be in [1, samples], got {self.shards}")


@dataclass(frozen=True)
class FractionEstimate:
    """Monte-Carlo solid-angle fraction with its binomial standard error.

    gaussian_integral is the induced value of the integral of
    exp(-|x - apex|^2) over the cone, fraction * pi^(d/2).
    """

    cone_id: str
    fraction: float
    stderr: float
    gaussian_integral: float
    samples: int
    seed: int


@dataclass(frozen=True)
class VertexCone:
    """Tangent cone of a simplex at one of its points.

    kind is "vertex" (p is a vertex; the cone is spanned by the d edges
    leaving it), "face" (p lies on a proper face; the cone is the
    intersection of the half-spaces of the active barycentric
    coordinates), or "full" (p is interior; every direction works).
    Membership tests are homogeneous, so directions never need
    normalizing.
    """

    apex: np.ndarray
    kind: str
    id: str = "cone"
    spans: np.ndarray | None = None  # d x d columns, vertex cones only
    normals: np.ndarray | None = None  # k x d rows, face cones only

    @property
    def dimension(self) -> int:
        return self.apex.shape[0]

    @cached_property
    def _span_lu(self):
        return lu_factor(self.spans, check_finite=False)

    def contains_directions(self, directions: np.ndarray) -> np.ndarray:
        """Boolean mask over an (n, d) array of directions."""
        u = np.asarray(directions, dtype=float)
        if self.kind == "full":
            return np.ones(u.shape[0], dtype=bool)
        if self.kind == "vertex":
            lam = lu_solve(self._span_lu, u.T, check_finite=False)
            return np.all(lam >= 0.0, axis=0)
        return np.all(self.normals @ u.T >= 0.0, axis=0)


def _barycentric_gradients(s: Simplex) -> np.ndarray:
    """(d+1, d) rows of grad lambda_i; row 0 is minus the sum of the rest."""
    grads = lu_solve(s._edge_lu, np.eye(s.dimension), check_finite=False)
    return np.vstack([-grads.sum(axis=0), grads])


def cone_at_point(s: Simplex, p, tol: float = MEMBERSHIP_TOL) -> VertexCone:
    """Tangent cone of s at a point p of s.

    The active set collects barycentric coordinates within tol of zero.
    Empty active set means p is interior (full cone); a full active set
    of size d means p is a vertex; anything between is a face cone.

    Raises PointOutsideSimplex when p is not in s up to tol.
    """
    p = as_point(p, s.dimension)
    lam, inside = barycentric(s, p, tol)
    if not inside:
        raise PointOutsideSimplex(f"point is outside simplex {s.id} (min lambda {lam.min():.3e})")
    active = np.flatnonzero(lam <= tol)
    d = s.dimension
    if active.size == 0:
        return VertexCone(apex=p, kind="full", id=f"{s.id}:int")
    if active.size == d:
        k = int(np.argmax(lam))
        others = [i for i in range(d + 1) if i != k]
        spans = (s.vertices[others] - s.vertices[k]).T
        return VertexCone(apex=s.vertices[k].copy(), kind="vertex", id=f"{s.id}:v{k}", spans=spans)
    normals = _barycentric_gradients(s)[active]
    face = ".".join(str(int(i)) for i in active)
    return VertexCone(apex=p, kind="face", id=f"{s.id}:f{face}", normals=normals)


def _shard_sizes(config: MonteCarloConfig) -> list[int]:
    base, extra = divmod(config.samples, config.shards)
    return [base + (1 if i < extra else 0) for i in range(config.shards)]


def solid_angle_fraction(cone: VertexCone, config: MonteCarloConfig = MonteCarloConfig()) -> FractionEstimate:
    """Fraction of the sphere of directions lying in the cone.

    Standard-normal direction vectors are spherically symmetric, so the
    hit rate estimates the solid-angle fraction directly.
    """
    d = cone.dimension
    hits = 0
    for shard, count in enumerate(_shard_sizes(config)):
        rng = np.random.default_rng(np.random.SeedSequence([config.seed, _DIRECTION_TAG, shard]))
        u = rng.standard_normal((count, d))
        hits += int(cone.contains_directions(u).sum())
    return _estimate(cone, hits, config, d)


def solid_angle_fraction_gaussian(
    cone: VertexCone, config: MonteCarloConfig = MonteCarloConfig()
) -> FractionEstimate:
    """Same fraction, measured through the Gaussian integral.

    Points are drawn from N(apex, I/2), whose density is
    pi^(-d/2) exp(-|x - apex|^2); the hit rate therefore estimates
    pi^(-d/2) times the integral of exp(-|x - apex|^2) over the cone,
    which equals the solid-angle fraction.  A separate stream tag keeps
    the draws disjoint from the direction estimator's.
    """
    d = cone.dimension
    hits = 0
    for shard, count in enumerate(_shard_sizes(config)):
        rng = np.random.default_rng(np.random.SeedSequence([config.seed, _GAUSSIAN_TAG, shard]))
        # offsets x - apex of points x ~ N(apex, I/2)
        offsets = rng.normal(loc=0.0, scale=math.sqrt(0.5), size=(count, d))
        hits += int(cone.contains_directions(offsets).sum())
    return _estimate(cone, hits, config, d)


def _estimate(cone: VertexCone, hits: int, config: MonteCarloConfig, d: int) -> FractionEstimate:
    f = hits / config.samples
    stderr = math.sqrt(f * (1.0 - f) / config.samples)
    return FractionEstimate(
        cone_id=cone.id,
        fraction=f,
        stderr=stderr,
        gaussian_integral=f * math.pi ** (d / 2),
        samples=config.samples,
        seed=config.seed,
    )


def sphere_surface_area(d: int, radius: float = 1.0) -> float:
    """Surface area of the (d-1)-sphere of the given radius in R^d."""
    if d < 2:
        raise UnsupportedDimension(f"dimension must be >= 2, got {d}")
    return 2.0 * math.pi ** (d / 2) / math.gamma(d / 2) * radius ** (d - 1)


def optimal_gaussian_scale(d: int) -> float:
    """Radius maximizing x^d exp(-x^2), namely sqrt(d/2).

    This is where the radial mass of the cone's Gaussian integral
    concentrates; the lower bound below evaluates the integrand there.
    """
    if d < 2:
        raise UnsupportedDimension(f"dimension must be >= 2, got {d}")
    return math.sqrt(d / 2.0)


def _bound_base(d: int) -> float:
    """(2 e pi / d)^(d/2), the conversion factor both bounds share."""
    if d < 2:
        raise UnsupportedDimension(f"dimension must be >= 2, got {d}")
    return (2.0 * math.e * math.pi / d) ** (d / 2)


def _check_threshold(value: float, d: int, name: str) -> None:
    if not (math.isfinite(value) and value > 0.0):
        raise InvalidEta(f"{name} must be positive and finite, got {value}")
    top = regular_simplex_ratio(d)
    if value > top * (1.0 + 1e-12):
        warnings.warn(
            f"{name}={value:.6g} exceeds the regular-simplex ratio {top:.6g} in d={d}; "
            "no simplex attains it",
            stacklevel=3,
        )


def per_simplex_angle_bound(rho: float, d: int) -> float:
    """Lower bound on the solid-angle fraction at any vertex.

    A simplex with regularity ratio rho subtends at least
    rho / (2 e pi / d)^(d/2) of the sphere of directions at each of its
    vertices.
    """
    base = _bound_base(d)
    _check_threshold(rho, d, "rho")
    return rho / base


def max_intersection_bound(eta: float, d: int) -> float:
    """Upper bound on how many eta-regular cells can share a point.

    In an eta-regular partition, no point of the domain lies in more
    than (2 e pi / d)^(d/2) / eta cells.  The bound is the reciprocal of
    per_simplex_angle_bound(eta, d), exactly, since the cones at a
    shared vertex pack into the full sphere of directions.
    """
    base = _bound_base(d)
    _check_threshold(eta, d, "eta")
    return base / eta
