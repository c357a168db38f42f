"""Metric quantities of a single simplex.

A simplex in dimension d >= 2 is stored as a (d+1, d) array of vertex
coordinates.  The module provides the exact quantities (volume, longest
edge, regularity ratio, barycentric coordinates) and a sampled diameter
oracle used to confirm that the longest edge of a simplex equals its
diameter.

The regularity ratio rho(S) = vol(S) / h(S)^d, with h(S) the longest
edge length, is the shape measure everything downstream is built on:
a partition is eta-regular when every cell satisfies rho(S) >= eta.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from .errors import (
    DegenerateSimplex,
    DimensionMismatch,
    InvalidPoint,
    UnsupportedDimension,
)

# A point is a plain 1-D float array of length d; barycentric coordinates
# are a 1-D float array of length d+1 summing to 1.
Point = np.ndarray
BarycentricCoords = np.ndarray

# Relative degeneracy threshold: a simplex is rejected when
# vol(S) <= VOLUME_EPS_REL * h(S)^d.  Relative to h^d so the check is
# invariant under uniform scaling.
VOLUME_EPS_REL = 1e-12

# Default tolerance on barycentric coordinates for membership tests.
MEMBERSHIP_TOL = 1e-9


def as_point(p, d: int | None = None) -> Point:
    """Coerce ``p`` to a validated 1-D float64 coordinate array."""
    arr = np.asarray(p, dtype=float)
    if arr.ndim != 1:
        raise DimensionMismatch(f"expected a 1-D coordinate sequence, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidPoint("coordinates must be finite")
    if d is not None and arr.shape[0] != d:
        raise DimensionMismatch(f"expected dimension {d}, got {arr.shape[0]}")
    return arr


@dataclass(frozen=True)
class Simplex:
    """Immutable simplex: d+1 vertices in R^d plus an opaque id.

    Construct through :func:`make_simplex`, which validates dimensions
    and nondegeneracy.  Derived quantities are cached on first use; the
    vertex array is marked read-only so instances are safe to share
    between workers.
    """

    vertices: np.ndarray
    id: str = field(default="S", compare=False)

    @property
    def dimension(self) -> int:
        return self.vertices.shape[1]

    @cached_property
    def edge_matrix(self) -> np.ndarray:
        """d x d matrix whose columns are v_i - v_0 for i = 1..d."""
        return (self.vertices[1:] - self.vertices[0]).T

    @cached_property
    def _edge_lu(self):
        return lu_factor(self.edge_matrix, check_finite=False)

    @cached_property
    def volume(self) -> float:
        """|det(edge matrix)| / d!  (LU with partial pivoting)."""
        d = self.dimension
        return abs(float(np.linalg.det(self.edge_matrix))) / math.factorial(d)

    @cached_property
    def longest_edge(self) -> tuple[float, tuple[int, int]]:
        """(length, (i, j)) of the longest edge.

        Exact ties are broken by the lexicographically smallest vertex
        index pair so refinement is reproducible.  Lengths come from
        per-pair ``np.linalg.norm`` calls; every other distance in the
        package uses the same call so comparisons against h are bitwise
        consistent.
        """
        verts = self.vertices
        n = verts.shape[0]
        best = -1.0
        pair = (0, 1)
        for i in range(n - 1):
            for j in range(i + 1, n):
                length = float(np.linalg.norm(verts[i] - verts[j]))
                if length > best:
                    best = length
                    pair = (i, j)
        return best, pair

    @cached_property
    def centroid(self) -> Point:
        return self.vertices.mean(axis=0)


def make_simplex(vertices, id: str = "S") -> Simplex:
    """Validate and build a :class:`Simplex`.

    Parameters
    ----------
    vertices : sequence of d+1 points, each of dimension d >= 2.
    id : opaque identifier carried through serialization.

    Raises
    ------
    DimensionMismatch : point dimensions disagree or the count is not d+1.
    UnsupportedDimension : ambient dimension below 2.
    InvalidPoint : NaN or infinite coordinate.
    DegenerateSimplex : volume at or below the relative threshold.
    """
    try:
        arr = np.asarray(vertices, dtype=float)
    except ValueError as exc:
        raise DimensionMismatch("vertex dimensions disagree") from exc
    if arr.ndim != 2:
        raise DimensionMismatch(f"expected a 2-D vertex array, got shape {arr.shape}")
    n, d = arr.shape
    if n != d + 1:
        raise DimensionMismatch(f"need d+1 vertices of dimension d, got {n} of dimension {d}")
    if d < 2:
        raise UnsupportedDimension(f"dimension must be >= 2, got {d}")
    if not np.all(np.isfinite(arr)):
        raise InvalidPoint("vertex coordinates must be finite")
    arr = arr.copy()
    arr.flags.writeable = False
    s = Simplex(vertices=arr, id=id)
    h, _ = s.longest_edge
    if s.volume <= VOLUME_EPS_REL * h**d:
        raise DegenerateSimplex(
            f"volume {s.volume:.3e} is degenerate relative to h^d = {h**d:.3e}"
        )
    return s


def volume(s: Simplex) -> float:
    """Volume of the simplex, |det(E)| / d!."""
    return s.volume


def longest_edge(s: Simplex) -> tuple[float, tuple[int, int]]:
    """Length and canonical vertex-index pair of the longest edge."""
    return s.longest_edge


def regularity_ratio(s: Simplex) -> float:
    """Shape ratio rho(S) = vol(S) / h(S)^d.

    Invariant under translation, rotation, reflection and uniform
    scaling; tends to 0 as the simplex flattens toward a hyperplane.
    """
    h, _ = s.longest_edge
    return s.volume / h**s.dimension


def regular_simplex_ratio(d: int) -> float:
    """rho of the regular simplex: sqrt(d+1) / (d! * 2^(d/2)).

    No d-simplex has a larger regularity ratio.
    """
    if d < 2:
        raise UnsupportedDimension(f"dimension must be >= 2, got {d}")
    return math.sqrt(d + 1) / (math.factorial(d) * 2 ** (d / 2))


def barycentric(s: Simplex, p, tol: float = MEMBERSHIP_TOL) -> tuple[BarycentricCoords, bool]:
    """Barycentric coordinates of ``p`` and a membership flag.

    Solves p = sum_i lambda_i v_i with sum_i lambda_i = 1 via the cached
    LU factorization of the edge matrix.  ``inside`` is true when every
    coordinate is >= -tol.
    """
    p = as_point(p, s.dimension)
    lam_rest = lu_solve(s._edge_lu, p - s.vertices[0], check_finite=False)
    lam0 = 1.0 - float(lam_rest.sum())
    coords = np.concatenate(([lam0], lam_rest))
    inside = bool(np.all(coords >= -tol))
    return coords, inside


def barycentric_many(s: Simplex, points: np.ndarray) -> np.ndarray:
    """Barycentric coordinates for a (k, d) batch of points, shape (k, d+1)."""
    pts = np.asarray(points, dtype=float)
    lam_rest = lu_solve(s._edge_lu, (pts - s.vertices[0]).T, check_finite=False)
    lam0 = 1.0 - lam_rest.sum(axis=0)
    return np.column_stack([lam0, lam_rest.T])


def contains(s: Simplex, p, tol: float = MEMBERSHIP_TOL) -> bool:
    """Membership test via barycentric coordinates."""
    return barycentric(s, p, tol)[1]


def sample_uniform(s: Simplex, n: int, rng: np.random.Generator) -> np.ndarray:
    """Draw n points uniformly from the simplex.

    Uses symmetric Dirichlet(1, ..., 1) barycentric weights, the standard
    uniform law on a simplex.
    """
    weights = rng.dirichlet(np.ones(s.dimension + 1), size=n)
    return weights @ s.vertices


def max_pairwise_distance(points: np.ndarray) -> float:
    """Exact maximum pairwise Euclidean distance of a finite point set.

    The value returned is the maximum over pairs of
    ``np.linalg.norm(points[i] - points[j])``, bitwise, with two layers
    of acceleration that cannot change it:

    * centroid-ball pruning: if lb is a known pairwise distance, any
      pair (x, y) with |x - y| >= lb has both |x - c| and |y - c| at
      least lb - rmax (since |x - y| <= |x - c| + rmax), so points
      strictly inside that radius can be discarded;
    * a blocked squared-distance scan over the survivors locates every
      pair within a small absolute margin of the squared maximum, and
      only those near-ties are re-evaluated with the canonical per-pair
      norm call.
    """
    pts = np.asarray(points, dtype=float)
    n = pts.shape[0]
    if n < 2:
        raise ValueError("need at least two points")
    c = pts.mean(axis=0)
    centered = pts - c
    radii = np.linalg.norm(centered, axis=1)
    rmax = float(radii.max())

    # farthest-point sweep gives the pruning lower bound; shaved by a
    # scale-relative hair so float dust cannot over-prune
    a = int(np.argmax(radii))
    b = int(np.argmax(np.linalg.norm(pts - pts[a], axis=1)))
    lb = float(np.linalg.norm(pts[a] - pts[b]))
    e = int(np.argmax(np.linalg.norm(pts - pts[b], axis=1)))
    lb = max(lb, float(np.linalg.norm(pts[b] - pts[e])))

    keep = np.flatnonzero(radii >= lb - rmax - 1e-9 * rmax)
    cand = centered[keep]
    m = cand.shape[0]

    # Gram-identity squared distances on centered coordinates: absolute
    # error is a few ulps of rmax^2, far below the margin used here
    sq = np.einsum("ij,ij->i", cand, cand)
    margin = 1e-9 * rmax * rmax
    best_d2 = -1.0
    rows = []
    block = 256
    for i0 in range(0, m, block):
        i1 = min(i0 + block, m)
        d2 = sq[i0:i1, None] + sq[None, :] - 2.0 * (cand[i0:i1] @ cand.T)
        rows.append(d2.max(axis=1))
        best_d2 = max(best_d2, float(d2.max()))
    row_max = np.concatenate(rows)

    best = 0.0
    for i in np.flatnonzero(row_max >= best_d2 - margin):
        d2_row = sq[i] + sq - 2.0 * (cand @ cand[i])
        for j in np.flatnonzero(d2_row >= best_d2 - margin):
            if j == i:
                continue
            val = float(np.linalg.norm(pts[keep[i]] - pts[keep[j]]))
            if val > best:
                best = val
    return best


def diameter_oracle(s: Simplex, samples: int, seed: int) -> float:
    """Sampled diameter of the simplex.

    Maximum pairwise distance over ``samples`` uniform points from S,
    with the vertices always included in the point set, so the result is
    never below the longest edge.  Deterministic for a fixed seed.
    """
    if samples < 2:
        raise ValueError("samples must be >= 2")
    rng = np.random.default_rng(seed)
    pts = np.vstack([s.vertices, sample_uniform(s, samples, rng)])
    return max_pairwise_distance(pts)


def canonical_simplex(kind: str, d: int, id: str | None = None) -> Simplex:
    """Reference simplices used as fixtures and partition seeds.

    ``unit-corner``: vertices {0, e_1, ..., e_d}.
    ``regular``: all edges of length 1, centered at the origin (Helmert
    embedding of the regular simplex).
    """
    if d < 2:
        raise UnsupportedDimension(f"dimension must be >= 2, got {d}")
    if kind == "unit-corner":
        verts = np.vstack([np.zeros(d), np.eye(d)])
    elif kind == "regular":
        # Orthonormal rows spanning the hyperplane sum(x) = 0 in R^(d+1);
        # the columns, scaled by 1/sqrt(2), are unit-edge vertices.
        helmert = np.zeros((d, d + 1))
        for k in range(1, d + 1):
            norm = math.sqrt(k * (k + 1))
            helmert[k - 1, :k] = 1.0 / norm
            helmert[k - 1, k] = -k / norm
        verts = helmert.T / math.sqrt(2.0)
    else:
        raise ValueError(f"unknown canonical simplex kind: {kind!r}")
    return make_simplex(verts, id=id if id is not None else f"{kind}-d{d}")
