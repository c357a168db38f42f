"""Refinement forests of simplices and the intersection-number audit.

A Partition is a forest: root simplices cover the domain, and
longest-edge bisection grows children under them.  The leaves at any
moment form the current simplicial partition.  A shared vertex registry
dedups midpoints so valence (the number of leaves containing a point)
can be counted and audited against the bound
(2 e pi / d)^(d/2) / eta_min, where eta_min is the smallest leaf
regularity ratio.

verify_theorem is the end-to-end check: it estimates the solid-angle
fraction of every (leaf, vertex) cone, compares each against the
per-simplex lower bound, sums the fractions around every registry
vertex (they must tile the sphere of directions at interior points),
and compares the observed maximum valence with the theoretical bound.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .cones import (
    MonteCarloConfig,
    cone_at_point,
    max_intersection_bound,
    per_simplex_angle_bound,
    solid_angle_fraction,
)
from .errors import (
    EmptyPartition,
    PointOutsideDomain,
    UnsupportedDimension,
)
from .geometry import (
    MEMBERSHIP_TOL,
    Simplex,
    as_point,
    barycentric_many,
    make_simplex,
    regularity_ratio,
)

# Entropy tags for audit streams, disjoint from the cone-measure tags.
_PAIR_TAG = 303
_SUBSAMPLE_TAG = 404

# Above this many (leaf, vertex) pairs the audit draws a seeded subsample.
AUDIT_PAIR_CAP = 10_000


@dataclass
class Node:
    """One simplex in the forest; children = () marks a leaf."""

    id: int
    parent: int | None
    generation: int
    vertex_ids: tuple[int, ...]
    children: tuple[int, ...] = ()


class Partition:
    """Refinement forest with a deduplicated vertex registry.

    Vertices are merged when they land in the same quantized cell of
    width eps (1e-9 times the root longest edge).  Bisection midpoints
    of a shared edge are computed from identical registry coordinates,
    so they merge bitwise; the tolerance only matters for externally
    supplied points.

    Mutation (adding roots, bisecting) is single-stream; reads may be
    performed concurrently between mutations.
    """

    def __init__(self, d: int, vertex_merge_tol: float):
        if d < 2:
            raise UnsupportedDimension(f"dimension must be >= 2, got {d}")
        if not (vertex_merge_tol > 0):
            raise ValueError("vertex_merge_tol must be positive")
        self.d = d
        self.eps = float(vertex_merge_tol)
        self.nodes: list[Node] = []
        self._coords: list[np.ndarray] = []
        self._cells: dict[tuple, int] = {}
        self._simplices: dict[int, Simplex] = {}

    # ------------------------------------------------------------ registry

    def vertex_id(self, p) -> int:
        """Registry id for p, merging points in the same quantized cell."""
        p = as_point(p, self.d)
        key = tuple(int(c) for c in np.round(p / self.eps))
        hit = self._cells.get(key)
        if hit is not None:
            return hit
        vid = len(self._coords)
        self._coords.append(p.copy())
        self._cells[key] = vid
        return vid

    def vertex_coords(self, vid: int) -> np.ndarray:
        return self._coords[vid]

    @property
    def vertices(self) -> np.ndarray:
        """(n_vertices, d) registry snapshot."""
        return np.array(self._coords)

    @property
    def n_vertices(self) -> int:
        return len(self._coords)

    # ------------------------------------------------------------ structure

    def add_root(self, vertices) -> int:
        """Install a generation-0 simplex; returns its node id."""
        vids = tuple(self.vertex_id(v) for v in np.asarray(vertices, dtype=float))
        node = Node(id=len(self.nodes), parent=None, generation=0, vertex_ids=vids)
        self.nodes.append(node)
        self.simplex(node.id)  # validates nondegeneracy eagerly
        return node.id

    @property
    def roots(self) -> list[int]:
        return [n.id for n in self.nodes if n.parent is None]

    @property
    def leaves(self) -> list[int]:
        return [n.id for n in self.nodes if not n.children]

    def simplex(self, node_id: int) -> Simplex:
        s = self._simplices.get(node_id)
        if s is None:
            node = self.nodes[node_id]
            s = make_simplex([self._coords[v] for v in node.vertex_ids], id=str(node_id))
            self._simplices[node_id] = s
        return s

    def bisect(self, node_id: int) -> tuple[int, int]:
        """Longest-edge bisection of a leaf; returns the child node ids.

        The midpoint of the canonical longest edge (u, w) replaces w in
        the first child and u in the second, so each child keeps one
        endpoint of the split edge.
        """
        node = self.nodes[node_id]
        if node.children:
            raise ValueError(f"node {node_id} is not a leaf")
        s = self.simplex(node_id)
        _, (i, j) = s.longest_edge
        mid = self.vertex_id((s.vertices[i] + s.vertices[j]) / 2.0)
        vids = node.vertex_ids
        first = vids[:j] + (mid,) + vids[j + 1 :]
        second = vids[:i] + (mid,) + vids[i + 1 :]
        ids = []
        for child_vids in (first, second):
            child = Node(
                id=len(self.nodes),
                parent=node_id,
                generation=node.generation + 1,
                vertex_ids=child_vids,
            )
            self.nodes.append(child)
            ids.append(child.id)
        node.children = tuple(ids)
        return ids[0], ids[1]

    def __eq__(self, other):
        if not isinstance(other, Partition):
            return NotImplemented
        return (
            self.d == other.d
            and self.nodes == other.nodes
            and self.n_vertices == other.n_vertices
            and all(np.array_equal(a, b) for a, b in zip(self._coords, other._coords))
        )


def bisect_longest_edge(s: Simplex) -> tuple[Simplex, Simplex]:
    """Standalone longest-edge bisection of a single simplex.

    Children carry ids "<parent>.0" and "<parent>.1" and each has half
    the parent's volume; the first child keeps the first endpoint of the
    split edge.
    """
    _, (i, j) = s.longest_edge
    mid = (s.vertices[i] + s.vertices[j]) / 2.0
    first = s.vertices.copy()
    first[j] = mid
    second = s.vertices.copy()
    second[i] = mid
    return make_simplex(first, id=f"{s.id}.0"), make_simplex(second, id=f"{s.id}.1")


def kuhn_triangulation(d: int) -> Partition:
    """Unit cube split into d! path simplices sharing the main diagonal.

    The simplex of permutation pi walks from the origin to (1, ..., 1)
    adding one coordinate step e_pi(k) at a time; permutations are
    enumerated in lexicographic order so root ids are stable.
    """
    if d < 2:
        raise UnsupportedDimension(f"dimension must be >= 2, got {d}")
    p = Partition(d, vertex_merge_tol=1e-9 * math.sqrt(d))
    for perm in itertools.permutations(range(d)):
        verts = np.zeros((d + 1, d))
        for k, axis in enumerate(perm):
            verts[k + 1] = verts[k]
            verts[k + 1, axis] += 1.0
        p.add_root(verts)
    return p


def partition_from_simplices(simplices: list[Simplex]) -> Partition:
    """Partition whose roots are the given simplices.

    The vertex merge tolerance is set from the largest root edge; the
    caller is responsible for the roots having disjoint interiors.
    """
    if not simplices:
        raise EmptyPartition("at least one root simplex is required")
    h = max(s.longest_edge[0] for s in simplices)
    p = Partition(simplices[0].dimension, vertex_merge_tol=1e-9 * h)
    for s in simplices:
        p.add_root(s.vertices)
    return p


STRATEGIES = ("bisect-all-leaves", "bisect-largest-leaf")


def refine(p: Partition, steps: int, strategy: str = "bisect-all-leaves") -> Partition:
    """Apply a refinement strategy for the given number of rounds.

    bisect-all-leaves: one round bisects every current leaf, advancing
    the whole partition one generation.  bisect-largest-leaf: one round
    bisects the single leaf with the longest edge (ties to the smallest
    node id), which generally leaves the forest non-conforming.
    """
    if steps < 0:
        raise ValueError(f"steps must be >= 0, got {steps}")
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}; expected one of {STRATEGIES}")
    if not p.leaves:
        raise EmptyPartition("partition has no leaves")
    for _ in range(steps):
        if strategy == "bisect-all-leaves":
            for node_id in p.leaves:
                p.bisect(node_id)
        else:
            worst = max(p.leaves, key=lambda i: (p.simplex(i).longest_edge[0], -i))
            p.bisect(worst)
    return p


def min_regularity(p: Partition) -> float:
    """eta_min: the smallest leaf regularity ratio.

    This is the largest eta for which every current leaf S satisfies
    vol(S) >= eta * h(S)^d.
    """
    leaves = p.leaves
    if not leaves:
        raise EmptyPartition("partition has no leaves")
    return min(regularity_ratio(p.simplex(i)) for i in leaves)


def _descend_counts(p: Partition, points: np.ndarray, tol: float) -> np.ndarray:
    """Leaf-membership counts for a (n, d) batch via tree descent."""
    counts = np.zeros(points.shape[0], dtype=int)
    for root in p.roots:
        stack = [(root, np.arange(points.shape[0]))]
        while stack:
            node_id, idx = stack.pop()
            if idx.size == 0:
                continue
            lam = barycentric_many(p.simplex(node_id), points[idx])
            inside = idx[np.all(lam >= -tol, axis=1)]
            if inside.size == 0:
                continue
            node = p.nodes[node_id]
            if not node.children:
                counts[inside] += 1
            else:
                for child in node.children:
                    stack.append((child, inside))
    return counts


def vertex_valence(p: Partition, point, tol: float = MEMBERSHIP_TOL) -> int:
    """Number of leaves whose closure contains the point.

    Membership is geometric (barycentric test with tolerance), so the
    count is correct even for hanging nodes of a non-conforming state.
    """
    pt = as_point(point, p.d)
    if not p.leaves:
        raise EmptyPartition("partition has no leaves")
    counts = _descend_counts(p, pt[None, :], tol)
    if counts[0] == 0:
        # roots tile the domain, so zero leaves means outside it
        raise PointOutsideDomain(f"point {pt.tolist()} is outside the root domain")
    return int(counts[0])


def registry_valences(p: Partition, tol: float = MEMBERSHIP_TOL) -> np.ndarray:
    """Valence of every registry vertex, in registry order."""
    if not p.leaves:
        raise EmptyPartition("partition has no leaves")
    return _descend_counts(p, p.vertices, tol)


def max_valence(p: Partition, tol: float = MEMBERSHIP_TOL) -> tuple[np.ndarray, int]:
    """(witness point, count) maximizing valence over registry vertices.

    For a face-to-face forest the maximum over all points of the domain
    is attained at a vertex: the leaf set containing any point x also
    contains every leaf around the lowest-dimensional face holding x,
    and that face's vertices belong to at least those leaves.
    """
    counts = registry_valences(p, tol)
    k = int(np.argmax(counts))  # first maximal vertex wins
    return p.vertex_coords(k).copy(), int(counts[k])


# -------------------------------------------------------------- the audit


@dataclass(frozen=True)
class VertexCheck:
    """One (leaf, vertex) cone audit row.

    strong_bound uses the leaf's own regularity ratio; uniform_bound
    uses the partition-wide eta_min.  Both must sit below the estimated
    fraction plus 3 standard errors.
    """

    leaf_id: int
    vertex_id: int
    cone_id: str
    fraction: float
    stderr: float
    rho: float
    strong_bound: float
    uniform_bound: float
    passed_strong: bool
    passed_uniform: bool


@dataclass(frozen=True)
class DecompositionCheck:
    """Fraction sum around one registry vertex.

    The tangent cones of the leaves containing a vertex tile the full
    sphere of directions when the vertex is interior to the domain, so
    the fractions must sum to 1; on the boundary they sum to less.
    """

    vertex_id: int
    interior: bool
    valence: int
    fraction_sum: float
    combined_stderr: float
    passed: bool


@dataclass
class TheoremReport:
    d: int
    eta_min: float
    theoretical_bound: float
    max_observed_valence: int
    witness: np.ndarray
    samples_per_cone: int
    seed: int
    total_pairs: int
    audited_pairs: int
    per_vertex_checks: list[VertexCheck] = field(default_factory=list)
    decomposition_checks: list[DecompositionCheck] = field(default_factory=list)
    valence_ok: bool = True

    @property
    def passed(self) -> bool:
        return (
            self.valence_ok
            and all(c.passed_strong for c in self.per_vertex_checks)
            and all(c.passed for c in self.decomposition_checks)
        )


def _boundary_facets(p: Partition) -> list[tuple[int, ...]]:
    """Root facets that appear exactly once (the domain boundary)."""
    seen: dict[frozenset, tuple[int, ...]] = {}
    count: dict[frozenset, int] = {}
    for root in p.roots:
        vids = p.nodes[root].vertex_ids
        for skip in range(len(vids)):
            facet = vids[:skip] + vids[skip + 1 :]
            key = frozenset(facet)
            seen[key] = facet
            count[key] = count.get(key, 0) + 1
    return [seen[k] for k, c in count.items() if c == 1]


def boundary_vertex_mask(p: Partition) -> np.ndarray:
    """True where a registry vertex lies on the domain boundary.

    A vertex is on the boundary iff it lies on some boundary facet of
    the root simplices: within the facet's affine hull (small residual)
    and inside the facet simplex (barycentric coordinates >= -tol).
    """
    pts = p.vertices
    mask = np.zeros(p.n_vertices, dtype=bool)
    tol = max(p.eps, 1e-12)
    for facet in _boundary_facets(p):
        base = p.vertex_coords(facet[0])
        edges = np.stack([p.vertex_coords(v) - base for v in facet[1:]], axis=1)
        pinv = np.linalg.pinv(edges)
        rel = pts - base
        lam = (pinv @ rel.T).T  # (n, d-1) facet coordinates
        residual = np.linalg.norm(rel - lam @ edges.T, axis=1)
        lam0 = 1.0 - lam.sum(axis=1)
        on = (residual <= tol) & (lam0 >= -MEMBERSHIP_TOL) & np.all(lam >= -MEMBERSHIP_TOL, axis=1)
        mask |= on
    return mask


def _pair_config(mc: MonteCarloConfig, leaf_id: int, vertex_id: int) -> MonteCarloConfig:
    """Per-pair sampling config with a seed derived from (seed, pair).

    Each (leaf, vertex) cone gets its own stream, so estimates do not
    depend on audit order and re-runs are byte-identical.
    """
    derived = int(np.random.SeedSequence([mc.seed, _PAIR_TAG, leaf_id, vertex_id]).generate_state(1)[0])
    return MonteCarloConfig(samples=mc.samples, seed=derived, shards=mc.shards)


def verify_theorem(
    p: Partition,
    mc: MonteCarloConfig = MonteCarloConfig(samples=100_000, seed=42, shards=4),
    full_audit: bool = False,
) -> TheoremReport:
    """End-to-end audit of the intersection-number bound.

    Steps: compute eta_min and the theoretical bound N(eta_min, d);
    count valences of all registry vertices; estimate the solid-angle
    fraction of each (leaf, vertex) cone (above AUDIT_PAIR_CAP pairs, a
    seeded uniform subsample is audited instead unless full_audit);
    check each fraction against the per-simplex bound minus 3 stderr;
    and sum fractions around every vertex whose incident cones were all
    estimated (interior sums must hit 1 within 4 combined stderr,
    boundary sums must not exceed 1 by more).
    """
    leaves = p.leaves
    if not leaves:
        raise EmptyPartition("partition has no leaves")
    eta_min = min_regularity(p)
    d = p.d
    bound_n = max_intersection_bound(eta_min, d)
    uniform_bound = per_simplex_angle_bound(eta_min, d)

    valences = registry_valences(p)
    witness_id = int(np.argmax(valences))
    max_val = int(valences[witness_id])

    pairs = [(leaf, vid) for leaf in leaves for vid in p.nodes[leaf].vertex_ids]
    total_pairs = len(pairs)
    if total_pairs > AUDIT_PAIR_CAP and not full_audit:
        rng = np.random.default_rng(np.random.SeedSequence([mc.seed, _SUBSAMPLE_TAG]))
        chosen = rng.choice(total_pairs, size=AUDIT_PAIR_CAP, replace=False)
        pairs = [pairs[i] for i in sorted(chosen)]

    estimates: dict[tuple[int, int], tuple[float, float]] = {}
    checks = []
    for leaf, vid in pairs:
        s = p.simplex(leaf)
        cone = cone_at_point(s, p.vertex_coords(vid))
        est = solid_angle_fraction(cone, _pair_config(mc, leaf, vid))
        rho = regularity_ratio(s)
        strong = per_simplex_angle_bound(rho, d)
        checks.append(
            VertexCheck(
                leaf_id=leaf,
                vertex_id=vid,
                cone_id=est.cone_id,
                fraction=est.fraction,
                stderr=est.stderr,
                rho=rho,
                strong_bound=strong,
                uniform_bound=uniform_bound,
                passed_strong=est.fraction >= strong - 3.0 * est.stderr,
                passed_uniform=est.fraction >= uniform_bound - 3.0 * est.stderr,
            )
        )
        estimates[(leaf, vid)] = (est.fraction, est.stderr)

    # vertex -> leaves whose vertex set contains it; hanging-node
    # incidences (vertex on a leaf's face) are added geometrically below
    incident: dict[int, list[int]] = {}
    for leaf in leaves:
        for vid in p.nodes[leaf].vertex_ids:
            incident.setdefault(vid, []).append(leaf)

    boundary = boundary_vertex_mask(p)
    decomposition = []
    for vid in sorted(incident):
        own = incident[vid]
        if any((leaf, vid) not in estimates for leaf in own):
            continue  # subsampled away; sum would be meaningless
        leaves_at = own
        if valences[vid] != len(own):
            # non-conforming state: the vertex hangs on the face of some
            # leaf it is not a corner of; find them by geometric descent
            leaves_at = [
                leaf
                for leaf in leaves
                if np.all(
                    barycentric_many(p.simplex(leaf), p.vertex_coords(vid)[None, :])
                    >= -MEMBERSHIP_TOL
                )
            ]
        fracs = []
        errs = []
        complete = True
        for leaf in leaves_at:
            got = estimates.get((leaf, vid))
            if got is None:
                if vid in set(p.nodes[leaf].vertex_ids):
                    complete = False
                    break
                cone = cone_at_point(p.simplex(leaf), p.vertex_coords(vid))
                est = solid_angle_fraction(cone, _pair_config(mc, leaf, vid))
                got = (est.fraction, est.stderr)
                estimates[(leaf, vid)] = got
            fracs.append(got[0])
            errs.append(got[1])
        if not complete:
            continue
        total = float(sum(fracs))
        sigma = math.sqrt(sum(e * e for e in errs))
        interior = not bool(boundary[vid])
        if interior:
            ok = abs(total - 1.0) <= 4.0 * sigma
        else:
            ok = total <= 1.0 + 4.0 * sigma
        decomposition.append(
            DecompositionCheck(
                vertex_id=vid,
                interior=interior,
                valence=len(leaves_at),
                fraction_sum=total,
                combined_stderr=sigma,
                passed=ok,
            )
        )

    return TheoremReport(
        d=d,
        eta_min=eta_min,
        theoretical_bound=bound_n,
        max_observed_valence=max_val,
        witness=p.vertex_coords(witness_id).copy(),
        samples_per_cone=mc.samples,
        seed=mc.seed,
        total_pairs=total_pairs,
        audited_pairs=len(pairs),
        per_vertex_checks=checks,
        decomposition_checks=decomposition,
        valence_ok=max_val <= bound_n,
    )
