import math

import numpy as np
import pytest

import simpart.partition as partition_mod
from simpart.cones import MonteCarloConfig, max_intersection_bound
from simpart.errors import EmptyPartition, PointOutsideDomain, UnsupportedDimension
from simpart.geometry import (
    canonical_simplex,
    longest_edge,
    make_simplex,
    regularity_ratio,
    volume,
)
from simpart.partition import (
    Partition,
    bisect_longest_edge,
    boundary_vertex_mask,
    kuhn_triangulation,
    max_valence,
    min_regularity,
    partition_from_simplices,
    refine,
    registry_valences,
    verify_theorem,
    vertex_valence,
)

from .oracles import flat_scan_count
from .support import random_simplex


def leaf_vertex_sets(p):
    return {frozenset(map(tuple, p.simplex(i).vertices.tolist())) for i in p.leaves}


# ------------------------------------------------------------ construction


def test_kuhn_2d_roots():
    p = kuhn_triangulation(2)
    assert len(p.roots) == 2 and p.leaves == p.roots
    expected = {
        frozenset({(0.0, 0.0), (1.0, 0.0), (1.0, 1.0)}),
        frozenset({(0.0, 0.0), (0.0, 1.0), (1.0, 1.0)}),
    }
    assert leaf_vertex_sets(p) == expected


def test_kuhn_volumes_and_diagonal():
    for d in (2, 3, 4):
        p = kuhn_triangulation(d)
        assert len(p.roots) == math.factorial(d)
        vols = [volume(p.simplex(i)) for i in p.roots]
        assert all(v == pytest.approx(1.0 / math.factorial(d), rel=1e-12) for v in vols)
        assert sum(vols) == pytest.approx(1.0, rel=1e-12)
        # every root carries the main diagonal's endpoints
        origin, far = p.vertex_id(np.zeros(d)), p.vertex_id(np.ones(d))
        for i in p.roots:
            vids = p.nodes[i].vertex_ids
            assert vids[0] == origin and vids[-1] == far


def test_kuhn_rejects_dimension_below_two():
    with pytest.raises(UnsupportedDimension):
        kuhn_triangulation(1)


def test_registry_dedup_across_roots():
    # d! roots share the cube corners; the registry holds each corner once
    p = kuhn_triangulation(3)
    assert p.n_vertices == 8


# ------------------------------------------------------------- bisection


def test_bisect_unit_right_triangle():
    s = make_simplex([[0, 0], [1, 0], [0, 1]])
    c1, c2 = bisect_longest_edge(s)
    assert set(map(tuple, c1.vertices.tolist())) == {(0.0, 0.0), (1.0, 0.0), (0.5, 0.5)}
    assert set(map(tuple, c2.vertices.tolist())) == {(0.0, 0.0), (0.0, 1.0), (0.5, 0.5)}
    assert volume(c1) == pytest.approx(0.25, rel=1e-14)
    assert volume(c2) == pytest.approx(0.25, rel=1e-14)


def test_bisect_equilateral_gives_right_triangles():
    s = canonical_simplex("regular", 2)
    c1, c2 = bisect_longest_edge(s)
    for c in (c1, c2):
        assert volume(c) == pytest.approx(math.sqrt(3) / 8, rel=1e-12)
        # one interior angle is a right angle
        angles = []
        for k in range(3):
            a, b = [c.vertices[i] - c.vertices[k] for i in range(3) if i != k]
            angles.append(float(a @ b) / (np.linalg.norm(a) * np.linalg.norm(b)))
        assert min(abs(x) for x in angles) < 1e-12


def test_bisect_halves_volume_everywhere():
    rng = np.random.default_rng(3001)
    for _ in range(40):
        d = int(rng.integers(2, 6))
        s = random_simplex(d, rng)
        c1, c2 = bisect_longest_edge(s)
        assert volume(c1) == pytest.approx(volume(s) / 2, rel=1e-9)
        assert volume(c2) == pytest.approx(volume(s) / 2, rel=1e-9)
        assert volume(c1) + volume(c2) == pytest.approx(volume(s), rel=1e-9)
        assert longest_edge(c1)[0] <= longest_edge(s)[0] + 1e-12
        assert longest_edge(c2)[0] <= longest_edge(s)[0] + 1e-12
        assert c1.id == f"{s.id}.0" and c2.id == f"{s.id}.1"


def test_partition_bisect_requires_leaf():
    p = kuhn_triangulation(2)
    p.bisect(0)
    with pytest.raises(ValueError):
        p.bisect(0)


def test_bisection_midpoints_merge_in_registry():
    # the two kuhn(2) roots share the diagonal; one uniform round creates
    # its midpoint twice, which must collapse to a single registry entry
    p = refine(kuhn_triangulation(2), 1)
    assert p.n_vertices == 5
    assert len(p.leaves) == 4


# ------------------------------------------------------------- refinement


def test_refine_uniform_counts():
    for k in (1, 2, 5):
        p = refine(kuhn_triangulation(2), k)
        assert len(p.leaves) == 2 ** (k + 1)
        total = sum(volume(p.simplex(i)) for i in p.leaves)
        assert total == pytest.approx(1.0, rel=1e-9)


def test_refine_zero_steps_is_identity():
    p = kuhn_triangulation(3)
    before = [(n.id, n.parent, n.generation, n.vertex_ids, n.children) for n in p.nodes]
    refine(p, 0)
    after = [(n.id, n.parent, n.generation, n.vertex_ids, n.children) for n in p.nodes]
    assert before == after


def test_refine_validates_arguments():
    p = kuhn_triangulation(2)
    with pytest.raises(ValueError):
        refine(p, -1)
    with pytest.raises(ValueError):
        refine(p, 1, strategy="delaunay")


def test_refine_largest_leaf_targets_longest_edge():
    p = kuhn_triangulation(2)
    refine(p, 1, strategy="bisect-largest-leaf")
    # both roots tie at h = sqrt(2); the smaller node id (0) splits first
    assert p.nodes[0].children != ()
    assert p.nodes[1].children == ()
    assert len(p.leaves) == 3
    refine(p, 3, strategy="bisect-largest-leaf")
    assert len(p.leaves) == 6
    hs = [longest_edge(p.simplex(i))[0] for i in p.leaves]
    # no remaining leaf is longer than any leaf that was split
    split_hs = [longest_edge(p.simplex(n.id))[0] for n in p.nodes if n.children]
    assert max(hs) <= min(split_hs) + 1e-12


def test_generations_increment():
    p = refine(kuhn_triangulation(2), 3)
    for n in p.nodes:
        if n.parent is not None:
            assert n.generation == p.nodes[n.parent].generation + 1
    assert all(p.nodes[i].generation == 3 for i in p.leaves)


def test_child_volumes_tile_parent():
    p = refine(kuhn_triangulation(3), 3)
    for n in p.nodes:
        if n.children:
            parent_vol = volume(p.simplex(n.id))
            child_vol = sum(volume(p.simplex(c)) for c in n.children)
            assert child_vol == pytest.approx(parent_vol, rel=1e-9)


# ------------------------------------------------------------- regularity


def test_min_regularity_single_equilateral():
    p = partition_from_simplices([canonical_simplex("regular", 2)])
    assert min_regularity(p) == pytest.approx(math.sqrt(3) / 4, rel=1e-12)


def test_min_regularity_kuhn2_is_quarter():
    assert min_regularity(kuhn_triangulation(2)) == pytest.approx(0.25, rel=1e-12)
    # the 2D family is closed under bisection: every descendant is again
    # a right isosceles triangle, so eta_min never drifts
    p = refine(kuhn_triangulation(2), 10)
    assert min_regularity(p) == pytest.approx(0.25, rel=1e-12)


def test_min_regularity_kuhn3_cycles_with_period_three():
    # three similarity classes rotate under uniform bisection; the
    # values below are regression constants measured from the ratios
    expected = {
        0: 0.032075014954979213,
        1: 0.029462782549439473,
        2: 0.041666666666666664,
    }
    for rounds in range(7):
        p = refine(kuhn_triangulation(3), rounds)
        assert min_regularity(p) == pytest.approx(expected[rounds % 3], rel=1e-9)


def test_min_regularity_empty():
    p = Partition(2, vertex_merge_tol=1e-9)
    with pytest.raises(EmptyPartition):
        min_regularity(p)


# ---------------------------------------------------------------- valence


def test_vertex_valence_kuhn2_examples():
    p = kuhn_triangulation(2)
    assert vertex_valence(p, [1.0, 1.0]) == 2
    assert vertex_valence(p, [0.75, 0.25]) == 1
    assert vertex_valence(p, [1.0, 0.0]) == 1
    with pytest.raises(PointOutsideDomain):
        vertex_valence(p, [1.5, 0.5])


def test_vertex_valence_kuhn3_diagonal():
    p = kuhn_triangulation(3)
    assert vertex_valence(p, [0.5, 0.5, 0.5]) == 6


def test_valence_matches_flat_scan():
    rng = np.random.default_rng(3002)
    partitions = [
        refine(kuhn_triangulation(2), 4),
        refine(kuhn_triangulation(2), 25, strategy="bisect-largest-leaf"),
        refine(kuhn_triangulation(3), 2),
    ]
    for p in partitions:
        leaf_sets = [p.simplex(i).vertices for i in p.leaves]
        queries = rng.random((100, p.d))
        for q in queries:
            assert vertex_valence(p, q) == flat_scan_count(q, leaf_sets)
        vals = registry_valences(p)
        for vid in range(p.n_vertices):
            assert vals[vid] == flat_scan_count(p.vertex_coords(vid), leaf_sets)


def test_max_valence_witnesses():
    p2 = kuhn_triangulation(2)
    w, c = max_valence(p2)
    assert c == 2 and (np.allclose(w, [0, 0]) or np.allclose(w, [1, 1]))
    p3 = kuhn_triangulation(3)
    w, c = max_valence(p3)
    assert c == 6 and (np.allclose(w, np.zeros(3)) or np.allclose(w, np.ones(3)))


def test_max_valence_matches_brute_force_after_refinement():
    p = refine(kuhn_triangulation(2), 8)
    leaf_sets = [p.simplex(i).vertices for i in p.leaves]
    _, count = max_valence(p)
    brute = max(flat_scan_count(p.vertex_coords(v), leaf_sets) for v in range(p.n_vertices))
    assert count == brute == 8


def test_valence_respects_theorem_bound():
    for p in (
        refine(kuhn_triangulation(2), 9),
        refine(kuhn_triangulation(3), 5),
        refine(kuhn_triangulation(2), 40, strategy="bisect-largest-leaf"),
    ):
        _, count = max_valence(p)
        assert count <= max_intersection_bound(min_regularity(p), p.d)


# --------------------------------------------------------------- boundary


def test_boundary_mask_matches_cube_faces():
    p = refine(kuhn_triangulation(2), 6)
    mask = boundary_vertex_mask(p)
    coords = p.vertices
    on_face = np.any((np.abs(coords) < 1e-12) | (np.abs(coords - 1.0) < 1e-12), axis=1)
    assert np.array_equal(mask, on_face)


def test_boundary_mask_single_simplex():
    p = partition_from_simplices([canonical_simplex("regular", 2)])
    assert boundary_vertex_mask(p).all()


# ------------------------------------------------------------ verification

AUDIT = MonteCarloConfig(samples=20_000, seed=42, shards=2)


def test_verify_theorem_kuhn2():
    report = verify_theorem(kuhn_triangulation(2), AUDIT)
    assert report.passed
    assert report.eta_min == pytest.approx(0.25, rel=1e-12)
    assert report.theoretical_bound == pytest.approx(34.15893689069427, rel=1e-9)
    assert report.max_observed_valence == 2
    assert report.total_pairs == report.audited_pairs == 6
    # the two diagonal endpoints are boundary vertices with sums is 0.25+0.25
    sums = {c.vertex_id: c for c in report.decomposition_checks}
    assert len(sums) == 4
    assert all(not c.interior for c in report.decomposition_checks)


def test_verify_theorem_refined_kuhn2_decomposition():
    p = refine(kuhn_triangulation(2), 4)
    report = verify_theorem(p, AUDIT)
    assert report.passed
    interior = [c for c in report.decomposition_checks if c.interior]
    assert interior, "refined grid must have interior vertices"
    for c in interior:
        assert abs(c.fraction_sum - 1.0) <= 4 * c.combined_stderr
    boundary = [c for c in report.decomposition_checks if not c.interior]
    for c in boundary:
        assert c.fraction_sum <= 1.0 + 4 * c.combined_stderr
        # flat boundary points sit at half coverage or below (corners)
        assert c.fraction_sum < 0.75


def test_verify_theorem_single_equilateral():
    p = partition_from_simplices([canonical_simplex("regular", 2)])
    report = verify_theorem(p, AUDIT)
    assert report.passed
    for check in report.per_vertex_checks:
        assert check.fraction == pytest.approx(1.0 / 6.0, abs=4 * check.stderr)
        assert check.strong_bound == pytest.approx(0.05070564148735936, rel=1e-12)


def test_verify_theorem_nonconforming_partition():
    # hanging vertices force face-cone contributions into the sums
    p = refine(kuhn_triangulation(2), 11, strategy="bisect-largest-leaf")
    corner_count = {}
    for leaf in p.leaves:
        for vid in p.nodes[leaf].vertex_ids:
            corner_count[vid] = corner_count.get(vid, 0) + 1
    vals = registry_valences(p)
    hanging = [v for v in corner_count if vals[v] != corner_count[v]]
    assert hanging, "expected at least one hanging vertex"
    report = verify_theorem(p, AUDIT)
    assert report.passed
    checked = {c.vertex_id: c for c in report.decomposition_checks}
    assert any(v in checked for v in hanging)


def test_verify_theorem_is_deterministic():
    p = refine(kuhn_triangulation(2), 2)
    a = verify_theorem(p, AUDIT)
    b = verify_theorem(p, AUDIT)
    assert a.per_vertex_checks == b.per_vertex_checks
    assert a.decomposition_checks == b.decomposition_checks
    assert a.eta_min == b.eta_min and a.max_observed_valence == b.max_observed_valence


def test_verify_theorem_subsample_cap(monkeypatch):
    monkeypatch.setattr(partition_mod, "AUDIT_PAIR_CAP", 10)
    p = refine(kuhn_triangulation(2), 3)  # 16 leaves, 48 pairs
    small = MonteCarloConfig(samples=2_000, seed=1, shards=1)
    capped = verify_theorem(p, small)
    assert capped.total_pairs == 48 and capped.audited_pairs == 10
    full = verify_theorem(p, small, full_audit=True)
    assert full.audited_pairs == 48
    # estimates are pair-seeded, so overlapping pairs agree across runs
    by_pair = {(c.leaf_id, c.vertex_id): c.fraction for c in full.per_vertex_checks}
    for c in capped.per_vertex_checks:
        assert by_pair[(c.leaf_id, c.vertex_id)] == c.fraction


def test_verify_theorem_empty():
    with pytest.raises(EmptyPartition):
        verify_theorem(Partition(2, vertex_merge_tol=1e-9), AUDIT)
