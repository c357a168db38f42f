"""Simplicial branch-and-bound for Lipschitz objectives.

The search maintains a refinement forest over the root simplices.  Each
leaf carries a lower bound min(f at vertices) - L * h: since no two
points of a simplex are farther apart than its longest edge, an
L-Lipschitz f cannot dip below that anywhere on the leaf.  The leaf
with the smallest bound is bisected, its midpoint evaluated, and the
bounds of the children inherit the parent's (they can only be tighter),
so the global lower bound climbs monotonically toward the incumbent.

Everything is deterministic: vertex evaluations are cached by registry
id, heap ties break on node id, and no randomness is involved.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ArityError, BudgetTooSmall, EmptyPartition
from .geometry import regularity_ratio
from .partition import Partition


@dataclass(frozen=True)
class Objective:
    """A deterministic objective with a user-asserted Lipschitz constant."""

    name: str
    evaluate: Callable[[np.ndarray], float]
    lipschitz_constant: float


def simplex_lower_bound(vertex_values, lipschitz_constant: float, h: float, d: int | None = None) -> float:
    """min(vertex values) - L * h, valid on the whole simplex.

    Any point of the simplex is within h of the vertex attaining the
    minimum, so an L-Lipschitz objective stays above this everywhere.
    When d is given, the value count is checked against d + 1.
    """
    values = list(vertex_values)
    if d is not None and len(values) != d + 1:
        raise ArityError(f"need {d + 1} vertex values for d={d}, got {len(values)}")
    if lipschitz_constant < 0:
        raise ValueError(f"Lipschitz constant must be >= 0, got {lipschitz_constant}")
    if not (h > 0):
        raise ValueError(f"h must be positive, got {h}")
    return min(values) - lipschitz_constant * h


@dataclass(frozen=True)
class TraceRow:
    """State at the top of one loop visit.

    node_id is the queue head (the leaf holding the global lower bound);
    on all but the last row it is the node bisected at that iteration.
    eta_min tracks the worst regularity ratio over every simplex created
    so far, roots included.
    """

    iteration: int
    node_id: int
    lower_bound: float
    incumbent: float
    gap: float
    eta_min: float


@dataclass
class OptimizeResult:
    point: np.ndarray
    value: float
    gap: float
    lower_bound: float
    leaves_explored: int
    evaluations: int
    eta_min: float
    trace: list[TraceRow] = field(default_factory=list)
    partition: Partition | None = None


def optimize(objective: Objective, p: Partition, budget: int, tol: float) -> OptimizeResult:
    """Branch-and-bound minimization of the objective over the partition.

    Pops the leaf with the smallest lower bound, bisects its longest
    edge, evaluates the midpoint (registry-cached, so a midpoint shared
    with an already-split neighbor costs nothing), and repeats until the
    gap incumbent - global_lower_bound drops to tol or the next
    evaluation would exceed the budget.  The partition is refined in
    place and returned inside the result.

    budget counts objective evaluations and must cover d + 1 values per
    root; dedup across shared root vertices can leave it underused.
    """
    roots = p.roots
    if not roots:
        raise EmptyPartition("partition has no roots")
    if p.leaves != roots:
        raise ValueError("optimize expects an unrefined partition")
    required = (p.d + 1) * len(roots)
    if budget < required:
        raise BudgetTooSmall(f"budget {budget} cannot cover {required} root vertex evaluations")
    if not (tol > 0):
        raise ValueError(f"tol must be positive, got {tol}")

    f = objective.evaluate
    lip = objective.lipschitz_constant
    values: dict[int, float] = {}
    evaluations = 0

    def value_at(vid: int) -> float:
        nonlocal evaluations
        v = values.get(vid)
        if v is None:
            v = float(f(p.vertex_coords(vid)))
            if not math.isfinite(v):
                raise ValueError(f"objective returned non-finite value {v} at vertex {vid}")
            values[vid] = v
            evaluations += 1
        return v

    best_vid = -1
    best_val = math.inf

    def consider(vid: int) -> None:
        nonlocal best_vid, best_val
        v = value_at(vid)
        if v < best_val or (v == best_val and vid < best_vid):
            best_val = v
            best_vid = vid

    def raw_bound(node_id: int) -> float:
        s = p.simplex(node_id)
        vals = [value_at(v) for v in p.nodes[node_id].vertex_ids]
        return simplex_lower_bound(vals, lip, s.longest_edge[0], p.d)

    eta_min = math.inf
    heap: list[tuple[float, int]] = []
    for root in roots:
        for vid in p.nodes[root].vertex_ids:
            consider(vid)
        eta_min = min(eta_min, regularity_ratio(p.simplex(root)))
        heapq.heappush(heap, (raw_bound(root), root))

    trace: list[TraceRow] = []
    pops = 0
    iteration = 0
    while True:
        lb, node_id = heap[0]
        gap = best_val - lb
        trace.append(
            TraceRow(
                iteration=iteration,
                node_id=node_id,
                lower_bound=lb,
                incumbent=best_val,
                gap=gap,
                eta_min=eta_min,
            )
        )
        if gap <= tol or evaluations >= budget:
            break
        heapq.heappop(heap)
        left, right = p.bisect(node_id)
        pops += 1
        for child in (left, right):
            for vid in p.nodes[child].vertex_ids:
                consider(vid)
            eta_min = min(eta_min, regularity_ratio(p.simplex(child)))
            # inherited bound: the child region is inside the parent's,
            # so the parent's bound still holds and only improves
            heapq.heappush(heap, (max(lb, raw_bound(child)), child))
        iteration += 1

    return OptimizeResult(
        point=p.vertex_coords(best_vid).copy(),
        value=best_val,
        gap=trace[-1].gap,
        lower_bound=trace[-1].lower_bound,
        leaves_explored=pops,
        evaluations=evaluations,
        eta_min=eta_min,
        trace=trace,
        partition=p,
    )


def _sphere(d: int) -> Objective:
    """|x|^2; the gradient norm on the unit cube peaks at 2 sqrt(d)."""
    return Objective("sphere", lambda x: float(x @ x), 2.0 * math.sqrt(d))


def _shifted_sphere(d: int) -> Objective:
    """|x - 0.3 * ones|^2 with minimum 0 inside the cube.

    The declared constant 4 dominates the true one (2 * 0.7 * sqrt(d))
    for every d up to 8, the sizes this engine targets.
    """
    center = np.full(d, 0.3)
    return Objective("shifted-sphere", lambda x: float(np.sum((x - center) ** 2)), 4.0)


def _linear(d: int) -> Objective:
    """Sum of coordinates; Lipschitz constant sqrt(d), attained anywhere."""
    return Objective("linear", lambda x: float(np.sum(x)), math.sqrt(d))


def _constant(d: int) -> Objective:
    return Objective("constant", lambda x: 7.0, 0.0)


OBJECTIVES: dict[str, Callable[[int], Objective]] = {
    "sphere": _sphere,
    "shifted-sphere": _shifted_sphere,
    "linear": _linear,
    "constant": _constant,
}


def build_objective(name: str, d: int) -> Objective:
    try:
        factory = OBJECTIVES[name]
    except KeyError:
        known = ", ".join(sorted(OBJECTIVES))
        raise KeyError(f"unknown objective {name!r}; known: {known}") from None
    return factory(d)
