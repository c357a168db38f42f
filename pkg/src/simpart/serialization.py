"""Deterministic JSON and CSV writers for partitions, reports, traces.

Every float is rendered with %.17g, enough digits to round-trip a
double exactly, and containers are written in a fixed field order with
plain \\n line endings, so identical inputs produce byte-identical
files on every platform.
"""

from __future__ import annotations

import csv
import json
import math

import numpy as np

from .cones import FractionEstimate
from .errors import EmptyPartition
from .geometry import Simplex, make_simplex
from .optimizer import TraceRow
from .partition import Node, Partition, TheoremReport


def fmt_float(x: float) -> str:
    """Shortest-safe decimal form of a double (17 significant digits)."""
    return format(float(x), ".17g")


def _json_value(value) -> str:
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        if not math.isfinite(value):
            raise ValueError(f"cannot serialize non-finite float {value}")
        return fmt_float(float(value))
    if value is None:
        return "null"
    if isinstance(value, dict):
        items = ", ".join(f"{json.dumps(k)}: {_json_value(v)}" for k, v in value.items())
        return "{" + items + "}"
    if isinstance(value, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_json_value(v) for v in value) + "]"
    raise TypeError(f"cannot serialize {type(value).__name__}")


def dumps(value) -> str:
    """Deterministic JSON text (insertion-ordered keys, .17g floats)."""
    return _json_value(value) + "\n"


# ---------------------------------------------------------------- simplex


def simplex_to_json(s: Simplex) -> str:
    return dumps({"id": s.id, "vertices": [list(v) for v in s.vertices]})


def write_simplex(s: Simplex, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(simplex_to_json(s))


def read_simplex(path) -> Simplex:
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    return make_simplex(doc["vertices"], id=str(doc.get("id", "S")))


# --------------------------------------------------------------- partition


def partition_to_json(p: Partition) -> str:
    nodes = [
        {
            "id": n.id,
            "parent": n.parent,
            "generation": n.generation,
            "vertex_ids": list(n.vertex_ids),
            "children": list(n.children),
        }
        for n in p.nodes
    ]
    return dumps({"d": p.d, "nodes": nodes, "vertices": [list(v) for v in p.vertices]})


def write_partition(p: Partition, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(partition_to_json(p))


def read_partition(path) -> Partition:
    """Rebuild a partition from its JSON form.

    The vertex merge tolerance is derived from the loaded roots (1e-9
    times the largest root edge), matching how the builders set it, so
    a round-tripped partition behaves identically.
    """
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    d = int(doc["d"])
    coords = [np.asarray(v, dtype=float) for v in doc["vertices"]]
    nodes = [
        Node(
            id=int(n["id"]),
            parent=None if n["parent"] is None else int(n["parent"]),
            generation=int(n["generation"]),
            vertex_ids=tuple(int(v) for v in n["vertex_ids"]),
            children=tuple(int(c) for c in n["children"]),
        )
        for n in doc["nodes"]
    ]
    if not nodes:
        raise EmptyPartition("partition file contains no nodes")
    if [n.id for n in nodes] != list(range(len(nodes))):
        raise ValueError("node ids must be 0..n-1 in order")
    roots = [n for n in nodes if n.parent is None]
    if not roots:
        raise ValueError("partition file has no root nodes")
    root_h = 0.0
    for n in roots:
        pts = np.array([coords[v] for v in n.vertex_ids])
        for i in range(pts.shape[0] - 1):
            for j in range(i + 1, pts.shape[0]):
                root_h = max(root_h, float(np.linalg.norm(pts[i] - pts[j])))
    p = Partition(d, vertex_merge_tol=1e-9 * root_h)
    for v in coords:
        p.vertex_id(v)
    if p.n_vertices != len(coords):
        raise ValueError("vertex list contains duplicate registry entries")
    p.nodes = nodes
    for n in nodes:
        p.simplex(n.id)  # validates shape and nondegeneracy
    return p


# -------------------------------------------------------------------- CSV


def _open_csv(path):
    return open(path, "w", encoding="utf-8", newline="")


def write_fraction_csv(estimates: list[FractionEstimate], path) -> None:
    with _open_csv(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["cone_id", "fraction", "stderr", "gaussian_integral", "samples", "seed"])
        for e in estimates:
            w.writerow(
                [
                    e.cone_id,
                    fmt_float(e.fraction),
                    fmt_float(e.stderr),
                    fmt_float(e.gaussian_integral),
                    e.samples,
                    e.seed,
                ]
            )


def write_theorem_report_csv(report: TheoremReport, path) -> None:
    """One row per check, then a summary row.

    Columns: check kind, leaf id, vertex id, location, value, stderr,
    bound, passed.  Vertex-bound rows compare a cone fraction with the
    per-simplex bound; decomposition rows compare a fraction sum around
    a vertex with 1; the valence row compares the observed maximum with
    the theoretical N; the summary row carries eta_min against N and
    the overall verdict.
    """
    with _open_csv(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["check", "leaf_id", "vertex_id", "location", "value", "stderr", "bound", "passed"])
        for c in report.per_vertex_checks:
            w.writerow(
                [
                    "vertex-bound",
                    c.leaf_id,
                    c.vertex_id,
                    "",
                    fmt_float(c.fraction),
                    fmt_float(c.stderr),
                    fmt_float(c.strong_bound),
                    str(c.passed_strong).lower(),
                ]
            )
        for c in report.decomposition_checks:
            w.writerow(
                [
                    "decomposition",
                    "",
                    c.vertex_id,
                    "interior" if c.interior else "boundary",
                    fmt_float(c.fraction_sum),
                    fmt_float(c.combined_stderr),
                    fmt_float(1.0),
                    str(c.passed).lower(),
                ]
            )
        w.writerow(
            [
                "valence",
                "",
                "",
                "",
                report.max_observed_valence,
                "",
                fmt_float(report.theoretical_bound),
                str(report.valence_ok).lower(),
            ]
        )
        w.writerow(
            [
                "summary",
                "",
                "",
                "",
                fmt_float(report.eta_min),
                "",
                fmt_float(report.theoretical_bound),
                str(report.passed).lower(),
            ]
        )


def write_trace_csv(trace: list[TraceRow], path) -> None:
    with _open_csv(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["iteration", "node_id", "lower_bound", "incumbent", "gap", "eta_min"])
        for row in trace:
            w.writerow(
                [
                    row.iteration,
                    row.node_id,
                    fmt_float(row.lower_bound),
                    fmt_float(row.incumbent),
                    fmt_float(row.gap),
                    fmt_float(row.eta_min),
                ]
            )
