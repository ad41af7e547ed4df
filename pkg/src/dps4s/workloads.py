"""Builders for aggregation tables: graphlet enumeration, CSV ingestion, synthetic data."""

from __future__ import annotations

import csv
import enum
import json
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import kernels
from .aggregation_table import (
    AggregationUnitTable,
    VectorWorkload,
    validate_table,
    validate_workload,
    tau_star,
)
from .errors import InfeasibleParams, InvalidParams, ParseError, PatternUnsupported, SelfLoop, WeightOutOfRange


class PatternKind(str, enum.Enum):
    EDGE = "edge"
    PATH2 = "path2"
    PATH3 = "path3"
    TRIANGLE = "triangle"
    RECTANGLE = "rectangle"
    FANOUT2 = "fanout2"

    @property
    def vertex_count(self) -> int:
        return {"edge": 2, "path2": 3, "path3": 4, "triangle": 3, "rectangle": 4, "fanout2": 3}[self.value]


@dataclass(frozen=True)
class Graph:
    """Simple graph on vertices ``0..n_vertices-1``.

    Undirected edges are stored once as ``(min, max)``. ``vertex_names`` keeps
    the tokens from the source file.
    """

    n_vertices: int
    edges: np.ndarray
    directed: bool = False
    labels: tuple[str, ...] | None = None
    vertex_names: tuple[str, ...] | None = None

    def __post_init__(self):
        edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        object.__setattr__(self, "edges", edges)
        if edges.size and np.any(edges[:, 0] == edges[:, 1]):
            raise SelfLoop(0, "graph contains a self-loop")

    @classmethod
    def from_edges(cls, edges, n_vertices=None, directed=False, labels=None) -> Graph:
        """Deduplicated graph from an iterable of vertex pairs."""
        seen = {}
        for k, (u, v) in enumerate(edges):
            u, v = int(u), int(v)
            if u == v:
                raise SelfLoop(k + 1, f"self-loop on vertex {u}")
            key = (u, v) if directed else (min(u, v), max(u, v))
            if key not in seen:
                seen[key] = None if labels is None else labels[k]
        keys = list(seen)
        arr = np.array(keys, dtype=np.int64).reshape(-1, 2)
        if n_vertices is None:
            n_vertices = int(arr.max()) + 1 if arr.size else 0
        lab = None if labels is None else tuple(seen[k] for k in keys)
        return cls(n_vertices, arr, directed, lab)

    @property
    def num_edges(self) -> int:
        return int(self.edges.shape[0])

    def undirected_pairs(self) -> np.ndarray:
        if not self.directed:
            return self.edges
        pairs = np.sort(self.edges, axis=1)
        return np.unique(pairs, axis=0) if pairs.size else pairs

    def adjacency(self, directed: bool = False) -> tuple[np.ndarray, np.ndarray]:
        """CSR neighbour lists sorted ascending (out-neighbours when ``directed``)."""
        if directed:
            src, dst = self.edges[:, 0], self.edges[:, 1]
        else:
            pairs = self.undirected_pairs()
            src = np.concatenate([pairs[:, 0], pairs[:, 1]])
            dst = np.concatenate([pairs[:, 1], pairs[:, 0]])
        order = np.lexsort((dst, src))
        src, dst = src[order], dst[order]
        indptr = np.zeros(self.n_vertices + 1, dtype=np.int64)
        np.cumsum(np.bincount(src, minlength=self.n_vertices), out=indptr[1:])
        return indptr, np.ascontiguousarray(dst, dtype=np.int64)

    def degrees(self) -> np.ndarray:
        indptr, _ = self.adjacency()
        return np.diff(indptr)

    def max_degree(self) -> int:
        return int(self.degrees().max()) if self.n_vertices else 0


def _parse_vertex_ids(tokens: list[str]) -> tuple[dict[str, int], tuple[str, ...]]:
    unique = list(dict.fromkeys(tokens))
    try:
        ints = sorted(unique, key=int)
    except ValueError:
        ordered = unique
    else:
        ordered = ints
    return {tok: i for i, tok in enumerate(ordered)}, tuple(ordered)


def load_edge_list(path, directed: bool = False) -> Graph:
    """Parse ``u v [label]`` lines; blank lines and ``#`` comments are skipped.

    Vertex tokens are mapped to dense ids, in numeric order when every token is
    an integer and in first-appearance order otherwise.
    """
    raw = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            parts = text.split()
            if len(parts) not in (2, 3):
                raise ParseError(lineno, f"expected 'u v [label]', got {text!r}")
            if parts[0] == parts[1]:
                raise SelfLoop(lineno, f"self-loop on vertex {parts[0]}")
            raw.append((lineno, parts[0], parts[1], parts[2] if len(parts) == 3 else None))
    ids, names = _parse_vertex_ids([tok for _, a, b, _ in raw for tok in (a, b)])
    has_labels = any(lab is not None for *_, lab in raw)
    edges = [(ids[a], ids[b]) for _, a, b, _ in raw]
    labels = [lab if lab is not None else "" for *_, lab in raw] if has_labels else None
    g = Graph.from_edges(edges, n_vertices=len(names), directed=directed, labels=labels)
    return Graph(g.n_vertices, g.edges, directed, g.labels, names)


def gs_for_pattern(D: int, pattern) -> int:
    """Per-user tuple bound used for a pattern under degree bound ``D``."""
    pattern = PatternKind(pattern)
    if D < 1:
        raise InvalidParams(f"degree bound must be >= 1, got {D}")
    if pattern is PatternKind.EDGE:
        return int(D)
    if pattern in (PatternKind.PATH2, PatternKind.TRIANGLE, PatternKind.FANOUT2):
        return int(D) ** 2
    return int(D) ** 3


_KERNEL = {
    PatternKind.PATH2: kernels.path2,
    PatternKind.PATH3: kernels.path3,
    PatternKind.TRIANGLE: kernels.triangles,
    PatternKind.RECTANGLE: kernels.rectangles,
}


def enumerate_instances(graph: Graph, pattern) -> np.ndarray:
    """Raw pattern instances, one row each, in the kernel's vertex layout."""
    pattern = PatternKind(pattern)
    if pattern is PatternKind.FANOUT2:
        if not graph.directed:
            raise PatternUnsupported("fanout2 needs a directed graph")
        return kernels.fanout2(*graph.adjacency(directed=True))
    if pattern is PatternKind.EDGE:
        return graph.edges.copy() if not graph.directed else graph.undirected_pairs().copy()
    return _KERNEL[pattern](*graph.adjacency())


def enumerate_graphlets(
    graph: Graph,
    pattern,
    D: int | None = None,
    tuple_bound: int | None = None,
    by_label: bool = False,
) -> AggregationUnitTable:
    """One unit of weight 1 per pattern instance; contributors are its sorted vertices.

    ``tuple_bound`` overrides the bound derived from ``D``. When ``D`` is not
    given the observed maximum degree is used, which is data dependent and
    only appropriate for experiments. With ``by_label`` (edges only) each unit
    carries the index of its edge label as group.
    """
    pattern = PatternKind(pattern)
    inst = enumerate_instances(graph, pattern)
    contributors = np.sort(inst, axis=1) if inst.size else inst.reshape(0, pattern.vertex_count)
    if tuple_bound is None:
        D = graph.max_degree() if D is None else D
        tuple_bound = gs_for_pattern(max(1, D), pattern)
    k = contributors.shape[0]
    ptr = np.arange(k + 1, dtype=np.int64) * pattern.vertex_count
    groups = None
    if by_label:
        if pattern is not PatternKind.EDGE or graph.labels is None:
            raise PatternUnsupported("label grouping is defined for labelled edge patterns only")
        index = {lab: i for i, lab in enumerate(dict.fromkeys(graph.labels))}
        groups = np.array([index[lab] for lab in graph.labels], dtype=np.int64)
    table = AggregationUnitTable(
        np.ones(k),
        ptr,
        contributors.reshape(-1),
        max(1, graph.n_vertices),
        int(tuple_bound),
        pattern.vertex_count,
        groups=groups,
    )
    return validate_table(table)


def demo_graph() -> Graph:
    """Seven-vertex strip of five triangles (A..G)."""
    names = "ABCDEFG"
    pairs = ["AB", "AC", "BC", "BD", "CD", "CE", "DE", "DF", "EF", "EG", "FG"]
    edges = [(names.index(p[0]), names.index(p[1])) for p in pairs]
    g = Graph.from_edges(edges, n_vertices=7)
    return Graph(g.n_vertices, g.edges, False, None, tuple(names))


# ---------------------------------------------------------------------------
# units CSV


def _finish_table(weights, contributors, groups, m, delta, l, W):
    if m is None:
        m = max((max(c) for c in contributors), default=-1) + 1
    if l is None:
        l = max((len(c) for c in contributors), default=1)
    table = AggregationUnitTable.from_lists(
        weights, contributors, max(1, m), 1, max(1, l), W, groups=groups
    )
    if delta is None:
        delta = max(1, tau_star(table))
    return table.replace_meta(tuple_bound=int(delta))


def load_units_csv(
    path,
    user_universe_size: int | None = None,
    tuple_bound: int | None = None,
    users_per_tuple: int | None = None,
    weight_scale: float = 1.0,
):
    """Read a units CSV into a validated table, or a workload when groups are present.

    Raw weights must lie in ``[0, weight_scale]`` and are divided by it. Omitted
    metadata is inferred from the data (tuple bound = observed maximum), which
    is data dependent and only meant for experiments.
    """
    if not weight_scale > 0:
        raise InvalidParams("weight scale must be positive")
    weights, contributors, raw_groups = [], [], []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header[:2]] != ["weight", "contributors"]:
            raise ParseError(1, "header must start with 'weight,contributors'")
        has_group = len(header) >= 3 and header[2].strip() == "group"
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) < 2:
                raise ParseError(lineno, "expected at least weight and contributors")
            try:
                w = float(row[0])
                users = [int(tok) for tok in row[1].split(";") if tok.strip() != ""]
            except ValueError as exc:
                raise ParseError(lineno, str(exc)) from None
            if not users:
                raise ParseError(lineno, "empty contributor list")
            if any(u < 0 for u in users):
                raise ParseError(lineno, "user ids must be non-negative")
            if not 0.0 <= w <= weight_scale:
                raise WeightOutOfRange(f"line {lineno}: weight {w} outside [0, {weight_scale}]")
            weights.append(w / weight_scale)
            contributors.append(users)
            raw_groups.append(row[2].strip() if has_group and len(row) > 2 else "")
    grouped = has_group and any(raw_groups)
    groups = None
    if grouped:
        index = {g: i for i, g in enumerate(dict.fromkeys(raw_groups))}
        groups = [index[g] for g in raw_groups]
    table = _finish_table(
        weights, contributors, groups, user_universe_size, tuple_bound, users_per_tuple, weight_scale
    )
    if grouped:
        workload = VectorWorkload.from_grouped_table(table, len(index))
        return validate_workload(workload)
    return validate_table(table)


def write_units_csv(data, path) -> None:
    """Write a table or workload in the units CSV format (weights de-normalised)."""
    if isinstance(data, VectorWorkload):
        parts = [(c, g) for g, c in enumerate(data.components)]
        grouped = True
    else:
        parts = [(data, None)]
        grouped = data.groups is not None
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["weight", "contributors", "group"])
        for table, g in parts:
            for i in range(table.n):
                group = g if g is not None else (table.groups[i] if grouped else "")
                writer.writerow([
                    repr(float(table.weights[i] * table.weight_scale)),
                    ";".join(str(int(u)) for u in table.contributors(i)),
                    group,
                ])


def write_meta(data, path) -> None:
    comp = data.components[0] if isinstance(data, VectorWorkload) else data
    meta = {
        "user_universe_size": comp.user_universe_size,
        "tuple_bound": data.tuple_bound,
        "users_per_tuple": max(c.users_per_tuple for c in getattr(data, "components", (data,))),
        "weight_scale": comp.weight_scale,
        "d": data.d if isinstance(data, VectorWorkload) else 1,
    }
    Path(path).write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def read_meta(path) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))


def meta_path(csv_path) -> str:
    return os.fspath(csv_path) + ".meta.json"


# ---------------------------------------------------------------------------
# synthetic data


def synth_table(
    n: int,
    m: int,
    tuple_bound: int,
    users_per_tuple: int,
    skew: float,
    seed: int,
    groups: int | None = None,
) -> AggregationUnitTable:
    """``n`` unit-weight tuples over ``m`` users with Zipf(``skew``) popularity.

    Each tuple draws ``users_per_tuple`` distinct users; a user already at the
    tuple bound is rejected and redrawn. With ``groups`` every unit also gets a
    uniformly random group index.
    """
    l = int(users_per_tuple)
    if n < 0 or m < 1 or l < 1 or tuple_bound < 1:
        raise InfeasibleParams("need n >= 0, m >= 1, l >= 1 and tuple bound >= 1")
    if l > m or n * l > m * tuple_bound:
        raise InfeasibleParams(f"{n} tuples of {l} users do not fit {m} users capped at {tuple_bound}")
    rng = np.random.default_rng(seed)
    p = 1.0 / np.arange(1, m + 1) ** float(skew)
    p /= p.sum()
    cdf = np.cumsum(p)
    counts = np.zeros(m, dtype=np.int64)
    contributors = np.empty((n, l), dtype=np.int64)
    for i in range(n):
        chosen: list[int] = []
        tries = 0
        while len(chosen) < l:
            if tries < 64:
                u = int(np.searchsorted(cdf, rng.random() * cdf[-1], side="right"))
                u = min(u, m - 1)
                tries += 1
            else:
                open_users = np.flatnonzero(counts < tuple_bound)
                open_users = open_users[~np.isin(open_users, chosen)]
                if open_users.size == 0:
                    raise InfeasibleParams("ran out of users below the tuple bound")
                w = p[open_users] / p[open_users].sum()
                u = int(rng.choice(open_users, p=w))
            if counts[u] >= tuple_bound or u in chosen:
                continue
            chosen.append(u)
        counts[chosen] += 1
        contributors[i] = chosen
    g = rng.integers(0, groups, size=n) if groups else None
    table = AggregationUnitTable(
        np.ones(n),
        np.arange(n + 1, dtype=np.int64) * l,
        contributors.reshape(-1),
        m,
        int(tuple_bound),
        l,
        groups=g,
    )
    return validate_table(table)


def synth_workload(n, m, tuple_bound, users_per_tuple, skew, d, seed) -> VectorWorkload:
    table = synth_table(n, m, tuple_bound, users_per_tuple, skew, seed, groups=d)
    return validate_workload(VectorWorkload.from_grouped_table(table, d))
