"""Centralised graph constructions and oracles.

Geometric graphs use the closed-ball rule: edge (i, j) present iff
d_ij <= r. Hop distances are unit-weight shortest paths; unreachable
pairs are reported with the explicit ``UNREACHABLE`` marker, never a
sentinel number.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

from .geometry import Deployment, distance_matrix


class _Marker:
    def __init__(self, name):
        self._name = name

    def __repr__(self):
        return self._name


UNREACHABLE = _Marker("UNREACHABLE")
UNBOUNDED = _Marker("UNBOUNDED")


@dataclass(frozen=True, eq=False)
class EdgeGraph:
    """Undirected graph over node ids 0..n-1.

    ``radius`` is set iff the graph was constructed as a geometric graph.
    Edges are stored as (i, j) pairs with i < j.
    """

    n: int
    edges: frozenset
    radius: float | None = None

    def __post_init__(self):
        edges = frozenset((int(i), int(j)) if i < j else (int(j), int(i)) for i, j in self.edges)
        for i, j in edges:
            if i == j:
                raise ValueError(f"self-loop on node {i}")
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise ValueError(f"edge ({i},{j}) out of range for n={self.n}")
        object.__setattr__(self, "edges", edges)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @cached_property
    def adjacency(self) -> list:
        adj = [[] for _ in range(self.n)]
        for i, j in self.edges:
            adj[i].append(j)
            adj[j].append(i)
        return [sorted(a) for a in adj]

    @cached_property
    def _csr(self) -> csr_matrix:
        if not self.edges:
            return csr_matrix((self.n, self.n))
        arr = np.array(sorted(self.edges), dtype=np.intp)
        rows = np.concatenate([arr[:, 0], arr[:, 1]])
        cols = np.concatenate([arr[:, 1], arr[:, 0]])
        data = np.ones(rows.size, dtype=np.int8)
        return csr_matrix((data, (rows, cols)), shape=(self.n, self.n))

    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.n, dtype=np.int64)
        for i, j in self.edges:
            deg[i] += 1
            deg[j] += 1
        return deg

    def has_edge(self, i: int, j: int) -> bool:
        return (min(i, j), max(i, j)) in self.edges


class HopTable:
    """Per-source minimum hop counts on an EdgeGraph.

    Rows are computed lazily per source (one BFS worth of memory per
    query) and cached. ``get`` returns an int hop count or UNREACHABLE.
    """

    def __init__(self, graph: EdgeGraph, sources=()):
        self._graph = graph
        self._rows: dict[int, np.ndarray] = {}
        if len(sources):
            self._compute(list(sources))

    @property
    def n(self) -> int:
        return self._graph.n

    @property
    def sources(self) -> list:
        return sorted(self._rows)

    def _compute(self, sources) -> None:
        todo = [s for s in sources if s not in self._rows]
        if not todo:
            return
        for s in todo:
            if not (0 <= s < self.n):
                raise ValueError(f"source {s} out of range for n={self.n}")
        dist = shortest_path(self._graph._csr, method="D", directed=False, unweighted=True, indices=todo)
        dist = np.atleast_2d(dist)
        for k, s in enumerate(todo):
            row = dist[k]
            out = np.where(np.isinf(row), -1, row).astype(np.int64)
            self._rows[s] = out

    def row(self, s: int) -> np.ndarray:
        """Hop counts from s to every node; -1 encodes unreachable.

        Internal fast path for vectorised consumers; ``get`` is the
        marker-safe accessor.
        """
        self._compute([s])
        return self._rows[s]

    def get(self, s: int, t: int):
        h = self.row(s)[t]
        return UNREACHABLE if h < 0 else int(h)


def build_gg(dep: Deployment, r: float) -> EdgeGraph:
    """Geometric graph of radius r (closed ball)."""
    if r < 0:
        raise ValueError(f"radius must be >= 0, got {r}")
    d = distance_matrix(dep)
    iu = np.triu_indices(dep.n, 1)
    keep = d[iu] <= r
    edges = frozenset(zip(iu[0][keep].tolist(), iu[1][keep].tolist()))
    return EdgeGraph(dep.n, edges, radius=float(r))


class _DisjointSet:
    def __init__(self, n):
        self.parent = list(range(n))
        self.rank = [0] * n
        self.components = n

    def find(self, a):
        p = self.parent
        while p[a] != a:
            p[a] = p[p[a]]
            a = p[a]
        return a

    def union(self, a, b) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.rank[ra] < self.rank[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        if self.rank[ra] == self.rank[rb]:
            self.rank[ra] += 1
        self.components -= 1
        return True


def is_connected(g: EdgeGraph) -> bool:
    dsu = _DisjointSet(g.n)
    for i, j in g.edges:
        dsu.union(i, j)
    return dsu.components == 1


def component_labels(g: EdgeGraph) -> np.ndarray:
    """Connected-component label per node (labels are root ids)."""
    dsu = _DisjointSet(g.n)
    for i, j in g.edges:
        dsu.union(i, j)
    return np.array([dsu.find(i) for i in range(g.n)], dtype=np.int64)


def critical_radius(dep: Deployment) -> tuple[float, EdgeGraph]:
    """Smallest pairwise distance whose geometric graph is connected.

    Inserts edges in ascending distance order into a union-find structure
    until one component remains; the radius is the last inserted length
    and the returned graph is the full geometric graph at that radius.
    """
    n = dep.n
    d = distance_matrix(dep)
    iu = np.triu_indices(n, 1)
    dvec = d[iu]
    order = np.argsort(dvec, kind="stable")
    ii, jj = iu[0][order], iu[1][order]
    dsu = _DisjointSet(n)
    r_crit = None
    for k in range(order.size):
        dsu.union(int(ii[k]), int(jj[k]))
        if dsu.components == 1:
            r_crit = float(dvec[order[k]])
            break
    assert r_crit is not None, "complete graph is always connected"
    return r_crit, build_gg(dep, r_crit)


def degree1_radius(dep: Deployment) -> tuple[float, EdgeGraph]:
    """Largest nearest-neighbour distance and its geometric graph.

    The returned graph has minimum degree >= 1 but need not be connected.
    """
    d = distance_matrix(dep)
    np.fill_diagonal(d, np.inf)
    r1 = float(d.min(axis=1).max())
    return r1, build_gg(dep, r1)


def hop_distances(g: EdgeGraph, sources) -> HopTable:
    """Hop table with the given source rows precomputed."""
    return HopTable(g, sources=list(sources))


def hop_matrix(g: EdgeGraph) -> np.ndarray:
    """All-pairs hop counts as an (n, n) int array; -1 = unreachable.

    Bulk variant of HopTable for vectorised consumers.
    """
    dist = shortest_path(g._csr, method="D", directed=False, unweighted=True)
    return np.where(np.isinf(dist), -1, dist).astype(np.int64)


def graph_diameter(g: EdgeGraph):
    """Maximum hop distance over connected pairs; UNBOUNDED if disconnected."""
    if not is_connected(g):
        return UNBOUNDED
    return int(hop_matrix(g).max())


def disparity(ga: EdgeGraph, gb: EdgeGraph) -> float:
    """Fraction of ga's edges absent from gb."""
    if ga.n != gb.n:
        raise ValueError(f"graphs have different node counts: {ga.n} vs {gb.n}")
    if not ga.edges:
        raise ValueError("disparity undefined for an empty edge set in the first graph")
    return len(ga.edges - gb.edges) / len(ga.edges)


def induced_subgraph(g: EdgeGraph, ids) -> EdgeGraph:
    """Subgraph on ``ids``, re-indexed by the sorted order of ids."""
    ids = sorted(int(i) for i in ids)
    remap = {old: new for new, old in enumerate(ids)}
    keep = set(ids)
    edges = frozenset(
        (remap[i], remap[j]) for i, j in g.edges if i in keep and j in keep
    )
    return EdgeGraph(len(ids), edges, radius=g.radius)


def save_graph(g: EdgeGraph, prefix) -> tuple[Path, Path]:
    """Write <prefix>.edges.csv (``i,j`` rows) and <prefix>.graph.json."""
    prefix = Path(prefix)
    csv_path = prefix.with_name(prefix.name + ".edges.csv")
    hdr_path = prefix.with_name(prefix.name + ".graph.json")
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["i", "j"])
        for i, j in sorted(g.edges):
            writer.writerow([i, j])
    header = {"n": g.n, "radius": g.radius}
    hdr_path.write_text(json.dumps(header) + "\n")
    return csv_path, hdr_path


def load_graph(prefix) -> EdgeGraph:
    prefix = Path(prefix)
    csv_path = prefix.with_name(prefix.name + ".edges.csv")
    hdr_path = prefix.with_name(prefix.name + ".graph.json")
    header = json.loads(hdr_path.read_text())
    edges = set()
    with open(csv_path, newline="") as fh:
        reader = csv.DictReader(fh)
        for rec in reader:
            edges.add((int(rec["i"]), int(rec["j"])))
    return EdgeGraph(header["n"], frozenset(edges), radius=header["radius"])
