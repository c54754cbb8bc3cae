"""Exact distances on level graphs.

BFS is the reference engine. :class:`HierarchicalOracle` computes the same
distances by recursing through the copy structure: every copy of
``Gamma_{k-1}`` inside ``Gamma_k`` is attached to the rest of the graph through
its two gluing vertices, so a path between different copies factors through
those cut pairs and a walk around the ring of copies.
"""
from __future__ import annotations

import json
import threading
from collections import deque
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any, Hashable, Sequence

import numpy as np
from scipy import sparse
from scipy.sparse.csgraph import dijkstra, shortest_path

from .construction import Graph, LevelGraph, _check_vertex
from .core import Address, PolygonSpec, class_members, format_word

try:
    import numba
except ImportError:  # pragma: no cover - scipy fallback
    numba = None

UNREACHED = -1


# ---------------------------------------------------------------- BFS


def _bfs_rows_py(indptr, indices, sources, limit, out):
    d = dijkstra(sparse.csr_matrix((np.ones(len(indices), dtype=np.int8), indices, indptr)),
                 directed=False, unweighted=True, indices=sources, limit=limit)
    out[:] = np.where(np.isfinite(d), d, UNREACHED)


def _bfs_rows_kernel(indptr, indices, sources, limit, out):
    n = len(indptr) - 1
    queue = np.empty(n, dtype=np.int64)
    for s in range(len(sources)):
        row = out[s]
        row[:] = -1
        src = sources[s]
        row[src] = 0
        queue[0] = src
        head, tail = 0, 1
        while head < tail:
            u = queue[head]
            head += 1
            du = row[u]
            if du >= limit:
                continue
            for e in range(indptr[u], indptr[u + 1]):
                w = indices[e]
                if row[w] < 0:
                    row[w] = du + 1
                    queue[tail] = w
                    tail += 1


_bfs_rows = numba.njit(cache=True, nogil=True)(_bfs_rows_kernel) if numba is not None else _bfs_rows_py


def distance_rows(graph: LevelGraph, sources: Sequence[int], limit: int | None = None,
                  chunk: int = 64) -> np.ndarray:
    """Distance rows ``len(sources) x n`` over a materialized graph, -1 where unreached.

    Uses a compiled CSR breadth-first search when numba is available and
    scipy's unweighted shortest paths otherwise.
    """
    sources = np.asarray(sources, dtype=np.int64)
    out = np.empty((len(sources), graph.n_vertices), dtype=np.int32)
    adj = graph.adjacency
    lim = np.iinfo(np.int32).max if limit is None else int(limit)
    indptr, indices = adj.indptr.astype(np.int64), adj.indices.astype(np.int64)
    for s in range(0, len(sources), chunk):
        _bfs_rows(indptr, indices, sources[s:s + chunk], lim, out[s:s + chunk])
    return out


def pair_distances(graph: LevelGraph, sources: Sequence[int], targets: Sequence[int],
                   chunk: int = 64) -> np.ndarray:
    """``len(sources) x len(targets)`` distance block, running BFS from the smaller side."""
    sources = np.asarray(sources, dtype=np.int64)
    targets = np.asarray(targets, dtype=np.int64)
    if len(targets) < len(sources):
        return pair_distances(graph, targets, sources, chunk).T
    out = np.empty((len(sources), len(targets)), dtype=np.int64)
    for s in range(0, len(sources), chunk):
        rows = distance_rows(graph, sources[s:s + chunk], chunk=chunk)
        out[s:s + chunk] = rows[:, targets]
    return out


def _bfs_generic(neighbors, source: Hashable, cutoff: int | None) -> dict:
    dist = {source: 0}
    queue = deque([source])
    while queue:
        x = queue.popleft()
        dx = dist[x]
        if cutoff is not None and dx >= cutoff:
            continue
        for y in neighbors(x):
            if y not in dist:
                dist[y] = dx + 1
                queue.append(y)
    return dist


def bfs_dist(graph: Graph, source: Address, cutoff: int | None = None) -> dict[Address, int]:
    """Exact distances from ``source``, truncated at ``cutoff``."""
    source = graph.canonical(source)
    if isinstance(graph, LevelGraph):
        row = distance_rows(graph, [graph.index(source)], limit=cutoff)[0]
        hit = np.flatnonzero(row >= 0)
        return {graph.address(int(i)): int(row[i]) for i in hit}
    return _bfs_generic(graph.neighbors, source, cutoff)


def distance(graph: Graph, u: Address, v: Address) -> int:
    u, v = graph.canonical(u), graph.canonical(v)
    if isinstance(graph, LevelGraph):
        return int(pair_distances(graph, [graph.index(u)], [graph.index(v)])[0, 0])
    return bfs_dist(graph, u)[v]


def is_cut_pair(graph: Graph, a: Address, b: Address, probe_u: Address, probe_v: Address) -> bool:
    """Whether every path from ``probe_u`` to ``probe_v`` meets ``{a, b}``."""
    blocked = {graph.canonical(a), graph.canonical(b)}
    u, v = graph.canonical(probe_u), graph.canonical(probe_v)
    if u in blocked or v in blocked:
        return True
    reached = _bfs_generic(lambda x: [y for y in graph.neighbors(x) if y not in blocked], u, None)
    return v not in reached


# ---------------------------------------------------------------- balls


@dataclass
class PointedBall:
    center: Address
    radius: int
    ambient_level: int
    points: tuple[Address, ...]
    matrix: np.ndarray
    labels: tuple[Any, ...] | None = field(default=None, compare=False)

    @property
    def center_index(self) -> int:
        return self.points.index(self.center)

    def __len__(self):
        return len(self.points)

    def distances_from_center(self) -> np.ndarray:
        return self.matrix[self.center_index]

    def to_json(self) -> dict:
        doc = {
            "center": format_word(self.center),
            "radius": self.radius,
            "ambientLevel": self.ambient_level,
            "points": [format_word(p) for p in self.points],
            "matrix": self.matrix.tolist(),
        }
        if self.labels is not None:
            doc["labels"] = [str(x) for x in self.labels]
        return doc

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


def _local_region(graph: Graph, center: Address, radius: int):
    """Vertices within ``radius`` of ``center`` and their adjacency, as index lists."""
    if isinstance(graph, LevelGraph):
        c = graph.index(center)
        dist = _bfs_generic(lambda i: graph.neighbor_indices(i).tolist(), c, radius)
        keys = sorted(dist)
        names = [graph.address(i) for i in keys]
        nbrs = {i: graph.neighbor_indices(i).tolist() for i in keys}
    else:
        dist = _bfs_generic(graph.neighbors, center, radius)
        keys = sorted(dist)
        names = keys
        nbrs = {v: graph.neighbors(v) for v in keys}
    pos = {key: n for n, key in enumerate(keys)}
    rows, cols = [], []
    for key in keys:
        for y in nbrs[key]:
            if y in pos:
                rows.append(pos[key])
                cols.append(pos[y])
    n = len(keys)
    adj = sparse.csr_matrix((np.ones(len(rows), dtype=np.int8), (rows, cols)), shape=(n, n))
    return names, np.array([dist[key] for key in keys]), adj


def ball(graph: Graph, center: Address, radius: int) -> PointedBall:
    """The ball of ``radius`` around ``center`` with ambient distances.

    Geodesics between two points of the ball stay within twice the radius of the
    center, so all-pairs BFS on that region gives exact ambient distances.
    """
    center = graph.canonical(center)
    names, dcenter, adj = _local_region(graph, center, 2 * radius)
    inside = np.flatnonzero(dcenter <= radius)
    d = shortest_path(adj, directed=False, unweighted=True, indices=inside)
    d = np.atleast_2d(d)[:, inside]
    matrix = d.astype(np.int64)
    points = tuple(names[i] for i in inside)
    return PointedBall(center, radius, graph.k, points, matrix)


# ---------------------------------------------------------------- isometry


def _row_signatures(m1: np.ndarray, m2: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    rows = np.concatenate([np.sort(m1, axis=1), np.sort(m2, axis=1)])
    _, ids = np.unique(rows, axis=0, return_inverse=True)
    ids = ids.reshape(-1)
    return ids[: len(m1)], ids[len(m1):]


def pointed_isometric(b1: PointedBall, b2: PointedBall, pointed: bool = True) -> dict[Address, Address] | None:
    """A distance-preserving bijection ``b1 -> b2`` fixing centers, or None.

    Candidates are pruned by the sorted row of the distance matrix; the search
    assigns points in order of distance from the center and only tries images
    adjacent to the image of an already placed neighbor.
    """
    n = len(b1.points)
    if n != len(b2.points):
        return None
    m1, m2 = b1.matrix, b2.matrix
    sig1, sig2 = _row_signatures(m1, m2)
    if not np.array_equal(np.sort(sig1), np.sort(sig2)):
        return None
    c1, c2 = b1.center_index, b2.center_index
    if pointed and sig1[c1] != sig2[c2]:
        return None
    if not pointed:
        found = None
        for cand in np.flatnonzero(sig2 == sig1[c1]):
            found = _search(m1, m2, sig1, sig2, c1, int(cand))
            if found is not None:
                break
    else:
        found = _search(m1, m2, sig1, sig2, c1, c2)
    if found is None:
        return None
    return {b1.points[i]: b2.points[j] for i, j in enumerate(found)}


def _search(m1, m2, sig1, sig2, c1: int, c2: int) -> list[int] | None:
    n = len(m1)
    order = sorted(range(n), key=lambda i: (m1[c1, i], i))
    assert order[0] == c1
    # each later point hangs off an earlier point at distance 1
    rank = {p: i for i, p in enumerate(order)}
    parent = [-1] * n
    for p in order[1:]:
        near = [q for q in np.flatnonzero(m1[p] == 1) if rank[q] < rank[p]]
        parent[p] = min(near, key=rank.get) if near else c1
    image = [-1] * n
    used = np.zeros(n, dtype=bool)
    image[c1] = c2
    used[c2] = True
    placed = [c1]
    stack: list[list[int]] = []
    depth = 1

    def candidates(p: int) -> list[int]:
        pool = np.flatnonzero((m2[image[parent[p]]] == m1[parent[p], p]) & ~used & (sig2 == sig1[p]))
        if len(pool) == 0:
            return []
        src = np.array(placed)
        tgt = np.array([image[q] for q in placed])
        ok = pool[(m2[np.ix_(tgt, pool)] == m1[src, p][:, None]).all(axis=0)]
        return ok[::-1].tolist()

    if n == 1:
        return image
    stack.append(candidates(order[1]))
    while stack:
        p = order[depth]
        if image[p] >= 0:
            used[image[p]] = False
            image[p] = -1
            placed.pop()
        if not stack[-1]:
            stack.pop()
            depth -= 1
            continue
        y = stack[-1].pop()
        image[p] = int(y)
        used[y] = True
        placed.append(p)
        if depth == n - 1:
            return image
        depth += 1
        stack.append(candidates(order[depth]))
    return None


def verify_isometry(b1: PointedBall, b2: PointedBall, mapping: dict[Address, Address],
                    pointed: bool = True) -> bool:
    idx2 = {p: i for i, p in enumerate(b2.points)}
    perm = np.array([idx2[mapping[p]] for p in b1.points])
    if len(set(perm.tolist())) != len(perm):
        return False
    if pointed and mapping[b1.center] != b2.center:
        return False
    return bool(np.array_equal(b1.matrix, b2.matrix[np.ix_(perm, perm)]))


# ---------------------------------------------------------------- geodesics


@dataclass(frozen=True)
class GeodesicPath:
    vertices: tuple[Address, ...]

    @property
    def length(self) -> int:
        return len(self.vertices) - 1

    def __getitem__(self, t: int) -> Address:
        return self.vertices[t]


def geodesics_between(graph: Graph, u: Address, v: Address, max_count: int = 1) -> list[GeodesicPath]:
    """Shortest paths from ``u`` to ``v`` in lexicographic order of vertex sequences."""
    u, v = graph.canonical(u), graph.canonical(v)
    if isinstance(graph, LevelGraph):
        dv = distance_rows(graph, [graph.index(v)])[0]
        start = graph.index(u)
        total = int(dv[start])
        nbrs = lambda i: graph.neighbor_indices(i)  # noqa: E731
        dist = lambda i: int(dv[i])  # noqa: E731
        name = graph.address
    else:
        dmap = _bfs_generic(graph.neighbors, v, None)
        start = u
        total = dmap[u]
        nbrs = graph.neighbors
        dist = lambda x: dmap.get(x, -1)  # noqa: E731
        name = lambda x: x  # noqa: E731
    out: list[GeodesicPath] = []
    path = [start]
    # iterative DFS; neighbor lists are sorted so paths come out in lex order
    stack = [iter([y for y in nbrs(start) if dist(y) == total - 1])] if total > 0 else []
    if total == 0:
        return [GeodesicPath((name(start),))]
    while stack and len(out) < max_count:
        try:
            y = next(stack[-1])
        except StopIteration:
            stack.pop()
            path.pop()
            continue
        path.append(y)
        d = dist(y)
        if d == 0:
            out.append(GeodesicPath(tuple(name(x) for x in path)))
            path.pop()
            continue
        stack.append(iter([z for z in nbrs(y) if dist(z) == d - 1]))
    return out


# ---------------------------------------------------------------- hierarchical oracle


class HierarchicalOracle:
    """Distances in ``Gamma_k`` by recursive decomposition through gluing cut pairs."""

    def __init__(self, spec: PolygonSpec):
        self.spec = spec
        self._memo: dict[tuple[Address, Address], int] = {}
        self._gaps: dict[int, int] = {}
        self._lock = threading.Lock()

    def corner_gap(self, k: int) -> int:
        """Distance in ``Gamma_k`` between the corners ``f^k`` and ``(2f)^k``."""
        gap = self._gaps.get(k)
        if gap is None:
            r, f = self.spec.r, self.spec.f
            gap = self._dist((f % r,) * k, ((2 * f) % r,) * k)
            with self._lock:
                self._gaps.setdefault(k, gap)
        return gap

    def dist(self, u: Sequence[int], v: Sequence[int]) -> int:
        u, v = tuple(u), tuple(v)
        if len(u) != len(v):
            raise ValueError("addresses must have equal length")
        return self._dist(u, v)

    def _dist(self, a: Address, b: Address) -> int:
        if a == b:
            return 0
        r = self.spec.r
        if len(a) == 1:
            d = (a[0] - b[0]) % r
            return min(d, r - d)
        key = (a, b) if a <= b else (b, a)
        hit = self._memo.get(key)
        if hit is not None:
            return hit
        best = None
        for x in class_members(self.spec, a):
            for y in class_members(self.spec, b):
                if x == y:
                    cand = 0
                elif x[-1] == y[-1]:
                    cand = self._dist(x[:-1], y[:-1])
                else:
                    cand = self._cross(x, y)
                if best is None or cand < best:
                    best = cand
        self._memo[key] = best
        return best

    def _cross(self, x: Address, y: Address) -> int:
        r, f = self.spec.r, self.spec.f
        k = len(x)
        gap = self.corner_gap(k - 1)
        cx, cy = x[-1], y[-1]

        def exits(c: int, inner: Address):
            # ring gluing g_c joins c to c+1 at inner corner (c+f); g_{c-1} at (c+2f)
            up = ((c + f) % r,) * (k - 1)
            down = ((c + 2 * f) % r,) * (k - 1)
            return [(c % r, self._dist(inner, up)), ((c - 1) % r, self._dist(inner, down))]

        best = None
        for gi, di in exits(cx, x[:-1]):
            for gj, dj in exits(cy, y[:-1]):
                steps = (gj - gi) % r
                ring = gap * min(steps, r - steps)
                cand = di + ring + dj
                if best is None or cand < best:
                    best = cand
        return best


@lru_cache(maxsize=None)
def oracle_for(spec: PolygonSpec) -> HierarchicalOracle:
    return HierarchicalOracle(spec)


def hierarchical_dist(spec: PolygonSpec, k: int, u: Sequence[int], v: Sequence[int]) -> int:
    u = _check_vertex(spec, k, tuple(u))
    v = _check_vertex(spec, k, tuple(v))
    return oracle_for(spec).dist(u, v)
