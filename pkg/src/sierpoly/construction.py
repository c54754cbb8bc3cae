"""Level graphs of the Sierpinski polygon sequence.

``Gamma_k`` is the quotient of the ``r**k`` addresses of length ``k`` under the
gluing identification. Two addresses are adjacent iff they differ only in the
first letter, by +-1 mod r. Vertices are named by canonical addresses.

Two representations share one query surface (``neighbors``, ``__contains__``,
``vertices``): :class:`LevelGraph` materializes everything into integer arrays
and a CSR adjacency, :class:`ImplicitLevelGraph` answers from address
arithmetic alone.
"""
from __future__ import annotations

import itertools
import json
import xml.etree.ElementTree as ET
from functools import cached_property
from typing import Iterable, Iterator, Literal

import numpy as np
from scipy import sparse

from .core import (
    Address,
    MalformedAddress,
    PolygonSpec,
    SierpolyError,
    canonical,
    class_members,
    format_word,
)

DEFAULT_BUDGET = 10**6


class BudgetExceeded(SierpolyError):
    pass


def _check_vertex(spec: PolygonSpec, k: int, v: Address) -> Address:
    if len(v) != k or any(not 0 <= x < spec.r for x in v):
        raise MalformedAddress(f"{format_word(v)} is not an address of level {k} for r={spec.r}")
    return v


def neighbors(spec: PolygonSpec, k: int, v: Address) -> list[Address]:
    """Sorted canonical neighbors of ``v`` in ``Gamma_k``."""
    v = _check_vertex(spec, k, tuple(v))
    r = spec.r
    out = set()
    for a in class_members(spec, v):
        for step in (1, -1):
            out.add(canonical(spec, ((a[0] + step) % r,) + a[1:]))
    out.discard(canonical(spec, v))
    return sorted(out)


def top_gluing(spec: PolygonSpec, k: int) -> dict[int, Address]:
    """Canonical vertex joining copy ``i`` to copy ``i+1`` of ``Gamma_{k-1}`` inside ``Gamma_k``."""
    if k < 2:
        raise SierpolyError("top gluing needs k >= 2")
    r, f = spec.r, spec.f
    return {i: canonical(spec, ((i + f) % r,) * (k - 1) + (i,)) for i in range(r)}


def copy_embedding(spec: PolygonSpec, k: int, i: int, v: Address) -> Address:
    """Image of the ``Gamma_{k-1}`` vertex ``v`` inside copy ``i`` of ``Gamma_k``."""
    if k < 2 or not 0 <= i < spec.r:
        raise SierpolyError(f"copy index {i} / level {k} out of range")
    _check_vertex(spec, k - 1, v)
    return canonical(spec, tuple(v) + (i,))


def vertex_count(spec: PolygonSpec, k: int) -> int:
    n = spec.r
    for _ in range(k - 1):
        n = spec.r * n - spec.r
    return n


class ImplicitLevelGraph:
    """``Gamma_k`` with neighbors computed on demand."""

    materialized = False

    def __init__(self, spec: PolygonSpec, k: int):
        if k < 1:
            raise SierpolyError("level must be at least 1")
        self.spec = spec
        self.k = k

    def __contains__(self, v) -> bool:
        v = tuple(v)
        return len(v) == self.k and all(0 <= x < self.spec.r for x in v) and canonical(self.spec, v) == v

    def neighbors(self, v: Address) -> list[Address]:
        return neighbors(self.spec, self.k, v)

    def canonical(self, a: Address) -> Address:
        return canonical(self.spec, _check_vertex(self.spec, self.k, tuple(a)))

    def vertices(self) -> Iterator[Address]:
        for a in itertools.product(range(self.spec.r), repeat=self.k):
            if canonical(self.spec, a) == a:
                yield a

    @property
    def n_vertices(self) -> int:
        return vertex_count(self.spec, self.k)

    @property
    def n_edges(self) -> int:
        return self.spec.r**self.k

    @property
    def top_gluing(self) -> dict[int, Address]:
        return top_gluing(self.spec, self.k) if self.k >= 2 else {}


def canonical_codes(spec: PolygonSpec, k: int) -> np.ndarray:
    """Canonical code for every address code ``0 .. r**k - 1``.

    Codes read the address with the first letter most significant, so integer
    order is lexicographic order.
    """
    r, f = spec.r, spec.f
    n = r**k
    codes = np.arange(n, dtype=np.int64)
    pw = r ** np.arange(k - 1, -1, -1, dtype=np.int64)
    digits = ((codes[:, None] // pw) % r).astype(np.int8)
    c = digits[:, 0].astype(np.int64)
    neq = digits != digits[:, :1]
    has = neq.any(axis=1)
    run = np.where(has, neq.argmax(axis=1), k)
    idx = np.flatnonzero(has)
    run = run[idx]
    c = c[idx]
    b = digits[idx, run].astype(np.int64)
    diff = (c - b) % r
    form1 = diff == f % r
    form2 = diff == (2 * f) % r
    glued = form1 | form2
    idx, run, c, b, form1 = idx[glued], run[glued], c[glued], b[glued], form1[glued]
    x = np.where(form1, (b + 1 + 2 * f) % r, (b - 1 + f) % r)
    y = np.where(form1, (b + 1) % r, (b - 1) % r)
    # geom[l] = sum of the l most significant place values
    geom = np.concatenate([[0], np.cumsum(pw)])
    place = pw[run]
    old = c * geom[run] + b * place
    new = x * geom[run] + y * place
    partner = codes[idx] - old + new
    canon = codes.copy()
    canon[idx] = np.minimum(codes[idx], partner)
    return canon


class LevelGraph:
    """Materialized ``Gamma_k``: sorted canonical codes plus CSR adjacency."""

    materialized = True

    def __init__(self, spec: PolygonSpec, k: int):
        if k < 1:
            raise SierpolyError("level must be at least 1")
        self.spec = spec
        self.k = k
        r = spec.r
        self._pw = r ** np.arange(k - 1, -1, -1, dtype=np.int64)
        canon = canonical_codes(spec, k)
        self.codes = np.unique(canon)
        idx = np.searchsorted(self.codes, canon)
        first = np.arange(r**k, dtype=np.int64) // self._pw[0]
        shifted = np.arange(r**k, dtype=np.int64) + (((first + 1) % r) - first) * self._pw[0]
        u, v = idx, idx[shifted]
        n = len(self.codes)
        adj = sparse.coo_matrix((np.ones(2 * len(u), dtype=np.int8), (np.r_[u, v], np.r_[v, u])), shape=(n, n))
        adj = adj.tocsr()
        adj.sum_duplicates()
        adj.sort_indices()
        self.adjacency = adj
        self.n_edges = int(adj.nnz // 2)
        self._class_index = idx

    @property
    def n_vertices(self) -> int:
        return len(self.codes)

    def code(self, a: Address) -> int:
        return int(np.dot(np.asarray(a, dtype=np.int64), self._pw))

    def address(self, i: int) -> Address:
        c = int(self.codes[i])
        return tuple(int(x) for x in (c // self._pw) % self.spec.r)

    def index(self, a: Address) -> int:
        """Vertex index of any member address ``a``."""
        a = _check_vertex(self.spec, self.k, tuple(a))
        return int(self._class_index[self.code(a)])

    def indices(self, addresses: Iterable[Address]) -> np.ndarray:
        return np.array([self.index(a) for a in addresses], dtype=np.int64)

    def canonical(self, a: Address) -> Address:
        return self.address(self.index(a))

    def __contains__(self, v) -> bool:
        v = tuple(v)
        if len(v) != self.k or any(not 0 <= x < self.spec.r for x in v):
            return False
        return int(self.codes[self.index(v)]) == self.code(v)

    def neighbor_indices(self, i: int) -> np.ndarray:
        a = self.adjacency
        return a.indices[a.indptr[i]:a.indptr[i + 1]]

    def neighbors(self, v: Address) -> list[Address]:
        return [self.address(j) for j in self.neighbor_indices(self.index(v))]

    def degrees(self) -> np.ndarray:
        return np.diff(self.adjacency.indptr)

    def vertices(self) -> Iterator[Address]:
        for i in range(self.n_vertices):
            yield self.address(i)

    def edges(self) -> Iterator[tuple[Address, Address]]:
        coo = sparse.triu(self.adjacency, k=1).tocoo()
        order = np.lexsort((coo.col, coo.row))
        for i, j in zip(coo.row[order], coo.col[order]):
            yield self.address(int(i)), self.address(int(j))

    @cached_property
    def top_gluing(self) -> dict[int, Address]:
        return top_gluing(self.spec, self.k) if self.k >= 2 else {}


Graph = LevelGraph | ImplicitLevelGraph


def build_level_graph(
    spec: PolygonSpec,
    k: int,
    mode: Literal["materialized", "implicit", "auto"] = "auto",
    budget: int = DEFAULT_BUDGET,
) -> Graph:
    size = spec.r**k
    if mode == "auto":
        mode = "materialized" if size <= budget else "implicit"
    if mode == "implicit":
        return ImplicitLevelGraph(spec, k)
    if mode != "materialized":
        raise SierpolyError(f"unknown mode {mode!r}")
    if size > budget:
        raise BudgetExceeded(
            f"r^k = {size} addresses exceeds the materialization budget {budget}; use implicit mode"
        )
    return LevelGraph(spec, k)


# ---------------------------------------------------------------- exports


def _edge_list(g: Graph) -> list[tuple[Address, Address]]:
    if isinstance(g, LevelGraph):
        return list(g.edges())
    out = set()
    for v in g.vertices():
        for w in g.neighbors(v):
            out.add((min(v, w), max(v, w)))
    return sorted(out)


def _vertex_list(g: Graph) -> list[Address]:
    return list(g.vertices())


def export_graph(g: Graph, fmt: Literal["edgelist", "dot", "graphml", "json"]) -> str:
    r = g.spec.r
    name = lambda a: format_word(a, r)  # noqa: E731
    edges = _edge_list(g)
    if fmt == "edgelist":
        return "".join(f"{name(u)} {name(v)}\n" for u, v in edges)
    verts = _vertex_list(g)
    if fmt == "dot":
        lines = [f"graph gamma_{g.k}_r{r} {{"]
        lines += [f'  "{name(v)}";' for v in verts]
        lines += [f'  "{name(u)}" -- "{name(v)}";' for u, v in edges]
        lines.append("}")
        return "\n".join(lines) + "\n"
    if fmt == "graphml":
        root = ET.Element("graphml", xmlns="http://graphml.graphdrawing.org/xmlns")
        graph = ET.SubElement(root, "graph", id=f"gamma_{g.k}_r{r}", edgedefault="undirected")
        for v in verts:
            ET.SubElement(graph, "node", id=name(v))
        for n, (u, v) in enumerate(edges):
            ET.SubElement(graph, "edge", id=f"e{n}", source=name(u), target=name(v))
        ET.indent(root)
        return '<?xml version="1.0" encoding="UTF-8"?>\n' + ET.tostring(root, encoding="unicode") + "\n"
    if fmt == "json":
        doc = {
            "schemaVersion": 1,
            "spec": {"r": r, "f": g.spec.f, "ftilde": g.spec.ftilde},
            "k": g.k,
            "vertices": [name(v) for v in verts],
            "edges": [[name(u), name(v)] for u, v in edges],
            "topGluing": {str(i): name(v) for i, v in sorted(g.top_gluing.items())},
        }
        return json.dumps(doc, sort_keys=True) + "\n"
    raise SierpolyError(f"unknown export format {fmt!r}")
