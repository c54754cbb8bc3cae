from __future__ import annotations

import json
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from sierpoly.construction import (
    BudgetExceeded,
    ImplicitLevelGraph,
    LevelGraph,
    build_level_graph,
    copy_embedding,
    export_graph,
    neighbors,
    top_gluing,
    vertex_count,
)
from sierpoly.core import MalformedAddress, canonical, make_spec, parse_word

w = parse_word
S6 = make_spec(6)

# |V_k| from full enumeration of canonical addresses
COUNTS = {
    3: [3, 6, 15, 42, 123],
    5: [5, 20, 95, 470, 2345],
    6: [6, 30, 174, 1038, 6222],
    7: [7, 42, 287, 2002, 14007],
    9: [9, 72, 639, 5742, 51669],
}


@pytest.mark.parametrize("r", sorted(COUNTS))
def test_counts_by_enumeration(r):
    spec = make_spec(r)
    for k, expected in enumerate(COUNTS[r], start=1):
        g = LevelGraph(spec, k)
        assert g.n_vertices == expected == vertex_count(spec, k)
        assert g.n_edges == r**k
        assert set(np.unique(g.degrees())) <= {2, 3, 4}


def test_small_levels():
    g1 = LevelGraph(S6, 1)
    assert (g1.n_vertices, g1.n_edges) == (6, 6)
    assert g1.neighbors((0,)) == [(1,), (5,)]
    assert (LevelGraph(S6, 2).n_vertices, LevelGraph(S6, 2).n_edges) == (30, 36)
    assert (LevelGraph(S6, 3).n_vertices, LevelGraph(S6, 3).n_edges) == (174, 216)


def test_neighbors_of_glued_vertex():
    expected = [w("104"), w("235"), w("435"), w("504")]
    assert neighbors(S6, 3, w("004")) == expected
    assert neighbors(S6, 3, w("335")) == expected
    assert LevelGraph(S6, 3).neighbors(w("335")) == expected
    assert len(neighbors(S6, 3, w("012"))) == 2


@pytest.mark.parametrize("r,k", [(3, 4), (5, 3), (6, 3), (7, 3)])
def test_implicit_and_materialized_agree(r, k):
    spec = make_spec(r)
    mat, imp = LevelGraph(spec, k), ImplicitLevelGraph(spec, k)
    assert list(mat.vertices()) == list(imp.vertices())
    for v in mat.vertices():
        assert mat.neighbors(v) == imp.neighbors(v)
        assert v in mat and v in imp


def test_top_gluing():
    assert top_gluing(S6, 3)[4] == w("004")
    assert top_gluing(S6, 3)[5] == w("115")
    assert top_gluing(make_spec(5), 2)[0] == w("01")
    assert canonical(make_spec(5), w("20")) == w("01")


def test_copy_embedding():
    assert copy_embedding(S6, 3, 4, w("04")) == canonical(S6, w("044"))
    assert copy_embedding(S6, 3, 2, w("04")) == copy_embedding(S6, 3, 2, w("35"))
    g = LevelGraph(S6, 3)
    for i in range(6):
        assert copy_embedding(S6, 3, i, w("10")) in g.neighbors(copy_embedding(S6, 3, i, w("00")))


def test_budget_and_errors():
    with pytest.raises(BudgetExceeded, match="implicit"):
        build_level_graph(S6, 8, "materialized", budget=10**5)
    assert isinstance(build_level_graph(S6, 8, budget=10**5), ImplicitLevelGraph)
    with pytest.raises(MalformedAddress):
        neighbors(S6, 3, w("06"))
    with pytest.raises(MalformedAddress):
        neighbors(S6, 3, w("00"))


def test_exports_agree():
    g = LevelGraph(S6, 2)
    edges = export_graph(g, "edgelist").splitlines()
    assert len(edges) == 36
    doc = json.loads(export_graph(g, "json"))
    assert doc["k"] == 2 and len(doc["vertices"]) == 30 and len(doc["edges"]) == 36
    assert [" ".join(e) for e in doc["edges"]] == edges
    assert doc["topGluing"]["0"] == "20"
    root = ET.fromstring(export_graph(g, "graphml").split("\n", 1)[1])
    ns = "{http://graphml.graphdrawing.org/xmlns}"
    assert len(root.findall(f"{ns}graph/{ns}node")) == 30
    assert len(root.findall(f"{ns}graph/{ns}edge")) == 36
    dot = export_graph(g, "dot")
    assert dot.count(" -- ") == 36
    assert export_graph(ImplicitLevelGraph(S6, 2), "json") == export_graph(g, "json")
