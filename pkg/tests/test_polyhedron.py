import json

import pytest

from lepoly.errors import ConsistencyError
from lepoly.polyhedron import (
    Edge,
    LePolyhedron,
    Vertex,
    assemble_polyhedron,
    collapse_summary,
    defect_chi,
    euler_and_betti,
    export_graph,
    from_json,
    to_dict,
)


def _cusp():
    # x^2 + y^3 with g = 1: three polar points, each merging both sheets
    return assemble_polyhedron(2, polar=[(f"p{k}", [[0, 1]]) for k in range(3)])


def test_assemble_cusp():
    P = _cusp()
    assert (P.V, P.E) == (5, 6)
    assert euler_and_betti(P) == (-1, 1, 2)
    assert [v.id for v in P.vertices] == ["c1", "c2", "p0.1", "p1.1", "p2.1"]
    assert P.edges[0].id == "Lp0.1" and P.edges[0].endpoints == ("c1", "p0.1")


def test_assemble_annulus():
    # x * conj(y): one escape point whose single sheet forms a one-arc cycle
    P = assemble_polyhedron(1, escape=[("e0", [[0]])])
    assert (P.V, P.E) == (2, 2)
    assert euler_and_betti(P) == (0, 1, 1)
    assert {e.kind for e in P.edges} == {"arc", "whisker"}


def test_assemble_cusp_times_conj_y():
    P = assemble_polyhedron(2, polar=[("p0", [[0, 1]]), ("p1", [[0, 1]])], escape=[("e0", [[0, 1]])])
    assert (P.V, P.E) == (6, 8)
    assert euler_and_betti(P) == (-2, 1, 3)


def test_assemble_rejects_bad_partitions():
    with pytest.raises(ConsistencyError):
        assemble_polyhedron(2, polar=[("p0", [[0]])])
    with pytest.raises(ConsistencyError):
        assemble_polyhedron(2, escape=[("e0", [[0], [0]])])
    with pytest.raises(ValueError):
        assemble_polyhedron(0)


def test_euler_and_betti_trivial_graphs():
    single = LePolyhedron(1, [Vertex("c1", "center")], [])
    assert euler_and_betti(single) == (1, 1, 0)
    loop = LePolyhedron(1, [Vertex("c1", "center")], [Edge("A", "arc", ("c1", "c1"))])
    assert euler_and_betti(loop) == (0, 1, 1)
    two = LePolyhedron(2, [Vertex("c1", "center"), Vertex("c2", "center")], [])
    assert euler_and_betti(two) == (2, 2, 0)


def test_validate_rejects_malformed_graphs():
    P = LePolyhedron(1, [Vertex("c1", "center"), Vertex("c1", "center")], [])
    with pytest.raises(ConsistencyError):
        P.validate()
    P = LePolyhedron(1, [Vertex("c1", "center")], [Edge("L", "lift", ("c1", "c1"))])
    with pytest.raises(ConsistencyError):
        P.validate()
    P = LePolyhedron(1, [Vertex("c1", "center")], [Edge("A", "arc", ("c1", "zz"))])
    with pytest.raises(ConsistencyError):
        P.validate()


def test_defect_chi():
    assert defect_chi(2, [1, 1, 1], []) == -1
    assert defect_chi(1, [], [1]) == 0
    assert defect_chi(2, [1, 1], [2]) == -2
    assert defect_chi(3, [], []) == 3
    with pytest.raises(ValueError):
        defect_chi(2, [3], [])


def test_defect_chi_agrees_with_graph():
    P = assemble_polyhedron(3, polar=[("p0", [[0, 1], [2]]), ("p1", [[0], [1, 2]])], escape=[("e0", [[0, 2, 1]])])
    assert defect_chi(3, [2, 2], [3]) == euler_and_betti(P)[0]


def test_dot_export():
    dot = export_graph(_cusp(), "dot").decode()
    lines = dot.strip().splitlines()
    assert lines[0] == "graph LePolyhedron {" and lines[-1] == "}"
    assert sum("shape=" in ln for ln in lines) == 5
    assert sum(" -- " in ln for ln in lines) == 6
    assert "->" not in dot
    with pytest.raises(ValueError):
        export_graph(_cusp(), "svg")


def test_json_round_trip():
    P = assemble_polyhedron(2, polar=[("p0", [[0, 1]])], escape=[("e0", [[0, 1]])],
                            provenance={"geometry": "abc", "t": [1e-6, 0.0]})
    data = export_graph(P, "json")
    Q = from_json(data)
    assert Q == P
    d = json.loads(data)
    assert (d["chi"], d["b0"], d["b1"]) == euler_and_betti(P)
    assert to_dict(Q) == d


def test_empty_polar_curve_gives_a_point():
    # f = x, g = 1: no special points, the fibre is one sheet
    P = assemble_polyhedron(1)
    assert (P.V, P.E) == (1, 0)
    assert euler_and_betti(P) == (1, 1, 0)


def test_collapse_summary():
    s = collapse_summary(_cusp())
    assert (s.vertices, s.edges, s.cells) == (5, 6, 11)
    assert s.statement.startswith("5 vertices + 6 edges")
    with pytest.raises(ValueError):
        collapse_summary(LePolyhedron(0, [], []))
