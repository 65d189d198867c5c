"""The polyhedron ``P_t`` as an explicit graph, its invariants and exports."""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .errors import ConsistencyError
from .tracking import cycles


@dataclass(frozen=True)
class Vertex:
    id: str
    kind: str            # "center" | "polar" | "escape"
    labels: dict = field(default_factory=dict, compare=False, hash=False)


@dataclass(frozen=True)
class Edge:
    id: str
    kind: str            # "lift" | "whisker" | "arc"
    endpoints: tuple[str, str]
    labels: dict = field(default_factory=dict, compare=False, hash=False)


@dataclass
class LePolyhedron:
    """One-dimensional complex: ``n`` centre vertices (the fibre over the
    base point), polar cluster vertices joined to them by path lifts, and
    one cycle of arcs per escape orbit, attached by whiskers."""
    n: int
    vertices: list[Vertex]
    edges: list[Edge]
    provenance: dict = field(default_factory=dict)

    @property
    def V(self) -> int:
        return len(self.vertices)

    @property
    def E(self) -> int:
        return len(self.edges)

    def incidence(self) -> dict[str, list[str]]:
        inc: dict[str, list[str]] = {v.id: [] for v in self.vertices}
        for e in self.edges:
            for u in e.endpoints:
                inc[u].append(e.id)
        return inc

    def validate(self) -> None:
        ids = [v.id for v in self.vertices]
        if len(set(ids)) != len(ids):
            raise ConsistencyError("duplicate vertex ids")
        eids = [e.id for e in self.edges]
        if len(set(eids)) != len(eids):
            raise ConsistencyError("duplicate edge ids")
        kinds = {v.id: v.kind for v in self.vertices}
        for e in self.edges:
            if any(u not in kinds for u in e.endpoints):
                raise ConsistencyError(f"edge {e.id} has an unknown endpoint")
            if e.kind == "lift" and sorted(kinds[u] for u in e.endpoints) != ["center", "polar"]:
                raise ConsistencyError(f"lift {e.id} must join a centre and a polar vertex")

    def __eq__(self, other):
        if not isinstance(other, LePolyhedron):
            return NotImplemented
        return (self.n == other.n and self.provenance == other.provenance
                and [(v.id, v.kind, v.labels) for v in self.vertices]
                == [(v.id, v.kind, v.labels) for v in other.vertices]
                and [(e.id, e.kind, e.endpoints, e.labels) for e in self.edges]
                == [(e.id, e.kind, e.endpoints, e.labels) for e in other.edges])


def assemble_polyhedron(n: int, polar: Sequence[tuple[str, Sequence[Sequence[int]]]] = (),
                        escape: Sequence[tuple[str, Sequence[Sequence[int]]]] = (),
                        provenance: Mapping | None = None) -> LePolyhedron:
    """Assemble ``P_t`` from sheet data.

    Parameters
    ----------
    n
        Covering degree; sheets are numbered ``0..n-1`` and shown 1-based.
    polar
        ``(point_id, clusters)`` per polar point; ``clusters`` partitions the
        sheets by the fibre point they reach.
    escape
        ``(point_id, orbits)`` per escape point; each orbit lists escaping
        sheets in the cyclic order of the local monodromy.
    """
    if n < 1:
        raise ValueError("covering degree must be positive")
    verts = [Vertex(f"c{s + 1}", "center", {"sheet": s + 1}) for s in range(n)]
    edges: list[Edge] = []
    for pid, clusters in polar:
        flat = sorted(s for c in clusters for s in c)
        if flat != list(range(n)):
            raise ConsistencyError(f"clusters at {pid} do not partition the {n} sheets: {clusters}")
        for ci, cl in enumerate(clusters):
            vid = f"{pid}.{ci + 1}"
            verts.append(Vertex(vid, "polar", {"point": pid, "cluster": ci + 1,
                                               "sheets": [s + 1 for s in cl]}))
            for s in cl:
                edges.append(Edge(f"L{pid}.{s + 1}", "lift", (f"c{s + 1}", vid),
                                  {"point": pid, "sheet": s + 1}))
    for pid, orbits in escape:
        flat = [s for o in orbits for s in o]
        if len(set(flat)) != len(flat) or any(not 0 <= s < n for s in flat):
            raise ConsistencyError(f"orbits at {pid} are not disjoint sheet sets: {orbits}")
        for oi, orb in enumerate(orbits):
            o = len(orb)
            ids = [f"{pid}.{oi + 1}.{a + 1}" for a in range(o)]
            for a, s in enumerate(orb):
                verts.append(Vertex(ids[a], "escape", {"point": pid, "orbit": oi + 1,
                                                       "attachment": a + 1, "sheet": s + 1}))
            for a, s in enumerate(orb):
                edges.append(Edge(f"A{pid}.{oi + 1}.{a + 1}", "arc", (ids[a], ids[(a + 1) % o]),
                                  {"point": pid, "orbit": oi + 1, "arc": a + 1}))
            for a, s in enumerate(orb):
                edges.append(Edge(f"W{pid}.{s + 1}", "whisker", (f"c{s + 1}", ids[a]),
                                  {"point": pid, "sheet": s + 1}))
    P = LePolyhedron(n, verts, edges, dict(provenance or {}))
    P.validate()
    return P


def geometry_digest(geometry) -> str:
    payload = json.dumps(geometry.to_dict(), sort_keys=True).encode()
    return hashlib.sha256(payload).hexdigest()[:16]


def build_polyhedron(geometry, tracks: Sequence, n: int) -> LePolyhedron:
    """Assemble ``P_t`` from the tracked paths of a :class:`Geometry`.

    ``tracks`` holds one result per planned path, matched by ``path_id``.
    Polar results carry ``terminal["clusters"]``; escape results carry
    ``terminal["orbits"]`` together with the loop ``permutation`` and the
    list of escaping sheets, and the orbits must be the cycles of that
    permutation on the escaping sheets.
    """
    by_id = {tr.path_id: tr for tr in tracks}
    polar, escape = [], []
    for pt in geometry.points:
        tr = by_id.get(pt.id)
        if tr is None:
            raise ConsistencyError(f"no track for special point {pt.id}")
        term = tr.terminal
        if pt.kind == "polar":
            if "clusters" not in term:
                raise ConsistencyError(f"track {pt.id} has no cluster partition")
            polar.append((pt.id, term["clusters"]))
        else:
            orbits = term.get("orbits")
            perm = term.get("permutation")
            if orbits is None or perm is None:
                raise ConsistencyError(f"track {pt.id} has no orbit data")
            expected = cycles(perm, term.get("escaping"))
            if sorted(map(tuple, orbits)) != sorted(expected):
                raise ConsistencyError(f"orbits at {pt.id} do not match the loop permutation")
            escape.append((pt.id, orbits))
    return assemble_polyhedron(n, polar, escape, {"geometry": geometry_digest(geometry),
                                                  "t": [geometry.t.real, geometry.t.imag],
                                                  "lambda": [geometry.lam.real, geometry.lam.imag]})


def euler_and_betti(P: LePolyhedron) -> tuple[int, int, int]:
    """``(chi, b0, b1)`` of the graph."""
    parent = {v.id: v.id for v in P.vertices}

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for e in P.edges:
        u, v = e.endpoints
        parent[find(u)] = find(v)
    b0 = len({find(v.id) for v in P.vertices})
    chi = P.V - P.E
    return chi, b0, P.E - P.V + b0


def defect_chi(n: int, polar_cluster_counts: Iterable[int], escape_sheet_counts: Iterable[int]) -> int:
    """``n - sum_j (n - m_j) - sum_e n_e``."""
    ms = list(polar_cluster_counts)
    if any(m > n or m < 1 for m in ms):
        raise ValueError(f"cluster counts must lie in 1..{n}: {ms}")
    return n - sum(n - m for m in ms) - sum(escape_sheet_counts)


def to_dict(P: LePolyhedron) -> dict:
    chi, b0, b1 = euler_and_betti(P)
    return {
        "n": P.n,
        "vertices": [{"id": v.id, "kind": v.kind, "labels": v.labels} for v in P.vertices],
        "edges": [{"id": e.id, "kind": e.kind, "endpoints": list(e.endpoints), "labels": e.labels}
                  for e in P.edges],
        "chi": chi,
        "b0": b0,
        "b1": b1,
        "provenance": P.provenance,
    }


def from_json(data: bytes | str) -> LePolyhedron:
    d = json.loads(data)
    P = LePolyhedron(
        d["n"],
        [Vertex(v["id"], v["kind"], v.get("labels", {})) for v in d["vertices"]],
        [Edge(e["id"], e["kind"], tuple(e["endpoints"]), e.get("labels", {})) for e in d["edges"]],
        d.get("provenance", {}),
    )
    P.validate()
    return P


def _dot_id(s: str) -> str:
    return '"' + s.replace('"', r'\"') + '"'


def export_graph(P: LePolyhedron, fmt: str) -> bytes:
    """Serialise as Graphviz DOT (undirected) or JSON."""
    if fmt == "json":
        return (json.dumps(to_dict(P), indent=2) + "\n").encode()
    if fmt == "dot":
        shapes = {"center": "box", "polar": "circle", "escape": "point"}
        lines = ["graph LePolyhedron {"]
        for v in P.vertices:
            lines.append(f"  {_dot_id(v.id)} [label={_dot_id(v.id)}, shape={shapes.get(v.kind, 'ellipse')}];")
        for e in P.edges:
            u, w = e.endpoints
            lines.append(f"  {_dot_id(u)} -- {_dot_id(w)} [label={_dot_id(e.id)}];")
        lines.append("}")
        return ("\n".join(lines) + "\n").encode()
    raise ValueError(f"unknown graph format {fmt!r}")


@dataclass(frozen=True)
class CollapseSummary:
    vertices: int
    edges: int
    statement: str

    @property
    def cells(self) -> int:
        return self.vertices + self.edges


def collapse_summary(P: LePolyhedron) -> CollapseSummary:
    """Bookkeeping for the collapsing map: every cell of ``P_t`` goes to the origin."""
    if P.V == 0:
        raise ValueError("polyhedron must be nonempty")
    return CollapseSummary(P.V, P.E,
                           f"{P.V} vertices + {P.E} edges -> {{0}}; "
                           "complement of P_t maps homeomorphically onto V minus the origin")
