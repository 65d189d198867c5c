"""End-to-end orchestration: parse, validate, expand, place, track, assemble, report."""
from __future__ import annotations

import cmath
import csv
import io
import json
import logging
import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from .algebra import PolyParseError, poly_parse
from .discriminant import (
    Geometry,
    GeometryOptions,
    polar_series,
    select_geometry,
)
from .errors import ConfigError, ConsistencyError, GeometryError, HypothesisError, TrackingError
from .germ import check_hypotheses, polar_components
from .oracle import annulus_oracle, brute_force_fibre_count, milnor_oracle
from .polyhedron import (
    LePolyhedron,
    build_polyhedron,
    collapse_summary,
    defect_chi,
    euler_and_betti,
    to_dict as polyhedron_dict,
)
from .puiseux import branch_residual, residual_slope
from .tracking import (
    FibreModel,
    FibreSample,
    PathTrackResult,
    TrackOptions,
    circle,
    compose,
    cycles,
    escape_record,
    fibre_roots,
    monodromy_around,
    polar_partition,
    polyline,
    track_loop,
    track_path,
)

log = logging.getLogger(__name__)


@dataclass
class RunConfig:
    f: str
    g: str = "1"
    t: float | None = None          # magnitude of t; None selects it automatically
    arg_t: float = 0.0
    seed: int = 0
    trunc: int = 20
    tol_root: float = 1e-10
    cluster_tol: float = 1e-6
    guard: float = 1e-2
    escape_margin: float = 1e-3
    eps: float = 0.5
    eta1: float = 0.05
    max_step_rel: float = 0.1
    max_retries: int = 6
    oracle: bool = False

    def validate(self) -> None:
        for name in ("tol_root", "cluster_tol", "guard", "escape_margin", "eps", "eta1", "max_step_rel"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise ConfigError(f"{name} must be a positive finite number, got {v!r}")
        if self.t is not None and not (math.isfinite(self.t) and self.t > 0):
            raise ConfigError(f"t must be a positive magnitude or auto, got {self.t!r}")
        if not math.isfinite(self.arg_t):
            raise ConfigError("arg_t must be finite")
        if self.trunc < 1:
            raise ConfigError("truncation order must be at least 1")
        if self.max_retries < 0:
            raise ConfigError("max_retries must be nonnegative")


@dataclass
class Report:
    data: dict
    polyhedron: LePolyhedron | None = None
    tracks: list[PathTrackResult] = field(default_factory=list, repr=False)
    timings: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.data.get("status") == "ok"

    def to_json(self) -> str:
        return json.dumps(self.data, indent=2, ensure_ascii=False) + "\n"

    def trajectories_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["path", "kind", "sample", "y_re", "y_im", "sheet", "x_re", "x_im"])
        for tr in self.tracks:
            for i, (y, xs) in enumerate(zip(tr.samples_y, tr.samples_x)):
                for s, x in enumerate(xs):
                    w.writerow([tr.path_id, tr.kind, i, repr(y.real), repr(y.imag), s + 1,
                                repr(x.real), repr(x.imag)])
        return buf.getvalue()


def _num(v: float) -> float:
    """Round to 12 significant digits so reports do not carry float noise."""
    v = float(v)
    if v == 0 or not math.isfinite(v):
        return 0.0 if v == 0 else v
    return float(f"{v:.12g}")


def _clean(obj):
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _num(obj)
    if isinstance(obj, complex):
        return [_num(obj.real), _num(obj.imag)]
    return obj


def _one_based(p) -> list[int]:
    return [i + 1 for i in p]


# ---------------------------------------------------------------------------
# tracking stage
# ---------------------------------------------------------------------------

@dataclass
class _Tracked:
    tracks: list[PathTrackResult]
    local: dict[str, tuple[int, ...]]
    outer: PathTrackResult
    details: dict


def _branch_check(branch, component) -> dict:
    """Residual of the truncated branch at y-radius 1e-2 and its log-log slope
    down to 1e-3 (``None`` for exact branches, whose residual vanishes)."""
    if branch.is_x_axis:
        return {"residual": 0.0, "residual_slope": None}
    r = 1e-2 ** (1.0 / branch.n)
    res = max(branch_residual(branch, component, r * cmath.exp(1j * a)) for a in (0.3, 1.9, 4.1))
    slope = None if branch.exact else residual_slope(branch, component, 1e-2, 1e-3)
    return {"residual": res, "residual_slope": None if slope is None or math.isinf(slope) else slope}


def _track_all(f, g, geo: Geometry, cfg: RunConfig) -> _Tracked:
    model = FibreModel(f, g, geo.t, geo.eps)
    opts = TrackOptions(max_step_rel=cfg.max_step_rel, tol_root=cfg.tol_root, escape_margin=cfg.escape_margin)
    base = fibre_roots(model, geo.lam, tol_root=cfg.tol_root)
    scale = max(float(np.max(np.abs(base.roots))), 1e-300)
    specials = [p.y for p in geo.points]
    limit = geo.eps * (1 - cfg.escape_margin)
    tracks: list[PathTrackResult] = []
    local: dict[str, tuple[int, ...]] = {}
    details: dict = {}
    for pid in geo.order:
        pt = geo.point(pid)
        path = geo.path(pid)
        res = track_path(model, path.vertices, base, specials, stop_short=path.stop_radius,
                         opts=opts, path_id=pid, scale=scale)
        end = FibreSample(res.final_y, res.final_roots, np.abs(res.final_roots) <= geo.eps)
        loop = monodromy_around(model, pt.y, path.stop_radius, end, specials, opts=opts,
                                path_id=f"loop:{pid}", scale=scale)
        perm = loop.permutation
        local[pid] = perm
        if pt.kind == "polar":
            peak = float(np.max(np.abs(res.trajectories())))
            if peak >= limit:
                raise GeometryError(f"lift of the path to {pid} leaves the eps-disc (max |x| = {peak:.3g})")
            clusters = polar_partition(model, pt.y, res.final_roots, scale, rel_tol=cfg.cluster_tol)
            merged = [c for c in clusters if len(c) > 1]
            nontrivial = [c for c in cycles(perm) if len(c) > 1]
            if sorted(tuple(sorted(c)) for c in nontrivial) != sorted(merged):
                raise TrackingError(f"local monodromy at {pid} {cycles(perm)} disagrees with clusters {clusters}")
            res.terminal = {"kind": "polar", "clusters": clusters}
            details[pid] = {"steps": res.steps + loop.steps, "rejected": res.rejected + loop.rejected,
                            "max_abs_x": peak, "clusters": [_one_based(c) for c in clusters]}
        else:
            rec = escape_record(model, res, cfg.escape_margin)
            escaping = rec["escaping"]
            if len(escaping) != model.n:
                raise TrackingError(f"only {len(escaping)} of {model.n} sheets escape at {pid}")
            bad = [s for s in escaping if rec["crossings"][s] != 1]
            if bad:
                raise TrackingError(f"sheets {_one_based(bad)} cross |x| = eps more than once on the way to {pid}")
            orbits = cycles(perm, escaping)
            res.terminal = {"kind": "escape", "orbits": orbits, "permutation": perm, "escaping": escaping,
                            "exit_sample": rec["exit_sample"]}
            details[pid] = {"steps": res.steps + loop.steps, "rejected": res.rejected + loop.rejected,
                            "escaping": _one_based(escaping), "exit_sample": rec["exit_sample"],
                            "orbits": [_one_based(o) for o in orbits]}
        tracks.append(res)
        tracks.append(loop)
    tail = geo.outer_tail
    start = tail[-1]
    curves = [polyline(tail), circle(0j, abs(start), math.atan2(start.imag, start.real)),
              polyline(tail[::-1])]
    outer = track_loop(model, curves, base, specials, opts=opts, path_id="outer", scale=scale)
    if not any(p.kind == "escape" for p in geo.points):
        peak = float(np.max(np.abs(outer.trajectories())))
        if peak >= limit:
            raise GeometryError(f"outer loop leaves the eps-disc (max |x| = {peak:.3g})")
    tracks.append(outer)
    details["outer"] = {"steps": outer.steps, "rejected": outer.rejected}
    return _Tracked(tracks, local, outer, details)


def _monodromy_product(order, local, n) -> tuple[int, ...]:
    prod = tuple(range(n))
    for pid in order:
        prod = compose(prod, local[pid])
    return prod


# ---------------------------------------------------------------------------
# main entry point
# ---------------------------------------------------------------------------

def run_pipeline(cfg: RunConfig) -> Report:
    """Run every stage and return the report; failures raise a ``LepolyError``
    subclass whose ``exit_code`` the CLI passes through."""
    timings: dict[str, float] = {}
    clock = time.perf_counter()

    def lap(name):
        nonlocal clock
        now = time.perf_counter()
        timings[name] = now - clock
        clock = now

    cfg.validate()
    try:
        f = poly_parse(cfg.f)
        g = poly_parse(cfg.g)
    except PolyParseError as exc:
        raise ConfigError(f"cannot parse polynomial: {exc}") from exc
    lap("parse")

    hyp = check_hypotheses(f, g)
    if not hyp.ok:
        detail = [m for m in hyp.messages if not m.startswith("note") and ("≠" in m or " not " in m or "depends on x" in m)]
        raise HypothesisError("hypotheses failed: " + ", ".join(hyp.failures()) + "; " + "; ".join(detail),
                              {"hypotheses": hyp.to_dict()})
    n = f.degree("x")
    lap("hypotheses")

    comps = polar_components(f, g)
    indexed = polar_series(f, g, order=cfg.trunc)
    series = [s for _, s in indexed]
    branches = [(ci, s.branch) for ci, s in indexed]
    lap("puiseux")

    attempts = cfg.max_retries + 1 if cfg.t is None else 1
    last: Exception | None = None
    geo = tracked = None
    shrink = 0
    for attempt in range(attempts):
        gopts = GeometryOptions(eps=cfg.eps, eta1=cfg.eta1, t=None if cfg.t is None else
                                cfg.t * complex(math.cos(cfg.arg_t), math.sin(cfg.arg_t)),
                                arg_t=cfg.arg_t, seed=cfg.seed, max_retries=max(cfg.max_retries - shrink, 0),
                                escape_margin=cfg.escape_margin, guard_factor=cfg.guard, t_shrink=shrink)
        geo = select_geometry(f, g, series, gopts)
        try:
            tracked = _track_all(f, g, geo, cfg)
            break
        except (TrackingError, GeometryError) as exc:
            last = exc
            log.info("tracking attempt %d failed: %s", attempt + 1, exc)
            shrink += geo.attempts
            if cfg.t is not None or shrink > cfg.max_retries:
                break
    if tracked is None:
        raise last
    lap("geometry+tracking")

    polar_pts = [p for p in geo.points if p.kind == "polar"]
    escape_pts = [p for p in geo.points if p.kind == "escape"]
    P = build_polyhedron(geo, [t for t in tracked.tracks if t.kind == "path"], n)
    chi, b0, b1 = euler_and_betti(P)
    terminals = {t.path_id: t.terminal for t in tracked.tracks if t.kind == "path"}
    ms = [len(terminals[p.id]["clusters"]) for p in polar_pts]
    ne = [len(terminals[p.id]["escaping"]) for p in escape_pts]
    dchi = defect_chi(n, ms, ne)

    checks: dict = {}
    for p, m in zip(polar_pts, ms):
        sizes = [len(c) for c in terminals[p.id]["clusters"]]
        if sum(sizes) != n or max(sizes) != p.cluster_size or m != n - (p.cluster_size - 1):
            raise ConsistencyError(f"cluster sizes {sizes} at {p.id} do not match the polar multiplicity "
                                   f"(expected a cluster of {p.cluster_size})")
    checks["cluster_sizes"] = "pass"
    if dchi != chi:
        raise ConsistencyError(f"defect formula gives chi={dchi} but the graph has chi={chi}")
    checks["defect_chi"] = "pass"
    product = _monodromy_product(geo.order, tracked.local, n)
    outer = tracked.outer.permutation
    if product != outer:
        raise ConsistencyError(f"monodromy product {_one_based(product)} differs from outer loop {_one_based(outer)}")
    checks["monodromy_product"] = "pass"
    if b0 != 1:
        raise ConsistencyError(f"polyhedron has {b0} connected components")
    checks["connected"] = "pass"
    lap("polyhedron")

    oracle = None
    if cfg.oracle:
        oracle = {}
        if hyp.mode == "holomorphic":
            res = milnor_oracle(f)
            oracle["milnor_number"] = res.to_dict()
            oracle["milnor_number"]["matches_b1"] = res.value == b1
        else:
            oracle["milnor_number"] = None
        if f == poly_parse("x") and g == poly_parse("y"):
            val = annulus_oracle(geo.t, geo.eps, geo.eta1)
            oracle["annulus"] = {"value": list(val), "matches": val == (chi, b0, b1)}
        fc = brute_force_fibre_count(f, g, geo.t, geo.eps, geo.eta1, grid=32)
        oracle["fibre_count"] = {"histogram": {str(k): v for k, v in fc.histogram.items()}, "mode": fc.mode,
                                 "mode_equals_n": fc.mode == n}
        lap("oracle")

    coll = collapse_summary(P)
    data = {
        "tool": {"name": "lepoly", "version": __version__},
        "config": asdict(cfg),
        "status": "ok",
        "hypotheses": hyp.to_dict(),
        "n": n,
        "polar_curve": [{"component": str(c), "multiplicity": k} for c, k in comps],
        "branches": [dict(component=ci, **br.to_dict(), **_branch_check(br, s.component))
                     for (ci, br), s in zip(branches, series)],
        "series": [s.to_dict() for s in series],
        "geometry": geo.to_dict(),
        "special_points": {
            "k": len(polar_pts),
            "polar": [p.to_dict() | {"clusters": [_one_based(c) for c in terminals[p.id]["clusters"]],
                                     "m": len(terminals[p.id]["clusters"])} for p in polar_pts],
            "escape": [p.to_dict() | {"orbits": [_one_based(o) for o in terminals[p.id]["orbits"]],
                                      "escaping": _one_based(terminals[p.id]["escaping"])}
                       for p in escape_pts],
        },
        "monodromy": {
            "order": list(geo.order),
            "local": {pid: _one_based(tracked.local[pid]) for pid in geo.order},
            "product": _one_based(product),
            "outer": _one_based(outer),
            "check": "pass",
        },
        "tracking": tracked.details,
        "polyhedron": {
            "V": P.V, "E": P.E, "chi": chi, "b0": b0, "b1": b1, "defect_chi": dchi,
            "collapse": {"vertices": coll.vertices, "edges": coll.edges, "statement": coll.statement},
            "graph": polyhedron_dict(P),
        },
        "checks": checks,
        "oracle": oracle,
    }
    return Report(_clean(data), P, tracked.tracks, timings)
