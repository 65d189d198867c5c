import json

import pytest

from lepoly.errors import ConfigError, HypothesisError
from lepoly.pipeline import RunConfig, run_pipeline
from lepoly.polyhedron import from_json, to_dict


def test_report_layout(run):
    report, _ = run("x^2+y^3")
    d = json.loads(report.to_json())
    assert list(d) == ["tool", "config", "status", "hypotheses", "n", "polar_curve", "branches", "series",
                       "geometry", "special_points", "monodromy", "tracking", "polyhedron", "checks", "oracle"]
    assert d["status"] == "ok" and report.ok
    assert d["tool"]["name"] == "lepoly"
    assert set(d["checks"].values()) == {"pass"}


def test_report_graph_round_trips(run):
    report, _ = run("x^2+y^3", "y")
    graph = report.data["polyhedron"]["graph"]
    Q = from_json(json.dumps(graph))
    assert to_dict(Q) == graph
    assert [e.endpoints for e in Q.edges] == [e.endpoints for e in report.polyhedron.edges]


def test_permutations_are_one_based(run):
    report, _ = run("x^2+y^3")
    local = report.data["monodromy"]["local"]
    assert all(sorted(p) == [1, 2] for p in local.values())


def test_trajectories_csv(run):
    report, _ = run("x", "y")
    lines = report.trajectories_csv().splitlines()
    assert lines[0] == "path,kind,sample,y_re,y_im,sheet,x_re,x_im"
    assert len(lines) > 10


def test_holomorphic_line_gives_a_point(run):
    report, _ = run("x")
    p = report.data["polyhedron"]
    assert (p["V"], p["E"], p["chi"], p["b1"]) == (1, 0, 1, 0)
    assert report.data["special_points"]["k"] == 0


def test_node_times_conj_y(run):
    report, _ = run("x^2-y^2", "y")
    p = report.data["polyhedron"]
    assert (p["chi"], p["b0"], p["b1"]) == (-1, 1, 2)
    assert report.data["special_points"]["k"] == 1


@pytest.mark.parametrize("f,g,needle", [
    ("x^2+y", "y", "balanced"),
    ("x^2", "1", "f_reduced"),
    ("x*y+y^2", "1", "f_x_regular"),
    ("x", "x", "g_univariate"),
    ("x*y", "y", "gcd(f,g) ≠ 1"),
])
def test_hypothesis_failures(f, g, needle):
    with pytest.raises(HypothesisError) as exc:
        run_pipeline(RunConfig(f=f, g=g))
    assert needle in str(exc.value)
    assert exc.value.exit_code == 2


def test_config_errors():
    with pytest.raises(ConfigError):
        run_pipeline(RunConfig(f="x+"))
    with pytest.raises(ConfigError):
        run_pipeline(RunConfig(f="x", eps=-1.0))
    with pytest.raises(ConfigError):
        run_pipeline(RunConfig(f="x", trunc=0))


def test_fixed_t_is_honoured():
    report = run_pipeline(RunConfig(f="x^2+y^3", t=1e-7, arg_t=0.5))
    assert report.data["polyhedron"]["b1"] == 2
    t = report.data["geometry"]["t"]
    assert abs(complex(*t)) == pytest.approx(1e-7)


def test_adversarial_germ_recovers_after_retry(run):
    from test_discriminant import ADVERSARIAL
    report, _ = run(ADVERSARIAL)
    assert report.data["geometry"]["attempts"] == 2
    assert report.data["polyhedron"]["b1"] == 4
    assert report.data["oracle"]["milnor_number"]["value"] == 4


def test_truncated_polar_branches(run):
    report, _ = run("x^3+x^2*y^2+x*y^3+y^7")
    assert [b["truncation"] for b in report.data["branches"]] == ["23/2"]
    assert report.data["polyhedron"]["b1"] == 7
    assert report.data["oracle"]["milnor_number"]["value"] == 7
