"""Walk through every stage for the cusp f = x^2 + y^3 (holomorphic case).

Run: python3 demos/cusp_walkthrough.py
"""
from lepoly.algebra import poly_parse
from lepoly.discriminant import polar_series, select_geometry
from lepoly.germ import check_hypotheses, polar_components
from lepoly.oracle import milnor_number_resultant
from lepoly.pipeline import RunConfig, run_pipeline
from lepoly.polyhedron import export_graph

f, g = poly_parse("x^2+y^3"), poly_parse("1")
print("f =", f)

hyp = check_hypotheses(f, g)
print("hypotheses ok:", hyp.ok, "| mode:", hyp.mode)

print("polar curve components:", [(str(c), k) for c, k in polar_components(f, g)])
series = [s for _, s in polar_series(f, g)]
for s in series:
    p, q, c = s.leading
    print(f"v(w) leading term: {c} w^{p} conj(w)^{q}  -> {abs(p - q)} polar points")

geo = select_geometry(f, g, series)
print(f"eta1={geo.eta1} t={geo.t:.3e} lambda={geo.lam}")
for pt in geo.points:
    print(f"  {pt.id}: y = {pt.y:.6f}")

report = run_pipeline(RunConfig(f="x^2+y^3"))
poly = report.data["polyhedron"]
print("local monodromy:", report.data["monodromy"]["local"])
print("outer monodromy:", report.data["monodromy"]["outer"])
print(f"P_t: V={poly['V']} E={poly['E']} chi={poly['chi']} b0={poly['b0']} b1={poly['b1']}")
print("Milnor number from resultants:", milnor_number_resultant(f))
print()
print(export_graph(report.polyhedron, "dot").decode())
