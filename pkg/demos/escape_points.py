"""The f*conj(g) case: how zeros of g turn into circles of the polyhedron.

For x*conj(y) the fibre x = t/conj(y) is an annulus; the sheet runs off
the eps-disc as y approaches 0, and the polyhedron is one circle with a
whisker.  Adding the cusp, (x^2+y^3)*conj(y), both sheets escape together
and are swapped by the loop around y = 0.

Run: python3 demos/escape_points.py
"""
from lepoly.oracle import annulus_oracle
from lepoly.pipeline import RunConfig, run_pipeline

for f, g in [("x", "y"), ("x^2+y^3", "y"), ("x^2-y^2", "y")]:
    report = run_pipeline(RunConfig(f=f, g=g))
    d = report.data
    poly = d["polyhedron"]
    print(f"f={f}, g={g}")
    print(f"  polar points: {d['special_points']['k']}")
    for e in d["special_points"]["escape"]:
        print(f"  escape point {e['id']} at y={e['y']}: orbits {e['orbits']}")
    print(f"  (chi, b0, b1) = ({poly['chi']}, {poly['b0']}, {poly['b1']}), defect formula chi = {poly['defect_chi']}")
    if (f, g) == ("x", "y"):
        geo = d["geometry"]
        print("  annulus oracle:", annulus_oracle(complex(*geo["t"]), geo["eps"], geo["eta1"]))
