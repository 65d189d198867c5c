"""Local monodromies around the polar points of x^3 - x y^5 + y^7 and their product.

The loops are ordered counterclockwise by the direction in which their
paths leave the base point; composing them in that order reproduces the
permutation of the loop along the boundary of the y-disc.

Run: python3 demos/monodromy.py
"""
from lepoly.pipeline import RunConfig, run_pipeline

report = run_pipeline(RunConfig(f="x^3-x*y^5+y^7"))
m = report.data["monodromy"]
for pid in m["order"]:
    print(f"{pid}: {m['local'][pid]}")
print("ordered product:", m["product"])
print("outer loop:     ", m["outer"])
print("check:", m["check"])
print("b1 =", report.data["polyhedron"]["b1"])
