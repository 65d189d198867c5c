"""A germ built so that the first automatic t fails the separation check.

f = x^3 + x^2 y/2 - c x^2 y^2 + y^3 has two polar branches, x = 0 and
x = -y/3 + gamma y^2.  The coefficient c is chosen so that their
discriminant images cross at |y| = eta1 * 10^(-1/3), exactly where the
first t puts a polar point on each branch.  Geometry selection reports
the collision and retries with t/10.

Run: python3 demos/adversarial_retry.py
"""
from lepoly.pipeline import RunConfig, run_pipeline

F = "x^3+1/2*x^2*y-58240359/2703278*x^2*y^2+y^3"
report = run_pipeline(RunConfig(f=F, oracle=True))
geo = report.data["geometry"]
print("attempts:", geo["attempts"])
print("t used:", geo["t"])
ys = [complex(*p["y"]) for p in report.data["special_points"]["polar"]]
seps = [abs(a - b) for i, a in enumerate(ys) for b in ys[i + 1:]]
print(f"min separation {min(seps):.3e} vs sep_min {geo['sep_min']:.3e}")
print("b1 =", report.data["polyhedron"]["b1"], "| Milnor number =", report.data["oracle"]["milnor_number"]["value"])
