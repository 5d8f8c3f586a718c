"""Why the published interval example cannot be robustly stabilised.

Run: python3 demos/04_worked_plant_analysis.py
"""
import numpy as np

from fosynth import SynthesisError, closed_loop, robust_verify, synthesize
from fosynth import reference

plant = reference.worked_plant()
print("A lower\n", plant.a.lower, "\nA upper\n", plant.a.upper)

# Pick a member with a21 = 0 and a11 > 0.  The output only sees x2 and x1
# never feeds x2, so the a11 mode is invisible to any output feedback.
a = np.array([[0.5, -1.5], [0.0, -2.8]])
assert plant.a.contains(a)
b, c = plant.b.lower, plant.c.lower
obs = np.vstack([c, c @ a])
print("observability matrix rank at this member:", np.linalg.matrix_rank(obs))

try:
    synthesize(plant, 2)
except SynthesisError as exc:
    print(f"synthesis stops at {exc.stage}, best slack {exc.best_slack:.3g}")

k = reference.published_controller()
print("listed controller, nominal closed-loop eigenvalues:",
      np.round(np.linalg.eigvals(closed_loop(*plant.nominal(), k)), 4))
rep = robust_verify(plant, k, 1000, seed=42)
print(f"listed controller sweep: {rep.n_pass}/{rep.n_checked} members in the sector")
# Even the best controller cannot move the hidden mode.
print("member loop eigenvalues:", np.round(np.linalg.eigvals(closed_loop(a, b, c, k)), 4))
