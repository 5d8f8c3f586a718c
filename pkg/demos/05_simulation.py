"""Time responses with the implicit Gruenwald-Letnikov scheme.

Run: python3 demos/05_simulation.py
"""
import io

import numpy as np

from fosynth import closed_loop, mittag_leffler, simulate, synthesize
from fosynth.fosim import gl_integrate
from fosynth import reference

# Relaxation D^1.2 x = -x against its closed form E_1.2(-t^1.2).
dt, steps = 1e-3, 5000
x = gl_integrate([[-1.0]], [1.0], 1.2, dt, steps)[:, 0]
for t in (0.5, 1.0, 2.0, 4.0):
    j = int(round(t / dt))
    print(f"t={t}: GL {x[j]: .6f}   Mittag-Leffler {mittag_leffler(1.2, -t ** 1.2): .6f}")

# Closed loop of the demo plant: decay of state and control.
plant = reference.demo_plant()
k, _ = synthesize(plant, 2)
a, b, c = plant.nominal()
res = simulate(closed_loop(a, b, c, k), plant.n, k, c, np.ones(plant.n), plant.alpha, 0.01, 40.0)
for t in (0, 5, 10, 20, 40):
    j = int(round(t / 0.01))
    print(f"t={t:2}: |x|={np.linalg.norm(res.states[j]):.3e}  u={res.controls[j, 0]: .3e}")

buf = io.StringIO()
res.write_csv(buf)
print("CSV header:", buf.getvalue().splitlines()[0])
