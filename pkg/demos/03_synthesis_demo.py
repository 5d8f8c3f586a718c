"""Robust controller synthesis on a well-posed interval plant.

Two LMI stages produce a second-order dynamic output-feedback controller;
every feasible solver answer is re-checked in numpy before it is used.
The sampled sweep at the end is evidence, not a proof.

Run: python3 demos/03_synthesis_demo.py
"""
import time

import numpy as np

from fosynth import SynthesisError, SynthesisOptions, closed_loop, robust_verify, synthesize
from fosynth import reference

plant = reference.demo_plant()
t0 = time.perf_counter()
k, cert = synthesize(plant, 2)
print(f"synthesis took {time.perf_counter() - t0:.2f} s, stage-1 form: {cert.control_form}")
np.set_printoptions(precision=4, suppress=True)
print("Ac\n", k.a_c, "\nBc\n", k.b_c, "\nCc\n", k.c_c, "\nDc\n", k.d_c)
print("worst recomputed slacks:", cert.stage1_report.worst.slack, cert.stage2_report.worst.slack)
print("nominal closed-loop eigenvalues", np.linalg.eigvals(closed_loop(*plant.nominal(), k)))

rep = robust_verify(plant, k, n_samples=500, seed=1)
print(f"sweep: {rep.n_pass}/{rep.n_checked} pass, worst margin {rep.worst_margin:.3f} rad")

# With an unstable a11 range the plain two-stage method stalls at stage 2.
hard = reference.demo_plant(unstable=True)
try:
    synthesize(hard, 2)
except SynthesisError as exc:
    print("plain two-stage:", exc.stage, "failed")
# Alternating the Lyapunov matrix and the gains a few times gets through.
k2, _ = synthesize(hard, 2, SynthesisOptions(refine=3))
print("with refine=3 sweep passes:", robust_verify(hard, k2, 500, seed=1).passed)
