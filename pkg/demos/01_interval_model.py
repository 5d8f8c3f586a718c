"""Interval plants: bounds, midpoint/radius factors and sampled members.

Run: python3 demos/01_interval_model.py
"""
import numpy as np

from fosynth import IntervalMatrix, IntervalOrderError
from fosynth.interval import midpoint_radius, sample_member, structure_factors, vertices
from fosynth import reference

# A 2x2 interval matrix with one exactly known entry.
im = IntervalMatrix.from_bounds([[-1.0, 0.5], [2.0, -3.0]], [[-0.5, 0.5], [2.4, -2.0]])
mr = midpoint_radius(im)
print("midpoint\n", mr.mid)
print("radius\n", mr.rad)

# Every member is mid + M diag(delta) R with delta in [-1, 1]^k.
fac = structure_factors(mr)
print("factor shapes", fac.left.shape, fac.right.shape, "-> M R equals the radius:",
      np.allclose(fac.left @ fac.right, mr.rad))

rng = np.random.default_rng(0)
delta = rng.uniform(-1, 1, im.size)
print("random member\n", sample_member(im, delta))

# Only uncertain entries spawn vertices: 3 of them here, so 8 corners.
print("vertex count", len(vertices(im)))

# Bounds that are the wrong way round are rejected entry by entry...
doc = reference.worked_plant_document()
try:
    IntervalMatrix.from_bounds(doc["A"]["lower"], doc["A"]["upper"])
except IntervalOrderError as exc:
    print("rejected:", exc)
# ...unless the caller asks for them to be swapped.
fixed = IntervalMatrix.from_bounds(doc["A"]["lower"], doc["A"]["upper"], canonicalize=True)
print("canonical lower\n", fixed.lower, "\ncanonical upper\n", fixed.upper)
