"""Reference data: the worked interval plant, its published controller, and demo plants.

The worked plant's bounds are stored exactly as published; three entries of
``A`` have lower > upper and need ``canonicalize=True``.
"""

import numpy as np

from .interval import IntervalMatrix, UncertainPlant
from .synthesis import ControllerRealization

WORKED_ALPHA = 1.2
WORKED_A_LOWER = [[-0.9, -1.0], [0.8, -2.6]]
WORKED_A_UPPER = [[1.2, -2.0], [-1.0, -3.0]]
WORKED_B_LOWER = [[1.0], [0.9]]
WORKED_B_UPPER = [[1.1], [1.0]]
WORKED_C = [[0.0, -1.0]]

PUBLISHED_CONTROLLER = {
    "nc": 2,
    "Ac": [[-6.0, 6.0], [-7.2083, -7.0]],
    "Bc": [[1.0], [-0.3975]],
    "Cc": [[-19.75, 1.0]],
    "Dc": [[1.0]],
}


def worked_plant_document() -> dict:
    """The worked plant in the JSON plant schema (bounds as published)."""
    return {
        "alpha": WORKED_ALPHA,
        "A": {"lower": WORKED_A_LOWER, "upper": WORKED_A_UPPER},
        "B": {"lower": WORKED_B_LOWER, "upper": WORKED_B_UPPER},
        "C": {"lower": WORKED_C, "upper": WORKED_C},
    }


def worked_plant() -> UncertainPlant:
    return UncertainPlant(
        IntervalMatrix.from_bounds(WORKED_A_LOWER, WORKED_A_UPPER, canonicalize=True),
        IntervalMatrix.from_bounds(WORKED_B_LOWER, WORKED_B_UPPER),
        IntervalMatrix.point(WORKED_C),
        WORKED_ALPHA,
    )


def published_controller() -> ControllerRealization:
    d = PUBLISHED_CONTROLLER
    return ControllerRealization(np.array(d["Ac"]), np.array(d["Bc"]), np.array(d["Cc"]), np.array(d["Dc"]))


def demo_plant(unstable: bool = False) -> UncertainPlant:
    """A plant of the same shape that the two-stage design can stabilise.

    ``unstable=True`` gives an open-loop unstable family (``a11 > 0``) that
    needs the alternating refinement (``SynthesisOptions(refine=...)``).
    """
    a11 = (0.1, 0.3) if unstable else (-0.9, -0.5)
    a = IntervalMatrix.from_bounds([[a11[0], -2.0], [0.8, -3.0]], [[a11[1], -1.0], [1.0, -2.6]])
    b = IntervalMatrix.from_bounds(WORKED_B_LOWER, WORKED_B_UPPER)
    return UncertainPlant(a, b, IntervalMatrix.point(WORKED_C), WORKED_ALPHA)
