"""Time-domain simulation of ``D^alpha x = A x`` (Caputo) by an implicit Gruenwald-Letnikov scheme.

The Caputo initial condition is handled by simulating ``z = x - x(0)``:
the derivative of the constant history vanishes, so

    D^alpha z = A z + A x(0),   z(0) = 0,

and ``z`` can use the Riemann-Liouville / GL discretisation directly.
"""

from dataclasses import dataclass
import csv
import math

import mpmath
import numpy as np
import scipy.linalg

from .linalg import as_matrix
from .synthesis import ControllerRealization

ML_GUARD = 50.0


class SteppingError(ValueError):
    """The implicit step matrix ``I - dt^alpha A`` is singular."""


def gl_weights(alpha: float, n: int) -> np.ndarray:
    """``w_0 .. w_n`` with ``w_k = w_{k-1} (1 - (alpha + 1) / k)``."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    w = np.empty(n + 1)
    w[0] = 1.0
    for k in range(1, n + 1):
        w[k] = w[k - 1] * (1.0 - (alpha + 1.0) / k)
    return w


@dataclass
class SimulationResult:
    times: np.ndarray
    states: np.ndarray      # steps x (n + n_c): plant then controller states
    outputs: np.ndarray     # steps x m
    controls: np.ndarray    # steps x l
    n: int
    n_c: int
    window: int | None = None  # set when the memory was truncated

    def __post_init__(self):
        k = len(self.times)
        if not (len(self.states) == len(self.outputs) == len(self.controls) == k):
            raise ValueError("trajectory arrays have inconsistent lengths")

    @property
    def plant_states(self):
        return self.states[:, :self.n]

    @property
    def controller_states(self):
        return self.states[:, self.n:]

    def header(self):
        return (["t"] + [f"x{i + 1}" for i in range(self.n)]
                + [f"xc{i + 1}" for i in range(self.n_c)]
                + [f"u{i + 1}" for i in range(self.controls.shape[1])]
                + [f"y{i + 1}" for i in range(self.outputs.shape[1])])

    def rows(self):
        data = np.hstack([self.times[:, None], self.states, self.controls, self.outputs])
        return data

    def write_csv(self, fh) -> None:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(self.header())
        for row in self.rows():
            w.writerow([repr(float(v)) for v in row])


def _step_matrix(a_cl, alpha, dt):
    n = a_cl.shape[0]
    h = dt ** alpha
    lhs = np.eye(n) - h * a_cl
    cond = np.linalg.cond(lhs)
    if not np.isfinite(cond) or cond > 1e12:
        # dt^alpha * lambda = 1 for some eigenvalue lambda
        ev = np.linalg.eigvals(a_cl)
        bad = ev[np.argmin(np.abs(1 - h * ev))]
        suggestion = 0.5 * dt
        raise SteppingError(f"I - dt^alpha A_cl is singular (eigenvalue {bad:.6g}, dt={dt:g}); "
                            f"try dt={suggestion:g}")
    return lhs, h


def gl_integrate(a_cl, x0, alpha: float, dt: float, steps: int, window: int | None = None):
    """Pseudo-state trajectory ``x_0 .. x_steps`` of ``D^alpha x = a_cl x``.

    ``window`` truncates the memory sum to the last ``window`` samples (short
    memory principle, an approximation); ``None`` keeps the full history.
    """
    a_cl = as_matrix(a_cl)
    x0 = np.asarray(x0, dtype=float).ravel()
    if a_cl.shape != (x0.size, x0.size):
        raise ValueError(f"A_cl is {a_cl.shape}, x0 has {x0.size} entries")
    if window is not None and window < 1:
        raise ValueError("window must be >= 1")
    lhs, h = _step_matrix(a_cl, alpha, dt)
    lu = scipy.linalg.lu_factor(lhs)
    w = gl_weights(alpha, steps)
    forcing = h * (a_cl @ x0)
    z = np.zeros((steps + 1, x0.size))
    for j in range(1, steps + 1):
        depth = j if window is None else min(j, window)
        # sum_{k=1..depth} w_k z_{j-k}
        hist = w[1:depth + 1] @ z[j - 1::-1][:depth]
        z[j] = scipy.linalg.lu_solve(lu, forcing - hist)
    return z + x0


def simulate(a_cl, n: int, k: ControllerRealization, c_member, x0, alpha: float, dt: float,
             t_final: float, xc0=None, window: int | None = None) -> SimulationResult:
    """Simulate the closed loop and derive ``y = C x`` and ``u = Cc xc + Dc y``.

    ``x0`` is the plant initial state; the controller starts at ``xc0``
    (zero by default).  ``c_member`` is the output matrix of the simulated
    member.
    """
    a_cl = as_matrix(a_cl)
    if not 1.0 <= alpha < 2.0:
        raise ValueError(f"alpha must lie in [1, 2), got {alpha}")
    if not dt > 0:
        raise ValueError("dt must be positive")
    if not t_final >= dt:
        raise ValueError(f"t_final={t_final} must be at least dt={dt}")
    c_member = as_matrix(c_member)
    n_c = k.order
    if a_cl.shape != (n + n_c, n + n_c):
        raise ValueError(f"A_cl must be {(n + n_c, n + n_c)}, got {a_cl.shape}")
    if c_member.shape != (k.n_outputs, n):
        raise ValueError(f"C must be {(k.n_outputs, n)}, got {c_member.shape}")
    x0 = np.asarray(x0, dtype=float).ravel()
    if x0.size != n:
        raise ValueError(f"x0 needs {n} entries, got {x0.size}")
    xc0 = np.zeros(n_c) if xc0 is None else np.asarray(xc0, dtype=float).ravel()
    if xc0.size != n_c:
        raise ValueError(f"xc0 needs {n_c} entries, got {xc0.size}")

    steps = int(round(t_final / dt))
    states = gl_integrate(a_cl, np.concatenate([x0, xc0]), alpha, dt, steps, window)
    y = states[:, :n] @ c_member.T
    u = states[:, n:] @ k.c_c.T + y @ k.d_c.T
    times = dt * np.arange(steps + 1)
    return SimulationResult(times, states, y, u, n, n_c, window)


def mittag_leffler(alpha: float, z: float, tol: float = 1e-15) -> float:
    """One-parameter Mittag-Leffler function ``sum z^k / Gamma(alpha k + 1)``.

    The series is accumulated in extended precision so the cancellation for
    negative ``z`` does not eat the result; only ``|z| <= 50`` is accepted.
    """
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    if abs(z) > ML_GUARD:
        raise ValueError(f"|z|={abs(z):g} outside the series regime |z| <= {ML_GUARD:g}")
    if z == 0:
        return 1.0
    # digits lost to cancellation are about |z| / ln(10) for alpha near 1
    dps = 30 + int(abs(z) / math.log(10)) + 10
    with mpmath.workdps(dps):
        zz = mpmath.mpf(z)
        a = mpmath.mpf(alpha)
        total = mpmath.mpf(0)
        k = 0
        small = 0
        while True:
            term = zz ** k / mpmath.gamma(a * k + 1)
            total += term
            # require two consecutive small terms so an alternating tail is past its peak
            if abs(term) < tol * max(1, abs(total)):
                small += 1
                if small >= 2 and k > abs(z):
                    break
            else:
                small = 0
            k += 1
            if k > 100000:
                raise RuntimeError("Mittag-Leffler series did not converge")
        return float(total)
