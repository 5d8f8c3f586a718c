"""Stability tests for fractional-order LTI matrices and sampled family sweeps.

``D^alpha x = A x`` with ``1 <= alpha < 2`` is asymptotically stable iff every
eigenvalue satisfies ``|arg lambda| > alpha * pi / 2``.  The same condition
has an LMI form in a positive definite ``X``; both are provided here.
"""

from dataclasses import dataclass, field, asdict
import math

import numpy as np

from . import lmi
from .interval import UncertainPlant, uncertain_entries
from .linalg import as_matrix, spectrum
from .lmi import AffineExpr, DecisionVar, kron
from .synthesis import ControllerRealization, closed_loop, sector_rotation, theta_of

SECTOR_MARGIN = 1e-9
VERTEX_CAP = 4096


def lemma2_bordered(a, x, theta: float) -> np.ndarray:
    """``[[S sin, D cos], [-D cos, S sin]]`` with ``S = A^T X + X A``, ``D = X A - A^T X``."""
    a, x = as_matrix(a), as_matrix(x)
    s, c = math.sin(theta), math.cos(theta)
    sym_part = a.T @ x + x @ a
    skew = x @ a - a.T @ x
    return np.block([[sym_part * s, skew * c], [-skew * c, sym_part * s]])


def lemma2_kron(a, x, theta: float, transpose: bool = True) -> np.ndarray:
    """``Sym{Theta (x) (A^T X)}``.

    With ``transpose=False`` the product is ``A X``; that is the same test
    applied to ``A^T`` and only agrees with the bordered form in feasibility.
    """
    a, x = as_matrix(a), as_matrix(x)
    half = np.kron(sector_rotation(theta), (a.T @ x) if transpose else (a @ x))
    return half + half.T


def lemma2_problem(a, alpha: float, form: str = "bordered", eps: float = 1e-9) -> lmi.LmiProblem:
    a = as_matrix(a)
    if a.shape[0] != a.shape[1]:
        raise ValueError(f"A must be square, got {a.shape}")
    theta = theta_of(alpha)
    n = a.shape[0]
    prob = lmi.LmiProblem(name="lemma2", eps=eps)
    xv = prob.add_var(DecisionVar.symmetric("X", n))
    x = AffineExpr.of(xv)
    # the condition is homogeneous in X; boxing 0 <= X <= I makes the margin a well-posed maximum
    prob.add("X>=0", x, lmi.PSD)
    prob.add("X<=I", np.eye(n) - x, lmi.PSD)
    if form == "bordered":
        s, c = math.sin(theta), math.cos(theta)
        at_x = a.T @ x
        xa = x @ a
        sym_part = at_x + xa
        skew = xa - at_x
        expr = lmi.block([[sym_part * s, skew * c], [None, sym_part * s]])
    elif form == "kron":
        half = kron(sector_rotation(theta), a.T @ x)
        expr = half + half.T
    else:
        raise ValueError(f"unknown form {form!r}")
    prob.add("sector", expr, lmi.NEG)
    return prob


def lemma2_check(a, alpha: float, form: str = "bordered", solver: str = "CLARABEL"):
    """Solve the sector LMI; returns ``(feasible, X or None)``.

    ``X`` is boxed by ``0 <= X <= I`` and the solver maximises the sector
    margin; a positive optimum means a strictly feasible ``X`` exists.  A backend failure raises :class:`lmi.SolverError`.
    """
    prob = lemma2_problem(a, alpha, form)
    sol = lmi.solve_feasibility(prob, solver=solver)
    if not sol.feasible or sol.slack <= 10 * lmi.SOLVER_TOL:
        return False, None
    return True, sol["X"]


def sector_check(a, alpha: float, margin: float = SECTOR_MARGIN):
    """``(all |arg lambda| > alpha pi / 2 + margin, min |arg lambda|)``."""
    sp = spectrum(a)
    return bool(sp.min_abs_arg > alpha * math.pi / 2 + margin), sp.min_abs_arg


def sector_margin(a, alpha: float) -> float:
    return spectrum(a).min_abs_arg - alpha * math.pi / 2


@dataclass
class MemberResult:
    index: int
    kind: str  # "vertex" or "sample"
    delta: list
    margin: float
    passed: bool


@dataclass
class RobustReport:
    """Outcome of a sampled sweep; not a proof over the whole continuum."""

    alpha: float
    n_vertices: int
    n_samples: int
    n_pass: int
    n_fail: int
    worst_margin: float
    worst_delta: list
    worst_kind: str
    vertex_fallback: bool
    seed: int
    failures: list = field(default_factory=list)
    coverage: str = "vertices and seeded random members (sampled, not an enclosure)"

    @property
    def passed(self) -> bool:
        return self.n_fail == 0

    @property
    def n_checked(self) -> int:
        return self.n_pass + self.n_fail

    def to_dict(self) -> dict:
        d = asdict(self)
        d["passed"] = self.passed
        d["n_checked"] = self.n_checked
        return d


def member_rng(seed: int, index: int) -> np.random.Generator:
    """Independent stream per member so the sweep order does not matter."""
    return np.random.default_rng([int(seed), int(index)])


def plant_vertex_deltas(plant: UncertainPlant, cap: int = VERTEX_CAP):
    """Vertex deltas over the concatenated A, B, C entries, or ``None`` past ``cap``."""
    offsets = np.cumsum([0, plant.a.size, plant.b.size])
    idx = np.concatenate([uncertain_entries(im) + off
                          for im, off in zip((plant.a, plant.b, plant.c), offsets)])
    if idx.size > 62 or 2 ** idx.size > cap:
        return None
    out = []
    for code in range(2 ** idx.size):
        d = np.zeros(plant.n_delta)
        bits = (code >> np.arange(idx.size)) & 1
        d[idx] = np.where(bits, 1.0, -1.0)
        out.append(d)
    return out


def random_delta(plant: UncertainPlant, seed: int, index: int) -> np.ndarray:
    return member_rng(seed, index).uniform(-1.0, 1.0, plant.n_delta)


def member_closed_loop(plant: UncertainPlant, k: ControllerRealization, delta) -> np.ndarray:
    a, b, c = plant.member(delta)
    return closed_loop(a, b, c, k)


def robust_verify(plant: UncertainPlant, k: ControllerRealization, n_samples: int = 1000,
                  seed: int = 0, margin: float = SECTOR_MARGIN, cap: int = VERTEX_CAP,
                  eigen_sink=None) -> RobustReport:
    """Sector test on every vertex member plus ``n_samples`` seeded random members.

    ``eigen_sink``, if given, is called as ``eigen_sink(member_index, eigenvalues)``.
    Past ``cap`` vertices only the random members are checked and the report
    says so through ``vertex_fallback``.
    """
    if k.n_inputs != plant.l or k.n_outputs != plant.m:
        raise ValueError(f"controller is {k.n_inputs}x{k.n_outputs} in/out, plant needs {plant.l}x{plant.m}")
    if n_samples < 0:
        raise ValueError("n_samples must be nonnegative")
    verts = plant_vertex_deltas(plant, cap)
    fallback = verts is None
    members = [("vertex", d) for d in (verts or [])]
    members += [("sample", random_delta(plant, seed, i)) for i in range(n_samples)]

    results = []
    for index, (kind, delta) in enumerate(members):
        a_cl = member_closed_loop(plant, k, delta)
        sp = spectrum(a_cl)
        if eigen_sink is not None:
            eigen_sink(index, sp.eigenvalues)
        m = sp.min_abs_arg - plant.alpha * math.pi / 2
        results.append(MemberResult(index, kind, delta.tolist(), float(m), bool(m > margin)))

    if not results:
        raise ValueError("nothing to check: vertex cap exceeded and n_samples == 0")
    worst = min(results, key=lambda r: (r.margin, r.index))
    fails = [r for r in results if not r.passed]
    return RobustReport(
        alpha=plant.alpha,
        n_vertices=0 if fallback else len(verts),
        n_samples=n_samples,
        n_pass=len(results) - len(fails),
        n_fail=len(fails),
        worst_margin=worst.margin,
        worst_delta=worst.delta,
        worst_kind=worst.kind,
        vertex_fallback=fallback,
        seed=int(seed),
        failures=[asdict(r) for r in fails],
    )
