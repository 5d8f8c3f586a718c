"""Robust dynamic output-feedback synthesis for interval fractional-order plants.

The pipeline solves two LMI problems:

1. ``(X, Y, eta1, eta2)``: the kernel-projected sector conditions on the
   nominal plant with the A-uncertainty bounded by one scalar each, plus the
   coupling condition ``[[X, I], [I, Y]] >= 0``.
2. After completing ``X_cl`` from ``(X, Y)``, the full closed-loop sector
   condition becomes affine in the controller matrix ``K`` and in the
   scalars ``eta3..eta7`` that bound the A, B, C uncertainty terms.

Block conventions follow the augmented closed loop

    A_cl = AA + BB K CC,  AA = [[A, 0], [0, 0]],  BB = [[0, B], [I, 0]],
    CC = [[0, I], [C, 0]],  K = [[Ac, Bc], [Cc, Dc]].
"""

from dataclasses import dataclass, field
import logging
import math

import numpy as np

from . import lmi
from .interval import UncertainPlant, midpoint_radius, structure_factors
from .linalg import as_matrix, complete_lyapunov, CompletionError, min_eig, null_space_basis, symmetrize
from .lmi import AffineExpr, DecisionVar, block, kron, schur_embed

log = logging.getLogger(__name__)

COS_GUARD = 1e-6


class SynthesisError(RuntimeError):
    """A synthesis stage failed; ``stage`` names it, ``best_slack`` is the best margin seen."""

    def __init__(self, stage, message, best_slack=None, attempts=None):
        self.stage = stage
        self.best_slack = best_slack
        self.attempts = attempts or []
        super().__init__(f"{stage}: {message}")


def theta_of(alpha: float) -> float:
    if not 1.0 <= alpha < 2.0:
        raise ValueError(f"alpha must lie in [1, 2), got {alpha}")
    return math.pi - alpha * math.pi / 2


def sector_rotation(theta: float) -> np.ndarray:
    """``[[sin, -cos], [cos, sin]]``; orthogonal, so it preserves ``||F|| <= 1``."""
    s, c = math.sin(theta), math.cos(theta)
    return np.array([[s, -c], [c, s]])


@dataclass(frozen=True, eq=False)
class ControllerRealization:
    a_c: np.ndarray
    b_c: np.ndarray
    c_c: np.ndarray
    d_c: np.ndarray

    def __post_init__(self):
        for name in ("a_c", "b_c", "c_c", "d_c"):
            object.__setattr__(self, name, as_matrix(getattr(self, name)))
        nc = self.a_c.shape[0]
        if self.a_c.shape != (nc, nc):
            raise ValueError("Ac must be square")
        if self.b_c.shape[0] != nc or self.c_c.shape[1] != nc:
            raise ValueError("Bc rows and Cc columns must equal the controller order")
        if self.d_c.shape != (self.c_c.shape[0], self.b_c.shape[1]):
            raise ValueError(f"Dc must be {self.c_c.shape[0]}x{self.b_c.shape[1]}")

    @property
    def order(self) -> int:
        return self.a_c.shape[0]

    @property
    def n_inputs(self) -> int:
        """Plant inputs driven by the controller (``l``)."""
        return self.c_c.shape[0]

    @property
    def n_outputs(self) -> int:
        """Plant outputs read by the controller (``m``)."""
        return self.b_c.shape[1]

    @property
    def k(self) -> np.ndarray:
        return np.block([[self.a_c, self.b_c], [self.c_c, self.d_c]])

    @classmethod
    def zero(cls, n_c, l, m):  # noqa: E741
        return cls(np.zeros((n_c, n_c)), np.zeros((n_c, m)), np.zeros((l, n_c)), np.zeros((l, m)))


def recover_controller(assignment, n_c: int, l: int, m: int) -> ControllerRealization:  # noqa: E741
    """Split ``K = [[Ac, Bc], [Cc, Dc]]``; accepts an Assignment or the matrix itself."""
    k = assignment["K"] if not isinstance(assignment, np.ndarray) else assignment
    k = as_matrix(k)
    if k.shape != (n_c + l, n_c + m):
        raise ValueError(f"K has shape {k.shape}, expected {(n_c + l, n_c + m)}")
    return ControllerRealization(k[:n_c, :n_c], k[:n_c, n_c:], k[n_c:, :n_c], k[n_c:, n_c:])


def closed_loop(a, b, c, k: ControllerRealization) -> np.ndarray:
    a, b, c = as_matrix(a), as_matrix(b), as_matrix(c)
    n = a.shape[0]
    if a.shape != (n, n) or b.shape[0] != n or c.shape[1] != n:
        raise ValueError("inconsistent plant dimensions")
    if k.n_inputs != b.shape[1] or k.n_outputs != c.shape[0]:
        raise ValueError(
            f"controller maps {k.n_outputs} outputs to {k.n_inputs} inputs, "
            f"plant has {c.shape[0]} outputs and {b.shape[1]} inputs")
    return np.block([[a + b @ k.d_c @ c, b @ k.c_c], [k.b_c @ c, k.a_c]])


@dataclass(frozen=True, eq=False)
class AugmentedPlant:
    n: int
    n_c: int
    l: int  # noqa: E741
    m: int
    a0_hat: np.ndarray
    b0_hat: np.ndarray
    c0_hat: np.ndarray
    m_a_hat: np.ndarray
    r_a_hat: np.ndarray
    m_b_hat: np.ndarray
    r_b_hat: np.ndarray
    m_c_hat: np.ndarray
    r_c_hat: np.ndarray
    theta: float
    # un-lifted nominal data and factors, reused by stage 1
    a0: np.ndarray
    b0: np.ndarray
    c0: np.ndarray
    m_a: np.ndarray
    r_a: np.ndarray

    @property
    def size(self) -> int:
        return self.n + self.n_c


def augment(plant: UncertainPlant, n_c: int) -> AugmentedPlant:
    if n_c < 1:
        raise ValueError("controller order must be >= 1")
    n, l, m = plant.n, plant.l, plant.m
    a_mr, b_mr, c_mr = (midpoint_radius(x) for x in (plant.a, plant.b, plant.c))
    fa, fb, fc = (structure_factors(x) for x in (a_mr, b_mr, c_mr))
    a0, b0, c0 = a_mr.mid, b_mr.mid, c_mr.mid
    z = np.zeros

    a0_hat = np.block([[a0, z((n, n_c))], [z((n_c, n)), z((n_c, n_c))]])
    b0_hat = np.block([[z((n, n_c)), b0], [np.eye(n_c), z((n_c, l))]])
    c0_hat = np.block([[z((n_c, n)), np.eye(n_c)], [c0, z((m, n_c))]])
    m_a_hat = np.vstack([fa.left, z((n_c, n * n))])
    r_a_hat = np.hstack([fa.right, z((n * n, n_c))])
    m_b_hat = np.vstack([fb.left, z((n_c, n * l))])
    r_b_hat = np.hstack([z((n * l, n_c)), fb.right])
    m_c_hat = np.vstack([z((n_c, m * n)), fc.left])
    r_c_hat = np.hstack([fc.right, z((m * n, n_c))])
    return AugmentedPlant(
        n=n, n_c=n_c, l=l, m=m,
        a0_hat=a0_hat, b0_hat=b0_hat, c0_hat=c0_hat,
        m_a_hat=m_a_hat, r_a_hat=r_a_hat, m_b_hat=m_b_hat, r_b_hat=r_b_hat,
        m_c_hat=m_c_hat, r_c_hat=r_c_hat, theta=theta_of(plant.alpha),
        a0=a0, b0=b0, c0=c0, m_a=fa.left, r_a=fa.right,
    )


@dataclass(frozen=True, eq=False)
class NullspaceSelectors:
    n_c_basis: np.ndarray
    n_o_basis: np.ndarray
    n_p: np.ndarray
    n_q: np.ndarray
    p: np.ndarray
    q: np.ndarray

    @property
    def control_vacuous(self) -> bool:
        return self.n_c_basis.shape[1] == 0

    @property
    def observe_vacuous(self) -> bool:
        return self.n_o_basis.shape[1] == 0


def _selector(basis, n, n_c):
    # [[N, 0], [0, 0], [0, -N], [0, 0]] with row blocks (n, n_c, n, n_c)
    k = basis.shape[1]
    z = np.zeros
    return np.block([
        [basis, z((n, k))],
        [z((n_c, k)), z((n_c, k))],
        [z((n, k)), -basis],
        [z((n_c, k)), z((n_c, k))],
    ])


def build_selectors(plant: UncertainPlant, aug: AugmentedPlant, tol: float = 1e-12) -> NullspaceSelectors:
    """Kernel bases of the nominal ``B0^T`` and ``C0`` and their lifted block forms.

    Only the two nonzero column blocks of the selector matrices are kept so
    that they have full column rank.
    """
    b0, c0 = aug.b0, aug.c0
    # rank-deficient B0 or C0 only enlarges the kernels; the reduced conditions stay valid
    if np.linalg.matrix_rank(b0) < b0.shape[1]:
        log.warning("nominal B is not of full column rank; the control-side kernel is enlarged")
    if np.linalg.matrix_rank(c0) < c0.shape[0]:
        log.warning("nominal C is not of full row rank; the observation-side kernel is enlarged")
    n_c_basis = null_space_basis(b0.T, tol)
    n_o_basis = null_space_basis(c0, tol)
    p = np.kron(np.array([[1.0, -1.0], [1.0, 1.0]]), aug.b0_hat.T)
    q = np.kron(np.eye(2), aug.c0_hat)
    return NullspaceSelectors(
        n_c_basis=n_c_basis, n_o_basis=n_o_basis,
        n_p=_selector(n_c_basis, aug.n, aug.n_c), n_q=_selector(n_o_basis, aug.n, aug.n_c),
        p=p, q=q,
    )


PRINTED = "printed"
DERIVED = "derived"


def stage1_control_block(aug: AugmentedPlant, nc: np.ndarray, y: DecisionVar, eta: DecisionVar,
                         form: str = PRINTED):
    """Bordered control-side condition in ``(Y, eta1)``.

    ``printed`` weights the blocks by ``1/sin`` and ``1/cos``.  ``derived``
    is the projection of the closed-loop sector condition onto the kernel of
    the control channel, which weights them by ``sin`` and ``cos``; it is
    less conservative for alpha well away from 1.
    """
    s, c = math.sin(aug.theta), math.cos(aug.theta)
    a0 = aug.a0
    g = AffineExpr.product(nc.T @ a0, y, nc) + AffineExpr.product(nc.T, y, a0.T @ nc)
    d = AffineExpr.product(nc.T, y, a0.T @ nc) - AffineExpr.product(nc.T @ a0, y, nc)
    ryn = AffineExpr.product(aug.r_a, y, nc)
    if form == PRINTED:
        sigma = block([[g * (1 / s), d * (1 / c)], [None, g * (1 / s)]])
        r1 = kron(np.array([[1 / s, -1 / c], [1 / c, 1 / s]]), ryn)
    elif form == DERIVED:
        sigma = block([[g * s, d * (-c)], [None, g * s]])
        r1 = kron(sector_rotation(aug.theta).T, ryn)
    else:
        raise ValueError(f"unknown control-side form {form!r}")
    m1 = np.kron(np.eye(2), nc.T @ aug.m_a)
    return schur_embed(sigma + AffineExpr.scaled(eta, m1 @ m1.T), r1, eta)


def stage1_observe_block(aug: AugmentedPlant, no: np.ndarray, x: DecisionVar, eta: DecisionVar):
    """Bordered observation-side condition in ``(X, eta2)``."""
    s, c = math.sin(aug.theta), math.cos(aug.theta)
    a0 = aug.a0
    g = AffineExpr.product(no.T @ a0.T, x, no) + AffineExpr.product(no.T, x, a0 @ no)
    d = AffineExpr.product(no.T, x, a0 @ no) - AffineExpr.product(no.T @ a0.T, x, no)
    sigma = block([[g * s, d * c], [None, g * s]])
    ran = aug.r_a @ no
    m2 = np.block([[ran * s, ran * c], [-ran * c, ran * s]]).T
    r2 = kron(np.eye(2), AffineExpr.product(aug.m_a.T, x, no))
    return schur_embed(sigma + AffineExpr.scaled(eta, m2 @ m2.T), r2, eta)


def assemble_stage1(plant: UncertainPlant, aug: AugmentedPlant, sel: NullspaceSelectors,
                    eps: float = 1e-7, form: str = PRINTED) -> lmi.LmiProblem:
    if abs(math.cos(aug.theta)) < COS_GUARD:
        raise ValueError("alpha too close to 1: the control-side condition divides by cos(theta)")
    n = aug.n
    prob = lmi.LmiProblem(name="stage1", eps=eps)
    y = prob.add_var(DecisionVar.symmetric("Y", n))
    x = prob.add_var(DecisionVar.symmetric("X", n))
    eta1 = prob.add_var(DecisionVar.scalar("eta1", lower=0.0))
    eta2 = prob.add_var(DecisionVar.scalar("eta2", lower=0.0))
    prob.add("Y>0", AffineExpr.of(y), lmi.POS)
    prob.add("X>0", AffineExpr.of(x), lmi.POS)
    if sel.control_vacuous:
        log.info("stage 1: B0^T has a trivial kernel, control-side condition is vacuous")
    else:
        prob.add("control", stage1_control_block(aug, sel.n_c_basis, y, eta1, form), lmi.NEG)
    if sel.observe_vacuous:
        log.info("stage 1: C0 has a trivial kernel, observation-side condition is vacuous")
    else:
        prob.add("observe", stage1_observe_block(aug, sel.n_o_basis, x, eta2), lmi.NEG)
    eye = np.eye(n)
    prob.add("coupling", block([[AffineExpr.of(x), eye], [eye, AffineExpr.of(y)]]), lmi.PSD)
    return prob


def sector_form(a_t_x, theta):
    """``[[S sin, D cos], [-D cos, S sin]]`` from ``a_t_x = A^T X``.

    ``S = A^T X + X A`` and ``D = X A - A^T X``.  Works for arrays and
    affine expressions alike.
    """
    rot = sector_rotation(theta)
    if isinstance(a_t_x, AffineExpr):
        half = kron(rot, a_t_x)
    else:
        half = np.kron(rot, a_t_x)
    return half + half.T


def stage2_blocks(aug: AugmentedPlant, x_cl: np.ndarray, k: DecisionVar, etas):
    """The bordered closed-loop condition and its named pieces."""
    e3, e4, e5, e6, e7 = etas
    rot_t = sector_rotation(aug.theta).T
    i2 = np.eye(2)
    X = x_cl

    h = sector_form(aug.a0_hat.T @ X, aug.theta)
    nominal = kron(rot_t, AffineExpr.product(X @ aug.b0_hat, k, aug.c0_hat))
    main = nominal + nominal.T + h

    # A uncertainty: M = I2 (x) X MA, R = rot^T (x) RA
    m_a = np.kron(i2, X @ aug.m_a_hat)
    r_a = np.kron(rot_t, aug.r_a_hat)
    # B uncertainty times nominal C
    m_b = np.kron(i2, X @ aug.m_b_hat)
    r_b = kron(rot_t, AffineExpr.product(aug.r_b_hat, k, aug.c0_hat))
    # nominal B times C uncertainty; the K-dependent factor goes to the border
    m_c = kron(i2, AffineExpr.product(X @ aug.b0_hat, k, aug.m_c_hat))
    r_c = np.kron(rot_t, aug.r_c_hat)
    # B uncertainty times C uncertainty, bounded one factor at a time
    w_mid = kron(rot_t, AffineExpr.product(aug.r_b_hat, k, aug.m_c_hat))
    w_out = np.kron(i2, aug.r_c_hat)

    main = (main
            + AffineExpr.scaled(e3, m_a @ m_a.T)
            + AffineExpr.scaled(e4, m_b @ m_b.T)
            + AffineExpr.scaled(e5, r_c.T @ r_c)
            + AffineExpr.scaled(e6, m_b @ m_b.T)
            + AffineExpr.scaled(e7, w_out.T @ w_out))
    n2 = main.shape[0]
    d3, d4, d5 = r_a.shape[0], r_b.shape[0], m_c.shape[1]
    d6, d7 = w_mid.shape
    neg = lambda eta, d: AffineExpr.scaled(eta, -np.eye(d))  # noqa: E731
    z = np.zeros
    big = block([
        [main, r_a.T, r_b.T, m_c, z((n2, d6)), z((n2, d7))],
        [None, neg(e3, d3), z((d3, d4)), z((d3, d5)), z((d3, d6)), z((d3, d7))],
        [None, None, neg(e4, d4), z((d4, d5)), z((d4, d6)), z((d4, d7))],
        [None, None, None, neg(e5, d5), z((d5, d6)), z((d5, d7))],
        [None, None, None, None, neg(e6, d6), w_mid],
        [None, None, None, None, None, neg(e7, d7)],
    ])
    return big


def assemble_stage2(plant: UncertainPlant, aug: AugmentedPlant, x_cl, eps: float = 1e-7) -> lmi.LmiProblem:
    x_cl = as_matrix(x_cl)
    if x_cl.shape != (aug.size, aug.size):
        raise ValueError(f"X_cl must be {aug.size}x{aug.size}")
    if min_eig(x_cl) <= 0:
        raise ValueError("X_cl must be positive definite")
    prob = lmi.LmiProblem(name="stage2", eps=eps)
    k = prob.add_var(DecisionVar.matrix("K", aug.n_c + aug.l, aug.n_c + aug.m))
    etas = [prob.add_var(DecisionVar.scalar(f"eta{i}", lower=0.0)) for i in range(3, 8)]
    prob.add("closed_loop", stage2_blocks(aug, x_cl, k, etas), lmi.NEG)
    return prob


def assemble_lyapunov_step(aug: AugmentedPlant, k, eps: float = 1e-7) -> lmi.LmiProblem:
    """Closed-loop condition with ``K`` fixed and ``X_cl`` free.

    Used to refine ``X_cl`` after stage 2 rejects it.  Every term is then
    linear in ``X_cl``; the bounding scalars move to the constant side.
    The condition is homogeneous in ``X_cl``, so ``X_cl >= I`` fixes scale.
    """
    k = as_matrix(k)
    N = aug.size
    rot_t = sector_rotation(aug.theta).T
    i2 = np.eye(2)
    prob = lmi.LmiProblem(name="lyapunov_step", eps=eps)
    xv = prob.add_var(DecisionVar.symmetric("X_cl", N))
    e3, e4, e5, e6 = [prob.add_var(DecisionVar.scalar(f"eta{i}", lower=0.0)) for i in range(3, 7)]
    x = AffineExpr.of(xv)

    a_cl = aug.a0_hat + aug.b0_hat @ k @ aug.c0_hat
    half = kron(rot_t, x @ a_cl)
    m_a = kron(i2, x @ aug.m_a_hat)
    r_a = np.kron(rot_t, aug.r_a_hat)
    m_b = kron(i2, x @ aug.m_b_hat)
    r_b = np.kron(rot_t, aug.r_b_hat @ k @ aug.c0_hat)
    m_c = kron(i2, x @ (aug.b0_hat @ k @ aug.m_c_hat))
    r_c = np.kron(rot_t, aug.r_c_hat)
    w_mid = np.kron(rot_t, aug.r_b_hat @ k @ aug.m_c_hat)
    w_out = np.kron(i2, aug.r_c_hat)
    gain = np.linalg.norm(w_mid, 2) ** 2 if w_mid.size else 0.0

    main = (half + half.T
            + AffineExpr.scaled(e3, r_a.T @ r_a)
            + AffineExpr.scaled(e4, r_b.T @ r_b)
            + AffineExpr.scaled(e5, r_c.T @ r_c)
            + AffineExpr.scaled(e6, gain * (w_out.T @ w_out)))
    neg = lambda eta, d: AffineExpr.scaled(eta, -np.eye(d))  # noqa: E731
    dims = [m_a.shape[1], m_b.shape[1], m_c.shape[1], m_b.shape[1]]
    borders = [m_a, m_b, m_c, m_b]
    scal = [e3, e4, e5, e6]
    rows = [[main] + borders]
    for i, d in enumerate(dims):
        row = [None] * (i + 1) + [neg(scal[i], d)]
        row += [np.zeros((d, dj)) for dj in dims[i + 1:]]
        rows.append(row)
    prob.add("closed_loop", block(rows), lmi.NEG)
    prob.add("X_cl>=I", x - AffineExpr(np.eye(N), []), lmi.PSD)
    return prob


@dataclass
class SynthesisOptions:
    eps: float = 1e-7
    retries: int = 3
    seed: int = 0
    solver: str = "CLARABEL"
    kernel_tol: float = 1e-12
    completion_tol: float = 1e-9
    verify_tol: float = 10 * lmi.SOLVER_TOL
    control_form: str = PRINTED
    # try the derived control-side form when the printed one rejects the plant
    fallback_form: bool = True
    # alternating K / X_cl passes after stage 2 rejects X_cl; 0 keeps the plain two-stage scheme
    refine: int = 0


@dataclass
class SynthesisCertificate:
    x: np.ndarray
    y: np.ndarray
    x_cl: np.ndarray
    etas: dict
    theta: float
    stage1: lmi.Assignment
    stage2: lmi.Assignment
    stage1_report: lmi.VerificationReport
    stage2_report: lmi.VerificationReport
    control_form: str = PRINTED
    attempts: list = field(default_factory=list)


def _stage1_objective(attempt: int, rng):
    if attempt == 0:
        return None
    if attempt == 1:
        return {"X": 1.0, "Y": 1.0}
    w = rng.uniform(0.1, 10.0, size=2)
    return {"X": float(w[0]), "Y": float(w[1])}


def synthesize(plant: UncertainPlant, n_c: int, options: SynthesisOptions | None = None):
    """Run both stages and return ``(controller, certificate)``.

    Stage 1 is retried with a different objective (maximum slack, then
    minimum trace, then randomly weighted traces) whenever stage 2 rejects
    the completed ``X_cl``.  Raises :class:`SynthesisError` naming the
    stage that failed last.
    """
    opts = options or SynthesisOptions()
    if not 1.0 < plant.alpha < 2.0:
        raise ValueError(f"synthesis needs 1 < alpha < 2, got {plant.alpha}")
    if n_c < plant.n:
        raise ValueError(f"controller order n_c={n_c} must be >= plant order n={plant.n}")
    aug = augment(plant, n_c)
    if abs(math.cos(aug.theta)) < COS_GUARD:
        raise ValueError("alpha too close to 1 for synthesis")
    sel = build_selectors(plant, aug, opts.kernel_tol)

    forms = [opts.control_form]
    if opts.fallback_form and opts.control_form == PRINTED:
        forms.append(DERIVED)

    attempts = []
    best = {"stage1": -np.inf, "stage2": -np.inf}
    last_stage = "stage1"
    for form in forms:
        rng = np.random.default_rng(opts.seed)
        for attempt in range(opts.retries + 1):
            p1 = assemble_stage1(plant, aug, sel, opts.eps, form)
            p1.trace_objective = _stage1_objective(attempt, rng)
            s1 = lmi.solve_feasibility(p1, solver=opts.solver)
            rep1 = lmi.verify_assignment(p1, s1, opts.verify_tol) if s1.feasible else None
            if rep1 is None or not rep1.passed:
                attempts.append({"form": form, "attempt": attempt, "stage": "stage1",
                                 "slack": s1.slack, "status": s1.status})
                best["stage1"] = max(best["stage1"], s1.slack)
                if attempt == 0:
                    # other objectives cannot rescue an infeasible first stage
                    break
                continue
            try:
                x_cl = complete_lyapunov(s1["X"], s1["Y"], n_c, opts.completion_tol)
            except CompletionError as exc:
                attempts.append({"form": form, "attempt": attempt, "stage": "completion",
                                 "error": str(exc)})
                last_stage = "completion"
                continue
            last_stage = "stage2"
            for rnd in range(opts.refine + 1):
                if rnd:
                    px = assemble_lyapunov_step(aug, s2["K"], opts.eps)
                    sx = lmi.solve_feasibility(px, solver=opts.solver)
                    if not sx.feasible:
                        break
                    x_cl = symmetrize(sx["X_cl"])
                p2 = assemble_stage2(plant, aug, x_cl, opts.eps)
                s2 = lmi.solve_feasibility(p2, solver=opts.solver)
                attempts.append({"form": form, "attempt": attempt, "stage": "stage2",
                                 "refine": rnd, "slack": s2.slack, "status": s2.status})
                rep2 = lmi.verify_assignment(p2, s2, opts.verify_tol) if s2.feasible else None
                if rep2 is not None and rep2.passed:
                    break
                best["stage2"] = max(best["stage2"], s2.slack)
                log.info("stage 2 rejected X_cl (form %s, attempt %d, pass %d, slack %.3e)",
                         form, attempt, rnd, s2.slack)
            if rep2 is None or not rep2.passed:
                continue
            controller = recover_controller(s2, n_c, plant.l, plant.m)
            etas = {name: float(s1[name][0, 0]) for name in ("eta1", "eta2")}
            etas.update({f"eta{i}": float(s2[f"eta{i}"][0, 0]) for i in range(3, 8)})
            cert = SynthesisCertificate(
                x=s1["X"], y=s1["Y"], x_cl=x_cl, etas=etas, theta=aug.theta,
                stage1=s1, stage2=s2, stage1_report=rep1, stage2_report=rep2,
                control_form=form, attempts=attempts,
            )
            return controller, cert
    raise SynthesisError(last_stage, f"no feasible design after {len(attempts)} attempts",
                         best.get(last_stage), attempts)
