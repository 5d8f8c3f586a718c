"""A small LMI modelling layer on top of cvxpy.

Expressions are affine in named decision variables and are stored as a
constant plus a list of ``left @ V @ right`` terms, so they can be evaluated
with plain numpy (for independent certificate checks), compiled to cvxpy, or
dumped as the standard form ``F0 + sum_k x_k F_k``.
"""

from dataclasses import dataclass, field
import logging
import warnings

import cvxpy as cp
import numpy as np

from .linalg import as_matrix, symmetrize

log = logging.getLogger(__name__)

SYMMETRIC = "symmetric"
MATRIX = "matrix"
SCALAR = "scalar"

# constraint senses
NEG = "neg"  # expr <= -eps I
NSD = "nsd"  # expr <= 0
PSD = "psd"  # expr >= 0
POS = "pos"  # expr >= eps I
_SENSES = (NEG, NSD, PSD, POS)


class SolverError(RuntimeError):
    """The backend failed to produce a usable answer (not infeasibility)."""


@dataclass(frozen=True)
class DecisionVar:
    name: str
    kind: str
    shape: tuple
    lower: float | None = None

    def __post_init__(self):
        if self.kind not in (SYMMETRIC, MATRIX, SCALAR):
            raise ValueError(f"unknown variable kind {self.kind!r}")
        if min(self.shape) < 1:
            raise ValueError("variable dimensions must be >= 1")
        if self.kind == SYMMETRIC and self.shape[0] != self.shape[1]:
            raise ValueError("symmetric variables must be square")

    @classmethod
    def symmetric(cls, name, n):
        return cls(name, SYMMETRIC, (n, n))

    @classmethod
    def matrix(cls, name, rows, cols):
        return cls(name, MATRIX, (rows, cols))

    @classmethod
    def scalar(cls, name, lower=None):
        return cls(name, SCALAR, (1, 1), lower)

    @property
    def n_free(self) -> int:
        if self.kind == SYMMETRIC:
            n = self.shape[0]
            return n * (n + 1) // 2
        return self.shape[0] * self.shape[1]

    def basis(self):
        """Yield unit elements of the variable's parameter space."""
        r, c = self.shape
        if self.kind == SYMMETRIC:
            for i in range(r):
                for j in range(i, r):
                    e = np.zeros(self.shape)
                    e[i, j] = e[j, i] = 1.0
                    yield e
        else:
            for i in range(r):
                for j in range(c):
                    e = np.zeros(self.shape)
                    e[i, j] = 1.0
                    yield e


@dataclass(frozen=True)
class Term:
    """``left @ V @ right`` (``V^T`` when ``transpose``); scalar vars use ``V * left``."""

    var: DecisionVar
    left: np.ndarray
    right: np.ndarray | None = None
    transpose: bool = False

    @property
    def shape(self):
        if self.var.kind == SCALAR:
            return self.left.shape
        return (self.left.shape[0], self.right.shape[1])

    def value(self, v: np.ndarray) -> np.ndarray:
        if self.var.kind == SCALAR:
            return float(np.asarray(v).reshape(())) * self.left
        v = v.T if self.transpose else v
        return self.left @ v @ self.right

    def T(self) -> "Term":
        if self.var.kind == SCALAR:
            return Term(self.var, self.left.T)
        return Term(self.var, self.right.T, self.left.T, not self.transpose)

    def pad(self, row_off, col_off, rows, cols) -> "Term":
        if self.var.kind == SCALAR:
            g = np.zeros((rows, cols))
            h, w = self.left.shape
            g[row_off:row_off + h, col_off:col_off + w] = self.left
            return Term(self.var, g)
        left = np.zeros((rows, self.left.shape[1]))
        left[row_off:row_off + self.left.shape[0]] = self.left
        right = np.zeros((self.right.shape[0], cols))
        right[:, col_off:col_off + self.right.shape[1]] = self.right
        return Term(self.var, left, right, self.transpose)


class AffineExpr:
    """Matrix-valued affine function of decision variables."""

    # make ndarray operands defer to the reflected methods below
    __array_ufunc__ = None

    def __init__(self, constant, terms=()):
        self.constant = as_matrix(constant)
        self.terms = list(terms)
        for t in self.terms:
            if t.shape != self.constant.shape:
                raise ValueError(f"term of shape {t.shape} in expression of shape {self.shape}")

    @classmethod
    def zeros(cls, rows, cols=None):
        return cls(np.zeros((rows, rows if cols is None else cols)))

    @classmethod
    def of(cls, var: DecisionVar) -> "AffineExpr":
        if var.kind == SCALAR:
            return cls(np.zeros((1, 1)), [Term(var, np.ones((1, 1)))])
        r, c = var.shape
        return cls(np.zeros((r, c)), [Term(var, np.eye(r), np.eye(c))])

    @classmethod
    def scaled(cls, var: DecisionVar, coef) -> "AffineExpr":
        """``var * coef`` for a scalar variable."""
        if var.kind != SCALAR:
            raise ValueError("scaled() needs a scalar variable")
        coef = as_matrix(coef)
        return cls(np.zeros(coef.shape), [Term(var, coef)])

    @classmethod
    def product(cls, left, var: DecisionVar, right, transpose=False) -> "AffineExpr":
        left, right = as_matrix(left), as_matrix(right)
        t = Term(var, left, right, transpose)
        return cls(np.zeros(t.shape), [t])

    @property
    def shape(self):
        return self.constant.shape

    @property
    def variables(self):
        seen = {}
        for t in self.terms:
            seen.setdefault(t.var.name, t.var)
        return list(seen.values())

    def __add__(self, other):
        other = _lift(other, self.shape)
        if other.shape != self.shape:
            raise ValueError(f"cannot add shapes {self.shape} and {other.shape}")
        return AffineExpr(self.constant + other.constant, self.terms + other.terms)

    __radd__ = __add__

    def __neg__(self):
        return self * -1.0

    def __sub__(self, other):
        return self + (-_lift(other, self.shape))

    def __rsub__(self, other):
        return _lift(other, self.shape) - self

    def __mul__(self, k):
        k = float(k)
        terms = []
        for t in self.terms:
            if t.var.kind == SCALAR:
                terms.append(Term(t.var, k * t.left))
            else:
                terms.append(Term(t.var, k * t.left, t.right, t.transpose))
        return AffineExpr(k * self.constant, terms)

    __rmul__ = __mul__

    def __matmul__(self, m):
        m = as_matrix(m)
        terms = []
        for t in self.terms:
            if t.var.kind == SCALAR:
                terms.append(Term(t.var, t.left @ m))
            else:
                terms.append(Term(t.var, t.left, t.right @ m, t.transpose))
        return AffineExpr(self.constant @ m, terms)

    def __rmatmul__(self, m):
        m = as_matrix(m)
        terms = []
        for t in self.terms:
            if t.var.kind == SCALAR:
                terms.append(Term(t.var, m @ t.left))
            else:
                terms.append(Term(t.var, m @ t.left, t.right, t.transpose))
        return AffineExpr(m @ self.constant, terms)

    @property
    def T(self):
        return AffineExpr(self.constant.T, [t.T() for t in self.terms])

    def pad(self, row_off, col_off, rows, cols):
        const = np.zeros((rows, cols))
        h, w = self.shape
        const[row_off:row_off + h, col_off:col_off + w] = self.constant
        return AffineExpr(const, [t.pad(row_off, col_off, rows, cols) for t in self.terms])

    def value(self, values: dict) -> np.ndarray:
        out = self.constant.copy()
        for t in self.terms:
            out = out + t.value(np.asarray(values[t.var.name], dtype=float))
        return out

    def sym_value(self, values: dict) -> np.ndarray:
        return symmetrize(self.value(values))

    def to_cvxpy(self, cvx_vars: dict):
        out = self.constant
        for t in self.terms:
            v = cvx_vars[t.var.name]
            if t.var.kind == SCALAR:
                out = out + v[0, 0] * t.left
            else:
                out = out + t.left @ (v.T if t.transpose else v) @ t.right
        return out


def _lift(x, shape):
    if isinstance(x, AffineExpr):
        return x
    return AffineExpr(np.broadcast_to(as_matrix(x) if np.ndim(x) else x, shape).astype(float))


def _as_expr(x) -> AffineExpr:
    return x if isinstance(x, AffineExpr) else AffineExpr(as_matrix(x))


def kron(c, expr: AffineExpr) -> AffineExpr:
    """``c (x) expr`` for a constant matrix ``c``."""
    c = as_matrix(c)
    if not isinstance(expr, AffineExpr):
        return AffineExpr(np.kron(c, as_matrix(expr)))
    p, q = c.shape
    h, w = expr.shape
    out = AffineExpr(np.kron(c, expr.constant))
    for j in range(q):
        col = c[:, [j]]
        if not np.any(col):
            continue
        ej = np.zeros((1, q))
        ej[0, j] = 1.0
        for t in expr.terms:
            if t.var.kind == SCALAR:
                out.terms.append(Term(t.var, np.kron(col @ ej, t.left)))
            else:
                out.terms.append(Term(t.var, np.kron(col, t.left), np.kron(ej, t.right), t.transpose))
    return out


def block(rows) -> AffineExpr:
    """Assemble a block matrix from a grid of expressions / arrays.

    ``None`` below the diagonal means "transpose of the mirrored block";
    ``None`` elsewhere is a zero block whose size is inferred.
    """
    nr = len(rows)
    nc = len(rows[0])
    heights = [None] * nr
    widths = [None] * nc
    for i, row in enumerate(rows):
        for j, b in enumerate(row):
            if b is None:
                continue
            h, w = (b.shape if isinstance(b, AffineExpr) else as_matrix(b).shape)
            heights[i] = heights[i] or h
            widths[j] = widths[j] or w
            if heights[i] != h or widths[j] != w:
                raise ValueError(f"block ({i},{j}) has shape {(h, w)}, expected {(heights[i], widths[j])}")
    for i in range(nr):
        for j in range(nc):
            if rows[i][j] is None and i > j and rows[j][i] is not None and nr == nc:
                h, w = (rows[j][i].shape if isinstance(rows[j][i], AffineExpr)
                        else as_matrix(rows[j][i]).shape)
                heights[i] = heights[i] or w
                widths[j] = widths[j] or h
    if None in heights or None in widths:
        raise ValueError("cannot infer all block sizes")
    r_off = np.concatenate([[0], np.cumsum(heights)])
    c_off = np.concatenate([[0], np.cumsum(widths)])
    total = AffineExpr.zeros(int(r_off[-1]), int(c_off[-1]))
    for i in range(nr):
        for j in range(nc):
            b = rows[i][j]
            if b is None:
                if i > j and nr == nc and rows[j][i] is not None:
                    b = _lift(rows[j][i], (heights[j], widths[i])).T
                else:
                    continue
            b = _lift(b, (heights[i], widths[j]))
            total = total + b.pad(int(r_off[i]), int(c_off[j]), int(r_off[-1]), int(c_off[-1]))
    return total


def schur_embed(block_expr, off_diag, scalar_var: DecisionVar) -> AffineExpr:
    """``[[block, off_diag^T], [off_diag, -eta I]]``.

    Negative definiteness of the result is equivalent to
    ``block + off_diag^T off_diag / eta < 0`` for ``eta > 0``.
    """
    block_expr = _as_expr(block_expr)
    off_diag = _as_expr(off_diag)
    if scalar_var.kind != SCALAR:
        raise ValueError("schur_embed needs a scalar variable")
    if scalar_var.lower is None or scalar_var.lower < 0:
        raise ValueError(f"{scalar_var.name} must be declared with a nonnegative lower bound")
    h, w = block_expr.shape
    if h != w or off_diag.shape[1] != h:
        raise ValueError(f"off_diag of shape {off_diag.shape} does not border a {h}x{w} block")
    k = off_diag.shape[0]
    return block([[block_expr, off_diag.T],
                  [off_diag, AffineExpr.scaled(scalar_var, -np.eye(k))]])


@dataclass
class Constraint:
    name: str
    expr: AffineExpr
    sense: str

    def __post_init__(self):
        if self.sense not in _SENSES:
            raise ValueError(f"unknown sense {self.sense!r}")
        h, w = self.expr.shape
        if h != w:
            raise ValueError(f"constraint {self.name!r} is not square: {self.expr.shape}")

    @property
    def strict(self) -> bool:
        return self.sense in (NEG, POS)

    def signed(self, values) -> np.ndarray:
        """Value oriented so that the constraint reads ``signed >= 0``."""
        s = self.expr.sym_value(values)
        return -s if self.sense in (NEG, NSD) else s

    def slack(self, values, eps: float) -> float:
        lam = float(np.linalg.eigvalsh(self.signed(values))[0])
        return lam - eps if self.strict else lam


@dataclass
class LmiProblem:
    """Feasibility problem over named variables.

    Strict constraints are enforced with margin ``eps``.  The default solve
    maximises the common slack ``t`` of strict constraints (capped at
    ``slack_cap``).  If ``trace_objective`` names variables, the slack is
    instead fixed at ``2 * eps`` and the weighted trace is minimised.
    """

    name: str = "lmi"
    eps: float = 1e-7
    vars: list = field(default_factory=list)
    constraints: list = field(default_factory=list)
    slack_cap: float = 1.0
    var_bound: float | None = None
    trace_objective: dict | None = None

    def add_var(self, var: DecisionVar) -> DecisionVar:
        if any(v.name == var.name for v in self.vars):
            raise ValueError(f"duplicate variable {var.name!r}")
        self.vars.append(var)
        if var.lower is not None:
            self.constraints.append(
                Constraint(f"{var.name}>{var.lower:g}", AffineExpr.of(var) - var.lower, POS))
        return var

    def var(self, name) -> DecisionVar:
        for v in self.vars:
            if v.name == name:
                return v
        raise KeyError(name)

    def add(self, name, expr: AffineExpr, sense: str) -> Constraint:
        declared = {v.name: v for v in self.vars}
        for v in expr.variables:
            if declared.get(v.name) != v:
                raise ValueError(f"constraint {name!r} uses undeclared variable {v.name!r}")
        con = Constraint(name, expr, sense)
        self.constraints.append(con)
        return con

    def constraint(self, name) -> Constraint:
        for c in self.constraints:
            if c.name == name:
                return c
        raise KeyError(name)

    def standard_form(self):
        """Per constraint ``(F0, [F_k])`` with ``x`` the stacked free parameters.

        Constraints are oriented so that each reads ``F0 + sum x_k F_k >= 0``
        (strict ones with margin ``eps`` folded in).
        """
        zero = {v.name: np.zeros(v.shape) for v in self.vars}
        out = []
        for con in self.constraints:
            f0 = con.signed(zero)
            if con.strict:
                f0 = f0 - self.eps * np.eye(f0.shape[0])
            fk = []
            for v in self.vars:
                for e in v.basis():
                    vals = dict(zero)
                    vals[v.name] = e
                    fk.append(con.signed(vals) - con.signed(zero))
            out.append((f0, fk))
        return out

    def dump(self, fh) -> None:
        """Write the standard form as plain text."""
        fh.write(f"# lmi problem {self.name}\n")
        fh.write(f"eps {self.eps!r}\n")
        nx = sum(v.n_free for v in self.vars)
        fh.write(f"variables {len(self.vars)} parameters {nx}\n")
        for v in self.vars:
            fh.write(f"var {v.name} {v.kind} {v.shape[0]} {v.shape[1]} free {v.n_free}\n")
        fh.write(f"constraints {len(self.constraints)}\n")
        for con, (f0, fk) in zip(self.constraints, self.standard_form()):
            fh.write(f"constraint {con.name} {con.sense} dim {f0.shape[0]}\n")
            _write_block(fh, "F0", f0)
            for k, f in enumerate(fk, start=1):
                if np.any(f):
                    _write_block(fh, f"F{k}", f)


def _write_block(fh, label, m):
    fh.write(f"{label}\n")
    for row in m:
        fh.write(" ".join(f"{x:.17g}" for x in row) + "\n")


@dataclass
class Assignment:
    values: dict
    residuals: dict
    feasible: bool
    slack: float
    status: str = ""

    def __getitem__(self, name):
        return self.values[name]


@dataclass
class ConstraintCheck:
    name: str
    sense: str
    slack: float
    passed: bool


@dataclass
class VerificationReport:
    checks: list
    tol: float

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def worst(self) -> ConstraintCheck:
        return min(self.checks, key=lambda c: c.slack)

    def failures(self):
        return [c for c in self.checks if not c.passed]


def residuals(problem: LmiProblem, values: dict) -> dict:
    return {c.name: c.slack(values, problem.eps) for c in problem.constraints}


def verify_assignment(problem: LmiProblem, assignment, tol: float = 1e-7) -> VerificationReport:
    """Recompute every constraint slack from the raw values with numpy."""
    values = assignment.values if isinstance(assignment, Assignment) else assignment
    checks = []
    for con in problem.constraints:
        missing = [v.name for v in con.expr.variables if v.name not in values]
        if missing:
            checks.append(ConstraintCheck(con.name, con.sense, -np.inf, False))
            continue
        s = con.slack(values, problem.eps)
        checks.append(ConstraintCheck(con.name, con.sense, s, s >= -tol))
    return VerificationReport(checks, tol)


SOLVER_TOL = 1e-8


def solve_feasibility(problem: LmiProblem, solver: str = "CLARABEL", verbose: bool = False) -> Assignment:
    """Solve ``problem`` with a conic backend and re-check the answer.

    Infeasibility is reported through ``Assignment.feasible``; a backend
    that returns no usable point raises :class:`SolverError`.
    """
    cvx_vars = {}
    cons = []
    for v in problem.vars:
        if v.kind == SYMMETRIC:
            x = cp.Variable(v.shape, symmetric=True, name=v.name)
        else:
            x = cp.Variable(v.shape, name=v.name)
        cvx_vars[v.name] = x
        if problem.var_bound is not None:
            cons.append(cp.abs(x) <= problem.var_bound)

    t = cp.Variable(name="slack")
    fixed = problem.trace_objective is not None
    margin = 2 * problem.eps if fixed else t
    for con in problem.constraints:
        e = con.expr.to_cvxpy(cvx_vars)
        e = 0.5 * (e + e.T)
        if con.sense in (NEG, NSD):
            e = -e
        k = con.expr.shape[0]
        if con.strict:
            cons.append(e - margin * np.eye(k) >> 0)
        else:
            cons.append(e >> 0)

    if fixed:
        obj = sum(w * cp.trace(cvx_vars[name]) for name, w in problem.trace_objective.items())
        prob = cp.Problem(cp.Minimize(obj), cons)
    else:
        cons.append(t <= problem.slack_cap)
        prob = cp.Problem(cp.Maximize(t), cons)

    try:
        with warnings.catch_warnings():
            # "inaccurate" answers are judged by the recomputed slacks below
            warnings.filterwarnings("ignore", message="Solution may be inaccurate")
            prob.solve(solver=solver, verbose=verbose)
    except cp.error.SolverError as exc:
        raise SolverError(f"{problem.name}: backend {solver} failed: {exc}") from exc

    status = prob.status
    log.debug("%s: status=%s value=%s", problem.name, status, prob.value)
    if status in (cp.INFEASIBLE, cp.INFEASIBLE_INACCURATE, cp.UNBOUNDED, cp.UNBOUNDED_INACCURATE):
        return Assignment({}, {}, False, -np.inf, status)
    if any(x.value is None for x in cvx_vars.values()):
        raise SolverError(f"{problem.name}: backend returned status {status} without a point")

    values = {}
    for v in problem.vars:
        val = np.array(cvx_vars[v.name].value, dtype=float).reshape(v.shape)
        if v.kind == SYMMETRIC:
            val = symmetrize(val)
        values[v.name] = val
    res = residuals(problem, values)
    # strictness is judged on the recomputed slacks, not on the solver status
    worst = min(res.values()) if res else np.inf
    feasible = worst >= -10 * SOLVER_TOL and status in (cp.OPTIMAL, cp.OPTIMAL_INACCURATE)
    best = float(t.value) if (not fixed and t.value is not None) else worst + problem.eps
    return Assignment(values, res, bool(feasible), best, status)
