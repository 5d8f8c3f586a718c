"""Dense matrix helpers shared by the synthesis and analysis code.

Everything here works on plain ``numpy`` arrays.  Functions never mutate
their inputs.
"""

from dataclasses import dataclass

import numpy as np


def as_matrix(m) -> np.ndarray:
    """Return ``m`` as a 2-D float array, promoting scalars and vectors."""
    arr = np.array(m, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    elif arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    elif arr.ndim != 2:
        raise ValueError(f"expected a matrix, got array of shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("matrix entries must be finite")
    return arr


def kron(a, b) -> np.ndarray:
    """Kronecker product; block ``(i, j)`` of the result is ``a[i, j] * b``."""
    return np.kron(as_matrix(a), as_matrix(b))


def sym(m: np.ndarray) -> np.ndarray:
    """``M + M^T``."""
    return m + m.T


def symmetrize(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + m.T)


def null_space_basis(m, tol: float = 1e-12) -> np.ndarray:
    """Orthonormal basis of the kernel of ``m``.

    Singular values at or below ``tol * sigma_max`` count as zero.  A trivial
    kernel gives an array with zero columns.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    m = as_matrix(m)
    _, s, vh = np.linalg.svd(m, full_matrices=True)
    smax = s[0] if s.size else 0.0
    rank = int(np.sum(s > tol * smax)) if smax > 0 else 0
    return vh[rank:].T.copy()


def rank(m, tol: float = 1e-12) -> int:
    m = as_matrix(m)
    s = np.linalg.svd(m, compute_uv=False)
    if not s.size or s[0] == 0:
        return 0
    return int(np.sum(s > tol * s[0]))


@dataclass(frozen=True)
class Spectrum:
    eigenvalues: np.ndarray
    min_abs_arg: float

    def conjugate_closed(self, tol: float = 1e-10) -> bool:
        """True if the eigenvalue multiset equals its conjugate multiset."""
        ev = np.sort_complex(self.eigenvalues)
        conj = np.sort_complex(np.conj(self.eigenvalues))
        return bool(np.all(np.abs(ev - conj) <= tol * (1 + np.abs(ev))))


def spectrum(m) -> Spectrum:
    m = as_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise ValueError(f"spectrum needs a square matrix, got {m.shape}")
    ev = np.linalg.eigvals(m)
    return Spectrum(eigenvalues=ev, min_abs_arg=float(np.min(np.abs(np.angle(ev)))))


def _check_symmetric(m: np.ndarray, tol: float) -> None:
    if m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got {m.shape}")
    asym = np.max(np.abs(m - m.T)) if m.size else 0.0
    if asym > tol * (1.0 + np.max(np.abs(m))):
        raise ValueError(f"matrix is not symmetric (max asymmetry {asym:.3e})")


def min_eig(m: np.ndarray) -> float:
    """Smallest eigenvalue of the symmetric part of ``m``."""
    return float(np.linalg.eigvalsh(symmetrize(as_matrix(m)))[0])


def is_positive_definite(m, tol: float = 1e-9) -> bool:
    m = as_matrix(m)
    _check_symmetric(m, tol)
    return min_eig(m) > tol


class CompletionError(ValueError):
    """Raised when ``x`` and ``y`` cannot be completed to a Lyapunov pair."""


def complete_lyapunov(x, y, n_c: int, tol: float = 1e-9) -> np.ndarray:
    """Build ``X_cl = [[x, X2], [X2^T, X3]]`` whose inverse has leading block ``y``.

    ``X2 X2^T`` factors ``x - y^{-1}`` (eigenvalues in ``[-tol, 0)`` are
    clipped), ``X3`` is the identity.  Requires ``[[x, I], [I, y]] >= 0`` and
    ``n_c >= n``.
    """
    x = as_matrix(x)
    y = as_matrix(y)
    n = x.shape[0]
    if x.shape != (n, n) or y.shape != (n, n):
        raise ValueError("x and y must be square and of equal size")
    if n_c < n:
        raise CompletionError(f"completion needs n_c >= n (got n_c={n_c}, n={n})")
    _check_symmetric(x, tol)
    _check_symmetric(y, tol)
    x = symmetrize(x)
    y = symmetrize(y)
    if min_eig(x) <= 0 or min_eig(y) <= 0:
        raise CompletionError("x and y must be positive definite")
    coupling = np.block([[x, np.eye(n)], [np.eye(n), y]])
    scale = 1.0 + np.max(np.abs(coupling))
    if min_eig(coupling) < -tol * scale:
        raise CompletionError(
            f"coupling matrix [[x, I], [I, y]] is not PSD (min eig {min_eig(coupling):.3e})"
        )

    y_inv = symmetrize(np.linalg.inv(y))
    lam, vec = np.linalg.eigh(symmetrize(x - y_inv))
    if lam[0] < -tol * scale:
        raise CompletionError(f"x - inv(y) has eigenvalue {lam[0]:.3e} < -tol")
    lam = np.clip(lam, 0.0, None)
    x2 = np.zeros((n, n_c))
    x2[:, :n] = vec * np.sqrt(lam)
    x3 = np.eye(n_c)
    x_cl = np.block([[x, x2], [x2.T, x3]])

    # Strictness repair; rescaling X2 with X3 keeps the inverse block equal to y.
    if min_eig(x_cl) <= tol:
        c = 1.0 + tol
        x_cl = np.block([[x, np.sqrt(c) * x2], [np.sqrt(c) * x2.T, c * x3]])
    return symmetrize(x_cl)
