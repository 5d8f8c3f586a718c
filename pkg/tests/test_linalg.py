import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from fosynth.linalg import (CompletionError, complete_lyapunov, is_positive_definite, kron,
                            null_space_basis, rank, spectrum)

finite = st.floats(-5, 5, allow_nan=False, allow_infinity=False)


def mats(rows, cols):
    return arrays(np.float64, (rows, cols), elements=finite)


def test_kron_identity_is_block_diagonal():
    m = np.array([[1.0, 2.0], [3.0, 4.0]])
    out = kron(np.eye(2), m)
    assert np.array_equal(out[:2, :2], m) and np.array_equal(out[2:, 2:], m)
    assert not out[:2, 2:].any() and not out[2:, :2].any()


def test_kron_hand_unrolled():
    out = kron([[1, -1], [1, 1]], [[0, 1], [2, 0]])
    assert out.shape == (4, 4)
    assert np.array_equal(out[:2, :2], [[0, 1], [2, 0]])
    assert np.array_equal(out[:2, 2:], [[0, -1], [-2, 0]])


def test_kron_builds_four_block_selector_product():
    bt = np.array([[0.0, 0.0, 1.0, 0.0], [0.0, 0.0, 0.0, 1.0], [1.05, 0.95, 0.0, 0.0]])
    p = kron([[1, -1], [1, 1]], bt)
    expected = np.block([[bt, -bt], [bt, bt]])
    assert np.array_equal(p, expected)


@settings(max_examples=40, deadline=None)
@given(mats(2, 2), mats(1, 3), mats(2, 1))
def test_kron_associative(a, b, c):
    left = kron(a, kron(b, c))
    right = kron(kron(a, b), c)
    assert np.max(np.abs(left - right), initial=0.0) <= 1e-12 * (1 + np.max(np.abs(left), initial=0.0))


def test_null_space_of_output_row():
    n = null_space_basis([[0.0, -1.0]], 1e-12)
    assert n.shape == (2, 1)
    assert np.allclose(np.abs(n[:, 0]), [1.0, 0.0])


def test_null_space_of_input_column_transpose():
    n = null_space_basis([[1.05, 0.95]], 1e-12)
    ref = np.array([-0.95, 1.05]) / math.hypot(0.95, 1.05)
    assert n.shape == (2, 1)
    assert abs(abs(n[:, 0] @ ref) - 1.0) < 1e-14


def test_null_space_trivial_kernel():
    assert null_space_basis(np.eye(3), 1e-9).shape == (3, 0)


def test_null_space_rejects_nonpositive_tol():
    with pytest.raises(ValueError):
        null_space_basis(np.eye(2), 0.0)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 4), st.integers(1, 5), st.data())
def test_null_space_properties(r, c, data):
    m = data.draw(mats(r, c))
    tol = 1e-12
    n = null_space_basis(m, tol)
    smax = np.linalg.norm(m, 2) if m.any() else 0.0
    assert np.max(np.abs(m @ n), initial=0.0) <= tol * (1 + smax) + 1e-12 * smax
    assert np.allclose(n.T @ n, np.eye(n.shape[1]), atol=1e-10)
    assert rank(m, tol) + n.shape[1] == c


def test_spectrum_diagonal():
    sp = spectrum(np.diag([-1.0, -2.0]))
    assert sorted(sp.eigenvalues.real) == [-2.0, -1.0]
    assert sp.min_abs_arg == pytest.approx(math.pi)


def test_spectrum_rotation_generator():
    sp = spectrum([[0.0, 1.0], [-1.0, 0.0]])
    assert np.allclose(sorted(sp.eigenvalues.imag), [-1.0, 1.0])
    assert sp.min_abs_arg == pytest.approx(math.pi / 2)


def test_spectrum_rejects_rectangular():
    with pytest.raises(ValueError):
        spectrum(np.ones((2, 3)))


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 5), st.data())
def test_spectrum_conjugate_closed(n, data):
    m = data.draw(mats(n, n))
    assert spectrum(m).conjugate_closed(1e-10 * (1 + np.abs(m).sum()))


def test_positive_definite_examples():
    assert is_positive_definite(np.eye(3), 1e-9)
    assert not is_positive_definite(np.diag([1.0, 0.0]), 1e-9)
    with pytest.raises(ValueError):
        is_positive_definite([[1.0, 1.0], [0.0, 1.0]], 1e-9)


def test_completion_identity_pair():
    z = complete_lyapunov(np.eye(2), np.eye(2), 2)
    assert np.allclose(z, np.eye(4))


def test_completion_scaled_pair():
    x, y = 2 * np.eye(2), np.eye(2)
    z = complete_lyapunov(x, y, 2, 1e-9)
    x2 = z[:2, 2:]
    assert np.allclose(x2 @ x2.T, np.eye(2), atol=1e-12)
    assert np.allclose(np.linalg.inv(z)[:2, :2], y, atol=1e-12)
    assert is_positive_definite(z, 1e-9)


def test_completion_pads_larger_controller_order():
    x, y = np.array([[3.0, 0.5], [0.5, 2.0]]), np.eye(2)
    z = complete_lyapunov(x, y, 3)
    assert z.shape == (5, 5)
    assert np.allclose(np.linalg.inv(z)[:2, :2], y, atol=1e-10)


def test_completion_rejects_coupling_violation():
    with pytest.raises(CompletionError):
        complete_lyapunov(0.5 * np.eye(2), np.eye(2), 2)


def test_completion_rejects_small_order():
    with pytest.raises(ValueError):
        complete_lyapunov(2 * np.eye(2), np.eye(2), 1)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 4), st.data())
def test_completion_inverse_block(n, data):
    g = data.draw(mats(n, n))
    h = data.draw(mats(n, n))
    y = g @ g.T + np.eye(n)
    # x - y^{-1} = h h^T >= 0
    x = np.linalg.inv(y) + h @ h.T
    z = complete_lyapunov(x, y, n)
    assert np.allclose(z, z.T)
    assert np.linalg.eigvalsh(z)[0] > 0
    lead = np.linalg.inv(z)[:n, :n]
    assert np.all(np.abs(lead - y) <= 1e-8 * (1 + np.abs(y)))
