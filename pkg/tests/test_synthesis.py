import math

import numpy as np
import pytest

from fosynth import lmi, reference
from fosynth.analysis import robust_verify, sector_check
from fosynth.interval import IntervalMatrix, UncertainPlant
from fosynth.linalg import is_positive_definite
from fosynth.lmi import DecisionVar, solve_feasibility, verify_assignment
from fosynth.synthesis import (DERIVED, PRINTED, ControllerRealization, SynthesisError,
                               SynthesisOptions, assemble_lyapunov_step, assemble_stage1,
                               assemble_stage2, augment, build_selectors, closed_loop,
                               recover_controller, sector_form, stage1_control_block,
                               stage2_blocks, synthesize, theta_of)


def test_theta_values():
    t = theta_of(1.2)
    assert t == pytest.approx(0.4 * math.pi)
    assert math.sin(t) == pytest.approx(0.95106, abs=1e-5)
    assert math.cos(t) == pytest.approx(0.30902, abs=1e-5)
    assert theta_of(1.0) == pytest.approx(math.pi / 2)
    assert 0 < theta_of(2 - 1e-9) < 1e-8
    with pytest.raises(ValueError):
        theta_of(2.0)


def test_augmented_blocks(worked_aug):
    aug = worked_aug
    assert aug.a0_hat.shape == (4, 4)
    assert np.allclose(aug.a0_hat[:2, :2], [[0.15, -1.5], [-0.1, -2.8]])
    assert not aug.a0_hat[2:].any() and not aug.a0_hat[:, 2:].any()
    b0 = np.array([[0, 0, 1.05], [0, 0, 0.95], [1, 0, 0], [0, 1, 0]])
    assert np.allclose(aug.b0_hat, b0)
    c0 = np.array([[0, 0, 1, 0], [0, 0, 0, 1], [0, -1, 0, 0]])
    assert np.allclose(aug.c0_hat, c0)


def test_selectors_of_worked_plant(worked_sel):
    nc = worked_sel.n_c_basis[:, 0]
    ref = np.array([-0.95, 1.05]) / math.hypot(0.95, 1.05)
    assert abs(abs(nc @ ref) - 1) < 1e-14
    assert np.allclose(np.abs(worked_sel.n_o_basis[:, 0]), [1, 0])


def test_kernel_identities(worked_aug, worked_sel):
    s = worked_sel
    assert np.max(np.abs(worked_aug.b0.T @ s.n_c_basis)) <= 1e-10
    assert np.max(np.abs(worked_aug.c0 @ s.n_o_basis)) <= 1e-10
    assert np.max(np.abs(s.p @ s.n_p)) <= 1e-10
    assert np.max(np.abs(s.q @ s.n_q)) <= 1e-10
    # block pattern [[N,0],[0,0],[0,-N],[0,0]]
    n, k = 2, s.n_c_basis.shape[1]
    assert np.array_equal(s.n_p[:n, :k], s.n_c_basis)
    assert not s.n_p[n:n + 2].any() and not s.n_p[2 * n + 2:].any()
    assert np.array_equal(s.n_p[n + 2:2 * n + 2, k:], -s.n_c_basis)


def test_square_input_matrix_makes_control_side_vacuous():
    p = UncertainPlant(IntervalMatrix.point(-np.eye(2)), IntervalMatrix.point(np.eye(2)),
                       IntervalMatrix.point([[1.0, 0.0]]), 1.5)
    aug = augment(p, 2)
    sel = build_selectors(p, aug)
    assert sel.n_c_basis.shape == (2, 0) and sel.control_vacuous
    prob = assemble_stage1(p, aug, sel)
    names = [c.name for c in prob.constraints]
    assert "control" not in names and "observe" in names


def test_stage1_dimensions(worked, worked_aug, worked_sel):
    prob = assemble_stage1(worked, worked_aug, worked_sel)
    assert [(v.name, v.n_free) for v in prob.vars] == [("Y", 3), ("X", 3), ("eta1", 1), ("eta2", 1)]
    assert prob.constraint("control").expr.shape == (10, 10)
    assert prob.constraint("coupling").sense == lmi.PSD


def test_stage1_control_block_matches_bordered_form(worked_aug, worked_sel, rng):
    aug, nc = worked_aug, worked_sel.n_c_basis
    y = DecisionVar.symmetric("Y", 2)
    eta = DecisionVar.scalar("eta1", lower=0.0)
    expr = stage1_control_block(aug, nc, y, eta, PRINTED)
    g = rng.normal(size=(2, 2))
    yv, ev = g @ g.T + np.eye(2), 0.7
    s, c = math.sin(aug.theta), math.cos(aug.theta)
    a = aug.a0
    sig = np.block([
        [nc.T @ (a @ yv + yv @ a.T) @ nc / s, nc.T @ (yv @ a.T - a @ yv) @ nc / c],
        [nc.T @ (a @ yv - yv @ a.T) @ nc / c, nc.T @ (a @ yv + yv @ a.T) @ nc / s],
    ])
    ryn = aug.r_a @ yv @ nc
    r1 = np.block([[ryn / s, -ryn / c], [ryn / c, ryn / s]])
    m1 = np.kron(np.eye(2), nc.T @ aug.m_a)
    hand = np.block([[sig + ev * m1 @ m1.T, r1.T], [r1, -ev * np.eye(r1.shape[0])]])
    got = expr.value({"Y": yv, "eta1": np.array([[ev]])})
    assert np.max(np.abs(got - hand)) <= 1e-12


def test_stage1_reduces_without_a_uncertainty(rng):
    p = UncertainPlant(IntervalMatrix.point([[0.15, -1.5], [-0.1, -2.8]]),
                       IntervalMatrix.point([[1.05], [0.95]]), IntervalMatrix.point([[0.0, -1.0]]), 1.2)
    aug = augment(p, 2)
    sel = build_selectors(p, aug)
    assert not aug.m_a.any() and not aug.r_a.any()
    nc = sel.n_c_basis
    g = rng.normal(size=(2, 2))
    yv = g @ g.T
    ev = 2.5
    expr = assemble_stage1(p, aug, sel).constraint("control").expr
    got = expr.value({"Y": yv, "eta1": np.array([[ev]])})
    s, c = math.sin(aug.theta), math.cos(aug.theta)
    a = aug.a0
    sig = np.block([
        [nc.T @ (a @ yv + yv @ a.T) @ nc / s, nc.T @ (yv @ a.T - a @ yv) @ nc / c],
        [nc.T @ (a @ yv - yv @ a.T) @ nc / c, nc.T @ (a @ yv + yv @ a.T) @ nc / s],
    ])
    k = got.shape[0] - 2
    hand = np.block([[sig, np.zeros((2, k))], [np.zeros((k, 2)), -ev * np.eye(k)]])
    assert np.max(np.abs(got - hand)) <= 1e-12


@pytest.mark.parametrize("form", [PRINTED, DERIVED])
def test_worked_plant_stage1_is_infeasible(worked, worked_aug, worked_sel, form):
    # the family contains a member with a21 = 0 and a11 > 0: an unobservable unstable mode
    sol = solve_feasibility(assemble_stage1(worked, worked_aug, worked_sel, form=form))
    assert not sol.feasible or sol.slack <= 10 * lmi.SOLVER_TOL


def test_stage1_rejects_alpha_one():
    p = reference.demo_plant()
    p1 = UncertainPlant(p.a, p.b, p.c, 1.0)
    aug = augment(p1, 2)
    with pytest.raises(ValueError):
        assemble_stage1(p1, aug, build_selectors(p1, aug))


def test_stage2_with_certain_output_has_zero_cross_border(worked_aug, rng):
    aug = worked_aug
    assert not aug.m_c_hat.any()
    x_cl = np.eye(4)
    prob = assemble_stage2(None, aug, x_cl)
    k = rng.normal(size=(3, 3))
    vals = {"K": k, **{f"eta{i}": np.array([[1.0 + i]]) for i in range(3, 8)}}
    big = prob.constraint("closed_loop").expr.value(vals)
    d6 = d7 = 2 * aug.n * aug.l
    d7 = 2 * aug.m * aug.n
    tot = big.shape[0]
    assert not big[tot - d7 - d6:tot - d7, tot - d7:].any()
    assert np.isfinite(big).all()


def test_stage2_reduces_to_nominal_condition(rng):
    p = UncertainPlant(IntervalMatrix.point([[-1.0, 0.5], [0.2, -2.0]]), IntervalMatrix.point([[1.0], [0.5]]),
                       IntervalMatrix.point([[0.0, 1.0]]), 1.3)
    aug = augment(p, 2)
    g = rng.normal(size=(4, 4))
    x_cl = g @ g.T + np.eye(4)
    k = rng.normal(size=(3, 3))
    etas = [DecisionVar.scalar(f"eta{i}", lower=0.0) for i in range(3, 8)]
    kv = DecisionVar.matrix("K", 3, 3)
    big = stage2_blocks(aug, x_cl, kv, etas)
    vals = {"K": k, **{f"eta{i}": np.array([[0.0]]) for i in range(3, 8)}}
    got = big.value(vals)
    a_cl = aug.a0_hat + aug.b0_hat @ k @ aug.c0_hat
    nominal = sector_form(a_cl.T @ x_cl, aug.theta)
    n2 = nominal.shape[0]
    assert np.max(np.abs(got[:n2, :n2] - nominal)) <= 1e-12
    assert not got[n2:, n2:].any() and not got[:n2, n2:].any()


def test_stage2_is_affine_in_k(demo, rng):
    aug = augment(demo, 2)
    g = rng.normal(size=(4, 4))
    prob = assemble_stage2(demo, aug, g @ g.T + np.eye(4))
    expr = prob.constraint("closed_loop").expr
    k = rng.normal(size=(3, 3))
    etas = {f"eta{i}": np.array([[0.3 * i]]) for i in range(3, 8)}
    e0 = expr.value({"K": np.zeros((3, 3)), **etas})
    e1 = expr.value({"K": k, **etas})
    e2 = expr.value({"K": 2 * k, **etas})
    assert np.max(np.abs((e2 - e1) - (e1 - e0))) <= 1e-12


def test_stage2_requires_positive_definite_x(demo):
    with pytest.raises(ValueError):
        assemble_stage2(demo, augment(demo, 2), -np.eye(4))


def test_published_controller_admits_no_certificate(worked_aug, published):
    # the nominal closed loop is already outside the sector, so no X_cl exists
    prob = assemble_lyapunov_step(worked_aug, published.k)
    sol = solve_feasibility(prob)
    assert not sol.feasible or sol.slack <= 10 * lmi.SOLVER_TOL


def test_recover_controller_partitions(published, rng):
    z = recover_controller(np.zeros((3, 3)), 2, 1, 1)
    assert not any(m.any() for m in (z.a_c, z.b_c, z.c_c, z.d_c))
    back = recover_controller(published.k, 2, 1, 1)
    for name in ("a_c", "b_c", "c_c", "d_c"):
        assert np.array_equal(getattr(back, name), getattr(published, name))
    k = rng.normal(size=(5, 4))
    assert np.array_equal(recover_controller(k, 3, 2, 1).k, k)
    with pytest.raises(ValueError):
        recover_controller(k, 2, 2, 1)


def test_closed_loop_blocks(worked, published):
    a, b, c = worked.nominal()
    zero = ControllerRealization.zero(2, 1, 1)
    acl = closed_loop(a, b, c, zero)
    assert np.array_equal(acl[:2, :2], a) and not acl[2:].any() and not acl[:, 2:].any()
    acl = closed_loop(a, b, c, published)
    assert np.allclose(acl[:2, :2], [[0.15, -2.55], [-0.1, -3.75]], atol=1e-14)
    with pytest.raises(ValueError):
        closed_loop(a, b, c, ControllerRealization.zero(2, 2, 1))


def test_published_controller_leaves_nominal_loop_unstable(worked, published):
    acl = closed_loop(*worked.nominal(), published)
    ok, min_arg = sector_check(acl, worked.alpha, 0.0)
    assert not ok
    assert np.max(np.linalg.eigvals(acl).real) == pytest.approx(0.196, abs=1e-3)


def test_synthesize_rejects_worked_plant_at_stage1(worked):
    with pytest.raises(SynthesisError) as info:
        synthesize(worked, 2)
    assert info.value.stage == "stage1"
    assert info.value.best_slack <= 0


def test_synthesize_uncontrollable_unstable_mode():
    p = UncertainPlant(IntervalMatrix.point(np.eye(2)), IntervalMatrix.point(np.zeros((2, 1))),
                       IntervalMatrix.point(np.eye(2)), 1.2)
    with pytest.raises(SynthesisError) as info:
        synthesize(p, 2)
    assert info.value.stage == "stage1"


def test_synthesize_preconditions(demo):
    with pytest.raises(ValueError):
        synthesize(demo, 1)
    with pytest.raises(ValueError):
        synthesize(UncertainPlant(demo.a, demo.b, demo.c, 1.0), 2)


def test_demo_design_certificate(demo, demo_design):
    k, cert = demo_design
    assert cert.stage1_report.passed and cert.stage2_report.passed
    assert is_positive_definite(cert.x_cl, 1e-9)
    lead = np.linalg.inv(cert.x_cl)[:2, :2]
    assert np.all(np.abs(lead - cert.y) <= 1e-8 * (1 + np.abs(cert.y)))
    assert set(cert.etas) == {f"eta{i}" for i in range(1, 8)}
    assert all(v >= 0 for v in cert.etas.values())
    ok, _ = sector_check(closed_loop(*demo.nominal(), k), demo.alpha)
    assert ok


def test_demo_design_is_robust(demo, demo_design):
    k, _ = demo_design
    rep = robust_verify(demo, k, 300, seed=1)
    assert rep.n_vertices == 64 and rep.passed


def test_refinement_rescues_unstable_demo():
    p = reference.demo_plant(unstable=True)
    with pytest.raises(SynthesisError) as info:
        synthesize(p, 2, SynthesisOptions(retries=1))
    assert info.value.stage == "stage2"
    k, cert = synthesize(p, 2, SynthesisOptions(refine=3))
    assert cert.stage2_report.passed
    assert robust_verify(p, k, 200, seed=3).passed


def test_certificate_recheck_is_independent(demo, demo_design):
    _, cert = demo_design
    aug = augment(demo, 2)
    p2 = assemble_stage2(demo, aug, cert.x_cl, SynthesisOptions().eps)
    assert verify_assignment(p2, cert.stage2.values, 10 * lmi.SOLVER_TOL).passed
    bad = dict(cert.stage2.values)
    bad["K"] = bad["K"] + 50.0
    assert not verify_assignment(p2, bad, 10 * lmi.SOLVER_TOL).passed
