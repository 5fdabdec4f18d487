import numpy as np
import pytest
from hypothesis import given, settings
import hypothesis.strategies as st

from modules.exceptions import MaxIterations, SingularJacobian, InvalidConfig
from modules.hamiltonian import (CotangentPoint, BANG_MINUS, BANG_PLUS, SINGULAR, exp_map, lift, lifts,
                                 singular_control_z, normalized_lift)
from modules.planar_system import Tolerances, singular_det
from modules.shooting import (ResidualSystem, PriorLiftProblem, AssumptionReport, newton_solve, residual_bsb,
                              pack_bsb, split_bsb, bsb_order_violations, residual_prior_lift, residual_F_bio,
                              residual_F_mri, point_target_constraint, fedbatch_lift_guess, solve_prior_lift,
                              check_assumptions, last_switch_problem, bsb_residual_system)


@given(st.lists(st.floats(-100, 100), min_size=3, max_size=3), st.lists(st.floats(-100, 100), min_size=3, max_size=3))
@settings(max_examples=20, deadline=None)
def test_newton_affine_residual(c, y0):
    c = np.array(c)
    solution = newton_solve(ResidualSystem(3, lambda y: y - c, "affine"), np.array(y0))
    assert solution.converged
    assert solution.iterations <= 3
    assert np.allclose(solution.y, c, atol=1e-9)


def test_newton_hand_root():
    solution = newton_solve(ResidualSystem(2, lambda y: np.array([y[0] ** 2 - 4, y[1] - 1]), "square"),
                            np.array([1.0, 0.0]))
    assert np.allclose(solution.y, [2.0, 1.0])
    assert solution.residual_norm <= 1e-10
    assert solution.history[-1] == solution.residual_norm


def test_newton_iteration_limit():
    with pytest.raises(MaxIterations):
        newton_solve(ResidualSystem(1, lambda y: np.exp(y) - 10, "exp"), np.zeros(1),
                     Tolerances(newton_max_iter=1))


def test_newton_singular_jacobian():
    residual = ResidualSystem(2, lambda y: np.array([y[0] + y[1] - 1, y[0] + y[1] - 2]), "parallel")
    with pytest.raises(SingularJacobian):
        newton_solve(residual, np.zeros(2))


def test_residual_shape_is_checked():
    with pytest.raises(ValueError):
        ResidualSystem(2, lambda y: y[:1], "short")(np.zeros(2))


def test_bsb_unknowns_round_trip_and_order():
    z1 = CotangentPoint([-0.5, 0.1], [0.2, 1.0])
    z2 = CotangentPoint([-0.3, 0.0], [0.1, 1.0])
    y = pack_bsb(np.array([0.3, 0.4]), 1.0, 0.5, 2.0, z1, z2)
    parts = split_bsb(y)
    assert parts["t2"] == 0.5
    assert bsb_order_violations(y) == ["t2 < t1"]


def test_bsb_matching_blocks(mri_model):
    sys = mri_model.system
    x0, p0 = np.array([-0.5, 0.2]), np.array([0.4, 1.0])
    z1 = exp_map(sys, BANG_MINUS, 0.5, CotangentPoint(x0, p0))
    y = pack_bsb(p0, 0.5, 0.5, 1.5, z1, z1)
    r = residual_bsb(sys, x0, np.zeros(2), y)
    assert r.shape == (13,)
    assert np.allclose(r[5:9], 0.0, atol=1e-12)


def test_bsb_zero_adjoint_hamiltonian_block(mri_model):
    sys = mri_model.system
    zero = CotangentPoint([-0.5, 0.2], [0.0, 0.0])
    y = pack_bsb(np.zeros(2), 0.0, 0.0, 0.0, zero, zero)
    assert residual_bsb(sys, zero.x, np.zeros(2), y)[2] == pytest.approx(-1.0)
    assert residual_bsb(sys, zero.x, np.zeros(2), y, hamiltonian_block="initial")[2] == pytest.approx(-1.0)


def test_bsb_converged_structure(mri_model):
    # Build a consistent bang-singular-bang extremal by forward integration and check it solves S = 0
    sys = mri_model.system
    z1 = normalized_lift(sys, np.array([-0.5, mri_model.params.horizontal_level]))
    z0 = exp_map(sys, BANG_MINUS, -0.4, z1)
    z2 = exp_map(sys, SINGULAR, 0.3, z1)
    z_f = exp_map(sys, BANG_PLUS, 0.5, z2)
    scale = 1 / lift(sys, "Plus", z_f)
    z0, z1, z2 = z0.scaled(scale), z1.scaled(scale), z2.scaled(scale)
    y = pack_bsb(z0.p, 0.4, 0.7, 1.2, z1, z2)
    r = residual_bsb(sys, z0.x, z_f.x, y)
    assert np.max(np.abs(r)) <= 1e-8
    # maximized Hamiltonian is 1 at the initial time as well
    assert lift(sys, "Minus", z0) == pytest.approx(1.0, abs=1e-8)


def test_prior_lift_residual_identity_flow(mri_model):
    sys = mri_model.system
    z_b = CotangentPoint([-0.2, 0.1], [0.3, 1.0])
    r = residual_prior_lift(sys, point_target_constraint(np.zeros(2)), 0.0, z_b)
    h = lifts(sys, z_b)
    assert r[0] == pytest.approx(h["FG"])
    assert r[1] == pytest.approx(h["G"])
    assert np.allclose(r[3:], z_b.x)


def test_prior_lift_residual_is_not_homogeneous(mri_model):
    sys = mri_model.system
    psi = point_target_constraint(np.zeros(2))
    z_b = CotangentPoint([-0.2, 0.1], [0.3, 1.0])
    change = residual_prior_lift(sys, psi, 0.5, z_b.scaled(2.0))[2] - residual_prior_lift(sys, psi, 0.5, z_b)[2]
    assert change == pytest.approx(lift(sys, "Plus", z_b))


def test_bang_sign_must_be_unit(mri_model):
    with pytest.raises(InvalidConfig):
        PriorLiftProblem(mri_model.system, point_target_constraint(np.zeros(2)), bang_sign=0)


def test_fedbatch_volume_block(fedbatch_model):
    z_b = CotangentPoint([0.5, fedbatch_model.params.v_max], [0.1, 0.6])
    assert residual_F_bio(fedbatch_model.params, 0.5, z_b)[4] == 0.0


def test_fedbatch_lift(fedbatch_model, fedbatch_lift):
    assert fedbatch_lift.solution.converged
    assert fedbatch_lift.solution.residual_norm <= 1e-10
    assert abs(fedbatch_lift.x_e[0] - fedbatch_model.params.s_star) <= 1e-7
    assert 0 < fedbatch_lift.x_e[1] < 2.4
    assert fedbatch_lift.z_b_star.x[1] == pytest.approx(fedbatch_model.params.v_max, abs=1e-8)
    assert fedbatch_lift.certificate.verdict_a2 and fedbatch_lift.certificate.verdict_a3


def test_fedbatch_midpoint_guess_ends_on_the_volume_bound(fedbatch_model):
    y = fedbatch_lift_guess(fedbatch_model, "midpoint")
    assert y.shape == (5,)
    assert y[2] == pytest.approx(fedbatch_model.params.v_max, rel=1e-8)


def test_guess_strategy_is_validated(fedbatch_model, fedbatch_problem):
    with pytest.raises(InvalidConfig):
        fedbatch_lift_guess(fedbatch_model, "random")
    with pytest.raises(InvalidConfig):
        solve_prior_lift(fedbatch_problem, "random")


def test_mri_lift(mri_model, mri_lift):
    sys = mri_model.system
    assert mri_lift.solution.residual_norm <= 1e-10
    assert abs(mri_lift.z_b_star.x[0]) <= 1e-7
    assert abs(mri_lift.x_e[1] - mri_model.params.horizontal_level) <= 1e-7
    assert abs(singular_det(sys, mri_lift.x_e)) <= 1e-7
    assert singular_control_z(sys, mri_lift.z_e) < 1
    assert mri_lift.certificate.verdict_a2 and mri_lift.certificate.verdict_a3
    residual = residual_F_mri(mri_model.params, mri_lift.t_b_star, mri_lift.z_b_star)
    assert np.max(np.abs(residual)) <= 1e-9


def test_lift_reconstruction_involution(mri_model, mri_lift):
    z_b = exp_map(mri_model.system, BANG_PLUS, mri_lift.t_b_star, mri_lift.z_e)
    assert np.allclose(z_b.as_vector(), mri_lift.z_b_star.as_vector(), atol=1e-8)


def test_lift_is_locally_unique(mri_problem, mri_lift):
    y = mri_lift.solution.y + 1e-6
    assert np.allclose(solve_prior_lift(mri_problem, y).x_e, mri_lift.x_e, atol=1e-7)


def test_jacobian_first_column_structure(mri_lift):
    report = mri_lift.certificate
    assert report.a == pytest.approx(report.h_ffg_at_ze + report.h_gfg_at_ze)
    assert report.a != 0
    expected = np.array([-report.a, 0, 0, 0, 0])
    assert np.allclose(report.F_first_column, expected, atol=1e-5)


def test_degenerate_adjoint_fails_the_report(mri_problem, mri_lift):
    from dataclasses import replace
    degenerate = replace(mri_lift, z_e=CotangentPoint(mri_lift.x_e, [0.0, 0.0]))
    report = check_assumptions(mri_problem, degenerate)
    assert isinstance(report, AssumptionReport)
    assert not report.verdict_a2


def test_last_switch_constraint_at_a_consistent_point(mri_model):
    sys = mri_model.system
    z_b = normalized_lift(sys, np.array([-0.5, mri_model.params.horizontal_level]))
    xf = exp_map(sys, BANG_MINUS, 0.5, z_b).x
    problem = last_switch_problem(sys, xf)
    assert problem.dim == 6
    r = problem.residual(problem.pack(0.0, z_b, [0.5]))
    assert r.shape == (6,)
    assert np.max(np.abs(r)) <= 1e-9


def test_bsb_residual_system_wraps_the_residual(mri_model):
    sys = mri_model.system
    x0, p0 = np.array([-0.5, 0.2]), np.array([0.4, 1.0])
    z1 = exp_map(sys, BANG_MINUS, 0.5, CotangentPoint(x0, p0))
    y = pack_bsb(p0, 0.5, 0.5, 1.5, z1, z1)
    system = bsb_residual_system(sys, x0, np.zeros(2))
    assert system.dim == 13 and len(system.unknowns) == 13
    assert np.allclose(system(y), residual_bsb(sys, x0, np.zeros(2), y))
