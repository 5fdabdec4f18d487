import dataclasses
import numpy as np
import pytest

from analysis.models import fedbatch_singular_volume_feedback, mri_saturation_point
from modules.exceptions import OutOfSpan, InvalidConfig, LegendreDegenerate
from modules.hamiltonian import (CotangentPoint, ControlLaw, BANG_PLUS, BANG_MINUS, SINGULAR, TRAJECTORY_COLUMNS,
                                 lift, lifts, singular_control_z, normalized_lift, hamiltonian_vector_field,
                                 integrate_extremal, exp_map, flow_state, switching_data, singular_point_type,
                                 hamiltonian_value, gamma_u)
from modules.planar_system import alpha_beta, lie_bracket, legendre_clebsch_margin, collinearity_det


def test_cotangent_point_rejects_non_finite():
    with pytest.raises(ValueError):
        CotangentPoint([0.0, np.nan], [1.0, 0.0])


def test_constant_law_is_bounded():
    with pytest.raises(InvalidConfig):
        ControlLaw.constant(1.5)
    assert ControlLaw.constant(0.3).mirrored().value == -0.3
    assert BANG_PLUS.mirrored() == BANG_MINUS


def test_lifts_closed_form(mri_model):
    unbounded = dataclasses.replace(mri_model.system, domain=None, region=None)
    assert lift(unbounded, "G", CotangentPoint([1, 2], [3, 4])) == pytest.approx(-2.0)
    assert lift(mri_model.system, "FG", CotangentPoint([0, 0], [1, 0])) == pytest.approx(-0.1)
    z = CotangentPoint([0.2, -0.3], [0.7, -1.1])
    h = lifts(mri_model.system, z)
    assert lift(mri_model.system, "Plus", z) == pytest.approx(h["F"] + h["G"])
    assert lift(mri_model.system, "Minus", z) == pytest.approx(h["F"] - h["G"])


def test_unknown_lift(mri_model):
    with pytest.raises(ValueError):
        lift(mri_model.system, "H", CotangentPoint([0, 0], [1, 0]))


def test_normalized_lift(fedbatch_model):
    z = normalized_lift(fedbatch_model.system, np.array([1.0, 1.0]))
    assert lift(fedbatch_model.system, "F", z) == pytest.approx(1.0, abs=1e-12)
    assert lift(fedbatch_model.system, "G", z) == pytest.approx(0.0, abs=1e-12)
    assert lift(fedbatch_model.system, "FG", z) == pytest.approx(0.0, abs=1e-10)


def test_singular_control_at_saturation_point(mri_model):
    z = normalized_lift(mri_model.system, mri_saturation_point(mri_model.params))
    assert singular_control_z(mri_model.system, z) == pytest.approx(1.0, abs=1e-9)
    h_gfg = legendre_clebsch_margin(mri_model.system, z.x) / -collinearity_det(mri_model.system, z.x)
    assert singular_point_type(mri_model.system, z) == ("hyperbolic" if h_gfg > 0 else "elliptic")


def test_singular_point_types_on_the_fedbatch_locus(fedbatch_model):
    sys = fedbatch_model.system
    z = normalized_lift(sys, np.array([1.0, 1.0]))
    # H_[g,[f,g]] = det(g, [g,[f,g]]) / -delta_0 for the normalized adjoint
    assert singular_point_type(sys, z) == "hyperbolic"
    assert singular_point_type(sys, z.scaled(-1.0)) == "elliptic"
    gfg = lie_bracket(sys, "GFG", z.x)
    assert singular_point_type(sys, CotangentPoint(z.x, [-gfg[1], gfg[0]])) == "parabolic"


def test_singular_control_matches_volume_formula(fedbatch_model):
    z = normalized_lift(fedbatch_model.system, np.array([1.0, 1.0]))
    expected = fedbatch_singular_volume_feedback(fedbatch_model.params, 1.0)
    assert singular_control_z(fedbatch_model.system, z) == pytest.approx(expected, abs=1e-9)


def test_singular_control_degenerate_adjoint(mri_model):
    with pytest.raises(LegendreDegenerate):
        singular_control_z(mri_model.system, CotangentPoint([0.2, 0.1], [0.0, 0.0]))


def test_hamiltonian_vector_field_bang_plus(mri_model):
    value = hamiltonian_vector_field(mri_model.system, BANG_PLUS, CotangentPoint([0, 0], [0, 1]))
    assert np.allclose(value, [0.0, 0.1, -1.0, 0.1], atol=1e-14)


def test_free_relaxation_closed_form(mri_model):
    trajectory = integrate_extremal(mri_model.system, ControlLaw.constant(0.0), CotangentPoint([0.5, 0], [1, 0]), 1.0)
    x = trajectory.z(1.0).x
    assert x[0] == pytest.approx(0.5 * np.exp(-0.5), abs=1e-9)
    assert x[1] == pytest.approx(1 - np.exp(-0.1), abs=1e-9)


def test_hamiltonian_is_conserved_on_bang_arcs(fedbatch_model):
    z0 = normalized_lift(fedbatch_model.system, np.array([1.0, 1.0]))
    trajectory = exp_map(fedbatch_model.system, BANG_PLUS, 2.0, z0, full=True)
    assert trajectory.hamiltonian_drift() <= 1e-8


def test_forward_then_backward_returns(mri_model):
    z0 = CotangentPoint([-0.3, 0.2], [0.4, 1.0])
    z1 = exp_map(mri_model.system, BANG_MINUS, 1.5, z0)
    back = exp_map(mri_model.system, BANG_MINUS, -1.5, z1)
    assert np.allclose(back.as_vector(), z0.as_vector(), atol=1e-8)


def test_backward_trajectory_endpoints(mri_model):
    z0 = CotangentPoint([-0.3, 0.2], [0.4, 1.0])
    trajectory = exp_map(mri_model.system, BANG_PLUS, -1.0, z0, full=True)
    assert np.allclose(trajectory.start.as_vector(), z0.as_vector())
    assert trajectory.span == pytest.approx((-1.0, 0.0))
    with pytest.raises(OutOfSpan):
        trajectory(0.5)


def test_singular_arc_stays_singular(mri_model):
    z0 = normalized_lift(mri_model.system, np.array([-0.5, mri_model.params.horizontal_level]))
    trajectory = integrate_extremal(mri_model.system, SINGULAR, z0, 0.5)
    for t in np.linspace(0, 0.5, 11):
        phi, phidot = switching_data(mri_model.system, trajectory, t)
        assert abs(phi) <= 1e-8
        assert abs(phidot) <= 1e-8


def test_switching_function_derivative(mri_model):
    trajectory = integrate_extremal(mri_model.system, BANG_PLUS, CotangentPoint([-0.3, 0.2], [0.4, 1.0]), 2.0)
    h = 1e-5
    for t in (0.5, 1.0, 1.5):
        phi_next = lift(mri_model.system, "G", trajectory.z(t + h))
        phi_prev = lift(mri_model.system, "G", trajectory.z(t - h))
        assert (phi_next - phi_prev) / (2 * h) == pytest.approx(switching_data(mri_model.system, trajectory, t)[1],
                                                                abs=1e-6)


def test_state_flow_stops_at_event(fedbatch_model):
    sol = flow_state(fedbatch_model.system, 1.0, np.array([5.0, 1.0]), 100.0,
                     stop=lambda x: x[1] - fedbatch_model.params.v_max, direction=1)
    # v' = Q_max under u = 1
    assert sol.t_events[0][0] == pytest.approx(4.5, rel=1e-8)


def test_trajectory_export_columns(mri_model):
    trajectory = exp_map(mri_model.system, BANG_PLUS, 1.0, CotangentPoint([-0.3, 0.2], [0.4, 1.0]), full=True)
    frame = trajectory.to_frame()
    assert list(frame.columns) == TRAJECTORY_COLUMNS
    assert (frame["u"] == 1.0).all()


def test_switching_function_ode(fedbatch_model):
    # with H = 1 the switching function solves phi' = alpha + gamma_u phi
    sys = fedbatch_model.system
    z0 = normalized_lift(sys, np.array([1.0, 1.0]))
    assert hamiltonian_value(sys, z0, 1.0) == pytest.approx(1.0, abs=1e-12)
    trajectory = integrate_extremal(sys, BANG_PLUS, z0, 2.0)
    for t in np.linspace(0.0, 2.0, 9):
        phi, phidot = switching_data(sys, trajectory, t)
        alpha, _ = alpha_beta(sys, trajectory.z(t).x)
        assert phidot == pytest.approx(alpha + gamma_u(sys, trajectory.z(t).x, 1.0) * phi, abs=1e-6)
