import numpy as np
import pytest

from modules.exceptions import InvalidConfig, ChainBroken, SingularInadmissible, EventNotFound, Unclassified
from modules.hamiltonian import CotangentPoint, ControlLaw, SINGULAR, normalized_lift
from modules.planar_system import Tolerances
from modules.synthesis import (UNCLASSIFIED, IN_TARGET, ArcSpec, SynthesisContext, BridgeArc, simulate_structure,
                               fedbatch_sequence, mri_sequence, classify_initial_condition, simulate_initial_condition,
                               synthesize_grid)


@pytest.fixture(scope="module")
def mri_context(mri_model, mri_problem, mri_lift):
    return SynthesisContext(mri_model, mri_problem, mri_lift)


@pytest.fixture(scope="module")
def fedbatch_context(fedbatch_model, fedbatch_problem, fedbatch_lift, fedbatch_curve):
    return SynthesisContext(fedbatch_model, fedbatch_problem, fedbatch_lift, fedbatch_curve)


def test_empty_sequence(mri_model):
    with pytest.raises(InvalidConfig):
        simulate_structure(mri_model.system, CotangentPoint([-0.5, 0.0], [0.0, 1.0]), [])


def test_singular_arc_needs_a_singular_entry(mri_model):
    spec = ArcSpec("S", SINGULAR, lambda x: x[0], 1)
    with pytest.raises(ChainBroken):
        simulate_structure(mri_model.system, CotangentPoint([-0.5, -0.125], [1.0, 1.0]), [spec])


def test_saturated_singular_entry(mri_model):
    z0 = normalized_lift(mri_model.system, np.array([-0.05, mri_model.params.horizontal_level]))
    with pytest.raises(SingularInadmissible):
        simulate_structure(mri_model.system, z0, [ArcSpec("S", SINGULAR, lambda x: x[0], 1)])


def test_stop_condition_not_reached(mri_model):
    spec = ArcSpec("S0", ControlLaw.constant(0.0), lambda x: x[0] - 5.0, 0)
    with pytest.raises(EventNotFound):
        simulate_structure(mri_model.system, CotangentPoint([-0.5, 0.0], [0.0, 1.0]), [spec],
                           Tolerances(horizon=5.0))


def test_mirrored_sequence_labels(mri_context):
    assert [s.label for s in mri_sequence(mri_context, "S B+b S0", mirrored=True)] == ["S", "B-b", "S0"]
    with pytest.raises(InvalidConfig):
        mri_sequence(mri_context, "S B-")


def test_mri_start_at_prior_saturation_point(mri_model, mri_context):
    structure, result = simulate_initial_condition(mri_context, mri_context.x_e)
    assert structure == "B+b S0"
    assert mri_model.in_target(result.terminal.x)
    bridge = result.arcs[0]
    assert isinstance(bridge, BridgeArc)
    assert bridge.satisfied(1e-7)


def test_mri_singular_prefix(mri_model, mri_context):
    level = mri_model.params.horizontal_level
    x0 = np.array([0.5 * (mri_context.x_e[0] - 0.99 * np.sqrt(1 - level ** 2)), level])
    structure, result = simulate_initial_condition(mri_context, x0)
    assert structure == "S B+b S0"
    assert mri_model.in_target(result.terminal.x)
    assert np.allclose(result.switch_points[0], mri_context.x_e, atol=1e-6)
    assert result.chain_gap() == 0.0


def test_mri_mirrored_start(mri_model, mri_context):
    x0 = np.array([-mri_context.x_e[0], mri_model.params.horizontal_level])
    assert classify_initial_condition(mri_context, x0, verify=True) == "B-b S0"


def test_mri_unclassified_and_target(mri_context):
    assert classify_initial_condition(mri_context, np.array([-0.3, 0.4])) == UNCLASSIFIED
    assert classify_initial_condition(mri_context, np.zeros(2)) == IN_TARGET
    with pytest.raises(Unclassified):
        classify_initial_condition(mri_context, np.array([-0.3, 0.4]), strict=True)


def test_fedbatch_sequence_needs_the_switch(fedbatch_context):
    with pytest.raises(InvalidConfig):
        fedbatch_sequence(fedbatch_context, "B- B+ B-")
    with pytest.raises(InvalidConfig):
        fedbatch_sequence(fedbatch_context, "S S0")


@pytest.mark.parametrize("scale, shift, expected", [(0.5, 0.0, "S B+b B-"), (1.0, 0.0, "B+b B-"), (1.0, 0.5, "B+ B-")])
def test_fedbatch_classification_on_the_locus(fedbatch_model, fedbatch_context, scale, shift, expected):
    x0 = np.array([fedbatch_model.params.s_star, scale * fedbatch_context.x_e[1] + shift])
    assert classify_initial_condition(fedbatch_context, x0, verify=True) == expected


def test_fedbatch_switch_off_point_is_shared(fedbatch_model, fedbatch_context):
    v_e = fedbatch_context.x_e[1]
    for v0 in (0.3 * v_e, 0.6 * v_e):
        _, result = simulate_initial_condition(fedbatch_context, np.array([fedbatch_model.params.s_star, v0]))
        assert np.allclose(result.switch_points[0], [fedbatch_model.params.s_star, v_e], atol=1e-6)
        assert fedbatch_model.in_target(result.terminal.x)


def test_fedbatch_classification_off_the_locus(fedbatch_model, fedbatch_context):
    v_e = fedbatch_context.x_e[1]
    assert classify_initial_condition(fedbatch_context, np.array([0.5, v_e + 1.0])) == "B+ B-"
    assert classify_initial_condition(fedbatch_context, np.array([0.5, 0.5 * v_e])) == UNCLASSIFIED
    structure, result = simulate_initial_condition(fedbatch_context, np.array([5.0, 0.5 * v_e]))
    assert structure == "B- S B+b B-"
    assert fedbatch_model.in_target(result.terminal.x)


def test_fedbatch_terminal_volume(fedbatch_model, fedbatch_context):
    v_max = fedbatch_model.params.v_max
    assert classify_initial_condition(fedbatch_context, np.array([0.05, v_max])) == IN_TARGET
    structure, result = simulate_initial_condition(fedbatch_context, np.array([5.0, v_max]))
    assert structure == "B-"
    assert fedbatch_model.in_target(result.terminal.x)
    assert fedbatch_model.in_extended_target(np.array([5.0, v_max]))
    assert classify_initial_condition(fedbatch_context, np.array([5.0, v_max + 0.5])) == UNCLASSIFIED


@pytest.mark.slow
def test_fedbatch_switch_on_the_curve(fedbatch_model, fedbatch_context):
    curve = fedbatch_context.curve
    v0 = fedbatch_context.x_e[1] + 0.2 * curve.eps * fedbatch_model.params.Q_max
    assert classify_initial_condition(fedbatch_context, np.array([9.0, v0]), verify=True) == "B- B+ B-"


def test_mri_grid_synthesis(mri_context):
    received = []
    dataset = synthesize_grid(mri_context, (3, 3), sink=lambda name, frame: received.append(name))
    frame = dataset.frame
    assert received[0] == "synthesis"
    assert {"locus", "bridge", "points"} <= set(received)
    assert len(frame) == dataset.info["n_nodes"]
    assert int(frame["on_locus"].sum()) == 3
    assert set(frame.columns) >= {"x1_0", "x2_0", "on_locus", "structure", "total_time", "reached_target", "error"}
    classified = frame[frame["structure"] != UNCLASSIFIED]
    assert dataset.info["n_classified"] == len(classified)


@pytest.mark.slow
@pytest.mark.parametrize("depth", [0.25, 0.5, 0.75, 0.95])
def test_leaving_the_locus_later_is_slower(fedbatch_model, fedbatch_context, depth):
    p = fedbatch_model.params
    v_e = fedbatch_context.x_e[1]
    x0 = np.array([p.s_star, 0.3 * v_e])
    _, optimal = simulate_initial_condition(fedbatch_context, x0)
    late_exit = v_e + depth * (p.v_star - v_e)
    specs = fedbatch_sequence(fedbatch_context, "S B+ B-", singular_exit=late_exit)
    late = simulate_structure(fedbatch_model.system, normalized_lift(fedbatch_model.system, x0), specs)
    assert fedbatch_model.in_target(late.terminal.x)
    assert late.total_time >= optimal.total_time * (1 - 1e-9)


def test_singular_arc_cannot_pass_the_saturation_point(fedbatch_model, fedbatch_context):
    p = fedbatch_model.params
    x0 = np.array([p.s_star, 0.3 * fedbatch_context.x_e[1]])
    specs = fedbatch_sequence(fedbatch_context, "S B+ B-", singular_exit=p.v_star + 0.05)
    with pytest.raises(SingularInadmissible):
        simulate_structure(fedbatch_model.system, normalized_lift(fedbatch_model.system, x0), specs)


@pytest.mark.parametrize("offset, expected", [(-1e-4, "S B+b B-"), (1e-4, "B+ B-")])
def test_fedbatch_classification_flips_at_the_prior_saturation_volume(fedbatch_model, fedbatch_context, offset,
                                                                       expected):
    x0 = np.array([fedbatch_model.params.s_star, fedbatch_context.x_e[1] + offset])
    assert classify_initial_condition(fedbatch_context, x0, verify=True) == expected


def test_singular_arc_ending_on_the_saturation_point(fedbatch_model, fedbatch_context):
    p = fedbatch_model.params
    x0 = np.array([p.s_star, 0.3 * fedbatch_context.x_e[1]])
    specs = fedbatch_sequence(fedbatch_context, "S B+ B-", singular_exit=p.v_star)
    with pytest.raises(SingularInadmissible):
        simulate_structure(fedbatch_model.system, normalized_lift(fedbatch_model.system, x0), specs)
