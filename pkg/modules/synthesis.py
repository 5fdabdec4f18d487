"""
Forward simulation of declared arc sequences (bang, singular, bridge and constant arcs chained by
state events) along extremals, classification of initial conditions into optimal-path structures
for the fed-batch and MRI models, and grid syntheses with their geometric layers.

Structures are written as space separated arc labels: S (singular), B+ / B- (bang), B+b (bridge),
S0 (zero control on the vertical MRI locus) and T (already in the target).

Author: Prior-Saturation Toolkit developers
Version: 1.0
"""

# Import packages-------------------------------------------
import logging
from dataclasses import dataclass, field
from typing import Callable
import numpy as np
import pandas as pd
from numpy import ndarray, asarray
from numpy.linalg import norm

# Import functions from other scripts-----------------------
from modules.planar_system import PlanarAffineSystem, Tolerances, singular_det
from modules.hamiltonian import (CotangentPoint, ControlLaw, ExtremalTrajectory, BANG_PLUS, BANG_MINUS, SINGULAR,
                                 lift, integrate_extremal, exp_map, flow_state, normalized_lift, singular_control_z,
                                 state_event)
from modules.shooting import PriorLiftProblem, PriorSaturationLift, prior_lift_problem, solve_prior_lift
from modules.switching_geometry import SwitchingCurve, continue_switching_curve, switching_point
from modules.exceptions import (SaturationToolkitError, EventNotFound, SingularInadmissible, ChainBroken, Unclassified,
                                InvalidConfig)
from analysis.models import ControlModel, mri_mirror
from utils.helpers import find_closest_point

# Global variables------------------------------------------
logger = logging.getLogger(__name__)
UNCLASSIFIED = 'Unclassified'
IN_TARGET = 'T'
CHAIN_TOLERANCE = 1e-6
DRIFT_WARNING = 1e-6
SATURATION_MARGIN = 1e-7
GRID_COLUMNS = ['x1_0', 'x2_0', 'structure', 'total_time', 'n_switches']


# Classes -------------------------------------------------
@dataclass(frozen=True)
class ArcSpec:
    """
    One arc of a declared sequence: control law and the state event that ends it
    :param label: str - S, B+, B-, B+b or S0
    :param stop: callable - x -> float, the arc ends at its first zero crossed in the given direction
    :param skip_if: callable - x -> bool, the arc is left out when true at its entry state
    :param bridge_checks: callable - (sys, entry, exit) -> dict of bridge residuals
    """
    label: str
    law: ControlLaw
    stop: Callable[[ndarray], float]
    direction: int = 0
    skip_if: Callable[[ndarray], bool] | None = None
    bridge_checks: Callable[[PlanarAffineSystem, CotangentPoint, CotangentPoint], dict] | None = None

    def mirrored(self, mirror: Callable[[ndarray], ndarray]) -> 'ArcSpec':
        """
        Arc under a discrete symmetry that flips the sign of the control
        """
        label = self.label.translate(str.maketrans('+-', '-+'))
        stop = self.stop
        skip = self.skip_if
        return ArcSpec(label, self.law.mirrored(), lambda x: stop(mirror(x)), self.direction,
                       None if skip is None else (lambda x: skip(mirror(x))), self.bridge_checks)


@dataclass(frozen=True)
class Arc:
    spec: ArcSpec
    trajectory: ExtremalTrajectory
    exit_residual: float
    locus_drift: float = 0.0

    @property
    def label(self) -> str:
        return self.spec.label

    @property
    def duration(self) -> float:
        return self.trajectory.duration

    @property
    def start(self) -> CotangentPoint:
        return self.trajectory.start

    @property
    def end(self) -> CotangentPoint:
        return self.trajectory.end


@dataclass(frozen=True)
class BridgeArc(Arc):
    conditions: dict = field(default_factory=dict)

    def satisfied(self, tol: float = 1e-8) -> bool:
        return all(abs(v) <= tol for v in self.conditions.values())


@dataclass(frozen=True)
class TrajectoryStructure:
    arcs: tuple[Arc, ...]
    start: CotangentPoint

    @property
    def structure(self) -> str:
        return ' '.join(a.label for a in self.arcs) or IN_TARGET

    @property
    def total_time(self) -> float:
        return float(sum(a.duration for a in self.arcs))

    @property
    def terminal(self) -> CotangentPoint:
        return self.arcs[-1].end if self.arcs else self.start

    @property
    def switch_points(self) -> list[ndarray]:
        return [a.end.x for a in self.arcs[:-1]]

    @property
    def n_switches(self) -> int:
        return max(len(self.arcs) - 1, 0)

    def chain_gap(self) -> float:
        gaps = [norm(a.end.x - b.start.x) for a, b in zip(self.arcs[:-1], self.arcs[1:])]
        return float(max(gaps, default=0.0))

    def to_frame(self) -> pd.DataFrame:
        """
        Concatenated arc tables with the time shifted to the start of the structure
        """
        frames, offset = [], 0.0
        for i, arc in enumerate(self.arcs):
            frame = arc.trajectory.to_frame()
            frame['t'] += offset
            frame.insert(0, 'arc', i)
            frame.insert(1, 'label', arc.label)
            frames.append(frame)
            offset += arc.duration
        return pd.concat(frames, ignore_index=True) if frames else pd.DataFrame()


@dataclass
class Plan:
    structure: str
    specs: list[ArcSpec]
    seed: CotangentPoint | None


@dataclass(frozen=True)
class SynthesisContext:
    """
    A model with its prior-saturation lift and, when computed, its switching curve
    """
    model: ControlModel
    problem: PriorLiftProblem
    lift: PriorSaturationLift
    curve: SwitchingCurve | None = None

    @property
    def x_e(self) -> ndarray:
        return self.lift.x_e


@dataclass
class SynthesisDataset:
    frame: pd.DataFrame
    layers: dict[str, pd.DataFrame]
    info: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.frame)


# Simulation -------------------------------------------------
def _saturation_event(sys: PlanarAffineSystem):
    def saturation(t, y):
        return 1 - abs(singular_control_z(sys, CotangentPoint(y[:2], y[2:])))
    saturation.terminal = True
    saturation.direction = -1
    return saturation


def _check_singular_entry(sys: PlanarAffineSystem, z: CotangentPoint, index: int) -> None:
    scale = CHAIN_TOLERANCE * (1 + norm(z.p))
    h_g, h_fg = lift(sys, 'G', z), lift(sys, 'FG', z)
    if abs(h_g) > scale or abs(h_fg) > scale:
        raise ChainBroken(f'Singular arc {index} entered at {z.x} with H_g={h_g:.3e}, H_[f,g]={h_fg:.3e}')


def simulate_structure(sys: PlanarAffineSystem, z0: CotangentPoint, specs: list[ArcSpec],
                       tolerances: Tolerances | None = None) -> TrajectoryStructure:
    """
    Integrates the extremal arc by arc. Each arc runs until its stop event; singular arcs also watch
    |u_s| = 1 and abort when the singular control saturates before or at their exit
    :param sys: PlanarAffineSystem
    :param z0: CotangentPoint - initial state and adjoint
    :param specs: list of ArcSpec - declared sequence
    :param tolerances: Tolerances
    :return: TrajectoryStructure
    """
    if not specs:
        raise InvalidConfig('Arc sequence is empty')
    tol = tolerances or sys.tolerances
    z = z0
    arcs = []
    for i, spec in enumerate(specs):
        if spec.skip_if is not None and spec.skip_if(z.x):
            logger.debug('Arc %d (%s) skipped at %s', i, spec.label, z.x)
            continue
        events = [state_event(spec.stop, spec.direction)]
        if spec.law.is_singular:
            _check_singular_entry(sys, z, i)
            if abs(singular_control_z(sys, z)) >= 1:
                raise SingularInadmissible(f'Singular control already saturated at the entry of arc {i}, x={z.x}')
            events.append(_saturation_event(sys))
        trajectory = integrate_extremal(sys, spec.law, z, tol.horizon, tol, events=events)
        if spec.law.is_singular and len(trajectory.event_times[1]) > 0:
            raise SingularInadmissible(f'Singular control saturates at {trajectory.end.x} before the end of arc {i}')
        if len(trajectory.event_times[0]) == 0:
            raise EventNotFound(f'Arc {i} ({spec.label}) did not reach its stop condition within {tol.horizon}')
        end = trajectory.end
        if spec.law.is_singular and abs(singular_control_z(sys, end)) >= 1 - SATURATION_MARGIN:
            raise SingularInadmissible(f'Singular arc {i} ends on the saturation point {end.x}')
        residual = abs(spec.stop(end.x))
        drift = 0.0
        if spec.law.is_singular:
            drift = float(max(abs(singular_det(sys, y[:2])) for y in trajectory.z_samples))
            if drift > DRIFT_WARNING:
                logger.warning('Singular arc %d drifts off the locus, max |delta_SA| = %.3e', i, drift)
        if spec.bridge_checks is not None:
            arcs.append(BridgeArc(spec, trajectory, residual, drift, spec.bridge_checks(sys, z, end)))
        else:
            arcs.append(Arc(spec, trajectory, residual, drift))
        z = end
    structure = TrajectoryStructure(tuple(arcs), z0)
    logger.debug('Simulated %s from %s in %.6g', structure.structure, z0.x, structure.total_time)
    return structure


# Adjoint seeds ----------------------------------------------
def seed_by_backward_flow(sys: PlanarAffineSystem, x0: ndarray, u: float, stop: Callable[[ndarray], float],
                          direction: int, end_adjoint: Callable[[ndarray], ndarray],
                          tolerances: Tolerances | None = None) -> CotangentPoint:
    """
    Adjoint at x0 for a first bang arc ending where stop vanishes: the state flow finds the end point,
    end_adjoint gives the adjoint there and the Hamiltonian flow carries it back to x0
    """
    tol = tolerances or sys.tolerances
    sol = flow_state(sys, u, x0, tol.horizon, tol, stop=stop, direction=direction)
    if len(sol.t_events[0]) == 0:
        raise EventNotFound(f'First arc from {x0} with u={u:g} never reaches its stop condition')
    duration = float(sol.t_events[0][0])
    x1 = sol.y_events[0][0]
    law = BANG_PLUS if u > 0 else BANG_MINUS
    z0 = exp_map(sys, law, -duration, CotangentPoint(x1, end_adjoint(x1)), tol)
    return CotangentPoint(x0, z0.p)


def _fedbatch_bridge_checks(v_max: float):
    def checks(sys, entry, exit_):
        return {'phi_0': lift(sys, 'G', entry), 'phidot_0': lift(sys, 'FG', entry), 'phi_tb': lift(sys, 'G', exit_),
                'v_tb_minus_v_max': float(exit_.x[1] - v_max)}
    return checks


def _mri_bridge_checks(sys, entry, exit_):
    return {'phi_0': lift(sys, 'G', entry), 'phidot_0': lift(sys, 'FG', entry), 'phi_tb': lift(sys, 'G', exit_),
            'phidot_tb': lift(sys, 'FG', exit_)}


# Fed-batch --------------------------------------------------
def fedbatch_sequence(context: SynthesisContext, structure: str, singular_exit: float | None = None,
                      switch_s: float | None = None) -> list[ArcSpec]:
    """
    Arc specs of a fed-batch structure. A B- arc before S stops on s = s*, before B+ on s = switch_s;
    the final B- stops on s = s_ref. S stops on v = singular_exit (default v_e), B+ and B+b on v = v_max
    """
    p = context.model.params
    v_exit = context.x_e[1] if singular_exit is None else singular_exit
    tokens = structure.split()
    specs = []
    for i, token in enumerate(tokens):
        following = tokens[i + 1] if i + 1 < len(tokens) else None
        if token == 'S':
            specs.append(ArcSpec('S', SINGULAR, lambda x: x[1] - v_exit, 1))
        elif token == 'B+b':
            specs.append(ArcSpec('B+b', BANG_PLUS, lambda x: x[1] - p.v_max, 1,
                                 bridge_checks=_fedbatch_bridge_checks(p.v_max)))
        elif token == 'B+':
            specs.append(ArcSpec('B+', BANG_PLUS, lambda x: x[1] - p.v_max, 1))
        elif token == 'B-' and following is None:
            specs.append(ArcSpec('B-', BANG_MINUS, lambda x: x[0] - p.s_ref, -1, skip_if=lambda x: x[0] <= p.s_ref))
        elif token == 'B-' and following == 'S':
            specs.append(ArcSpec('B-', BANG_MINUS, lambda x: x[0] - p.s_star, -1))
        elif token == 'B-' and following == 'B+':
            if switch_s is None:
                raise InvalidConfig('B- B+ needs the switching point on Sigma')
            specs.append(ArcSpec('B-', BANG_MINUS, lambda x: x[0] - switch_s, -1))
        else:
            raise InvalidConfig(f'Unsupported fed-batch structure {structure!r}')
    return specs


def _switch_on_curve(context: SynthesisContext, x0: ndarray) -> tuple[float, CotangentPoint] | None:
    """
    Point of Sigma at volume x0[1], or None outside the computed portion of the curve
    """
    curve, p = context.curve, context.model.params
    if curve is None:
        return None
    t_b = (p.v_max - x0[1]) / p.Q_max
    if not curve.t_grid[0] <= t_b <= curve.t_grid[-1]:
        return None
    i = find_closest_point(curve.projection().T, (x0[0], x0[1]), aspect_ratio=1e6)
    _, phi = switching_point(context.problem, t_b, curve.sigma_samples[i])
    return t_b, phi


def _plan_fedbatch(context: SynthesisContext, x0: ndarray) -> Plan:
    model = context.model
    sys, p, tol = model.system, model.params, model.tolerances
    s0, v0 = x0
    v_e = context.x_e[1]
    near = tol.event_state * (1 + abs(v_e))
    if model.in_target(x0):
        return Plan(IN_TARGET, [], None)
    if model.in_extended_target(x0):
        return Plan('B-', fedbatch_sequence(context, 'B-'), normalized_lift(sys, x0))
    if v0 > p.v_max:
        # the tank overflows
        return Plan(UNCLASSIFIED, [], None)
    if abs(s0 - p.s_star) <= tol.event_state:
        x0 = np.array([p.s_star, v0])
        if v0 < v_e - near:
            structure = 'S B+b B-'
        elif v0 <= v_e + near:
            structure = 'B+b B-'
        else:
            structure = 'B+ B-'
        return Plan(structure, fedbatch_sequence(context, structure), normalized_lift(sys, x0))
    if s0 < p.s_star:
        if v0 >= v_e:
            return Plan('B+ B-', fedbatch_sequence(context, 'B+ B-'), normalized_lift(sys, x0))
        return Plan(UNCLASSIFIED, [], None)
    if v0 < v_e:
        structure = 'B- S B+b B-'
        seed = seed_by_backward_flow(sys, x0, -1.0, lambda x: x[0] - p.s_star, -1,
                                     lambda x: normalized_lift(sys, x).p)
        return Plan(structure, fedbatch_sequence(context, structure), seed)
    switch = _switch_on_curve(context, x0)
    if switch is None:
        return Plan(UNCLASSIFIED, [], None)
    _, phi = switch
    s_sw = float(phi.x[0])
    if s0 > s_sw:
        structure = 'B- B+ B-'
        seed = seed_by_backward_flow(sys, x0, -1.0, lambda x: x[0] - s_sw, -1, lambda x: phi.p)
        return Plan(structure, fedbatch_sequence(context, structure, switch_s=s_sw), seed)
    return Plan('B+ B-', fedbatch_sequence(context, 'B+ B-'), normalized_lift(sys, x0))


# MRI ------------------------------------------------------------
def mri_sequence(context: SynthesisContext, structure: str, mirrored: bool = False) -> list[ArcSpec]:
    """
    Arc specs of an MRI structure in the half plane x1 <= 0: S stops on x1 = x_e1, the bridge B+b on
    the vertical axis and S0 on x2 = 0. mirrored maps them to the half plane x1 >= 0
    """
    x_e1 = context.x_e[0]
    catalogue = {'S': ArcSpec('S', SINGULAR, lambda x: x[0] - x_e1, 1),
                 'B+b': ArcSpec('B+b', BANG_PLUS, lambda x: x[0], 1, bridge_checks=_mri_bridge_checks),
                 'S0': ArcSpec('S0', ControlLaw.constant(0.0), lambda x: x[1], 1)}
    specs = []
    for token in structure.split():
        if token not in catalogue:
            raise InvalidConfig(f'Unsupported MRI structure {structure!r}')
        specs.append(catalogue[token].mirrored(mri_mirror) if mirrored else catalogue[token])
    return specs


def _plan_mri(context: SynthesisContext, x0: ndarray) -> Plan:
    model = context.model
    tol = model.tolerances
    level = model.params.horizontal_level
    if model.in_target(x0):
        return Plan(IN_TARGET, [], None)
    if abs(x0[1] - level) > tol.event_state or abs(x0[0]) <= tol.event_state:
        return Plan(UNCLASSIFIED, [], None)
    mirrored = x0[0] > 0
    x1 = -x0[0] if mirrored else x0[0]
    x_e1 = context.x_e[0]
    if x1 < x_e1 - tol.event_state:
        structure = 'S B+b S0'
    elif x1 <= x_e1 + tol.event_state:
        structure = 'B+b S0'
    else:
        return Plan(UNCLASSIFIED, [], None)
    x0 = np.array([x0[0], level])
    specs = mri_sequence(context, structure, mirrored)
    return Plan(' '.join(s.label for s in specs), specs, normalized_lift(model.system, x0))


# Classification ---------------------------------------------------
def prepare_synthesis(model: ControlModel, guess: str = 'scan', with_curve: bool = True) -> SynthesisContext:
    """
    Computes the prior-saturation lift of the model and, optionally, its switching curve
    """
    problem = prior_lift_problem(model)
    lift_ = solve_prior_lift(problem, guess)
    curve = continue_switching_curve(problem, lift_) if with_curve else None
    return SynthesisContext(model, problem, lift_, curve)


def plan_trajectory(context: SynthesisContext, x0: ndarray) -> Plan:
    x0 = asarray(x0, dtype=float)
    context.model.system.check_domain(x0)
    if context.model.name == 'fedbatch':
        return _plan_fedbatch(context, x0)
    if context.model.name == 'mri':
        return _plan_mri(context, x0)
    raise InvalidConfig(f'No synthesis for model {context.model.name!r}')


def classify_initial_condition(context: SynthesisContext, x0: ndarray, verify: bool = False,
                               strict: bool = False) -> str:
    """
    Structure of the optimal path from x0 following the case split of the model's synthesis
    :param context: SynthesisContext - model with its lift (and curve for fed-batch starts off the locus)
    :param x0: array - initial state
    :param verify: bool - simulate the structure and require that it reaches the target
    :param strict: bool - raise Unclassified instead of returning 'Unclassified'
    :return: str
    """
    plan = plan_trajectory(context, x0)
    if plan.structure != UNCLASSIFIED and verify and plan.specs:
        result = simulate_structure(context.model.system, plan.seed, plan.specs)
        if not context.model.in_target(result.terminal.x):
            logger.warning('%s from %s ends at %s outside the target', plan.structure, x0, result.terminal.x)
            plan = Plan(UNCLASSIFIED, [], None)
    if plan.structure == UNCLASSIFIED and strict:
        raise Unclassified(f'No structure described for x0={x0} in the {context.model.name} synthesis')
    return plan.structure


def simulate_initial_condition(context: SynthesisContext, x0: ndarray) -> tuple[str, TrajectoryStructure | None]:
    plan = plan_trajectory(context, x0)
    if not plan.specs:
        return plan.structure, None
    return plan.structure, simulate_structure(context.model.system, plan.seed, plan.specs)


# Grid synthesis -------------------------------------------------
def _node_row(context: SynthesisContext, x0: ndarray) -> dict:
    row = {'x1_0': float(x0[0]), 'x2_0': float(x0[1]), 'structure': UNCLASSIFIED, 'total_time': np.nan,
           'n_switches': 0, 'reached_target': False, 'error': ''}
    try:
        structure, result = simulate_initial_condition(context, x0)
    except SaturationToolkitError as e:
        row['error'] = f'{type(e).__name__}: {e}'
        return row
    row['structure'] = structure
    if result is None:
        row['total_time'] = 0.0 if structure == IN_TARGET else np.nan
        row['reached_target'] = structure == IN_TARGET
        return row
    row['total_time'] = result.total_time
    row['n_switches'] = result.n_switches
    row['reached_target'] = context.model.in_target(result.terminal.x)
    for k, point in enumerate(result.switch_points, start=1):
        row[f'switch_{k}_x1'] = float(point[0])
        row[f'switch_{k}_x2'] = float(point[1])
    return row


def synthesis_layers(context: SynthesisContext, n_locus: int = 101) -> dict[str, pd.DataFrame]:
    """
    Locus samples, the bridge, the switching curve and the marked points of the synthesis
    """
    model, lift_ = context.model, context.lift
    taus, points = model.locus().samples(n_locus)
    layers = {'locus': pd.DataFrame({'tau': taus, 'x1': points[:, 0], 'x2': points[:, 1]})}
    bridge = exp_map(model.system, context.problem.bang_law, lift_.t_b_star, lift_.z_e, full=True)
    layers['bridge'] = bridge.to_frame()
    if context.curve is not None:
        layers['switching_curve'] = context.curve.to_frame()
    marked = [('prior_saturation', *lift_.x_e), ('bridge_end', *lift_.z_b_star.x)]
    try:
        marked.insert(0, ('saturation', *model.saturation_point()))
    except SaturationToolkitError as e:
        logger.warning('No saturation point for the points layer: %s', e)
    layers['points'] = pd.DataFrame(marked, columns=['name', 'x1', 'x2'])
    return layers


def synthesize_grid(context: SynthesisContext, grid: tuple[int, int],
                    sink: Callable[[str, pd.DataFrame], None] | None = None) -> SynthesisDataset:
    """
    Classifies and simulates every node of the model's synthesis grid. Per-node failures are kept in
    the error column
    :param context: SynthesisContext
    :param grid: tuple - (n1, n2) nodes along each state axis
    :param sink: callable - receives (name, frame) for the grid and each layer
    :return: SynthesisDataset
    """
    nodes, on_locus = context.model.synthesis_nodes(*grid)
    rows = [_node_row(context, x0) for x0 in nodes]
    frame = pd.DataFrame(rows)
    switch_columns = sorted((c for c in frame.columns if c.startswith('switch_')),
                            key=lambda c: (int(c.split('_')[1]), c))
    frame = frame[GRID_COLUMNS + switch_columns + ['reached_target', 'error']]
    frame.insert(2, 'on_locus', on_locus)
    layers = synthesis_layers(context)
    info = {'model': context.model.name, 'grid': list(grid), 'n_nodes': len(frame),
            'n_classified': int((frame['structure'] != UNCLASSIFIED).sum()),
            'n_errors': int((frame['error'] != '').sum())}
    logger.info('Synthesis of %s: %d nodes, %d classified, %d errors', info['model'], info['n_nodes'],
                info['n_classified'], info['n_errors'])
    if sink is not None:
        sink('synthesis', frame)
        for name, layer in layers.items():
            sink(name, layer)
    return SynthesisDataset(frame, layers, info)


# Testing-----------------------------------------------------
if __name__ == '__main__':
    from analysis.models import build_model
    logging.basicConfig(level=logging.INFO)
    ctx = prepare_synthesis(build_model('mri'), with_curve=False)
    print(classify_initial_condition(ctx, np.array([-0.5, ctx.model.params.horizontal_level]), verify=True))
