"""
Shooting equations and their solution. Holds the damped Newton solver, the bang-singular-bang
shooting function, the prior-saturation lift residual F = (H_[f,g] o back-flow, H_g o back-flow,
H_+ + p0, Psi) with its fed-batch and MRI instances, the deterministic seed strategies and the
assumption certificates of a computed lift.

Author: Prior-Saturation Toolkit developers
Version: 1.0
"""

# Import packages-------------------------------------------
import logging
import dataclasses
from dataclasses import dataclass, field
from typing import Callable
import numpy as np
from numpy import ndarray, asarray
from numpy.linalg import norm, cond, solve
from scipy.optimize import brentq

# Import functions from other scripts-----------------------
from modules.planar_system import PlanarAffineSystem, Tolerances
from modules.hamiltonian import (CotangentPoint, ControlLaw, BANG_PLUS, BANG_MINUS, SINGULAR, P0, lift, lifts,
                                 exp_map, integrate_extremal, normalized_lift, singular_control_z)
from modules.exceptions import (SaturationToolkitError, MaxIterations, LineSearchStall, SingularJacobian,
                                InvalidConfig, LegendreDegenerate, EventNotFound)
from analysis.models import ControlModel, FedBatchParams, MriParams, fedbatch_system, mri_system
from utils.helpers import forward_jacobian, central_jacobian_scaled, to_builtin

# Global variables------------------------------------------
logger = logging.getLogger(__name__)
BSB_DIM = 13
SCAN_POINTS = 24


# Classes -------------------------------------------------
@dataclass(frozen=True)
class ResidualSystem:
    """
    Square nonlinear system F(y) = 0
    """
    dim: int
    func: Callable[[ndarray], ndarray]
    label: str
    unknowns: tuple[str, ...] = ()

    def __call__(self, y: ndarray) -> ndarray:
        r = asarray(self.func(asarray(y, dtype=float)), dtype=float)
        if r.shape != (self.dim,):
            raise ValueError(f'{self.label} returned shape {r.shape}, expected ({self.dim},)')
        return r


@dataclass(frozen=True)
class ShootingSolution:
    y: ndarray
    residual_norm: float
    jac_condition: float
    iterations: int
    converged: bool
    label: str = ''
    jacobian: ndarray | None = None
    history: tuple[float, ...] = ()

    def as_dict(self) -> dict:
        return to_builtin({'label': self.label, 'y': self.y, 'residual_norm': self.residual_norm,
                           'jac_condition': self.jac_condition, 'iterations': self.iterations,
                           'converged': self.converged})


@dataclass(frozen=True)
class AssumptionReport:
    h_gfg_at_ze: float
    h_ffg_at_ze: float
    us_at_ze: float
    a: float
    G_block_condition: float
    F_jacobian_condition: float
    F_first_column: ndarray
    verdict_a2: bool
    verdict_a3: bool
    notes: tuple[str, ...] = ()

    def as_dict(self) -> dict:
        return to_builtin(dataclasses.asdict(self))


@dataclass(frozen=True)
class PriorSaturationLift:
    z_e: CotangentPoint
    t_b_star: float
    z_b_star: CotangentPoint
    lam: ndarray
    solution: ShootingSolution
    certificate: AssumptionReport | None = None
    label: str = ''

    @property
    def x_e(self) -> ndarray:
        return self.z_e.x

    def as_dict(self) -> dict:
        return to_builtin({'label': self.label, 'y': self.solution.y,
                           'residual_norm': self.solution.residual_norm,
                           'jac_condition': self.solution.jac_condition,
                           'iterations': self.solution.iterations,
                           'z_e': self.z_e.as_dict(), 't_b': self.t_b_star, 'z_b': self.z_b_star.as_dict(),
                           'lambda': self.lam,
                           'assumption_report': None if self.certificate is None else self.certificate.as_dict()})


@dataclass(frozen=True)
class PriorLiftProblem:
    """
    Unknowns y = (t_b, z_b, lambda) of dimension 5 + k. psi(z_b, lambda) returns 2 + k constraints
    """
    system: PlanarAffineSystem
    psi: Callable[[CotangentPoint, ndarray], ndarray]
    k: int = 0
    bang_sign: int = 1
    label: str = 'F_generic(0)'
    guesses: dict[str, Callable[[], ndarray]] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.bang_sign not in (1, -1):
            raise InvalidConfig(f'bang_sign must be +1 or -1, got {self.bang_sign}')

    @property
    def dim(self) -> int:
        return 5 + self.k

    @property
    def bang_law(self) -> ControlLaw:
        return BANG_PLUS if self.bang_sign == 1 else BANG_MINUS

    def unpack(self, y: ndarray) -> tuple[float, CotangentPoint, ndarray]:
        y = asarray(y, dtype=float)
        return float(y[0]), CotangentPoint.from_vector(y[1:5]), y[5:]

    @staticmethod
    def pack(t_b: float, z_b: CotangentPoint, lam: ndarray = ()) -> ndarray:
        return np.concatenate([[t_b], z_b.as_vector(), asarray(lam, dtype=float)])

    def back_flow(self, t_b: float, z_b: CotangentPoint, tolerances: Tolerances | None = None) -> CotangentPoint:
        return exp_map(self.system, self.bang_law, -t_b, z_b, tolerances)

    def residual(self, y: ndarray, tolerances: Tolerances | None = None) -> ndarray:
        t_b, z_b, lam = self.unpack(y)
        return residual_prior_lift(self.system, self.psi, t_b, z_b, lam, self.bang_sign, tolerances)

    def g_block(self, t_b: float, w: ndarray, tolerances: Tolerances | None = None) -> ndarray:
        """
        G(t_b, z_b, lambda): every block of F except the first, at fixed bridge length
        """
        return self.residual(np.concatenate([[t_b], w]), tolerances)[1:]

    def residual_system(self, tolerances: Tolerances | None = None) -> ResidualSystem:
        names = ('t_b', 'x1_b', 'x2_b', 'p1_b', 'p2_b') + tuple(f'lambda_{i}' for i in range(self.k))
        return ResidualSystem(self.dim, lambda y: self.residual(y, tolerances), self.label, names)


# Newton ----------------------------------------------------
def newton_solve(F: ResidualSystem, y0: ndarray, tolerances: Tolerances | None = None,
                 armijo: float = 1e-4, max_halvings: int = 30, final_jacobian: bool = True) -> ShootingSolution:
    """
    Damped Newton method with forward-difference Jacobian and Armijo backtracking on |F|^2 / 2.
    A trial point where F cannot be evaluated counts as a failed backtracking step
    :param F: ResidualSystem
    :param y0: array - initial guess
    :param tolerances: Tolerances - newton_tol, newton_max_iter and max_condition are used
    :param armijo: float - sufficient decrease constant
    :param max_halvings: int - backtracking steps before LineSearchStall
    :param final_jacobian: bool - recompute the Jacobian at the solution for the condition estimate
    :return: ShootingSolution
    """
    tol = tolerances or Tolerances()
    y = asarray(y0, dtype=float).copy()
    r = F(y)
    history = [float(norm(r, np.inf))]
    jac = None
    condition = float('nan')
    for iteration in range(tol.newton_max_iter + 1):
        if history[-1] <= tol.newton_tol:
            if final_jacobian and F.dim > 0:
                jac = forward_jacobian(F, y, r)
                condition = float(cond(jac))
            logger.info('%s converged in %d iterations, |F|=%.3e, cond=%.3e', F.label, iteration, history[-1],
                        condition)
            return ShootingSolution(y, history[-1], condition, iteration, True, F.label, jac, tuple(history))
        if iteration == tol.newton_max_iter:
            break
        jac = forward_jacobian(F, y, r)
        condition = float(cond(jac))
        if not np.isfinite(condition) or condition > tol.max_condition:
            raise SingularJacobian(f'{F.label}: Jacobian condition {condition:.3e} at iteration {iteration}')
        step = solve(jac, -r)
        merit = 0.5 * float(r @ r)
        lam = 1.0
        for _ in range(max_halvings):
            trial = y + lam * step
            try:
                r_trial = F(trial)
            except SaturationToolkitError as e:
                logger.debug('%s: trial step %.3e rejected (%s)', F.label, lam, e)
                lam /= 2
                continue
            if np.all(np.isfinite(r_trial)) and 0.5 * float(r_trial @ r_trial) <= (1 - 2 * armijo * lam) * merit:
                break
            lam /= 2
        else:
            raise LineSearchStall(f'{F.label}: no sufficient decrease at iteration {iteration}, |F|={history[-1]:.3e}')
        y, r = trial, r_trial
        history.append(float(norm(r, np.inf)))
        logger.debug('%s iteration %d: |F|=%.3e, step=%.3e, cond=%.3e', F.label, iteration + 1, history[-1], lam,
                     condition)
    raise MaxIterations(f'{F.label}: {tol.newton_max_iter} iterations without convergence, |F|={history[-1]:.3e}')


# Bang-singular-bang shooting --------------------------------
def pack_bsb(p0: ndarray, t1: float, t2: float, tf: float, z1: CotangentPoint, z2: CotangentPoint) -> ndarray:
    return np.concatenate([asarray(p0, dtype=float), [t1, t2, tf], z1.as_vector(), z2.as_vector()])


def split_bsb(y: ndarray) -> dict:
    y = asarray(y, dtype=float)
    if y.shape != (BSB_DIM,):
        raise ValueError(f'Bang-singular-bang unknowns have dimension {BSB_DIM}, got {y.shape}')
    return {'p0': y[:2], 't1': float(y[2]), 't2': float(y[3]), 'tf': float(y[4]),
            'z1': CotangentPoint.from_vector(y[5:9]), 'z2': CotangentPoint.from_vector(y[9:13])}


def bsb_order_violations(y: ndarray) -> list[str]:
    u = split_bsb(y)
    out = []
    if u['t1'] < 0:
        out.append('t1 < 0')
    if u['t2'] < u['t1']:
        out.append('t2 < t1')
    if u['tf'] < u['t2']:
        out.append('tf < t2')
    return out


def residual_bsb(sys: PlanarAffineSystem, x0: ndarray, xf: ndarray, y: ndarray,
                 tolerances: Tolerances | None = None, hamiltonian_block: str = 'final') -> ndarray:
    """
    Shooting function of the structure sigma_- sigma_s sigma_+ steering x0 to xf. Unknowns
    y = (p0, t1, t2, tf, z1, z2); blocks H_g(z1), H_[f,g](z1), H_+(z_f) + p0, x(z_f) - xf,
    z1 - exp(t1 H_-)(x0, p0), z2 - exp((t2 - t1) H_s)(z1) with z_f = exp((tf - t2) H_+)(z2).
    With hamiltonian_block='initial' the third block is H_-(x0, p0) + p0 instead
    :return: array of shape (13,)
    """
    u = split_bsb(y)
    violations = bsb_order_violations(y)
    if violations:
        logger.debug('Bang-singular-bang unknowns out of order: %s', ', '.join(violations))
    z0 = CotangentPoint(x0, u['p0'])
    z_f = exp_map(sys, BANG_PLUS, u['tf'] - u['t2'], u['z2'], tolerances)
    if hamiltonian_block == 'final':
        h_block = lift(sys, 'Plus', z_f) + P0
    elif hamiltonian_block == 'initial':
        h_block = lift(sys, 'Minus', z0) + P0
    else:
        raise ValueError(f"hamiltonian_block must be 'final' or 'initial', got {hamiltonian_block!r}")
    z1_flow = exp_map(sys, BANG_MINUS, u['t1'], z0, tolerances)
    z2_flow = exp_map(sys, SINGULAR, u['t2'] - u['t1'], u['z1'], tolerances)
    return np.concatenate([[lift(sys, 'G', u['z1']), lift(sys, 'FG', u['z1']), h_block],
                           z_f.x - asarray(xf, dtype=float),
                           u['z1'].as_vector() - z1_flow.as_vector(),
                           u['z2'].as_vector() - z2_flow.as_vector()])


def bsb_residual_system(sys: PlanarAffineSystem, x0: ndarray, xf: ndarray, tolerances: Tolerances | None = None,
                        hamiltonian_block: str = 'final') -> ResidualSystem:
    names = ('p0_1', 'p0_2', 't1', 't2', 'tf', 'x1_1', 'x2_1', 'p1_1', 'p2_1', 'x1_2', 'x2_2', 'p1_2', 'p2_2')
    return ResidualSystem(BSB_DIM, lambda y: residual_bsb(sys, x0, xf, y, tolerances, hamiltonian_block),
                          'S_bsb', names)


# Prior-saturation lift residuals ------------------------------
def residual_prior_lift(sys: PlanarAffineSystem, psi: Callable[[CotangentPoint, ndarray], ndarray], t_b: float,
                        z_b: CotangentPoint, lam: ndarray = (), bang_sign: int = 1,
                        tolerances: Tolerances | None = None) -> ndarray:
    """
    F(t_b, z_b, lambda) = (H_[f,g](z_e), H_g(z_e), H_bang(z_b) + p0, Psi(z_b, lambda)) with
    z_e = exp(-t_b H_bang)(z_b) and H_bang = H_+ (bang_sign=+1) or H_- (bang_sign=-1)
    :return: array of shape (5 + k,)
    """
    law = BANG_PLUS if bang_sign == 1 else BANG_MINUS
    z_e = exp_map(sys, law, -t_b, z_b, tolerances)
    h_e = lifts(sys, z_e)
    h_bang = lift(sys, 'Plus' if bang_sign == 1 else 'Minus', z_b)
    return np.concatenate([[h_e['FG'], h_e['G'], h_bang + P0], asarray(psi(z_b, asarray(lam, dtype=float)),
                                                                       dtype=float)])


def point_target_constraint(xf: ndarray) -> Callable[[CotangentPoint, ndarray], ndarray]:
    """
    Psi(z_b) = x_b - xf, k = 0
    """
    xf = asarray(xf, dtype=float)
    return lambda z_b, lam: z_b.x - xf


def fedbatch_bridge_constraint(sys: PlanarAffineSystem, params: FedBatchParams):
    """
    Psi(z_b) = (H_g(z_b), v_b - v_max)
    """
    return lambda z_b, lam: np.array([lift(sys, 'G', z_b), z_b.x[1] - params.v_max])


def mri_bridge_constraint(sys: PlanarAffineSystem):
    """
    Psi(z_b) = (H_[f,g](z_b), H_g(z_b))
    """
    return lambda z_b, lam: np.array([lift(sys, 'FG', z_b), lift(sys, 'G', z_b)])


def make_last_switch_constraint(sys: PlanarAffineSystem, xf: ndarray, tolerances: Tolerances | None = None):
    """
    k = 1 constraint of the structure sigma_- sigma_s sigma_+ sigma_-: lambda is the duration of the last
    bang arc, Psi(z_b, lambda) = (x(exp(lambda H_-)(z_b)) - xf, H_g(z_b))
    """
    xf = asarray(xf, dtype=float)

    def psi(z_b, lam):
        z_f = exp_map(sys, BANG_MINUS, float(lam[0]), z_b, tolerances)
        return np.concatenate([z_f.x - xf, [lift(sys, 'G', z_b)]])
    return psi


def last_switch_problem(sys: PlanarAffineSystem, xf: ndarray, tolerances: Tolerances | None = None) \
        -> PriorLiftProblem:
    return PriorLiftProblem(sys, make_last_switch_constraint(sys, xf, tolerances), k=1, label='F_generic(1)')


def residual_F_bio(params: FedBatchParams, t_b: float, z_b: CotangentPoint,
                   tolerances: Tolerances | None = None) -> ndarray:
    sys = fedbatch_system(params, tolerances=tolerances)
    return residual_prior_lift(sys, fedbatch_bridge_constraint(sys, params), t_b, z_b, tolerances=tolerances)


def residual_F_mri(params: MriParams, t_b: float, z_b: CotangentPoint, tolerances: Tolerances | None = None) \
        -> ndarray:
    sys = mri_system(params, tolerances=tolerances)
    return residual_prior_lift(sys, mri_bridge_constraint(sys), t_b, z_b, tolerances=tolerances)


# Seed strategies -------------------------------------------
def _scan_root(residual: Callable[[float], float], grid: ndarray) -> float | None:
    """
    Brent root of residual on the first sign change along grid (in the given order)
    """
    values = []
    for tau in grid:
        try:
            values.append(residual(tau))
        except SaturationToolkitError as e:
            logger.debug('Seed scan skipped %.6g: %s', tau, e)
            values.append(np.nan)
    brackets = [(grid[i], grid[i + 1]) for i in range(len(grid) - 1)
                if np.isfinite(values[i]) and np.isfinite(values[i + 1]) and values[i] * values[i + 1] <= 0]
    if not brackets:
        return None
    if len(brackets) > 1:
        logger.info('Seed scan found %d sign changes, keeping the first', len(brackets))
    lo, hi = sorted(brackets[0])
    return float(brentq(residual, lo, hi, xtol=1e-14, rtol=4 * np.finfo(float).eps))


def _fedbatch_seed(model: ControlModel, v0: float) -> tuple[float, CotangentPoint]:
    p = model.params
    z0 = normalized_lift(model.system, np.array([p.s_star, v0]))
    t_b = (p.v_max - v0) / p.Q_max
    return t_b, exp_map(model.system, BANG_PLUS, t_b, z0)


def fedbatch_lift_guess(model: ControlModel, strategy: str = 'scan') -> ndarray:
    """
    Seeds on the locus point (s*, v0): adjoint with H_g = 0 and H_f = 1, bridge length (v_max - v0) / Q_max.
    'midpoint' uses v0 = v*/2; 'scan' chooses v0 in (0, v*) making H_g vanish at the bridge end
    """
    p = model.params
    v0 = p.v_star / 2
    if strategy == 'scan':
        grid = np.linspace(0.995 * p.v_star, 0.05 * p.v_star, SCAN_POINTS)
        root = _scan_root(lambda v: lift(model.system, 'G', _fedbatch_seed(model, v)[1]), grid)
        if root is None:
            logger.warning('Fed-batch seed scan found no sign change, using the midpoint guess')
        else:
            v0 = root
    elif strategy != 'midpoint':
        raise InvalidConfig(f'Unknown guess strategy {strategy!r}')
    t_b, z_b = _fedbatch_seed(model, v0)
    return PriorLiftProblem.pack(t_b, z_b)


def _mri_seed(model: ControlModel, x2b: float) -> tuple[float, CotangentPoint, CotangentPoint]:
    """
    Bridge end on the vertical axis with H_g = H_[f,g] = 0 and H_+ = 1, flowed backward under H_+ until
    it meets the horizontal singular line
    """
    par = model.params
    level = par.horizontal_level
    z_b = CotangentPoint([0.0, x2b], [0.0, 1 / (par.gamma * (1 - x2b))])

    def on_line(t, y):
        return y[1] - level
    on_line.terminal = True
    on_line.direction = -1
    trajectory = integrate_extremal(model.system, BANG_PLUS, z_b, -model.tolerances.horizon, events=[on_line],
                                    dense=False)
    if len(trajectory.event_times[0]) == 0:
        raise EventNotFound(f'Backward bridge from x2={x2b:.6g} never meets the horizontal locus')
    return -float(trajectory.event_times[0][0]), z_b, trajectory.end


def mri_lift_guess(model: ControlModel, strategy: str = 'scan') -> ndarray:
    """
    Seeds on the vertical axis point (0, x2b) with x2b between gamma/(2 delta) and 0. 'midpoint' uses
    x2b = gamma/(4 delta); 'scan' chooses x2b making H_g vanish where the backward bridge meets the
    horizontal line
    """
    level = model.params.horizontal_level
    x2b = level / 2
    if strategy == 'scan':
        grid = np.linspace(0.995 * level, 0.005 * level, SCAN_POINTS)
        root = _scan_root(lambda x2: lift(model.system, 'G', _mri_seed(model, x2)[2]), grid)
        if root is None:
            logger.warning('MRI seed scan found no sign change, using the midpoint guess')
        else:
            x2b = root
    elif strategy != 'midpoint':
        raise InvalidConfig(f'Unknown guess strategy {strategy!r}')
    try:
        t_b, z_b, _ = _mri_seed(model, x2b)
    except SaturationToolkitError:
        t_b, z_b = 1.0, CotangentPoint([0.0, x2b], [0.0, 1 / (model.params.gamma * (1 - x2b))])
    return PriorLiftProblem.pack(t_b, z_b)


def prior_lift_problem(model: ControlModel) -> PriorLiftProblem:
    """
    F_bio for the fed-batch model, F_mri for the MRI model, with their seed strategies
    """
    sys = model.system
    if model.name == 'fedbatch':
        psi = fedbatch_bridge_constraint(sys, model.params)
        guess, label = fedbatch_lift_guess, 'F_bio'
    elif model.name == 'mri':
        psi = mri_bridge_constraint(sys)
        guess, label = mri_lift_guess, 'F_mri'
    else:
        raise InvalidConfig(f'No prior-saturation residual for model {model.name!r}')
    guesses = {name: (lambda name=name: guess(model, name)) for name in ('scan', 'midpoint')}
    return PriorLiftProblem(sys, psi, label=label, guesses=guesses)


# Lift and certificates ----------------------------------------
def solve_prior_lift(problem: PriorLiftProblem, guess: str | ndarray = 'scan',
                     tolerances: Tolerances | None = None) -> PriorSaturationLift:
    """
    Newton solve of F = 0 followed by the backward reconstruction z_e = exp(-t_b* H_+)(z_b*) and the
    assumption certificate
    :param problem: PriorLiftProblem
    :param guess: str or array - name of a seed strategy or an explicit unknown vector
    :param tolerances: Tolerances
    :return: PriorSaturationLift
    """
    tol = tolerances or problem.system.tolerances
    if isinstance(guess, str):
        if guess not in problem.guesses:
            raise InvalidConfig(f'{problem.label} has no guess strategy {guess!r}')
        y0 = problem.guesses[guess]()
    else:
        y0 = asarray(guess, dtype=float)
    solution = newton_solve(problem.residual_system(tol), y0, tol)
    t_b, z_b, lam = problem.unpack(solution.y)
    if t_b <= 0:
        logger.warning('%s converged to a non-positive bridge length %.6g', problem.label, t_b)
    z_e = problem.back_flow(t_b, z_b, tol)
    lift_ = PriorSaturationLift(z_e, t_b, z_b, lam, solution, None, problem.label)
    report = check_assumptions(problem, lift_, tol)
    logger.info('%s lift: x_e=%s, t_b=%.10g, A2=%s, A3=%s', problem.label, z_e.x, t_b, report.verdict_a2,
                report.verdict_a3)
    return dataclasses.replace(lift_, certificate=report)


def check_assumptions(problem: PriorLiftProblem, lift_: PriorSaturationLift,
                      tolerances: Tolerances | None = None) -> AssumptionReport:
    """
    Evaluates H_[g,[f,g]](z_e), u_s(z_e), a = H_[f,[f,g]](z_e) + H_[g,[f,g]](z_e), the central-difference
    Jacobian F' at the lift (tight integration tolerances), its condition number and that of its G-block.
    Never raises: failed evaluations are recorded as NaN with a note
    """
    tol = tolerances or problem.system.tolerances
    sys = problem.system
    notes = []
    h = lifts(sys, lift_.z_e)
    try:
        u_s = singular_control_z(sys, lift_.z_e)
    except LegendreDegenerate as e:
        u_s = float('nan')
        notes.append(f'LegendreDegenerate: {e}')
    a = h['FFG'] + problem.bang_sign * h['GFG']
    tight = tol.replace(rtol=min(tol.rtol, 1e-12), atol=min(tol.atol, 1e-14))
    y = problem.pack(lift_.t_b_star, lift_.z_b_star, lift_.lam)
    try:
        jac = central_jacobian_scaled(lambda v: problem.residual(v, tight), y)
        f_condition = float(cond(jac))
        g_condition = float(cond(jac[1:, 1:]))
        first_column = jac[:, 0]
    except SaturationToolkitError as e:
        f_condition = g_condition = float('nan')
        first_column = np.full(problem.dim, np.nan)
        notes.append(f'Jacobian evaluation failed: {e}')
    verdict_a2 = bool(abs(h['GFG']) > tol.nonzero and u_s < 1 - tol.nonzero)
    verdict_a3 = bool(np.isfinite(g_condition) and g_condition < tol.invertible_condition)
    if not verdict_a2:
        logger.warning('%s: assumption on H_[g,[f,g]](z_e) and u_s(z_e) < 1 fails (H=%.3e, u_s=%.6g)',
                       problem.label, h['GFG'], u_s)
    if not verdict_a3:
        logger.warning('%s: G-block not invertible (condition %.3e)', problem.label, g_condition)
    return AssumptionReport(h['GFG'], h['FFG'], u_s, a, g_condition, f_condition, first_column, verdict_a2,
                            verdict_a3, tuple(notes))


# Testing-----------------------------------------------------
if __name__ == '__main__':
    from analysis.models import build_model
    logging.basicConfig(level=logging.INFO)
    for name in ('mri', 'fedbatch'):
        m = build_model(name)
        result = solve_prior_lift(prior_lift_problem(m))
        print(name, result.x_e, result.t_b_star)
