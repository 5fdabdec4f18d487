"""
Geometry around the saturation and prior-saturation points: Brent root of the singular feedback on a
parametrized singular locus, predictor-corrector continuation of the switching curve
Sigma = {exp(-t_b H_+)(z_b(t_b))} through a prior-saturation lift, and the numerical certificates
(tangency of the bridge to Sigma, transversality of Sigma to the singular locus, and the standing
hypotheses of a prior-saturation setting).

Author: Prior-Saturation Toolkit developers
Version: 1.0
"""

# Import packages-------------------------------------------
import logging
import warnings
import dataclasses
from dataclasses import dataclass, field
import numpy as np
import pandas as pd
from numpy import ndarray, asarray
from numpy.linalg import norm, solve, cond, svd
from scipy.optimize import brentq

# Import functions from other scripts-----------------------
from modules.planar_system import (PlanarAffineSystem, SingularLocus, Tolerances, singular_feedback, collinearity_det,
                                   legendre_clebsch_margin, singular_det)
from modules.hamiltonian import CotangentPoint, lift, lifts, hamiltonian_vector_field, flow_state
from modules.shooting import PriorLiftProblem, PriorSaturationLift
from modules.exceptions import (SaturationToolkitError, NoBracket, NonMonotone, CorrectorDiverged, AssumptionViolated,
                                DegenerateDirection, NotSubmersion, LegendreDegenerate, InvalidConfig)
from analysis.models import ControlModel
from utils.helpers import (get_default_parameters, forward_jacobian, central_jacobian, chebyshev_points,
                           five_point_derivative, angle_between, to_builtin)

# Global variables------------------------------------------
logger = logging.getLogger(__name__)
CONTINUATION = get_default_parameters()['continuation']
CERTIFICATES = get_default_parameters()['certificates']
STENCIL_OFFSETS = (-2, -1, 1, 2)
STRATA = ('Sigma-', 'Sigma0', 'Sigma+')


# Classes -------------------------------------------------
@dataclass(frozen=True)
class SwitchingCurve:
    """
    Samples of t_b -> sigma(t_b) = (z_b(t_b), lambda(t_b)) solving G = 0 and of the switching curve
    phi(t_b) = exp(-t_b H_+)(z_b(t_b)). t_grid is increasing and contains t_b* and the stencil points
    t_b* +- stencil_step, t_b* +- 2 stencil_step. parameter_scale c reports the curve in the parameter
    c t_b instead of t_b
    """
    label: str
    t_b_star: float
    eps: float
    t_grid: ndarray
    sigma_samples: ndarray
    Sigma_samples: ndarray
    strata: tuple[str, ...]
    stencil_step: float
    k: int = 0
    parameter_scale: float = 1.0

    @property
    def parameter_grid(self) -> ndarray:
        return self.parameter_scale * self.t_grid

    @property
    def center_index(self) -> int:
        return int(np.argmin(np.abs(self.t_grid - self.t_b_star)))

    def index_of(self, t_b: float) -> int:
        i = int(np.argmin(np.abs(self.t_grid - t_b)))
        if not np.isclose(self.t_grid[i], t_b, rtol=0, atol=1e-12 * max(1.0, abs(t_b))):
            raise KeyError(f'No sample at t_b={t_b}')
        return i

    def side_counts(self) -> tuple[int, int]:
        return int(np.sum(self.t_grid < self.t_b_star)), int(np.sum(self.t_grid > self.t_b_star))

    def stencil(self, which: str = 'Sigma') -> dict[int, ndarray]:
        """
        Samples at the offsets -2, -1, 1, 2 of the uniform stencil around t_b*
        :param which: str - 'Sigma' for phi(t_b) or 'sigma' for (z_b, lambda)
        """
        samples = self.Sigma_samples if which == 'Sigma' else self.sigma_samples
        return {j: samples[self.index_of(self.t_b_star + j * self.stencil_step)] for j in STENCIL_OFFSETS}

    def projection(self) -> ndarray:
        """
        Sigma^pi, the state components of the switching curve
        """
        return self.Sigma_samples[:, :2]

    def to_frame(self) -> pd.DataFrame:
        columns = {'t_b': self.parameter_grid}
        for i, name in enumerate(('zb_x1', 'zb_x2', 'zb_p1', 'zb_p2')):
            columns[name] = self.sigma_samples[:, i]
        for i in range(self.k):
            columns[f'lambda_{i}'] = self.sigma_samples[:, 4 + i]
        for i, name in enumerate(('Sig_x1', 'Sig_x2', 'Sig_p1', 'Sig_p2')):
            columns[name] = self.Sigma_samples[:, i]
        columns['stratum'] = list(self.strata)
        return pd.DataFrame(columns)


@dataclass(frozen=True)
class TangencyCertificate:
    dphi_at_tbstar: ndarray
    hplus_at_ze: ndarray
    angle: float
    state_angle: float
    relative_gap: float
    sigma_prime_norm: float
    sigma_scale: float
    transversality_vector: ndarray
    tangent: bool
    state_tangent: bool
    sigma_stationary: bool

    def as_dict(self) -> dict:
        return to_builtin(dataclasses.asdict(self))


@dataclass(frozen=True)
class TransversalityCertificate:
    fd_vector: ndarray
    closed_form: ndarray
    singular_values: ndarray
    relative_error: float
    transverse: bool

    def as_dict(self) -> dict:
        return to_builtin(dataclasses.asdict(self))


@dataclass(frozen=True)
class SettingItem:
    passed: bool
    evidence: dict = field(default_factory=dict)


@dataclass(frozen=True)
class SettingReport:
    model: str
    items: dict[str, SettingItem]

    @property
    def passed(self) -> bool:
        return all(item.passed for item in self.items.values())

    def as_dict(self) -> dict:
        return to_builtin({'model': self.model, 'passed': self.passed,
                           'items': {k: {'passed': v.passed, 'evidence': v.evidence} for k, v in self.items.items()}})


class ChordCorrector:
    """
    Newton corrector on w -> G(t_b, w) at fixed t_b. The Jacobian is kept between calls and
    refreshed only when the contraction gets slow
    """

    def __init__(self, problem: PriorLiftProblem, tolerances: Tolerances, max_iter: int = 20):
        self.problem = problem
        self.tolerances = tolerances
        self.max_iter = max_iter
        self.jacobian = None
        self.refreshes = 0

    def g(self, t_b: float, w: ndarray) -> ndarray:
        return self.problem.g_block(t_b, w, self.tolerances)

    def refresh(self, t_b: float, w: ndarray, r: ndarray) -> None:
        jac = forward_jacobian(lambda v: self.g(t_b, v), w, r)
        condition = cond(jac)
        if not np.isfinite(condition) or condition > self.tolerances.max_condition:
            raise CorrectorDiverged(f'G-block singular at t_b={t_b:.10g} (condition {condition:.3e})')
        self.jacobian = jac
        self.refreshes += 1

    def correct(self, t_b: float, guess: ndarray) -> ndarray:
        tol = self.tolerances.newton_tol
        w = asarray(guess, dtype=float).copy()
        r = self.g(t_b, w)
        if self.jacobian is None:
            self.refresh(t_b, w, r)
        fresh = False
        for _ in range(self.max_iter):
            step = solve(self.jacobian, -r)
            try:
                r_new = self.g(t_b, w + step)
            except SaturationToolkitError:
                r_new = None
            if r_new is None or not norm(r_new, np.inf) < norm(r, np.inf):
                if norm(r, np.inf) <= tol:
                    return w
                if fresh:
                    break
                self.refresh(t_b, w, r)
                fresh = True
                continue
            slow = norm(r_new, np.inf) > 0.5 * norm(r, np.inf)
            w, r = w + step, r_new
            fresh = False
            if norm(r, np.inf) <= tol:
                return self._polish(t_b, w, r)
            if slow:
                self.refresh(t_b, w, r)
                fresh = True
        raise CorrectorDiverged(f'Corrector failed at t_b={t_b:.10g}, |G|={norm(r, np.inf):.3e}')

    def _polish(self, t_b: float, w: ndarray, r: ndarray) -> ndarray:
        """
        One more chord step below the tolerance, kept only if it lowers the residual
        """
        trial = w + solve(self.jacobian, -r)
        try:
            r_trial = self.g(t_b, trial)
        except SaturationToolkitError:
            return w
        return trial if norm(r_trial, np.inf) < norm(r, np.inf) else w


# Static functions -----------------------------------------
def find_saturation_point(sys: PlanarAffineSystem, locus: SingularLocus, target_sign: int = 1,
                          n_samples: int = CERTIFICATES['monotonicity_samples']) -> tuple[float, ndarray]:
    """
    Root tau* of psi(zeta(tau)) = target_sign on the locus interval by Brent's method
    :param sys: PlanarAffineSystem
    :param locus: SingularLocus - parametrization zeta over J
    :param target_sign: int - +1 or -1
    :param n_samples: int - samples for the bracketing and monotonicity scan
    :return: (tau*, x*)
    """
    if target_sign not in (1, -1):
        raise InvalidConfig(f'target_sign must be +1 or -1, got {target_sign}')
    taus, values = _sample_feedback(sys, locus, n_samples)
    finite = np.isfinite(values)
    diffs = np.diff(values[finite])
    if not (np.all(diffs > 0) or np.all(diffs < 0)):
        warnings.warn(f'psi o zeta is not strictly monotone on the {locus.branch} locus of {sys.name}', NonMonotone,
                      stacklevel=2)
    shifted = values - target_sign
    brackets = [i for i in range(len(taus) - 1)
                if finite[i] and finite[i + 1] and shifted[i] * shifted[i + 1] <= 0]
    if not brackets:
        raise NoBracket(f'psi o zeta - {target_sign} does not change sign on the {locus.branch} locus '
                        f'J=({locus.interval[0]:.6g}, {locus.interval[1]:.6g})')
    if len(brackets) > 1:
        logger.warning('%d saturation brackets on the %s locus, keeping the first', len(brackets), locus.branch)
    i = brackets[0]
    tau_star = brentq(lambda tau: singular_feedback(sys, locus(tau)) - target_sign, taus[i], taus[i + 1],
                      xtol=1e-12 * locus.length, rtol=4 * np.finfo(float).eps)
    x_star = locus(tau_star)
    logger.info('Saturation point of %s on the %s locus: tau*=%.12g, x*=%s', sys.name, locus.branch, tau_star, x_star)
    return float(tau_star), x_star


def _sample_feedback(sys: PlanarAffineSystem, locus: SingularLocus, n: int) -> tuple[ndarray, ndarray]:
    taus, points = locus.samples(n)
    values = np.empty(n)
    for i, x in enumerate(points):
        try:
            values[i] = singular_feedback(sys, x)
        except (LegendreDegenerate, SaturationToolkitError):
            values[i] = np.nan
    return taus, values


def locus_crossing_rate(sys: PlanarAffineSystem, x: ndarray, u: float) -> float:
    """
    Derivative of delta_SA along x' = f + u g, grad delta_SA(x) . (f + u g)(x)
    """
    grad = central_jacobian(lambda y: np.array([singular_det(sys, y)]), asarray(x, dtype=float))[0]
    return float(grad @ sys.dynamics(x, u))


def _continuation_grid(t_star: float, eps: float, n_samples: int, stencil_step: float) -> ndarray:
    interior = chebyshev_points(n_samples + 2, t_star - eps, t_star + eps)[1:-1]
    stencil = t_star + stencil_step * np.array(STENCIL_OFFSETS, dtype=float)
    grid = np.concatenate([interior[np.abs(interior - t_star) > 2.5 * stencil_step], stencil, [t_star]])
    return np.unique(grid)


def _predict(path: list[tuple[float, ndarray]], t_next: float) -> ndarray:
    if len(path) < 2:
        return path[-1][1]
    (t0, s0), (t1, s1) = path[-2], path[-1]
    return s1 + (t_next - t1) / (t1 - t0) * (s1 - s0)


def _trace(corrector: ChordCorrector, t_star: float, sigma_star: ndarray, targets: ndarray, min_step: float) \
        -> list[ndarray]:
    """
    Walks from t_b* through targets (monotone, moving away from t_b*), halving the step on failures
    """
    path = [(t_star, sigma_star)]
    out = []
    for target in targets:
        while True:
            t_prev = path[-1][0]
            t_next = target
            while True:
                try:
                    sigma = corrector.correct(t_next, _predict(path, t_next))
                    break
                except SaturationToolkitError as e:
                    half = (t_next - t_prev) / 2
                    if abs(half) < min_step:
                        raise CorrectorDiverged(f'Continuation stalled between t_b={t_prev:.10g} and '
                                                f'{target:.10g}: {e}') from e
                    logger.debug('Corrector failed at t_b=%.10g, halving the step', t_next)
                    t_next = t_prev + half
                    corrector.jacobian = None
            path.append((t_next, sigma))
            if t_next == target:
                out.append(sigma)
                break
    return out


def switching_point(problem: PriorLiftProblem, t_b: float, guess: ndarray, tolerances: Tolerances | None = None) \
        -> tuple[ndarray, CotangentPoint]:
    """
    Point sigma(t_b) of the curve solving G(t_b, .) = 0 near guess and its image phi(t_b) on Sigma
    :param problem: PriorLiftProblem
    :param t_b: float - bridge length
    :param guess: array - (z_b, lambda) initial guess
    :return: (sigma, phi)
    """
    tol = _curve_tolerances(tolerances or problem.system.tolerances)
    sigma = ChordCorrector(problem, tol).correct(t_b, guess)
    return sigma, problem.back_flow(t_b, CotangentPoint.from_vector(sigma[:4]), tol)


def _curve_tolerances(tol: Tolerances) -> Tolerances:
    return tol.replace(rtol=min(tol.rtol, 1e-12), atol=min(tol.atol, 1e-14))


def continue_switching_curve(problem: PriorLiftProblem, lift_: PriorSaturationLift, eps: float | None = None,
                             n_samples: int = CONTINUATION['n_samples'], tolerances: Tolerances | None = None,
                             parameter_scale: float = 1.0) -> SwitchingCurve:
    """
    Continues sigma(t_b) on both sides of t_b* over (t_b* - eps, t_b* + eps) on Chebyshev-clustered
    samples plus a uniform five-point stencil at t_b*
    :param problem: PriorLiftProblem - the residual the lift solves
    :param lift_: PriorSaturationLift - seed, with its assumption certificate
    :param eps: float - half-width, defaults to min(0.2 t_b*, 0.5)
    :param n_samples: int - Chebyshev samples
    :param tolerances: Tolerances - base tolerances, integration is tightened for the curve
    :param parameter_scale: float - positive rescaling c of the curve parameter
    :return: SwitchingCurve
    """
    if lift_.certificate is None or not lift_.certificate.verdict_a3:
        raise AssumptionViolated(f'{problem.label}: the G-block is not invertible at the lift')
    if parameter_scale <= 0:
        raise InvalidConfig(f'parameter_scale must be positive, got {parameter_scale}')
    tol = _curve_tolerances(tolerances or problem.system.tolerances)
    t_star = lift_.t_b_star
    if eps is None:
        eps = min(CONTINUATION['eps_fraction'] * t_star, CONTINUATION['eps_cap'])
    stencil_step = CONTINUATION['stencil_fraction'] * t_star
    grid = _continuation_grid(t_star, eps, n_samples, stencil_step)
    sigma_star = np.concatenate([lift_.z_b_star.as_vector(), asarray(lift_.lam, dtype=float)])
    min_step = eps / 2 ** CONTINUATION['max_halvings']

    seed = ChordCorrector(problem, tol)
    seed.refresh(t_star, sigma_star, seed.g(t_star, sigma_star))
    sides = {}
    for name, targets in (('right', grid[grid > t_star]), ('left', grid[grid < t_star][::-1])):
        corrector = ChordCorrector(problem, tol)
        corrector.jacobian = seed.jacobian
        sides[name] = _trace(corrector, t_star, sigma_star, targets, min_step)
        logger.debug('%s side of %s traced with %d Jacobian refreshes', name, problem.label, corrector.refreshes)
    sigmas = np.array(sides['left'][::-1] + [sigma_star] + sides['right'])
    Sigma = np.array([problem.back_flow(t, CotangentPoint.from_vector(s[:4]), tol).as_vector()
                      for t, s in zip(grid, sigmas)])
    strata = tuple(STRATA[int(np.sign(t - t_star)) + 1] for t in grid)
    drift = max(abs(lift(problem.system, 'G', y)) for y in Sigma)
    logger.info('%s switching curve: %d samples on (%.8g, %.8g), max |H_g| on Sigma %.3e', problem.label,
                len(grid), t_star - eps, t_star + eps, drift)
    return SwitchingCurve(problem.label, t_star, eps, grid, sigmas, Sigma, strata, stencil_step, problem.k,
                          parameter_scale)


def certify_tangency(problem: PriorLiftProblem, lift_: PriorSaturationLift, curve: SwitchingCurve,
                     config: dict | None = None) -> TangencyCertificate:
    """
    Compares the five-point derivative phi'(t_b*) of the switching curve with -H_+(z_e) in R^4 and
    in the state plane, and checks that sigma'(t_b*) vanishes
    :param problem: PriorLiftProblem
    :param lift_: PriorSaturationLift
    :param curve: SwitchingCurve - with at least five samples on each side of t_b*
    :param config: dict - certificate thresholds, defaults to the certificates section of the parameter file
    :return: TangencyCertificate
    """
    cfg = CERTIFICATES | (config or {})
    if min(curve.side_counts()) < 5:
        raise InvalidConfig(f'Curve needs five samples on each side of t_b*, has {curve.side_counts()}')
    h = curve.parameter_scale * curve.stencil_step
    dphi_param = five_point_derivative(curve.stencil('Sigma'), h)
    dsigma_param = five_point_derivative(curve.stencil('sigma'), h)
    # back to the t_b parameter for the magnitude checks
    dphi = curve.parameter_scale * dphi_param
    dsigma = curve.parameter_scale * dsigma_param
    hplus = hamiltonian_vector_field(problem.system, problem.bang_law, lift_.z_e)
    for name, vector in (('phi\'(t_b*)', dphi_param), ('H_+(z_e)', hplus)):
        if norm(vector) < 1e-12 or norm(vector[:2]) < 1e-12:
            raise DegenerateDirection(f'{name} is numerically zero')
    angle = angle_between(dphi_param, -hplus)
    state_angle = angle_between(dphi_param[:2], -hplus[:2])
    relative_gap = float(norm(dphi + hplus) / norm(hplus))
    sigma_scale = max(1.0, float(norm(curve.sigma_samples[curve.center_index])))
    sigma_prime_norm = float(norm(dsigma))
    transversality_vector = switching_map_jacobian(problem.system, lift_.z_e) @ dphi
    certificate = TangencyCertificate(dphi, hplus, angle, state_angle, relative_gap, sigma_prime_norm, sigma_scale,
                                      transversality_vector,
                                      tangent=bool(angle <= cfg['tangency_angle']
                                                   and relative_gap <= cfg['tangency_relative']),
                                      state_tangent=bool(state_angle <= cfg['tangency_angle']),
                                      sigma_stationary=bool(sigma_prime_norm <= cfg['sigma_stationary'] * sigma_scale))
    logger.info('%s tangency: angle %.3e rad, state angle %.3e rad, |sigma\'| %.3e', problem.label, angle,
                state_angle, sigma_prime_norm)
    return certificate


def switching_map_jacobian(sys: PlanarAffineSystem, z: CotangentPoint) -> ndarray:
    """
    Jacobian of xi = (H_g, H_[f,g]) with respect to z = (x, p), shape (2, 4)
    """
    return central_jacobian(lambda y: np.array([lift(sys, 'G', y), lift(sys, 'FG', y)]), z.as_vector())


def transversality_closed_form(sys: PlanarAffineSystem, z: CotangentPoint, bang_sign: int = 1) -> ndarray:
    """
    -(H_[f,g](z), H_[f,[f,g]](z) + u H_[g,[f,g]](z)) with u the bang value
    """
    h = lifts(sys, z)
    return -np.array([h['FG'], h['FFG'] + bang_sign * h['GFG']])


def certify_transversality(problem: PriorLiftProblem, lift_: PriorSaturationLift, curve: SwitchingCurve,
                           config: dict | None = None) -> TransversalityCertificate:
    """
    Derivative of xi along the switching curve at z_e, by finite differences and in closed form
    """
    cfg = CERTIFICATES | (config or {})
    sys = problem.system
    jac = switching_map_jacobian(sys, lift_.z_e)
    singular_values = svd(jac, compute_uv=False)
    if singular_values[-1] <= 1e-12 * max(1.0, singular_values[0]):
        raise NotSubmersion(f'xi = (H_g, H_[f,g]) is not a submersion at z_e (singular values {singular_values})')
    dphi = curve.parameter_scale * five_point_derivative(curve.stencil('Sigma'),
                                                         curve.parameter_scale * curve.stencil_step)
    fd_vector = jac @ dphi
    closed = transversality_closed_form(sys, lift_.z_e, problem.bang_sign)
    closed_norm = float(norm(closed))
    relative_error = float(norm(fd_vector - closed) / closed_norm) if closed_norm > 0 else float('inf')
    transverse = bool(closed_norm > sys.tolerances.nonzero and relative_error <= cfg['transversality_relative'])
    logger.info('%s transversality: closed form %s, finite differences %s, transverse=%s', problem.label, closed,
                fd_vector, transverse)
    return TransversalityCertificate(fd_vector, closed, singular_values, relative_error, transverse)


def _grid_collinearity(model: ControlModel, n: int) -> SettingItem:
    values = []
    for x in model.state_grid(n):
        try:
            values.append(collinearity_det(model.system, x))
        except SaturationToolkitError:
            continue
    values = np.array(values)
    return SettingItem(bool(values.size and np.all(values < 0)),
                       {'max_delta_0': float(values.max()) if values.size else float('nan'),
                        'n_points': int(values.size),
                        'n_nonnegative': int(np.sum(values >= 0))})


def _saturation_item(model: ControlModel, locus: SingularLocus, n: int) -> SettingItem:
    _, values = _sample_feedback(model.system, locus, n)
    finite = values[np.isfinite(values)]
    diffs = np.diff(finite)
    monotone = bool(finite.size > 1 and np.all(diffs > 0))
    n_roots = int(np.sum((finite[:-1] - 1) * (finite[1:] - 1) <= 0))
    evidence = {'monotone_increasing': monotone, 'n_sign_changes': n_roots}
    try:
        with warnings.catch_warnings():
            warnings.simplefilter('ignore', NonMonotone)
            tau, x = find_saturation_point(model.system, locus, 1, n)
        evidence |= {'tau_star': tau, 'x_star': x}
        return SettingItem(monotone and n_roots == 1, evidence)
    except NoBracket as e:
        evidence['error'] = f'NoBracket: {e}'
        return SettingItem(False, evidence)


def _legendre_item(model: ControlModel, locus: SingularLocus, n: int) -> SettingItem:
    _, points = locus.samples(n)
    margins = []
    for x in points:
        try:
            if abs(singular_feedback(model.system, x)) <= 1:
                margins.append(legendre_clebsch_margin(model.system, x))
        except SaturationToolkitError:
            continue
    margins = np.array(margins)
    return SettingItem(bool(margins.size and np.all(margins > 0)),
                       {'min_margin': float(margins.min()) if margins.size else float('nan'),
                        'n_points': int(margins.size)})


def _semi_orbit_item(model: ControlModel, x_star: ndarray) -> SettingItem:
    sol = flow_state(model.system, -1.0, x_star, model.semi_orbit_horizon)
    samples = sol.sol(np.linspace(0, sol.t[-1], 2001)).T
    distances = np.array([model.target_distance(x) for x in samples])
    hits = any(model.in_target(x) for x in samples)
    return SettingItem(bool(not hits and distances.min() > 0),
                       {'min_target_distance': float(distances.min()), 'horizon': float(sol.t[-1])})


def _witness_item(model: ControlModel, x_star: ndarray) -> SettingItem:
    x = asarray(x_star, dtype=float)
    durations = []
    for u, stop, direction in model.witness_sequence():
        sol = flow_state(model.system, u, x, model.tolerances.horizon, stop=stop, direction=direction)
        if len(sol.t_events[0]) == 0:
            return SettingItem(False, {'error': f'stop condition of the u={u:g} arc not reached',
                                       'durations': durations})
        durations.append(float(sol.t_events[0][0]))
        x = sol.y_events[0][0]
    return SettingItem(model.in_target(x), {'durations': durations, 'final_state': x,
                                            'final_distance': model.target_distance(x)})


def certify_prior_saturation_setting(model: ControlModel, grid_size: int = CERTIFICATES['grid_size'],
                                     n_samples: int = CERTIFICATES['monotonicity_samples']) -> SettingReport:
    """
    Checks the standing hypotheses of a prior-saturation setting on sample grids:
    (i) delta_0 < 0 on a state grid, (ii) unique saturation root with increasing psi o zeta,
    (iii) positive Legendre-Clebsch margin wherever |psi| <= 1 on the locus, (iv) the u = -1 semi-orbit
    from x* misses the target, (v) a constant-control witness steers x* into the target.
    Never raises; failures are recorded as evidence
    """
    locus = model.locus()
    items = {'i_collinearity_sign': _grid_collinearity(model, grid_size),
             'ii_saturation_root': _saturation_item(model, locus, n_samples),
             'iii_legendre_clebsch': _legendre_item(model, locus, n_samples)}
    x_star = items['ii_saturation_root'].evidence.get('x_star')
    for key, check in (('iv_semi_orbit_misses_target', _semi_orbit_item), ('v_reachability_witness', _witness_item)):
        if x_star is None:
            items[key] = SettingItem(False, {'error': 'no saturation point'})
            continue
        try:
            items[key] = check(model, x_star)
        except SaturationToolkitError as e:
            items[key] = SettingItem(False, {'error': f'{type(e).__name__}: {e}'})
    report = SettingReport(model.name, items)
    logger.info('Prior-saturation setting of %s: %s', model.name,
                ', '.join(f'{k}={v.passed}' for k, v in items.items()))
    return report


# Testing-----------------------------------------------------
if __name__ == '__main__':
    from analysis.models import build_model
    logging.basicConfig(level=logging.INFO)
    print(certify_prior_saturation_setting(build_model('fedbatch')).as_dict())
