"""
Hamiltonian lifts, Hamiltonian vector fields and the exponential map on the cotangent bundle of a
planar control-affine system. The abnormal multiplier is fixed to p0 = -1, so along normal extremals
the maximized Hamiltonian H = H_f + u H_g equals 1.

Author: Prior-Saturation Toolkit developers
Version: 1.0
"""

# Import packages-------------------------------------------
import logging
from enum import Enum
from dataclasses import dataclass, field
from typing import Callable, Sequence
import numpy as np
import pandas as pd
from numpy import ndarray, asarray
from numpy.linalg import norm
from scipy.integrate import solve_ivp

# Import functions from other scripts-----------------------
from modules.planar_system import PlanarAffineSystem, Tolerances, all_brackets, lie_bracket, alpha_beta
from modules.exceptions import (LegendreDegenerate, IntegrationFailure, DomainExit, OutOfSpan, InvalidConfig,
                                CollinearityDegenerate)
from utils.helpers import det2

# Global variables------------------------------------------
logger = logging.getLogger(__name__)
P0 = -1.0
FIELD_IDS = ('F', 'G', 'FG', 'FFG', 'GFG', 'Plus', 'Minus', 'Sing')
TRAJECTORY_COLUMNS = ['t', 'x1', 'x2', 'p1', 'p2', 'u', 'phi', 'phidot']


# Classes -------------------------------------------------
@dataclass(frozen=True)
class CotangentPoint:
    """
    State-adjoint pair z = (x, p)
    """
    x: ndarray
    p: ndarray

    def __post_init__(self):
        x = asarray(self.x, dtype=float).reshape(2)
        p = asarray(self.p, dtype=float).reshape(2)
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(p))):
            raise ValueError(f'Cotangent point must be finite, got x={x}, p={p}')
        object.__setattr__(self, 'x', x)
        object.__setattr__(self, 'p', p)

    @classmethod
    def from_vector(cls, y: Sequence[float]) -> 'CotangentPoint':
        y = asarray(y, dtype=float)
        return cls(y[:2], y[2:4])

    def as_vector(self) -> ndarray:
        return np.concatenate([self.x, self.p])

    def scaled(self, c: float) -> 'CotangentPoint':
        return CotangentPoint(self.x, c * self.p)

    def as_dict(self) -> dict:
        return {'x': self.x.tolist(), 'p': self.p.tolist()}


class LawKind(str, Enum):
    BANG_PLUS = 'BangPlus'
    BANG_MINUS = 'BangMinus'
    SINGULAR = 'SingularFeedback'
    CONSTANT = 'Constant'


@dataclass(frozen=True)
class ControlLaw:
    kind: LawKind
    value: float = 0.0

    def __post_init__(self):
        if self.kind == LawKind.CONSTANT and not abs(self.value) <= 1:
            raise InvalidConfig(f'Constant control must satisfy |c| <= 1, got {self.value}')

    @classmethod
    def bang_plus(cls) -> 'ControlLaw':
        return cls(LawKind.BANG_PLUS, 1.0)

    @classmethod
    def bang_minus(cls) -> 'ControlLaw':
        return cls(LawKind.BANG_MINUS, -1.0)

    @classmethod
    def singular(cls) -> 'ControlLaw':
        return cls(LawKind.SINGULAR)

    @classmethod
    def constant(cls, c: float) -> 'ControlLaw':
        return cls(LawKind.CONSTANT, float(c))

    @property
    def is_singular(self) -> bool:
        return self.kind == LawKind.SINGULAR

    def control(self, sys: PlanarAffineSystem, z: CotangentPoint) -> float:
        if self.kind == LawKind.SINGULAR:
            return singular_control_z(sys, z)
        return self.value

    def mirrored(self) -> 'ControlLaw':
        """
        Law under the symmetry u -> -u
        """
        if self.kind == LawKind.BANG_PLUS:
            return ControlLaw.bang_minus()
        if self.kind == LawKind.BANG_MINUS:
            return ControlLaw.bang_plus()
        if self.kind == LawKind.CONSTANT:
            return ControlLaw.constant(-self.value)
        return self

    def __str__(self):
        if self.kind == LawKind.CONSTANT:
            return f'Constant({self.value:g})'
        return self.kind.value


BANG_PLUS = ControlLaw.bang_plus()
BANG_MINUS = ControlLaw.bang_minus()
SINGULAR = ControlLaw.singular()


@dataclass(frozen=True)
class IntegratorStats:
    nfev: int
    n_steps: int
    rtol: float
    atol: float
    method: str


@dataclass(frozen=True)
class ExtremalTrajectory:
    """
    Solution of the Hamiltonian system under one control law. t_grid is increasing; for backward
    integrations t_start > t_end and the samples are stored reversed
    """
    system: PlanarAffineSystem
    law: ControlLaw
    t_start: float
    t_end: float
    t_grid: ndarray
    z_samples: ndarray
    dense: Callable[[float], ndarray] | None
    stats: IntegratorStats
    event_times: tuple = field(default_factory=tuple)
    event_states: tuple = field(default_factory=tuple)

    def __call__(self, t: float) -> ndarray:
        self.check_span(t)
        if self.dense is None:
            return np.array([np.interp(t, self.t_grid, self.z_samples[:, i]) for i in range(4)])
        return asarray(self.dense(t), dtype=float)

    def z(self, t: float) -> CotangentPoint:
        return CotangentPoint.from_vector(self(t))

    @property
    def span(self) -> tuple[float, float]:
        return float(self.t_grid[0]), float(self.t_grid[-1])

    @property
    def duration(self) -> float:
        return abs(self.t_end - self.t_start)

    @property
    def start(self) -> CotangentPoint:
        return CotangentPoint.from_vector(self.z_samples[0 if self.t_end >= self.t_start else -1])

    @property
    def end(self) -> CotangentPoint:
        return CotangentPoint.from_vector(self.z_samples[-1 if self.t_end >= self.t_start else 0])

    def check_span(self, t: float) -> None:
        lo, hi = self.span
        slack = 1e-12 * max(1.0, abs(lo), abs(hi))
        if not lo - slack <= t <= hi + slack:
            raise OutOfSpan(f'Time {t} outside trajectory span [{lo}, {hi}]')

    def controls(self) -> ndarray:
        return np.array([self.law.control(self.system, CotangentPoint.from_vector(y)) for y in self.z_samples])

    def hamiltonian_values(self) -> ndarray:
        """
        H(z, u) = H_f + u H_g at the samples
        """
        u = self.controls()
        return np.array([lift(self.system, 'F', CotangentPoint.from_vector(y))
                         + ui * lift(self.system, 'G', CotangentPoint.from_vector(y))
                         for y, ui in zip(self.z_samples, u)])

    def hamiltonian_drift(self) -> float:
        values = self.hamiltonian_values()
        return float(values.max() - values.min())

    def to_frame(self) -> pd.DataFrame:
        return export_trajectory(self)


# Lifts ----------------------------------------------------
def _as_point(z: CotangentPoint | Sequence[float]) -> CotangentPoint:
    if isinstance(z, CotangentPoint):
        return z
    return CotangentPoint.from_vector(z)


def _gfg_threshold(sys: PlanarAffineSystem, p: ndarray, gfg: ndarray) -> float:
    return sys.tolerances.degeneracy * (1 + norm(p) * norm(gfg))


def lift(sys: PlanarAffineSystem, field_id: str, z: CotangentPoint) -> float:
    """
    Hamiltonian lift p . X(x) of F, G, FG, FFG, GFG and the combinations
    Plus = H_f + H_g, Minus = H_f - H_g, Sing = H_f + u_s H_g
    :param sys: PlanarAffineSystem
    :param field_id: str
    :param z: CotangentPoint
    :return: float
    """
    z = _as_point(z)
    x = sys.check_domain(z.x)
    if field_id == 'F':
        return float(z.p @ sys.f(x))
    if field_id == 'G':
        return float(z.p @ sys.g(x))
    if field_id in ('FG', 'FFG', 'GFG'):
        return float(z.p @ lie_bracket(sys, field_id, x))
    h_f, h_g = float(z.p @ sys.f(x)), float(z.p @ sys.g(x))
    if field_id == 'Plus':
        return h_f + h_g
    if field_id == 'Minus':
        return h_f - h_g
    if field_id == 'Sing':
        return h_f + singular_control_z(sys, z) * h_g
    raise ValueError(f'Unknown field {field_id!r}, expected one of {FIELD_IDS}')


def lifts(sys: PlanarAffineSystem, z: CotangentPoint) -> dict[str, float]:
    """
    All five elementary lifts at z in one bracket evaluation
    """
    z = _as_point(z)
    return {k: float(z.p @ v) for k, v in all_brackets(sys, z.x).items()}


def singular_control_z(sys: PlanarAffineSystem, z: CotangentPoint) -> float:
    """
    u_s(z) = -H_[f,[f,g]](z) / H_[g,[f,g]](z)
    """
    z = _as_point(z)
    b = all_brackets(sys, z.x)
    h_gfg = float(z.p @ b['GFG'])
    if abs(h_gfg) <= _gfg_threshold(sys, z.p, b['GFG']):
        raise LegendreDegenerate(f'H_[g,[f,g]] vanishes at {z.x}, p={z.p}')
    return -float(z.p @ b['FFG']) / h_gfg


def singular_point_type(sys: PlanarAffineSystem, z: CotangentPoint) -> str:
    """
    Classifies a point of the singular surface: hyperbolic when H_[g,[f,g]] > 0, elliptic when < 0,
    parabolic when it vanishes
    """
    z = _as_point(z)
    gfg = lie_bracket(sys, 'GFG', z.x)
    h_gfg = float(z.p @ gfg)
    if abs(h_gfg) <= _gfg_threshold(sys, z.p, gfg):
        return 'parabolic'
    return 'hyperbolic' if h_gfg > 0 else 'elliptic'


def normalized_lift(sys: PlanarAffineSystem, x: ndarray) -> CotangentPoint:
    """
    Adjoint p with H_g = p . g(x) = 0 and H_f = p . f(x) = 1 = -p0. On the singular locus it also
    annihilates [f, g], which makes it the canonical lift of a singular point
    :param sys: PlanarAffineSystem
    :param x: array - state off the collinearity set
    :return: CotangentPoint
    """
    x = sys.check_domain(x)
    f, g = sys.f(x), sys.g(x)
    delta_0 = det2(f, g)
    if abs(delta_0) <= sys.tolerances.degeneracy * (1 + norm(f) * norm(g)):
        raise CollinearityDegenerate(f'No normalized lift at {x}: f and g are collinear')
    p = np.linalg.solve(np.array([f, g]), np.array([-P0, 0.0]))
    return CotangentPoint(x, p)


def hamiltonian_value(sys: PlanarAffineSystem, z: CotangentPoint, u: float) -> float:
    return lift(sys, 'F', z) + u * lift(sys, 'G', z)


def gamma_u(sys: PlanarAffineSystem, x: ndarray, u: float) -> float:
    """
    gamma_u = beta(x) - alpha(x) u, the coefficient of phi in phi' = gamma_u phi + alpha
    """
    alpha, beta = alpha_beta(sys, x)
    return beta - alpha * u


# Flows ----------------------------------------------------
def _rhs(sys: PlanarAffineSystem, law: ControlLaw, y: ndarray) -> ndarray:
    x, p = y[:2], y[2:]
    if law.is_singular:
        u = singular_control_z(sys, CotangentPoint(x, p))
    else:
        u = law.value
    Df, Dg = sys.f.jac(x), sys.g.jac(x)
    return np.concatenate([sys.f(x) + u * sys.g(x), -(Df + u * Dg).T @ p])


def hamiltonian_vector_field(sys: PlanarAffineSystem, law: ControlLaw, z: CotangentPoint) -> ndarray:
    """
    (x', p') = (f + u g, -(Df + u Dg)^T p) with u given by the law. For the singular law u = u_s(z)
    is substituted after differentiation
    :return: array of shape (4,)
    """
    z = _as_point(z)
    sys.check_domain(z.x)
    return _rhs(sys, law, z.as_vector())


def state_event(func: Callable[[ndarray], float], direction: int = 0, terminal: bool = True):
    def event(t, y):
        return func(y)
    event.terminal = terminal
    event.direction = direction
    return event


def integrate_extremal(sys: PlanarAffineSystem, law: ControlLaw, z0: CotangentPoint, t: float,
                       tolerances: Tolerances | None = None, events: Sequence[Callable] = (),
                       dense: bool = True) -> ExtremalTrajectory:
    """
    Integrates the Hamiltonian system from z0 over [0, t] (t may be negative). Terminal events in
    events stop the integration at the first zero; they receive (t, y) with y = (x, p)
    :param sys: PlanarAffineSystem
    :param law: ControlLaw
    :param z0: CotangentPoint
    :param t: float - final time
    :param tolerances: Tolerances - integration tolerances, defaults to the system's
    :param events: list of scipy-style event callables
    :param dense: bool - keep the dense output
    :return: ExtremalTrajectory
    """
    tol = tolerances or sys.tolerances
    z0 = _as_point(z0)
    sys.check_domain(z0.x)
    y0 = z0.as_vector()
    if t == 0:
        stats = IntegratorStats(0, 0, tol.rtol, tol.atol, tol.method)
        return ExtremalTrajectory(sys, law, 0.0, 0.0, np.array([0.0]), y0[None, :], None, stats)

    domain_event = state_event(lambda y: sys.domain_margin(y[:2]) + 1e-12 * (1 + norm(y[:2])))
    all_events = [domain_event, *events]
    sol = solve_ivp(lambda s, y: _rhs(sys, law, y), (0.0, t), y0, method=tol.method, rtol=tol.rtol,
                    atol=tol.atol, dense_output=dense, events=all_events)
    if sol.status == -1:
        raise IntegrationFailure(f'Integration of {law} failed: {sol.message}')
    if len(sol.t_events[0]) > 0:
        raise DomainExit(f'{law} flow left the domain of {sys.name} at t={sol.t_events[0][0]:.6g}, '
                         f'x={sol.y_events[0][0][:2]}')
    t_grid, samples = sol.t, sol.y.T
    if t < 0:
        t_grid, samples = t_grid[::-1], samples[::-1]
    stats = IntegratorStats(int(sol.nfev), len(sol.t) - 1, tol.rtol, tol.atol, tol.method)
    logger.debug('%s flow over %.6g: %d steps, %d evaluations', law, sol.t[-1], stats.n_steps, stats.nfev)
    return ExtremalTrajectory(sys, law, 0.0, float(sol.t[-1]), t_grid, samples, sol.sol if dense else None,
                              stats, tuple(sol.t_events[1:]), tuple(sol.y_events[1:]))


def exp_map(sys: PlanarAffineSystem, law: ControlLaw, t: float, z0: CotangentPoint,
            tolerances: Tolerances | None = None, full: bool = False) -> CotangentPoint | ExtremalTrajectory:
    """
    Exponential map exp(t H_law)(z0). Negative t integrates backward
    :param full: bool - return the whole ExtremalTrajectory instead of the end point
    """
    trajectory = integrate_extremal(sys, law, z0, t, tolerances, dense=full)
    return trajectory if full else trajectory.end


def flow_state(sys: PlanarAffineSystem, u: float, x0: ndarray, t_end: float, tolerances: Tolerances | None = None,
               stop: Callable[[ndarray], float] | None = None, direction: int = 0):
    """
    State-only flow of x' = f + u g for a constant control, optionally stopped at the first zero of stop(x)
    :return: scipy OdeResult with dense output
    """
    tol = tolerances or sys.tolerances
    events = [] if stop is None else [state_event(stop, direction)]
    sol = solve_ivp(lambda s, x: sys.dynamics(x, u), (0.0, t_end), asarray(x0, dtype=float),
                    method=tol.method, rtol=tol.rtol, atol=tol.atol, dense_output=True, events=events)
    if sol.status == -1:
        raise IntegrationFailure(f'State flow with u={u} failed: {sol.message}')
    return sol


def switching_data(sys: PlanarAffineSystem, traj: ExtremalTrajectory, t: float) -> tuple[float, float]:
    """
    Switching function phi = H_g and its derivative phi' = H_[f,g] at time t
    """
    z = traj.z(t)
    return lift(sys, 'G', z), lift(sys, 'FG', z)


def export_trajectory(traj: ExtremalTrajectory) -> pd.DataFrame:
    """
    Table with columns t, x1, x2, p1, p2, u, phi, phidot at the integrator steps
    """
    rows = []
    for t, y in zip(traj.t_grid, traj.z_samples):
        z = CotangentPoint.from_vector(y)
        rows.append([t, *y, traj.law.control(traj.system, z), lift(traj.system, 'G', z), lift(traj.system, 'FG', z)])
    return pd.DataFrame(rows, columns=TRAJECTORY_COLUMNS)


# Testing-----------------------------------------------------
if __name__ == '__main__':
    from analysis.models import mri_system, MriParams
    logging.basicConfig(level=logging.DEBUG)
    mri = mri_system(MriParams())
    print(hamiltonian_vector_field(mri, BANG_PLUS, CotangentPoint([0, 0], [0, 1])))
