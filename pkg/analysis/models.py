"""
The two concrete planar systems: the fed-batch bioreactor with Haldane kinetics (state (s, v)) and
the Bloch equations of a single spin in the rotating frame (state (x1, x2)). Parameters, analytic
derivatives, closed forms for the singular feedback and saturation points, targets and the
parametrized singular loci.

The fed-batch default Q_max is 2, not 1. With the split f, g below the singular feedback is
u_s[v] = 2 mu(s*)(M + v(s_in - s*)) / ((s_in - s*) Q_max) - 1, so the saturation volume is
v* = Q_max / mu(s*) - M / (s_in - s*). Q_max = 2 keeps the saturation point at (s*, v*) = (1, 2.4) and
u_s[1.2] = 0, the values the usual closed forms 2 Q_max / mu(s*) - M / (s_in - s*) give with Q_max = 1.

Author: Prior-Saturation Toolkit developers
Version: 1.0
"""

# Import packages------------------------------------------------------
import logging
import dataclasses
from dataclasses import dataclass, field
from typing import Callable
import numpy as np
from numpy import ndarray, array, sqrt, arctan, exp
from scipy.integrate import solve_ivp

# Import functions from other scripts-----------------------------------
from utils.helpers import get_default_parameters
from modules.exceptions import ParamInvariantViolated, InvalidConfig, IntegrationFailure, ComplexBeta
from modules.planar_system import PlanarAffineSystem, VectorField2, SingularLocus, Tolerances

# Global variables------------------------------------------------------
logger = logging.getLogger(__name__)
DEFAULT_FEDBATCH = get_default_parameters()['fedbatch']
DEFAULT_MRI = get_default_parameters()['mri']
MODEL_NAMES = ('fedbatch', 'mri')


# Parameters -----------------------------------------------------------
def _from_dict(cls, values: dict | None):
    values = dict(values or {})
    known = {f.name for f in dataclasses.fields(cls)}
    unknown = set(values) - known
    if unknown:
        raise InvalidConfig(f'Unknown {cls.__name__} keys: {sorted(unknown)}')
    try:
        return cls(**{k: float(v) for k, v in values.items()})
    except (TypeError, ValueError) as e:
        if isinstance(e, InvalidConfig):
            raise
        raise InvalidConfig(f'Invalid {cls.__name__} values: {e}') from e


@dataclass(frozen=True)
class FedBatchParams:
    """
    Fed-batch bioreactor parameters. Haldane constants mu_h, K, K_I, input concentration s_in,
    maximal pump speed Q_max, biomass offset M, maximal volume v_max and target threshold s_ref
    """
    mu_h: float = DEFAULT_FEDBATCH['mu_h']
    K: float = DEFAULT_FEDBATCH['K']
    K_I: float = DEFAULT_FEDBATCH['K_I']
    s_in: float = DEFAULT_FEDBATCH['s_in']
    Q_max: float = DEFAULT_FEDBATCH['Q_max']
    M: float = DEFAULT_FEDBATCH['M']
    v_max: float = DEFAULT_FEDBATCH['v_max']
    s_ref: float = DEFAULT_FEDBATCH['s_ref']

    def __post_init__(self):
        for name in ('mu_h', 'K', 'K_I', 's_in', 'Q_max', 'v_max'):
            value = getattr(self, name)
            if not np.isfinite(value) or value <= 0:
                raise ParamInvariantViolated(f'{name} must be positive, got {value}')
        if not np.isfinite(self.M):
            raise ParamInvariantViolated(f'M must be finite, got {self.M}')
        if not 0 < self.s_ref < self.s_in:
            raise ParamInvariantViolated(f's_ref must lie in (0, s_in), got {self.s_ref}')

    @classmethod
    def from_dict(cls, values: dict | None = None) -> 'FedBatchParams':
        return _from_dict(cls, values)

    # Haldane kinetics
    def mu(self, s: float) -> float:
        return self.mu_h * s / (self.K + s + s ** 2 / self.K_I)

    def mu_prime(self, s: float) -> float:
        d = self.K + s + s ** 2 / self.K_I
        return self.mu_h * (self.K - s ** 2 / self.K_I) / d ** 2

    def mu_second(self, s: float) -> float:
        d = self.K + s + s ** 2 / self.K_I
        d_prime = 1 + 2 * s / self.K_I
        numerator = self.mu_h * (self.K - s ** 2 / self.K_I)
        return ((-2 * self.mu_h * s / self.K_I) * d - 2 * numerator * d_prime) / d ** 3

    @property
    def s_star(self) -> float:
        return float(sqrt(self.K * self.K_I))

    @property
    def mu_star(self) -> float:
        return self.mu_h / (1 + 2 * sqrt(self.K / self.K_I))

    @property
    def v_star(self) -> float:
        """
        Saturation volume, where the singular feedback along s = s* reaches 1
        """
        return self.Q_max / self.mu_star - self.M / (self.s_in - self.s_star)

    def violations(self) -> list[str]:
        out = []
        if not 0 < self.s_star < self.s_in:
            out.append(f's* = {self.s_star:.6g} must lie in (0, s_in)')
        elif not 0 < self.v_star < self.v_max:
            out.append(f'v* = {self.v_star:.6g} must lie in (0, v_max = {self.v_max:.6g})')
        return out

    def validate(self) -> None:
        problems = self.violations()
        if problems:
            raise ParamInvariantViolated('; '.join(problems))

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass(frozen=True)
class MriParams:
    """
    Relaxation parameters of the Bloch equations
    """
    gamma: float = DEFAULT_MRI['gamma']
    Gamma: float = DEFAULT_MRI['Gamma']

    def __post_init__(self):
        for name in ('gamma', 'Gamma'):
            if not np.isfinite(getattr(self, name)):
                raise ParamInvariantViolated(f'{name} must be finite')
        if self.Gamma <= 0:
            raise ParamInvariantViolated(f'Gamma must be positive, got {self.Gamma}')

    @classmethod
    def from_dict(cls, values: dict | None = None) -> 'MriParams':
        return _from_dict(cls, values)

    @property
    def delta(self) -> float:
        return self.gamma - self.Gamma

    @property
    def horizontal_level(self) -> float:
        """
        x2 coordinate of the horizontal singular line
        """
        return self.gamma / (2 * self.delta)

    def violations(self) -> list[str]:
        out = []
        if not 0 < self.gamma <= 2 * self.Gamma:
            out.append(f'physical constraint 0 < gamma <= 2 Gamma fails (gamma={self.gamma}, Gamma={self.Gamma})')
        if not 3 * self.gamma <= 2 * self.Gamma:
            out.append(f'saturation regime 3 gamma <= 2 Gamma fails (gamma={self.gamma}, Gamma={self.Gamma})')
        return out

    def validate(self) -> None:
        problems = self.violations()
        if problems:
            raise ParamInvariantViolated('; '.join(problems))

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


# Fed-batch -------------------------------------------------------------
def fedbatch_system(params: FedBatchParams, strict: bool = True, tolerances: Tolerances | None = None) \
        -> PlanarAffineSystem:
    """
    Fed-batch dynamics split as x' = f + u g with
    f = (-mu(s)(M/v + s_in - s) + Q_max(s_in - s)/(2v), Q_max/2), g = (Q_max(s_in - s)/(2v), Q_max/2)
    :param params: FedBatchParams
    :param strict: bool - raise ParamInvariantViolated when the saturation invariants fail
    :param tolerances: Tolerances - optional overrides
    :return: PlanarAffineSystem
    """
    if strict:
        params.validate()
    p = params
    a, q, m = p.s_in, p.Q_max, p.M

    def f(x):
        s, v = x
        return array([-p.mu(s) * (m / v + a - s) + q * (a - s) / (2 * v), q / 2])

    def f_jac(x):
        s, v = x
        biomass = m / v + a - s
        return array([[-p.mu_prime(s) * biomass + p.mu(s) - q / (2 * v),
                       p.mu(s) * m / v ** 2 - q * (a - s) / (2 * v ** 2)],
                      [0.0, 0.0]])

    def f_hess(x):
        s, v = x
        biomass = m / v + a - s
        h_ss = -p.mu_second(s) * biomass + 2 * p.mu_prime(s)
        h_sv = p.mu_prime(s) * m / v ** 2 + q / (2 * v ** 2)
        h_vv = -2 * p.mu(s) * m / v ** 3 + q * (a - s) / v ** 3
        return array([[[h_ss, h_sv], [h_sv, h_vv]], np.zeros((2, 2))])

    def g(x):
        s, v = x
        return array([q * (a - s) / (2 * v), q / 2])

    def g_jac(x):
        s, v = x
        return array([[-q / (2 * v), -q * (a - s) / (2 * v ** 2)], [0.0, 0.0]])

    def g_hess(x):
        s, v = x
        h_sv = q / (2 * v ** 2)
        return array([[[0.0, h_sv], [h_sv, q * (a - s) / v ** 3]], np.zeros((2, 2))])

    return PlanarAffineSystem(f=VectorField2(f, f_jac, f_hess, name='f'),
                              g=VectorField2(g, g_jac, g_hess, name='g'),
                              domain=((0.0, a), (0.0, np.inf)),
                              name='fedbatch',
                              tolerances=tolerances or Tolerances())


def fedbatch_singular_volume_feedback(params: FedBatchParams, v: float) -> float:
    """
    Singular control along s = s* as a function of the volume,
    u_s[v] = 2 mu(s*)(M + v(s_in - s*)) / ((s_in - s*) Q_max) - 1
    """
    s_star = params.s_star
    return 2 * params.mu_star * (params.M + v * (params.s_in - s_star)) / ((params.s_in - s_star) * params.Q_max) - 1


def fedbatch_locus(params: FedBatchParams) -> SingularLocus:
    """
    The singular locus {s*} x (0, v_max] parametrized by the volume
    """
    s_star = params.s_star
    return SingularLocus(zeta=lambda v: array([s_star, v]),
                         interval=(1e-3 * params.v_max, params.v_max),
                         branch='vertical')


def fedbatch_backward_witness(params: FedBatchParams, tolerances: Tolerances | None = None) -> float | None:
    """
    Integrates ds/dv = -mu(s)(M/v + s_in - s)/Q_max + (s_in - s)/v backward in v from s(v_max) = s*
    and returns the largest v_* in (0, v*) with s(v_*) = s*, or None
    :param params: FedBatchParams
    :param tolerances: Tolerances
    :return: float or None
    """
    tol = tolerances or Tolerances()
    p = params
    s_star = p.s_star

    def rhs(v, y):
        s = y[0]
        return [-p.mu(s) * (p.M / v + p.s_in - s) / p.Q_max + (p.s_in - s) / v]

    def back_on_locus(v, y):
        return y[0] - s_star
    back_on_locus.terminal = True
    back_on_locus.direction = -1

    def substrate_exhausted(v, y):
        return y[0]
    substrate_exhausted.terminal = True

    sol = solve_ivp(rhs, (p.v_max, 1e-6 * p.v_max), [s_star], method=tol.method,
                    rtol=tol.rtol, atol=tol.atol, events=[back_on_locus, substrate_exhausted])
    if sol.status == -1:
        raise IntegrationFailure(f'Backward witness integration failed: {sol.message}')
    if len(sol.t_events[0]) == 0:
        logger.info('No backward witness found for M=%g', p.M)
        return None
    v_witness = float(sol.t_events[0][0])
    if not 0 < v_witness < p.v_star:
        logger.info('Backward witness %.6g lies outside (0, v*)', v_witness)
        return None
    return v_witness


# MRI -------------------------------------------------------------------
def mri_system(params: MriParams, strict: bool = True, tolerances: Tolerances | None = None) -> PlanarAffineSystem:
    """
    Bloch equations x1' = -Gamma x1 - u x2, x2' = gamma (1 - x2) + u x1 on the Bloch ball
    """
    if strict:
        params.validate()
    gamma, Gamma = params.gamma, params.Gamma
    f_jac = array([[-Gamma, 0.0], [0.0, -gamma]])
    g_jac = array([[0.0, -1.0], [1.0, 0.0]])
    zero_hess = np.zeros((2, 2, 2))
    return PlanarAffineSystem(
        f=VectorField2(lambda x: array([-Gamma * x[0], gamma * (1 - x[1])]),
                       lambda x: f_jac.copy(), lambda x: zero_hess.copy(), name='f'),
        g=VectorField2(lambda x: array([-x[1], x[0]]),
                       lambda x: g_jac.copy(), lambda x: zero_hess.copy(), name='g'),
        domain=((-1.0, 1.0), (-1.0, 1.0)),
        region=lambda x: 1 - x[0] ** 2 - x[1] ** 2,
        name='mri',
        tolerances=tolerances or Tolerances())


def mri_saturation_point(params: MriParams) -> ndarray:
    """
    x_sat = (gamma (2 Gamma - gamma) / (2 delta), gamma / (2 delta))
    """
    if params.gamma <= 0 or 3 * params.gamma > 2 * params.Gamma:
        raise ParamInvariantViolated('The saturation point needs 0 < gamma and 3 gamma <= 2 Gamma')
    d = params.delta
    return array([params.gamma * (2 * params.Gamma - params.gamma) / (2 * d), params.gamma / (2 * d)])


def mri_mirror(x: ndarray) -> ndarray:
    """
    Discrete symmetry (x1, x2, u) -> (-x1, x2, -u) of the Bloch equations
    """
    return array([-x[0], x[1]])


def mri_horizontal_locus(params: MriParams) -> SingularLocus:
    level = params.horizontal_level
    radius = sqrt(max(1 - level ** 2, 0.0))
    return SingularLocus(zeta=lambda x1: array([x1, level]), interval=(-radius, -0.01 * radius),
                         branch='horizontal')


def mri_vertical_locus(params: MriParams) -> SingularLocus:
    return SingularLocus(zeta=lambda x2: array([0.0, x2]), interval=(0.05, 0.95), branch='vertical')


@dataclass
class AdmissibilityReport:
    delta: float
    alpha: float
    beta: float
    t0: float
    third_value: float
    bullets: dict[str, bool | None]
    regime_ok: bool
    notes: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.regime_ok and all(v is not False for v in self.bullets.values())

    def as_dict(self) -> dict:
        return dataclasses.asdict(self) | {'passed': self.passed}


def mri_admissibility(params: MriParams, x_e: ndarray | None = None) -> AdmissibilityReport:
    """
    Evaluates the admissibility conditions on (gamma, Gamma): x_e in the Bloch ball (when a lift is
    given), gamma > 0 and 0 <= (2 Gamma^2 - gamma Gamma + 1) exp((alpha - gamma) t0) - 2 delta with
    alpha = delta / 2, beta = sqrt(1 - alpha^2), t0 = arctan(-beta / alpha) / beta
    :param params: MriParams
    :param x_e: array - projection of the prior-saturation lift, if computed
    :return: AdmissibilityReport
    """
    delta = params.delta
    alpha = delta / 2
    notes = list(params.violations())
    beta = t0 = third = float('nan')
    third_ok = None
    try:
        if abs(alpha) > 1:
            raise ComplexBeta(f'|alpha| = {abs(alpha):.6g} > 1, beta is not real')
        beta = float(sqrt(1 - alpha ** 2))
        with np.errstate(divide='ignore'):
            t0 = float(arctan(np.divide(-beta, alpha)) / beta)
        third = float((2 * params.Gamma ** 2 - params.gamma * params.Gamma + 1)
                      * exp((alpha - params.gamma) * t0) - 2 * delta)
        third_ok = bool(third >= 0)
    except ComplexBeta as e:
        notes.append(f'ComplexBeta: {e}')
        logger.warning('%s', e)
    in_ball = None if x_e is None else bool(x_e[0] ** 2 + x_e[1] ** 2 <= 1)
    bullets = {'x_e_in_bloch_ball': in_ball,
               'gamma_positive': bool(params.gamma > 0),
               'third_condition': third_ok}
    return AdmissibilityReport(delta=delta, alpha=alpha, beta=beta, t0=t0, third_value=third,
                               bullets=bullets, regime_ok=not params.violations(), notes=notes)


# Model bundles ---------------------------------------------------------
@dataclass(frozen=True)
class ControlModel:
    """
    A model together with its system, loci, target and grids
    """
    name: str
    params: FedBatchParams | MriParams
    system: PlanarAffineSystem
    default_branch: str

    @property
    def tolerances(self) -> Tolerances:
        return self.system.tolerances

    def locus(self, branch: str | None = None) -> SingularLocus:
        raise NotImplementedError

    def saturation_point(self) -> ndarray:
        raise NotImplementedError

    def in_target(self, x: ndarray) -> bool:
        raise NotImplementedError

    def target_distance(self, x: ndarray) -> float:
        raise NotImplementedError

    def witness_sequence(self) -> list[tuple[float, Callable[[ndarray], float], int]]:
        """
        Constant controls with stop conditions (control, event(x), direction) steering a point
        near the saturation point to the target
        """
        raise NotImplementedError

    def state_grid(self, n: int) -> ndarray:
        raise NotImplementedError

    def synthesis_nodes(self, n1: int, n2: int) -> tuple[ndarray, ndarray]:
        raise NotImplementedError

    def describe(self) -> dict:
        return {'model': self.name, 'params': self.params.as_dict(), 'tolerances': self.tolerances.as_dict()}


@dataclass(frozen=True)
class FedBatchModel(ControlModel):
    semi_orbit_horizon: float = 20.0

    def locus(self, branch: str | None = None) -> SingularLocus:
        branch = branch or self.default_branch
        if branch != 'vertical':
            raise InvalidConfig(f'Fed-batch has only the vertical locus branch, got {branch!r}')
        return fedbatch_locus(self.params)

    def saturation_point(self) -> ndarray:
        return array([self.params.s_star, self.params.v_star])

    def in_target(self, x: ndarray) -> bool:
        return bool(x[1] >= self.params.v_max - self.tolerances.event_state
                    and 0 < x[0] <= self.params.s_ref + self.tolerances.event_state)

    def in_extended_target(self, x: ndarray) -> bool:
        return bool(abs(x[1] - self.params.v_max) <= self.tolerances.event_state and 0 < x[0] <= self.params.s_in)

    def target_distance(self, x: ndarray) -> float:
        ds = max(x[0] - self.params.s_ref, 0.0)
        return float(np.hypot(ds, x[1] - self.params.v_max))

    def witness_sequence(self):
        p = self.params
        return [(1.0, lambda x: x[1] - p.v_max, 1), (-1.0, lambda x: x[0] - p.s_ref, -1)]

    def state_grid(self, n: int) -> ndarray:
        s = np.linspace(0, self.params.s_in, n + 2)[1:-1]
        v = np.linspace(0, self.params.v_max, n + 1)[1:]
        return np.array([[si, vi] for si in s for vi in v])

    def synthesis_nodes(self, n1: int, n2: int) -> tuple[ndarray, ndarray]:
        s = self.params.s_in * np.arange(1, n1 + 1) / n1
        v = self.params.v_max * np.arange(1, n2 + 1) / n2
        grid = [[si, vi] for si in s for vi in v]
        locus = [[self.params.s_star, vi] for vi in v]
        on_locus = np.array([False] * len(grid) + [True] * len(locus))
        return np.array(grid + locus), on_locus


@dataclass(frozen=True)
class MriModel(ControlModel):
    semi_orbit_horizon: float = 40.0

    def locus(self, branch: str | None = None) -> SingularLocus:
        branch = branch or self.default_branch
        if branch == 'horizontal':
            return mri_horizontal_locus(self.params)
        if branch == 'vertical':
            return mri_vertical_locus(self.params)
        raise InvalidConfig(f'Unknown MRI locus branch {branch!r}')

    def saturation_point(self) -> ndarray:
        return mri_saturation_point(self.params)

    def in_target(self, x: ndarray) -> bool:
        return bool(np.hypot(x[0], x[1]) <= self.tolerances.target_ball)

    def target_distance(self, x: ndarray) -> float:
        return float(np.hypot(x[0], x[1]))

    def witness_sequence(self):
        return [(1.0, lambda x: x[0], 1), (0.0, lambda x: x[1], 1)]

    def state_grid(self, n: int) -> ndarray:
        axis = np.linspace(-1, 1, n)
        return np.array([[a, b] for a in axis for b in axis if a ** 2 + b ** 2 <= 1])

    def synthesis_nodes(self, n1: int, n2: int) -> tuple[ndarray, ndarray]:
        x1 = np.linspace(-1, 0, n1)
        x2 = np.linspace(-1, 1, n2)
        grid = [[a, b] for a in x1 for b in x2 if a ** 2 + b ** 2 <= 1]
        level = self.params.horizontal_level
        radius = sqrt(max(1 - level ** 2, 0.0))
        locus = [[a, level] for a in np.linspace(-radius, 0, n1)]
        on_locus = np.array([False] * len(grid) + [True] * len(locus))
        return np.array(grid + locus), on_locus


def build_model(name: str, params: dict | FedBatchParams | MriParams | None = None,
                tolerances: Tolerances | dict | None = None, strict: bool = True) -> ControlModel:
    """
    Builds one of the shipped models
    :param name: str - 'fedbatch' or 'mri'
    :param params: dict or params object - parameter overrides
    :param tolerances: Tolerances or dict of overrides
    :param strict: bool - validate the saturation invariants
    :return: ControlModel
    """
    if not isinstance(tolerances, Tolerances):
        tolerances = Tolerances.from_dict(tolerances)
    if name == 'fedbatch':
        if not isinstance(params, FedBatchParams):
            params = FedBatchParams.from_dict(params)
        return FedBatchModel(name=name, params=params, default_branch='vertical',
                             system=fedbatch_system(params, strict=strict, tolerances=tolerances))
    if name == 'mri':
        if not isinstance(params, MriParams):
            params = MriParams.from_dict(params)
        return MriModel(name=name, params=params, default_branch='horizontal',
                        system=mri_system(params, strict=strict, tolerances=tolerances))
    raise InvalidConfig(f'Unknown model {name!r}, expected one of {MODEL_NAMES}')


# Testing----------------------------------------------------------------
if __name__ == '__main__':
    logging.basicConfig(level=logging.INFO)
    fb = FedBatchParams()
    logger.info('s* = %.6g, v* = %.6g, v_* = %s', fb.s_star, fb.v_star, fedbatch_backward_witness(fb))
    logger.info('x_sat = %s', mri_saturation_point(MriParams()))
