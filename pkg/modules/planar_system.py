"""
Planar control-affine systems x' = f(x) + u g(x) and the bracket-based scalar fields used to
locate singular arcs: Lie brackets, the collinearity and singular determinants, the decomposition
of [f, g] in the frame (f, g) and the singular feedback.

Author: Prior-Saturation Toolkit developers
Version: 1.0
"""

# Import packages-------------------------------------------
import logging
import dataclasses
from dataclasses import dataclass, field
from typing import Callable
import numpy as np
from numpy import ndarray, asarray, einsum
from numpy.linalg import norm

# Import functions from other scripts-----------------------
from utils.helpers import det2, central_jacobian, central_hessian, get_default_parameters
from modules.exceptions import (DomainError, DerivativeUnavailable, CollinearityDegenerate,
                                LegendreDegenerate, InvalidConfig)

# Global variables------------------------------------------
logger = logging.getLogger(__name__)
DEFAULT_TOLERANCES = get_default_parameters()['tolerances']
BRACKET_IDS = ('FG', 'FFG', 'GFG')


# Classes -------------------------------------------------
@dataclass(frozen=True)
class Tolerances:
    """
    Every numerical tolerance used by the toolkit. Values default to the tolerances section of
    analysis/default_parameters.json
    """
    degeneracy: float = DEFAULT_TOLERANCES['degeneracy']
    locus: float = DEFAULT_TOLERANCES['locus']
    rtol: float = DEFAULT_TOLERANCES['rtol']
    atol: float = DEFAULT_TOLERANCES['atol']
    method: str = DEFAULT_TOLERANCES['method']
    newton_tol: float = DEFAULT_TOLERANCES['newton_tol']
    newton_max_iter: int = DEFAULT_TOLERANCES['newton_max_iter']
    max_condition: float = DEFAULT_TOLERANCES['max_condition']
    nonzero: float = DEFAULT_TOLERANCES['nonzero']
    invertible_condition: float = DEFAULT_TOLERANCES['invertible_condition']
    event_state: float = DEFAULT_TOLERANCES['event_state']
    target_ball: float = DEFAULT_TOLERANCES['target_ball']
    horizon: float = DEFAULT_TOLERANCES['horizon']

    def __post_init__(self):
        for f in dataclasses.fields(self):
            value = getattr(self, f.name)
            if f.name == 'method':
                if value not in ('RK45', 'DOP853', 'RK23'):
                    raise InvalidConfig(f'Unsupported integration method {value!r}')
                continue
            if not np.isfinite(value) or value <= 0:
                raise InvalidConfig(f'Tolerance {f.name} must be positive and finite, got {value}')

    @classmethod
    def from_dict(cls, overrides: dict | None = None) -> 'Tolerances':
        """
        Builds tolerances from a dictionary of overrides. Unknown keys are rejected
        :param overrides: dict - tolerance name to value
        :return: Tolerances
        """
        overrides = dict(overrides or {})
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(overrides) - known
        if unknown:
            raise InvalidConfig(f'Unknown tolerance keys: {sorted(unknown)}')
        if 'newton_max_iter' in overrides:
            overrides['newton_max_iter'] = int(overrides['newton_max_iter'])
        return cls(**overrides)

    def replace(self, **changes) -> 'Tolerances':
        return dataclasses.replace(self, **changes)

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass(frozen=True)
class VectorField2:
    """
    Smooth vector field on the plane. Jacobian and hessian are analytic when supplied, otherwise
    they are built by central differences (unless allow_fd is False).
    The hessian is returned as an array H of shape (2, 2, 2) with H[i] the Hessian of component i.
    """
    func: Callable[[ndarray], ndarray]
    jacobian: Callable[[ndarray], ndarray] | None = None
    hessian: Callable[[ndarray], ndarray] | None = None
    allow_fd: bool = True
    name: str = ''

    def __call__(self, x: ndarray) -> ndarray:
        return asarray(self.func(x), dtype=float)

    def jac(self, x: ndarray) -> ndarray:
        if self.jacobian is not None:
            return asarray(self.jacobian(x), dtype=float)
        if not self.allow_fd:
            raise DerivativeUnavailable(f'Field {self.name or "?"} has no jacobian')
        return central_jacobian(self.func, asarray(x, dtype=float))

    def hess(self, x: ndarray) -> ndarray:
        if self.hessian is not None:
            return asarray(self.hessian(x), dtype=float)
        if not self.allow_fd:
            raise DerivativeUnavailable(f'Field {self.name or "?"} has no hessian')
        if self.jacobian is not None:
            # Differentiating the analytic jacobian, H[i, j, k] = d J[i, j] / dx_k
            return central_jacobian(self.jacobian, asarray(x, dtype=float))
        return central_hessian(self.func, asarray(x, dtype=float))

    @classmethod
    def constant(cls, value: tuple[float, float], name: str = '') -> 'VectorField2':
        c = asarray(value, dtype=float)
        return cls(func=lambda x: c.copy(),
                   jacobian=lambda x: np.zeros((2, 2)),
                   hessian=lambda x: np.zeros((2, 2, 2)),
                   name=name)


@dataclass(frozen=True)
class PlanarAffineSystem:
    """
    Single-input planar control-affine system x' = f(x) + u g(x), |u| <= 1.
    domain is an optional box ((lo1, hi1), (lo2, hi2)); region is an optional extra constraint
    c(x) >= 0 (e.g. the unit disk).
    """
    f: VectorField2
    g: VectorField2
    domain: tuple[tuple[float, float], tuple[float, float]] | None = None
    region: Callable[[ndarray], float] | None = None
    name: str = 'system'
    tolerances: Tolerances = field(default_factory=Tolerances)

    def domain_margin(self, x: ndarray) -> float:
        """
        Signed margin to the domain boundary, >= 0 inside
        :param x: array - state
        :return: float
        """
        x = asarray(x, dtype=float)
        margins = [np.inf]
        if self.domain is not None:
            for i, (lo, hi) in enumerate(self.domain):
                margins.extend([x[i] - lo, hi - x[i]])
        if self.region is not None:
            margins.append(float(self.region(x)))
        return float(min(margins))

    def in_domain(self, x: ndarray, slack: float = 1e-12) -> bool:
        x = asarray(x, dtype=float)
        if x.shape != (2,) or not np.all(np.isfinite(x)):
            return False
        return self.domain_margin(x) >= -slack * (1 + norm(x))

    def check_domain(self, x: ndarray) -> ndarray:
        x = asarray(x, dtype=float)
        if not self.in_domain(x):
            raise DomainError(f'Point {x} lies outside the domain of {self.name}')
        return x

    def dynamics(self, x: ndarray, u: float) -> ndarray:
        return self.f(x) + u * self.g(x)

    def with_tolerances(self, tolerances: Tolerances) -> 'PlanarAffineSystem':
        return dataclasses.replace(self, tolerances=tolerances)


@dataclass(frozen=True)
class SingularLocus:
    """
    One-to-one parametrization tau -> zeta(tau) of a branch of the singular locus over the
    interval J = (lower, upper)
    """
    zeta: Callable[[float], ndarray]
    interval: tuple[float, float]
    branch: str

    def __call__(self, tau: float) -> ndarray:
        return asarray(self.zeta(tau), dtype=float)

    @property
    def length(self) -> float:
        return float(self.interval[1] - self.interval[0])

    def samples(self, n: int) -> tuple[ndarray, ndarray]:
        taus = np.linspace(self.interval[0], self.interval[1], n)
        return taus, np.array([self(t) for t in taus])

    def max_singular_det(self, sys: PlanarAffineSystem, n: int = 21) -> float:
        """
        Largest |delta_SA| over n samples, used to check that the parametrization stays on the locus
        """
        _, points = self.samples(n)
        return max(abs(singular_det(sys, x)) for x in points)


# Static functions -----------------------------------------
def _fields(sys: PlanarAffineSystem, x: ndarray) -> tuple[ndarray, ndarray]:
    return sys.f(x), sys.g(x)


def _bracket_fg(sys: PlanarAffineSystem, x: ndarray) -> tuple[ndarray, ndarray]:
    """
    [f, g](x) and its jacobian, the latter through the product rule on the field hessians
    """
    f, g = _fields(sys, x)
    Df, Dg = sys.f.jac(x), sys.g.jac(x)
    fg = Dg @ f - Df @ g
    Hf, Hg = sys.f.hess(x), sys.g.hess(x)
    Dfg = einsum('ikj,k->ij', Hg, f) + Dg @ Df - einsum('ikj,k->ij', Hf, g) - Df @ Dg
    return fg, Dfg


def lie_bracket(sys: PlanarAffineSystem, pair: str, x: ndarray) -> ndarray:
    """
    Lie bracket [a, b](x) = Db(x) a(x) - Da(x) b(x) for pair FG = [f, g], FFG = [f, [f, g]] and
    GFG = [g, [f, g]]
    :param sys: PlanarAffineSystem
    :param pair: str - one of FG, FFG, GFG
    :param x: array - state
    :return: array of shape (2,)
    """
    pair = pair.upper()
    if pair not in BRACKET_IDS:
        raise ValueError(f'Unknown bracket {pair!r}, expected one of {BRACKET_IDS}')
    x = sys.check_domain(x)
    if pair == 'FG':
        f, g = _fields(sys, x)
        return sys.g.jac(x) @ f - sys.f.jac(x) @ g
    fg, Dfg = _bracket_fg(sys, x)
    if pair == 'FFG':
        return Dfg @ sys.f(x) - sys.f.jac(x) @ fg
    return Dfg @ sys.g(x) - sys.g.jac(x) @ fg


def all_brackets(sys: PlanarAffineSystem, x: ndarray) -> dict[str, ndarray]:
    """
    f, g and the three brackets at x in one pass
    :return: dict with keys F, G, FG, FFG, GFG
    """
    x = sys.check_domain(x)
    f, g = _fields(sys, x)
    fg, Dfg = _bracket_fg(sys, x)
    return {'F': f, 'G': g, 'FG': fg,
            'FFG': Dfg @ f - sys.f.jac(x) @ fg,
            'GFG': Dfg @ g - sys.g.jac(x) @ fg}


def collinearity_det(sys: PlanarAffineSystem, x: ndarray) -> float:
    """
    delta_0(x) = det(f(x), g(x))
    """
    x = sys.check_domain(x)
    return det2(sys.f(x), sys.g(x))


def singular_det(sys: PlanarAffineSystem, x: ndarray) -> float:
    """
    delta_SA(x) = det(g(x), [f, g](x))
    """
    x = sys.check_domain(x)
    return det2(sys.g(x), lie_bracket(sys, 'FG', x))


def degeneracy_threshold(sys: PlanarAffineSystem, x: ndarray) -> float:
    """
    Scale-aware collinearity guard tol * (1 + |f| |g|)
    """
    return sys.tolerances.degeneracy * (1 + norm(sys.f(x)) * norm(sys.g(x)))


def alpha_beta(sys: PlanarAffineSystem, x: ndarray) -> tuple[float, float]:
    """
    Coefficients of [f, g] = alpha f + beta g. Only defined off the collinearity set
    :param sys: PlanarAffineSystem
    :param x: array - state
    :return: (alpha, beta)
    """
    x = sys.check_domain(x)
    f, g = _fields(sys, x)
    fg = lie_bracket(sys, 'FG', x)
    delta_0 = det2(f, g)
    if abs(delta_0) <= degeneracy_threshold(sys, x):
        raise CollinearityDegenerate(f'f and g are collinear at {x} (delta_0={delta_0:.3e})')
    return -det2(g, fg) / delta_0, det2(f, fg) / delta_0


def legendre_clebsch_margin(sys: PlanarAffineSystem, x: ndarray) -> float:
    """
    det(g, [g, [f, g]])(x). Positive values certify the strict Legendre-Clebsch condition
    """
    x = sys.check_domain(x)
    return det2(sys.g(x), lie_bracket(sys, 'GFG', x))


def singular_feedback(sys: PlanarAffineSystem, x: ndarray) -> float:
    """
    psi(x) = -det(g, [f, [f, g]]) / det(g, [g, [f, g]]). On the singular locus this is the singular control
    :param sys: PlanarAffineSystem
    :param x: array - state
    :return: float
    """
    b = all_brackets(sys, x)
    denominator = det2(b['G'], b['GFG'])
    if abs(denominator) <= sys.tolerances.degeneracy * (1 + norm(b['G']) * norm(b['GFG'])):
        raise LegendreDegenerate(f'det(g, [g,[f,g]]) vanishes at {x}')
    return -det2(b['G'], b['FFG']) / denominator


def locus_side(sys: PlanarAffineSystem, x: ndarray) -> int:
    """
    +1 on Delta_SA^+ (delta_SA > 0), -1 on Delta_SA^-, 0 on the singular locus within the locus tolerance
    """
    value = singular_det(sys, x)
    if abs(value) <= sys.tolerances.locus:
        return 0
    return 1 if value > 0 else -1


def is_steady_state_singular(sys: PlanarAffineSystem, x: ndarray) -> bool:
    """
    True at points of Delta_SA intersected with Delta_0 where g does not vanish. There f + u g = 0
    for some u and the point is an equilibrium of a constant control
    """
    x = sys.check_domain(x)
    if norm(sys.g(x)) <= sys.tolerances.degeneracy:
        return False
    return (abs(singular_det(sys, x)) <= sys.tolerances.locus
            and abs(collinearity_det(sys, x)) <= max(sys.tolerances.locus, degeneracy_threshold(sys, x)))


def project_on_locus(sys: PlanarAffineSystem, x: ndarray, direction: ndarray) -> ndarray:
    """
    Moves x along direction until delta_SA vanishes, by Newton steps on the scalar delta_SA.
    Used to place sample points exactly on the locus
    """
    x = asarray(x, dtype=float).copy()
    d = asarray(direction, dtype=float)
    for _ in range(50):
        value = singular_det(sys, x)
        if abs(value) <= sys.tolerances.locus:
            return x
        h = 1e-7 * (1 + norm(x))
        slope = (singular_det(sys, x + h * d) - singular_det(sys, x - h * d)) / (2 * h)
        if slope == 0:
            break
        x = x - value / slope * d
    logger.debug('Locus projection did not reach the tolerance at %s', x)
    return x


# Testing-----------------------------------------------------
if __name__ == '__main__':
    logging.basicConfig(level=logging.INFO)
    gamma, Gamma = 0.1, 0.5
    mri = PlanarAffineSystem(f=VectorField2(lambda x: np.array([-Gamma * x[0], gamma * (1 - x[1])])),
                             g=VectorField2(lambda x: np.array([-x[1], x[0]])))
    logger.info('[f,g](1,1) = %s', lie_bracket(mri, 'FG', np.array([1.0, 1.0])))
