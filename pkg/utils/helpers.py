"""
Functions used throughout the toolkit: small linear algebra, finite differences, grids and
loading of the default parameter file.

Author: Prior-Saturation Toolkit developers
Version: 1.0
"""

# Import packages-------------------------------------------
import os
import json
from typing import Callable
import numpy as np
from numpy import ndarray, argmin, sqrt, array, asarray, cos, pi, arange, finfo

APP_ROOT = os.path.dirname(os.path.abspath(__file__))
MACHINE_EPS = finfo(float).eps


# Static functions -----------------------------------------
def det2(a: ndarray, b: ndarray) -> float:
    """
    Determinant of the 2x2 matrix with columns a and b, det(a, b) = a1*b2 - a2*b1
    :param a: array - first column
    :param b: array - second column
    :return: float
    """
    return float(a[0] * b[1] - a[1] * b[0])


def central_jacobian(func: Callable[[ndarray], ndarray], x: ndarray, step_exponent: float = 1 / 3) -> ndarray:
    """
    Jacobian of a map R^n -> R^m by central differences. Column j uses the step
    eps**step_exponent * (1 + |x_j|)
    :param func: callable - map to differentiate
    :param x: array - evaluation point
    :param step_exponent: float - exponent applied to machine epsilon
    :return: array of shape (m, n)
    """
    x = asarray(x, dtype=float)
    columns = []
    for j in range(x.size):
        h = MACHINE_EPS ** step_exponent * (1 + abs(x[j]))
        e = np.zeros_like(x)
        e[j] = h
        columns.append((asarray(func(x + e), dtype=float) - asarray(func(x - e), dtype=float)) / (2 * h))
    return np.stack(columns, axis=-1)


def central_hessian(func: Callable[[ndarray], ndarray], x: ndarray) -> ndarray:
    """
    Second derivatives of a map R^2 -> R^2 by the four-point mixed difference formula.
    Returns H with H[i, j, k] = d^2 func_i / dx_j dx_k
    :param func: callable - map to differentiate
    :param x: array - evaluation point
    :return: array of shape (2, 2, 2)
    """
    x = asarray(x, dtype=float)
    n = x.size
    h = MACHINE_EPS ** 0.25 * (1 + np.abs(x))
    out = np.zeros((2, n, n))
    for j in range(n):
        for k in range(j, n):
            ej = np.zeros(n)
            ek = np.zeros(n)
            ej[j] = h[j]
            ek[k] = h[k]
            value = (asarray(func(x + ej + ek)) - asarray(func(x + ej - ek))
                     - asarray(func(x - ej + ek)) + asarray(func(x - ej - ek))) / (4 * h[j] * h[k])
            out[:, j, k] = value
            out[:, k, j] = value
    return out


def forward_jacobian(func: Callable[[ndarray], ndarray], y: ndarray, f0: ndarray | None = None) -> ndarray:
    """
    Forward-difference Jacobian with step sqrt(eps) * (1 + |y_i|)
    :param func: callable - residual map
    :param y: array - evaluation point
    :param f0: array - residual at y if already known
    :return: square array
    """
    y = asarray(y, dtype=float)
    if f0 is None:
        f0 = asarray(func(y), dtype=float)
    jac = np.empty((f0.size, y.size))
    for i in range(y.size):
        h = sqrt(MACHINE_EPS) * (1 + abs(y[i]))
        trial = y.copy()
        trial[i] += h
        jac[:, i] = (asarray(func(trial), dtype=float) - f0) / h
    return jac


def central_jacobian_scaled(func: Callable[[ndarray], ndarray], y: ndarray, relative_step: float = 1e-6) -> ndarray:
    """
    Central-difference Jacobian with step relative_step * (1 + |y_i|). Used for certificates where
    the residual carries integration noise
    """
    y = asarray(y, dtype=float)
    columns = []
    for i in range(y.size):
        h = relative_step * (1 + abs(y[i]))
        e = np.zeros_like(y)
        e[i] = h
        columns.append((asarray(func(y + e), dtype=float) - asarray(func(y - e), dtype=float)) / (2 * h))
    return np.stack(columns, axis=-1)


def five_point_derivative(samples: dict[int, ndarray], h: float) -> ndarray:
    """
    Central five-point derivative from samples at offsets -2h, -h, h, 2h
    :param samples: dict - maps the integer offset (-2, -1, 1, 2) to the sampled vector
    :param h: float - stencil step
    :return: array
    """
    return (samples[-2] - 8 * samples[-1] + 8 * samples[1] - samples[2]) / (12 * h)


def chebyshev_points(n: int, lower: float, upper: float) -> ndarray:
    """
    Chebyshev-Gauss-Lobatto points on [lower, upper], sorted increasingly
    """
    if n < 2:
        return array([0.5 * (lower + upper)])
    k = arange(n)
    nodes = -cos(pi * k / (n - 1))
    return 0.5 * (lower + upper) + 0.5 * (upper - lower) * nodes


def angle_between(a: ndarray, b: ndarray) -> float:
    """
    Angle in radians between two nonzero vectors, accurate for nearly parallel vectors
    """
    ua = asarray(a, dtype=float) / np.linalg.norm(a)
    ub = asarray(b, dtype=float) / np.linalg.norm(b)
    return float(2 * np.arctan2(np.linalg.norm(ua - ub), np.linalg.norm(ua + ub)))


def find_closest_point(data: ndarray, target: tuple[float, float], aspect_ratio: float = 1) -> int:
    """
    Function to find the closest point in an x-y dataset
    :param data: x-y dataset - numpy array of shape (2, N)
    :param target: tuple - target datapoint
    :param aspect_ratio: float - aspect ratio to correct differently scaled axes
    :return: int
    """
    x_data, y_data = data
    return int(argmin(sqrt(((array(x_data).astype(float) - target[0]) / aspect_ratio) ** 2 +
                           (array(y_data).astype(float) - target[1]) ** 2)))


def parse_grid(grid: str) -> tuple[int, int]:
    """
    Parses a grid description of the form 'n1xn2'
    :param grid: str - e.g. '41x41'
    :return: tuple of ints
    """
    parts = grid.lower().split('x')
    if len(parts) != 2 or not all(p.strip().isdigit() for p in parts):
        raise ValueError(f'Grid must look like 41x41, got {grid!r}')
    n1, n2 = (int(p) for p in parts)
    if n1 < 1 or n2 < 1:
        raise ValueError(f'Grid sizes must be positive, got {grid!r}')
    return n1, n2


def to_builtin(obj):
    """
    Recursively converts numpy scalars and arrays into JSON-serializable python objects
    """
    if isinstance(obj, dict):
        return {str(k): to_builtin(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_builtin(v) for v in obj]
    if isinstance(obj, ndarray):
        return [to_builtin(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        value = float(obj)
        if not np.isfinite(value):
            return str(value)
        return value
    return obj


def get_default_parameters(file_path: str | None = None) -> dict:
    """
    Gets default parameters and tolerances from json file and returns them as a dictionary
    :param file_path: str - optional path of an alternative file
    :return: dict
    """
    if file_path is None:
        file_path = os.path.join(os.path.dirname(APP_ROOT), 'analysis', 'default_parameters.json')
    with open(file_path, 'r') as f:
        return json.load(f)


if __name__ == "__main__":
    print(get_default_parameters()['tolerances'])
