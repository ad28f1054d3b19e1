"""Deterministic Gaussian-smoothing engine.

Expectations E f(x + sqrt(t) xi), xi ~ N(0, 1), are computed with a
probabilists' Gauss-Hermite rule.  On top of that sit the time-invariance
test (a smoothed function that does not move with t is linear), the backward
Kolmogorov residual by central differences, the derivative formula
f'(x) = E[f(x + xi) xi], and least-squares recovery of bilinear and quadratic
forms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from .errors import DomainViolation, SingularGrid
from .functions import BilinearForm, FunctionSpec

DEFAULT_ORDER = 64
FD_RELATIVE_STEP = 1e-4


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    nodes: np.ndarray
    weights: np.ndarray
    order: int

    def expect(self, g) -> float:
        """E g(xi) for a vectorised callable ``g``."""
        return float(np.sum(g(self.nodes) * self.weights))


@lru_cache(maxsize=None)
def gauss_hermite(order: int = DEFAULT_ORDER) -> QuadratureRule:
    """Rule exact for polynomials of degree <= 2*order - 1 under N(0, 1)."""
    if order < 1:
        raise ValueError("order must be positive")
    nodes, weights = np.polynomial.hermite_e.hermegauss(order)
    weights = weights / math.sqrt(2.0 * math.pi)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return QuadratureRule(nodes, weights, order)


def _shifted_values(f: FunctionSpec, x, scale: float, rule: QuadratureRule) -> np.ndarray:
    args = np.atleast_1d(np.asarray(x, float))[:, None] + scale * rule.nodes[None, :]
    ok = f.valid(args)
    if not np.all(ok):
        bad = float(args[~ok].flat[0])
        raise DomainViolation(f"{f.text}: quadrature node {bad!r} leaves the domain", value=bad)
    return f(args)


def _shape_like(x, out: np.ndarray):
    return float(out[0]) if np.ndim(x) == 0 else out


def heat_smooth(f: FunctionSpec, t: float, x, rule: QuadratureRule | None = None):
    """E f(x + sqrt(t) xi); scalar in, scalar out."""
    if t <= 0:
        raise ValueError("t must be positive")
    rule = rule or gauss_hermite()
    vals = _shifted_values(f, x, math.sqrt(t), rule)
    # row-wise sums keep each grid point independent of the others
    return _shape_like(x, np.sum(vals * rule.weights, axis=1))


def time_invariance_curve(f: FunctionSpec, t1: float, t2: float, x_grid,
                          rule: QuadratureRule | None = None) -> np.ndarray:
    if not 0 < t1 < t2:
        raise ValueError("need 0 < t1 < t2")
    x = np.asarray(x_grid, float)
    return np.abs(heat_smooth(f, t1, x, rule) - heat_smooth(f, t2, x, rule))


def time_invariance_defect(f: FunctionSpec, t1: float, t2: float, x_grid,
                           rule: QuadratureRule | None = None) -> float:
    return float(np.max(time_invariance_curve(f, t1, t2, x_grid, rule)))


def kolmogorov_residuals(f: FunctionSpec, T: float, t_grid, x_grid, rule: QuadratureRule | None = None,
                         h_t: float | None = None, h_x: float | None = None) -> np.ndarray:
    """|dg/dt + 1/2 d2g/dx2| for g(t, x) = E f(x + W_T - W_t), on t_grid x x_grid.

    Central differences with h_t = 1e-4 T and h_x = 1e-4 * span(x_grid).
    """
    t = np.asarray(t_grid, float)
    x = np.asarray(x_grid, float)
    h_t = FD_RELATIVE_STEP * T if h_t is None else h_t
    if h_x is None:
        span = float(x.max() - x.min())
        h_x = FD_RELATIVE_STEP * (span if span > 0 else 1.0)
    if np.any(t - h_t <= 0) or np.any(t + h_t >= T):
        raise ValueError("t_grid must lie inside (0, T) with room for the time step")

    def g(tt, xx):
        return heat_smooth(f, T - tt, xx, rule)

    out = np.empty((t.size, x.size))
    for i, ti in enumerate(t):
        dg_dt = (g(ti + h_t, x) - g(ti - h_t, x)) / (2.0 * h_t)
        d2g_dx2 = (g(ti, x + h_x) - 2.0 * g(ti, x) + g(ti, x - h_x)) / (h_x * h_x)
        out[i] = np.abs(dg_dt + 0.5 * d2g_dx2)
    return out


def kolmogorov_residual(f: FunctionSpec, T: float = 1.0, t_grid=None, x_grid=None,
                        rule: QuadratureRule | None = None, h_t: float | None = None,
                        h_x: float | None = None) -> float:
    """sup of :func:`kolmogorov_residuals`; defaults to t in {T/4, T/2, 3T/4}, x in [-2, 2]."""
    if t_grid is None:
        t_grid = np.array([0.25, 0.5, 0.75]) * T
    if x_grid is None:
        x_grid = np.linspace(-2.0, 2.0, 9)
    return float(np.max(kolmogorov_residuals(f, T, t_grid, x_grid, rule, h_t, h_x)))


def smoothed_derivative(f: FunctionSpec, x_grid, rule: QuadratureRule | None = None) -> np.ndarray:
    """E[f(x + xi) xi] at each grid point; constant exactly when f is affine."""
    rule = rule or gauss_hermite()
    x = np.asarray(x_grid, float)
    vals = _shifted_values(f, x, 1.0, rule)
    return np.sum(vals * (rule.nodes * rule.weights), axis=1)


@dataclass(frozen=True)
class BilinearFit:
    a: float
    b: float
    c: float
    d: float
    max_residual: float

    @property
    def form(self) -> BilinearForm:
        return BilinearForm(self.a, self.b, self.c, self.d)

    def to_dict(self) -> dict:
        return {"a": self.a, "b": self.b, "c": self.c, "d": self.d, "max_residual": self.max_residual}


def bilinear_fit(kernel, x_grid, y_grid=None) -> BilinearFit:
    """Least-squares fit of K(x, y) onto {xy, x, y, 1} over the tensor grid."""
    xs = np.asarray(x_grid, float).ravel()
    ys = xs if y_grid is None else np.asarray(y_grid, float).ravel()
    if np.unique(xs).size < 3 or np.unique(ys).size < 3:
        raise SingularGrid("bilinear fit needs at least three distinct values per axis")
    xx, yy = (m.ravel() for m in np.meshgrid(xs, ys, indexing="ij"))
    design = np.column_stack((xx * yy, xx, yy, np.ones_like(xx)))
    if np.linalg.matrix_rank(design) < 4:
        raise SingularGrid("rank-deficient bilinear design")
    values = np.asarray(kernel(xx, yy), float)
    coef, *_ = np.linalg.lstsq(design, values, rcond=None)
    resid = float(np.max(np.abs(values - design @ coef)))
    return BilinearFit(*(float(c) for c in coef), max_residual=resid)


class QuadraticRecovery(NamedTuple):
    coefficient: float
    max_residual: float


def recover_quadratic_coefficient(f: FunctionSpec, x_grid) -> QuadraticRecovery:
    """Regress G(x, x) = f(2x) - 2 f(x) on x^2 through the origin.

    For f = lambda x^2 the coefficient is 2 lambda and the residual vanishes.
    """
    x = np.asarray(x_grid, float).ravel()
    if x.size == 0 or np.any(x == 0):
        raise ValueError("grid must be non-empty and exclude 0")
    gxx = f(2.0 * x) - 2.0 * f(x)
    x2 = x * x
    a = float(np.sum(gxx * x2) / np.sum(x2 * x2))
    return QuadraticRecovery(a, float(np.max(np.abs(gxx - a * x2))))
