"""Scalar function families, exact equation residuals and the Abel solution triple.

Every family is a small frozen dataclass that evaluates elementwise on numpy
arrays (or returns a float for a scalar argument).  Families have a canonical
textual form such as ``linear:c=2.0`` or ``power:c=0.5`` which is what the CLI
accepts and what reports print.
"""

from __future__ import annotations

import csv
import enum
import itertools
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DomainViolation

EXACT_RTOL = 1e-12
GRID_POINTS = 41


class Domain(enum.Enum):
    ALL_REALS = "all-reals"
    POSITIVE_REALS = "positive-reals"


def _fmt(v: float) -> str:
    return repr(float(v))


class FunctionSpec:
    """Base class of the parametric families.

    Subclasses provide ``_formula`` (vectorised, no domain checks) and, when
    parametrised, ``params``.  Calling a spec checks the domain first and
    raises :class:`DomainViolation` on the first offending argument.
    """

    family = ""
    domain = Domain.ALL_REALS

    def params(self) -> dict[str, float]:
        return {}

    @property
    def text(self) -> str:
        p = self.params()
        if not p:
            return self.family
        return self.family + ":" + ",".join(f"{k}={_fmt(v)}" for k, v in p.items())

    def __str__(self) -> str:
        return self.text

    def valid(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.domain is Domain.POSITIVE_REALS:
            return np.isfinite(x) & (x > 0)
        return np.isfinite(x)

    def __call__(self, x):
        arr = np.asarray(x, dtype=float)
        ok = self.valid(arr)
        if not np.all(ok):
            bad = float(arr[~ok].flat[0]) if arr.ndim else float(arr)
            raise DomainViolation(f"{self.text}: argument {bad!r} outside domain", value=bad)
        out = self._formula(arr)
        return float(out) if np.ndim(out) == 0 else out

    def _formula(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError


@dataclass(frozen=True)
class Zero(FunctionSpec):
    family = "zero"

    def _formula(self, x):
        return np.zeros_like(x)


@dataclass(frozen=True)
class Linear(FunctionSpec):
    c: float
    family = "linear"

    def params(self):
        return {"c": self.c}

    def _formula(self, x):
        return self.c * x


@dataclass(frozen=True)
class Affine(FunctionSpec):
    a: float
    b: float
    family = "affine"

    def params(self):
        return {"a": self.a, "b": self.b}

    def _formula(self, x):
        return self.a * x + self.b


@dataclass(frozen=True)
class Exponential(FunctionSpec):
    c: float
    family = "exponential"

    def params(self):
        return {"c": self.c}

    def _formula(self, x):
        return np.exp(self.c * x)


@dataclass(frozen=True)
class Logarithmic(FunctionSpec):
    c: float
    family = "logarithmic"
    domain = Domain.POSITIVE_REALS

    def params(self):
        return {"c": self.c}

    def _formula(self, x):
        return self.c * np.log(x)


@dataclass(frozen=True)
class Power(FunctionSpec):
    c: float
    family = "power"
    domain = Domain.POSITIVE_REALS

    def params(self):
        return {"c": self.c}

    def _formula(self, x):
        return np.power(x, self.c)


@dataclass(frozen=True)
class Quadratic(FunctionSpec):
    lam: float
    family = "quadratic"

    def params(self):
        return {"lambda": self.lam}

    def _formula(self, x):
        return self.lam * x * x


@dataclass(frozen=True)
class Cubic(FunctionSpec):
    family = "cubic"

    def _formula(self, x):
        return x * x * x


@dataclass(frozen=True)
class AbsoluteValue(FunctionSpec):
    family = "abs"

    def _formula(self, x):
        return np.abs(x)


@dataclass(frozen=True)
class Polynomial(FunctionSpec):
    """``sum(coeffs[k] * x**k)``; coefficients in ascending order."""

    coeffs: tuple[float, ...]
    family = "polynomial"

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(float(c) for c in self.coeffs))
        if not self.coeffs:
            raise ValueError("polynomial needs at least one coefficient")

    def params(self):
        return {f"c{k}": c for k, c in enumerate(self.coeffs)}

    def _formula(self, x):
        return np.polynomial.polynomial.polyval(x, self.coeffs)


@dataclass(frozen=True)
class Tabulated(FunctionSpec):
    """Piecewise-linear function through ``knots``; no extrapolation."""

    knots: tuple[tuple[float, float], ...]
    source: str | None = field(default=None, compare=False)
    family = "tabulated"

    def __post_init__(self):
        knots = tuple((float(x), float(fx)) for x, fx in self.knots)
        if len(knots) < 2:
            raise ValueError("tabulated function needs at least two knots")
        xs = np.array([k[0] for k in knots])
        if not np.all(np.diff(xs) > 0):
            raise ValueError("tabulated knots must be strictly increasing in x")
        object.__setattr__(self, "knots", knots)
        object.__setattr__(self, "_xs", xs)
        object.__setattr__(self, "_fs", np.array([k[1] for k in knots]))

    @property
    def domain(self):
        return Domain.POSITIVE_REALS if self._xs[0] > 0 else Domain.ALL_REALS

    @property
    def text(self):
        if self.source:
            return f"tabulated:@{self.source}"
        return f"tabulated:inline[{len(self.knots)} knots on {_fmt(self._xs[0])}..{_fmt(self._xs[-1])}]"

    def valid(self, x):
        x = np.asarray(x, dtype=float)
        return (x >= self._xs[0]) & (x <= self._xs[-1])

    def crosses_zero(self) -> bool:
        return bool(np.any(self._fs == 0) or (self._fs.min() < 0 < self._fs.max()))

    def _formula(self, x):
        return np.interp(x, self._xs, self._fs)

    @classmethod
    def from_csv(cls, path) -> Tabulated:
        path = Path(path)
        with path.open(newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or not {"x", "fx"} <= set(reader.fieldnames):
                raise ValueError(f"{path}: CSV header must contain columns x,fx")
            knots = [(float(row["x"]), float(row["fx"])) for row in reader]
        return cls(tuple(knots), source=str(path))


def evaluate(spec: FunctionSpec, x):
    return spec(x)


_PARAM_FAMILIES = {
    "linear": (Linear, ("c",)),
    "affine": (Affine, ("a", "b")),
    "exponential": (Exponential, ("c",)),
    "logarithmic": (Logarithmic, ("c",)),
    "power": (Power, ("c",)),
    "quadratic": (Quadratic, ("lambda",)),
}
_BARE_FAMILIES = {"zero": Zero, "cubic": Cubic, "abs": AbsoluteValue, "absolute-value": AbsoluteValue}


def parse_spec(text: str, base_dir=None) -> FunctionSpec:
    """Parse the canonical textual form (``family[:k=v,...]``) into a spec.

    ``tabulated:@file.csv`` paths are resolved relative to ``base_dir`` when
    given and not absolute.
    """
    text = text.strip()
    family, _, rest = text.partition(":")
    family = family.strip().lower()
    if family in _BARE_FAMILIES:
        if rest.strip():
            raise ValueError(f"{family} takes no parameters: {text!r}")
        return _BARE_FAMILIES[family]()
    if family == "tabulated":
        if not rest.startswith("@"):
            raise ValueError(f"tabulated spec must be tabulated:@file.csv, got {text!r}")
        path = Path(rest[1:])
        if base_dir is not None and not path.is_absolute():
            path = Path(base_dir) / path
        return Tabulated.from_csv(path)

    params = {}
    for item in filter(None, (s.strip() for s in rest.split(","))):
        key, sep, value = item.partition("=")
        if not sep:
            raise ValueError(f"malformed parameter {item!r} in {text!r}")
        params[key.strip().lower()] = float(value)

    if family == "polynomial":
        keys = sorted(params, key=lambda k: int(k[1:]) if k[:1] == "c" and k[1:].isdigit() else -1)
        if not keys or any(not (k[:1] == "c" and k[1:].isdigit()) for k in keys):
            raise ValueError(f"polynomial parameters must be c0, c1, ...: {text!r}")
        coeffs = [0.0] * (int(keys[-1][1:]) + 1)
        for k in keys:
            coeffs[int(k[1:])] = params[k]
        return Polynomial(tuple(coeffs))
    if family not in _PARAM_FAMILIES:
        raise ValueError(f"unknown function family {family!r}")
    cls, names = _PARAM_FAMILIES[family]
    if set(params) != set(names):
        raise ValueError(f"{family} expects parameters {', '.join(names)}; got {text!r}")
    return cls(*(params[n] for n in names))


# --- two-argument evaluators -------------------------------------------------


@dataclass(frozen=True)
class AbelKernel:
    """K(x, y) = f(x + y) - h(x - y)."""

    f: FunctionSpec
    h: FunctionSpec

    @property
    def text(self):
        return f"K[f={self.f.text}; h={self.h.text}]"

    def valid(self, x, y):
        x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
        return self.f.valid(x + y) & self.h.valid(x - y)

    def __call__(self, x, y):
        return self.f(np.add(x, y)) - self.h(np.subtract(x, y))


@dataclass(frozen=True)
class QuadraticKernel:
    """G(x, y) = f(x + y) - f(x) - f(y)."""

    f: FunctionSpec

    @property
    def text(self):
        return f"G[f={self.f.text}]"

    def valid(self, x, y):
        x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
        return self.f.valid(x + y) & self.f.valid(x) & self.f.valid(y)

    def __call__(self, x, y):
        return self.f(np.add(x, y)) - self.f(x) - self.f(y)


@dataclass(frozen=True)
class BilinearForm:
    a: float
    b: float
    c: float
    d: float

    @property
    def text(self):
        return f"bilinear:a={_fmt(self.a)},b={_fmt(self.b)},c={_fmt(self.c)},d={_fmt(self.d)}"

    def valid(self, x, y):
        x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
        return np.isfinite(x) & np.isfinite(y)

    def __call__(self, x, y):
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        out = self.a * x * y + self.b * x + self.c * y + self.d
        return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class MonomialKernel:
    """coef * x**px * y**py, a non-bilinear two-argument falsifier."""

    coef: float
    px: int
    py: int

    @property
    def text(self):
        return f"monomial:coef={_fmt(self.coef)},px={self.px},py={self.py}"

    def valid(self, x, y):
        x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
        return np.isfinite(x) & np.isfinite(y)

    def __call__(self, x, y):
        out = self.coef * np.asarray(x, float) ** self.px * np.asarray(y, float) ** self.py
        return float(out) if np.ndim(out) == 0 else out


# --- equations and residuals --------------------------------------------------


class EquationKind(enum.Enum):
    CAUCHY_ADDITIVE = "cauchy-additive"
    CAUCHY_EXPONENTIAL = "cauchy-exponential"
    CAUCHY_LOGARITHMIC = "cauchy-logarithmic"
    CAUCHY_POWER = "cauchy-power"
    CONDITIONAL_CAUCHY_SQUARES = "conditional-cauchy-squares"
    ABEL = "abel"
    QUADRATIC = "quadratic"

    @property
    def domain(self) -> Domain:
        if self in (EquationKind.CAUCHY_LOGARITHMIC, EquationKind.CAUCHY_POWER):
            return Domain.POSITIVE_REALS
        return Domain.ALL_REALS

    @property
    def arity(self) -> int:
        return 3 if self is EquationKind.ABEL else 1


def default_grid(domain: Domain = Domain.ALL_REALS, n: int = GRID_POINTS) -> np.ndarray:
    if domain is Domain.POSITIVE_REALS:
        return np.geomspace(0.1, 10.0, n)
    return np.linspace(-5.0, 5.0, n)


def pair_grid(points) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    return np.array(list(itertools.product(pts, pts)))


def default_pair_grid(kind: EquationKind) -> np.ndarray:
    return pair_grid(default_grid(kind.domain))


@dataclass(frozen=True)
class ResidualReport:
    equation: EquationKind
    grid_description: str
    n_points: int
    sup_abs_residual: float
    mean_abs_residual: float
    worst_point: tuple[float, float]
    scale: float
    degenerate: bool = False

    def exact(self, rtol: float = EXACT_RTOL) -> bool:
        """True when the residual vanishes up to ``rtol * (1 + scale)``."""
        return self.sup_abs_residual <= rtol * (1.0 + self.scale)

    def to_dict(self) -> dict:
        return {
            "equation": self.equation.value,
            "grid": self.grid_description,
            "n_points": self.n_points,
            "sup_abs_residual": self.sup_abs_residual,
            "mean_abs_residual": self.mean_abs_residual,
            "worst_point": list(self.worst_point),
            "scale": self.scale,
            "exact": self.exact(),
            "degenerate": self.degenerate,
        }


def _unpack(kind: EquationKind, specs):
    if kind.arity == 3:
        if isinstance(specs, FunctionSpec) or len(specs) != 3:
            raise ValueError("the Abel equation takes the triple (f, h, g)")
        return tuple(specs)
    if isinstance(specs, FunctionSpec):
        return (specs,)
    if len(specs) != 1:
        raise ValueError(f"{kind.value} takes a single function")
    return tuple(specs)


def pointwise_residual(kind: EquationKind, specs, x, y):
    """Return ``(residual, scale)`` arrays: LHS - RHS and the largest |term|."""
    fns = _unpack(kind, specs)
    f = fns[0]
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if kind is EquationKind.CAUCHY_ADDITIVE:
        terms = [f(x + y), f(x), f(y)]
        res = terms[0] - terms[1] - terms[2]
    elif kind is EquationKind.CAUCHY_EXPONENTIAL:
        terms = [f(x + y), f(x), f(y)]
        res = terms[0] - terms[1] * terms[2]
        terms.append(terms[1] * terms[2])
    elif kind is EquationKind.CAUCHY_LOGARITHMIC:
        terms = [f(x), f(y), f(x * y)]
        res = terms[0] + terms[1] - terms[2]
    elif kind is EquationKind.CAUCHY_POWER:
        terms = [f(x * y), f(x), f(y)]
        res = terms[0] - terms[1] * terms[2]
        terms.append(terms[1] * terms[2])
    elif kind is EquationKind.CONDITIONAL_CAUCHY_SQUARES:
        terms = [f(x * x - y * y), f(x * x), f(y * y)]
        res = terms[0] - terms[1] + terms[2]
    elif kind is EquationKind.ABEL:
        f, h, g = fns
        terms = [f(x + y), h(x - y), g(x * y)]
        res = terms[0] - terms[1] - terms[2]
    elif kind is EquationKind.QUADRATIC:
        terms = [f(x + y), f(x - y), 2.0 * f(x), 2.0 * f(y)]
        res = terms[0] + terms[1] - terms[2] - terms[3]
    else:  # pragma: no cover
        raise ValueError(kind)
    scale = np.max(np.abs(np.stack(np.broadcast_arrays(*terms))), axis=0)
    return res, scale


def _is_degenerate(kind: EquationKind, fns) -> bool:
    if kind not in (EquationKind.CAUCHY_EXPONENTIAL, EquationKind.CAUCHY_POWER):
        return False
    f = fns[0]
    return isinstance(f, Zero) or (isinstance(f, Tabulated) and f.crosses_zero())


def residual(kind: EquationKind, specs, pair_grid=None, description: str | None = None) -> ResidualReport:
    """Evaluate LHS - RHS of ``kind`` on a grid of (x, y) pairs.

    ``specs`` is one FunctionSpec, or the triple ``(f, h, g)`` for the Abel
    equation.  With no grid, the 41 x 41 default grid of the equation's domain
    is used.
    """
    if pair_grid is None:
        pair_grid = default_pair_grid(kind)
        pts = default_grid(kind.domain)
        description = description or f"{len(pts)}x{len(pts)} {kind.domain.value} default grid"
    pairs = np.asarray(pair_grid, dtype=float).reshape(-1, 2)
    if pairs.size == 0:
        raise ValueError("empty pair grid")
    x, y = pairs[:, 0], pairs[:, 1]
    if kind.domain is Domain.POSITIVE_REALS and not (np.all(x > 0) and np.all(y > 0)):
        bad = float(pairs[~((x > 0) & (y > 0))][0, 0])
        raise DomainViolation(f"{kind.value} is posed on positive reals only", value=bad)
    res, scale = pointwise_residual(kind, specs, x, y)
    absres = np.abs(res)
    worst = int(np.argmax(absres))
    if description is None:
        description = (
            f"{len(pairs)} pairs, x in [{_fmt(x.min())}, {_fmt(x.max())}], "
            f"y in [{_fmt(y.min())}, {_fmt(y.max())}]"
        )
    return ResidualReport(
        equation=kind,
        grid_description=description,
        n_points=len(pairs),
        sup_abs_residual=float(absres[worst]),
        mean_abs_residual=float(absres.mean()),
        worst_point=(float(x[worst]), float(y[worst])),
        scale=float(scale.max()),
        degenerate=_is_degenerate(kind, _unpack(kind, specs)),
    )


# --- Abel triple --------------------------------------------------------------


@dataclass(frozen=True)
class AbelTriple:
    a: float
    d: float
    h0: float

    @property
    def text(self):
        return f"abel:a={_fmt(self.a)},d={_fmt(self.d)},h0={_fmt(self.h0)}"


def _quadratic_plus_constant(lam: float, const: float) -> FunctionSpec:
    if lam == 0 and const == 0:
        return Zero()
    if const == 0:
        return Quadratic(lam)
    return Polynomial((const, 0.0, lam))


def _affine(a: float, b: float) -> FunctionSpec:
    if a == 0 and b == 0:
        return Zero()
    if b == 0:
        return Linear(a)
    return Affine(a, b)


def expand_abel_triple(t: AbelTriple) -> tuple[FunctionSpec, FunctionSpec, FunctionSpec]:
    """Return ``(f, h, g)`` with g = a x + d, h = a/4 x^2 + h0, f = h + d."""
    quarter = t.a / 4.0
    f = _quadratic_plus_constant(quarter, t.h0 + t.d)
    h = _quadratic_plus_constant(quarter, t.h0)
    g = _affine(t.a, t.d)
    return f, h, g


def oddness_defect(spec: FunctionSpec, grid) -> float:
    """sup |f(x) + f(-x) - 2 f(0)| over a grid symmetric about zero."""
    if spec.domain is not Domain.ALL_REALS:
        raise DomainViolation(f"{spec.text}: oddness needs a domain symmetric about 0")
    g = np.sort(np.asarray(grid, dtype=float))
    if g.size == 0 or not np.allclose(g, -g[::-1], rtol=0.0, atol=1e-12):
        raise ValueError("grid must be symmetric about 0")
    return float(np.max(np.abs(spec(g) + spec(-g) - 2.0 * spec(0.0))))
