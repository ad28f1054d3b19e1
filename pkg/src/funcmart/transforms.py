"""Transformed processes X_t = T(f; W_t) for each martingale characterisation.

Domain violations (a log of a non-positive value, an argument outside a
tabulated range) are not raised here: the process comes back flagged
``degenerate`` together with the first offending (path, time) as witness,
because a failed premise is itself a verdict on the candidate.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainViolation
from .functions import AbelKernel, FunctionSpec, QuadraticKernel, _fmt
from .simulate import PathEnsemble

ZERO_ATOL = 1e-12


def _eval_univariate(f: FunctionSpec, arg: np.ndarray, take_log: bool):
    ok = f.valid(arg)
    vals = np.full(arg.shape, np.nan)
    if np.any(ok):
        vals[ok] = f(arg[ok])
    ok &= np.isfinite(vals)
    if take_log:
        ok &= vals > 0
        out = np.full(arg.shape, np.nan)
        out[ok] = np.log(vals[ok])
        return out, ok
    return vals, ok


def _eval_kernel(kernel, a, b):
    a, b = np.broadcast_arrays(np.asarray(a, float), np.asarray(b, float))
    ok = kernel.valid(a, b)
    vals = np.full(a.shape, np.nan)
    if np.any(ok):
        vals[ok] = kernel(a[ok], b[ok])
    ok &= np.isfinite(vals)
    return vals, ok


class Transform:
    """A map w -> X built from a candidate (one function or a kernel)."""

    name = ""
    bivariate = False

    @property
    def label(self) -> str:
        return self.name

    def __str__(self):
        return self.label

    def coerce(self, target):
        if self.bivariate:
            if isinstance(target, tuple):
                return AbelKernel(target[0], target[1])
            if isinstance(target, FunctionSpec) or not callable(getattr(target, "valid", None)):
                raise TypeError(f"{self.name} needs a two-argument kernel")
            return target
        if not isinstance(target, FunctionSpec):
            raise TypeError(f"{self.name} needs a FunctionSpec")
        return target

    def evaluate(self, target, w):
        """Return ``(values, valid_mask)``; invalid entries hold NaN."""
        raise NotImplementedError

    def core(self, target, u):
        """Additive core A with X_t - X_s = A(W_t - W_s) for true solutions."""
        return self.evaluate(target, u)


@dataclass(frozen=True)
class FofW(Transform):
    name = "FofW"

    def evaluate(self, f, w):
        return _eval_univariate(f, np.asarray(w, float), take_log=False)


@dataclass(frozen=True)
class LogFofW(Transform):
    name = "LogFofW"

    def evaluate(self, f, w):
        return _eval_univariate(f, np.asarray(w, float), take_log=True)


@dataclass(frozen=True)
class FofExpW(Transform):
    name = "FofExpW"

    def evaluate(self, f, w):
        return _eval_univariate(f, np.exp(np.asarray(w, float)), take_log=False)


@dataclass(frozen=True)
class LogFofExpW(Transform):
    name = "LogFofExpW"

    def evaluate(self, f, w):
        return _eval_univariate(f, np.exp(np.asarray(w, float)), take_log=True)


@dataclass(frozen=True)
class ShiftScale(Transform):
    x0: float = 0.0
    sigma: float = 1.0
    name = "ShiftScale"

    @property
    def label(self):
        return f"ShiftScale(x0={_fmt(self.x0)},sigma={_fmt(self.sigma)})"

    def evaluate(self, g, w):
        return _eval_univariate(g, self.x0 + self.sigma * np.asarray(w, float), take_log=False)

    def core(self, g, u):
        return _eval_univariate(g, self.sigma * np.asarray(u, float), take_log=False)


@dataclass(frozen=True)
class KLeft(Transform):
    """X_t = K(W_t, y)."""

    y: float = 0.0
    name = "KLeft"
    bivariate = True

    @property
    def label(self):
        return f"KLeft(y={_fmt(self.y)})"

    def evaluate(self, kernel, w):
        return _eval_kernel(kernel, w, self.y)

    def core(self, kernel, u):
        vals, ok = _eval_kernel(kernel, u, self.y)
        base, ok0 = _eval_kernel(kernel, 0.0, self.y)
        return vals - base, ok & ok0


@dataclass(frozen=True)
class KRight(Transform):
    """X_t = K(x, W_t)."""

    x: float = 0.0
    name = "KRight"
    bivariate = True

    @property
    def label(self):
        return f"KRight(x={_fmt(self.x)})"

    def evaluate(self, kernel, w):
        return _eval_kernel(kernel, self.x, w)

    def core(self, kernel, u):
        vals, ok = _eval_kernel(kernel, self.x, u)
        base, ok0 = _eval_kernel(kernel, self.x, 0.0)
        return vals - base, ok & ok0


@dataclass(frozen=True)
class GLeft(KLeft):
    """X_t = G(W_t, y) with G(x, y) = f(x + y) - f(x) - f(y)."""

    name = "GLeft"
    bivariate = False

    @property
    def label(self):
        return f"GLeft(y={_fmt(self.y)})"

    def evaluate(self, f, w):
        return super().evaluate(QuadraticKernel(f), w)

    def core(self, f, u):
        return super().core(QuadraticKernel(f), u)


@dataclass(frozen=True)
class GRight(KRight):
    """X_t = G(x, W_t) with G(x, y) = f(x + y) - f(x) - f(y)."""

    name = "GRight"
    bivariate = False

    @property
    def label(self):
        return f"GRight(x={_fmt(self.x)})"

    def evaluate(self, f, w):
        return super().evaluate(QuadraticKernel(f), w)

    def core(self, f, u):
        return super().core(QuadraticKernel(f), u)


_SIMPLE = {"fofw": FofW, "log-fofw": LogFofW, "fofexpw": FofExpW, "log-fofexpw": LogFofExpW}
_PARAMETRISED = {
    "shift-scale": (ShiftScale, ("x0", "sigma")),
    "kleft": (KLeft, ("y",)),
    "kright": (KRight, ("x",)),
    "gleft": (GLeft, ("y",)),
    "gright": (GRight, ("x",)),
}


def parse_transform(text: str) -> Transform:
    """Parse CLI forms such as ``fofw``, ``log-fofexpw``, ``shift-scale:x0=1,sigma=2``."""
    name, _, rest = text.strip().lower().partition(":")
    if name in _SIMPLE:
        return _SIMPLE[name]()
    if name not in _PARAMETRISED:
        raise ValueError(f"unknown transform {text!r}")
    cls, names = _PARAMETRISED[name]
    params = {}
    for item in filter(None, (s.strip() for s in rest.split(","))):
        k, _, v = item.partition("=")
        params[k.strip()] = float(v)
    if not set(params) <= set(names):
        raise ValueError(f"{name} accepts {', '.join(names)}")
    return cls(**params)


@dataclass(frozen=True, eq=False)
class TransformedProcess:
    transform: Transform
    target: object
    source: PathEnsemble
    values: np.ndarray
    time0: float
    degenerate: bool
    witness: dict | None = field(default=None)

    @property
    def conditioning(self) -> np.ndarray:
        return self.source.values

    @property
    def times(self) -> tuple[float, ...]:
        return self.source.config.time_grid

    @property
    def candidate(self) -> str:
        return self.target.text


def build(transform: Transform, target, ensemble: PathEnsemble) -> TransformedProcess:
    target = transform.coerce(target)
    w = ensemble.values
    values, ok = transform.evaluate(target, w)
    v0, ok0 = transform.evaluate(target, np.zeros(1))
    witness = None
    if not np.all(ok):
        i, k = np.unravel_index(int(np.argmin(ok.ravel())), ok.shape)
        witness = {"path": int(i), "time": ensemble.config.time_grid[k], "w": float(w[i, k])}
    elif not ok0[0]:
        witness = {"path": None, "time": 0.0, "w": 0.0}
    values.setflags(write=False)
    return TransformedProcess(
        transform=transform,
        target=target,
        source=ensemble,
        values=values,
        time0=float(v0[0]),
        degenerate=witness is not None,
        witness=witness,
    )


def apply(transform: Transform, target, w) -> np.ndarray:
    """Evaluate the transform on arbitrary values, raising on a domain violation."""
    target = transform.coerce(target)
    values, ok = transform.evaluate(target, np.asarray(w, float))
    if not np.all(ok):
        bad = float(np.asarray(w, float)[~ok].flat[0])
        raise DomainViolation(f"{transform.label} of {target.text} undefined at w={bad!r}", value=bad)
    return values


def zero_at_zero(proc: TransformedProcess, atol: float = ZERO_ATOL) -> bool:
    """Whether the transform vanishes at the time-0 value W_0 = 0."""
    return bool(np.isfinite(proc.time0) and abs(proc.time0) <= atol)


def continuity_defect(transform: Transform, target, lo: float = -5.0, hi: float = 5.0,
                      n: int = 2001) -> dict:
    """Largest jump of w -> T(w) on a grid and on its twofold refinement.

    Sampled paths cannot show right-continuity, so continuity of the map
    itself is checked: for a continuous map the largest jump shrinks with the
    spacing, for a discontinuous one it does not.
    """
    target = transform.coerce(target)
    coarse, ok_c = transform.evaluate(target, np.linspace(lo, hi, n))
    fine, ok_f = transform.evaluate(target, np.linspace(lo, hi, 2 * n - 1))
    if not (np.all(ok_c) and np.all(ok_f)):
        return {"coarse_jump": float("nan"), "fine_jump": float("nan"), "continuous": False}
    jc = float(np.max(np.abs(np.diff(coarse))))
    jf = float(np.max(np.abs(np.diff(fine))))
    return {"coarse_jump": jc, "fine_jump": jf, "continuous": jf <= 0.75 * jc or jf <= 1e-12}


class TransformedFunction(FunctionSpec):
    """The scalar map w -> T(f)(w) as a FunctionSpec, e.g. u -> ln f(e^u)."""

    family = "transformed"

    def __init__(self, transform: Transform, target):
        self.transform = transform
        self.target = transform.coerce(target)

    @property
    def text(self):
        return f"{self.transform.label}[{self.target.text}]"

    def valid(self, x):
        return self.transform.evaluate(self.target, np.asarray(x, float))[1]

    def _formula(self, x):
        return self.transform.evaluate(self.target, x)[0]
