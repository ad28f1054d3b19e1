"""Forward and falsification suites, one per characterisation theorem.

A suite runs every check on every candidate.  The forward candidates are
exact solutions and must pass everything; each falsifier is a curated
non-solution and must fail at least one check.  Checks that can raise are
recorded as failures carrying the exception name instead of aborting the run.

Statistical forward checks share the report's ``alpha`` by Bonferroni, so a
report as a whole keeps its family-wise false-rejection rate below ``alpha``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .analytic import (
    bilinear_fit,
    heat_smooth,
    kolmogorov_residual,
    recover_quadratic_coefficient,
    smoothed_derivative,
    time_invariance_curve,
)
from .errors import FuncMartError
from .functions import (
    AbelKernel,
    AbelTriple,
    AbsoluteValue,
    Affine,
    BilinearForm,
    Cubic,
    EquationKind,
    Exponential,
    FunctionSpec,
    Linear,
    Logarithmic,
    MonomialKernel,
    Polynomial,
    Power,
    Quadratic,
    QuadraticKernel,
    Tabulated,
    default_grid,
    expand_abel_triple,
    oddness_defect,
    pointwise_residual,
    residual,
)
from .mgtest import (
    MOMENT_SIGMAS,
    bernstein_check,
    fit_linear,
    increment_identity_defect,
    lognormality_check,
    normality_check,
    test_martingale,
)
from .simulate import PathEnsemble, SimConfig, generate_pair, standard_normal_samples
from .transforms import (
    FofExpW,
    FofW,
    KLeft,
    KRight,
    GLeft,
    GRight,
    LogFofExpW,
    LogFofW,
    ShiftScale,
    Transform,
    TransformedFunction,
    apply,
    build,
    continuity_defect,
    zero_at_zero,
)

RESIDUAL_RTOL = 1e-12
FIT_RTOL = 1e-10
KOLMOGOROV_TOL = 1e-6
DEFAULT_ALPHA = 0.01
DEFAULT_TIME_GRID = (0.25, 0.5, 1.0)
ANCHORS = (-2.0, 1.0, 3.0)
SHIFT_SCALES = ((0.0, 1.0), (1.0, 2.0), (-3.0, 0.5))
A1_SHIFTS = (-1.0, 2.0)
STOCHASTIC_CAUCHY_SAMPLES = 10_000


class TheoremId(enum.Enum):
    T2_1 = "T2_1"
    T2_2a = "T2_2a"
    T2_2b = "T2_2b"
    T2_2c = "T2_2c"
    T2_3 = "T2_3"
    T3_1 = "T3_1"
    T4_1 = "T4_1"
    T5_1 = "T5_1"
    A1 = "A1"
    A2 = "A2"


STATEMENTS = {
    TheoremId.T2_1: "additive Cauchy equation <-> f(W_t) martingale, zero at 0",
    TheoremId.T2_2a: "exponential Cauchy equation <-> positive f(W_t) with ln f(W_t) martingale",
    TheoremId.T2_2b: "logarithmic Cauchy equation <-> f(exp W_t) martingale, zero at 0",
    TheoremId.T2_2c: "power Cauchy equation <-> positive f(exp W_t) with ln f(exp W_t) martingale",
    TheoremId.T2_3: "Cauchy equation in one Gaussian argument -> f linear",
    TheoremId.T3_1: "conditional Cauchy equation <-> G(x + sigma W_t) martingales",
    TheoremId.T4_1: "Abel equation <-> K(W_t, y), K(x, W_t) martingales with constant K(0, y) = K(x, 0)",
    TheoremId.T5_1: "quadratic equation -> f = lambda x^2 via martingales G(W_t, y), G(x, W_t)",
    TheoremId.A1: "f(W_t) martingale <-> f affine",
    TheoremId.A2: "G(W_t, y), G(x, W_t) martingales <-> G bilinear-affine",
}


@dataclass(frozen=True)
class AbelCandidate:
    f: FunctionSpec
    h: FunctionSpec
    g: FunctionSpec
    label: str

    @property
    def text(self):
        return self.label

    @property
    def kernel(self) -> AbelKernel:
        return AbelKernel(self.f, self.h)

    @classmethod
    def from_triple(cls, t: AbelTriple) -> AbelCandidate:
        return cls(*expand_abel_triple(t), label=t.text)

    @classmethod
    def from_functions(cls, f, h, g) -> AbelCandidate:
        return cls(f, h, g, label=f"abel[f={f.text}; h={h.text}; g={g.text}]")


def _power_falsifier() -> Tabulated:
    xs = np.geomspace(1e-8, 1e8, 161)
    return Tabulated(tuple(zip(xs, 1.0 + xs)))


def _abel_x4_falsifier() -> AbelCandidate:
    f, h, g = expand_abel_triple(AbelTriple(2.0, 1.0, -0.5))
    h4 = Polynomial((h(0.0), 0.0, 0.5, 0.0, 1.0))
    return AbelCandidate.from_functions(f, h4, g)


def default_candidates(tid: TheoremId) -> tuple[list, list]:
    """``(forward, falsifiers)`` of the suite table."""
    table = {
        TheoremId.T2_1: ([Linear(2.5)], [Quadratic(1.0), Cubic(), AbsoluteValue()]),
        TheoremId.T2_2a: ([Exponential(-1.0)], [Affine(1.0, 2.0), Linear(1.0)]),
        TheoremId.T2_2b: ([Logarithmic(3.0)], [Power(2.0)]),
        TheoremId.T2_2c: ([Power(0.5)], [_power_falsifier()]),
        TheoremId.T2_3: ([Linear(2.5)], [Quadratic(1.0)]),
        TheoremId.T3_1: ([Linear(1.5)], [Cubic()]),
        TheoremId.T4_1: ([AbelCandidate.from_triple(AbelTriple(2.0, 1.0, -0.5))], [_abel_x4_falsifier()]),
        TheoremId.T5_1: ([Quadratic(1.5)], [Cubic()]),
        TheoremId.A1: ([Linear(2.5), Affine(1.0, 3.0)], [Quadratic(1.0), Cubic(), AbsoluteValue()]),
        TheoremId.A2: ([BilinearForm(1.5, -0.5, 2.0, 0.25)], [MonomialKernel(1.0, 2, 1)]),
    }
    return table[tid]


# --- report types -------------------------------------------------------------


@dataclass(frozen=True)
class Check:
    candidate: str
    name: str
    passed: bool
    statistics: dict
    error: str | None = None

    def to_dict(self) -> dict:
        return {
            "candidate": self.candidate,
            "check": self.name,
            "pass": self.passed,
            "error": self.error,
            "statistics": self.statistics,
        }


@dataclass(frozen=True)
class TheoremReport:
    id: TheoremId
    forward: tuple[Check, ...]
    falsification: tuple[Check, ...]
    recovered_constants: dict
    config: dict
    alpha: float
    alpha_per_test: float

    def falsifier_outcomes(self) -> dict[str, list[str]]:
        out: dict[str, list[str]] = {}
        for c in self.falsification:
            out.setdefault(c.candidate, [])
            if not c.passed:
                out[c.candidate].append(c.name)
        return out

    def failed_forward(self) -> list[str]:
        return [f"{c.candidate}: {c.name}" for c in self.forward if not c.passed]

    @property
    def overall(self) -> bool:
        return all(c.passed for c in self.forward) and all(self.falsifier_outcomes().values())

    def errors(self, forward_only: bool = False) -> set[str]:
        checks = self.forward if forward_only else self.forward + self.falsification
        return {c.error for c in checks if c.error}

    def to_dict(self) -> dict:
        return {
            "theorem": self.id.value,
            "statement": STATEMENTS[self.id],
            "config": self.config,
            "alpha": self.alpha,
            "alpha_per_test": self.alpha_per_test,
            "overall": self.overall,
            "failed_forward_checks": self.failed_forward(),
            "falsifier_outcomes": [
                {"candidate": cand, "rejected": bool(failed), "failed_checks": failed}
                for cand, failed in self.falsifier_outcomes().items()
            ],
            "recovered_constants": self.recovered_constants,
            "forward": [c.to_dict() for c in self.forward],
            "falsification": [c.to_dict() for c in self.falsification],
        }


# --- shared inputs ------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Ensembles:
    """W and B path ensembles plus xi samples, generated once per config."""

    config: SimConfig
    w: PathEnsemble
    b: PathEnsemble
    xi: np.ndarray

    @classmethod
    def generate(cls, config: SimConfig) -> Ensembles:
        w, b = generate_pair(config)
        return cls(config, w, b, standard_normal_samples(config.master_seed, config.n_paths))

    @property
    def bernstein_time(self) -> float:
        grid = self.config.time_grid
        return 1.0 if 1.0 in grid else grid[-1]


@dataclass(frozen=True)
class _Plan:
    candidate: str
    name: str
    fn: Callable[[float], tuple[bool, dict]]
    statistical: bool = False


@dataclass
class _Ctx:
    ens: Ensembles
    grid: np.ndarray = field(default_factory=default_grid)
    constants: dict = field(default_factory=dict)

    def recorder(self, candidate: str) -> dict:
        return self.constants.setdefault(candidate, {})


def _tol(rtol: float, scale) -> float:
    return rtol * (1.0 + float(np.max(np.abs(scale))))


# --- check builders -----------------------------------------------------------


def _residual(cand: str, kind: EquationKind, specs) -> _Plan:
    def fn(alpha):
        r = residual(kind, specs)
        return r.exact(RESIDUAL_RTOL) and not r.degenerate, r.to_dict()

    return _Plan(cand, f"residual[{kind.value}]", fn)


def _martingale(cand: str, transform: Transform, target, ens: Ensembles) -> _Plan:
    def fn(alpha):
        v = test_martingale(build(transform, target, ens.w), alpha=alpha)
        return v.passed, {"max_abs_z": v.max_abs_z, "worst_cell": v.worst_cell().to_dict(), "verdict": v.to_dict()}

    return _Plan(cand, f"martingale[{transform.label}]", fn, statistical=True)


def _positivity(cand: str, transform: Transform, target, ens: Ensembles) -> _Plan:
    def fn(alpha):
        proc = build(transform, target, ens.w)
        return not proc.degenerate, {"degenerate": proc.degenerate, "witness": proc.witness}

    return _Plan(cand, f"positivity[{transform.label}]", fn)


def _zero_at_zero(cand: str, transform: Transform, target, ens: Ensembles) -> _Plan:
    def fn(alpha):
        proc = build(transform, target, ens.w)
        return zero_at_zero(proc), {"time0_value": proc.time0}

    return _Plan(cand, f"zero_at_zero[{transform.label}]", fn)


def _increment_identity(cand: str, transform: Transform, target, ens: Ensembles) -> _Plan:
    def fn(alpha):
        proc = build(transform, target, ens.w)
        defect = increment_identity_defect(proc)
        tol = _tol(RESIDUAL_RTOL, proc.values)
        return defect <= tol, {"defect": defect, "tolerance": tol}

    return _Plan(cand, f"increment_identity[{transform.label}]", fn)


def _bernstein(cand: str, transform: Transform, target, ens: Ensembles) -> _Plan:
    def fn(alpha):
        t = ens.bernstein_time
        x = apply(transform, target, ens.w.column(t))
        y = apply(transform, target, ens.b.column(t))
        rep = bernstein_check(x, y, alpha=alpha)
        return rep.passed, {"t": t, **rep.to_dict()}

    return _Plan(cand, f"bernstein[{transform.label}]", fn, statistical=True)


def _normality(cand: str, transform: Transform, target, ens: Ensembles, log_normal: bool = False) -> _Plan:
    def fn(alpha):
        t = ens.bernstein_time
        x = apply(transform, target, ens.w.column(t))
        rep = lognormality_check(x) if log_normal else normality_check(x)
        return rep.passed, {"t": t, **rep.to_dict()}

    kind = "lognormality" if log_normal else "normality"
    return _Plan(cand, f"{kind}[{transform.label}]", fn)


def _continuity(cand: str, transform: Transform, target) -> _Plan:
    def fn(alpha):
        stats = continuity_defect(transform, target)
        return stats["continuous"], stats

    return _Plan(cand, f"continuity[{transform.label}]", fn)


def _linear_fit(cand: str, spec: FunctionSpec, grid, record: dict | None, names=("c", "b")) -> _Plan:
    def fn(alpha):
        fit = fit_linear(spec, grid)
        tol = _tol(FIT_RTOL, spec(grid))
        if record is not None:
            record[names[0]] = fit.a
            if len(names) > 1:
                record[names[1]] = fit.b
        return fit.max_deviation <= tol, {"a": fit.a, "b": fit.b, "max_deviation": fit.max_deviation,
                                          "tolerance": tol}

    return _Plan(cand, f"linear_fit[{spec.text}]" if isinstance(spec, TransformedFunction) else "linear_fit", fn)


# --- suites -------------------------------------------------------------------


def _cauchy_suite(ctx: _Ctx, f: FunctionSpec, record, kind: EquationKind, transform: Transform,
                  positivity: bool, zero: bool, distribution: str | None, bernstein: bool,
                  continuity: bool = False) -> list[_Plan]:
    ens = ctx.ens
    c = f.text
    plans = [_residual(c, kind, f)]
    if positivity:
        plans.append(_positivity(c, transform, f, ens))
    plans.append(_martingale(c, transform, f, ens))
    if zero:
        plans.append(_zero_at_zero(c, transform, f, ens))
    plans.append(_increment_identity(c, transform, f, ens))
    if distribution == "normal":
        plans.append(_normality(c, transform, f, ens))
    elif distribution == "lognormal":
        inner = FofExpW() if isinstance(transform, LogFofExpW) else FofW()
        plans.append(_normality(c, inner, f, ens, log_normal=True))
    if bernstein:
        plans.append(_bernstein(c, transform, f, ens))
    if continuity:
        plans.append(_continuity(c, transform, f))
    core = f if isinstance(transform, FofW) else TransformedFunction(transform, f)
    plans.append(_linear_fit(c, core, ctx.grid, record))
    return plans


_CAUCHY = {
    TheoremId.T2_1: dict(kind=EquationKind.CAUCHY_ADDITIVE, transform=FofW(), positivity=False, zero=True,
                         distribution=None, bernstein=True, continuity=True),
    TheoremId.T2_2a: dict(kind=EquationKind.CAUCHY_EXPONENTIAL, transform=LogFofW(), positivity=True,
                          zero=True, distribution="normal", bernstein=True),
    TheoremId.T2_2b: dict(kind=EquationKind.CAUCHY_LOGARITHMIC, transform=FofExpW(), positivity=False,
                          zero=True, distribution="normal", bernstein=False),
    TheoremId.T2_2c: dict(kind=EquationKind.CAUCHY_POWER, transform=LogFofExpW(), positivity=True, zero=True,
                          distribution="lognormal", bernstein=True),
}


def _stochastic_cauchy(ctx: _Ctx, f: FunctionSpec, record) -> list[_Plan]:
    c = f.text
    xi = ctx.ens.xi
    grid = ctx.grid

    def derivative(alpha):
        d = smoothed_derivative(f, grid)
        spread = float(np.ptp(d))
        if record is not None:
            record["c"] = float(np.mean(d))
        return spread <= _tol(FIT_RTOL, d), {
            "spread": spread,
            "curve": f"smoothed_derivative[{c}]",
            "x": grid,
            "value": d,
        }

    def mean_quadrature(alpha):
        m = heat_smooth(f, 1.0, 0.0)
        return abs(m) <= FIT_RTOL, {"mean": m}

    def mean_monte_carlo(alpha):
        v = np.asarray(f(xi), float)
        if v.size < 2:
            raise ValueError("need samples")
        se = float(np.std(v, ddof=1) / np.sqrt(v.size))
        m = float(np.mean(v))
        z = 0.0 if se == 0 and m == 0 else (np.inf if se == 0 else m / se)
        return abs(z) <= MOMENT_SIGMAS, {"mean": m, "se": se, "z": z}

    def normal(alpha):
        rep = normality_check(f(xi))
        return rep.passed, rep.to_dict()

    def stochastic_residual(alpha):
        sample = xi[:STOCHASTIC_CAUCHY_SAMPLES]
        x, s = np.meshgrid(grid, sample, indexing="ij")
        res, scale = pointwise_residual(EquationKind.CAUCHY_ADDITIVE, f, x.ravel(), s.ravel())
        sup = float(np.max(np.abs(res)))
        tol = _tol(RESIDUAL_RTOL, scale)
        return sup <= tol, {"sup_abs_residual": sup, "tolerance": tol, "n_xi": int(sample.size)}

    return [
        _Plan(c, "stochastic_cauchy_residual", stochastic_residual),
        _Plan(c, "smoothed_derivative_constant", derivative),
        _Plan(c, "mean_zero[quadrature]", mean_quadrature),
        _Plan(c, "mean_zero[monte_carlo]", mean_monte_carlo),
        _Plan(c, "normality[f(xi)]", normal),
    ]


def _conditional_cauchy(ctx: _Ctx, g: FunctionSpec, record) -> list[_Plan]:
    ens = ctx.ens
    c = g.text
    grid = ctx.grid

    def odd(alpha):
        defect = oddness_defect(g, grid)
        g0 = g(0.0)
        tol = _tol(RESIDUAL_RTOL, g(grid))
        return defect <= tol and abs(g0) <= tol, {"oddness_defect": defect, "g0": g0, "tolerance": tol}

    plans = [_residual(c, EquationKind.CONDITIONAL_CAUCHY_SQUARES, g), _Plan(c, "odd_and_zero", odd)]
    for x0, sigma in SHIFT_SCALES:
        t = ShiftScale(x0, sigma)
        plans.append(_martingale(c, t, g, ens))
        plans.append(_increment_identity(c, t, g, ens))
        plans.append(_bernstein(c, t, g, ens))
    plans.append(_zero_at_zero(c, ShiftScale(0.0, 1.0), g, ens))
    plans.append(_linear_fit(c, g, grid, record))
    return plans


def _bilinear_plan(cand: str, kernel, grid, record, require=("b", "c"), expect: dict | None = None) -> _Plan:
    def fn(alpha):
        fit = bilinear_fit(kernel, grid)
        xx, yy = np.meshgrid(grid, grid, indexing="ij")
        tol = _tol(FIT_RTOL, kernel(xx.ravel(), yy.ravel()))
        coeffs = fit.to_dict()
        ok = fit.max_residual <= tol and all(abs(coeffs[k]) <= tol for k in require)
        if expect:
            ok = ok and all(abs(coeffs[k] - v) <= tol for k, v in expect.items())
        if record is not None:
            record.update({k: coeffs[k] for k in ("a", "b", "c", "d")})
        return ok, {**coeffs, "tolerance": tol, "zero_coefficients": list(require)}

    return _Plan(cand, "bilinear_fit", fn)


def _abel(ctx: _Ctx, cand: AbelCandidate, record) -> list[_Plan]:
    ens = ctx.ens
    c = cand.text
    grid = ctx.grid
    kernel = cand.kernel
    plans = [_residual(c, EquationKind.ABEL, (cand.f, cand.h, cand.g))]
    plans += [_martingale(c, KLeft(y), kernel, ens) for y in ANCHORS]
    plans += [_martingale(c, KRight(x), kernel, ens) for x in ANCHORS]

    def boundary(alpha):
        vals = np.concatenate((kernel(np.zeros_like(grid), grid), kernel(grid, np.zeros_like(grid))))
        spread = float(np.ptp(vals))
        lam = float(kernel(0.0, 0.0))
        if record is not None:
            record["lambda"] = lam
        return spread <= _tol(RESIDUAL_RTOL, vals), {"lambda": lam, "spread": spread}

    plans.append(_Plan(c, "boundary_constant", boundary))
    fit_record: dict = {}
    plans.append(_bilinear_plan(c, kernel, grid, fit_record))

    def reconstruction(alpha):
        fit = bilinear_fit(kernel, grid)
        h0 = float(cand.h(0.0))
        f2, h2, g2 = expand_abel_triple(AbelTriple(fit.a, fit.d, h0))
        diffs = [float(np.max(np.abs(p(grid) - q(grid)))) for p, q in ((cand.f, f2), (cand.h, h2), (cand.g, g2))]
        tol = _tol(FIT_RTOL, np.concatenate([cand.f(grid), cand.h(grid), cand.g(grid)]))
        if record is not None:
            record.update({"a": fit.a, "d": fit.d, "h0": h0})
        return max(diffs) <= tol, {"a": fit.a, "d": fit.d, "h0": h0, "max_function_mismatch": max(diffs)}

    plans.append(_Plan(c, "triple_reconstruction", reconstruction))
    return plans


def _quadratic(ctx: _Ctx, f: FunctionSpec, record) -> list[_Plan]:
    ens = ctx.ens
    c = f.text
    grid = ctx.grid

    def even(alpha):
        defect = float(np.max(np.abs(f(grid) - f(-grid))))
        tol = _tol(RESIDUAL_RTOL, f(grid))
        return defect <= tol and abs(f(0.0)) <= tol, {"evenness_defect": defect, "f0": f(0.0)}

    plans = [_residual(c, EquationKind.QUADRATIC, f), _Plan(c, "even_and_zero", even)]
    plans += [_martingale(c, GLeft(y), f, ens) for y in ANCHORS]
    plans += [_martingale(c, GRight(x), f, ens) for x in ANCHORS]
    plans.append(_bilinear_plan(c, QuadraticKernel(f), grid, None, require=("b", "c", "d")))

    def coefficient(alpha):
        rec = recover_quadratic_coefficient(f, grid[grid != 0])
        fit = bilinear_fit(QuadraticKernel(f), grid)
        tol = _tol(FIT_RTOL, f(grid))
        if record is not None:
            record["a"] = rec.coefficient
            record["lambda"] = rec.coefficient / 2.0
        ok = rec.max_residual <= tol and abs(rec.coefficient - fit.a) <= tol
        return ok, {"a": rec.coefficient, "max_residual": rec.max_residual, "bilinear_a": fit.a}

    plans.append(_Plan(c, "quadratic_coefficient", coefficient))
    return plans


def _affine_suite(ctx: _Ctx, f: FunctionSpec, record) -> list[_Plan]:
    ens = ctx.ens
    c = f.text
    grid = ctx.grid
    plans = [_martingale(c, FofW(), f, ens)]
    plans += [_martingale(c, ShiftScale(x0, 1.0), f, ens) for x0 in A1_SHIFTS]
    plans.append(_linear_fit(c, f, grid, record, names=("a", "b")))

    def invariance(alpha):
        curve = time_invariance_curve(f, 0.5, 1.0, grid)
        defect = float(np.max(curve))
        tol = _tol(FIT_RTOL, f(grid))
        return defect <= tol, {"t1": 0.5, "t2": 1.0, "defect": defect, "tolerance": tol,
                               "curve": f"time_invariance[{c}]", "x": grid, "value": curve}

    def kolmogorov(alpha):
        r = kolmogorov_residual(f, 1.0)
        return r <= KOLMOGOROV_TOL, {"T": 1.0, "residual": r, "tolerance": KOLMOGOROV_TOL}

    plans.append(_Plan(c, "time_invariance", invariance))
    plans.append(_Plan(c, "kolmogorov_residual", kolmogorov))
    return plans


def _bilinear_suite(ctx: _Ctx, kernel, record) -> list[_Plan]:
    ens = ctx.ens
    c = kernel.text
    plans = [_bilinear_plan(c, kernel, ctx.grid, record, require=())]
    plans += [_martingale(c, KLeft(y), kernel, ens) for y in ANCHORS]
    plans += [_martingale(c, KRight(x), kernel, ens) for x in ANCHORS]
    return plans


def _normalise(tid: TheoremId, cand):
    if tid is TheoremId.T4_1:
        if isinstance(cand, AbelTriple):
            return AbelCandidate.from_triple(cand)
        if isinstance(cand, tuple):
            return AbelCandidate.from_functions(*cand)
    return cand


def _suite(tid: TheoremId, ctx: _Ctx, cand, record) -> list[_Plan]:
    if tid in _CAUCHY:
        return _cauchy_suite(ctx, cand, record, **_CAUCHY[tid])
    return {
        TheoremId.T2_3: _stochastic_cauchy,
        TheoremId.T3_1: _conditional_cauchy,
        TheoremId.T4_1: _abel,
        TheoremId.T5_1: _quadratic,
        TheoremId.A1: _affine_suite,
        TheoremId.A2: _bilinear_suite,
    }[tid](ctx, cand, record)


def _execute(plan: _Plan, alpha: float) -> Check:
    try:
        passed, stats = plan.fn(alpha)
    except (FuncMartError, ValueError) as exc:
        return Check(plan.candidate, plan.name, False, {"message": str(exc)}, error=type(exc).__name__)
    return Check(plan.candidate, plan.name, bool(passed), stats)


def run(theorem, sim: SimConfig | None = None, overrides: dict | None = None, alpha: float = DEFAULT_ALPHA,
        ensembles: Ensembles | None = None) -> TheoremReport:
    """Run one theorem's suite.

    ``overrides`` may replace the default ``forward`` and/or ``falsifiers``
    candidate lists.  Ensembles are generated from ``sim`` unless given.
    """
    tid = TheoremId(theorem)
    if ensembles is None:
        if sim is None:
            raise ValueError("need a SimConfig or pre-generated ensembles")
        ensembles = Ensembles.generate(sim)
    forward, falsifiers = default_candidates(tid)
    overrides = overrides or {}
    forward = [_normalise(tid, c) for c in overrides.get("forward", forward)]
    falsifiers = [_normalise(tid, c) for c in overrides.get("falsifiers", falsifiers)]

    ctx = _Ctx(ensembles)
    fwd_plans = [p for c in forward for p in _suite(tid, ctx, c, ctx.recorder(c.text))]
    fal_plans = [p for c in falsifiers for p in _suite(tid, ctx, c, None)]
    per_test = alpha / max(1, sum(p.statistical for p in fwd_plans))
    fwd = tuple(_execute(p, per_test) for p in fwd_plans)
    fal = tuple(_execute(p, per_test) for p in fal_plans)

    constants = {k: v for k, v in ctx.constants.items() if v}
    if len(constants) == 1:
        constants = next(iter(constants.values()))
    return TheoremReport(
        id=tid,
        forward=fwd,
        falsification=fal,
        recovered_constants=constants,
        config=ensembles.config.to_dict(),
        alpha=alpha,
        alpha_per_test=per_test,
    )


def run_all(sim: SimConfig, alpha: float = DEFAULT_ALPHA) -> list[TheoremReport]:
    """Every theorem on one shared set of ensembles, in TheoremId order."""
    ens = Ensembles.generate(sim)
    return [run(tid, alpha=alpha, ensembles=ens) for tid in TheoremId]
