"""Command-line interface: ``funcmart <command> [flags]``.

Exit codes: 0 every check passed, 1 some check failed, 2 configuration or
IO error, 3 too few samples or a degenerate input where a pass was expected.

Settings come from built-in defaults, then an INI file given by ``--config``
(section ``[run]``), then flags.  The effective settings are written to
``<out>/run.ini`` so ``funcmart <command> --config <out>/run.ini`` repeats
the run exactly.
"""

from __future__ import annotations

import argparse
import configparser
import json
import sys
from pathlib import Path

import numpy as np

from . import theorems
from .analytic import kolmogorov_residual, smoothed_derivative, time_invariance_curve
from .errors import ConfigError, DegenerateInput, DomainViolation, FuncMartError, InsufficientSamples
from .functions import AbelKernel, EquationKind, default_grid, parse_spec, residual
from .mgtest import bernstein_check, test_martingale
from .report import emit_plot_data, write_json, write_matrix_csv
from .simulate import Label, SimConfig, generate
from .transforms import apply, build, parse_transform

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_SAMPLES = 0, 1, 2, 3

COMMANDS = ("residual", "simulate", "martingale", "bernstein", "kolmogorov", "derivative", "theorem", "suite",
            "emit-plot-data")

DEFAULTS = {
    "seed": "42",
    "paths": "200000",
    "grid": "0.25,0.5,1.0",
    "alpha": "0.01",
    "func": "",
    "theorem": "",
    "equation": "",
    "transform": "fofw",
    "label": "W",
    "horizon": "1.0",
    "tolerance": "1e-6",
    "workers": "1",
    "out": "reports",
    "format": "json",
    "report": "",
}
# keys holding lists; stored one item per line in the INI file
LIST_KEYS = ("func", "theorem", "report")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="funcmart", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", help="INI file with a [run] section; flags override it")
    parser.add_argument("--seed", help="master seed (default 42)")
    parser.add_argument("--paths", help="number of simulated paths (default 200000)")
    parser.add_argument("--grid", help="comma-separated time grid (default 0.25,0.5,1.0)")
    parser.add_argument("--alpha", help="family-wise significance level (default 0.01)")
    parser.add_argument("--func", action="append", help="function spec, e.g. linear:c=2.5 (repeatable)")
    parser.add_argument("--theorem", action="append", help="theorem id, e.g. T2_1 (repeatable)")
    parser.add_argument("--equation", help="equation for `residual`, e.g. cauchy-additive")
    parser.add_argument("--transform", help="transform, e.g. fofw or shift-scale:x0=1,sigma=2 (default fofw)")
    parser.add_argument("--label", help="ensemble label for `simulate`: W or B (default W)")
    parser.add_argument("--horizon", help="terminal time T for `kolmogorov` (default 1.0)")
    parser.add_argument("--tolerance", help="pass threshold for `kolmogorov` (default 1e-6)")
    parser.add_argument("--workers", help="threads used by path generation (default 1)")
    parser.add_argument("--out", help="output directory (default reports)")
    parser.add_argument("--format", choices=("json", "csv", "both"), help="report format (default json)")
    parser.add_argument("--report", action="append", help="report JSON for `emit-plot-data` (repeatable)")
    return parser


def resolve_settings(args: argparse.Namespace) -> dict:
    """Merge defaults, the config file and flags into one dict of strings."""
    settings = dict(DEFAULTS)
    if args.config:
        cp = configparser.ConfigParser()
        if not cp.read(args.config, encoding="utf-8"):
            raise ConfigError(f"cannot read config file {args.config!r}")
        if not cp.has_section("run"):
            raise ConfigError(f"{args.config!r} has no [run] section")
        unknown = set(cp["run"]) - set(DEFAULTS) - {"command"}
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        settings.update({k: v for k, v in cp["run"].items() if k != "command"})
    for key in DEFAULTS:
        value = getattr(args, key, None)
        if value is None:
            continue
        settings[key] = "\n".join(value) if key in LIST_KEYS else str(value)
    return settings


def _items(settings: dict, key: str) -> list[str]:
    return [s.strip() for s in settings[key].splitlines() if s.strip()]


def persist_settings(settings: dict, command: str, out: Path) -> Path:
    cp = configparser.ConfigParser()
    cp["run"] = {"command": command, **settings}
    out.mkdir(parents=True, exist_ok=True)
    path = out / "run.ini"
    with path.open("w", encoding="utf-8") as fh:
        cp.write(fh)
    return path


def sim_config(settings: dict) -> SimConfig:
    try:
        grid = tuple(float(t) for t in settings["grid"].split(",") if t.strip())
        return SimConfig(int(settings["seed"]), int(settings["paths"]), grid)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _float(settings: dict, key: str) -> float:
    try:
        return float(settings[key])
    except ValueError as exc:
        raise ConfigError(f"{key} must be a number, got {settings[key]!r}") from exc


def _funcs(settings: dict, minimum: int = 1) -> list:
    texts = _items(settings, "func")
    if len(texts) < minimum:
        raise ConfigError(f"need at least {minimum} --func")
    try:
        return [parse_spec(t) for t in texts]
    except (ValueError, OSError) as exc:
        raise ConfigError(str(exc)) from exc


def _target(settings: dict, transform):
    """One function, or a kernel f(x + y) - h(x - y) from two --func for K transforms."""
    funcs = _funcs(settings)
    if transform.bivariate:
        if len(funcs) != 2:
            raise ConfigError(f"{transform.name} needs two --func: f then h")
        return AbelKernel(funcs[0], funcs[1])
    if len(funcs) != 1:
        raise ConfigError(f"{transform.name} takes a single --func")
    return funcs[0]


def _transform(settings: dict):
    try:
        return parse_transform(settings["transform"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


# --- commands -------------------------------------------------------------------
# each returns (name, report dict, passed)


def cmd_residual(settings):
    try:
        kind = EquationKind(settings["equation"])
    except ValueError as exc:
        raise ConfigError(f"unknown --equation {settings['equation']!r}") from exc
    funcs = _funcs(settings, kind.arity)
    specs = tuple(funcs) if kind.arity == 3 else funcs[0]
    rep = residual(kind, specs)
    passed = rep.exact() and not rep.degenerate
    return [("residual", {"candidate": [f.text for f in funcs], **rep.to_dict(), "pass": passed}, passed)]


def cmd_simulate(settings, out: Path, workers: int):
    config = sim_config(settings)
    try:
        label = Label(settings["label"].upper())
    except ValueError as exc:
        raise ConfigError(f"--label must be W or B, got {settings['label']!r}") from exc
    if label not in (Label.W, Label.B):
        raise ConfigError("--label must be W or B")
    ens = generate(config, label, workers=workers)
    write_matrix_csv(out / f"paths_{label.value}.csv", ens.times, ens.values)
    report = {"config": config.to_dict(), "label": label.value, "files": [f"paths_{label.value}.csv"]}
    if _items(settings, "func"):
        transform = _transform(settings)
        proc = build(transform, _target(settings, transform), ens)
        name = f"process_{label.value}.csv"
        write_matrix_csv(out / name, ens.times, proc.values)
        report["files"].append(name)
        report["process"] = {"candidate": proc.candidate, "transform": transform.label,
                             "degenerate": proc.degenerate, "witness": proc.witness}
    return [("simulate", report, True)]


def cmd_martingale(settings, workers: int):
    config = sim_config(settings)
    transform = _transform(settings)
    proc = build(transform, _target(settings, transform), generate(config, Label.W, workers=workers))
    verdict = test_martingale(proc, alpha=_float(settings, "alpha"))
    return [("martingale", {**verdict.to_dict(), "max_abs_z": verdict.max_abs_z}, verdict.passed)]


def cmd_bernstein(settings, workers: int):
    config = sim_config(settings)
    transform = _transform(settings)
    target = _target(settings, transform)
    t = 1.0 if 1.0 in config.time_grid else config.time_grid[-1]
    w = generate(config, Label.W, workers=workers).column(t)
    b = generate(config, Label.B, workers=workers).column(t)
    rep = bernstein_check(apply(transform, target, w), apply(transform, target, b), alpha=_float(settings, "alpha"))
    return [("bernstein", {"candidate": target.text, "transform": transform.label, "t": t, **rep.to_dict()},
             rep.passed)]


def cmd_kolmogorov(settings):
    horizon = _float(settings, "horizon")
    tol = _float(settings, "tolerance")
    grid = default_grid()
    reports = []
    for f in _funcs(settings):
        r = kolmogorov_residual(f, horizon)
        curve = time_invariance_curve(f, 0.5 * horizon, horizon, grid)
        reports.append((f"kolmogorov_{f.family}", {
            "candidate": f.text,
            "T": horizon,
            "kolmogorov_residual": r,
            "tolerance": tol,
            "time_invariance": {"t1": 0.5 * horizon, "t2": horizon, "defect": float(np.max(curve)),
                                "curve": f"time_invariance[{f.text}]", "x": grid, "value": curve},
            "pass": r <= tol,
        }, r <= tol))
    return reports


def cmd_derivative(settings):
    grid = default_grid()
    reports = []
    for f in _funcs(settings):
        d = smoothed_derivative(f, grid)
        spread = float(np.ptp(d))
        passed = spread <= theorems.FIT_RTOL * (1.0 + float(np.max(np.abs(d))))
        reports.append((f"derivative_{f.family}", {
            "candidate": f.text,
            "spread": spread,
            "constant": passed,
            "derivative": {"curve": f"smoothed_derivative[{f.text}]", "x": grid, "value": d},
            "pass": passed,
        }, passed))
    return reports


def _theorem_reports(settings, ids):
    config = sim_config(settings)
    alpha = _float(settings, "alpha")
    ens = theorems.Ensembles.generate(config)
    out = []
    for tid in ids:
        rep = theorems.run(tid, alpha=alpha, ensembles=ens)
        out.append((rep.id.value, rep.to_dict(), rep))
    return out


def cmd_theorem(settings):
    ids = _items(settings, "theorem")
    if not ids:
        raise ConfigError("`theorem` needs --theorem")
    try:
        ids = [theorems.TheoremId(i) for i in ids]
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return _theorem_reports(settings, ids)


def cmd_suite(settings):
    return _theorem_reports(settings, list(theorems.TheoremId))


def cmd_emit_plot_data(settings, out: Path):
    paths = _items(settings, "report")
    if not paths:
        raise ConfigError("`emit-plot-data` needs --report")
    written = []
    for p in paths:
        try:
            report = json.loads(Path(p).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read report {p!r}: {exc}") from exc
        written += [str(w) for w in emit_plot_data(report, out / Path(p).stem)]
    for w in written:
        print(w)
    return EXIT_OK


# --- driver ---------------------------------------------------------------------


def _theorem_exit(reports) -> int:
    errors = set().union(*(r.errors() for r in reports))
    forward_errors = set().union(*(r.errors(forward_only=True) for r in reports))
    if "InsufficientSamples" in errors or "DegenerateInput" in forward_errors:
        return EXIT_SAMPLES
    return EXIT_OK if all(r.overall for r in reports) else EXIT_FAIL


def _print_theorem_table(reports) -> None:
    print(f"{'theorem':<8} {'overall':<8} {'forward':>9} {'rejected':>9}  constants")
    for r in reports:
        fwd = f"{sum(c.passed for c in r.forward)}/{len(r.forward)}"
        outcomes = r.falsifier_outcomes()
        rej = f"{sum(bool(v) for v in outcomes.values())}/{len(outcomes)}"
        consts = json.dumps(r.recovered_constants, default=float)
        print(f"{r.id.value:<8} {'PASS' if r.overall else 'FAIL':<8} {fwd:>9} {rej:>9}  {consts}")
        for name in r.failed_forward():
            print(f"{'':<8} failed: {name}")


def _write(out: Path, fmt: str, name: str, report: dict) -> None:
    if fmt in ("json", "both"):
        write_json(out / f"{name}.json", report)
    if fmt in ("csv", "both"):
        emit_plot_data(report, out / name)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        settings = resolve_settings(args)
        out = Path(settings["out"])
        fmt = settings["format"]
        if fmt not in ("json", "csv", "both"):
            raise ConfigError(f"--format must be json, csv or both, got {fmt!r}")
        workers = int(_float(settings, "workers"))
        persist_settings(settings, args.command, out)
        cmd = args.command
        if cmd == "emit-plot-data":
            return cmd_emit_plot_data(settings, out)
        if cmd in ("theorem", "suite"):
            results = (cmd_theorem if cmd == "theorem" else cmd_suite)(settings)
            for name, report, _ in results:
                _write(out, fmt, name, report)
            reps = [r for _, _, r in results]
            _print_theorem_table(reps)
            return _theorem_exit(reps)
        results = {
            "residual": lambda: cmd_residual(settings),
            "simulate": lambda: cmd_simulate(settings, out, workers),
            "martingale": lambda: cmd_martingale(settings, workers),
            "bernstein": lambda: cmd_bernstein(settings, workers),
            "kolmogorov": lambda: cmd_kolmogorov(settings),
            "derivative": lambda: cmd_derivative(settings),
        }[cmd]()
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (InsufficientSamples, DegenerateInput) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SAMPLES
    except (DomainViolation, FuncMartError) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL

    for name, report, passed in results:
        try:
            _write(out, fmt, name, report)
        except OSError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        print(f"{name:<28} {'PASS' if passed else 'FAIL'}")
    return EXIT_OK if all(p for _, _, p in results) else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
