"""Command-line front end.

Subcommands: ``example1``, ``example2``, ``check``, ``simulate``, ``bound``,
``sweep`` and ``mg``.  Reports go to standard output as JSON, trajectories
to CSV files under ``--out``.  Exit codes: 0 success, 1 runtime or numeric
error, 2 input error.
"""

from __future__ import annotations

import argparse
import copy
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import analysis, criteria, mackeyglass, solver
from .config import ProblemFile, build_problem, load_problem
from .errors import DelayStabError, DomainError, SchemaError
from .model import ConstantLag, InitialCondition, sampled_range

EXIT_OK, EXIT_RUNTIME, EXIT_INPUT = 0, 1, 2
THREADS_ENV = "DELAYSTAB_THREADS"
NEUTRAL_TOL = 1e-9


class InputError(Exception):
    pass


def _clean(obj):
    """Make a report JSON-safe: non-finite floats become strings, numpy scalars floats."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else ("inf" if v > 0 else "-inf" if v < 0 else "nan")
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _emit(report: dict, out_dir: Path | None = None, name: str | None = None) -> None:
    text = json.dumps(_clean(report), indent=2, sort_keys=True)
    if out_dir is not None and name is not None:
        (out_dir / name).write_text(text + "\n")
    print(text)


def _out_dir(args) -> Path | None:
    if getattr(args, "out", None) is None:
        return None
    p = Path(args.out)
    p.mkdir(parents=True, exist_ok=True)
    return p


def _load(args) -> ProblemFile:
    if not args.config:
        raise InputError("--config FILE is required")
    try:
        return load_problem(args.config)
    except FileNotFoundError:
        raise InputError(f"{args.config}: no such file") from None
    except DomainError as exc:
        raise InputError(f"{args.config}: {exc}") from None


def _horizon(args, pf: ProblemFile | None = None, default: float = 100.0) -> float:
    if getattr(args, "horizon", None) is not None:
        return float(args.horizon)
    return pf.horizon if pf is not None else default


def _classify(ratio: float) -> str:
    if ratio < 1.0 - NEUTRAL_TOL:
        return "decaying"
    return "growing" if ratio > 1.0 + NEUTRAL_TOL else "neutral"


# ---------------------------------------------------------------------------
# example1 / example2
# ---------------------------------------------------------------------------


def cmd_example1(args) -> int:
    b, variant = args.b, args.variant
    n = int(round(args.horizon if args.horizon is not None else 20))
    step = args.step if args.step is not None else 1e-3
    out = _out_dir(args)
    base = solver.integrate_example1(b, "baseline", n, step)
    pert = solver.integrate_example1(b, variant, n, step)
    problem = solver.example1_problem(b, variant)
    a_min, _ = sampled_range(problem.a, 0.0, float(n), step)
    r5 = analysis.growth_factor(base, 1.0)
    r6 = analysis.growth_factor(pert, 1.0)
    exact5 = analysis.example1_exact(b, "baseline", 1)
    exact6 = analysis.example1_exact(b, variant, 1)
    report = {
        "b": b,
        "variant": variant,
        "n_periods": n,
        "eps": solver.example1_eps(b),
        "ratio_intro5": r5,
        "ratio_intro5_exact": abs(exact5[1] / exact5[0]),
        "ratio_intro6": r6,
        "ratio_intro6_exact": abs(exact6[1] / exact6[0]),
        "sign_changes_intro5": analysis.count_sign_changes(base, 0.0, float(n)),
        "sign_changes_intro6": analysis.count_sign_changes(pert, 0.0, float(n)),
        "classification_intro5": _classify(r5),
        "classification_intro6": _classify(r6),
        "min_a": a_min,
        "warnings": list(pert.warnings),
    }
    if out is not None:
        base.write_csv(out / "intro5.csv", args.sample_step)
        pert.write_csv(out / "intro6.csv", args.sample_step)
        pert.write_breakpoints_csv(out / "intro6_breakpoints.csv")
    _emit(report, out, "example1_report.json")
    return EXIT_OK


def _mg_report(params, initial, K_override, lag_label, args, out, simulate: bool) -> dict:
    bounds = mackeyglass.mg_attractor_bound(params, K_override)
    v7, vbbi = mackeyglass.mg_verdicts(params, K_override)
    report = {
        "derived": bounds.derived.to_dict(),
        "K_from_equilibrium_equation": mackeyglass.solve_equilibrium(params.alpha, params.beta, params.n),
        "K_override": K_override,
        "lag": lag_label,
        "bound_theorem7": bounds.theorem7,
        "bound_bbi": bounds.bbi,
        "verdict_theorem7": v7.to_dict(),
        "verdict_bbi": vbbi.to_dict(),
    }
    if simulate:
        horizon = args.horizon if args.horizon is not None else 200.0
        cfg = solver.IntegratorConfig.for_delays([params.h], horizon)
        if args.step is not None:
            cfg = solver.IntegratorConfig(horizon, args.step)
        traj = mackeyglass.simulate_mg(params, initial, cfg)
        K_eq = report["K_from_equilibrium_equation"]
        tail = traj.t >= 0.5 * horizon
        report["simulation"] = {
            "horizon": horizon,
            "x_final": float(traj.x[-1]),
            "max_abs_deviation_from_equilibrium_K_second_half": float(np.max(np.abs(traj.x[tail] - K_eq))),
        }
        if out is not None:
            traj.write_csv(out / "mg_trajectory.csv", args.sample_step)
    return report


def cmd_example2(args) -> int:
    lag = args.lag if args.lag is not None else 1.0
    if lag < 0:
        raise InputError("--lag must be nonnegative")
    K_override = args.override_k
    params = mackeyglass.MGParams.example2(lag)
    out = _out_dir(args)
    initial = InitialCondition.constant(args.x0)
    _emit(_mg_report(params, initial, K_override, lag, args, out, args.simulate), out, "example2_report.json")
    return EXIT_OK


def cmd_mg(args) -> int:
    pf = _load(args)
    if pf.equation_class != "mackey_glass":
        raise InputError("the mg command needs equation_class = mackey_glass")
    params, initial = pf.problem
    if args.lag is not None:
        params = mackeyglass.MGParams(params.alpha, params.beta, params.n, params.r, params.r0, params.R,
                                      ConstantLag(args.lag))
    K_override = args.override_k if args.override_k is not None else pf.K_override
    out = _out_dir(args)
    if args.horizon is None:
        args.horizon = pf.horizon
    report = _mg_report(params, initial, K_override, params.h0, args, out, args.simulate)
    _emit(report, out, "mg_report.json")
    return EXIT_OK


# ---------------------------------------------------------------------------
# check / simulate / bound
# ---------------------------------------------------------------------------


def cmd_check(args) -> int:
    pf = _load(args)
    horizon = _horizon(args, pf)
    if pf.equation_class == "mackey_glass":
        params, _ = pf.problem
        v7, vbbi = mackeyglass.mg_verdicts(params, args.override_k if args.override_k is not None else pf.K_override)
        verdict = vbbi if args.criterion == "BBIComparison" else v7
    else:
        verdict = criteria.check_problem(pf.problem, args.criterion, args.burn_in, horizon, args.grid_step)
    _emit(verdict.to_dict())
    return EXIT_OK


def _simulate(pf: ProblemFile, horizon: float, step: float | None):
    if pf.equation_class == "mackey_glass":
        params, initial = pf.problem
        delays = [params.h]
    else:
        delays = pf.problem.delays()
    cfg = solver.IntegratorConfig.for_delays(delays, horizon)
    if step is not None:
        cfg = solver.IntegratorConfig(horizon, step)
    if pf.equation_class == "linear":
        return solver.integrate_linear(pf.problem, cfg)
    if pf.equation_class == "nonlinear":
        return solver.integrate_nonlinear(pf.problem, cfg)
    return mackeyglass.simulate_mg(params, initial, cfg)


def cmd_simulate(args) -> int:
    pf = _load(args)
    traj = _simulate(pf, _horizon(args, pf), args.step)
    out = _out_dir(args) or Path(".")
    path = traj.write_csv(out / "trajectory.csv", args.sample_step)
    traj.write_breakpoints_csv(out / "breakpoints.csv")
    for w in traj.warnings:
        print(f"warning: {w}", file=sys.stderr)
    print(path)
    return EXIT_OK


def cmd_bound(args) -> int:
    pf = _load(args)
    if pf.equation_class == "mackey_glass":
        params, _ = pf.problem
        K_override = args.override_k if args.override_k is not None else pf.K_override
        b = mackeyglass.mg_attractor_bound(params, K_override)
        report = {"criterion": "Thm7", "quantity": "lag", "h0_max": b.theorem7, "bbi_h0_max": b.bbi}
    else:
        report = criteria.delay_bound(pf.problem, _horizon(args, pf), args.grid_step)
    _emit(report)
    return EXIT_OK


# ---------------------------------------------------------------------------
# sweep
# ---------------------------------------------------------------------------


def set_path(data: dict, path: str, value: float) -> dict:
    """Copy of ``data`` with the number at dotted ``path`` replaced."""
    out = copy.deepcopy(data)
    node = out
    keys = path.split(".")
    for k in keys[:-1]:
        node = node[int(k)] if isinstance(node, list) else node[k]
    last = keys[-1]
    if isinstance(node, list):
        last = int(last)
    elif last not in node:
        raise KeyError(path)
    if not isinstance(node[last], (int, float)) or isinstance(node[last], bool):
        raise InputError(f"{path} does not point to a number")
    node[last] = value
    return out


def _sweep_point(raw: dict, path: str, value: float, criterion, simulate: bool, period, horizon, step) -> dict:
    pf = build_problem(set_path(raw, path, value))
    row = {"value": value, "criterion": "", "certified": False, "growth_factor": "", "simulated_stable": ""}
    try:
        if pf.equation_class == "mackey_glass":
            params, _ = pf.problem
            v, _ = mackeyglass.mg_verdicts(params, pf.K_override)
        else:
            v = criteria.check_problem(pf.problem, criterion, None, horizon)
        row["criterion"], row["certified"] = v.criterion_id, v.certified
    except DelayStabError as exc:
        row["criterion"] = f"not applicable: {exc}"
    if simulate:
        traj = _simulate(pf, horizon, step)
        if period is None:
            delays = pf.problem.delays() if pf.equation_class != "mackey_glass" else [pf.problem[0].h]
            period = max([d.lag_bound for d in delays] + [1.0])
        g = analysis.growth_factor(traj, period)
        row["growth_factor"] = g
        row["simulated_stable"] = g < 1.0 - NEUTRAL_TOL
    return row


def _threads() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def cmd_sweep(args) -> int:
    pf = _load(args)
    lo, hi = args.range
    if args.steps < 1:
        raise InputError("--steps must be at least 1")
    values = [lo] if args.steps == 1 else [lo + (hi - lo) * k / (args.steps - 1) for k in range(args.steps)]
    try:
        set_path(pf.raw, args.parameter, float(values[0]))
    except (KeyError, IndexError, ValueError, TypeError):
        raise InputError(f"parameter path {args.parameter!r} not found in {args.config}") from None
    horizon = _horizon(args, pf)
    job = (args.parameter, args.criterion, args.simulate, args.period, horizon, args.step)
    workers = _threads()
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            rows = list(ex.map(_sweep_point, *zip(*[(pf.raw, job[0], v) + job[1:] for v in values])))
    else:
        rows = [_sweep_point(pf.raw, job[0], v, *job[1:]) for v in values]
    rows.sort(key=lambda r: r["value"])
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    cols = ["value", "criterion", "certified", "growth_factor", "simulated_stable"]
    w.writerow(cols)
    for r in rows:
        w.writerow([repr(r[c]) if isinstance(r[c], float) else r[c] for c in cols])
    out = _out_dir(args)
    if out is not None:
        (out / "sweep.csv").write_text(buf.getvalue())
    sys.stdout.write(buf.getvalue())
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="FILE", help="problem description (JSON)")
    common.add_argument("--horizon", type=float, metavar="T")
    common.add_argument("--step", type=float, metavar="H", help="integration step")
    common.add_argument("--out", metavar="DIR", help="directory for CSV/JSON output")
    common.add_argument("--criterion", metavar="NAME", choices=criteria.CRITERIA)
    common.add_argument("--lag", type=float, metavar="TAU")
    common.add_argument("--sample-step", type=float, default=None, help="CSV sampling step (default: native grid)")

    p = argparse.ArgumentParser(prog="delaystab", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    e1 = sub.add_parser("example1", parents=[common], help="floor-argument destabilization example")
    e1.add_argument("--b", type=float, default=1.8)
    e1.add_argument("--variant", choices=("vanishing_a", "positive_a"), default="vanishing_a")
    e1.set_defaults(func=cmd_example1)

    e2 = sub.add_parser("example2", parents=[common], help="Mackey-Glass example with r(t) = 2.7 + 0.3 sin t")
    e2.add_argument("--override-k", type=float, nargs="?", const=1.5, default=None, metavar="K", dest="override_k",
                    help="use K instead of the equilibrium root (bare flag: 1.5)")
    e2.add_argument("--simulate", action="store_true")
    e2.add_argument("--x0", type=float, default=1.0, help="constant initial history")
    e2.set_defaults(func=cmd_example2)

    c = sub.add_parser("check", parents=[common], help="evaluate a stability criterion")
    c.add_argument("--burn-in", type=float, default=None)
    c.add_argument("--grid-step", type=float, default=0.01)
    c.add_argument("--override-k", type=float, metavar="K", dest="override_k")
    c.set_defaults(func=cmd_check)

    s = sub.add_parser("simulate", parents=[common], help="integrate and write trajectory.csv")
    s.set_defaults(func=cmd_simulate)

    b = sub.add_parser("bound", parents=[common], help="largest certified delay bound")
    b.add_argument("--grid-step", type=float, default=0.01)
    b.add_argument("--override-k", type=float, metavar="K", dest="override_k")
    b.set_defaults(func=cmd_bound)

    sw = sub.add_parser("sweep", parents=[common], help="vary one number in the problem file")
    sw.add_argument("--parameter", required=True, help="dotted path, e.g. terms.0.b.value")
    sw.add_argument("--range", type=float, nargs=2, required=True, metavar=("LO", "HI"))
    sw.add_argument("--steps", type=int, default=11)
    sw.add_argument("--simulate", action="store_true", help="add growth factor per point")
    sw.add_argument("--period", type=float, default=None, help="growth-factor period (default: max lag bound, at least 1)")
    sw.set_defaults(func=cmd_sweep)

    m = sub.add_parser("mg", parents=[common], help="Mackey-Glass derived constants and bounds")
    m.add_argument("--simulate", action="store_true")
    m.add_argument("--override-k", type=float, metavar="K", dest="override_k")
    m.set_defaults(func=cmd_mg)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (SchemaError, InputError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (DelayStabError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
