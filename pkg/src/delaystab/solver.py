"""Fixed-step method-of-steps integration with cubic Hermite dense output.

Each step is a classical four-stage Runge-Kutta step.  Delayed values are
read from the trajectory's own dense interpolant; a delayed argument that
falls inside the step being taken (zero lag, or the tail of a distributed
kernel) is read from the quadratic that matches the step's initial value,
initial slope and the current stage value.

The step grid contains every breakpoint of every coefficient, every
breakpoint of every delay (all integers for ``h(t) = floor(t)``) and the
discontinuities propagated from ``t = 0`` through constant lags up to the
third generation.  No step straddles one of these points.
"""

from __future__ import annotations

import bisect
import csv
import itertools
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterator, Sequence

import numpy as np

from .errors import BlowUpError, DomainError
from .model import (
    SNAP,
    AtomKernel,
    Constant,
    ConstantLag,
    DelaySpec,
    DensityKernel,
    DistributedTerm,
    FloorArgument,
    InitialCondition,
    LinearDDE,
    NonlinearDDE,
    Nonlinearity,
    PiecewisePeriodic,
    ScalarFunctionSpec,
    Tabulated,
    TabulatedLag,
    integrate,
)

DEFAULT_STEP = 0.01
PROPAGATION_GENERATIONS = 3


@dataclass(frozen=True)
class IntegratorConfig:
    horizon: float
    step_size: float = DEFAULT_STEP
    quadrature_nodes_per_step: int = 2

    def __post_init__(self):
        if not self.horizon > 0:
            raise DomainError(f"horizon must be positive, got {self.horizon}")
        if not self.step_size > 0:
            raise DomainError(f"step size must be positive, got {self.step_size}")
        if self.quadrature_nodes_per_step < 2:
            raise DomainError("quadrature_nodes_per_step must be at least 2")

    @classmethod
    def for_delays(cls, delays: Sequence[DelaySpec], horizon: float, **kw) -> "IntegratorConfig":
        """Default step ``min(0.01, lag / 20)`` over the smallest positive lag bound."""
        lags = [d.lag_bound for d in delays if d.lag_bound > 0]
        step = min([DEFAULT_STEP] + [lag / 20 for lag in lags])
        return cls(horizon=horizon, step_size=step, **kw)

    def check_against(self, delays: Sequence[DelaySpec]) -> None:
        lags = [d.lag_bound for d in delays if d.lag_bound > 0]
        if lags and self.step_size > min(lags) / 10 * (1 + 1e-12):
            raise DomainError(
                f"step {self.step_size} exceeds a tenth of the smallest lag bound {min(lags)}"
            )


# ---------------------------------------------------------------------------
# Trajectory
# ---------------------------------------------------------------------------


def _hermite(t0, t1, x0, x1, d0, d1, s):
    h = t1 - t0
    u = (s - t0) / h
    u2 = u * u
    u3 = u2 * u
    return (
        (2 * u3 - 3 * u2 + 1) * x0
        + (u3 - 2 * u2 + u) * h * d0
        + (-2 * u3 + 3 * u2) * x1
        + (u3 - u2) * h * d1
    )


@dataclass(frozen=True)
class Trajectory:
    """Piecewise cubic solution on ``[0, horizon]`` plus the initial history.

    Segment ``i`` spans ``[t[i], t[i+1]]`` and is the cubic Hermite
    interpolant of ``x`` with slope ``d_start[i]`` at its left end and
    ``d_end[i]`` at its right end.  The two slopes at a node differ only where
    the equation's data jump.
    """

    t: np.ndarray
    x: np.ndarray
    d_start: np.ndarray
    d_end: np.ndarray
    initial: InitialCondition
    breakpoints: tuple[float, ...]
    step_size: float
    warnings: tuple[str, ...] = ()

    def __post_init__(self):
        for name in ("t", "x", "d_start", "d_end"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "_tl", self.t.tolist())

    @property
    def horizon(self) -> float:
        return float(self.t[-1])

    def __call__(self, s: float) -> float:
        if s < 0:
            return self.initial(s)
        tl = self._tl
        if s > tl[-1]:
            if s - tl[-1] <= SNAP * max(1.0, tl[-1]):
                return float(self.x[-1])
            raise DomainError(f"t={s} is beyond the horizon {tl[-1]}")
        i = min(bisect.bisect_right(tl, s) - 1, len(tl) - 2)
        return _hermite(tl[i], tl[i + 1], self.x[i], self.x[i + 1], self.d_start[i], self.d_end[i], s)

    def sample(self, ts: Sequence[float] | np.ndarray) -> np.ndarray:
        ts = np.asarray(ts, dtype=float)
        out = np.empty_like(ts)
        neg = ts < 0
        out[neg] = [self.initial(float(s)) for s in ts[neg]]
        pos = ~neg
        if np.any(ts[pos] > self.t[-1] * (1 + SNAP) + SNAP):
            raise DomainError("sample time beyond the horizon")
        s = np.minimum(ts[pos], self.t[-1])
        i = np.clip(np.searchsorted(self.t, s, side="right") - 1, 0, len(self.t) - 2)
        out[pos] = _hermite(self.t[i], self.t[i + 1], self.x[i], self.x[i + 1], self.d_start[i], self.d_end[i], s)
        return out

    def segments(self) -> Iterator[tuple[float, float, np.ndarray]]:
        """Yield ``(t0, t1, coeffs)``; ``coeffs`` are in powers of ``(s - t0)``, lowest first."""
        for i in range(len(self.t) - 1):
            t0, t1 = self.t[i], self.t[i + 1]
            h = t1 - t0
            x0, x1, d0, d1 = self.x[i], self.x[i + 1], self.d_start[i], self.d_end[i]
            c2 = (3 * (x1 - x0) / h - 2 * d0 - d1) / h
            c3 = (d0 + d1 - 2 * (x1 - x0) / h) / (h * h)
            yield float(t0), float(t1), np.array([x0, d0, c2, c3])

    def write_csv(self, path: str | Path, sample_step: float | None = None) -> Path:
        """Write ``t,x`` rows; default sampling is the native grid."""
        path = Path(path)
        if sample_step is None:
            ts, xs = self.t, self.x
        else:
            n = int(math.floor(self.horizon / sample_step + 1e-9))
            ts = np.arange(n + 1) * sample_step
            xs = self.sample(ts)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t", "x"])
            for t, x in zip(ts, xs):
                w.writerow([repr(float(t)), repr(float(x))])
        return path

    def write_breakpoints_csv(self, path: str | Path) -> Path:
        path = Path(path)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t", "kind"])
            for t in self.breakpoints:
                w.writerow([repr(float(t)), "initial" if t == 0 else "breakpoint"])
        return path


# ---------------------------------------------------------------------------
# Grid construction
# ---------------------------------------------------------------------------


def _propagated(lags: Sequence[float], horizon: float) -> list[float]:
    out = set()
    for g in range(1, PROPAGATION_GENERATIONS + 1):
        for combo in itertools.combinations_with_replacement(lags, g):
            s = math.fsum(combo)
            if 0 < s <= horizon:
                out.add(s)
    return sorted(out)


def build_grid(
    specs: Sequence[ScalarFunctionSpec],
    delays: Sequence[DelaySpec],
    horizon: float,
    step: float,
) -> tuple[list[float], list[float]]:
    """Return ``(nodes, breakpoints)`` for a fixed-step march over ``[0, horizon]``."""
    marks = {0.0, float(horizon)}
    for spec in specs:
        marks.update(spec.breakpoints(0.0, horizon))
    for d in delays:
        marks.update(d.breakpoints(0.0, horizon))
    lags = sorted({d.tau for d in delays if isinstance(d, ConstantLag) and d.tau > 0})
    marks.update(_propagated(lags, horizon))
    marks = sorted(m for m in marks if 0.0 <= m <= horizon)
    breaks = [marks[0]]
    for m in marks[1:]:
        if m - breaks[-1] > SNAP * max(1.0, m):
            breaks.append(m)
    breaks[-1] = float(horizon)
    nodes = [breaks[0]]
    for u, v in zip(breaks, breaks[1:]):
        n = max(1, math.ceil((v - u) / step - 1e-9))
        h = (v - u) / n
        nodes.extend(u + k * h for k in range(1, n))
        nodes.append(v)
    return nodes, breaks


# ---------------------------------------------------------------------------
# Stepping core
# ---------------------------------------------------------------------------


class _Past:
    """Reads ``x(s)`` for ``s`` up to the stage time of the step in progress."""

    def __init__(self, initial: InitialCondition):
        self.initial = initial
        self.ts: list[float] = [0.0]
        self.xs: list[float] = [float(initial.value_at_zero)]
        self.d0: list[float] = []
        self.d1: list[float] = []
        # step in progress
        self.tn = 0.0
        self.xn = self.xs[0]
        self.kn = 0.0
        self.T = 0.0
        self.y = self.xs[0]

    def stage(self, T: float, y: float) -> None:
        self.T, self.y = T, y

    def __call__(self, s: float) -> float:
        tn = self.tn
        if s > tn:
            if s >= self.T:
                return self.y
            h = self.T - tn
            u = s - tn
            c = (self.y - self.xn - self.kn * h) / (h * h)
            return self.xn + u * (self.kn + c * u)
        if s < 0.0:
            if s > -SNAP:
                return self.xs[0]
            return self.initial(s)
        ts = self.ts
        if s >= tn:
            return self.xn
        i = bisect.bisect_right(ts, s) - 1
        return _hermite(ts[i], ts[i + 1], self.xs[i], self.xs[i + 1], self.d0[i], self.d1[i], s)


RHS = Callable[[float, float, Callable[[float], float], bool], float]


def march(
    rhs: RHS,
    initial: InitialCondition,
    nodes: Sequence[float],
    breakpoints: Sequence[float],
    step_size: float,
    monitor: Callable[[float, float], None] | None = None,
) -> Trajectory:
    """Integrate ``x' = rhs(t, x, past, left)`` across the given nodes.

    ``past(s)`` returns the solution at ``s <= t``; ``left`` asks the right-hand
    side to use left limits of its data (set for the stage at the right end
    of a step).
    """
    past = _Past(initial)
    x = past.xs[0]
    t = nodes[0]
    try:
        for t1 in nodes[1:]:
            h = t1 - t
            past.tn, past.xn = t, x
            past.stage(t, x)
            k1 = rhs(t, x, past, False)
            past.kn = k1
            tm = t + 0.5 * h
            y = x + 0.5 * h * k1
            past.stage(tm, y)
            k2 = rhs(tm, y, past, False)
            y = x + 0.5 * h * k2
            past.stage(tm, y)
            k3 = rhs(tm, y, past, False)
            y = x + h * k3
            past.stage(t1, y)
            k4 = rhs(t1, y, past, True)
            x1 = x + h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
            if not math.isfinite(x1):
                raise BlowUpError(t1)
            past.stage(t1, x1)
            d1 = rhs(t1, x1, past, True)
            past.ts.append(t1)
            past.xs.append(x1)
            past.d0.append(k1)
            past.d1.append(d1)
            if monitor is not None:
                monitor(t1, x1)
            t, x = t1, x1
    except OverflowError as exc:
        raise BlowUpError(t) from exc
    return Trajectory(
        t=past.ts,
        x=past.xs,
        d_start=past.d0,
        d_end=past.d1,
        initial=initial,
        breakpoints=tuple(breakpoints),
        step_size=step_size,
    )


# ---------------------------------------------------------------------------
# Kernel quadrature
# ---------------------------------------------------------------------------


class _KernelRule:
    """Relative nodes and weights for one distributed term, cached per interval length."""

    def __init__(self, kernel, step: float, q: int):
        self.kernel = kernel
        self.step = step
        self.gl_x, self.gl_w = np.polynomial.legendre.leggauss(q)
        self.cache: dict[float, tuple[list[float], list[float]]] = {}

    def rule(self, length: float) -> tuple[list[float], list[float]]:
        hit = self.cache.get(length)
        if hit is not None:
            return hit
        k = self.kernel
        if isinstance(k, AtomKernel):
            ps = [p for p, _ in k.atoms]
            ws = [w for _, w in k.atoms]
        else:
            m = max(1, math.ceil(length / self.step - 1e-9))
            ps, ws = [], []
            for j in range(m):
                for gx, gw in zip(self.gl_x, self.gl_w):
                    p = (j + 0.5 * (gx + 1.0)) / m
                    ps.append(p)
                    ws.append(0.5 * gw / m * k.weight(p))
        if len(self.cache) < 4096:
            self.cache[length] = (ps, ws)
        return ps, ws

    def _split_rule(self, lo: float, t: float, cut: float) -> tuple[list[float], list[float]]:
        # panels aligned with the kink of x at the history boundary
        length = t - lo
        ps, ws = [], []
        for u, v in ((lo, cut), (cut, t)):
            m = max(1, math.ceil((v - u) / self.step - 1e-9))
            pl = (v - u) / m
            centers = u + pl * (np.arange(m)[:, None] + 0.5 * (self.gl_x[None, :] + 1.0))
            ps.append(((centers - lo) / length).ravel())
            ws.append(np.broadcast_to(0.5 * self.gl_w * pl / length, centers.shape).ravel())
        p = np.concatenate(ps)
        density = self.kernel.density
        if isinstance(density, Constant):
            w = np.concatenate(ws)
        else:
            w = np.concatenate(ws) * np.array([self.kernel.weight(float(x)) for x in p])
        return p.tolist(), w.tolist()

    def integral(self, lo: float, t: float, value: Callable[[float], float]) -> float:
        length = t - lo
        if length <= 0:
            return value(t)
        if isinstance(self.kernel, DensityKernel) and lo < 0.0 < t and -lo > SNAP and t > SNAP:
            ps, ws = self._split_rule(lo, t, 0.0)
        else:
            ps, ws = self.rule(length)
        return math.fsum(w * value(lo + p * length) for p, w in zip(ps, ws))


def kernel_integral(term: DistributedTerm, t: float, x: Callable[[float], float], step: float = DEFAULT_STEP, q: int = 2) -> float:
    """Integral of ``x`` over ``[h(t), t]`` against the term's normalized kernel."""
    return _KernelRule(term.kernel, step, q).integral(term.lower_limit(t), t, x)


# ---------------------------------------------------------------------------
# Equation-specific drivers
# ---------------------------------------------------------------------------


def _grid_for(specs, delays, cfg: IntegratorConfig):
    cfg.check_against(delays)
    return build_grid(specs, delays, cfg.horizon, cfg.step_size)


def integrate_linear(problem: LinearDDE, cfg: IntegratorConfig) -> Trajectory:
    """Method-of-steps solution of the linear equation on ``[0, cfg.horizon]``."""
    problem.validate(cfg.horizon, min(cfg.step_size, 0.01))
    a = problem.a
    conc = list(problem.concentrated)
    dist = [
        (d.coefficient, d.lower_limit, _KernelRule(d.kernel, cfg.step_size, cfg.quadrature_nodes_per_step))
        for d in problem.distributed
    ]

    def rhs(t, x, past, left):
        v = a(t, left) * x
        for b, h in conc:
            v += b(t, left) * past(h(t, left))
        for b, h, rule in dist:
            v += b(t, left) * rule.integral(h(t, left), t, past)
        return -v

    specs = [a] + problem.coefficients()
    nodes, breaks = _grid_for(specs, problem.delays(), cfg)
    return march(rhs, problem.initial, nodes, breaks, cfg.step_size)


def integrate_nonlinear(problem: NonlinearDDE, cfg: IntegratorConfig) -> Trajectory:
    """Method-of-steps solution of ``x' + f(t,x) + sum g_k(t, x(h_k)) + ... = 0``.

    Leaving the declared sector-bound box does not stop the run; the first exit
    is recorded in ``Trajectory.warnings``.
    """
    lo, hi = problem.admissible_initial_box
    x0 = problem.initial.value_at_zero
    if not lo <= x0 <= hi:
        raise DomainError(f"initial value {x0} outside the admissible box [{lo}, {hi}]")
    f = problem.f
    conc = list(problem.concentrated)
    dist = [
        (g, d.coefficient, d.lower_limit, _KernelRule(d.kernel, cfg.step_size, cfg.quadrature_nodes_per_step))
        for g, d in problem.distributed
    ]

    def rhs(t, x, past, left):
        v = f(t, x, left)
        for g, h in conc:
            v += g(t, past(h(t, left)), left)
        for g, b, h, rule in dist:
            v += b(t, left) * rule.integral(h(t, left), t, lambda s: g(t, past(s), left))
        return -v

    warnings: list[str] = []
    monitor = None
    if problem.sector_bounds is not None:
        x1, x2 = problem.sector_bounds.box

        def monitor(t, x):
            if not warnings and not x1 <= x <= x2:
                warnings.append(
                    f"state {x:.6g} left the sector-bound box [{x1:.6g}, {x2:.6g}] at t={t:.6g}; "
                    "sector bounds no longer certified"
                )

    specs = _nonlinearity_specs(f) + [s for g, _ in conc for s in _nonlinearity_specs(g)]
    specs += [s for g, d in problem.distributed for s in _nonlinearity_specs(g) + [d.coefficient]]
    nodes, breaks = _grid_for(specs, problem.delays(), cfg)
    traj = march(rhs, problem.initial, nodes, breaks, cfg.step_size, monitor)
    if warnings:
        traj = _with_warnings(traj, warnings)
    return traj


def _nonlinearity_specs(g: Nonlinearity) -> list[ScalarFunctionSpec]:
    return [v for v in vars(g).values() if isinstance(v, ScalarFunctionSpec)]


def _with_warnings(traj: Trajectory, warnings: Sequence[str]) -> Trajectory:
    return Trajectory(
        traj.t, traj.x, traj.d_start, traj.d_end, traj.initial,
        traj.breakpoints, traj.step_size, tuple(traj.warnings) + tuple(warnings),
    )


def integrate_rhs(
    rhs: RHS,
    initial: InitialCondition,
    specs: Sequence[ScalarFunctionSpec],
    delays: Sequence[DelaySpec],
    cfg: IntegratorConfig,
) -> Trajectory:
    """Generic entry point for right-hand sides outside the linear/nonlinear forms."""
    nodes, breaks = _grid_for(specs, delays, cfg)
    return march(rhs, initial, nodes, breaks, cfg.step_size)


# ---------------------------------------------------------------------------
# The destabilization example
# ---------------------------------------------------------------------------

EXAMPLE1_VARIANTS = ("baseline", "vanishing_a", "positive_a")
EXAMPLE1_TAIL = {"vanishing_a": 0.0, "positive_a": 0.5}


def example1_eps(b: float) -> float:
    """Length of the ``a = 3b`` window that drives ``x`` to zero at ``n + eps``."""
    return math.log(4.0) / (3.0 * b)


def example1_problem(b: float, variant: str, x0: float = 1.0) -> LinearDDE:
    """``x' + a(t) x + b x(floor(t)) = 0`` with the requested ``a``."""
    if variant not in EXAMPLE1_VARIANTS:
        raise DomainError(f"unknown variant {variant!r}; expected one of {EXAMPLE1_VARIANTS}")
    if variant == "baseline":
        a: ScalarFunctionSpec = Constant(0.0)
    else:
        eps = example1_eps(b)
        a = PiecewisePeriodic(1.0, ((0.0, eps, 3.0 * b), (eps, 1.0, EXAMPLE1_TAIL[variant])))
    return LinearDDE(a, ((Constant(float(b)), FloorArgument()),), (), InitialCondition.constant(x0))


def integrate_example1(b: float, variant: str, n_periods: int, step: float = 1e-3) -> Trajectory:
    """Solve the floor-argument example over ``n_periods`` unit periods.

    The default step is finer than the generic default because ``a = 3b`` makes
    the window ``[n, n + eps]`` a fast exponential decay.
    """
    traj = integrate_linear(example1_problem(b, variant), IntegratorConfig(horizon=float(n_periods), step_size=step))
    if variant != "baseline" and not 1.6 < b < 1.9:
        traj = _with_warnings(traj, [f"b={b} is outside the regime 1.6 < b < 1.9"])
    return traj


# ---------------------------------------------------------------------------
# Time rescaling s = p(t) = int_0^t a
# ---------------------------------------------------------------------------


def _cumulative_a(a: ScalarFunctionSpec, ts: Sequence[float]) -> np.ndarray:
    p = np.zeros(len(ts))
    for i in range(1, len(ts)):
        p[i] = p[i - 1] + integrate(a, ts[i - 1], ts[i])
    return p


def _require_positive_a(a: ScalarFunctionSpec, ts: Sequence[float]) -> None:
    vals = a.sample(ts)
    if np.min(vals) <= 0:
        i = int(np.argmin(vals))
        raise DomainError(f"a(t) is not bounded away from 0 (a({ts[i]:.6g}) = {vals[i]:.6g})")


def rescale_time(problem: LinearDDE, trajectory: Trajectory) -> Trajectory:
    """Reparametrize ``x(t)`` to ``y(s) = x(t)`` with ``s = int_0^t a``."""
    a = problem.a
    ts = trajectory.t
    _require_positive_a(a, ts)
    s = _cumulative_a(a, ts)
    a_right = np.array([a(float(t)) for t in ts[:-1]])
    a_left = np.array([a(float(t), left=True) for t in ts[1:]])
    hist = problem.initial
    if isinstance(a, Constant) or isinstance(hist.history, Constant):
        a0 = a(0.0)
        h = hist.history
        y_hist = h if isinstance(h, Constant) else _compose_history(h, a0)
        new_initial = InitialCondition(y_hist, hist.value_at_zero)
    else:
        raise DomainError("rescaling a non-constant history needs a constant a")
    return Trajectory(
        t=s,
        x=trajectory.x,
        d_start=trajectory.d_start / a_right,
        d_end=trajectory.d_end / a_left,
        initial=new_initial,
        breakpoints=tuple(float(v) for v in np.interp(trajectory.breakpoints, ts, s)),
        step_size=float(np.max(np.diff(s))),
        warnings=trajectory.warnings,
    )


@dataclass(frozen=True)
class _ScaledHistory(ScalarFunctionSpec):
    inner: ScalarFunctionSpec
    rate: float
    kind = "scaled_history"

    def __call__(self, s, left=False):
        return self.inner(s / self.rate, left)

    def to_dict(self):
        raise DomainError("rescaled histories are not serializable")


def _compose_history(h: ScalarFunctionSpec, rate: float) -> ScalarFunctionSpec:
    return _ScaledHistory(h, rate)


def rescaled_problem(problem: LinearDDE, horizon: float, samples_per_unit: int = 200) -> LinearDDE:
    """The equation in the rescaled time ``s``: unit non-delay coefficient,
    coefficient ``b/a`` and delayed argument ``l(s) = p(h(p^{-1}(s)))``."""
    if len(problem.concentrated) != 1 or problem.distributed:
        raise DomainError("time rescaling is defined for a single concentrated delay")
    (b, h), = problem.concentrated
    a = problem.a
    if isinstance(a, Constant):
        if not a.value > 0:
            raise DomainError("a must be positive")
        rate = a.value
        coef = Constant(b.value / rate) if isinstance(b, Constant) else _ScaledCoefficient(b, rate)
        if isinstance(h, ConstantLag):
            delay: DelaySpec = ConstantLag(h.tau * rate)
        else:
            n = max(2, int(horizon * rate * samples_per_unit))
            ss = np.linspace(0.0, horizon * rate, n + 1)
            delay = TabulatedLag(tuple((float(s), float(rate * (s / rate - h(s / rate)))) for s in ss))
        hist = problem.initial.history
        new_hist = hist if isinstance(hist, Constant) else _compose_history(hist, rate)
        return LinearDDE(Constant(1.0), ((coef, delay),), (), InitialCondition(new_hist, problem.initial.value_at_zero))
    # general a: tabulate p, its inverse and the transformed data
    n = max(2, int(horizon * samples_per_unit))
    ts = np.linspace(0.0, horizon, n + 1)
    _require_positive_a(a, ts)
    p = _cumulative_a(a, ts)

    def p_of(t):
        if t >= 0:
            return float(np.interp(t, ts, p))
        return -integrate(a, t, 0.0)

    coef = Tabulated(tuple((float(s), b(float(t)) / a(float(t))) for s, t in zip(p, ts)))
    lag = Tabulated(tuple((float(s), float(s - p_of(h(float(t))))) for s, t in zip(p, ts)))
    if not isinstance(problem.initial.history, Constant):
        raise DomainError("rescaling with variable a needs a constant history")
    return LinearDDE(
        Constant(1.0),
        ((coef, TabulatedLag(lag.knots)),),
        (),
        problem.initial,
    )


@dataclass(frozen=True)
class _ScaledCoefficient(ScalarFunctionSpec):
    inner: ScalarFunctionSpec
    rate: float
    kind = "scaled_coefficient"

    def __call__(self, s, left=False):
        return self.inner(s / self.rate, left) / self.rate

    def breakpoints(self, lo, hi):
        return [b * self.rate for b in self.inner.breakpoints(lo / self.rate, hi / self.rate)]

    def to_dict(self):
        raise DomainError("rescaled coefficients are not serializable")
