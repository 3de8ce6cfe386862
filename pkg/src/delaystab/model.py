"""Declarative problem descriptions.

Everything here is an immutable value.  Time functions (coefficients,
histories, kernel densities) are :class:`ScalarFunctionSpec` subclasses,
delay arguments are :class:`DelaySpec` subclasses, and the equation
containers :class:`LinearDDE` / :class:`NonlinearDDE` bundle them with an
:class:`InitialCondition`.

Piecewise objects are right-continuous.  Every ``__call__`` accepts
``left=True`` to request the left limit instead, which the integrator uses
for the stage that sits on the right end of a step.  Time arguments within
``SNAP`` (relative) of a breakpoint are treated as lying on it, so that
grid points computed as ``n + eps`` land on the intended piece.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DomainError, ExtrapolationError, PreconditionError

SNAP = 1e-10


def _close(t: float, b: float) -> bool:
    return abs(t - b) <= SNAP * max(1.0, abs(b))


# ---------------------------------------------------------------------------
# Scalar functions of time
# ---------------------------------------------------------------------------


class ScalarFunctionSpec:
    """A scalar function of time described by data rather than code."""

    kind: str = ""

    def __call__(self, t: float, left: bool = False) -> float:
        raise NotImplementedError

    def breakpoints(self, lo: float, hi: float) -> list[float]:
        """Points in ``[lo, hi]`` where the function or its slope may jump."""
        return []

    def sample(self, ts: Sequence[float]) -> np.ndarray:
        return np.array([self(float(t)) for t in ts], dtype=float)

    def bounds(self) -> tuple[float, float] | None:
        """Exact range ``(min, max)`` on ``t >= 0`` when it is known in closed form."""
        return None

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class Constant(ScalarFunctionSpec):
    value: float
    kind = "constant"

    def __call__(self, t, left=False):
        return self.value

    def bounds(self):
        return (self.value, self.value)

    def to_dict(self):
        return {"kind": self.kind, "value": self.value}


@dataclass(frozen=True)
class SinusoidAffine(ScalarFunctionSpec):
    """``offset + amplitude * sin(frequency * t)``."""

    offset: float
    amplitude: float
    frequency: float
    kind = "sinusoid_affine"

    def __call__(self, t, left=False):
        return self.offset + self.amplitude * math.sin(self.frequency * t)

    def bounds(self):
        if self.frequency == 0:
            return (self.offset, self.offset)
        amp = abs(self.amplitude)
        return (self.offset - amp, self.offset + amp)

    def to_dict(self):
        return {
            "kind": self.kind,
            "offset": self.offset,
            "amplitude": self.amplitude,
            "frequency": self.frequency,
        }


@dataclass(frozen=True)
class PiecewisePeriodic(ScalarFunctionSpec):
    """Periodic step function; ``pieces`` are ``(start, end, value)`` on ``[0, period)``."""

    period: float
    pieces: tuple[tuple[float, float, float], ...]
    kind = "piecewise_periodic"

    def __post_init__(self):
        if not self.period > 0:
            raise DomainError(f"period must be positive, got {self.period}")
        pieces = tuple(sorted((float(a), float(b), float(v)) for a, b, v in self.pieces))
        if not pieces:
            raise DomainError("piecewise_periodic needs at least one piece")
        if not _close(pieces[0][0], 0.0) or not _close(pieces[-1][1], self.period):
            raise DomainError("pieces must start at 0 and end at the period")
        for (a, b, _), (c, _, _) in zip(pieces, pieces[1:]):
            if not _close(b, c):
                raise DomainError(f"pieces leave a gap or overlap at {b} / {c}")
        for a, b, _ in pieces:
            if not b > a:
                raise DomainError(f"empty piece [{a}, {b})")
        object.__setattr__(self, "pieces", pieces)
        object.__setattr__(self, "_starts", [p[0] for p in pieces])

    def _phase(self, t: float, left: bool) -> float:
        u = math.fmod(t, self.period)
        if u < 0:
            u += self.period
        for b in self._starts + [self.period]:
            if _close(u, b):
                u = b
                break
        if u >= self.period:
            u = 0.0
        if left and u == 0.0:
            u = self.period
        return u

    def __call__(self, t, left=False):
        u = self._phase(t, left)
        if left:
            i = bisect.bisect_left(self._starts, u) - 1
        else:
            i = bisect.bisect_right(self._starts, u) - 1
        return self.pieces[max(i, 0)][2]

    def breakpoints(self, lo, hi):
        out = []
        k = math.floor(lo / self.period)
        while k * self.period <= hi + SNAP:
            for s in self._starts:
                b = k * self.period + s
                if lo - SNAP <= b <= hi + SNAP:
                    out.append(b)
            k += 1
        return out

    def bounds(self):
        vals = [p[2] for p in self.pieces]
        return (min(vals), max(vals))

    def to_dict(self):
        return {
            "kind": self.kind,
            "period": self.period,
            "pieces": [{"start": a, "end": b, "value": v} for a, b, v in self.pieces],
        }


@dataclass(frozen=True)
class Tabulated(ScalarFunctionSpec):
    """Knot table with step (right-continuous) or linear interpolation."""

    knots: tuple[tuple[float, float], ...]
    interpolation: str = "linear"
    kind = "tabulated"

    def __post_init__(self):
        knots = tuple((float(t), float(v)) for t, v in self.knots)
        if len(knots) < 1:
            raise DomainError("tabulated spec needs knots")
        ts = [k[0] for k in knots]
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise DomainError("tabulated knots must be strictly increasing in t")
        if self.interpolation not in ("step", "linear"):
            raise DomainError(f"unknown interpolation {self.interpolation!r}")
        object.__setattr__(self, "knots", knots)
        object.__setattr__(self, "_ts", ts)
        object.__setattr__(self, "_vs", [k[1] for k in knots])

    def __call__(self, t, left=False):
        ts, vs = self._ts, self._vs
        if t < ts[0]:
            if _close(t, ts[0]):
                t = ts[0]
            else:
                raise ExtrapolationError(f"t={t} is before the first knot {ts[0]}")
        if t > ts[-1]:
            if _close(t, ts[-1]):
                t = ts[-1]
            else:
                raise ExtrapolationError(f"t={t} is after the last knot {ts[-1]}")
        i = bisect.bisect_right(ts, t) - 1
        if i + 1 < len(ts) and _close(t, ts[i + 1]):
            i += 1
        if _close(t, ts[i]):
            t = ts[i]
        if self.interpolation == "step":
            if left and t == ts[i] and i > 0:
                return vs[i - 1]
            return vs[i]
        if i == len(ts) - 1:
            return vs[-1]
        w = (t - ts[i]) / (ts[i + 1] - ts[i])
        return (1.0 - w) * vs[i] + w * vs[i + 1]

    def breakpoints(self, lo, hi):
        return [t for t in self._ts if lo - SNAP <= t <= hi + SNAP]

    def bounds(self):
        return (min(self._vs), max(self._vs))

    def to_dict(self):
        return {
            "kind": self.kind,
            "knots": [[t, v] for t, v in self.knots],
            "interpolation": self.interpolation,
        }


def evaluate(spec: ScalarFunctionSpec, t: float) -> float:
    """Right-continuous value of ``spec`` at ``t``."""
    return spec(t)


def integrate(spec: ScalarFunctionSpec, lo: float, hi: float, max_step: float = 1e-3) -> float:
    """Composite trapezoid for the integral of ``spec`` over ``[lo, hi]``.

    Nodes are inserted at the function's breakpoints and one-sided limits are used
    on either side of them, so piecewise constant and piecewise linear specs
    integrate exactly.
    """
    if hi == lo:
        return 0.0
    if hi < lo:
        return -integrate(spec, hi, lo, max_step)
    if isinstance(spec, Constant):
        return spec.value * (hi - lo)
    nodes = [lo] + [b for b in spec.breakpoints(lo, hi) if lo < b < hi and not _close(b, lo) and not _close(b, hi)] + [hi]
    total = 0.0
    for u, v in zip(nodes, nodes[1:]):
        if isinstance(spec, PiecewisePeriodic) or (
            isinstance(spec, Tabulated) and spec.interpolation == "step"
        ):
            # constant between breakpoints
            total += spec(0.5 * (u + v)) * (v - u)
            continue
        n = max(1, math.ceil((v - u) / max_step))
        xs = np.linspace(u, v, n + 1)
        ys = np.array([spec(float(x)) for x in xs])
        ys[-1] = spec(v, left=True)
        total += float(np.trapezoid(ys, xs))
    return total


class CumulativeIntegral:
    """``P(x) = int_lo^x spec`` on ``[lo, hi]`` from one composite trapezoid pass.

    Uses the same nodes and one-sided limits as :func:`integrate`; values
    between nodes use the trapezoid on the partial panel, so piecewise linear
    specs are integrated exactly.
    """

    def __init__(self, spec: ScalarFunctionSpec, lo: float, hi: float, max_step: float = 1e-3):
        self.spec = spec
        self.lo, self.hi = lo, hi
        if isinstance(spec, Constant):
            self.nodes = None
            return
        marks = [lo] + [b for b in spec.breakpoints(lo, hi) if lo < b < hi and not _close(b, lo) and not _close(b, hi)] + [hi]
        nodes = [lo]
        for u, v in zip(marks, marks[1:]):
            n = max(1, math.ceil((v - u) / max_step))
            nodes.extend(np.linspace(u, v, n + 1)[1:].tolist())
        self.nodes = np.array(nodes)
        right = np.array([spec(t) for t in nodes])
        left = np.array([spec(t, left=True) for t in nodes])
        self.right, self.left = right, left
        panels = 0.5 * (right[:-1] + left[1:]) * np.diff(self.nodes)
        self.cum = np.concatenate([[0.0], np.cumsum(panels)])

    def __call__(self, x: float) -> float:
        if x < self.lo - SNAP or x > self.hi + SNAP:
            raise DomainError(f"x={x} outside [{self.lo}, {self.hi}]")
        if self.nodes is None:
            return self.spec.value * (x - self.lo)
        i = int(np.searchsorted(self.nodes, x, side="right")) - 1
        i = min(max(i, 0), len(self.nodes) - 1)
        if i == len(self.nodes) - 1 or _close(x, self.nodes[i]):
            return float(self.cum[i])
        fx = self.spec(x, left=True)
        return float(self.cum[i] + 0.5 * (self.right[i] + fx) * (x - self.nodes[i]))

    def between(self, u: float, v: float) -> float:
        return self(v) - self(u)


# ---------------------------------------------------------------------------
# Delay arguments
# ---------------------------------------------------------------------------


class DelaySpec:
    """A delayed argument ``h(t) <= t`` with a certified bound on ``t - h(t)``."""

    kind: str = ""

    def __call__(self, t: float, left: bool = False) -> float:
        raise NotImplementedError

    @property
    def lag_bound(self) -> float:
        raise NotImplementedError

    def breakpoints(self, lo: float, hi: float) -> list[float]:
        return []

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class ConstantLag(DelaySpec):
    tau: float
    kind = "constant_lag"

    def __post_init__(self):
        if not self.tau >= 0:
            raise DomainError(f"lag must be nonnegative, got {self.tau}")

    def __call__(self, t, left=False):
        return t - self.tau

    @property
    def lag_bound(self):
        return self.tau

    def to_dict(self):
        return {"kind": self.kind, "tau": self.tau}


@dataclass(frozen=True)
class FloorArgument(DelaySpec):
    """``h(t) = floor(t)``, the piecewise constant argument."""

    kind = "floor"

    def __call__(self, t, left=False):
        r = round(t)
        if r <= t and _close(t, r):
            return float(r - 1) if left else float(r)
        return float(math.floor(t))

    @property
    def lag_bound(self):
        return 1.0

    def breakpoints(self, lo, hi):
        return [float(k) for k in range(math.ceil(lo - SNAP), math.floor(hi + SNAP) + 1)]

    def to_dict(self):
        return {"kind": self.kind}


@dataclass(frozen=True)
class TabulatedLag(DelaySpec):
    """``h(t) = t - lag(t)`` with ``lag`` given by a knot table of nonnegative lags."""

    knots: tuple[tuple[float, float], ...]
    interpolation: str = "linear"
    kind = "tabulated_lag"

    def __post_init__(self):
        table = Tabulated(self.knots, self.interpolation)
        if min(table._vs) < 0:
            raise DomainError("tabulated lags must be nonnegative")
        object.__setattr__(self, "knots", table.knots)
        object.__setattr__(self, "_table", table)

    def __call__(self, t, left=False):
        return t - self._table(t, left)

    @property
    def lag_bound(self):
        return max(self._table._vs)

    def breakpoints(self, lo, hi):
        return self._table.breakpoints(lo, hi)

    def to_dict(self):
        return {
            "kind": self.kind,
            "knots": [[t, v] for t, v in self.knots],
            "interpolation": self.interpolation,
        }


def delay_at(spec: DelaySpec, t: float) -> float:
    """Value of the delayed argument ``h(t)``."""
    if t < 0:
        raise DomainError(f"delay arguments are defined for t >= 0, got {t}")
    return spec(t)


# ---------------------------------------------------------------------------
# Distributed delay kernels
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AtomKernel:
    """Finitely many point masses at relative positions ``p`` in ``[0, 1]`` of ``[h(t), t]``."""

    atoms: tuple[tuple[float, float], ...]
    kind = "atoms"

    def __post_init__(self):
        atoms = tuple((float(p), float(w)) for p, w in self.atoms)
        if not atoms:
            raise DomainError("atom kernel needs at least one atom")
        for p, w in atoms:
            if not 0.0 <= p <= 1.0:
                raise DomainError(f"atom position {p} outside [0, 1]")
            if not w > 0:
                raise DomainError(f"atom weight {w} must be positive")
        total = math.fsum(w for _, w in atoms)
        if abs(total - 1.0) > 1e-12:
            raise DomainError(f"atom weights sum to {total!r}, expected 1")
        object.__setattr__(self, "atoms", atoms)

    def to_dict(self):
        return {"kind": self.kind, "atoms": [{"position": p, "weight": w} for p, w in self.atoms]}


@dataclass(frozen=True)
class DensityKernel:
    """Nonnegative weight ``w(p)`` on relative position ``p`` in ``[0, 1]``.

    The kernel on ``[h, t]`` is ``w((s - h) / (t - h)) / (Z * (t - h))`` with
    ``Z`` the integral of ``w`` over ``[0, 1]``, so it integrates to one on
    every interval.
    """

    density: ScalarFunctionSpec
    kind = "density"
    normalizer: float = field(init=False, default=1.0)

    def __post_init__(self):
        grid = np.linspace(0.0, 1.0, 201)
        if min(self.density(float(p)) for p in grid) < 0:
            raise DomainError("kernel density must be nonnegative")
        z = integrate(self.density, 0.0, 1.0, max_step=1e-4)
        if not z > 0:
            raise DomainError("kernel density has zero mass")
        object.__setattr__(self, "normalizer", z)

    def weight(self, p: float) -> float:
        return self.density(p) / self.normalizer

    def to_dict(self):
        return {"kind": self.kind, "density": self.density.to_dict()}


Kernel = AtomKernel | DensityKernel


@dataclass(frozen=True)
class DistributedTerm:
    """``b(t) * integral over [h(t), t] of x(s) against a unit-mass kernel``."""

    coefficient: ScalarFunctionSpec
    lower_limit: DelaySpec
    kernel: Kernel

    def to_dict(self):
        return {
            "type": "distributed",
            "b": self.coefficient.to_dict(),
            "lower_limit": self.lower_limit.to_dict(),
            "kernel": self.kernel.to_dict(),
        }


# ---------------------------------------------------------------------------
# Initial condition and equations
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class InitialCondition:
    history: ScalarFunctionSpec
    value_at_zero: float | None = None

    def __post_init__(self):
        if self.value_at_zero is None:
            object.__setattr__(self, "value_at_zero", float(self.history(0.0)))

    def __call__(self, t: float) -> float:
        if t >= 0:
            return self.value_at_zero
        return self.history(t)

    def to_dict(self):
        return {"history": self.history.to_dict(), "value_at_zero": self.value_at_zero}

    @classmethod
    def constant(cls, value: float) -> "InitialCondition":
        return cls(Constant(float(value)), float(value))


@dataclass(frozen=True)
class LinearDDE:
    """``x' + a(t) x + sum b_k x(h_k) + sum b_l * int x dR_l = 0``."""

    a: ScalarFunctionSpec
    concentrated: tuple[tuple[ScalarFunctionSpec, DelaySpec], ...] = ()
    distributed: tuple[DistributedTerm, ...] = ()
    initial: InitialCondition = field(default_factory=lambda: InitialCondition.constant(1.0))

    def __post_init__(self):
        object.__setattr__(self, "concentrated", tuple(tuple(c) for c in self.concentrated))
        object.__setattr__(self, "distributed", tuple(self.distributed))

    def delays(self) -> list[DelaySpec]:
        return [h for _, h in self.concentrated] + [d.lower_limit for d in self.distributed]

    def coefficients(self) -> list[ScalarFunctionSpec]:
        return [b for b, _ in self.concentrated] + [d.coefficient for d in self.distributed]

    def total_b(self, t: float, left: bool = False) -> float:
        return sum(b(t, left) for b in self.coefficients())

    def validate(self, horizon: float, step: float = 0.01) -> None:
        """Check coefficient nonnegativity by sampling ``[0, horizon]``."""
        ts = np.arange(0.0, horizon + step / 2, step)
        for name, spec in [("a", self.a)] + [(f"b[{i}]", b) for i, b in enumerate(self.coefficients())]:
            vals = spec.sample(ts)
            if np.any(vals < 0):
                i = int(np.argmax(vals < 0))
                raise PreconditionError(f"coefficient {name} is negative ({vals[i]:.6g}) at t={ts[i]:.6g}")

    def with_initial(self, initial: InitialCondition) -> "LinearDDE":
        return LinearDDE(self.a, self.concentrated, self.distributed, initial)

    def to_dict(self):
        terms = [
            {"type": "concentrated", "b": b.to_dict(), "delay": h.to_dict()}
            for b, h in self.concentrated
        ] + [d.to_dict() for d in self.distributed]
        return {
            "equation_class": "linear",
            "a": self.a.to_dict(),
            "terms": terms,
            "initial": self.initial.to_dict(),
        }


# ---------------------------------------------------------------------------
# Nonlinearity catalog
# ---------------------------------------------------------------------------


class Nonlinearity:
    """A named function ``(t, u) -> value`` from the closed catalog."""

    kind: str = ""

    def __call__(self, t: float, u: float, left: bool = False) -> float:
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class LinearMap(Nonlinearity):
    coefficient: ScalarFunctionSpec
    kind = "linear"

    def __call__(self, t, u, left=False):
        return self.coefficient(t, left) * u

    def to_dict(self):
        return {"kind": self.kind, "coefficient": self.coefficient.to_dict()}


@dataclass(frozen=True)
class MGDecay(Nonlinearity):
    """``r(t) (alpha / K) (1 - exp(-u))``."""

    r: ScalarFunctionSpec
    alpha: float
    K: float
    kind = "mg_f"

    def __call__(self, t, u, left=False):
        return self.r(t, left) * (self.alpha / self.K) * -math.expm1(-u)

    def to_dict(self):
        return {"kind": self.kind, "r": self.r.to_dict(), "alpha": self.alpha, "K": self.K}


@dataclass(frozen=True)
class MGFeedback(Nonlinearity):
    """``beta K^n r(t) [1/(K^n + exp(-n u)) - 1/(1 + K^n)]``.

    This is the delayed term of the model after ``y = ln(x / K)``; its slope
    never exceeds ``beta n r(t) / 4``.
    """

    r: ScalarFunctionSpec
    beta: float
    K: float
    n: float
    kind = "mg_g"

    def __call__(self, t, u, left=False):
        kn = self.K**self.n
        z = -self.n * u
        # K^n / (K^n + e^z) computed without overflowing e^z
        if z > 0:
            first = kn * math.exp(-z) / (kn * math.exp(-z) + 1.0)
        else:
            first = kn / (kn + math.exp(z))
        return self.beta * self.r(t, left) * (first - kn / (1.0 + kn))

    def to_dict(self):
        return {"kind": self.kind, "r": self.r.to_dict(), "beta": self.beta, "K": self.K, "n": self.n}


@dataclass(frozen=True)
class TableMap(Nonlinearity):
    """Time-independent ``u -> value`` from sampled points, linear interpolation."""

    points: tuple[tuple[float, float], ...]
    kind = "table"

    def __post_init__(self):
        object.__setattr__(self, "_table", Tabulated(self.points, "linear"))
        object.__setattr__(self, "points", self._table.knots)

    def __call__(self, t, u, left=False):
        return self._table(u)

    def to_dict(self):
        return {"kind": self.kind, "points": [[u, v] for u, v in self.points]}


@dataclass(frozen=True)
class SectorBounds:
    """``a0 <= f/u <= A`` and ``0 <= g_k/u <= b_k`` for ``u`` in ``box``."""

    a0: float
    A: float
    b: tuple[float, ...]
    box: tuple[float, float]

    def __post_init__(self):
        object.__setattr__(self, "b", tuple(float(v) for v in self.b))
        object.__setattr__(self, "box", (float(self.box[0]), float(self.box[1])))
        if not self.a0 > 0 or self.A < self.a0 or any(v < 0 for v in self.b):
            raise DomainError("sector bounds need 0 < a0 <= A and b_k >= 0")
        if not self.box[0] <= 0 <= self.box[1]:
            raise DomainError("state box must contain 0")

    @property
    def b0(self) -> float:
        return math.fsum(self.b)

    def to_dict(self):
        return {"a0": self.a0, "A": self.A, "b": list(self.b), "box": list(self.box)}


@dataclass(frozen=True)
class NonlinearDDE:
    """``x' + f(t, x) + sum g_k(t, x(h_k)) + sum b_l * int g_l(t, x(s)) dR_l = 0``."""

    f: Nonlinearity
    concentrated: tuple[tuple[Nonlinearity, DelaySpec], ...] = ()
    distributed: tuple[tuple[Nonlinearity, DistributedTerm], ...] = ()
    initial: InitialCondition = field(default_factory=lambda: InitialCondition.constant(0.0))
    sector_bounds: SectorBounds | None = None
    admissible_initial_box: tuple[float, float] = (-math.inf, math.inf)

    def __post_init__(self):
        object.__setattr__(self, "concentrated", tuple(tuple(c) for c in self.concentrated))
        object.__setattr__(self, "distributed", tuple(tuple(d) for d in self.distributed))

    def delays(self) -> list[DelaySpec]:
        return [h for _, h in self.concentrated] + [d.lower_limit for _, d in self.distributed]

    def check_sector_bounds(self, ts: Sequence[float], n_u: int = 201) -> list[str]:
        """Sample the sector inequalities; returns a description of each violation."""
        sb = self.sector_bounds
        if sb is None:
            return []
        us = [u for u in np.linspace(sb.box[0], sb.box[1], n_u) if u != 0.0]
        gs = [g for g, _ in self.concentrated] + [g for g, _ in self.distributed]
        if len(sb.b) != len(gs):
            raise DomainError(f"{len(sb.b)} sector bounds for {len(gs)} delayed terms")
        tol = 1e-12
        problems = []
        for t in ts:
            t = float(t)
            for u in us:
                q = self.f(t, u) / u
                if q < sb.a0 - tol or q > sb.A + tol:
                    problems.append(f"f(t={t:.4g}, u={u:.4g})/u = {q:.6g} outside [{sb.a0:.6g}, {sb.A:.6g}]")
                for k, g in enumerate(gs):
                    q = g(t, u) / u
                    if q < -tol or q > sb.b[k] + tol:
                        problems.append(f"g{k}(t={t:.4g}, u={u:.4g})/u = {q:.6g} outside [0, {sb.b[k]:.6g}]")
        return problems


def sampled_range(spec: ScalarFunctionSpec, lo: float, hi: float, step: float = 0.01) -> tuple[float, float]:
    """Min and max of ``spec`` on a uniform grid over ``[lo, hi]`` plus its breakpoints."""
    ts = list(np.arange(lo, hi + step / 2, step)) + spec.breakpoints(lo, hi)
    vals = [spec(float(t)) for t in ts] + [spec(float(t), left=True) for t in spec.breakpoints(lo, hi) if t > lo]
    return min(vals), max(vals)

