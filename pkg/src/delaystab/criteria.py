"""Sufficient stability and attractivity tests.

Every check returns a :class:`Verdict`.  A failed inequality is reported as
*inconclusive*: the tests are sufficient only, and nothing here ever claims
instability.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DomainError, PreconditionError
from .model import (
    Constant,
    CumulativeIntegral,
    DensityKernel,
    DelaySpec,
    LinearDDE,
    NonlinearDDE,
    ScalarFunctionSpec,
    integrate,
)

CRITERIA = ("Thm1", "Thm2", "Thm3", "Thm4", "Cor1", "Thm5", "Thm6", "Thm7", "Nonosc1e", "BBIComparison")
INV_E = math.exp(-1.0)


@dataclass(frozen=True)
class Verdict:
    certified: bool
    lhs: float
    rhs: float
    criterion_id: str
    inputs_echo: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.criterion_id not in CRITERIA:
            raise DomainError(f"unknown criterion {self.criterion_id!r}")

    @property
    def label(self) -> str:
        return "certified" if self.certified else "inconclusive"

    def to_dict(self) -> dict:
        return {
            "criterion": self.criterion_id,
            "certified": self.certified,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "inputs": dict(self.inputs_echo),
        }


@dataclass(frozen=True)
class LimsupEstimate:
    """Grid maximum over ``[burn_in, horizon]`` standing in for a limsup."""

    value: float
    burn_in: float
    grid_step: float
    horizon: float

    def to_dict(self) -> dict:
        return {"value": self.value, "burn_in": self.burn_in, "grid_step": self.grid_step, "horizon": self.horizon}


def _log_ratio(b: float, a: float) -> float:
    # ln((b^2 + a b) / (b^2 + a^2))
    return math.log((b * b + a * b) / (b * b + a * a))


def _inequality(a: float, b: float, decay: float) -> tuple[float, float]:
    """Both sides of ``(a/b) exp(-decay) > ln((b^2 + a b)/(b^2 + a^2))``."""
    if b == 0:
        return math.inf, -math.inf
    return (a / b) * math.exp(-decay), _log_ratio(b, a)


def check_thm1(a: float, b_bound: float, h_bound: float) -> Verdict:
    """Constant non-delay coefficient ``a``, ``0 <= b(t) <= b_bound``, lag at most ``h_bound``."""
    if not a > 0:
        raise DomainError(f"a must be positive, got {a}")
    if b_bound < 0 or h_bound < 0:
        raise DomainError("b_bound and h_bound must be nonnegative")
    lhs, rhs = _inequality(a, b_bound, a * h_bound)
    return Verdict(lhs > rhs, lhs, rhs, "Thm1", {"a": a, "b": b_bound, "h": h_bound})


def check_thm2(beta: float, h0: float, criterion: str = "Thm2") -> Verdict:
    """Rescaled test ``(1/beta) exp(-h0) > ln((beta^2 + beta)/(beta^2 + 1))``.

    ``criterion`` lets the same inequality be reported as Thm3, Thm4 or Cor1,
    which differ only in how ``beta`` and ``h0`` are estimated.
    """
    if not beta > 0:
        raise DomainError(f"beta must be positive, got {beta}")
    if h0 < 0:
        raise DomainError(f"h0 must be nonnegative, got {h0}")
    lhs, rhs = _inequality(1.0, beta, h0)
    return Verdict(lhs > rhs, lhs, rhs, criterion, {"beta": beta, "h0": h0})


def check_thm5(a0: float, A: float, b0: float, h0: float, criterion: str = "Thm5") -> Verdict:
    """Sector-bound test ``(a0/b0) exp(-A h0) > ln((b0^2 + a0 b0)/(b0^2 + a0^2))``.

    Serves Thm6 (distributed delays) and Thm7 (Mackey-Glass) through
    ``criterion``.
    """
    if not a0 > 0:
        raise DomainError(f"a0 must be positive, got {a0}")
    if A < a0:
        raise DomainError(f"A={A} is below a0={a0}")
    if not b0 > 0:
        raise DomainError(f"b0 must be positive, got {b0}")
    if h0 < 0:
        raise DomainError(f"h0 must be nonnegative, got {h0}")
    lhs, rhs = _inequality(a0, b0, A * h0)
    return Verdict(lhs > rhs, lhs, rhs, criterion, {"a0": a0, "A": A, "b0": b0, "h0": h0})


def invert_delay_bound(a0: float, A: float, b0: float) -> float:
    """Largest lag bound ``h0`` for which :func:`check_thm5` still certifies.

    The left side decays exponentially in ``h0`` and the right side does not
    depend on it, so the boundary is available in closed form.  Returns
    ``inf`` when the right side is nonpositive and ``0`` when the test already
    fails without delay.
    """
    if not a0 > 0 or not b0 > 0 or A < a0:
        raise DomainError("need a0 > 0, b0 > 0 and A >= a0")
    rhs = _log_ratio(b0, a0)
    if rhs <= 0:
        return math.inf
    lhs0 = a0 / b0
    if lhs0 <= rhs:
        return 0.0
    return math.log(lhs0 / rhs) / A


def check_bbi_comparison(beta_mg: float, n: float, R: float) -> float:
    """Delay bound ``4 (1 + 1/e) / (beta n R)`` from the earlier Mackey-Glass test."""
    if not (beta_mg > 0 and n > 0 and R > 0):
        raise DomainError("beta, n and R must be positive")
    return 4.0 * (1.0 + INV_E) / (beta_mg * n * R)


def bbi_verdict(beta_mg: float, n: float, R: float, h0: float) -> Verdict:
    """The comparison test as a verdict: ``beta h0 n R / 4 < 1 + 1/e``."""
    lhs = beta_mg * h0 * n * R / 4.0
    rhs = 1.0 + INV_E
    return Verdict(lhs < rhs, lhs, rhs, "BBIComparison", {"beta": beta_mg, "n": n, "R": R, "h0": h0})


# ---------------------------------------------------------------------------
# Estimating h0 and beta from a linear problem
# ---------------------------------------------------------------------------


def limsup_grid(burn_in: float, horizon: float, grid_step: float, specs: Sequence, extra: Sequence[float] = ()) -> np.ndarray:
    """Uniform grid ``burn_in + k * grid_step`` plus spec breakpoints in range.

    Grids for step ``s`` and ``s/2`` are nested, so grid maxima can only grow
    under refinement.
    """
    if not grid_step > 0:
        raise DomainError("grid_step must be positive")
    if horizon < burn_in:
        raise DomainError("horizon must not precede burn_in")
    n = int(math.floor((horizon - burn_in) / grid_step + 1e-9))
    pts = set((burn_in + np.arange(n + 1) * grid_step).tolist())
    for spec in specs:
        pts.update(b for b in spec.breakpoints(burn_in, horizon) if burn_in <= b <= horizon)
    pts.update(e for e in extra if burn_in <= e <= horizon)
    return np.array(sorted(pts))


def _min_delay(delays: Sequence[DelaySpec], t: float) -> float:
    # left limits matter where h jumps, e.g. floor(t) -> t - 1 at integers
    return min(min(d(t), d(t, left=True)) for d in delays)


def estimate_thm2_params(
    problem: LinearDDE,
    burn_in: float | None = None,
    horizon: float = 100.0,
    grid_step: float = 0.01,
    quad_step: float = 1e-3,
) -> tuple[LimsupEstimate, LimsupEstimate]:
    """Estimate ``h0 = limsup int_{min h_k(t)}^t a`` and ``beta = limsup b/a``.

    ``b`` is the sum of all concentrated and distributed coefficients.
    ``burn_in`` defaults to a tenth of ``horizon``.
    """
    if burn_in is None:
        burn_in = 0.1 * horizon
    delays = problem.delays()
    if not delays:
        raise DomainError("the problem has no delayed terms")
    a = problem.a
    coefs = problem.coefficients()
    specs = [a] + coefs + delays
    ts = limsup_grid(burn_in, horizon, grid_step, specs)
    lo_min = max(0.0, burn_in - max(d.lag_bound for d in delays))
    cum = None if isinstance(a, Constant) else CumulativeIntegral(a, lo_min, horizon, quad_step)
    h0 = -math.inf
    beta = -math.inf
    for t in ts:
        t = float(t)
        for left in (False, True):
            if left and t == ts[0]:
                continue
            av = a(t, left)
            if not av > 0:
                raise PreconditionError(f"a(t) must be positive, found a({t:.6g}) = {av:.6g}")
            beta = max(beta, sum(b(t, left) for b in coefs) / av)
        lo = _min_delay(delays, t)
        if lo < 0:
            # the integral would need a on t < 0; only t with h(t) >= 0 count
            continue
        h0 = max(h0, a.value * (t - lo) if cum is None else cum.between(lo, t))
    if h0 == -math.inf:
        raise PreconditionError("no grid point with h(t) >= 0; increase burn_in")
    return (
        LimsupEstimate(h0, burn_in, grid_step, horizon),
        LimsupEstimate(beta, burn_in, grid_step, horizon),
    )


def classify_linear(problem: LinearDDE) -> str:
    """Which variable-coefficient criterion the problem falls under."""
    if problem.distributed:
        if any(isinstance(d.kernel, DensityKernel) for d in problem.distributed) and not problem.concentrated:
            return "Cor1"
        return "Thm4"
    if len(problem.concentrated) > 1:
        return "Thm3"
    return "Thm2"


def check_linear(
    problem: LinearDDE,
    burn_in: float | None = None,
    horizon: float = 100.0,
    grid_step: float = 0.01,
) -> Verdict:
    """Estimate the limsup quantities and evaluate the rescaled inequality."""
    h0, beta = estimate_thm2_params(problem, burn_in, horizon, grid_step)
    crit = classify_linear(problem)
    if beta.value == 0:
        # no delayed feedback: x' + a x = 0 with a >= a0 > 0
        return Verdict(True, math.inf, -math.inf, crit, {"beta": 0.0, "h0": h0.value})
    v = check_thm2(beta.value, h0.value, crit)
    echo = dict(v.inputs_echo, burn_in=h0.burn_in, grid_step=grid_step, horizon=horizon)
    return Verdict(v.certified, v.lhs, v.rhs, crit, echo)


def check_thm1_problem(problem: LinearDDE, horizon: float = 100.0, grid_step: float = 0.01) -> Verdict:
    """Thm1 on a problem with constant ``a`` and a single concentrated delay."""
    if not isinstance(problem.a, Constant):
        raise DomainError("Thm1 needs a constant non-delay coefficient")
    if len(problem.concentrated) != 1 or problem.distributed:
        raise DomainError("Thm1 needs exactly one concentrated delay term")
    (b, h), = problem.concentrated
    bnd = b.bounds()
    if bnd is None:
        ts = limsup_grid(0.0, horizon, grid_step, [b])
        b_max = float(np.max(b.sample(ts)))
    else:
        b_max = bnd[1]
    return check_thm1(problem.a.value, b_max, h.lag_bound)


# ---------------------------------------------------------------------------
# 1/e nonoscillation test
# ---------------------------------------------------------------------------


def check_nonoscillation_1e(
    b: ScalarFunctionSpec,
    h: DelaySpec,
    a: ScalarFunctionSpec | None = None,
    burn_in: float | None = None,
    horizon: float = 100.0,
    grid_step: float = 0.01,
    quad_step: float = 1e-3,
) -> Verdict:
    """``sup int_{h(t)}^t b < 1/e`` plus the same sup for the transformed coefficient.

    The verdict certifies nonoscillation of ``x' + b x(h) = 0``.  With the
    non-delay term, ``z = x exp(int_0^t a)`` solves ``z' + r z(h) = 0`` where
    ``r(t) = b(t) exp(+int_{h(t)}^t a)``.  Since ``r >= b`` for ``a >= 0``,
    the first test does not carry over; ``inputs_echo`` reports ``sup_int_r``
    and whether it is below ``1/e`` as ``nonoscillation_with_a``.
    """
    if burn_in is None:
        burn_in = 0.1 * horizon
    a = a if a is not None else Constant(0.0)
    ts = limsup_grid(burn_in, horizon, grid_step, [b, a, h])
    b_vals = b.sample(ts)
    if np.any(b_vals < 0):
        raise PreconditionError("b(t) must be nonnegative")
    if np.any(a.sample(ts) < 0):
        raise PreconditionError("a(t) must be nonnegative")
    lo_min = max(0.0, burn_in - h.lag_bound)
    cum_b = CumulativeIntegral(b, lo_min, horizon, quad_step)
    r_nodes, r_cum = _transformed_cumulative(b, a, h, lo_min, horizon, 10 * quad_step)
    sup_b = -math.inf
    sup_r = -math.inf
    for t in ts:
        t = float(t)
        lo = _min_delay([h], t)
        if lo < 0:
            continue
        sup_b = max(sup_b, cum_b.between(lo, t))
        sup_r = max(sup_r, float(np.interp(t, r_nodes, r_cum) - np.interp(lo, r_nodes, r_cum)))
    if sup_b == -math.inf:
        raise PreconditionError("no grid point with h(t) >= 0; increase burn_in")
    return Verdict(
        sup_b < INV_E,
        sup_b,
        INV_E,
        "Nonosc1e",
        {
            "sup_int_b": sup_b,
            "sup_int_r": sup_r,
            "nonoscillation_with_a": sup_r < INV_E,
            "burn_in": burn_in,
            "grid_step": grid_step,
            "horizon": horizon,
        },
    )


def _transformed_cumulative(b, a, h, lo, hi, step) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and running trapezoid integral of ``r(s) = b(s) exp(int_{h(s)}^s a)``.

    ``a`` is only known on ``t >= 0``, so the inner lower limit is clipped at
    0; this only touches ``s`` within one lag of the origin.
    """
    n = max(1, math.ceil((hi - lo) / step))
    ss = np.linspace(lo, hi, n + 1)
    cum_a = CumulativeIntegral(a, 0.0, hi, step / 10)
    rs = np.empty_like(ss)
    for i, s in enumerate(ss.tolist()):
        hs = max(h(s), 0.0)
        rs[i] = b(s) * math.exp(cum_a.between(hs, s))
    cum = np.concatenate([[0.0], np.cumsum(0.5 * (rs[1:] + rs[:-1]) * np.diff(ss))])
    return ss, cum


# ---------------------------------------------------------------------------
# Dispatch used by the command line
# ---------------------------------------------------------------------------


def _single_delay_linear(problem: LinearDDE) -> bool:
    return len(problem.concentrated) == 1 and not problem.distributed


def default_criterion(problem) -> str:
    """Criterion picked when the caller names none."""
    if isinstance(problem, NonlinearDDE):
        return "Thm6" if problem.distributed else "Thm5"
    lo = problem.a.bounds()
    if lo is not None and lo[0] <= 0 and _single_delay_linear(problem):
        return "Nonosc1e"
    if isinstance(problem.a, Constant) and _single_delay_linear(problem):
        return "Thm1"
    return classify_linear(problem)


def check_problem(
    problem,
    criterion: str | None = None,
    burn_in: float | None = None,
    horizon: float = 100.0,
    grid_step: float = 0.01,
) -> Verdict:
    """Evaluate ``criterion`` (or the default one) on a linear or nonlinear problem."""
    crit = criterion or default_criterion(problem)
    if crit not in CRITERIA:
        raise DomainError(f"unknown criterion {crit!r}; expected one of {CRITERIA}")
    if isinstance(problem, NonlinearDDE):
        if crit not in ("Thm5", "Thm6"):
            raise DomainError(f"{crit} does not apply to nonlinear problems")
        sb = problem.sector_bounds
        if sb is None:
            raise PreconditionError("nonlinear problems need sector_bounds for Thm5/Thm6")
        h0 = max(d.lag_bound for d in problem.delays())
        return check_thm5(sb.a0, sb.A, sb.b0, h0, criterion=crit)
    if crit == "Thm1":
        return check_thm1_problem(problem, horizon, grid_step)
    if crit == "Nonosc1e":
        if not _single_delay_linear(problem):
            raise DomainError("Nonosc1e needs exactly one concentrated delay term")
        (b, h), = problem.concentrated
        return check_nonoscillation_1e(b, h, problem.a, burn_in, horizon, grid_step)
    if crit in ("Thm2", "Thm3", "Thm4", "Cor1"):
        return check_linear(problem, burn_in, horizon, grid_step)
    raise DomainError(f"{crit} does not apply to linear problems")


def delay_bound(problem, horizon: float = 100.0, grid_step: float = 0.01) -> dict:
    """Largest certified lag quantity for a linear or nonlinear problem.

    Constant-``a`` single-delay problems get the lag bound of the
    constant-coefficient test; variable-coefficient problems get the bound on
    ``int_{h(t)}^t a`` of the rescaled test; sector-bounded nonlinear
    problems get the bound on ``t - h(t)``.
    """
    if isinstance(problem, NonlinearDDE):
        sb = problem.sector_bounds
        if sb is None:
            raise PreconditionError("nonlinear problems need sector_bounds")
        return {"criterion": "Thm6" if problem.distributed else "Thm5", "quantity": "lag",
                "h0_max": invert_delay_bound(sb.a0, sb.A, sb.b0)}
    if isinstance(problem.a, Constant) and _single_delay_linear(problem):
        v = check_thm1_problem(problem, horizon, grid_step)
        a, b = v.inputs_echo["a"], v.inputs_echo["b"]
        if b == 0:
            return {"criterion": "Thm1", "quantity": "lag", "h0_max": math.inf}
        return {"criterion": "Thm1", "quantity": "lag", "h0_max": invert_delay_bound(a, a, b)}
    _, beta = estimate_thm2_params(problem, None, horizon, grid_step)
    if beta.value == 0:
        return {"criterion": classify_linear(problem), "quantity": "integral_of_a_over_lag", "h0_max": math.inf}
    return {
        "criterion": classify_linear(problem),
        "quantity": "integral_of_a_over_lag",
        "h0_max": invert_delay_bound(1.0, 1.0, beta.value),
        "beta": beta.value,
    }
