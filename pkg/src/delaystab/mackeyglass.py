"""Mackey-Glass respiratory model ``x' = r(t) [alpha - beta x x_h^n / (1 + x_h^n)]``.

``x_h`` is ``x(h(t))``.  The positive equilibrium ``K`` solves
``beta K^(n+1) = alpha (1 + K^n)``; ``y = ln(x / K)`` turns the model into a
zero-equilibrium equation whose sector bounds feed the attractivity test.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .criteria import Verdict, bbi_verdict, check_bbi_comparison, check_thm5, invert_delay_bound
from .errors import DomainError
from .model import (
    ConstantLag,
    DelaySpec,
    InitialCondition,
    MGDecay,
    MGFeedback,
    NonlinearDDE,
    ScalarFunctionSpec,
    SectorBounds,
    SinusoidAffine,
    sampled_range,
)
from .solver import IntegratorConfig, Trajectory, integrate_nonlinear, integrate_rhs


@dataclass(frozen=True)
class MGParams:
    alpha: float
    beta: float
    n: float
    r: ScalarFunctionSpec
    r0: float
    R: float
    h: DelaySpec

    def __post_init__(self):
        if not (self.alpha > 0 and self.beta > 0 and self.n > 0):
            raise DomainError("alpha, beta and n must be positive")
        if not 0 < self.r0 <= self.R:
            raise DomainError(f"need 0 < r0 <= R, got r0={self.r0}, R={self.R}")

    @property
    def h0(self) -> float:
        return self.h.lag_bound

    def check_r_bounds(self, horizon: float, step: float = 0.01) -> tuple[float, float]:
        """Sampled range of ``r``; raises if it leaves ``[r0, R]``."""
        lo, hi = sampled_range(self.r, 0.0, horizon, step)
        if lo < self.r0 - 1e-12 or hi > self.R + 1e-12:
            raise DomainError(f"sampled r in [{lo:.6g}, {hi:.6g}] is not inside [r0, R] = [{self.r0}, {self.R}]")
        return lo, hi

    @classmethod
    def example2(cls, lag: float = 1.0) -> "MGParams":
        """alpha=1, beta=0.5, n=4, r(t) = 2.7 + 0.3 sin t, constant lag."""
        return cls(1.0, 0.5, 4.0, SinusoidAffine(2.7, 0.3, 1.0), 2.4, 3.0, ConstantLag(lag))


@dataclass(frozen=True)
class MGDerived:
    K: float
    mu: float
    M: float
    c: float
    C: float
    a0: float
    A: float
    b0: float

    def to_dict(self) -> dict:
        return dict(vars(self))


@dataclass(frozen=True)
class AttractorBounds:
    theorem7: float
    bbi: float
    derived: MGDerived

    def to_dict(self) -> dict:
        return {"theorem7": self.theorem7, "bbi": self.bbi, "derived": self.derived.to_dict()}


def equilibrium_residual(alpha: float, beta: float, n: float, K: float) -> float:
    return beta * K ** (n + 1) - alpha * (1.0 + K**n)


def solve_equilibrium(alpha: float, beta: float, n: float) -> float:
    """Unique positive root of ``beta K^(n+1) = alpha (1 + K^n)``.

    Bisection on ``beta K - alpha (1 + K^-n)``, which is strictly increasing
    and has the same positive root, carried to adjacent doubles.
    """
    if not (alpha > 0 and beta > 0 and n > 0):
        raise DomainError("alpha, beta and n must be positive")

    def g(K):
        return beta * K - alpha * (1.0 + K ** (-n))

    lo, hi = alpha / beta, 2.0 * alpha / beta
    while g(lo) > 0:
        lo *= 0.5
    while g(hi) < 0:
        hi *= 2.0
    while True:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if g(mid) < 0:
            lo = mid
        else:
            hi = mid
    if abs(equilibrium_residual(alpha, beta, n, lo)) <= abs(equilibrium_residual(alpha, beta, n, hi)):
        return lo
    return hi


def _phi(z: float) -> float:
    """``(1 - exp(-z)) / z`` with its removable singularity at 0."""
    if abs(z) < 1e-4:
        return 1.0 - z / 2.0 + z * z / 6.0 - z**3 / 24.0
    return -math.expm1(-z) / z


def derive_mg(params: MGParams, K_override: float | None = None) -> MGDerived:
    """Equilibrium, the invariant band ``[mu, M]`` and the sector constants."""
    if K_override is not None:
        if not K_override > 0:
            raise DomainError(f"K_override must be positive, got {K_override}")
        K = float(K_override)
    else:
        K = solve_equilibrium(params.alpha, params.beta, params.n)
    a, b, n = params.alpha, params.beta, params.n
    mu = a / b
    M = mu * (1.0 + (b / a) ** n)
    c = math.log(mu / K)
    C = math.log(M / K)
    return MGDerived(
        K=K,
        mu=mu,
        M=M,
        c=c,
        C=C,
        a0=(a / K) * _phi(C) * params.r0,
        A=(a / K) * _phi(c) * params.R,
        b0=b * n * params.R / 4.0,
    )


def mg_attractor_bound(params: MGParams, K_override: float | None = None) -> AttractorBounds:
    """Largest lag certified by the sector test, next to the comparison bound."""
    d = derive_mg(params, K_override)
    return AttractorBounds(
        theorem7=invert_delay_bound(d.a0, d.A, d.b0),
        bbi=check_bbi_comparison(params.beta, params.n, params.R),
        derived=d,
    )


def mg_verdicts(params: MGParams, K_override: float | None = None) -> tuple[Verdict, Verdict]:
    """Thm7 and comparison verdicts at the params' own lag bound."""
    d = derive_mg(params, K_override)
    v7 = check_thm5(d.a0, d.A, d.b0, params.h0, criterion="Thm7")
    return v7, bbi_verdict(params.beta, params.n, params.R, params.h0)


def mg_rhs(params: MGParams):
    """Right-hand side of the original model, in the integrator's calling convention."""
    r, a, b, n, h = params.r, params.alpha, params.beta, params.n, params.h

    def rhs(t, x, past, left):
        xh = past(h(t, left))
        xn = xh**n
        return r(t, left) * (a - b * x * xn / (1.0 + xn))

    return rhs


def mg_transformed_rhs(params: MGParams, K: float) -> tuple[MGDecay, MGFeedback]:
    """``f`` and ``g`` of the log-transformed equation ``y' + f(t,y) + g(t, y(h)) = 0``."""
    if not K > 0:
        raise DomainError("K must be positive")
    return MGDecay(params.r, params.alpha, K), MGFeedback(params.r, params.beta, K, params.n)


def transformed_problem(params: MGParams, K: float, initial: InitialCondition, derived: MGDerived | None = None) -> NonlinearDDE:
    """The zero-equilibrium form, with sector bounds on ``[c, C]`` when they make sense."""
    f, g = mg_transformed_rhs(params, K)
    sb = None
    if derived is not None and derived.c <= 0 <= derived.C:
        sb = SectorBounds(derived.a0, derived.A, (derived.b0,), (derived.c, derived.C))
    return NonlinearDDE(f, ((g, params.h),), (), initial, sb)


def simulate_mg(params: MGParams, initial: InitialCondition, cfg: IntegratorConfig) -> Trajectory:
    """Integrate the original model directly."""
    return integrate_rhs(mg_rhs(params), initial, [params.r], [params.h], cfg)


def simulate_transformed(params: MGParams, K: float, initial: InitialCondition, cfg: IntegratorConfig) -> Trajectory:
    return integrate_nonlinear(transformed_problem(params, K, initial), cfg)


def sector_violations(params: MGParams, derived: MGDerived, horizon: float = 10.0, n_t: int = 41, n_u: int = 201) -> list[str]:
    """Sample ``a0 <= f/u <= A`` and ``0 <= g/u <= b0`` over ``u`` between ``c`` and ``C``."""
    f, g = mg_transformed_rhs(params, derived.K)
    lo, hi = min(derived.c, derived.C), max(derived.c, derived.C)
    problem = NonlinearDDE(f, ((g, params.h),), (), InitialCondition.constant(0.0))
    ts = [horizon * i / (n_t - 1) for i in range(n_t)]
    us = [u for u in np.linspace(lo, hi, n_u) if u != 0.0]
    out = []
    for t in ts:
        for u in us:
            q = problem.f(t, u) / u
            if q < derived.a0 - 1e-12 or q > derived.A + 1e-12:
                out.append(f"f/u = {q:.6g} at t={t:.4g}, u={u:.4g} outside [a0, A] = [{derived.a0:.6g}, {derived.A:.6g}]")
            q = g(t, u) / u
            if q < -1e-12 or q > derived.b0 + 1e-12:
                out.append(f"g/u = {q:.6g} at t={t:.4g}, u={u:.4g} outside [0, b0] = [0, {derived.b0:.6g}]")
    return out
