"""Trajectory diagnostics and the closed-form solution of the floor-argument example."""

from __future__ import annotations

import math

import numpy as np

from .errors import DomainError, InsufficientDataError
from .solver import EXAMPLE1_VARIANTS, Trajectory, example1_eps

MIN_ABS = 1e-300


def example1_exact(b: float, variant: str, n: int, x0: float = 1.0) -> list[float]:
    """Exact ``x(0), ..., x(n)`` of ``x' + a(t) x + b x(floor(t)) = 0``.

    On each unit period the delayed value is the constant ``x(k)``, so the
    solution is elementary: linear for ``a = 0``; on ``[k, k+eps]`` with
    ``a = 3b`` it is ``(4/3) x(k) exp(-3b (t-k)) - x(k)/3``, which vanishes at
    ``k + eps``; after that it is linear again (``vanishing_a``) or
    ``2b x(k) (exp(-(t-k-eps)/2) - 1)`` (``positive_a``).
    """
    if variant not in EXAMPLE1_VARIANTS:
        raise DomainError(f"unknown variant {variant!r}")
    if variant == "baseline":
        ratio = 1.0 - b
    else:
        eps = example1_eps(b)
        if variant == "vanishing_a":
            ratio = -b * (1.0 - eps)
        else:
            ratio = 2.0 * b * (math.exp(-0.5 * (1.0 - eps)) - 1.0)
    out = [float(x0)]
    for _ in range(n):
        out.append(out[-1] * ratio)
    return out


def growth_factor(trajectory: Trajectory, period: float, burn_in: float = 0.0) -> float:
    """Geometric mean of ``|x(t + period) / x(t)|`` over samples ``burn_in + k * period``.

    Ratios involving an exact zero are skipped; if every sample is zero the
    result is 0.
    """
    if not period > 0:
        raise DomainError("period must be positive")
    n = int(math.floor((trajectory.horizon - burn_in) / period + 1e-9))
    if n < 3:
        raise DomainError(
            f"horizon {trajectory.horizon} is shorter than burn_in + 3 periods ({burn_in + 3 * period})"
        )
    xs = np.abs(trajectory.sample(burn_in + period * np.arange(n + 1)))
    if not np.any(xs):
        return 0.0
    num, den = xs[1:], xs[:-1]
    ok = (num > 0) & (den > 0)
    if not np.any(ok):
        return 0.0
    return float(np.exp(np.mean(np.log(num[ok] / den[ok]))))


def _sign_changes(xs: np.ndarray) -> int:
    s = np.sign(xs)
    s = s[s != 0]
    return int(np.count_nonzero(s[1:] != s[:-1]))


def count_sign_changes(trajectory: Trajectory, start: float, stop: float) -> int:
    """Strict sign alternations among native grid samples in ``[start, stop]``."""
    if not start < stop:
        raise DomainError("need start < stop")
    t = trajectory.t
    mask = (t >= start) & (t <= stop)
    return _sign_changes(trajectory.x[mask])


def decay_rate(trajectory: Trajectory, burn_in: float) -> float:
    """Least-squares slope of ``ln|x|`` against ``t`` after ``burn_in``.

    Oscillating solutions are fitted through the local maxima of ``|x|`` so
    that the near-zero samples around each sign change do not dominate.
    """
    if trajectory.horizon < 2 * burn_in:
        raise DomainError(f"horizon {trajectory.horizon} is shorter than twice the burn-in {burn_in}")
    mask = trajectory.t >= burn_in
    t = trajectory.t[mask]
    x = trajectory.x[mask]
    if _sign_changes(x) > 0:
        ax = np.abs(x)
        peak = np.zeros(len(ax), dtype=bool)
        peak[1:-1] = (ax[1:-1] >= ax[:-2]) & (ax[1:-1] > ax[2:])
        t, x = t[peak], ax[peak]
    x = np.abs(x)
    use = x > MIN_ABS
    if np.count_nonzero(use) < 10:
        raise InsufficientDataError(f"only {np.count_nonzero(use)} usable samples after t={burn_in}")
    slope, _ = np.polyfit(t[use], np.log(x[use]), 1)
    return float(slope)
