import csv
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from delaystab.errors import DomainError
from delaystab.model import (
    AtomKernel,
    Constant,
    ConstantLag,
    DensityKernel,
    DistributedTerm,
    FloorArgument,
    InitialCondition,
    LinearDDE,
    LinearMap,
    NonlinearDDE,
    SectorBounds,
    SinusoidAffine,
    Tabulated,
    TabulatedLag,
)
from delaystab.solver import (
    IntegratorConfig,
    build_grid,
    example1_eps,
    example1_problem,
    integrate_example1,
    integrate_linear,
    integrate_nonlinear,
    kernel_integral,
    rescale_time,
    rescaled_problem,
)


def picard_uniform_kernel(a=2.0, b=1.0, T=2.0, dt=1e-4, iters=40):
    """x' = -a x - b * int_{t-1}^t x, x = 1 on [-1, 0], by Picard iteration on a fine grid."""
    n_hist = int(round(1.0 / dt))
    n = int(round(T / dt))
    t = np.linspace(-1.0, T, n_hist + n + 1)
    x = np.ones_like(t)
    for _ in range(iters):
        cx = np.concatenate([[0.0], np.cumsum(0.5 * (x[1:] + x[:-1]) * dt)])
        window = cx[n_hist:] - cx[: n + 1]  # int_{t-1}^t x for t >= 0
        f = -a * x[n_hist:] - b * window
        x_new = x.copy()
        x_new[n_hist:] = 1.0 + np.concatenate([[0.0], np.cumsum(0.5 * (f[1:] + f[:-1]) * dt)])
        if np.max(np.abs(x_new - x)) < 1e-15:
            break
        x = x_new
    return t[n_hist:], x[n_hist:]


def test_uniform_kernel_against_picard():
    term = DistributedTerm(Constant(1.0), ConstantLag(1.0), DensityKernel(Constant(1.0)))
    p = LinearDDE(Constant(2.0), (), (term,), InitialCondition.constant(1.0))
    traj = integrate_linear(p, IntegratorConfig(2.0, 0.01))
    t_ref, x_ref = picard_uniform_kernel()
    idx = np.arange(0, len(t_ref), 100)
    assert np.max(np.abs(traj.sample(t_ref[idx]) - x_ref[idx])) < 1e-6


def test_pure_ode_is_exponential():
    p = LinearDDE(Constant(1.0), ((Constant(0.0), ConstantLag(1.0)),))
    traj = integrate_linear(p, IntegratorConfig(5.0, 0.01))
    ts = np.linspace(0, 5, 37)
    assert np.max(np.abs(traj.sample(ts) - np.exp(-ts))) < 1e-9


def test_method_of_steps_polynomial_pieces():
    # x' = -x(t-1), x = 1 before 0: x = 1 - t on [0,1], 1 - t + (t-1)^2/2 on [1,2]
    p = LinearDDE(Constant(0.0), ((Constant(1.0), ConstantLag(1.0)),))
    traj = integrate_linear(p, IntegratorConfig(2.0, 0.05))
    assert traj(0.5) == pytest.approx(0.5, abs=1e-13)
    assert traj(1.5) == pytest.approx(1 - 1.5 + 0.125, abs=1e-13)


def _wavy_problem():
    return LinearDDE(
        SinusoidAffine(2.0, 0.5, 3.0),
        ((SinusoidAffine(1.0, 0.3, 2.0), ConstantLag(0.8)),),
        (),
        InitialCondition(SinusoidAffine(1.0, 0.5, 4.0)),
    )


def test_dense_output_order():
    p = _wavy_problem()
    ref = integrate_linear(p, IntegratorConfig(3.2, 0.8 / 2000))
    ts = np.linspace(0.013, 3.19, 301)
    errs = []
    for h in (0.04, 0.02, 0.01):
        errs.append(np.max(np.abs(integrate_linear(p, IntegratorConfig(3.2, h)).sample(ts) - ref.sample(ts))))
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(orders >= 3.5), orders


@given(c=st.floats(-5, 5), d=st.floats(-5, 5))
@settings(max_examples=15, deadline=None)
def test_linearity_in_history(c, d):
    base = _wavy_problem()
    cfg = IntegratorConfig(4.0, 0.02)
    x1 = integrate_linear(base.with_initial(InitialCondition.constant(1.0)), cfg)
    x2 = integrate_linear(base, cfg)
    combo = InitialCondition(
        Tabulated(tuple((float(s), c + d * base.initial.history(float(s))) for s in np.linspace(-1, 0, 4001))),
        c + d * base.initial.value_at_zero,
    )
    x3 = integrate_linear(base.with_initial(combo), cfg)
    scale = 1 + abs(c) + abs(d)
    assert np.max(np.abs(x3.x - (c * x1.x + d * x2.x))) < 1e-6 * scale


def test_grid_contains_breakpoints():
    a = example1_problem(1.8, "vanishing_a").a
    nodes, breaks = build_grid([a], [FloorArgument()], 5.0, 0.01)
    eps = example1_eps(1.8)
    for k in range(5):
        assert any(abs(nd - (k + eps)) < 1e-12 for nd in nodes)
        assert float(k) in nodes
    assert np.all(np.diff(nodes) > 0) and np.max(np.diff(nodes)) <= 0.01 + 1e-12


def test_constant_lag_propagation_in_grid():
    nodes, breaks = build_grid([Constant(1.0)], [ConstantLag(0.7)], 3.0, 0.05)
    for k in (1, 2, 3):
        assert any(abs(nd - 0.7 * k) < 1e-12 for nd in nodes)


def test_breakpoint_exactness_example1():
    traj = integrate_example1(1.8, "vanishing_a", 10)
    eps = example1_eps(1.8)
    for n in range(10):
        assert abs(traj(n + eps)) < 1e-8


def test_trajectory_is_read_only(tmp_path):
    p = _wavy_problem()
    traj = integrate_linear(p, IntegratorConfig(1.0, 0.05))
    with pytest.raises(ValueError):
        traj.x[0] = 3.0
    path = traj.write_csv(tmp_path / "x.csv", sample_step=0.25)
    rows = list(csv.reader(path.open()))
    assert rows[0] == ["t", "x"] and len(rows) == 6
    bp = list(csv.reader(traj.write_breakpoints_csv(tmp_path / "b.csv").open()))
    assert bp[0] == ["t", "kind"]


def test_segments_reproduce_dense_output():
    traj = integrate_linear(_wavy_problem(), IntegratorConfig(1.0, 0.05))
    for t0, t1, c in list(traj.segments())[::5]:
        s = 0.3 * (t1 - t0)
        assert np.polyval(c[::-1], s) == pytest.approx(traj(t0 + s), abs=1e-13)


def test_beyond_horizon_raises():
    traj = integrate_linear(_wavy_problem(), IntegratorConfig(1.0, 0.05))
    with pytest.raises(DomainError):
        traj(1.5)


def test_step_too_large_for_lag():
    with pytest.raises(DomainError):
        integrate_linear(_wavy_problem(), IntegratorConfig(1.0, 0.2))
    assert IntegratorConfig.for_delays([ConstantLag(0.1)], 5.0).step_size == pytest.approx(0.005)


def test_atom_kernel_matches_concentrated():
    term = DistributedTerm(Constant(1.0), ConstantLag(1.0), AtomKernel(((0.0, 1.0),)))
    dist = LinearDDE(Constant(2.0), (), (term,))
    conc = LinearDDE(Constant(2.0), ((Constant(1.0), ConstantLag(1.0)),))
    cfg = IntegratorConfig(5.0, 0.01)
    assert np.max(np.abs(integrate_linear(dist, cfg).x - integrate_linear(conc, cfg).x)) < 1e-12


def test_kernel_integral_of_linear_function():
    term = DistributedTerm(Constant(1.0), ConstantLag(2.0), DensityKernel(Constant(1.0)))
    # mean of s over [t-2, t] is t-1
    assert kernel_integral(term, 5.0, lambda s: s) == pytest.approx(4.0, abs=1e-12)


def test_nonlinear_linear_map_matches_linear():
    nl = NonlinearDDE(LinearMap(Constant(2.0)), ((LinearMap(Constant(1.0)), ConstantLag(0.5)),), (),
                      InitialCondition.constant(1.0))
    lin = LinearDDE(Constant(2.0), ((Constant(1.0), ConstantLag(0.5)),))
    cfg = IntegratorConfig(5.0, 0.01)
    assert np.max(np.abs(integrate_nonlinear(nl, cfg).x - integrate_linear(lin, cfg).x)) < 1e-12


def test_nonlinear_box_exit_warns():
    nl = NonlinearDDE(
        LinearMap(Constant(-1.0)), ((LinearMap(Constant(0.0)), ConstantLag(0.5)),), (),
        InitialCondition.constant(0.5), SectorBounds(1.0, 1.0, (0.0,), (-1.0, 1.0)), (-1.0, 1.0),
    )
    traj = integrate_nonlinear(nl, IntegratorConfig(2.0, 0.01))
    assert traj.warnings and "left the sector-bound box" in traj.warnings[0]
    with pytest.raises(DomainError):
        integrate_nonlinear(
            NonlinearDDE(nl.f, nl.concentrated, (), InitialCondition.constant(3.0), nl.sector_bounds, (-1.0, 1.0)),
            IntegratorConfig(2.0, 0.01),
        )


def test_variable_lag():
    h = TabulatedLag(((0.0, 0.5), (10.0, 1.0)))
    p = LinearDDE(Constant(1.0), ((Constant(0.5), h),))
    traj = integrate_linear(p, IntegratorConfig(10.0, 0.01))
    assert abs(traj.x[-1]) < 0.1


def test_rescaled_time_cross_check():
    p = LinearDDE(Constant(2.0), ((Constant(1.0), ConstantLag(0.5)),))
    traj = integrate_linear(p, IntegratorConfig(10.0, 0.005))
    y = rescale_time(p, traj)
    q = rescaled_problem(p, 10.0)
    assert q.a == Constant(1.0) and q.concentrated[0][1] == ConstantLag(1.0)
    direct = integrate_linear(q, IntegratorConfig(20.0, 0.01))
    ss = np.linspace(0, 20, 81)
    assert np.max(np.abs(y.sample(ss) - direct.sample(ss))) < 1e-6


def test_rescale_needs_positive_a():
    p = example1_problem(1.8, "vanishing_a")
    with pytest.raises(DomainError):
        rescale_time(p, integrate_linear(p, IntegratorConfig(2.0, 1e-3)))


@pytest.mark.parametrize("variant", ["vanishing_a", "positive_a"])
def test_example1_regime_warning(variant):
    assert integrate_example1(1.0, variant, 3).warnings
    assert not integrate_example1(1.8, variant, 3).warnings
    assert math.isfinite(integrate_example1(1.8, variant, 3).x[-1])
