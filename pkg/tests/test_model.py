import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from delaystab.errors import DomainError, ExtrapolationError, PreconditionError
from delaystab.model import (
    AtomKernel,
    Constant,
    ConstantLag,
    CumulativeIntegral,
    DensityKernel,
    DistributedTerm,
    FloorArgument,
    InitialCondition,
    LinearDDE,
    MGFeedback,
    PiecewisePeriodic,
    SectorBounds,
    SinusoidAffine,
    Tabulated,
    TabulatedLag,
    delay_at,
    evaluate,
    integrate,
    sampled_range,
)

finite = st.floats(min_value=-1e3, max_value=1e3, allow_nan=False)


class TestFunctionSpecs:
    def test_piecewise_periodic_is_right_continuous(self):
        a = PiecewisePeriodic(1.0, ((0.0, 0.25, 3.0), (0.25, 1.0, 0.5)))
        assert a(0.25) == 0.5
        assert a(0.25, left=True) == 3.0
        assert a(2.0) == 3.0
        assert a(2.0, left=True) == 0.5

    def test_piecewise_periodic_rejects_gaps(self):
        with pytest.raises(DomainError):
            PiecewisePeriodic(1.0, ((0.0, 0.4, 1.0), (0.5, 1.0, 2.0)))
        with pytest.raises(DomainError):
            PiecewisePeriodic(1.0, ((0.0, 0.9, 1.0),))

    @given(t=st.floats(min_value=0, max_value=200), k=st.integers(min_value=1, max_value=50))
    def test_periodicity(self, t, k):
        a = PiecewisePeriodic(1.5, ((0.0, 0.3, 2.0), (0.3, 1.0, 0.0), (1.0, 1.5, 7.0)))
        assert a(t + 1.5 * k) == a(t)

    def test_breakpoints(self):
        a = PiecewisePeriodic(1.0, ((0.0, 0.5, 1.0), (0.5, 1.0, 2.0)))
        assert a.breakpoints(0.0, 2.0) == pytest.approx([0.0, 0.5, 1.0, 1.5, 2.0])

    def test_tabulated_step_and_linear(self):
        step = Tabulated(((0.0, 1.0), (1.0, 3.0), (2.0, 5.0)), "step")
        lin = Tabulated(((0.0, 1.0), (1.0, 3.0), (2.0, 5.0)))
        assert step(0.5) == 1.0
        assert step(1.0) == 3.0 and step(1.0, left=True) == 1.0
        assert lin(0.5) == 2.0 and lin(1.5) == 4.0

    def test_tabulated_extrapolation_raises(self):
        with pytest.raises(ExtrapolationError):
            Tabulated(((0.0, 1.0), (1.0, 2.0)))(1.5)
        with pytest.raises(ExtrapolationError):
            Tabulated(((0.0, 1.0), (1.0, 2.0)))(-0.1)

    def test_tabulated_requires_increasing_knots(self):
        with pytest.raises(DomainError):
            Tabulated(((0.0, 1.0), (0.0, 2.0)))

    def test_sinusoid_bounds(self):
        r = SinusoidAffine(2.7, 0.3, 1.0)
        assert r.bounds() == pytest.approx((2.4, 3.0))
        lo, hi = sampled_range(r, 0, 20, 0.001)
        assert lo == pytest.approx(2.4, abs=1e-6) and hi == pytest.approx(3.0, abs=1e-6)

    def test_evaluate_matches_call(self):
        assert evaluate(SinusoidAffine(1, 2, 3), 0.7) == 1 + 2 * math.sin(2.1)


class TestIntegration:
    def test_piecewise_exact(self):
        a = PiecewisePeriodic(1.0, ((0.0, 0.25, 4.0), (0.25, 1.0, 0.0)))
        assert integrate(a, 0.0, 3.0) == pytest.approx(3.0, abs=1e-12)
        assert integrate(a, 0.1, 0.2) == pytest.approx(0.4, abs=1e-12)

    def test_linear_table_exact(self):
        f = Tabulated(((0.0, 0.0), (1.0, 1.0), (3.0, 1.0)))
        assert integrate(f, 0.0, 3.0) == pytest.approx(2.5, abs=1e-12)

    def test_reversed_limits(self):
        f = SinusoidAffine(1.0, 1.0, 1.0)
        assert integrate(f, 2.0, 0.0) == pytest.approx(-integrate(f, 0.0, 2.0))

    def test_sinusoid_accuracy(self):
        f = SinusoidAffine(0.0, 1.0, 1.0)
        assert integrate(f, 0.0, math.pi) == pytest.approx(2.0, abs=1e-6)

    @given(u=st.floats(0, 10), v=st.floats(0, 10))
    @settings(max_examples=40)
    def test_cumulative_matches_integrate(self, u, v):
        a = PiecewisePeriodic(1.0, ((0.0, 0.3, 2.0), (0.3, 1.0, 0.5)))
        cum = CumulativeIntegral(a, 0.0, 10.0)
        assert cum.between(u, v) == pytest.approx(integrate(a, u, v), abs=1e-9)

    def test_cumulative_outside_range(self):
        with pytest.raises(DomainError):
            CumulativeIntegral(SinusoidAffine(1, 1, 1), 0.0, 1.0)(2.0)


class TestDelays:
    def test_constant_lag(self):
        assert ConstantLag(0.5)(2.0) == 1.5
        assert ConstantLag(0.5).lag_bound == 0.5
        with pytest.raises(DomainError):
            ConstantLag(-1.0)

    def test_floor(self):
        h = FloorArgument()
        assert h(2.7) == 2.0
        assert h(3.0) == 3.0
        assert h(3.0, left=True) == 2.0
        assert h.breakpoints(0.5, 3.0) == [1.0, 2.0, 3.0]

    @given(t=st.floats(min_value=0, max_value=1e4))
    def test_floor_invariants(self, t):
        h = FloorArgument()
        assert h(t) <= t
        assert t - h(t) < 1.0 + 1e-9
        assert t - h(t, left=True) <= 1.0 + 1e-9

    def test_tabulated_lag_holds_lags(self):
        h = TabulatedLag(((0.0, 0.5), (10.0, 1.5)))
        assert h(4.0) == pytest.approx(4.0 - 0.9)
        assert h.lag_bound == 1.5
        with pytest.raises(DomainError):
            TabulatedLag(((0.0, -0.1), (1.0, 0.2)))

    def test_delay_at_rejects_negative_time(self):
        with pytest.raises(DomainError):
            delay_at(ConstantLag(1.0), -0.5)


class TestKernels:
    def test_atoms_must_sum_to_one(self):
        AtomKernel(((0.0, 0.25), (1.0, 0.75)))
        with pytest.raises(DomainError):
            AtomKernel(((0.0, 0.5), (1.0, 0.6)))
        with pytest.raises(DomainError):
            AtomKernel(((1.5, 1.0),))

    @pytest.mark.parametrize(
        "density",
        [Constant(3.0), Tabulated(((0.0, 0.0), (1.0, 2.0))), SinusoidAffine(2.0, 1.0, 5.0)],
        ids=["uniform", "ramp", "wavy"],
    )
    def test_density_normalizes(self, density):
        k = DensityKernel(density)
        ps = np.linspace(0, 1, 20001)
        w = np.array([k.weight(float(p)) for p in ps])
        assert np.trapezoid(w, ps) == pytest.approx(1.0, abs=1e-6)

    def test_density_must_be_nonnegative(self):
        with pytest.raises(DomainError):
            DensityKernel(Tabulated(((0.0, -1.0), (1.0, 1.0))))


class TestEquations:
    def test_initial_condition_jump(self):
        ic = InitialCondition(Constant(2.0), 5.0)
        assert ic(-1.0) == 2.0 and ic(0.0) == 5.0
        assert InitialCondition(Constant(2.0)).value_at_zero == 2.0

    def test_validate_rejects_negative_coefficients(self):
        p = LinearDDE(Constant(1.0), ((SinusoidAffine(0.0, 1.0, 1.0), ConstantLag(1.0)),))
        with pytest.raises(PreconditionError):
            p.validate(10.0)

    def test_to_dict_round_trip_shape(self):
        term = DistributedTerm(Constant(1.0), ConstantLag(1.0), AtomKernel(((0.5, 1.0),)))
        p = LinearDDE(Constant(2.0), ((Constant(1.0), FloorArgument()),), (term,))
        d = p.to_dict()
        assert d["equation_class"] == "linear"
        assert [t["type"] for t in d["terms"]] == ["concentrated", "distributed"]
        assert len(p.delays()) == 2 and p.total_b(0.0) == 2.0

    def test_sector_bounds_box_must_contain_zero(self):
        with pytest.raises(DomainError):
            SectorBounds(1.0, 2.0, (1.0,), (0.1, 1.0))
        with pytest.raises(DomainError):
            SectorBounds(2.0, 1.0, (1.0,), (-1.0, 1.0))


class TestMGFeedback:
    @given(u=st.floats(min_value=-50, max_value=50), K=st.floats(0.2, 5), n=st.floats(0.5, 8))
    def test_slope_in_sector(self, u, K, n):
        g = MGFeedback(Constant(2.0), 0.7, K, n)
        if abs(u) < 1e-9:
            return
        q = g(0.0, u) / u
        assert -1e-12 <= q <= 0.7 * n * 2.0 / 4 + 1e-12

    def test_no_overflow(self):
        g = MGFeedback(Constant(1.0), 1.0, 1.5, 4.0)
        assert math.isfinite(g(0.0, -500.0)) and math.isfinite(g(0.0, 500.0))
        assert g(0.0, 0.0) == 0.0
