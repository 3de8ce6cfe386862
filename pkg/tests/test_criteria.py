import math

import pytest
from hypothesis import assume, given, settings, strategies as st

from delaystab.criteria import (
    INV_E,
    Verdict,
    bbi_verdict,
    check_bbi_comparison,
    check_linear,
    check_nonoscillation_1e,
    check_problem,
    check_thm1,
    check_thm2,
    check_thm5,
    classify_linear,
    default_criterion,
    delay_bound,
    estimate_thm2_params,
    invert_delay_bound,
)
from delaystab.errors import DomainError, PreconditionError
from delaystab.model import (
    AtomKernel,
    Constant,
    ConstantLag,
    DensityKernel,
    DistributedTerm,
    FloorArgument,
    LinearDDE,
    PiecewisePeriodic,
    SinusoidAffine,
)

pos = st.floats(min_value=0.01, max_value=20)


def const_problem(a, b, tau):
    return LinearDDE(Constant(a), ((Constant(b), ConstantLag(tau)),))


class TestThm1:
    def test_reference_numbers(self):
        v = check_thm1(1.0, 1.5, 2.0)
        assert v.lhs == pytest.approx((1 / 1.5) * math.exp(-2), rel=1e-12)
        assert v.rhs == pytest.approx(math.log((2.25 + 1.5) / (2.25 + 1)), rel=1e-12)
        assert not v.certified

    def test_b_below_a_always_certified(self):
        # rhs = ln((b^2+ab)/(b^2+a^2)) <= 0 when b <= a
        for h in (0.0, 1.0, 50.0):
            assert check_thm1(2.0, 1.0, h).certified

    def test_zero_b(self):
        v = check_thm1(1.0, 0.0, 3.0)
        assert v.certified and v.lhs == math.inf

    def test_rejects_bad_inputs(self):
        with pytest.raises(DomainError):
            check_thm1(0.0, 1.0, 1.0)
        with pytest.raises(DomainError):
            check_thm1(1.0, -1.0, 1.0)

    @given(a=pos, b=pos, h1=st.floats(0, 5), h2=st.floats(0, 5))
    def test_monotone_in_delay(self, a, b, h1, h2):
        lo, hi = sorted((h1, h2))
        if check_thm1(a, b, hi).certified:
            assert check_thm1(a, b, lo).certified

    @given(a=pos, b=pos, h=st.floats(0, 5))
    def test_equivalent_to_rescaled(self, a, b, h):
        assert check_thm1(a, b, h).certified == check_thm2(b / a, a * h).certified


class TestThm5:
    def test_reduces_to_thm1(self):
        v5 = check_thm5(1.3, 1.3, 1.7, 0.4)
        v1 = check_thm1(1.3, 1.7, 0.4)
        assert v5.lhs == pytest.approx(v1.lhs) and v5.rhs == pytest.approx(v1.rhs)

    def test_validation(self):
        with pytest.raises(DomainError):
            check_thm5(2.0, 1.0, 1.0, 0.1)
        with pytest.raises(DomainError):
            check_thm5(1.0, 1.0, 0.0, 0.1)

    @given(a0=st.floats(0.1, 5), extra=st.floats(0, 5), b0=st.floats(0.1, 10))
    def test_inversion_boundary(self, a0, extra, b0):
        A = a0 + extra
        h = invert_delay_bound(a0, A, b0)
        assume(math.isfinite(h) and h > 1e-6)
        assert check_thm5(a0, A, b0, h * (1 - 1e-9)).certified
        assert not check_thm5(a0, A, b0, h * (1 + 1e-9)).certified

    def test_inversion_infinite_when_b_small(self):
        assert invert_delay_bound(2.0, 3.0, 1.0) == math.inf


class TestBBI:
    def test_example_bound(self):
        assert check_bbi_comparison(0.5, 4.0, 3.0) == pytest.approx(4 * (1 + INV_E) / 6.0)

    def test_verdict_matches_bound(self):
        bound = check_bbi_comparison(0.5, 4.0, 3.0)
        assert bbi_verdict(0.5, 4.0, 3.0, bound * 0.999).certified
        assert not bbi_verdict(0.5, 4.0, 3.0, bound * 1.001).certified


class TestEstimates:
    def test_constant_problem(self):
        h0, beta = estimate_thm2_params(const_problem(2.0, 1.0, 0.5), horizon=20)
        assert h0.value == pytest.approx(1.0, abs=1e-12)
        assert beta.value == pytest.approx(0.5)
        assert h0.burn_in == 2.0

    def test_check_linear_reference(self):
        v = check_linear(const_problem(2.0, 1.0, 0.5), horizon=20)
        assert v.certified and v.criterion_id == "Thm2"
        assert v.lhs == pytest.approx(2 * math.exp(-1), rel=1e-9)
        assert v.rhs == pytest.approx(math.log(0.75 / 1.25), rel=1e-9)

    def test_periodic_coefficients(self):
        a = PiecewisePeriodic(1.0, ((0.0, 0.5, 4.0), (0.5, 1.0, 2.0)))
        b = SinusoidAffine(1.0, 0.5, 2 * math.pi)
        p = LinearDDE(a, ((b, ConstantLag(1.0)),))
        h0, beta = estimate_thm2_params(p, horizon=20, grid_step=0.005)
        assert h0.value == pytest.approx(3.0, abs=1e-9)
        # b/a peaks just after the switch to a = 2, where b = 1
        assert beta.value == pytest.approx(0.5, abs=1e-9)

    def test_refinement_monotone(self):
        p = LinearDDE(Constant(1.0), ((SinusoidAffine(1.0, 0.5, 1.7), ConstantLag(1.0)),))
        coarse = estimate_thm2_params(p, horizon=30, grid_step=0.04)[1].value
        fine = estimate_thm2_params(p, horizon=30, grid_step=0.01)[1].value
        assert fine >= coarse - 1e-15
        assert fine == pytest.approx(1.5, abs=1e-3)

    def test_nonpositive_a(self):
        p = LinearDDE(Constant(0.0), ((Constant(1.0), ConstantLag(1.0)),))
        with pytest.raises(PreconditionError):
            check_linear(p, horizon=10)

    def test_classification(self):
        dens = DistributedTerm(Constant(1.0), ConstantLag(1.0), DensityKernel(Constant(1.0)))
        atoms = DistributedTerm(Constant(1.0), ConstantLag(1.0), AtomKernel(((0.5, 1.0),)))
        c = (Constant(1.0), ConstantLag(1.0))
        assert classify_linear(LinearDDE(Constant(1.0), (c,))) == "Thm2"
        assert classify_linear(LinearDDE(Constant(1.0), (c, c))) == "Thm3"
        assert classify_linear(LinearDDE(Constant(1.0), (), (dens,))) == "Cor1"
        assert classify_linear(LinearDDE(Constant(1.0), (c,), (atoms,))) == "Thm4"


class TestNonoscillation:
    def test_reference(self):
        v = check_nonoscillation_1e(Constant(0.3), ConstantLag(1.0), Constant(1.0), horizon=20)
        assert v.certified
        assert v.lhs == pytest.approx(0.3, abs=1e-12)
        # z = x e^{int a} turns the coefficient into b e^{+a tau}
        assert v.inputs_echo["sup_int_r"] == pytest.approx(0.3 * math.e, abs=1e-3)
        assert v.inputs_echo["nonoscillation_with_a"] is False

    def test_above_threshold(self):
        assert not check_nonoscillation_1e(Constant(0.4), ConstantLag(1.0), horizon=20).certified

    @pytest.mark.parametrize("a, nonosc", [(0.0, True), (0.1, True), (0.5, False), (3.0, False)])
    def test_transformed_test_tracks_dynamics(self, a, nonosc):
        # constant coefficients: nonoscillatory iff b tau e^{a tau} <= 1/e
        v = check_nonoscillation_1e(Constant(0.3), ConstantLag(1.0), Constant(a), horizon=20)
        assert v.inputs_echo["nonoscillation_with_a"] is nonosc
        assert v.inputs_echo["sup_int_r"] == pytest.approx(0.3 * math.exp(a), rel=1e-4)

    def test_floor_argument(self):
        v = check_nonoscillation_1e(Constant(0.3), FloorArgument(), horizon=20)
        assert v.lhs == pytest.approx(0.3, abs=1e-12) and v.certified


class TestDispatch:
    def test_defaults(self):
        assert default_criterion(const_problem(2, 1, 0.5)) == "Thm1"
        assert default_criterion(LinearDDE(Constant(0.0), ((Constant(1), FloorArgument()),))) == "Nonosc1e"
        assert default_criterion(LinearDDE(SinusoidAffine(2, 1, 1), ((Constant(1), ConstantLag(1)),))) == "Thm2"

    def test_explicit_criterion(self):
        v = check_problem(const_problem(2, 1, 0.5), "Thm2", horizon=20)
        assert isinstance(v, Verdict) and v.criterion_id == "Thm2"
        assert v.inputs_echo["h0"] == pytest.approx(1.0)

    def test_delay_bound_matches_inversion(self):
        d = delay_bound(const_problem(1.0, 1.5, 0.1), horizon=20)
        assert d["h0_max"] == pytest.approx(invert_delay_bound(1.0, 1.0, 1.5))

    def test_verdict_serialization(self):
        d = check_thm1(1.0, 1.5, 0.1).to_dict()
        assert set(d) == {"criterion", "certified", "lhs", "rhs", "inputs"}
        with pytest.raises(DomainError):
            Verdict(True, 0.0, 0.0, "Thm99")


@settings(max_examples=25, deadline=None)
@given(a=st.floats(0.2, 3), b=st.floats(0.0, 3), tau=st.floats(0.05, 2))
def test_grid_estimate_agrees_with_closed_form(a, b, tau):
    assume(b > 1e-3)
    v2 = check_linear(const_problem(a, b, tau), horizon=10, grid_step=0.05)
    assert v2.inputs_echo["beta"] == pytest.approx(b / a, rel=1e-12)
    assert v2.inputs_echo["h0"] == pytest.approx(a * tau, rel=1e-9)
