import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from typhoid_info import (
    Parameters,
    State,
    conservation_residual,
    force_of_infection,
    gamma,
    rhs,
    total_population,
)
from typhoid_info.model import DegeneratePopulationError, ModelError

from .conftest import parameters_st, states_st


class TestParameters:
    def test_baseline_values(self):
        p = Parameters.baseline()
        assert (p.pi1, p.pi2, p.pi3) == (0.92, 0.005, 0.015)
        assert (p.lambda1, p.lambda2, p.lambda3) == (0.048, 0.1255, 0.025)
        assert (p.theta1, p.theta2, p.rho) == (0.95, 0.0021, 0.07)
        assert (p.nu_b, p.cc, p.eta1, p.eta2) == (0.025, 50000.0, 0.95, 0.95)

    @pytest.mark.parametrize("name,value", [
        ("rho", 1.5), ("rho", -0.1), ("pi2", 0.0), ("lambda3", 0.0), ("cc", 0.0),
        ("theta1", -1.0), ("eta2", float("nan")), ("pi1", float("inf")),
    ])
    def test_rejects_out_of_bounds(self, name, value):
        with pytest.raises(ModelError, match=name):
            Parameters().replace(**{name: value})

    def test_rho_message(self):
        with pytest.raises(ModelError, match=r"rho must lie in \[0,1\]"):
            Parameters(rho=1.5)

    def test_replace_unknown(self):
        with pytest.raises(ModelError, match="unknown"):
            Parameters().replace(beta=1.0)


class TestState:
    def test_rejects_negative(self):
        with pytest.raises(ModelError):
            State(1.0, -1.0, 0.0, 0.0)

    def test_roundtrip_array(self):
        s = State(1.0, 2.0, 3.0, 4.0)
        assert State.from_array(s.as_array()) == s


class TestGamma:
    def test_zero(self):
        assert gamma(0.0, 50000.0) == 0.0

    @pytest.mark.parametrize("cc", [1e-3, 1.0, 50000.0, 1e9])
    def test_half_at_cc(self, cc):
        assert gamma(cc, cc) == 0.5

    def test_value(self):
        assert gamma(150000.0, 50000.0) == pytest.approx(0.75, abs=1e-15)

    @pytest.mark.parametrize("b,cc", [(-1.0, 1.0), (1.0, 0.0), (1.0, -2.0)])
    def test_domain(self, b, cc):
        with pytest.raises(ModelError):
            gamma(b, cc)

    @given(st.floats(0, 1e12), st.floats(0, 1e12), st.floats(1e-6, 1e9))
    def test_monotone_and_bounded(self, b1, b2, cc):
        g1, g2 = gamma(b1, cc), gamma(b2, cc)
        assert 0 <= g1 < 1 or (g1 == 1.0 and b1 / cc > 1e15)
        if b1 < b2 and b2 / cc < 1e8:
            assert g1 < g2


class TestForceOfInfection:
    def test_no_infectious_agents(self, baseline):
        assert force_of_infection(State(184, 0, 0, 0), baseline) == 0.0

    @given(states_st())
    def test_full_information_blocks(self, state):
        assert force_of_infection(state, Parameters(rho=1.0)) == 0.0

    def test_hand_value(self, baseline):
        # gamma = 0.5; 0.95*0.93*0.5*184 + 0.0021*0.93*10*184/1.25
        chi = force_of_infection(State(184, 10, 0, 50000), baseline)
        assert chi == pytest.approx(84.156816, rel=1e-14)

    @given(states_st(), parameters_st(), st.floats(0, 1), st.floats(0, 1))
    def test_nonneg_and_nonincreasing_in_rho(self, state, p, r1, r2):
        lo, hi = sorted((r1, r2))
        chi_lo = force_of_infection(state, p.replace(rho=lo))
        chi_hi = force_of_infection(state, p.replace(rho=hi))
        assert chi_hi >= 0
        assert chi_hi <= chi_lo * (1 + 1e-15)

    @given(states_st(), parameters_st())
    def test_saturation_bound(self, state, p):
        term = p.theta2 * (1 - p.rho) * state.i * state.s / (1 + p.nu_b * state.i)
        assert term <= p.theta2 * (1 - p.rho) * state.s / p.nu_b * (1 + 1e-12)


class TestRhs:
    def test_dfe_stationary_without_recruitment(self):
        p = Parameters(eta1=0.0)
        assert rhs(State(p.pi1 / p.pi2, 0, 0, 0), p) == (0.0, 0.0, 0.0, 0.0)

    def test_dfe_bacteria_recruitment(self, baseline):
        d = rhs(State(baseline.pi1 / baseline.pi2, 0, 0, 0), baseline)
        assert d == (0.0, 0.0, 0.0, 0.95)

    def test_hand_evaluation(self, baseline):
        # frozen from exact rational evaluation of the four formulas
        d = rhs(State(184, 1, 0, 100), baseline)
        expected = (-0.6750663589893384, 0.6070663589893384, 0.048, -1.5448648648648649)
        for got, want in zip(d, expected):
            assert got == pytest.approx(want, rel=1e-13, abs=1e-15)

    def test_degenerate_population(self, baseline):
        with pytest.raises(DegeneratePopulationError):
            rhs(State(0, 0, 0, 5), baseline)


@pytest.mark.parametrize("state,n", [
    (State(1, 2, 3, 9), 6), (State(0, 0, 0, 1), 0), (State(184, 0, 0, 0), 184),
])
def test_total_population(state, n):
    assert total_population(state) == n


class TestConservation:
    def test_dfe_exact(self, baseline):
        assert conservation_residual(State(184, 0, 0, 0), baseline) == 0.0

    @settings(max_examples=300)
    @given(states_st(), parameters_st())
    def test_identity(self, state, p):
        d = rhs(state, p)
        n = total_population(state)
        scale = max(1.0, p.pi1, p.pi2 * n, p.pi3 * state.i, *(abs(x) for x in d),
                    force_of_infection(state, p), p.lambda2 * state.r, p.lambda1 * state.i)
        assert abs(conservation_residual(state, p)) <= 1e-12 * scale
        assert math.isfinite(conservation_residual(state, p))
