from fractions import Fraction

import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from builders import exact_cost, node, task, two_slot
from orchsim.energy import (
    EnergyPriceForecast,
    PowerProfile,
    execution_cost,
    price_at,
    task_energy,
    task_power,
    update_profile,
)
from orchsim.errors import InvalidAlpha, InvariantError, OutOfHorizon
from orchsim.model import TimingEstimate


class TestPower:
    def test_half_utilization(self):
        assert task_power(task(cpu=2), node(cpu=4, p_idle=5, p_max=25)) == 10.0

    def test_zero_cpu(self):
        assert task_power(task(cpu=0), node(p_idle=5, p_max=25)) == 0.0

    def test_full_utilization(self):
        assert task_power(task(cpu=4), node(cpu=4, p_idle=5, p_max=25)) == 20.0

    def test_zero_capacity_node(self):
        assert task_power(task(cpu=0), node(cpu=0, p_idle=5, p_max=25)) == 0.0

    def test_profile_overrides_nominal(self):
        prof = PowerProfile("n", 5, 45)
        assert task_power(task(cpu=2), node(cpu=4, p_idle=5, p_max=25), prof) == 20.0


class TestEnergy:
    def test_local_node(self):
        # 2 W dynamic for 20 s
        n = node(cpu=1, p_idle=1, p_max=3)
        assert task_energy(task(cpu=1), n, TimingEstimate(0.101, 20.0, 20.101)) == 40.0

    def test_edge_node(self):
        n = node(cpu=4, p_idle=10, p_max=50)
        assert task_energy(task(cpu=1), n, TimingEstimate(1.01, 1.0, 2.01)) == 10.0

    def test_nothing_to_do(self):
        assert task_energy(task(data=0), node(coeff=0.5), TimingEstimate(0, 0, 0)) == 0.0

    def test_transfer_term(self):
        assert task_energy(task(cpu=0, data=100), node(coeff=0.25), TimingEstimate(1, 0, 1)) == 25.0


class TestPrice:
    def test_lookup(self):
        assert price_at(two_slot(), 50) == 3

    def test_boundary_belongs_to_later_slot(self):
        assert price_at(two_slot(), 100) == 1

    @pytest.mark.parametrize("t", [250, 200, -1])
    def test_out_of_horizon(self, t):
        with pytest.raises(OutOfHorizon):
            price_at(two_slot(), t)


class TestExecutionCost:
    @pytest.mark.parametrize("start,expected", [(0, 30), (100, 10), (99.5, 20)])
    def test_examples(self, start, expected):
        assert exact_cost(two_slot(), start, 1, 10) == expected  # independent reference
        assert execution_cost(two_slot(), start, 1, 10) == expected

    def test_exits_horizon(self):
        with pytest.raises(OutOfHorizon):
            execution_cost(two_slot(), 199.5, 1, 10)

    def test_zero_duration(self):
        assert execution_cost(two_slot(), 150, 0, 10) == 0


def test_forecast_invariants():
    with pytest.raises(InvariantError):
        EnergyPriceForecast(((0, 1), (0, 2)), 10)
    with pytest.raises(InvariantError):
        EnergyPriceForecast(((0, -1),), 10)
    with pytest.raises(InvariantError):
        EnergyPriceForecast(((0, 1), (10, 2)), 10)


class TestUpdateProfile:
    def test_ema(self):
        assert update_profile(PowerProfile("n", 1, 10), 14, 0.3).p_max_hat == pytest.approx(11.2, abs=1e-12)

    def test_alpha_zero(self):
        assert update_profile(PowerProfile("n", 1, 10), 14, 0).p_max_hat == 10

    def test_alpha_one(self):
        assert update_profile(PowerProfile("n", 1, 10), 14, 1).p_max_hat == 14

    @pytest.mark.parametrize("alpha", [-0.1, 1.5])
    def test_invalid_alpha(self, alpha):
        with pytest.raises(InvalidAlpha):
            update_profile(PowerProfile("n", 1, 10), 14, alpha)


# --- properties ----------------------------------------------------------

@st.composite
def forecasts(draw, horizon=1000.0):
    cuts = draw(st.lists(st.integers(1, 999), unique=True, max_size=11))
    prices = draw(st.lists(st.integers(0, 40), min_size=len(cuts) + 1, max_size=len(cuts) + 1))
    starts = [0.0] + sorted(c * horizon / 1000 for c in cuts)
    return EnergyPriceForecast(tuple(zip(starts, (p / 8 for p in prices))), horizon)


# multiples of 1/64 keep sums exact in binary floating point
dyadic = st.integers(0, 64 * 400).map(lambda k: k / 64)


@given(forecasts(), st.floats(0, 500), st.floats(0, 400), st.floats(0, 1000))
def test_matches_exact_integral(fc, start, duration, power):
    assume(start + duration <= fc.horizon_end)
    got = execution_cost(fc, start, duration, power)
    ref = float(exact_cost(fc, start, duration, power))
    assert got == pytest.approx(ref, rel=1e-9, abs=1e-9)


@given(st.floats(0, 50), st.floats(0, 500), st.floats(0, 400), st.floats(0, 1000))
def test_constant_price_is_exact(price, start, duration, power):
    fc = EnergyPriceForecast.constant(price, 1000.0)
    assume(start + duration <= 1000.0)
    assert execution_cost(fc, start, duration, power) == power * duration * price


@given(forecasts(), dyadic, dyadic, dyadic, st.integers(0, 64))
def test_additive_in_time(fc, start, d1, d2, power):
    assume(start + d1 + d2 <= fc.horizon_end)
    whole = execution_cost(fc, start, d1 + d2, power)
    parts = execution_cost(fc, start, d1, power) + execution_cost(fc, start + d1, d2, power)
    assert whole == parts


@given(forecasts(), st.floats(0, 500), st.floats(0, 400), st.floats(0, 1000), st.floats(0, 10))
def test_linear_in_price(fc, start, duration, power, k):
    assume(start + duration <= fc.horizon_end)
    scaled = EnergyPriceForecast(tuple((s, p * k) for s, p in fc.slots), fc.horizon_end)
    assert execution_cost(scaled, start, duration, power) == pytest.approx(
        k * execution_cost(fc, start, duration, power), rel=1e-9, abs=1e-9
    )


@given(st.floats(0, 100), st.floats(0, 100), st.floats(0, 1000), st.floats(0, 1000))
def test_energy_nonnegative_and_monotone(t1, t2, pmax, data):
    n = node(cpu=4, p_idle=1, p_max=1 + pmax, coeff=0.01)
    t = task(cpu=1, data=data)
    lo, hi = sorted((t1, t2))
    e_lo = task_energy(t, n, TimingEstimate(0, lo, lo))
    e_hi = task_energy(t, n, TimingEstimate(0, hi, hi))
    assert 0 <= e_lo <= e_hi


@given(st.floats(0, 100), st.floats(0, 100), st.floats(0, 1))
def test_profile_stays_between(old, obs, alpha):
    out = update_profile(PowerProfile("n", 0, old), obs, alpha).p_max_hat
    assert min(old, obs) <= out <= max(old, obs)


def test_exact_cost_reference_sanity():
    assert exact_cost(two_slot(), 99.5, 1, 10) == Fraction(20)
