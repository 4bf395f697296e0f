import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from builders import fig2b_inputs, node, random_instance, slices, task, two_slot
from orchsim.energy import EnergyPriceForecast
from orchsim.errors import HorizonExceeded, Infeasible, NoFeasibleNode
from orchsim.model import NodeState, TimingEstimate
from orchsim.placement import select_node
from orchsim.scheduling import (
    Objective,
    candidate_starts,
    deployment_cost,
    latest_start,
    orchestrate,
    select_start,
)
from orchsim.slicing import SliceThresholds

TH = SliceThresholds()


def ten_watt_node():
    # 10 W dynamic for a 1-CPU task, 1 s of processing for 10 CU
    return NodeState.empty(node(cpu=1, p_idle=0, p_max=10, rate=10))


def deferrable(deadline=150.0):
    return task(cpu=1, workload=10, data=0, latency=10, bw=0.01, tolerant=True, deadline=deadline)


class TestLatestStart:
    def test_subtraction(self):
        assert latest_start(task(deadline=150), TimingEstimate(0, 1, 1)) == 149

    def test_boundary(self):
        assert latest_start(task(deadline=10), TimingEstimate(0, 10, 10)) == 0

    def test_infeasible(self):
        with pytest.raises(Infeasible):
            latest_start(task(deadline=5), TimingEstimate(0, 10, 10))


class TestSelectStart:
    def decision(self, t):
        return select_node(t, [ten_watt_node()], slices(), TH, 0.0)

    def test_defers_to_cheap_slot(self):
        t = deferrable()
        assert select_start(t, self.decision(t), two_slot(), 0.0) == 100.0

    def test_constant_price_starts_now(self):
        t = deferrable()
        assert select_start(t, self.decision(t), EnergyPriceForecast.constant(2.0, 200), 0.0) == 0.0

    def test_cheap_slot_out_of_reach(self):
        t = deferrable(deadline=50)
        d = self.decision(t)
        assert select_start(t, d, two_slot(), 0.0) == 0.0
        assert deployment_cost(two_slot(), 0.0, d.timing, d.power, d.transfer_energy) == 30.0

    def test_short_cheap_slot_between_dear_ones(self):
        # cheapest start straddles the 100..105 dip: price(s) is constant there,
        # so only a breakpoint at b - t_proc finds it
        fc = EnergyPriceForecast(((0, 2.0), (100, 1.0), (105, 10.0)), 300)
        t = deferrable(deadline=200)
        d = select_node(t, [NodeState.empty(node(cpu=1, p_idle=0, p_max=1, rate=1))], slices(), TH, 0.0)
        assert d.timing.t_proc == 10.0
        s = select_start(t, d, fc, 0.0)
        assert s == 95.0
        assert deployment_cost(fc, s, d.timing, d.power, 0.0) == 15.0


class TestOrchestrate:
    def test_energy_objective_fig2b(self):
        t, states, sl, th, fc = fig2b_inputs()
        plan = orchestrate(t, states, sl, th, fc, 0.0, Objective.ENERGY)
        assert (plan.node_id, plan.start, plan.decision.predicted_energy) == ("edge", 0.0, 10.0)

    def test_cost_objective_defers(self):
        plan = orchestrate(deferrable(), [ten_watt_node()], slices(), TH, two_slot(), 0.0, Objective.COST)
        assert (plan.start, plan.predicted_cost, plan.predicted_finish) == (100.0, 10.0, 101.0)

    def test_cost_objective_without_reachable_deferral(self):
        t = deferrable(deadline=50)
        a = orchestrate(t, [ten_watt_node()], slices(), TH, two_slot(), 0.0, Objective.COST)
        b = orchestrate(t, [ten_watt_node()], slices(), TH, two_slot(), 0.0, Objective.ENERGY)
        assert (a.node_id, a.start, a.predicted_cost) == (b.node_id, b.start, b.predicted_cost) == ("n", 0.0, 30.0)

    def test_non_tolerant_never_deferred(self):
        t = task(cpu=1, workload=10, latency=10, bw=0.01, tolerant=False, deadline=150)
        plan = orchestrate(t, [ten_watt_node()], slices(), TH, two_slot(), 0.0, Objective.COST)
        assert plan.start == 0.0

    def test_no_feasible(self):
        with pytest.raises(NoFeasibleNode):
            orchestrate(deferrable(), [], slices(), TH, two_slot(), 0.0, Objective.COST)

    def test_horizon_exceeded(self):
        fc = EnergyPriceForecast.constant(1.0, 0.5)
        with pytest.raises(HorizonExceeded):
            orchestrate(deferrable(), [ten_watt_node()], slices(), TH, fc, 0.0, Objective.COST)
        with pytest.raises(HorizonExceeded):
            orchestrate(deferrable(), [ten_watt_node()], slices(), TH, fc, 0.0, Objective.ENERGY)


def test_candidates_include_window_ends_and_breakpoints():
    tm = TimingEstimate(2.0, 3.0, 5.0)
    fc = EnergyPriceForecast(((0, 1), (50, 2), (500, 1)), 1000)
    assert candidate_starts(tm, fc, 10.0, 100.0) == [10.0, 45.0, 48.0, 50.0, 100.0]


# --- properties ------------------------------------------------------------

seeds = st.integers(0, 2**32 - 1)


def _plan(inst, objective):
    t, states, sl, th, fc, now, prof = inst
    try:
        return orchestrate(t, states, sl, th, fc, now, objective, prof)
    except (NoFeasibleNode, HorizonExceeded):
        return None


@settings(max_examples=300, deadline=None)
@given(seeds, st.sampled_from(list(Objective)))
def test_plans_respect_deadline_and_window(seed, objective):
    inst = random_instance(seed)
    t, _, _, _, fc, now, _ = inst
    plan = _plan(inst, objective)
    if plan is None:
        return
    assert now <= plan.start
    assert plan.predicted_finish == plan.start + plan.decision.timing.t_total
    assert plan.predicted_finish <= t.deadline
    assert plan.predicted_finish <= fc.horizon_end
    assert plan.predicted_cost >= 0
    assert plan.start <= latest_start(t, plan.decision.timing)


@settings(max_examples=300, deadline=None)
@given(seeds)
def test_cost_objective_never_worse(seed):
    inst = random_instance(seed)
    by_cost, by_energy = _plan(inst, Objective.COST), _plan(inst, Objective.ENERGY)
    if by_energy is not None:
        assert by_cost is not None
        assert by_cost.predicted_cost <= by_energy.predicted_cost


@settings(max_examples=150, deadline=None)
@given(seeds)
def test_no_dense_grid_start_beats_selection(seed):
    """Sampling the start window on a fine grid never finds a cheaper start."""
    t, states, sl, th, fc, now, prof = inst = random_instance(seed)
    plan = _plan(inst, Objective.COST)
    if plan is None or not t.comm.delay_tolerant:
        return
    d = plan.decision
    # the selected node's own window, sampled at 2001 points
    hi = min(t.deadline, fc.horizon_end) - d.timing.t_total
    n = 2000
    for i in range(n + 1):
        s = now + (hi - now) * i / n
        if s + d.timing.t_total > t.deadline or (s + d.timing.t_net) + d.timing.t_proc > fc.horizon_end:
            continue
        c = deployment_cost(fc, s, d.timing, d.power, d.transfer_energy)
        assert plan.predicted_cost <= c + 1e-9 * max(1.0, abs(c))
