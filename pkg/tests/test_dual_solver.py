import math

import numpy as np
import pytest

from ehmec.config import Settings
from ehmec.core.dual_solver import (
    DualState,
    SolveOptions,
    StepRule,
    UserSolver,
    dual_function,
    dual_gradient,
    feasibility_repair,
    primal_from_dual,
    respond,
    solve,
)
from ehmec.core.model import Allocation, Instance, Modes, UserProblem, causality_slack, weighted_rate
from ehmec.core.oracle import kkt_residual
from ehmec.errors import ConfigError, InvalidDualError, ShapeMismatchError
from ehmec.experiments.generation import GenParams, generate_instance


def _reference_tail_sums(instance, options):
    """Decreasing prices around each user's uniform spending price."""
    rows = []
    for user in instance.users():
        uniform = UserSolver(user, options, 1.0).price_for_energy(user.total_energy, user.gain)
        rows.append(uniform * np.linspace(2.0, 1.0, user.num_slots))
    return np.vstack(rows)


def test_local_response_reference_value():
    user = UserProblem(
        index=0,
        weight=1.0,
        capacitance=1e-28,
        cycles_per_bit=500.0,
        slot_seconds=0.01,
        bandwidth=2e6,
        noise_power=1e-9,
        gain=np.array([1e-7]),
        arrivals=np.array([1.0]),
    )
    resp = respond(user, np.array([1.0]), Modes.LOCAL)
    assert resp.local_bits[0] == pytest.approx(5.164e7, rel=1e-3)
    assert resp.offload_bits[0] == 0.0


def test_offload_response_is_zero_above_threshold_price(tiny_instance):
    user = tiny_instance.user(0)
    threshold = user.weight * user.bandwidth * user.gain[0] / (user.noise_power * math.log(2.0))
    resp = respond(user, np.array([threshold * 1.01, threshold * 0.5]), Modes.OFFLOAD)
    assert resp.offload_bits[0] == 0.0
    assert resp.offload_bits[1] > 0.0
    assert resp.value[0] == pytest.approx(0.0, abs=1e-9)


def test_infinite_price_gives_no_allocation(tiny_instance):
    resp = respond(tiny_instance.user(0), np.array([math.inf, math.inf]))
    np.testing.assert_array_equal(resp.local_bits, 0.0)
    np.testing.assert_array_equal(resp.offload_bits, 0.0)
    np.testing.assert_array_equal(resp.energy, 0.0)
    np.testing.assert_array_equal(resp.value, 0.0)


def test_dual_state_round_trip():
    state = DualState.from_multipliers([[1.0, 2.0, 3.0]])
    np.testing.assert_allclose(state.tail_sums, [[6.0, 5.0, 3.0]])
    again = DualState.from_tail_sums(state.tail_sums)
    np.testing.assert_allclose(again.multipliers, state.multipliers)


def test_dual_state_rejects_bad_points():
    with pytest.raises(InvalidDualError):
        DualState.from_multipliers([[1.0, -1.0]])
    with pytest.raises(InvalidDualError):
        DualState.from_multipliers([[np.nan, 1.0]])
    with pytest.raises(InvalidDualError):
        DualState.from_tail_sums([[1.0, 2.0]])
    with pytest.raises(ShapeMismatchError):
        DualState.from_multipliers([1.0, 2.0])


def test_infinite_prices_serialize_as_null():
    state = DualState.from_tail_sums([[math.inf, 2.0]])
    data = state.to_dict()
    assert data["tail_sums"] == [[None, 2.0]]
    assert data["multipliers"] == [[None, 2.0]]


def test_zero_tail_sum_is_rejected(tiny_instance):
    dual = DualState.from_multipliers([[1.0, 0.0]])
    with pytest.raises(InvalidDualError):
        primal_from_dual(tiny_instance, dual)
    with pytest.raises(InvalidDualError):
        dual_function(tiny_instance, dual)


def test_dual_shape_must_match(tiny_instance):
    dual = DualState.from_multipliers([[1.0, 1.0, 1.0]])
    with pytest.raises(ShapeMismatchError):
        dual_gradient(tiny_instance, dual)


def test_gradient_matches_finite_differences(random_instance, options):
    tail = _reference_tail_sums(random_instance, options)
    dual = DualState.from_tail_sums(tail)
    grad = dual_gradient(random_instance, dual)
    mu = dual.multipliers
    totals = random_instance.available_energy()[:, -1]
    for k in range(mu.shape[0]):
        for n in range(mu.shape[1]):
            h = 1e-5 * tail[k, 0]
            up, down = mu.copy(), mu.copy()
            up[k, n] += h
            down[k, n] -= h
            slope = (
                dual_function(random_instance, DualState.from_multipliers(up))
                - dual_function(random_instance, DualState.from_multipliers(down))
            ) / (2.0 * h)
            assert slope == pytest.approx(grad[k, n], rel=1e-4, abs=1e-6 * totals[k])


def test_weak_duality(random_instance, options):
    report = solve(random_instance, options)
    rng = np.random.default_rng(3)
    base = _reference_tail_sums(random_instance, options)
    for _ in range(5):
        factors = np.sort(rng.uniform(0.2, 5.0, size=base.shape), axis=1)[:, ::-1]
        dual = DualState.from_tail_sums(base * factors)
        assert dual_function(random_instance, dual) >= report.primal_value * (1.0 - 1e-12)


def test_solution_is_feasible_and_tight(random_instance, options):
    report = solve(random_instance, options)
    assert report.feasibility.feasible
    assert causality_slack(random_instance, report.allocation).feasible
    assert report.polished
    assert report.relative_gap == pytest.approx(0.0, abs=1e-6)
    assert report.primal_value == pytest.approx(weighted_rate(report.allocation, random_instance.config.weights))


def test_prices_are_non_increasing_and_pool_ends_are_active(random_instance, options):
    report = solve(random_instance, options)
    tail = report.dual.tail_sums
    assert np.all(tail[:, :-1] >= tail[:, 1:])
    slack = report.feasibility.slack
    totals = random_instance.available_energy()[:, -1:]
    drops = np.append(tail[:, :-1] > tail[:, 1:] * (1.0 + 1e-9), np.ones((tail.shape[0], 1), dtype=bool), axis=1)
    assert np.all(np.abs(slack[drops]) <= 1e-8 * np.broadcast_to(totals, slack.shape)[drops])


def test_users_are_solved_independently(random_instance, options):
    report = solve(random_instance, options)
    for k in range(random_instance.config.num_users):
        alone = solve(random_instance.select_users([k]), options)
        np.testing.assert_array_equal(alone.allocation.local_bits[0], report.allocation.local_bits[k])
        np.testing.assert_array_equal(alone.allocation.offload_bits[0], report.allocation.offload_bits[k])


def test_worker_threads_do_not_change_results(random_instance, options):
    serial = solve(random_instance, options)
    threaded = solve(random_instance, options.model_copy(update={"workers": 3}))
    np.testing.assert_array_equal(serial.allocation.local_bits, threaded.allocation.local_bits)
    np.testing.assert_array_equal(serial.allocation.offload_bits, threaded.allocation.offload_bits)
    assert serial.dual_value == threaded.dual_value


def test_more_energy_never_lowers_the_objective(tiny_instance, options):
    richer = tiny_instance.model_copy(
        update={"config": tiny_instance.config.model_copy(update={"initial_energy": [0.6]})}
    )
    assert solve(richer, options).primal_value > solve(tiny_instance, options).primal_value


def test_tiny_instance_spends_what_arrives(tiny_instance, options):
    report = solve(tiny_instance, options)
    assert report.converged
    spent = report.allocation.slot_energy(tiny_instance)
    np.testing.assert_allclose(spent, [[0.3, 0.5]], rtol=1e-6)
    assert np.all(report.allocation.local_bits > 0)
    assert np.all(report.allocation.offload_bits > 0)


def test_zero_energy_user_is_idle(zero_instance):
    report = solve(zero_instance)
    assert report.converged
    assert report.primal_value == 0.0
    assert report.dual_value == 0.0
    assert report.user_iterations == [0]
    assert math.isinf(report.dual.tail_sums[0, 0])


def test_iteration_budget_of_one_does_not_converge(tiny_instance):
    report = solve(tiny_instance, SolveOptions(max_iters=1))
    assert not report.converged
    assert report.iterations == 1
    assert report.feasibility.feasible


@pytest.mark.parametrize("rule", [StepRule.CONSTANT, StepRule.POLYAK])
def test_step_rules_reach_the_same_optimum(random_instance, options, rule):
    reference = solve(random_instance, options)
    other = solve(random_instance, options.model_copy(update={"step_rule": rule, "eta0": 0.1}))
    assert other.primal_value == pytest.approx(reference.primal_value, rel=1e-9)


def test_without_polish_result_is_still_feasible(random_instance, options):
    report = solve(random_instance, options.model_copy(update={"polish": False}))
    assert not report.polished
    assert report.feasibility.feasible
    assert report.dual_value >= report.primal_value


def test_primal_from_dual_is_the_lagrangian_maximizer(tiny_instance, options):
    tail = _reference_tail_sums(tiny_instance, options)
    dual = DualState.from_tail_sums(tail)
    allocation = primal_from_dual(tiny_instance, dual)
    spent = np.cumsum(allocation.slot_energy(tiny_instance), axis=1)
    lagrangian = weighted_rate(allocation, [1.0]) - float(
        np.sum(dual.multipliers * (spent - tiny_instance.available_energy()))
    )
    assert lagrangian == pytest.approx(dual_function(tiny_instance, dual), rel=1e-12)
    for factor in (0.9, 1.1):
        other = Allocation(allocation.local_bits * factor, allocation.offload_bits)
        spent = np.cumsum(other.slot_energy(tiny_instance), axis=1)
        value = weighted_rate(other, [1.0]) - float(np.sum(dual.multipliers * (spent - tiny_instance.available_energy())))
        assert value < lagrangian


def test_feasibility_repair(tiny_instance, options):
    report = solve(tiny_instance, options)
    same = feasibility_repair(tiny_instance, report.allocation)
    np.testing.assert_array_equal(same.local_bits, report.allocation.local_bits)

    inflated = Allocation(report.allocation.local_bits * 1.5, report.allocation.offload_bits * 1.5)
    repaired = feasibility_repair(tiny_instance, inflated)
    assert causality_slack(tiny_instance, repaired).feasible
    ratio = repaired.local_bits / inflated.local_bits
    np.testing.assert_allclose(repaired.offload_bits / inflated.offload_bits, ratio, rtol=1e-12)
    assert np.all(ratio < 1.0)


def test_options_from_settings():
    options = SolveOptions.from_settings(Settings(max_iters=123), eps=1e-4, step_rule=None)
    assert options.max_iters == 123
    assert options.eps == 1e-4
    assert options.step_rule is StepRule.DIMINISHING
    with pytest.raises(ConfigError):
        SolveOptions.from_settings(Settings(), eps=-1.0)


def test_user_step_sizes_must_match_users(random_instance):
    with pytest.raises(ConfigError):
        solve(random_instance, SolveOptions(max_iters=10, user_eta0=[1.0]))


def test_report_serialization(tiny_instance, options):
    report = solve(tiny_instance, options)
    data = report.to_dict()
    assert "dual_trace" not in data
    assert data["converged"] is True
    assert data["objective"] == report.primal_value
    assert len(report.to_dict(verbose=True)["dual_trace"]) == report.iterations


@pytest.mark.parametrize("seed", [1003, 3, 21])
def test_unpolished_solve_converges_only_with_a_small_gap(seed):
    instance = generate_instance(GenParams(seed=seed), num_users=4, num_slots=9, slot_seconds=0.02)
    report = solve(instance, SolveOptions(polish=False, max_iters=3000))
    assert not report.polished
    assert report.feasibility.feasible
    if report.converged:
        assert report.relative_gap <= 1e-3


def _small_instances(count):
    rng = np.random.default_rng(2024)
    for seed in range(count):
        k, n = int(rng.integers(1, 6)), int(rng.integers(2, 11))
        yield generate_instance(GenParams(seed=seed), num_users=k, num_slots=n, slot_seconds=0.02)


def test_converged_solves_are_certified():
    for instance in _small_instances(20):
        report = solve(instance, SolveOptions(max_iters=5000))
        assert np.all(report.dual_trace >= report.primal_value * (1.0 - 1e-9))
        assert report.feasibility.feasible
        if not report.converged:
            continue
        assert report.relative_gap <= 1e-3
        assert kkt_residual(instance, report.allocation, report.dual.multipliers) <= 1e-3
        spent = np.sum(report.allocation.slot_energy(instance), axis=1)
        totals = instance.available_energy()[:, -1]
        np.testing.assert_allclose(spent, totals, rtol=1e-6)


def test_constant_gains_give_non_decreasing_bits(options):
    for seed in range(50):
        drawn = generate_instance(GenParams(seed=seed), num_users=2, num_slots=6, slot_seconds=0.02)
        gain = np.repeat(drawn.channel_gain[:, :1], 6, axis=1)
        instance = Instance(config=drawn.config, channel_gain=gain, harvest=drawn.harvest)
        allocation = solve(instance, options).allocation
        for bits in (allocation.local_bits, allocation.offload_bits):
            assert np.all(bits[:, 1:] >= bits[:, :-1] * (1.0 - 1e-9)), seed


def test_feasibility_repair_scales_only_the_overspending_last_slot(tiny_instance, options):
    allocation = solve(tiny_instance, options).allocation
    factor = np.array([[1.0, 1.2]])
    inflated = Allocation(allocation.local_bits * factor, allocation.offload_bits * factor)
    repaired = feasibility_repair(tiny_instance, inflated)
    np.testing.assert_array_equal(repaired.local_bits[:, 0], inflated.local_bits[:, 0])
    np.testing.assert_array_equal(repaired.offload_bits[:, 0], inflated.offload_bits[:, 0])
    ratio = repaired.local_bits[0, 1] / inflated.local_bits[0, 1]
    assert ratio < 1.0
    assert repaired.offload_bits[0, 1] / inflated.offload_bits[0, 1] == pytest.approx(ratio, rel=1e-12)
    spent = np.cumsum(repaired.slot_energy(tiny_instance), axis=1)
    assert spent[0, -1] == pytest.approx(tiny_instance.available_energy()[0, -1], rel=1e-9)
