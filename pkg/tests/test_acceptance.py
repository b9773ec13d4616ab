"""End-to-end checks on small versions of the bundled sweeps."""

from pathlib import Path

import numpy as np
import pytest

from ehmec import RateMaximizer, Settings
from ehmec.core.baselines import SchemeId
from ehmec.core.dual_solver import SolveOptions, solve
from ehmec.core.oracle import OracleMethod, compare, grid_search
from ehmec.experiments import GenParams, SweepSpec, generate_instance, load_sweep_config, run_sweep

CONFIGS = Path(__file__).parent.parent / "configs"
SOLVER = {"max_iters": 2000}

pytestmark = pytest.mark.slow


def _sweep(parameter, values, **fields):
    spec = SweepSpec(parameter=parameter, values=values, trials=3, solver=SOLVER, **fields)
    return run_sweep(spec, GenParams(seed=2024))


def _assert_proposed_dominates(result):
    proposed = result.objectives[:, result.schemes.index(SchemeId.PROPOSED), :]
    assert np.all(proposed[:, None, :] >= result.objectives * (1.0 - 1e-9))


@pytest.mark.parametrize("name", ["fig2", "fig3", "fig4", "fig4_k50"])
def test_bundled_configs_load(name):
    config = load_sweep_config(CONFIGS / f"{name}.json")
    assert set(config.sweep.schemes) == set(SchemeId)
    assert config.generator.seed == 2024


@pytest.mark.parametrize(
    "name, parameter, values",
    [
        ("fig2", "N", [5, 10, 15, 20, 25, 30]),
        ("fig3", "tau", [0.01, 0.02, 0.03, 0.04, 0.05, 0.06, 0.07, 0.08, 0.09, 0.1]),
        ("fig4", "K", [2, 4, 6, 8, 10]),
    ],
)
def test_bundled_configs_use_desk_scale_grids(name, parameter, values):
    sweep = load_sweep_config(CONFIGS / f"{name}.json").sweep
    assert sweep.parameter.value == parameter
    assert sweep.values == pytest.approx(values)
    assert sweep.trials == 50
    assert max(sweep.point(v, 0.2)[0] for v in sweep.values) <= 10


def test_slot_count_sweep():
    result = _sweep("N", [4, 12], num_users=5, slot_seconds=0.02)
    _assert_proposed_dominates(result)
    for scheme in SchemeId:
        mean = result.mean_of(scheme)
        assert mean[1] > mean[0], scheme
    equal = result.mean_of(SchemeId.EQUAL_ENERGY)
    assert np.all(equal > result.mean_of(SchemeId.FULL_OFFLOAD))
    assert np.all(equal > result.mean_of(SchemeId.LOCAL_ONLY))
    assert result.mean_of(SchemeId.LOCAL_ONLY)[-1] > result.mean_of(SchemeId.FULL_OFFLOAD)[-1]


def test_slot_length_sweep():
    result = _sweep("tau", [0.02, 0.1], num_users=5, num_slots=8)
    _assert_proposed_dominates(result)
    for scheme in SchemeId:
        mean = result.mean_of(scheme)
        assert mean[1] > mean[0], scheme
    # reported, not asserted: depends on the channel and CPU constants
    crossover = result.crossover(SchemeId.FULL_OFFLOAD, SchemeId.LOCAL_ONLY)
    assert crossover is None or crossover in result.values


def test_user_count_sweep():
    result = _sweep("K", [2, 8], num_slots=8, slot_seconds=0.02)
    _assert_proposed_dominates(result)
    proposed = result.mean_of(SchemeId.PROPOSED)
    assert proposed[1] > proposed[0]


def test_validation_on_small_random_instances():
    maximizer = RateMaximizer(Settings(max_iters=5000))
    for seed in range(3):
        instance = maximizer.generate(2, 4, 0.02, GenParams(seed=seed))
        outcome, check = maximizer.validate(instance, method=OracleMethod.PROJECTED_GRADIENT, tol=1e-3)
        assert outcome.report is not None
        assert check.agreement <= 1e-3
        assert check.kkt <= 1e-3
        assert check.gap <= 1e-3


def test_compare_on_generated_instance():
    maximizer = RateMaximizer(Settings(max_iters=5000))
    instance = maximizer.generate(3, 5, 0.02, GenParams(seed=12))
    outcomes = maximizer.compare(instance)
    best = outcomes[SchemeId.PROPOSED].objective
    assert all(best >= o.objective * (1.0 - 1e-9) for o in outcomes.values())
    assert outcomes[SchemeId.PROPOSED].allocation.shape == (3, 5)


@pytest.mark.parametrize("seed", range(1, 21))
def test_grid_search_agrees_on_single_user_two_slot_instances(seed):
    instance = generate_instance(GenParams(seed=seed), num_users=1, num_slots=2, slot_seconds=0.02)
    report = solve(instance, SolveOptions(max_iters=5000))
    assert compare(report.primal_value, grid_search(instance)) <= 5e-3
