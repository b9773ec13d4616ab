import numpy as np
import pytest

from ehmec.core.baselines import (
    SCHEME_MODES,
    SchemeId,
    equal_energy,
    full_offload,
    local_only,
    run_scheme,
)
from ehmec.core.model import Modes, causality_slack
from ehmec.version import SUPPORTED_SCHEMES


def test_equal_energy_spends_each_arrival_in_its_slot(random_instance):
    allocation = equal_energy(random_instance)
    np.testing.assert_allclose(allocation.slot_energy(random_instance), random_instance.arrivals(), rtol=1e-10)
    assert causality_slack(random_instance, allocation, tol=1e-9).feasible


def test_equal_energy_splits_in_half(tiny_instance):
    allocation = equal_energy(tiny_instance)
    cfg = tiny_instance.config
    e_loc = cfg.capacitance[0] * cfg.cycles_per_bit[0] ** 3 * allocation.local_bits**3 / cfg.slot_seconds**2
    np.testing.assert_allclose(e_loc, [[0.15, 0.25]], rtol=1e-10)


def test_single_mode_schemes(random_instance, options):
    loc = local_only(random_instance, options)
    off = full_offload(random_instance, options)
    np.testing.assert_array_equal(loc.allocation.offload_bits, 0.0)
    np.testing.assert_array_equal(off.allocation.local_bits, 0.0)
    assert loc.feasibility.feasible and off.feasibility.feasible
    assert loc.primal_value > 0 and off.primal_value > 0


def test_proposed_dominates_every_benchmark(random_instance, options):
    outcomes = {scheme: run_scheme(random_instance, scheme, options) for scheme in SchemeId}
    best = outcomes[SchemeId.PROPOSED].objective
    for scheme, outcome in outcomes.items():
        assert best >= outcome.objective * (1.0 - 1e-9), scheme


def test_run_scheme_outcomes(tiny_instance, options):
    equal = run_scheme(tiny_instance, SchemeId.EQUAL_ENERGY, options)
    assert equal.converged
    assert equal.report is None
    assert set(equal.to_dict()) == {"objective", "allocation", "scheme", "converged"}

    proposed = run_scheme(tiny_instance, "proposed", options)
    assert proposed.scheme is SchemeId.PROPOSED
    assert proposed.report is not None
    data = proposed.to_dict()
    assert data["scheme"] == "proposed"
    assert data["objective"] == pytest.approx(proposed.objective)


def test_non_convergence_is_reported(tiny_instance, options, caplog):
    outcome = run_scheme(tiny_instance, SchemeId.LOCAL_ONLY, options.model_copy(update={"max_iters": 1}))
    assert not outcome.converged
    assert "did not converge" in caplog.text


def test_scheme_modes():
    assert SCHEME_MODES[SchemeId.PROPOSED] is Modes.BOTH
    assert SCHEME_MODES[SchemeId.LOCAL_ONLY] is Modes.LOCAL
    assert SCHEME_MODES[SchemeId.FULL_OFFLOAD] is Modes.OFFLOAD
    assert SchemeId.EQUAL_ENERGY not in SCHEME_MODES


def test_supported_schemes_match_scheme_ids():
    assert SUPPORTED_SCHEMES == [s.value for s in SchemeId]
