import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from idp_lab.base_systems import WindowSpec, moving_average_base
from idp_lab.ergodic_tests import (
    DECLARED_PROFILE,
    PROFILE_ORDER,
    Budget,
    BudgetError,
    _check_monotone,
    birkhoff_limits,
    birkhoff_slope,
    classify,
    decide,
    declared_profile,
    nonneg_ergodicity_test,
    pairwise_mixing_test,
    rigidity_revival,
    triple_deviation,
    triple_mixing_test,
    weak_mixing_test,
)
from idp_lab.process import TrajectoryBatch, canonical_four, leaf, sample_trajectory
from idp_lab.spectral import autocov_empirical

from conftest import bernoulli_spec, ii1_spec, tower_spec, walk_spec

SMALL = Budget(replicates=1000, length=41, threshold=0.5, K=20)


def iid_spec():
    return leaf(moving_average_base([1.0], {"atoms": [[1.0, 1.0], [2.0, 0.5]]}), 0.0, "Nonnegative")


def constant_batch(value=1.7, M=200, n=16):
    return TrajectoryBatch(np.full((M, n), value), iid_spec(), WindowSpec(n, 0.5), "Nonnegative", 0.0)


def test_constant_batch_has_zero_dispersion():
    res = birkhoff_limits(constant_batch())
    assert res.variance == pytest.approx(0.0, abs=1e-24) and res.std_error == 0
    assert np.all(res.means == 1.7)


def test_ii1_birkhoff_variance(rng):
    # X_i = 2 N with N ~ Poisson(1.5): the time average is 2 N, variance 4 * 1.5
    out = nonneg_ergodicity_test(ii1_spec(), 32, 20_000, 0.5, rng)
    assert out["mean_value"] == pytest.approx(3.0)
    assert abs(out["statistic"] - 6.0) <= 3 * out["std_error"]
    assert not out["pass"]


def test_bernoulli_birkhoff_passes(rng):
    out = nonneg_ergodicity_test(bernoulli_spec(), 64, 5000, 0.5, rng)
    assert out["pass"]
    with pytest.raises(ValueError):
        nonneg_ergodicity_test(leaf(moving_average_base([1.0], {"atoms": [[1.0, 1.0]]})), 8, 100, 0.5, rng)


def test_birkhoff_slope(rng):
    lengths = [2 ** 7, 2 ** 9, 2 ** 11]
    fast = birkhoff_slope(bernoulli_spec(), lengths, 1000, 0.5, rng)
    assert -1.15 <= fast["slope"] <= -0.85
    flat = birkhoff_slope(ii1_spec(), lengths, 1000, 0.5, rng)
    assert abs(flat["slope"]) <= 0.1


def test_triple_deviation_vanishes_for_iid(rng):
    batch = sample_trajectory(iid_spec(), 41, 0.5, 5000, rng)
    value, se = triple_deviation(batch, 1.0, 5, 5)
    assert abs(value) <= 4 * se
    assert triple_mixing_test(batch, 1.0)["pass"]
    with pytest.raises(BudgetError):
        triple_deviation(batch, 1.0, 30, 20)


def test_triple_test_fails_without_decay(rng):
    batch = sample_trajectory(ii1_spec(), 41, 0.5, 5000, rng)
    assert not triple_mixing_test(batch, 1.0)["pass"]
    assert not pairwise_mixing_test(batch, 1.0, 20)["pass"]
    assert not weak_mixing_test(autocov_empirical(batch, 1.0, 20))["pass"]


def test_rigidity_revival_on_tower(rng):
    batch = sample_trajectory(tower_spec(), 41, 0.5, 5000, rng)
    est = autocov_empirical(batch, 1.0, 30)
    assert rigidity_revival(est, (1, 10))["detected"]
    assert rigidity_revival(est, ())["detected"] is False
    iid = autocov_empirical(sample_trajectory(iid_spec(), 41, 0.5, 5000, rng), 1.0, 30)
    assert not rigidity_revival(iid, (1, 10))["detected"]


def _outcomes(atom, birk, cesaro, revival, pair, triple):
    return {"atom_at_zero": {"detected": atom}, "birkhoff_constant": {"pass": birk},
            "cesaro_decay": {"pass": cesaro}, "rigidity_revival": {"detected": revival},
            "pairwise_decay": {"pass": pair}, "triple_decay": {"pass": triple}}


def test_decision_table_rows():
    ok = dict(atom=False, birk=True, cesaro=True, revival=False, pair=True, triple=True)
    assert decide(_outcomes(**ok), True) == "bernoulli"
    assert decide(_outcomes(**ok), False) == "mixing_all_orders"
    assert decide(_outcomes(**{**ok, "triple": False}), True) == "mixing"
    assert decide(_outcomes(**{**ok, "pair": False}), True) == "weakly_mixing"
    assert decide(_outcomes(**{**ok, "revival": True}), True) == "weakly_mixing"
    for key, bad in (("atom", True), ("birk", False), ("cesaro", False)):
        assert decide(_outcomes(**{**ok, key: bad}), True) == "nonergodic"


@given(flags=st.tuples(*[st.booleans()] * 6), dissipative=st.booleans())
def test_decision_is_deterministic_and_monotone(flags, dissipative):
    outcomes = _outcomes(*flags)
    verdict = decide(outcomes, dissipative)
    assert verdict == decide(_outcomes(*flags), dissipative)
    if verdict != "nonergodic":
        _check_monotone(verdict, outcomes)
    # turning any passing check into a failure can only lower the verdict
    good = (False, True, True, False, True, True)
    for i, (flag, g) in enumerate(zip(flags, good)):
        if flag == g:
            worse = list(flags)
            worse[i] = not g
            assert PROFILE_ORDER.index(decide(_outcomes(*worse), dissipative)) <= PROFILE_ORDER.index(verdict)


def test_declared_profiles():
    assert declared_profile(bernoulli_spec()) == "bernoulli"
    assert declared_profile(walk_spec()) == "mixing_all_orders"
    assert declared_profile(tower_spec()) == "weakly_mixing"
    assert declared_profile(ii1_spec()) == "nonergodic"
    assert declared_profile(canonical_four(bernoulli_spec(), walk_spec())) == "mixing_all_orders"
    assert declared_profile(canonical_four(bernoulli_spec(), walk_spec(), tower_spec())) == "weakly_mixing"
    assert set(DECLARED_PROFILE.values()) <= set(PROFILE_ORDER)


@pytest.mark.parametrize("kwargs", [
    {"replicates": 50},
    {"length": 40},
    {"K": 10},
    {"length": 20, "schedule": ((5, 5),)},
])
def test_budget_errors(kwargs, rng):
    budget = Budget(**{**SMALL.__dict__, **kwargs})
    with pytest.raises(BudgetError):
        budget.check()
    with pytest.raises(BudgetError):
        classify(iid_spec(), budget, rng)


def test_classification_is_seed_stable():
    a = classify(bernoulli_spec(), SMALL, np.random.default_rng(11))
    b = classify(bernoulli_spec(), SMALL, np.random.default_rng(11))
    assert a.to_json() == b.to_json()
    assert a.inferred == "bernoulli" and a.matches


def test_report_rendering():
    report = classify(ii1_spec(), SMALL, np.random.default_rng(3))
    assert report.inferred == "nonergodic" and report.matches
    doc = report.as_dict()
    assert set(doc["outcomes"]) == {"birkhoff_constant", "atom_at_zero", "cesaro_decay", "pairwise_decay",
                                    "triple_decay", "rigidity_revival"}
    assert doc["declared"] == "nonergodic" and doc["match"]
    assert doc["outcomes"]["atom_at_zero"]["status"] == "atom detected"
    text = report.to_text()
    assert "nonergodic" in text


def test_false_alarm_rate_on_iid_process():
    seeds = np.random.SeedSequence(2024).spawn(100)
    alarms = sum(classify(iid_spec(), SMALL, np.random.default_rng(s)).inferred != "bernoulli" for s in seeds)
    assert alarms <= 5


def test_profile_order_is_total():
    for a, b in itertools.combinations(PROFILE_ORDER, 2):
        assert PROFILE_ORDER.index(a) < PROFILE_ORDER.index(b)
