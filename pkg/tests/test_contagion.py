import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from icmi.contagion import (
    DiseaseParams,
    daily_infection_prob,
    daily_infection_prob_count_based,
    daily_infection_probs_by_node,
    encounter_prob,
    encounter_prob_array,
    gathering_effective_duration,
)
from icmi.errors import ConfigError

probs = st.floats(0.0, 1.0, allow_nan=False)
durations = st.floats(0.0, 1e5, allow_nan=False)


@pytest.fixture
def params():
    return DiseaseParams(d_min=60, d_max=3600, p_max=0.5, p_epsilon=0.001)


def test_encounter_prob_below_d_min(params):
    assert encounter_prob(30, params) == 0.001


def test_encounter_prob_linear_branch(params):
    assert encounter_prob(1800, params) == 0.5


def test_encounter_prob_saturates(params):
    assert encounter_prob(4000, params) == 1.0


def test_encounter_prob_boundaries(params):
    assert encounter_prob(60, params) == pytest.approx(60 / 3600)
    assert encounter_prob(3600, params) == 1.0


def test_array_matches_scalar(params):
    d = np.array([0, 30, 59.9, 60, 1800, 3600, 3600.1, 1e6])
    expected = [encounter_prob(x, params) for x in d]
    np.testing.assert_array_equal(encounter_prob_array(d, params), expected)


@pytest.mark.parametrize("duration, infectious, expected", [(600, 2, 1200), (600, 0, 0), (600, 1, 600)])
def test_gathering_effective_duration(duration, infectious, expected):
    assert gathering_effective_duration(duration, infectious) == expected


def test_gathering_negative_count():
    with pytest.raises(ValueError):
        gathering_effective_duration(10, -1)


@pytest.mark.parametrize(
    "encounters, p_max, expected",
    [([0.5, 0.5], 1.0, 0.75), ([], 0.3, 0.0), ([1.0], 0.5, 0.5)],
)
def test_daily_infection_prob(encounters, p_max, expected):
    assert daily_infection_prob(encounters, p_max) == pytest.approx(expected, abs=1e-15)


@pytest.mark.parametrize("count, p_max, expected", [(2, 0.5, 0.75), (0, 0.5, 0.0), (1, 0.5, 0.5)])
def test_count_based(count, p_max, expected):
    assert daily_infection_prob_count_based(count, p_max) == expected


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(p_max=1.5),
        dict(p_epsilon=-0.1),
        dict(d_min=10, d_max=5),
        dict(d_max=0),
        dict(mode="sideways"),
        dict(d_min=60, d_max=3600, p_epsilon=0.1),  # above d_min/d_max
    ],
)
def test_params_rejected(kwargs):
    with pytest.raises(ConfigError):
        DiseaseParams(**kwargs)


@settings(max_examples=200, deadline=None)
@given(d1=durations, d2=durations, eps=st.floats(0, 1), dmin=st.floats(0, 3600))
def test_encounter_prob_monotone_under_guard(d1, d2, eps, dmin):
    eps = min(eps, dmin / 3600)
    p = DiseaseParams(d_min=dmin, d_max=3600, p_epsilon=eps)
    lo, hi = sorted([d1, d2])
    assert encounter_prob(lo, p) <= encounter_prob(hi, p)


@settings(max_examples=200, deadline=None)
@given(ps=st.lists(probs, max_size=12), extra=probs, p_max=probs)
def test_daily_monotone_in_extension(ps, extra, p_max):
    base = daily_infection_prob(ps, p_max)
    assert daily_infection_prob(ps + [extra], p_max) >= base - 1e-15
    assert 0.0 <= base <= 1.0


@settings(max_examples=200, deadline=None)
@given(ps=st.lists(probs, min_size=1, max_size=8), j=st.integers(0, 7), bump=probs, p_max=probs)
def test_daily_monotone_in_element(ps, j, bump, p_max):
    j %= len(ps)
    raised = list(ps)
    raised[j] = max(ps[j], bump)
    assert daily_infection_prob(raised, p_max) >= daily_infection_prob(ps, p_max) - 1e-15


@settings(max_examples=100, deadline=None)
@given(ps=st.lists(probs, max_size=10))
def test_zero_p_max_never_infects(ps):
    assert daily_infection_prob(ps, 0.0) == 0.0


@settings(max_examples=100, deadline=None)
@given(ps=st.lists(probs, max_size=6), p_max=probs, seed=st.integers(0, 1000))
def test_order_independent(ps, p_max, seed):
    shuffled = list(np.random.default_rng(seed).permutation(ps)) if ps else []
    assert daily_infection_prob(shuffled, p_max) == pytest.approx(daily_infection_prob(ps, p_max), abs=1e-14)


@settings(max_examples=100, deadline=None)
@given(p=probs, p_max=probs)
def test_single_encounter_exact(p, p_max):
    assert daily_infection_prob([p], p_max) == pytest.approx(p * p_max, abs=1e-16)


@settings(max_examples=100, deadline=None)
@given(ds=st.lists(st.floats(3601, 1e5), max_size=10), p_max=probs)
def test_saturated_durations_reduce_to_count_based(ds, p_max):
    params = DiseaseParams(p_max=p_max)
    via_duration = daily_infection_prob([encounter_prob(d, params) for d in ds], p_max)
    assert via_duration == pytest.approx(daily_infection_prob_count_based(len(ds), p_max), abs=1e-14)


def test_grouped_kernel_equals_scalar_per_node():
    rng = np.random.default_rng(3)
    targets = rng.integers(0, 6, 40)
    p = rng.random(40)
    grouped = daily_infection_probs_by_node(targets, p, 0.7, 6)
    for node in range(6):
        assert grouped[node] == daily_infection_prob(p[targets == node], 0.7)


def test_count_based_matches_product_form():
    for n, pm in itertools.product(range(6), [0.0, 0.25, 0.5, 1.0]):
        assert daily_infection_prob_count_based(n, pm) == pytest.approx(
            daily_infection_prob([1.0] * n, pm), abs=1e-15)
