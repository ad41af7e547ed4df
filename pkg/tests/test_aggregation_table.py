import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dps4s.aggregation_table import (
    AggregationUnit,
    AggregationUnitTable,
    VectorWorkload,
    contribution_norms,
    explore,
    poisson_sample,
    remove_user,
    tau_star,
    validate_table,
)
from dps4s.errors import DeltaViolated, InvalidParams, QOutOfRange, UnknownUser, WeightOutOfRange
from dps4s.rng import RngStream
from conftest import random_table, tables
from oracles import per_user_counts


def test_demo_table_accepted(demo_table):
    assert demo_table.n == 5
    assert demo_table.user_universe_size == 7
    assert validate_table(demo_table) is demo_table
    assert tau_star(demo_table) == 3


def test_empty_table():
    t = AggregationUnitTable.empty(4, 2, 2)
    validate_table(t)
    assert tau_star(t) == 0
    assert t.total_weight() == 0.0


def test_delta_violation():
    t = AggregationUnitTable.from_lists([1.0] * 5, [[0]] * 5, 1, 4, 1)
    with pytest.raises(DeltaViolated) as err:
        validate_table(t)
    assert err.value.user == 0 and err.value.count == 5


@pytest.mark.parametrize(
    "weights,contributors,exc",
    [
        ([1.5], [[0]], WeightOutOfRange),
        ([-0.1], [[0]], WeightOutOfRange),
        ([0.5], [[7]], UnknownUser),
        ([0.5], [[]], InvalidParams),
        ([0.5], [[0, 0]], InvalidParams),
        ([0.5], [[0, 1, 2]], InvalidParams),
    ],
)
def test_validation_errors(weights, contributors, exc):
    t = AggregationUnitTable.from_lists(weights, contributors, 3, 4, 2)
    with pytest.raises(exc):
        validate_table(t)


def test_from_units_round_trip():
    units = [AggregationUnit(10, 0.5, (0, 1)), AggregationUnit(11, 1.0, (2,))]
    t = AggregationUnitTable.from_units(units, 3, 2, 2)
    assert t.units == units
    assert t.total_weight() == 1.5


def test_sampling_extremes(demo_table):
    rng = RngStream(3)
    assert poisson_sample(demo_table, 0.0, rng).n == 0
    full = poisson_sample(demo_table, 1.0, rng)
    assert full.n == demo_table.n
    assert np.array_equal(full.weights, demo_table.weights)
    assert np.array_equal(full.users, demo_table.users)
    with pytest.raises(QOutOfRange):
        poisson_sample(demo_table, 1.2, rng)


def test_sampling_concentration():
    t = AggregationUnitTable.from_lists(np.ones(1000), [[i % 50] for i in range(1000)], 50, 20, 1)
    inside = 0
    for seed in range(1000):
        size = poisson_sample(t, 0.5, RngStream(seed)).n
        inside += abs(size - 500) <= 3 * np.sqrt(1000 * 0.25)
    assert inside >= 990


def test_tau_star_matches_counting_oracle():
    rng = np.random.default_rng(8)
    for _ in range(20):
        t = random_table(rng, int(rng.integers(0, 11)), 6, 3)
        counts = per_user_counts(t)
        assert tau_star(t) == (max(counts.values()) if counts else 0)


def test_contribution_norms():
    comp1 = AggregationUnitTable.from_lists([1.0, 1.0, 1.0], [[0], [0], [0]], 1, 4, 1)
    comp2 = AggregationUnitTable.from_lists([1.0] * 4, [[0]] * 4, 1, 4, 1)
    _, norms = contribution_norms(VectorWorkload((comp1, comp2)))
    assert norms[0] == pytest.approx(5.0)
    empty = VectorWorkload((AggregationUnitTable.empty(3),))
    assert np.all(contribution_norms(empty)[1] == 0)


def test_contribution_norms_direct_sum():
    rng = np.random.default_rng(1)
    for _ in range(10):
        comps = [random_table(rng, 6, 4, 2) for _ in range(3)]
        wl = VectorWorkload(tuple(comps))
        x, norms = contribution_norms(wl)
        ref = np.zeros((4, 3))
        for f, c in enumerate(comps):
            for i in range(c.n):
                for u in c.contributors(i):
                    ref[u, f] += c.weights[i]
        assert np.allclose(x, ref, atol=1e-15)
        assert np.allclose(norms, np.linalg.norm(ref, axis=1), atol=1e-15)


def test_remove_user_demo(demo_table):
    # vertex C is 2 in the demo graph
    left = remove_user(demo_table, 2)
    assert left.n == 2
    assert sorted(tuple(left.contributors(i)) for i in range(left.n)) == [(3, 4, 5), (4, 5, 6)]
    with pytest.raises(UnknownUser):
        remove_user(demo_table, 7)


def test_remove_idle_user_is_identity():
    t = AggregationUnitTable.from_lists([1.0], [[0]], 3, 1, 1)
    assert remove_user(t, 2) is t


def test_removing_every_user_covers_all_units(demo_table):
    covered = set()
    for u in range(demo_table.user_universe_size):
        kept = remove_user(demo_table, u)
        kept_ids = {int(x) for x in kept.unit_ids}
        covered |= set(int(x) for x in demo_table.unit_ids) - kept_ids
    assert covered == {int(x) for x in demo_table.unit_ids}


def test_explore_keeps_units_led_by_sampled_users(demo_table):
    kept = explore(demo_table, np.array([1]))
    assert [tuple(kept.contributors(i)) for i in range(kept.n)] == [(1, 2, 3)]


@given(tables(), st.floats(0.0, 1.0), st.integers(0, 2**32))
def test_sampling_never_raises_tau_star(table, q, seed):
    s = poisson_sample(table, q, RngStream(seed))
    assert tau_star(s) <= tau_star(table)
    assert tau_star(table) <= table.tuple_bound


@given(tables(), st.data())
def test_remove_user_never_raises_other_counts(table, data):
    u = data.draw(st.integers(0, table.user_universe_size - 1))
    before = table.user_counts()
    after = remove_user(table, u).user_counts()
    assert after[u] == 0
    assert np.all(after <= before)
