import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dps4s.aggregation_table import (
    AggregationUnitTable,
    VectorWorkload,
    remove_user_workload,
    tau_star,
)
from dps4s.errors import InstanceTooLarge
from dps4s.solvers import lp_oracle, qcqp_oracle, solve_truncation_lp, solve_truncation_qcqp
from conftest import random_table, random_workload, tables
from oracles import exact_lp_small


def _check_lp_feasible(table, sol, tol=1e-6):
    assert np.all(sol.x >= -tol) and np.all(sol.x <= table.weights + tol)
    loads = np.bincount(table.users, weights=sol.x[table.unit_of_entry], minlength=table.user_universe_size)
    assert np.all(loads <= sol.tau + tol)
    assert sol.objective == pytest.approx(sol.x.sum(), abs=1e-9)


@pytest.mark.parametrize("tau,expected", [(0, 0.0), (1, 2.0), (2, 4.0), (3, 5.0), (4, 5.0), (100, 5.0)])
def test_lp_demo(demo_table, tau, expected):
    sol = solve_truncation_lp(demo_table, tau)
    assert sol.objective == pytest.approx(expected, abs=1e-6)
    _check_lp_feasible(demo_table, sol)
    assert float(lp_oracle(demo_table, tau)) == pytest.approx(expected, abs=1e-12)


def test_lp_matches_oracles_on_random_instances():
    rng = np.random.default_rng(31)
    for _ in range(50):
        t = random_table(rng, int(rng.integers(1, 13)), int(rng.integers(1, 9)), 3)
        tau = float(rng.choice([0.5, 1.0, 1.5, 2.0, 3.0]))
        sol = solve_truncation_lp(t, tau)
        _check_lp_feasible(t, sol)
        assert abs(sol.objective - float(lp_oracle(t, tau))) <= 1e-6


def test_exact_oracle_agrees_with_vertex_enumeration():
    rng = np.random.default_rng(2)
    for _ in range(15):
        t = random_table(rng, int(rng.integers(1, 5)), 4, 2)
        tau = float(rng.choice([0.3, 1.0, 1.7]))
        assert float(lp_oracle(t, tau)) == pytest.approx(exact_lp_small(t, tau), abs=1e-9)


def test_oracle_size_limit():
    t = AggregationUnitTable.from_lists(np.ones(13), [[i % 3] for i in range(13)], 3, 13, 1)
    with pytest.raises(InstanceTooLarge):
        lp_oracle(t, 1.0)


def test_lp_untruncated_when_tau_large():
    rng = np.random.default_rng(9)
    t = random_table(rng, 40, 10, 3)
    sol = solve_truncation_lp(t, tau_star(t))
    assert sol.objective == pytest.approx(t.total_weight(), abs=1e-9)


@given(tables(), st.floats(0.0, 5.0), st.floats(0.0, 5.0))
def test_lp_monotone_in_tau(table, a, b):
    lo, hi = sorted((a, b))
    assert solve_truncation_lp(table, lo).objective <= solve_truncation_lp(table, hi).objective + 1e-6


@given(tables(max_units=10, max_users=6), st.data())
def test_lp_neighbour_sensitivity(table, data):
    m = table.user_universe_size
    tau = data.draw(st.floats(0.1, 4.0))
    k = data.draw(st.integers(1, 6))
    new_units = []
    for _ in range(k):
        others = data.draw(st.sets(st.integers(0, m - 1), max_size=min(2, m)))
        new_units.append(sorted(others | {m}))
    w = data.draw(st.lists(st.floats(0.0, 1.0), min_size=k, max_size=k))
    contributors = [list(table.contributors(i)) for i in range(table.n)] + new_units
    weights = list(table.weights) + w
    bigger = AggregationUnitTable.from_lists(weights, contributors, m + 1, 100, 3)
    smaller = AggregationUnitTable.from_lists(table.weights, contributors[: table.n], m + 1, 100, 3)
    gap = abs(solve_truncation_lp(bigger, tau).objective - solve_truncation_lp(smaller, tau).objective)
    assert gap <= min(tau, k) + 1e-6


def _check_qcqp_feasible(workload, sol, tol=1e-5):
    assert np.all(sol.y >= -tol) and np.all(sol.y <= 1 + tol)
    m = workload.user_universe_size
    sq = np.zeros(m)
    for comp, z in zip(workload.components, sol.z):
        assert np.all(z >= -tol) and np.all(z <= 1 + tol)
        if comp.n:
            deficit = np.add.reduceat(1 - sol.y[comp.users], comp.ptr[:-1])
            assert np.all(deficit <= 1 - z + tol)
            s = np.bincount(comp.users, weights=(comp.weights * z)[comp.unit_of_entry], minlength=m)
            sq += s * s
    assert np.all(np.sqrt(sq) <= sol.tau * (1 + tol) + tol)


def _one_component(weights, contributors, m):
    return VectorWorkload((AggregationUnitTable.from_lists(weights, contributors, m, 100, 2),))


def test_qcqp_single_user_closed_form():
    for total, tau in [(2.5, 1.0), (4.0, 3.0), (1.0, 0.25)]:
        k = 4
        wl = _one_component([total / k] * k, [[0]] * k, 1)
        sol = solve_truncation_qcqp(wl, tau)
        assert sol.E == pytest.approx(max(0.0, 1 - tau / total), abs=1e-4)
        assert sol.y[0] == pytest.approx(tau / total, abs=1e-4)
        assert qcqp_oracle(wl, tau) == pytest.approx(min(1.0, tau / total), abs=1e-2)
        _check_qcqp_feasible(wl, sol)


def test_qcqp_untruncated():
    wl = _one_component([1.0, 1.0], [[0, 1], [1]], 2)
    sol = solve_truncation_qcqp(wl, 10.0)
    assert sol.E == 0.0 and np.all(sol.y == 1) and all(np.all(z == 1) for z in sol.z)
    assert qcqp_oracle(wl, 10.0) == pytest.approx(2.0, abs=1e-9)


def test_qcqp_two_user_case():
    wl = _one_component([1.0, 1.0], [[0, 1], [0]], 2)
    sol = solve_truncation_qcqp(wl, 1.0)
    assert sol.objective == pytest.approx(1.5, abs=1e-4)
    assert sol.E == pytest.approx(0.5, abs=1e-4)
    assert sol.y == pytest.approx([0.5, 1.0], abs=1e-4)
    assert qcqp_oracle(wl, 1.0) == pytest.approx(1.5, abs=1e-2)


def test_qcqp_matches_grid_oracle():
    rng = np.random.default_rng(17)
    for _ in range(12):
        d = int(rng.integers(1, 3))
        wl = random_workload(rng, d, int(rng.integers(1, 4 // d + 1)), 3, 2)
        tau = float(rng.choice([0.5, 1.0, 2.0]))
        sol = solve_truncation_qcqp(wl, tau)
        _check_qcqp_feasible(wl, sol)
        assert sol.objective == pytest.approx(qcqp_oracle(wl, tau), abs=1e-2)


def test_qcqp_neighbours():
    rng = np.random.default_rng(23)
    checked = 0
    while checked < 50:
        wl = random_workload(rng, int(rng.integers(1, 4)), int(rng.integers(2, 10)), int(rng.integers(2, 6)), 2)
        tau = float(rng.choice([0.5, 1.0, 2.0, 4.0]))
        sol = solve_truncation_qcqp(wl, tau)
        for u in range(wl.user_universe_size):
            nb = solve_truncation_qcqp(remove_user_workload(wl, u), tau)
            assert abs(sol.E - nb.E) <= 1 + 1e-3
            for a, b in ((sol, nb), (nb, sol)):
                assert np.linalg.norm(a.truncated - b.truncated) <= 2 * tau * (a.E + 1) + 1e-3
            checked += 1
