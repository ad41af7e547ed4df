from __future__ import annotations

import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from dps4s.aggregation_table import AggregationUnitTable, VectorWorkload
from dps4s.workloads import demo_graph, enumerate_graphlets

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@pytest.fixture
def demo_table():
    return enumerate_graphlets(demo_graph(), "triangle", tuple_bound=3)


def random_table(rng, n_units, m, l, delta=None, weights="uniform") -> AggregationUnitTable:
    contributors = []
    for _ in range(n_units):
        k = int(rng.integers(1, min(l, m) + 1))
        contributors.append(sorted(rng.choice(m, size=k, replace=False).tolist()))
    if weights == "uniform":
        w = rng.uniform(0.0, 1.0, size=n_units)
    else:
        w = np.ones(n_units)
    table = AggregationUnitTable.from_lists(w, contributors, m, 1, l)
    counts = table.user_counts()
    bound = int(counts.max()) if counts.size and counts.max() > 0 else 1
    return table.replace_meta(tuple_bound=max(bound, delta or 1))


def random_workload(rng, d, n_units, m, l) -> VectorWorkload:
    comps = [random_table(rng, n_units, m, l) for _ in range(d)]
    bound = max(c.tuple_bound for c in comps)
    return VectorWorkload(tuple(c.replace_meta(tuple_bound=bound) for c in comps))


@st.composite
def tables(draw, max_units=12, max_users=8, max_l=3):
    m = draw(st.integers(1, max_users))
    l = draw(st.integers(1, max_l))
    n = draw(st.integers(0, max_units))
    contributors = []
    for _ in range(n):
        size = draw(st.integers(1, min(l, m)))
        contributors.append(sorted(draw(st.sets(st.integers(0, m - 1), min_size=size, max_size=size))))
    w = draw(st.lists(st.floats(0.0, 1.0), min_size=n, max_size=n))
    table = AggregationUnitTable.from_lists(w, contributors, m, 1, l)
    counts = table.user_counts()
    bound = int(counts.max()) if counts.size and counts.max() > 0 else 1
    return table.replace_meta(tuple_bound=max(1, bound))


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    if module is not None and module.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in module.RESULTS:
            terminalreporter.write_line(line)
