"""Aggregation units, tables of them, and per-user contribution statistics.

A table is stored column-wise: one weight per unit plus a CSR layout of the
contributor lists (``ptr`` / ``users``). Tables are treated as immutable once
built; every operation returns a new table.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import DeltaViolated, InvalidParams, QOutOfRange, UnknownUser, WeightOutOfRange
from .rng import RngStream


@dataclass(frozen=True)
class AggregationUnit:
    unit_id: int
    weight: float
    contributors: tuple[int, ...]
    group_index: int | None = None


@dataclass(frozen=True, eq=False)
class AggregationUnitTable:
    """Join tuples with normalised weights and contributor sets.

    ``weights`` are already divided by ``weight_scale``; reported estimates are
    multiplied back by it.
    """

    weights: np.ndarray
    ptr: np.ndarray
    users: np.ndarray
    user_universe_size: int
    tuple_bound: int
    users_per_tuple: int
    weight_scale: float = 1.0
    unit_ids: np.ndarray | None = None
    groups: np.ndarray | None = None
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "weights", np.asarray(self.weights, dtype=np.float64))
        object.__setattr__(self, "ptr", np.asarray(self.ptr, dtype=np.int64))
        object.__setattr__(self, "users", np.asarray(self.users, dtype=np.int64))
        if self.unit_ids is None:
            object.__setattr__(self, "unit_ids", np.arange(self.weights.size, dtype=np.int64))
        else:
            object.__setattr__(self, "unit_ids", np.asarray(self.unit_ids, dtype=np.int64))
        if self.groups is not None:
            object.__setattr__(self, "groups", np.asarray(self.groups, dtype=np.int64))
        if self.ptr.size != self.weights.size + 1:
            raise InvalidParams("ptr must have one more entry than weights")
        if self.user_universe_size < 1 or self.tuple_bound < 1 or self.users_per_tuple < 1:
            raise InvalidParams("m, tuple bound and users per tuple must be >= 1")
        if not self.weight_scale > 0:
            raise InvalidParams("weight scale must be positive")
        for arr in (self.weights, self.ptr, self.users, self.unit_ids):
            arr.flags.writeable = False

    # construction

    @classmethod
    def from_units(
        cls,
        units: Iterable[AggregationUnit],
        user_universe_size: int,
        tuple_bound: int,
        users_per_tuple: int,
        weight_scale: float = 1.0,
    ) -> AggregationUnitTable:
        units = list(units)
        weights = [u.weight for u in units]
        contributors = [u.contributors for u in units]
        groups = None
        if any(u.group_index is not None for u in units):
            groups = [-1 if u.group_index is None else u.group_index for u in units]
        return cls.from_lists(
            weights,
            contributors,
            user_universe_size,
            tuple_bound,
            users_per_tuple,
            weight_scale,
            unit_ids=[u.unit_id for u in units],
            groups=groups,
        )

    @classmethod
    def from_lists(
        cls,
        weights: Sequence[float],
        contributors: Sequence[Sequence[int]],
        user_universe_size: int,
        tuple_bound: int,
        users_per_tuple: int,
        weight_scale: float = 1.0,
        unit_ids=None,
        groups=None,
    ) -> AggregationUnitTable:
        lengths = np.fromiter((len(c) for c in contributors), dtype=np.int64, count=len(contributors))
        ptr = np.zeros(len(contributors) + 1, dtype=np.int64)
        np.cumsum(lengths, out=ptr[1:])
        flat = np.fromiter(
            (int(u) for c in contributors for u in c), dtype=np.int64, count=int(ptr[-1])
        )
        return cls(
            np.asarray(weights, dtype=np.float64),
            ptr,
            flat,
            int(user_universe_size),
            int(tuple_bound),
            int(users_per_tuple),
            float(weight_scale),
            unit_ids=unit_ids,
            groups=groups,
        )

    @classmethod
    def empty(cls, user_universe_size=1, tuple_bound=1, users_per_tuple=1, weight_scale=1.0):
        return cls(np.zeros(0), np.zeros(1, dtype=np.int64), np.zeros(0, dtype=np.int64),
                   user_universe_size, tuple_bound, users_per_tuple, weight_scale)

    # views

    @property
    def n(self) -> int:
        return int(self.weights.size)

    def __len__(self) -> int:
        return self.n

    def contributors(self, i: int) -> np.ndarray:
        return self.users[self.ptr[i]: self.ptr[i + 1]]

    @property
    def units(self) -> list[AggregationUnit]:
        groups = self.groups
        return [
            AggregationUnit(
                int(self.unit_ids[i]),
                float(self.weights[i]),
                tuple(int(u) for u in self.contributors(i)),
                None if groups is None or groups[i] < 0 else int(groups[i]),
            )
            for i in range(self.n)
        ]

    @property
    def unit_of_entry(self) -> np.ndarray:
        """Unit index for every entry of ``users``."""
        if "unit_of_entry" not in self._cache:
            self._cache["unit_of_entry"] = np.repeat(np.arange(self.n), np.diff(self.ptr))
        return self._cache["unit_of_entry"]

    @property
    def first_contributors(self) -> np.ndarray:
        if self.n == 0:
            return np.zeros(0, dtype=np.int64)
        return self.users[self.ptr[:-1]]

    def total_weight(self) -> float:
        """Normalised query value sum_t w_t."""
        return float(np.sum(self.weights))

    def query_value(self) -> float:
        """Un-normalised query value f(T)."""
        return self.total_weight() * self.weight_scale

    def user_counts(self) -> np.ndarray:
        return np.bincount(self.users, minlength=self.user_universe_size)[: self.user_universe_size]

    def user_weight_sums(self) -> np.ndarray:
        return np.bincount(
            self.users, weights=self.weights[self.unit_of_entry], minlength=self.user_universe_size
        )[: self.user_universe_size]

    def subset(self, keep: np.ndarray) -> AggregationUnitTable:
        """Table restricted to the units selected by a boolean mask."""
        keep = np.asarray(keep, dtype=bool)
        if keep.size != self.n:
            raise InvalidParams("mask length must equal the number of units")
        lengths = np.diff(self.ptr)[keep]
        ptr = np.zeros(lengths.size + 1, dtype=np.int64)
        np.cumsum(lengths, out=ptr[1:])
        users = self.users[keep[self.unit_of_entry]]
        return AggregationUnitTable(
            self.weights[keep],
            ptr,
            users,
            self.user_universe_size,
            self.tuple_bound,
            self.users_per_tuple,
            self.weight_scale,
            unit_ids=self.unit_ids[keep],
            groups=None if self.groups is None else self.groups[keep],
        )

    def with_units_added(self, other: AggregationUnitTable) -> AggregationUnitTable:
        """Concatenate the units of ``other`` (same metadata) after this table's."""
        offset = self.unit_ids.max() + 1 if self.n else 0
        ptr = np.concatenate([self.ptr, self.ptr[-1] + other.ptr[1:]])
        groups = None
        if self.groups is not None or other.groups is not None:
            g1 = self.groups if self.groups is not None else -np.ones(self.n, dtype=np.int64)
            g2 = other.groups if other.groups is not None else -np.ones(other.n, dtype=np.int64)
            groups = np.concatenate([g1, g2])
        return AggregationUnitTable(
            np.concatenate([self.weights, other.weights]),
            ptr,
            np.concatenate([self.users, other.users]),
            self.user_universe_size,
            self.tuple_bound,
            self.users_per_tuple,
            self.weight_scale,
            unit_ids=np.concatenate([self.unit_ids, other.unit_ids + offset]),
            groups=groups,
        )

    def replace_meta(self, **kwargs) -> AggregationUnitTable:
        meta = dict(
            user_universe_size=self.user_universe_size,
            tuple_bound=self.tuple_bound,
            users_per_tuple=self.users_per_tuple,
            weight_scale=self.weight_scale,
        )
        meta.update(kwargs)
        return AggregationUnitTable(
            self.weights, self.ptr, self.users, unit_ids=self.unit_ids, groups=self.groups, **meta
        )


@dataclass(frozen=True)
class VectorWorkload:
    """``d`` aggregation tables (one per output component) over one user universe."""

    components: tuple[AggregationUnitTable, ...]

    def __post_init__(self):
        comps = tuple(self.components)
        object.__setattr__(self, "components", comps)
        if not comps:
            raise InvalidParams("a workload needs at least one component")
        m = comps[0].user_universe_size
        if any(c.user_universe_size != m for c in comps):
            raise InvalidParams("all components must share one user universe")

    @property
    def d(self) -> int:
        return len(self.components)

    @property
    def user_universe_size(self) -> int:
        return self.components[0].user_universe_size

    @property
    def tuple_bound(self) -> int:
        return max(c.tuple_bound for c in self.components)

    @property
    def weight_scale(self) -> float:
        return self.components[0].weight_scale

    def query_values(self) -> np.ndarray:
        return np.array([c.query_value() for c in self.components])

    @classmethod
    def from_grouped_table(cls, table: AggregationUnitTable, d: int | None = None) -> VectorWorkload:
        if table.groups is None:
            return cls((table,))
        if d is None:
            d = int(table.groups.max()) + 1 if table.n else 1
        return cls(tuple(table.subset(table.groups == g) for g in range(d)))

    def map(self, fn) -> VectorWorkload:
        return VectorWorkload(tuple(fn(c) for c in self.components))


def validate_table(table: AggregationUnitTable) -> AggregationUnitTable:
    """Check every table invariant and return the table unchanged."""
    w = table.weights
    if w.size and (not np.all(np.isfinite(w)) or w.min() < 0 or w.max() > 1):
        bad = int(np.flatnonzero(~((w >= 0) & (w <= 1)))[0])
        raise WeightOutOfRange(f"unit {int(table.unit_ids[bad])} has normalised weight {w[bad]}")
    if table.users.size:
        lo, hi = int(table.users.min()), int(table.users.max())
        if lo < 0 or hi >= table.user_universe_size:
            culprit = lo if lo < 0 else hi
            raise UnknownUser(f"user {culprit} outside universe of size {table.user_universe_size}")
    lengths = np.diff(table.ptr)
    if lengths.size and lengths.min() < 1:
        raise InvalidParams("every unit needs at least one contributor")
    if lengths.size and lengths.max() > table.users_per_tuple:
        raise InvalidParams(
            f"a unit lists {int(lengths.max())} contributors, above l={table.users_per_tuple}"
        )
    if table.users.size:
        # duplicates within one unit show up as repeated (unit, user) pairs
        keys = table.unit_of_entry * table.user_universe_size + table.users
        if np.unique(keys).size != keys.size:
            raise InvalidParams("contributor lists must be duplicate-free")
    counts = table.user_counts()
    if counts.size and counts.max() > table.tuple_bound:
        user = int(np.argmax(counts))
        raise DeltaViolated(user, int(counts[user]), table.tuple_bound)
    return table


def validate_workload(workload: VectorWorkload) -> VectorWorkload:
    for comp in workload.components:
        validate_table(comp)
    return workload


def poisson_sample(table: AggregationUnitTable, q: float, rng: RngStream) -> AggregationUnitTable:
    """Keep each unit independently with probability ``q``."""
    if not 0.0 <= q <= 1.0:
        raise QOutOfRange(f"sample rate must lie in [0, 1], got {q}")
    if q == 1.0:
        return table
    return table.subset(rng.bernoulli_mask(table.n, q))


def tau_star(table: AggregationUnitTable) -> int:
    """Largest number of units any single user contributes to."""
    if table.users.size == 0:
        return 0
    return int(table.user_counts().max())


def contribution_norms(workload: VectorWorkload) -> tuple[np.ndarray, np.ndarray]:
    """Per-user contribution vectors (m x d) and their L2 norms."""
    x = np.column_stack([c.user_weight_sums() for c in workload.components])
    return x, np.sqrt(np.sum(x * x, axis=1))


def remove_user(table: AggregationUnitTable, user: int) -> AggregationUnitTable:
    """User-level neighbour: drop every unit that lists ``user``."""
    if not 0 <= user < table.user_universe_size:
        raise UnknownUser(f"user {user} outside universe of size {table.user_universe_size}")
    hit = np.zeros(table.n, dtype=bool)
    hit[table.unit_of_entry[table.users == user]] = True
    if not hit.any():
        return table
    return table.subset(~hit)


def remove_user_workload(workload: VectorWorkload, user: int) -> VectorWorkload:
    return workload.map(lambda c: remove_user(c, user))


def explore(table: AggregationUnitTable, sampled_users: np.ndarray) -> AggregationUnitTable:
    """Units whose first contributor is among ``sampled_users``."""
    chosen = np.zeros(table.user_universe_size, dtype=bool)
    chosen[np.asarray(sampled_users, dtype=np.int64)] = True
    return table.subset(chosen[table.first_contributors])
