"""Experiment runner: configuration, repeated trials, trimmed error reports.

Ground truth is computed non-privately for evaluation and only ever appears
in the report's truth field.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
import os
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import mechanisms as mech
from .aggregation_table import AggregationUnitTable, VectorWorkload
from .errors import ConfigError, ZeroTruth
from .numerics import trimmed_mean
from .rng import RngStream
from .workloads import (
    demo_graph,
    enumerate_graphlets,
    load_edge_list,
    load_units_csv,
    meta_path,
    read_meta,
    synth_table,
    synth_workload,
)

SEED_ENV = "DPS4S_SEED"

SCALAR_MECHANISMS = ("dps4s", "dps4s_rdp", "r2t", "sne", "sample_truncate")
VECTOR_MECHANISMS = ("dps4s_vector", "pmsja", "sne_vector")
CSV_COLUMNS = ["mechanism", "q", "trial", "estimate", "rel_err", "time_s"]


@dataclass
class ExperimentConfig:
    mechanism: str = "dps4s"
    dataset: str | None = None
    dataset_kind: str = "units"  # units | edges | synth | demo
    pattern: str = "triangle"
    directed: bool = False
    by_label: bool = False
    D: int | None = None
    tuple_bound: int | None = None
    user_universe_size: int | None = None
    users_per_tuple: int | None = None
    weight_scale: float = 1.0
    synth: dict = field(default_factory=dict)
    epsilon: float | None = None
    delta: float | None = None
    beta: float = 0.1
    q: float = 1.0
    k: int | None = None
    C: int | None = None
    tau: float | None = None
    trials: int = 100
    drop: int | None = None
    seed: int = 0
    output: str | None = None
    noise_disabled: bool = False
    record_time: bool = True

    def __post_init__(self):
        if self.mechanism not in SCALAR_MECHANISMS + VECTOR_MECHANISMS:
            raise ConfigError(f"unknown mechanism {self.mechanism!r}")
        if self.dataset_kind not in ("units", "edges", "synth", "demo"):
            raise ConfigError(f"unknown dataset kind {self.dataset_kind!r}")
        if self.dataset_kind in ("units", "edges") and not self.dataset:
            raise ConfigError("dataset path required")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.is_vector:
            if self.epsilon is None:
                self.epsilon = 4.0
            if self.delta is None:
                self.delta = 1e-7
            if not self.delta > 0:
                raise ConfigError("vector mechanisms need delta > 0")
        else:
            if self.epsilon is None:
                self.epsilon = 1.0
            if self.delta is None:
                self.delta = 0.0
            if self.mechanism == "dps4s_rdp" and not self.delta > 0:
                raise ConfigError("dps4s_rdp needs delta > 0")
            if self.mechanism == "sample_truncate" and self.tau is None:
                raise ConfigError("sample_truncate needs tau")
        if self.drop is None:
            self.drop = self.trials // 5
        if self.trials <= 2 * self.drop:
            raise ConfigError("trials must exceed twice the trimmed count")

    @property
    def is_vector(self) -> bool:
        return self.mechanism in VECTOR_MECHANISMS

    @classmethod
    def from_dict(cls, data: dict) -> ExperimentConfig:
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        data = dict(data)
        env = os.environ.get(SEED_ENV)
        if env is not None and env.strip():
            try:
                data["seed"] = int(env)
            except ValueError:
                raise ConfigError(f"{SEED_ENV} must be an integer, got {env!r}") from None
        return cls(**data)

    @classmethod
    def load(cls, path) -> ExperimentConfig:
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        return cls.from_dict(data)


@dataclass
class TrialRecord:
    trial: int
    estimate: object
    rel_err: float
    time_s: float | None
    sample_value: object
    sampling_err: float
    dp_err: float


@dataclass
class MechanismReport:
    config: ExperimentConfig
    truth: object
    trials: list[TrialRecord]
    aggregate: dict
    metadata: dict

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        cfg = self.config
        for rec in self.trials:
            writer.writerow([
                cfg.mechanism,
                repr(float(cfg.q)),
                rec.trial,
                _fmt(rec.estimate),
                repr(float(rec.rel_err)),
                "" if rec.time_s is None else repr(rec.time_s),
            ])
        agg = self.aggregate
        writer.writerow([
            cfg.mechanism,
            repr(float(cfg.q)),
            "aggregate",
            "",
            repr(float(agg["trimmed_rel_err"])),
            "" if agg["mean_time_s"] is None else repr(agg["mean_time_s"]),
        ])
        return buf.getvalue()

    def summary(self) -> dict:
        return {
            "mechanism": self.config.mechanism,
            "q": self.config.q,
            "trials": len(self.trials),
            "truth": _jsonable(self.truth),
            "aggregate": self.aggregate,
            "metadata": self.metadata,
        }


def _fmt(value) -> str:
    if np.ndim(value) == 0:
        return repr(float(value))
    return ";".join(repr(float(v)) for v in np.asarray(value).ravel())


def _jsonable(value):
    if isinstance(value, np.ndarray):
        return [float(v) for v in value]
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    return value


def load_dataset(config: ExperimentConfig):
    """Table or workload described by the config (not timed)."""
    kind = config.dataset_kind
    if kind == "demo":
        data = enumerate_graphlets(demo_graph(), config.pattern, D=config.D, tuple_bound=config.tuple_bound)
    elif kind == "edges":
        graph = load_edge_list(config.dataset, directed=config.directed)
        data = enumerate_graphlets(graph, config.pattern, D=config.D, tuple_bound=config.tuple_bound,
                                   by_label=config.by_label)
    elif kind == "units":
        meta = {}
        sidecar = meta_path(config.dataset)
        if os.path.exists(sidecar):
            meta = read_meta(sidecar)
        data = load_units_csv(
            config.dataset,
            config.user_universe_size or meta.get("user_universe_size"),
            config.tuple_bound or meta.get("tuple_bound"),
            config.users_per_tuple or meta.get("users_per_tuple"),
            config.weight_scale if config.weight_scale != 1.0 else meta.get("weight_scale", 1.0),
        )
    else:
        params = dict(config.synth)
        try:
            if "d" in params:
                data = synth_workload(**params)
            else:
                data = synth_table(**params)
        except TypeError as exc:
            raise ConfigError(f"bad synth parameters: {exc}") from None
    if config.is_vector and isinstance(data, AggregationUnitTable):
        data = VectorWorkload.from_grouped_table(data)
    if not config.is_vector and isinstance(data, VectorWorkload):
        raise ConfigError("scalar mechanism given a grouped dataset")
    return data


def _run_one(config: ExperimentConfig, data, rng: RngStream):
    name = config.mechanism
    eps, delta, beta, q = config.epsilon, config.delta, config.beta, config.q
    if name == "dps4s":
        if delta > 0:
            return mech.dps4s_scalar_rdp(data, q, eps, delta, None, beta, rng)
        return mech.dps4s_scalar_pure(data, q, eps, None, beta, rng)
    if name == "dps4s_rdp":
        return mech.dps4s_scalar_rdp(data, q, eps, delta, None, beta, rng)
    if name == "r2t":
        return mech.r2t(data, eps, None, beta, rng)
    if name == "sample_truncate":
        return mech.sample_truncate_pure(data, config.tau, q, eps, rng)
    if name == "sne":
        return mech.sne_scalar(data, _k(config, data), eps, delta, _C(config, data), rng, beta)
    if name == "dps4s_vector":
        return mech.dps4s_vector(data, q, eps, delta, beta, rng)
    if name == "pmsja":
        return mech.pmsja_baseline(data, eps, delta, beta, rng)
    return mech.sne_vector(data, _k(config, data), eps, delta, _C(config, data), rng, beta)


def _k(config, data) -> int:
    if config.k is not None:
        return int(config.k)
    return max(1, math.floor(config.q * data.user_universe_size))


def _C(config, data) -> int:
    return int(config.C) if config.C is not None else int(data.tuple_bound)


def _distance(a, b) -> float:
    return float(np.linalg.norm(np.atleast_1d(np.asarray(a, dtype=float) - np.asarray(b, dtype=float))))


def run_experiment(config: ExperimentConfig, data=None, write: bool = True) -> MechanismReport:
    """Run ``config.trials`` independent trials and assemble the report.

    Trial ``i`` draws from ``RngStream(config.seed, i)``, so results do not
    depend on execution order. Timing covers the mechanism call only.
    """
    if data is None:
        data = load_dataset(config)
    if isinstance(data, VectorWorkload):
        truth = data.query_values()
        norm = float(np.linalg.norm(truth))
    else:
        truth = data.query_value()
        norm = abs(truth)
    if norm == 0:
        raise ZeroTruth("true query value is zero; relative error undefined")

    records = []
    for i in range(config.trials):
        rng = RngStream(config.seed, i, disable_noise=config.noise_disabled)
        start = time.perf_counter()
        out = _run_one(config, data, rng)
        elapsed = time.perf_counter() - start
        estimate = out.values if isinstance(out, mech.VectorEstimate) else out.value
        sample_value = out.sample_values if isinstance(out, mech.VectorEstimate) else out.sample_value
        records.append(TrialRecord(
            i,
            estimate,
            _distance(estimate, truth) / norm * 100.0,
            elapsed if config.record_time else None,
            sample_value,
            _distance(truth, sample_value),
            _distance(sample_value, estimate),
        ))
        last = out

    drop = config.drop
    errs = [r.rel_err for r in records]
    times = [r.time_s for r in records if r.time_s is not None]
    aggregate = {
        "trimmed_rel_err": trimmed_mean(errs, drop),
        "mean_time_s": (math.fsum(times) / len(times)) if times else None,
        "drop": drop,
        "sampling_err": trimmed_mean([r.sampling_err for r in records], drop),
        "dp_err": trimmed_mean([r.dp_err for r in records], drop),
    }
    budget = last.spent_budget
    metadata = {
        "noise_disabled": config.noise_disabled,
        "private": not config.noise_disabled,
        "relative_error": "l2" if isinstance(data, VectorWorkload) else "absolute",
        "reported_budget": dataclasses.asdict(budget) if dataclasses.is_dataclass(budget) else budget,
        "seed": config.seed,
    }
    report = MechanismReport(config, truth, records, aggregate, metadata)
    if write and config.output:
        out_path = Path(config.output)
        out_path.write_text(report.to_csv(), encoding="utf-8")
        Path(str(out_path) + ".json").write_text(
            json.dumps(report.summary(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
    return report


def decompose_errors(config: ExperimentConfig, data=None) -> dict:
    """Per-trial sampling error |f(T) - f(S)/q| and DP error |f(S)/q - estimate|."""
    report = run_experiment(config, data, write=False)
    return {
        "sampling_err": [r.sampling_err for r in report.trials],
        "dp_err": [r.dp_err for r in report.trials],
        "trimmed_sampling_err": report.aggregate["sampling_err"],
        "trimmed_dp_err": report.aggregate["dp_err"],
        "report": report,
    }
