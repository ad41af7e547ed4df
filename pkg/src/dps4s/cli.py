"""Command line entry point: ingest, run, decompose, amplify."""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys

from . import accounting as acc
from .errors import DPS4SError
from .harness import ExperimentConfig, decompose_errors, run_experiment
from .workloads import (
    enumerate_graphlets,
    load_edge_list,
    load_units_csv,
    meta_path,
    write_meta,
    write_units_csv,
)

AMPLIFY_KINDS = (
    "pure",
    "pure-direct",
    "rdp",
    "vector",
    "se",
    "dp-to-rdp",
    "rdp-to-dp",
    "calibrate",
    "find-alpha",
    "choose-alpha",
    "ss",
)


def _need(args, *names):
    missing = [n for n in names if getattr(args, n.replace("-", "_")) is None]
    if missing:
        raise _Usage(f"--kind {args.kind} requires " + ", ".join("--" + n for n in missing))


class _Usage(Exception):
    pass


def _amplify(args) -> dict:
    k = args.kind
    if k in ("pure", "pure-direct"):
        _need(args, "eps", "tau", "delta-cap", "q")
        fn = acc.amplify_pure_fast if k == "pure" else acc.amplify_pure_direct
        return {"epsilon": fn(args.eps, args.tau, args.delta_cap, args.q)}
    if k == "rdp":
        _need(args, "alpha", "rho", "tau", "delta-cap", "q")
        return {"alpha": args.alpha, "rho": acc.amplify_rdp(args.alpha, args.rho, args.tau, args.delta_cap, args.q)}
    if k == "vector":
        _need(args, "eps", "delta", "alpha", "q", "delta-cap")
        return {"epsilon": acc.amplify_vector(args.eps, args.delta, args.alpha, args.q, args.delta_cap),
                "delta": args.delta}
    if k == "se":
        _need(args, "eps", "k", "m", "C")
        eps, delta = acc.se_amplify(args.eps, args.delta or 0.0, args.k, args.m, args.C)
        return {"epsilon": eps, "delta": delta}
    if k == "dp-to-rdp":
        _need(args, "eps", "alpha")
        return dataclasses.asdict(acc.dp_to_rdp(args.eps, args.alpha))
    if k == "rdp-to-dp":
        _need(args, "alpha", "rho", "delta")
        return dataclasses.asdict(acc.rdp_to_dp(args.alpha, args.rho, args.delta))
    if k == "calibrate":
        _need(args, "alpha", "rho")
        cal = acc.calibrate_smooth(args.alpha, args.rho, args.d)
        return dataclasses.asdict(cal)
    if k == "find-alpha":
        _need(args, "eps", "delta")
        alpha, rho = acc.find_alpha(args.eps, args.delta, args.d)
        return {"alpha": alpha, "rho": rho}
    if k == "choose-alpha":
        _need(args, "eps", "delta")
        alpha, rho = acc.choose_alpha_scalar(args.eps, args.delta)
        return {"alpha": alpha, "rho": rho}
    _need(args, "eps")
    gamma, eta = acc.ss_calibration(args.eps, args.delta or 0.0, args.d, args.variant)
    return {"gamma": gamma, "eta": eta}


def _cmd_amplify(args) -> dict:
    given = {
        key: value
        for key, value in vars(args).items()
        if key not in ("command", "func") and value is not None
    }
    return {"input": given, "output": _amplify(args)}


def _cmd_ingest(args) -> dict:
    if args.edges:
        graph = load_edge_list(args.edges, directed=args.directed)
        data = enumerate_graphlets(graph, args.pattern, D=args.D, tuple_bound=args.tuple_bound, by_label=args.by_label)
    else:
        data = load_units_csv(args.units, args.m, args.tuple_bound, args.l, args.weight_scale)
    write_units_csv(data, args.out)
    write_meta(data, meta_path(args.out))
    summary = {
        "user_universe_size": data.user_universe_size,
        "tuple_bound": data.tuple_bound,
        "weight_scale": data.weight_scale,
    }
    if hasattr(data, "components"):
        summary["groups"] = data.d
        summary["units"] = [c.n for c in data.components]
    else:
        summary["units"] = data.n
    return {"input": {k: v for k, v in vars(args).items() if k not in ("command", "func") and v is not None},
            "output": summary}


def _load_config(args) -> ExperimentConfig:
    cfg = ExperimentConfig.load(args.config)
    if args.out:
        cfg.output = args.out
    return cfg


def _cmd_run(args) -> dict:
    cfg = _load_config(args)
    report = run_experiment(cfg)
    return {"input": {"config": args.config, "output": cfg.output}, "output": report.summary()}


def _cmd_decompose(args) -> dict:
    cfg = _load_config(args)
    result = decompose_errors(cfg)
    out = {
        "sampling_err": result["sampling_err"],
        "dp_err": result["dp_err"],
        "trimmed_sampling_err": result["trimmed_sampling_err"],
        "trimmed_dp_err": result["trimmed_dp_err"],
    }
    if cfg.output:
        run_experiment(cfg, write=True)
    return {"input": {"config": args.config}, "output": out}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dps4s", description="User-level DP aggregation with tuple sampling.")
    sub = parser.add_subparsers(dest="command", required=True)

    amp = sub.add_parser("amplify", help="privacy accounting calculators")
    amp.add_argument("--kind", choices=AMPLIFY_KINDS, default="pure")
    amp.add_argument("--eps", type=float)
    amp.add_argument("--delta", type=float)
    amp.add_argument("--tau", type=float)
    amp.add_argument("--delta-cap", type=int)
    amp.add_argument("--q", type=float)
    amp.add_argument("--alpha", type=float)
    amp.add_argument("--rho", type=float)
    amp.add_argument("--d", type=int, default=1)
    amp.add_argument("--k", type=int)
    amp.add_argument("--m", type=int)
    amp.add_argument("--C", type=int)
    amp.add_argument("--variant", choices=("gaussian", "laplace", "cauchy"), default="gaussian")
    amp.set_defaults(func=_cmd_amplify)

    ing = sub.add_parser("ingest", help="edge list or units CSV to a validated units file")
    src = ing.add_mutually_exclusive_group(required=True)
    src.add_argument("--edges")
    src.add_argument("--units")
    ing.add_argument("--out", required=True)
    ing.add_argument("--pattern", default="triangle")
    ing.add_argument("--directed", action="store_true")
    ing.add_argument("--by-label", action="store_true")
    ing.add_argument("--D", type=int)
    ing.add_argument("--tuple-bound", type=int)
    ing.add_argument("--m", type=int)
    ing.add_argument("--l", type=int)
    ing.add_argument("--weight-scale", type=float, default=1.0)
    ing.set_defaults(func=_cmd_ingest)

    for name, func in (("run", _cmd_run), ("decompose", _cmd_decompose)):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True)
        p.add_argument("--out")
        p.set_defaults(func=func)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        result = args.func(args)
    except _Usage as exc:
        parser.exit(2, f"dps4s: error: {exc}\n")
    except (DPS4SError, ValueError, KeyError, OSError) as exc:
        print(f"dps4s: error: {exc}", file=sys.stderr)
        return 1
    print(json.dumps(result, indent=2, sort_keys=True, default=float))
    return 0


if __name__ == "__main__":
    sys.exit(main())
