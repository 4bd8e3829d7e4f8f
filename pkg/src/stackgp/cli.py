"""Command-line interface: ``stackgp <command> ...``.

Commands
--------
generate-pagie  write the Pagie benchmark grid as CSV
fit             evolve programs from a run config, write model JSON + stats CSV
predict         apply a saved model to a CSV
score           score a saved model on a labeled CSV
benchmark       time repeated fits over growing Pagie grids
"""

import argparse
import contextlib
import dataclasses
import json
import logging
import os
import statistics
import sys
import tempfile
import time
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import yaml

from . import __version__
from .data import LabeledDataset, load_csv, pagie_grid, read_csv, write_csv
from .engine import EngineConfig, FitResult, fit, pagie_config, predict_classification, \
    predict_regression, score
from .program import Program

log = logging.getLogger("stackgp")

#: Non-engine keys accepted in a run config.
IO_KEYS = {
    "data": None,
    "pagie_side": None,
    "target_column": -1,
    "weight_column": None,
    "has_header": True,
    "model_out": "model.json",
    "stats_out": "stats.csv",
}

STATS_COLUMNS = ["generation", "best_raw_fitness", "best_len", "best_depth",
                 "mean_raw_fitness", "seconds"]
BENCH_COLUMNS = ["side", "rows", "runs", "mean_seconds", "std_seconds",
                 "mean_best_fitness", "std_best_fitness"]


class CLIError(Exception):
    pass


@contextlib.contextmanager
def atomic_output(path: str):
    """Yield a temp path that replaces ``path`` only if the block succeeds."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    os.close(fd)
    try:
        yield tmp
        os.replace(tmp, path)
    finally:
        if os.path.exists(tmp):
            os.remove(tmp)


def _parse_overrides(pairs: Sequence[str]) -> Dict[str, Any]:
    out = {}
    for pair in pairs or ():
        if "=" not in pair:
            raise CLIError(f"--set expects KEY=VALUE, got {pair!r}")
        key, value = pair.split("=", 1)
        out[key.strip()] = yaml.safe_load(value)
    return out


def load_run_config(path: Optional[str], overrides: Dict[str, Any] = None,
                    base: Optional[EngineConfig] = None) -> Tuple[EngineConfig, Dict[str, Any]]:
    """Read a YAML (or JSON) run config into an engine config and I/O settings.

    Engine keys are the :class:`EngineConfig` field names; the remaining
    allowed keys are listed in ``IO_KEYS``. Unknown keys are rejected.
    """
    raw: Dict[str, Any] = {}
    if path is not None:
        with open(path) as fh:
            raw = yaml.safe_load(fh) or {}
        if not isinstance(raw, dict):
            raise CLIError(f"{path}: config must be a mapping of key: value")
    raw.update(overrides or {})
    engine_keys = {f.name for f in dataclasses.fields(EngineConfig)}
    unknown = sorted(set(raw) - engine_keys - set(IO_KEYS))
    if unknown:
        raise CLIError(f"unknown config key(s): {', '.join(unknown)}; "
                       f"valid keys: {', '.join(sorted(engine_keys | set(IO_KEYS)))}")
    io = {k: raw.get(k, v) for k, v in IO_KEYS.items()}
    engine = {k: v for k, v in raw.items() if k in engine_keys}
    try:
        cfg = dataclasses.replace(base, **engine) if base else EngineConfig(**engine)
    except (TypeError, ValueError) as exc:
        raise CLIError(f"invalid config: {exc}") from exc
    return cfg, io


def _load_training_data(io: Dict[str, Any]) -> LabeledDataset:
    if (io["data"] is None) == (io["pagie_side"] is None):
        raise CLIError("config needs exactly one of 'data' (CSV path) or 'pagie_side'")
    if io["pagie_side"] is not None:
        return pagie_grid(int(io["pagie_side"]))
    return load_csv(io["data"], io["target_column"], io["has_header"], io["weight_column"])


def write_stats(path: str, result: FitResult, timings: bool = True) -> None:
    cols = STATS_COLUMNS if timings else STATS_COLUMNS[:-1]
    table = [[getattr(s, c) for s in result.stats] for c in cols]
    write_csv(path, table, cols)


def model_document(result: FitResult, data: LabeledDataset) -> Dict[str, Any]:
    return {
        "format": "stackgp-model",
        "version": 1,
        "n_features": data.data.n_cols,
        "feature_names": list(data.data.names) if data.data.names else None,
        "config": result.config.to_dict(),
        "best": result.best.to_dict(),
        "population": [p.to_dict() for p in result.population],
    }


def load_model(path: str) -> Tuple[Program, Dict[str, Any]]:
    with open(path) as fh:
        doc = json.load(fh)
    if "best" in doc:
        return Program.from_dict(doc["best"]), doc
    return Program.from_dict(doc), {}


def cmd_generate_pagie(args) -> int:
    data = pagie_grid(args.side)
    with atomic_output(args.out) as tmp:
        write_csv(tmp, [data.X[:, 0], data.X[:, 1], data.targets], ["x", "y", "target"])
    print(f"wrote {data.n_rows} rows to {args.out}")
    return 0


def cmd_fit(args) -> int:
    overrides = _parse_overrides(args.set)
    for key in ("seed", "workers"):
        if getattr(args, key) is not None:
            overrides[key] = getattr(args, key)
    cfg, io = load_run_config(args.config, overrides)
    data = _load_training_data(io)
    model_out = args.model_out or io["model_out"]
    stats_out = args.stats_out or io["stats_out"]

    t0 = time.perf_counter()
    result = fit(data.X, data.targets, data.weights, cfg)
    elapsed = time.perf_counter() - t0

    with atomic_output(model_out) as tmp_model, atomic_output(stats_out) as tmp_stats:
        with open(tmp_model, "w") as fh:
            json.dump(model_document(result, data), fh, indent=1)
        write_stats(tmp_stats, result, timings=not args.no_timings)
    print(f"best: {result.best}")
    print(f"best {cfg.metric}: {result.best.raw_fitness!r} "
          f"(len {result.best.length}, depth {result.best.depth})")
    print(f"generations: {len(result.stats)}")
    print(f"total seconds: {elapsed:.3f}")
    return 0


def _feature_matrix(path: str, has_header: bool, target_column, weight_column=None):
    header, table = read_csv(path, has_header)
    drop = set()
    targets = None
    for col, role in ((target_column, "target"), (weight_column, "weight")):
        if col is None:
            continue
        if isinstance(col, str) and not col.lstrip("-").isdigit():
            if header is None or col not in header:
                raise CLIError(f"{path}: {role} column {col!r} not found")
            idx = header.index(col)
        else:
            idx = int(col) % table.shape[1]
        drop.add(idx)
        if role == "target":
            targets = table[:, idx]
    keep = [j for j in range(table.shape[1]) if j not in drop]
    return table[:, keep], targets


def cmd_predict(args) -> int:
    program, _ = load_model(args.model)
    X, _ = _feature_matrix(args.data, not args.no_header, args.target_column)
    if program.max_feature() >= X.shape[1]:
        raise CLIError(f"model uses x{program.max_feature()} but {args.data} "
                       f"has {X.shape[1]} feature column(s)")
    with atomic_output(args.out) as tmp:
        if args.task == "classification":
            proba, cls = predict_classification(program, X, args.threshold)
            write_csv(tmp, [proba, cls], ["probability", "class"])
        else:
            write_csv(tmp, [predict_regression(program, X)], ["prediction"])
    print(f"wrote {X.shape[0]} predictions to {args.out}")
    return 0


def cmd_score(args) -> int:
    program, doc = load_model(args.model)
    data = load_csv(args.data, args.target_column, not args.no_header, args.weight_column)
    if program.max_feature() >= data.data.n_cols:
        raise CLIError(f"model uses x{program.max_feature()} but data has "
                       f"{data.data.n_cols} feature column(s)")
    metric = args.metric or program.metric or doc.get("config", {}).get("metric", "rmse")
    value = score(program, data.X, data.targets, data.weights, metric, args.task, args.threshold)
    label = "accuracy" if args.task == "classification" else metric
    print(f"{label}: {value!r}")
    return 0


def run_benchmark(sides: Sequence[int], runs: int, cfg: EngineConfig) -> List[Dict[str, float]]:
    """Fit ``runs`` seeds per grid side; summarize seconds and final best fitness."""
    if runs < 1:
        raise CLIError("runs must be >= 1")
    rows = []
    for side in sides:
        data = pagie_grid(side)
        seconds, best = [], []
        for r in range(runs):
            run_cfg = cfg.replace(seed=cfg.seed + r)
            t0 = time.perf_counter()
            result = fit(data.X, data.targets, data.weights, run_cfg)
            seconds.append(time.perf_counter() - t0)
            best.append(result.best.raw_fitness)
            log.info("side %d run %d: %.3fs best %.6g", side, r, seconds[-1], best[-1])
        rows.append({
            "side": side,
            "rows": data.n_rows,
            "runs": runs,
            "mean_seconds": statistics.fmean(seconds),
            "std_seconds": statistics.pstdev(seconds),
            "mean_best_fitness": statistics.fmean(best),
            "std_best_fitness": statistics.pstdev(best),
        })
    return rows


def format_benchmark_table(rows: List[Dict[str, float]]) -> str:
    """Sizes as columns, one line per statistic."""
    lines = ["# Rows".ljust(18) + "".join(f"{r['rows']:>12d}" for r in rows)]
    for key in BENCH_COLUMNS[3:]:
        lines.append(key.ljust(18) + "".join(f"{r[key]:>12.4f}" for r in rows))
    return "\n".join(lines)


def cmd_benchmark(args) -> int:
    cfg, _ = load_run_config(args.config, _parse_overrides(args.set), base=pagie_config())
    rows = run_benchmark(args.sides, args.runs, cfg)
    with atomic_output(args.out) as tmp:
        write_csv(tmp, [[r[c] for r in rows] for c in BENCH_COLUMNS], BENCH_COLUMNS)
    print(format_benchmark_table(rows))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="stackgp", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate-pagie", help="write a Pagie grid CSV (x,y,target)")
    p.add_argument("--side", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate_pagie)

    p = sub.add_parser("fit", help="run the GP engine from a config file")
    p.add_argument("config", nargs="?")
    p.add_argument("--set", action="append", metavar="KEY=VALUE",
                   help="override a config key (repeatable)")
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--model-out")
    p.add_argument("--stats-out")
    p.add_argument("--no-timings", action="store_true",
                   help="omit the seconds column so stats are reproducible byte-for-byte")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("predict", help="apply a saved model to a CSV")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--task", choices=["regression", "classification"], default="regression")
    p.add_argument("--target-column", help="column to drop before predicting")
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--no-header", action="store_true")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("score", help="score a saved model on labeled data")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--target-column", default="-1")
    p.add_argument("--weight-column")
    p.add_argument("--metric")
    p.add_argument("--task", choices=["regression", "classification"], default="regression")
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--no-header", action="store_true")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("benchmark", help="timing harness over Pagie grid sizes")
    p.add_argument("--sides", type=int, nargs="+", default=[64, 128, 256])
    p.add_argument("--runs", type=int, default=10)
    p.add_argument("--config")
    p.add_argument("--set", action="append", metavar="KEY=VALUE")
    p.add_argument("--out", default="benchmark.csv")
    p.set_defaults(func=cmd_benchmark)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (CLIError, ValueError, KeyError, OSError, RuntimeError) as exc:
        print(f"stackgp {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
