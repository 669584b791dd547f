"""Command-line front door: train, predict, synth, bench, confidence.

Exit codes: 0 success, 1 usage/config errors, 2 data errors, 3 numeric
errors.  Diagnostics go to stderr; data (tables, metrics) goes to stdout
or the requested output files.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .booster import MODES, BoosterConfig, TrainResult, train
from .data import RawDataset, load_dataset
from .errors import ConfigError, DataError, NumericError, VecboostError
from .losses import LOSS_KINDS
from .model_io import load_model, save_model
from .stats import confidence_of_superiority
from .synth import SYNTH_KINDS, generate


class _Parser(argparse.ArgumentParser):
    """argparse variant that exits with code 1 on usage errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _add_train_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--loss", choices=LOSS_KINDS, default=None)
    p.add_argument("--mode", choices=MODES, default=None)
    p.add_argument("--lr", type=float, default=None)
    p.add_argument("--depth", type=int, default=None)
    p.add_argument("--max-leaves", type=int, default=None)
    p.add_argument("--min-samples", type=int, default=None)
    p.add_argument("--gain-threshold", type=float, default=None)
    p.add_argument("--bins", type=int, default=None)
    p.add_argument("--topk", type=int, default=None)
    p.add_argument("--rounds", type=int, default=None)
    p.add_argument("--patience", type=int, default=None)
    p.add_argument("--lambda", dest="lam", type=float, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--config", default=None, help="key=value file; flags override it")


_CONFIG_KEYS = {
    "loss": str, "mode": str, "lr": float, "depth": int, "max_leaves": int,
    "min_samples": int, "gain_threshold": float, "bins": int, "topk": int,
    "rounds": int, "patience": int, "lambda": float, "seed": int, "workers": int,
}


def _read_config_file(path: str) -> dict:
    values = {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise DataError(f"cannot read config file {path}: {exc}") from None
    for lineno, line in enumerate(lines, start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}: line {lineno}: expected key=value")
        key, _, raw = line.partition("=")
        key = key.strip().replace("-", "_")
        raw = raw.strip()
        if key not in _CONFIG_KEYS:
            raise ConfigError(f"{path}: line {lineno}: unknown key {key!r}")
        try:
            values[key] = _CONFIG_KEYS[key](raw)
        except ValueError:
            raise ConfigError(f"{path}: line {lineno}: bad value {raw!r} for {key}") from None
    return values


def _build_config(args) -> BoosterConfig:
    file_values = _read_config_file(args.config) if args.config else {}

    def pick(flag_name, file_key, default):
        flag = getattr(args, flag_name)
        if flag is not None:
            return flag
        return file_values.get(file_key, default)

    config = BoosterConfig(
        loss=pick("loss", "loss", "mse"),
        mode=pick("mode", "mode", "mo_dense"),
        learning_rate=pick("lr", "lr", 0.1),
        lam=pick("lam", "lambda", 1.0),
        max_depth=pick("depth", "depth", 5),
        max_leaves=pick("max_leaves", "max_leaves", None),
        min_samples=pick("min_samples", "min_samples", 4),
        gain_threshold=pick("gain_threshold", "gain_threshold", 1e-6),
        max_bins=pick("bins", "bins", 32),
        sparse_k=pick("topk", "topk", None),
        max_rounds=pick("rounds", "rounds", 100),
        patience=pick("patience", "patience", 25),
        seed=pick("seed", "seed", 0),
        workers=pick("workers", "workers", None),
    )
    if config.loss not in LOSS_KINDS:
        raise ConfigError(f"unknown loss {config.loss!r}")
    if config.mode not in MODES:
        raise ConfigError(f"unknown mode {config.mode!r}")
    return config


def _load(path: str, labels: str | None) -> RawDataset:
    try:
        return load_dataset(path, labels)
    except FileNotFoundError:
        raise DataError(f"no such file: {path}") from None


def _write_history(path: str, result: TrainResult) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("round,train_loss,eval_metric,seconds\n")
        for rec in result.history:
            fh.write(f"{rec.round},{rec.train_loss!r},{rec.eval_metric!r},"
                     f"{rec.seconds!r}\n")


def cmd_train(args) -> int:
    config = _build_config(args)
    dataset = _load(args.data, args.labels)
    eval_set = _load(args.eval_data, args.labels) if args.eval_data else None
    result = train(dataset, config, eval_set)
    save_model(result.ensemble, args.model)
    history_path = args.out or (args.model + ".history")
    _write_history(history_path, result)
    print(f"best_round {result.best_round}")
    print(f"best_metric {result.best_metric!r}")
    return 0


def _write_predictions(path: str, pred: np.ndarray) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(f"y{j}" for j in range(pred.shape[1])) + "\n")
        for row in pred:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def cmd_predict(args) -> int:
    ensemble = load_model(args.model)
    try:
        with open(args.data, "rb") as fh:
            magic = fh.read(4)
    except FileNotFoundError:
        raise DataError(f"no such file: {args.data}") from None
    if magic == b"BMO1":
        features = load_dataset(args.data).features
    else:
        features = _read_feature_csv(args.data, ensemble.n_features)
    pred = ensemble.predict(features, proba=args.proba) if features.size else \
        np.empty((0, ensemble.n_outputs))
    _write_predictions(args.out, pred)
    return 0


def _read_feature_csv(path: str, expected_m: int) -> np.ndarray:
    from .data import _parse_csv_rows
    try:
        rows, _, _ = _parse_csv_rows(path)
    except DataError as exc:
        if "no rows" in str(exc):
            return np.empty((0, expected_m))
        raise
    table = np.asarray(rows, dtype=np.float64)
    if table.shape[1] == expected_m:
        return table
    if table.shape[1] > expected_m:
        # Tables carrying trailing target columns are accepted for convenience.
        return table[:, :expected_m]
    raise DataError(
        f"{path}: model expects {expected_m} feature columns, file has {table.shape[1]}")


def cmd_synth(args) -> int:
    dataset = generate(args.kind, args.n, args.seed)
    with open(args.out, "w", encoding="utf-8") as fh:
        header = [f"x{j}" for j in range(dataset.m)] + [f"y{j}" for j in range(dataset.d)]
        fh.write(",".join(header) + "\n")
        for xrow, yrow in zip(dataset.features, dataset.targets):
            cells = [repr(float(v)) for v in xrow] + [repr(float(v)) for v in yrow]
            fh.write(",".join(cells) + "\n")
    return 0


def cmd_bench(args) -> int:
    from .bench import run_bench
    if args.repeat < 1:
        raise ConfigError(f"bench repeat count must be >= 1, got {args.repeat}")
    config = _build_config(args)
    dataset = _load(args.data, args.labels)
    modes = [m.strip() for m in args.modes.split(",") if m.strip()]
    for mode in modes:
        if mode not in MODES:
            raise ConfigError(f"unknown mode {mode!r}")
    replications = [1]
    if args.sweep_d:
        try:
            replications = [int(x) for x in args.sweep_d.split(",")]
        except ValueError:
            raise ConfigError(f"bad --sweep-d value {args.sweep_d!r}") from None
        if any(r < 1 for r in replications):
            raise ConfigError("--sweep-d replication factors must be >= 1")
    report = run_bench(dataset, config, modes, args.repeat, replications)
    print(report.render(), end="")
    return 0


def cmd_confidence(args) -> int:
    a = _read_metric_file(args.a)
    b = _read_metric_file(args.b)
    if a.size != b.size:
        raise DataError(
            f"trial count mismatch: {a.size} in {args.a}, {b.size} in {args.b}")
    value = confidence_of_superiority(a, b, args.direction)
    print(repr(value))
    return 0


def _read_metric_file(path: str) -> np.ndarray:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = [ln.strip() for ln in fh if ln.strip()]
    except FileNotFoundError:
        raise DataError(f"no such file: {path}") from None
    try:
        return np.array([float(ln) for ln in lines])
    except ValueError as exc:
        raise DataError(f"{path}: {exc}") from None


def build_parser() -> _Parser:
    parser = _Parser(prog="vecboost",
                     description="Gradient boosted trees with vector-valued leaves")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="fit a model")
    p.add_argument("--data", required=True)
    p.add_argument("--labels", required=True,
                   help="trailing target column count, or class:<n_classes>")
    p.add_argument("--eval-data", default=None)
    p.add_argument("--model", required=True, help="output model path")
    p.add_argument("--out", default=None, help="history path (default <model>.history)")
    _add_train_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="write predictions for a feature table")
    p.add_argument("--data", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--proba", action="store_true",
                   help="emit softmax probabilities instead of raw scores")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("synth", help="generate a synthetic dataset CSV")
    p.add_argument("--kind", choices=sorted(SYNTH_KINDS), required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("bench", help="measure mean seconds per boosting round")
    p.add_argument("--data", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--modes", default="mo_dense",
                   help="comma-separated training modes to time")
    p.add_argument("--repeat", type=int, default=10,
                   help="boosting rounds to run and average")
    p.add_argument("--sweep-d", default=None,
                   help="comma-separated target replication factors, e.g. 1,2")
    _add_train_flags(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("confidence",
                       help="Student's-t confidence that trials in A beat trials in B")
    p.add_argument("--a", required=True, help="file with one metric per line")
    p.add_argument("--b", required=True)
    p.add_argument("--direction", choices=("greater", "less"), default="greater")
    p.set_defaults(func=cmd_confidence)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except VecboostError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
