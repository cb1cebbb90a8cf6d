"""Command-line interface: train, predict, crossval, simulate.

CSV conventions: comma-separated, UTF-8, first row is the header; the
missing-value tokens are the empty string and "NA".  The label column is
picked by name; every other column is a feature unless dropped.  All
randomness flows through --seed.  Progress goes to stderr, tables to
stdout.
"""

import argparse
import json
import sys
from pathlib import Path

import numpy as np
import pandas as pd

from . import experiments
from .model import UldaClassifier, fit_ulda, validate_cost_matrix
from .preprocess import Recipe, apply_recipe, fit_recipe
from .scatter import Dataset
from .selection import Criterion, SelectionConfig, forward_select

NA_TOKENS = ["", "NA"]

BUNDLE_FORMAT_VERSION = 1


class CliError(Exception):
    """User-facing error: printed to stderr, exit code 1."""


def _read_table(path) -> pd.DataFrame:
    try:
        return pd.read_csv(path, keep_default_na=False, na_values=NA_TOKENS)
    except FileNotFoundError as exc:
        raise CliError(str(exc)) from exc
    except pd.errors.ParserError as exc:
        raise CliError(f"cannot parse {path}: {exc}") from exc


def _alpha(text: str) -> float:
    value = float(text)
    if not 0.0 < value < 1.0:
        raise argparse.ArgumentTypeError(f"alpha must be in (0, 1), got {text}")
    return value


def _parse_cyclic(items) -> dict[str, float]:
    spec = {}
    for item in items or []:
        for part in item.split(","):
            part = part.strip()
            if not part:
                continue
            if ":" in part:
                name, period = part.rsplit(":", 1)
                spec[name] = float(period)
            else:
                spec[part] = 360.0
    return spec


def _parse_list(items) -> list[str]:
    out = []
    for item in items or []:
        out.extend(p.strip() for p in item.split(",") if p.strip())
    return out


def _split_features(frame: pd.DataFrame, label: str, drop) -> tuple[pd.DataFrame, np.ndarray]:
    if label not in frame.columns:
        raise CliError(f"label column {label!r} not found in data")
    y = frame[label]
    if y.isna().any():
        raise CliError(f"label column {label!r} contains missing values")
    dropped = set(drop) | {label}
    missing = set(drop) - set(frame.columns)
    if missing:
        raise CliError(f"--drop columns not found: {sorted(missing)}")
    features = frame[[c for c in frame.columns if c not in dropped]]
    if features.shape[1] == 0:
        raise CliError("no feature columns left after dropping")
    return features, y.to_numpy()


def _read_costs(path, n_classes: int) -> np.ndarray:
    raw = pd.read_csv(path, header=None).to_numpy(dtype=float)
    try:
        return validate_cost_matrix(raw, n_classes)
    except ValueError as exc:
        raise CliError(f"bad cost matrix {path}: {exc}") from exc


def _parse_priors(text: str | None, n_classes: int):
    if text is None or text == "empirical":
        return None
    values = np.array([float(p) for p in text.split(",")], dtype=float)
    if values.size != n_classes:
        raise CliError(f"--priors needs {n_classes} values, got {values.size}")
    return values


# ---------------------------------------------------------------------------


def cmd_train(args) -> int:
    frame = _read_table(args.data)
    features, y = _split_features(frame, args.label, _parse_list(args.drop))
    recipe = fit_recipe(features, cyclic=_parse_cyclic(args.cyclic))
    encoded = apply_recipe(recipe, features)
    data = Dataset(encoded.to_numpy(), y, list(encoded.columns))

    selection = None
    cols = list(range(data.n_features))
    if args.select != "none":
        config = SelectionConfig(criterion=Criterion(args.select), alpha=args.alpha)
        selection = forward_select(data, config)
        print(selection.format_table())
        cols = selection.selected

    sub = Dataset(data.X[:, cols], y, [data.column_names[c] for c in cols])
    priors = _parse_priors(args.priors, data.n_classes)
    try:
        model = fit_ulda(sub, priors=priors, solver=args.solver)
    except ValueError as exc:
        raise CliError(str(exc)) from exc

    costs = None
    if args.costs:
        costs = _read_costs(args.costs, data.n_classes)

    train_acc = float(np.mean(model.predict(sub.X) == y))
    bundle = {
        "format": "ulda-bundle",
        "version": BUNDLE_FORMAT_VERSION,
        "label": args.label,
        "model": model.to_json(),
        "recipe": recipe.to_json(),
        "selection": selection.to_json() if selection else None,
        "costs": costs.tolist() if costs is not None else None,
        "train_accuracy": train_acc,
    }
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(bundle), encoding="utf-8")
    print(f"wrote {out} (training accuracy {train_acc:.4f})", file=sys.stderr)
    return 0


def _load_bundle(path) -> dict:
    try:
        bundle = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise CliError(str(exc)) from exc
    except json.JSONDecodeError as exc:
        raise CliError(f"cannot parse model file {path}: {exc}") from exc
    if bundle.get("format") != "ulda-bundle":
        raise CliError(f"{path} is not a model bundle")
    return bundle


def cmd_predict(args) -> int:
    bundle = _load_bundle(args.model)
    model = UldaClassifier.from_json(bundle["model"])
    recipe = Recipe.from_json(bundle["recipe"])

    frame = _read_table(args.data)
    label = bundle.get("label")
    if label in frame.columns:
        frame = frame.drop(columns=[label])
    try:
        encoded = apply_recipe(recipe, frame)
    except ValueError as exc:
        raise CliError(str(exc)) from exc
    wanted = list(model.feature_names_in_)
    missing = [c for c in wanted if c not in encoded.columns]
    if missing:
        raise CliError(f"encoded data lacks model columns: {missing}")
    X = encoded[wanted].to_numpy()

    costs = None
    if args.costs:
        costs = _read_costs(args.costs, len(model.classes_))
    elif bundle.get("costs") is not None:
        costs = np.asarray(bundle["costs"], dtype=float)

    result = pd.DataFrame({"prediction": model.predict(X, costs=costs)})
    if args.posterior:
        posterior = model.predict_proba(X)
        for i, cls in enumerate(model.classes_):
            result[f"posterior_{cls}"] = posterior[:, i]
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    result.to_csv(out, index=False)
    print(f"wrote {out} ({len(result)} rows)", file=sys.stderr)
    return 0


def cmd_crossval(args) -> int:
    frame = _read_table(args.data)
    features, y = _split_features(frame, args.label, _parse_list(args.drop))
    n = len(frame)
    if args.folds > n:
        raise CliError(f"--folds {args.folds} exceeds the number of rows {n}")
    if args.folds < 2:
        raise CliError("--folds must be at least 2")
    cyclic = _parse_cyclic(args.cyclic)

    rng = np.random.default_rng(args.seed)
    idx = rng.permutation(n)
    rows = []
    for fold in range(args.folds):
        test = np.sort(idx[fold::args.folds])
        train = np.setdiff1d(idx, test)
        recipe = fit_recipe(features.iloc[train], cyclic=cyclic)
        enc_train = apply_recipe(recipe, features.iloc[train])
        enc_test = apply_recipe(recipe, features.iloc[test])
        data = Dataset(enc_train.to_numpy(), y[train], list(enc_train.columns))
        cols = list(range(data.n_features))
        if args.select != "none":
            config = SelectionConfig(criterion=Criterion(args.select), alpha=args.alpha)
            cols = forward_select(data, config).selected
        sub = Dataset(data.X[:, cols], y[train], [data.column_names[c] for c in cols])
        model = fit_ulda(sub, solver=args.solver)
        pred = model.predict(enc_test.to_numpy()[:, cols])
        acc = float(np.mean(pred == y[test]))
        rows.append((fold, len(test), len(cols), acc))
        print(f"fold {fold}: accuracy {acc:.4f} ({len(cols)} columns)", file=sys.stderr)

    frame_out = pd.DataFrame(rows, columns=["fold", "n_test", "n_columns", "accuracy"])
    mean_acc = float(frame_out["accuracy"].mean())
    frame_out = pd.concat([
        frame_out,
        pd.DataFrame([{"fold": "mean", "n_test": n,
                       "n_columns": float(frame_out["n_columns"].mean()),
                       "accuracy": mean_acc}]),
    ], ignore_index=True)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    frame_out.to_csv(out, index=False)
    print(f"mean accuracy {mean_acc:.4f}")
    return 0


def cmd_simulate(args) -> int:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    m_list = [int(m) for m in _parse_list(args.m_list)] or None
    if args.scenario == "partial-f":
        reps = args.reps or 10_000
        experiments.sim_partial_f(reps=reps, seed=args.seed, out_dir=out_dir)
    elif args.scenario == "type1":
        reps = args.reps or 2000
        scenarios = (["iris-plus-noise", "pure-noise"]
                     if args.type1_scenario == "both" else [args.type1_scenario])
        for scenario in scenarios:
            experiments.sim_type1(scenario=scenario,
                                  m_list=m_list or experiments.TYPE1_M_GRID,
                                  reps=reps, seed=args.seed, out_dir=out_dir)
    elif args.scenario == "lambda-zero":
        experiments.sim_lambda_zero(seed=args.seed, out_dir=out_dir)
    elif args.scenario == "bench":
        reps = args.reps or 30
        experiments.bench_ulda(m_list=m_list or experiments.BENCH_M_GRID,
                               reps=reps, seed=args.seed, out_dir=out_dir)
    else:  # pragma: no cover - argparse restricts choices
        raise CliError(f"unknown scenario {args.scenario!r}")
    print(f"experiment outputs written under {out_dir}", file=sys.stderr)
    return 0


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ulda",
        description="Discriminant analysis with Pillai-trace forward selection",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common_fit_flags(p):
        p.add_argument("--data", required=True, help="input CSV")
        p.add_argument("--label", required=True, help="label column name")
        p.add_argument("--select", default="pillai",
                       choices=["pillai", "wilks", "wilks-bonferroni", "none"])
        p.add_argument("--alpha", type=_alpha, default=0.05)
        p.add_argument("--cyclic", action="append", metavar="COL[:PERIOD]",
                       help="cyclic columns, comma-separated; default period 360")
        p.add_argument("--drop", action="append", metavar="COLS",
                       help="feature columns to ignore, comma-separated")
        p.add_argument("--solver", default="qr", choices=["qr", "gsvd"])

    p_train = sub.add_parser("train", help="fit a model (optionally with selection)")
    add_common_fit_flags(p_train)
    p_train.add_argument("--priors", default="empirical",
                         help='"empirical" or comma-separated values per class')
    p_train.add_argument("--costs", help="CSV with a JxJ misclassification cost matrix")
    p_train.add_argument("--out", required=True, help="output model JSON")
    p_train.set_defaults(func=cmd_train)

    p_pred = sub.add_parser("predict", help="predict labels with a trained model")
    p_pred.add_argument("--model", required=True)
    p_pred.add_argument("--data", required=True)
    p_pred.add_argument("--posterior", action="store_true",
                        help="include posterior probability columns")
    p_pred.add_argument("--costs", help="override the stored cost matrix")
    p_pred.add_argument("--out", required=True)
    p_pred.set_defaults(func=cmd_predict)

    p_cv = sub.add_parser("crossval", help="k-fold cross-validated accuracy")
    add_common_fit_flags(p_cv)
    p_cv.add_argument("--folds", type=int, default=10)
    p_cv.add_argument("--seed", type=int, default=42)
    p_cv.add_argument("--out", required=True)
    p_cv.set_defaults(func=cmd_crossval)

    p_sim = sub.add_parser("simulate", help="run a Monte-Carlo experiment")
    p_sim.add_argument("--scenario", required=True,
                       choices=["partial-f", "type1", "lambda-zero", "bench"])
    p_sim.add_argument("--seed", type=int, default=42)
    p_sim.add_argument("--reps", type=int)
    p_sim.add_argument("--m-list", action="append",
                       help="feature counts, comma-separated")
    p_sim.add_argument("--type1-scenario", default="both",
                       choices=["iris-plus-noise", "pure-noise", "both"])
    p_sim.add_argument("--out-dir", required=True)
    p_sim.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
