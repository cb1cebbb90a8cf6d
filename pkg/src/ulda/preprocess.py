"""Table-to-matrix preparation: imputation, one-hot and cyclic encoding.

A recipe is fitted on the training table only and is pure data: applying
it to any table with the same schema yields a numeric matrix with a fixed
set of output columns.  Numeric columns are median-imputed and gain a
missing indicator when the training data had gaps; categorical columns
are one-hot encoded over all training levels plus a synthetic "missing"
level when gaps were seen; angle-like columns are mapped to cosine/sine
pairs so wrap-around neighbours stay close.  Output columns that are
constant on the training table are dropped (they carry no scatter).
"""

import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

__all__ = [
    "NumericColumn",
    "CategoricalColumn",
    "CyclicColumn",
    "Recipe",
    "fit_recipe",
    "apply_recipe",
    "TableEncoder",
]

RECIPE_FORMAT_VERSION = 1

MISSING_LEVEL = "missing"


@dataclass
class NumericColumn:
    median: float
    add_missing_indicator: bool

    kind = "numeric"

    def output_names(self, name: str) -> list[str]:
        out = [name]
        if self.add_missing_indicator:
            out.append(f"{name}_missing")
        return out


@dataclass
class CategoricalColumn:
    levels: list[str]           # ordered; may end with the synthetic missing level

    kind = "categorical"

    def output_names(self, name: str) -> list[str]:
        return [f"{name}={level}" for level in self.levels]


@dataclass
class CyclicColumn:
    period: float
    median: float
    add_missing_indicator: bool

    kind = "cyclic"

    def output_names(self, name: str) -> list[str]:
        out = [f"{name}_cos", f"{name}_sin"]
        if self.add_missing_indicator:
            out.append(f"{name}_missing")
        return out


@dataclass
class Recipe:
    """Fitted per-column transforms plus the frozen output-column list."""

    columns: dict[str, NumericColumn | CategoricalColumn | CyclicColumn]
    output_names: list[str]
    dropped: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        cols = []
        for name, spec in self.columns.items():
            entry = {"name": name, "kind": spec.kind}
            if spec.kind == "numeric":
                entry.update(median=spec.median,
                             add_missing_indicator=spec.add_missing_indicator)
            elif spec.kind == "categorical":
                entry.update(levels=list(spec.levels))
            else:
                entry.update(period=spec.period, median=spec.median,
                             add_missing_indicator=spec.add_missing_indicator)
            cols.append(entry)
        return {"version": RECIPE_FORMAT_VERSION, "columns": cols,
                "output_names": list(self.output_names),
                "dropped": list(self.dropped)}

    @classmethod
    def from_json(cls, doc: dict) -> "Recipe":
        if doc.get("version") != RECIPE_FORMAT_VERSION:
            raise ValueError(f"unsupported recipe format version {doc.get('version')!r}")
        columns = {}
        for entry in doc["columns"]:
            kind = entry["kind"]
            if kind == "numeric":
                spec = NumericColumn(median=entry["median"],
                                     add_missing_indicator=entry["add_missing_indicator"])
            elif kind == "categorical":
                spec = CategoricalColumn(levels=list(entry["levels"]))
            elif kind == "cyclic":
                spec = CyclicColumn(period=entry["period"], median=entry["median"],
                                    add_missing_indicator=entry["add_missing_indicator"])
            else:
                raise ValueError(f"unknown column kind {kind!r}")
            columns[entry["name"]] = spec
        return cls(columns=columns, output_names=list(doc["output_names"]),
                   dropped=list(doc.get("dropped", [])))


def _numeric_values(col: pd.Series, name: str) -> tuple[np.ndarray, np.ndarray]:
    try:
        values = pd.to_numeric(col, errors="raise").to_numpy(dtype=float)
    except (ValueError, TypeError) as exc:
        raise ValueError(f"column {name!r} is not numeric") from exc
    return values, np.isnan(values)


def fit_recipe(table: pd.DataFrame, cyclic: dict[str, float] | None = None) -> Recipe:
    """Fit per-column transforms on a training table.

    ``cyclic`` maps column names to their period (e.g. 360 for degrees).
    Raises when a numeric column is entirely missing; drops output columns
    that end up constant on the training table, with a warning.
    """
    if table.shape[0] == 0 or table.shape[1] == 0:
        raise ValueError("cannot fit a recipe on an empty table")
    cyclic = dict(cyclic or {})
    unknown = set(cyclic) - set(table.columns)
    if unknown:
        raise ValueError(f"cyclic columns not in table: {sorted(unknown)}")

    columns: dict[str, object] = {}
    for name in table.columns:
        col = table[name]
        if name in cyclic:
            values, missing = _numeric_values(col, name)
            if missing.all():
                raise ValueError(f"numeric column {name!r} is entirely missing")
            columns[name] = CyclicColumn(period=float(cyclic[name]),
                                         median=float(np.nanmedian(values)),
                                         add_missing_indicator=bool(missing.any()))
        elif pd.api.types.is_numeric_dtype(col):
            values = col.to_numpy(dtype=float)
            missing = np.isnan(values)
            if missing.all():
                raise ValueError(f"numeric column {name!r} is entirely missing")
            columns[name] = NumericColumn(median=float(np.nanmedian(values)),
                                          add_missing_indicator=bool(missing.any()))
        else:
            isna = col.isna().to_numpy()
            levels: list[str] = []
            for v in col[~isna]:
                s = str(v)
                if s not in levels:
                    levels.append(s)
            if isna.any():
                levels.append(MISSING_LEVEL)
            if not levels:
                raise ValueError(f"column {name!r} is entirely missing")
            columns[name] = CategoricalColumn(levels=levels)

    recipe = Recipe(columns=columns, output_names=[])
    frame = _transform(recipe, table, warn_unseen=False)
    keep, dropped = [], []
    for out_name in frame.columns:
        if np.ptp(frame[out_name].to_numpy()) == 0.0:
            dropped.append(out_name)
        else:
            keep.append(out_name)
    if not keep:
        raise ValueError("every encoded column is constant on the training table")
    if dropped:
        warnings.warn(f"dropping constant encoded columns: {dropped}",
                      UserWarning, stacklevel=2)
    recipe.output_names = keep
    recipe.dropped = dropped
    return recipe


def _transform(recipe: Recipe, table: pd.DataFrame, warn_unseen: bool = True) -> pd.DataFrame:
    missing_cols = [c for c in recipe.columns if c not in table.columns]
    if missing_cols:
        raise ValueError(f"table is missing recipe columns: {missing_cols}")
    n = table.shape[0]
    out: dict[str, np.ndarray] = {}
    for name, spec in recipe.columns.items():
        col = table[name]
        if spec.kind == "numeric":
            values, missing = _numeric_values(col, name)
            values = np.where(missing, spec.median, values)
            out[name] = values
            if spec.add_missing_indicator:
                out[f"{name}_missing"] = missing.astype(float)
        elif spec.kind == "cyclic":
            values, missing = _numeric_values(col, name)
            values = np.where(missing, spec.median, values)
            angle = 2.0 * math.pi * values / spec.period
            out[f"{name}_cos"] = np.cos(angle)
            out[f"{name}_sin"] = np.sin(angle)
            if spec.add_missing_indicator:
                out[f"{name}_missing"] = missing.astype(float)
        else:
            isna = col.isna().to_numpy()
            as_str = np.array([MISSING_LEVEL if isna[i] else str(v)
                               for i, v in enumerate(col)], dtype=object)
            seen = np.isin(as_str, spec.levels)
            if warn_unseen and not seen.all():
                unseen = sorted(set(as_str[~seen]))
                warnings.warn(
                    f"column {name!r}: unseen levels {unseen} encoded as all zeros",
                    UserWarning, stacklevel=3,
                )
            for level in spec.levels:
                out[f"{name}={level}"] = (as_str == level).astype(float)
    return pd.DataFrame(out, index=range(n))


def apply_recipe(recipe: Recipe, table: pd.DataFrame) -> pd.DataFrame:
    """Apply a fitted recipe; the output frame always has the fitted columns.

    Unseen categorical levels (including apply-time gaps in columns that
    were complete at fit time) map to all-zeros with a warning.
    """
    frame = _transform(recipe, table)
    return frame[recipe.output_names]


class TableEncoder:
    """Estimator-style wrapper around :func:`fit_recipe`/:func:`apply_recipe`."""

    def __init__(self, cyclic: dict[str, float] | None = None):
        self.cyclic = cyclic

    def fit(self, X: pd.DataFrame, y=None):
        self.recipe_ = fit_recipe(X, cyclic=self.cyclic)
        return self

    def transform(self, X: pd.DataFrame) -> pd.DataFrame:
        if not hasattr(self, "recipe_"):
            raise RuntimeError("TableEncoder is not fitted")
        return apply_recipe(self.recipe_, X)

    def fit_transform(self, X: pd.DataFrame, y=None) -> pd.DataFrame:
        return self.fit(X, y).transform(X)

    def get_params(self, deep=True):
        return {"cyclic": self.cyclic}

    def set_params(self, **params):
        for k, v in params.items():
            setattr(self, k, v)
        return self
