"""Bundled data fixtures."""

from importlib import resources

import pandas as pd

__all__ = ["load_iris_frame", "load_iris_arrays"]


def load_iris_frame() -> pd.DataFrame:
    """The canonical 150x4 iris table with a ``species`` label column."""
    with resources.files("ulda.data").joinpath("iris.csv").open("rb") as fh:
        return pd.read_csv(fh)


def load_iris_arrays():
    """Iris as ``(X, y, feature_names)``."""
    frame = load_iris_frame()
    y = frame["species"].to_numpy()
    X = frame.drop(columns=["species"])
    return X.to_numpy(dtype=float), y, list(X.columns)
