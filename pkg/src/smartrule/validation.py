"""Input checks shared by the estimators."""
from __future__ import annotations

import numpy as np
from sklearn.utils.validation import check_array, check_consistent_length


def check_positions(X, name: str = "X") -> np.ndarray:
    """Return circle positions as a flat float array.

    Accepts a 1-d array or a single-column 2-d array. Every value must lie in
    ``[0, 1)``.
    """
    arr = np.asarray(X)
    if arr.ndim == 2 and arr.shape[1] != 1:
        raise ValueError(f"{name} must have exactly one feature (a circle position), got {arr.shape[1]}")
    arr = check_array(arr.reshape(-1, 1), dtype=np.float64, ensure_all_finite=True,
                      input_name=name).ravel()
    if np.any(arr < 0.0) or np.any(arr >= 1.0):
        raise ValueError(f"{name} values must lie in [0, 1)")
    return arr


def check_binary_labels(y, name: str = "y") -> np.ndarray:
    arr = np.asarray(y).ravel()
    if arr.size and not np.all(np.isin(arr, (0, 1))):
        raise ValueError(f"{name} must contain only 0 and 1")
    return arr.astype(np.int8)


def check_labeled(X, y):
    x = check_positions(X)
    labels = check_binary_labels(y)
    check_consistent_length(x, labels)
    if x.size == 0:
        raise ValueError("need at least one labelled point")
    return x, labels
