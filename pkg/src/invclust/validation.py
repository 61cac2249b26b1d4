"""Input validation helpers shared by the estimators, pipelines and CLI."""

from __future__ import annotations

import numpy as np

L1 = "l1"
LINF = "linf"
_NORMS = (L1, LINF)


def as_float_vector(v, name: str = "vector") -> np.ndarray:
    arr = np.asarray(v, dtype=float).ravel()
    if arr.size == 0:
        raise ValueError(f"{name} must be non-empty")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must have finite entries")
    return arr


def check_norm(norm: str) -> str:
    if norm not in _NORMS:
        raise ValueError(f"norm must be one of {_NORMS}, got {norm!r}")
    return norm


def check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie strictly between 0 and 1, got {alpha}")
    return alpha


def check_cost_vector(c, tol: float = 1e-6) -> np.ndarray:
    c = as_float_vector(c, "cost vector")
    norm1 = float(np.sum(np.abs(c)))
    if abs(norm1 - 1.0) > tol:
        raise ValueError(f"cost vector must have unit L1 norm, got {norm1}")
    return c


def normalize_cost(c) -> np.ndarray:
    """Rescale a nonzero vector to unit L1 norm."""
    c = as_float_vector(c, "cost vector")
    norm1 = float(np.sum(np.abs(c)))
    if norm1 <= 0.0:
        raise ValueError("cannot normalize the zero vector")
    return c / norm1


def check_dataset(data):
    """Coerce a Dataset, a JSON-style dict, or a path into a Dataset."""
    from invclust.model import Dataset

    if isinstance(data, Dataset):
        return data
    if isinstance(data, dict):
        return Dataset.from_json_dict(data)
    if isinstance(data, (str,)) or hasattr(data, "__fspath__"):
        return Dataset.load(data)
    raise TypeError(f"cannot interpret {type(data).__name__} as a Dataset")
