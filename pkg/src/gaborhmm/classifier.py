"""Nearest-mean classification of decoded state paths."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import DataError

MEASURES = ("l2", "mahalanobis", "cosine", "l1")
COVARIANCE_MODES = ("diagonal", "full")


def _as_path_array(path) -> np.ndarray:
    values = getattr(path, "states", path)
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError("path must be a non-empty 1-d vector")
    return arr


@dataclass
class ClassModel:
    class_id: str
    mean_path: np.ndarray
    n_train: int

    def __post_init__(self) -> None:
        self.mean_path = np.asarray(self.mean_path, dtype=np.float64)


@dataclass
class ClassifierState:
    """Fitted class means plus the shared dispersion estimate.

    Scores are distances: smaller always means more similar, for every
    measure (cosine similarity is negated to keep that convention).
    """

    classes: list[ClassModel]
    measure: str
    pooled_var: np.ndarray | None = None
    cov_chol: np.ndarray | None = field(default=None, repr=False)

    def class_ids(self) -> list[str]:
        return [c.class_id for c in self.classes]


def dist(
    x,
    y,
    measure: str = "mahalanobis",
    pooled_var: np.ndarray | None = None,
) -> float:
    """Distance between two equal-length path vectors.

    l2 is the squared Euclidean distance, l1 the absolute-difference sum,
    mahalanobis the squared distance under a diagonal covariance given by
    pooled_var, cosine the negated cosine similarity.
    """
    xv = _as_path_array(x)
    yv = _as_path_array(y)
    if xv.shape != yv.shape:
        raise ValueError(f"length mismatch: {xv.shape} vs {yv.shape}")
    # l2 and mahalanobis share one accumulation so unit variances reduce
    # the latter to the former bit for bit
    if measure == "l2":
        d = xv - yv
        return float((d * d).sum())
    if measure == "l1":
        return float(np.abs(xv - yv).sum())
    if measure == "mahalanobis":
        if pooled_var is None:
            raise ValueError("mahalanobis distance requires pooled_var")
        var = np.asarray(pooled_var, dtype=np.float64)
        if var.shape != xv.shape:
            raise ValueError(f"pooled_var shape {var.shape} does not match {xv.shape}")
        d = xv - yv
        return float((d * d / var).sum())
    if measure == "cosine":
        nx = float(np.linalg.norm(xv))
        ny = float(np.linalg.norm(yv))
        if nx == 0.0 or ny == 0.0:
            raise ValueError("cosine distance undefined for zero vectors")
        return float(-(xv @ yv) / (nx * ny))
    raise ValueError(f"unknown measure {measure!r}, expected one of {MEASURES}")


def fit(
    paths_by_class: Mapping[str, Sequence],
    measure: str = "mahalanobis",
    var_floor: float = 1e-6,
    covariance: str = "diagonal",
    ridge: float = 1e-6,
) -> ClassifierState:
    """Average the training paths of each class into its mean vector.

    The pooled per-dimension variance of all training paths around their
    class means (floored at var_floor) backs the mahalanobis measure; with
    covariance="full" a ridge-regularized full covariance is used instead.
    """
    if measure not in MEASURES:
        raise ValueError(f"unknown measure {measure!r}, expected one of {MEASURES}")
    if covariance not in COVARIANCE_MODES:
        raise ValueError(f"covariance must be one of {COVARIANCE_MODES}")
    if not paths_by_class:
        raise DataError("no training classes given")

    length: int | None = None
    classes: list[ClassModel] = []
    residuals: list[np.ndarray] = []
    for class_id in sorted(paths_by_class):
        vectors = [_as_path_array(p) for p in paths_by_class[class_id]]
        if not vectors:
            raise DataError(f"class {class_id!r} has no training paths")
        for v in vectors:
            if length is None:
                length = v.size
            elif v.size != length:
                raise DataError(
                    f"class {class_id!r} path length {v.size} != expected {length}"
                )
        stack = np.stack(vectors)
        mean = stack.mean(axis=0)
        classes.append(ClassModel(class_id=class_id, mean_path=mean, n_train=len(vectors)))
        residuals.append(stack - mean)

    spread = np.concatenate(residuals, axis=0)
    pooled_var = np.maximum(np.mean(spread * spread, axis=0), var_floor)

    cov_chol = None
    if covariance == "full":
        cov = (spread.T @ spread) / spread.shape[0]
        cov[np.diag_indices_from(cov)] += ridge
        cov_chol = np.linalg.cholesky(cov)

    return ClassifierState(
        classes=classes, measure=measure, pooled_var=pooled_var, cov_chol=cov_chol
    )


def _full_cov_dist(state: ClassifierState, xv: np.ndarray, yv: np.ndarray) -> float:
    d = xv - yv
    w = np.linalg.solve(state.cov_chol, d)
    return float(w @ w)


def score_table(state: ClassifierState, path) -> np.ndarray:
    """Distance from the path to every class mean, in class order."""
    xv = _as_path_array(path)
    scores = np.empty(len(state.classes))
    for i, model in enumerate(state.classes):
        if state.cov_chol is not None and state.measure == "mahalanobis":
            scores[i] = _full_cov_dist(state, xv, model.mean_path)
        else:
            scores[i] = dist(xv, model.mean_path, state.measure, state.pooled_var)
    return scores


def classify(path, state: ClassifierState) -> tuple[str, np.ndarray]:
    """Nearest class id and the full score table.

    Equal scores resolve to the first class in sorted-id order.
    """
    scores = score_table(state, path)
    best = int(scores.argmin())
    return state.classes[best].class_id, scores
