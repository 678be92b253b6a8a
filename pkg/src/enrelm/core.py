"""Data-dependent hidden weights from the kernel eigenbasis and the output-layer fitters.

Construction: decompose the hidden-feature Gram matrix as U diag(d) U.T, then
recover a weight matrix whose erf features reproduce the eigenvector columns
as closely as the row space of the inputs allows. Output weights are fitted
either by projecting the targets on U (approximated variant) or by forward
stagewise regression on the realized features (incremental variant).
"""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError, ZeroVarianceError
from .numerics import erf, erf_inv, row_space_projector_apply

__all__ = [
    "Preprocess",
    "EnrModel",
    "ErrorCurve",
    "fit_preprocess",
    "compute_hidden_weights",
    "order_by_information",
    "fit_approximated",
    "fit_incremental",
    "hidden_features",
    "error_curve",
    "predict",
    "predict_batch",
    "default_max_neurons",
    "curvature_selection",
]

log = logging.getLogger(__name__)

DEFAULT_EPS = 0.1
DEFAULT_TOLL = 1e-4
MAX_ITER_FACTOR = 100


@dataclass(frozen=True)
class Preprocess:
    """Standardization statistics fitted on the training split only."""

    feature_means: np.ndarray
    feature_stds: np.ndarray
    target_mean: float

    def transform_inputs(self, x):
        x = np.asarray(x, dtype=np.float64)
        if x.shape[0] != self.feature_means.shape[0]:
            raise ValueError(
                f"expected {self.feature_means.shape[0]} features, got {x.shape[0]}"
            )
        return (x - self.feature_means[:, None]) / self.feature_stds[:, None]

    def center_targets(self, y):
        return np.asarray(y, dtype=np.float64) - self.target_mean


def fit_preprocess(x_train, y_train, min_std: float = 1e-12) -> Preprocess:
    """Per-feature mean/std of the training inputs and the training target mean.

    Features with standard deviation below ``min_std`` are rejected with
    their indices, since they cannot be scaled to unit variance.
    """
    x = np.asarray(x_train, dtype=np.float64)
    y = np.asarray(y_train, dtype=np.float64)
    if x.ndim != 2:
        raise ValueError("x_train must be a matrix with one data point per column")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise DataError("training data contains non-finite entries")
    means = x.mean(axis=1)
    stds = x.std(axis=1)
    bad = np.nonzero(stds < min_std)[0]
    if bad.size:
        raise ZeroVarianceError(
            f"features {bad.tolist()} have (near-)zero variance on the training split"
        )
    return Preprocess(
        feature_means=means, feature_stds=stds, target_mean=float(y.mean())
    )


@dataclass
class EnrModel:
    """A nested family of fitted models, one hidden neuron added at a time.

    ``w_hat`` holds one selected neuron per row (selection order), ``beta_hat``
    the matching output weights and ``j_hat`` the original eigenvector column
    indices. ``s_means`` are the training means of the selected feature
    columns; ``None`` means features are used raw at evaluation time.
    """

    w_hat: np.ndarray
    beta_hat: np.ndarray
    j_hat: np.ndarray
    target_mean: float
    variant: str
    s_means: np.ndarray | None = None
    stop_index: int | None = None
    stop_reason: str | None = None
    residual_history: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        self.w_hat = np.asarray(self.w_hat, dtype=np.float64)
        self.beta_hat = np.asarray(self.beta_hat, dtype=np.float64)
        self.j_hat = np.asarray(self.j_hat, dtype=np.int64)
        k = self.w_hat.shape[0]
        if self.beta_hat.shape[0] != k or self.j_hat.shape[0] != k:
            raise ValueError("w_hat rows, beta_hat and j_hat lengths must agree")
        if np.unique(self.j_hat).size != k:
            raise ValueError("j_hat contains duplicate neuron indices")

    @property
    def n_neurons(self) -> int:
        return self.w_hat.shape[0]


@dataclass(frozen=True)
class ErrorCurve:
    """Normalized RMSE after each added neuron.

    ``errs`` normalizes by the norm of the centered targets; ``errs_raw`` by
    the norm of the raw targets. Numerators are identical.
    """

    errs: np.ndarray
    errs_raw: np.ndarray
    split_label: str

    def __len__(self) -> int:
        return self.errs.shape[0]


def compute_hidden_weights(x_std, u, clamp: float = 1e-12):
    """Weight matrix whose erf features best match the eigenvector columns.

    Row j solves min_w ||erf(w @ x_std) - u[:, j]||^2 over the row space of
    ``x_std``. Eigenvector entries are clamped into [-1 + clamp, 1 - clamp]
    before inversion so the entrywise erf inverse stays finite.
    """
    x_std = np.asarray(x_std, dtype=np.float64)
    u = np.asarray(u, dtype=np.float64)
    if u.shape[0] != x_std.shape[1]:
        raise ValueError(
            f"u has {u.shape[0]} rows but x_std has {x_std.shape[1]} data points"
        )
    targets = erf_inv(np.clip(u.T, -1.0 + clamp, 1.0 - clamp))
    return row_space_projector_apply(x_std, targets)


def order_by_information(u, y):
    """Eigenvector column indices sorted by |<y, column>|, largest first.

    Ties break toward the smaller original index so the ordering is
    deterministic.
    """
    u = np.asarray(u, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    scores = np.abs(u.T @ y)
    return np.argsort(-scores, kind="stable")


def fit_approximated(
    y,
    u,
    n: int,
    w_hat_full,
    *,
    target_mean: float = 0.0,
    candidate_s_means=None,
) -> EnrModel:
    """Output weights by projecting the centered targets onto eigenvectors.

    The first ``n`` columns in information order are kept; since the columns
    are orthonormal the least-squares coefficients are plain inner products.
    """
    y = np.asarray(y, dtype=np.float64)
    u = np.asarray(u, dtype=np.float64)
    w_hat_full = np.asarray(w_hat_full, dtype=np.float64)
    t = u.shape[0]
    if not 1 <= n <= t:
        raise ValueError(f"n must be in [1, {t}], got {n}")
    order = order_by_information(u, y)
    j = order[:n]
    beta = u[:, j].T @ y
    s_means = None
    if candidate_s_means is not None:
        s_means = np.asarray(candidate_s_means, dtype=np.float64)[j]
    return EnrModel(
        w_hat=w_hat_full[j],
        beta_hat=beta,
        j_hat=j,
        target_mean=float(target_mean),
        variant="approximated",
        s_means=s_means,
    )


def fit_incremental(
    y,
    s,
    n: int,
    toll: float = DEFAULT_TOLL,
    eps: float = DEFAULT_EPS,
    w_hat_full=None,
    *,
    target_mean: float = 0.0,
    candidate_s_means=None,
    max_iter: int | None = None,
) -> EnrModel:
    """Forward stagewise regression of the centered targets on feature columns.

    Each iteration picks the column most correlated with the residual
    (smallest index wins ties), moves its coefficient by an eps fraction of
    the univariate least-squares step, and stops when the relative drop of
    the residual norm falls below ``toll``, when taking a new column would
    exceed the budget ``n``, or at the iteration cap.

    ``s`` must hold centered columns; its pre-centering means, if any, are
    passed via ``candidate_s_means`` so they can be stored on the model.
    """
    y = np.asarray(y, dtype=np.float64)
    s = np.asarray(s, dtype=np.float64)
    w_hat_full = np.asarray(w_hat_full, dtype=np.float64)
    if s.shape[0] != y.shape[0]:
        raise ValueError("s rows must match the number of targets")
    if not toll >= 0:
        raise ValueError("toll must be nonnegative")
    if not 0.0 < eps <= 1.0:
        raise ValueError("eps must be in (0, 1]")
    n_cand = s.shape[1]
    if not 1 <= n <= n_cand:
        raise ValueError(f"n must be in [1, {n_cand}], got {n}")
    if max_iter is None:
        max_iter = MAX_ITER_FACTOR * n

    def _empty(reason):
        warnings.warn(f"incremental fit produced an empty model: {reason}")
        j = np.empty(0, dtype=np.int64)
        return EnrModel(
            w_hat=w_hat_full[j],
            beta_hat=np.empty(0),
            j_hat=j,
            target_mean=float(target_mean),
            variant="incremental",
            s_means=None if candidate_s_means is None else np.empty(0),
            stop_index=0,
            stop_reason=reason,
            residual_history=np.empty(0),
        )

    norms_sq = np.einsum("ij,ij->j", s, s)
    usable = norms_sq > 0.0
    if not usable.any():
        return _empty("all candidate columns are zero")
    y_norm = float(np.linalg.norm(y))
    if y_norm == 0.0:
        return _empty("target vector has zero norm")

    beta_acc = np.zeros(n_cand)
    y_hat = np.full(y.shape[0], y.mean())
    r = y - y_hat
    r_old_norm = float(np.linalg.norm(np.full(y.shape[0], 1e10)))
    selected = np.zeros(n_cand, dtype=bool)
    j_order: list[int] = []
    history: list[float] = []
    stop_reason = "cap"
    for _ in range(max_iter):
        scores = np.abs(s.T @ r)
        scores[~usable] = -1.0
        j_star = int(np.argmax(scores))
        corr = float(s[:, j_star] @ r)
        if corr == 0.0:
            stop_reason = "exhausted"
            break
        if not selected[j_star] and len(j_order) == n:
            stop_reason = "budget"
            break
        step = eps * corr / norms_sq[j_star]
        delta = step * s[:, j_star]
        beta_acc[j_star] += step
        y_hat = y_hat + delta
        r = r - delta
        if not selected[j_star]:
            selected[j_star] = True
            j_order.append(j_star)
        r_norm = float(np.linalg.norm(r))
        history.append(r_norm)
        if (r_old_norm - r_norm) / y_norm < toll:
            stop_reason = "toll"
            break
        r_old_norm = r_norm
    j = np.asarray(j_order, dtype=np.int64)
    s_means = None
    if candidate_s_means is not None:
        s_means = np.asarray(candidate_s_means, dtype=np.float64)[j]
    return EnrModel(
        w_hat=w_hat_full[j],
        beta_hat=beta_acc[j],
        j_hat=j,
        target_mean=float(target_mean),
        variant="incremental",
        s_means=s_means,
        stop_index=len(j_order),
        stop_reason=stop_reason,
        residual_history=np.asarray(history),
    )


def hidden_features(w, x_std):
    """Feature matrix erf(w @ x_std).T, one row per data point."""
    return erf(np.asarray(w, dtype=np.float64) @ np.asarray(x_std, dtype=np.float64)).T


def error_curve(y_raw, x_raw, model: EnrModel, prep: Preprocess, split_label: str) -> ErrorCurve:
    """Normalized RMSE after each neuron, on raw data transformed by ``prep``.

    Features are centered with the training feature means stored on the model
    (used raw when the model has none), and predictions start from the
    training target mean. A model with zero neurons yields the single-entry
    curve of the mean predictor.
    """
    x_raw = np.asarray(x_raw, dtype=np.float64)
    y_raw = np.asarray(y_raw, dtype=np.float64)
    if x_raw.shape[1] != y_raw.shape[0]:
        raise ValueError("x_raw columns must match the number of targets")
    if model.n_neurons and model.w_hat.shape[1] != x_raw.shape[0]:
        raise ValueError(
            f"model expects {model.w_hat.shape[1]} features, data has {x_raw.shape[0]}"
        )
    x_std = prep.transform_inputs(x_raw)
    y_c = y_raw - prep.target_mean
    norm_c = float(np.linalg.norm(y_c))
    norm_raw = float(np.linalg.norm(y_raw))
    if norm_c == 0.0 or norm_raw == 0.0:
        raise DataError(f"target norm is zero on the {split_label} split")
    if model.n_neurons == 0:
        base = float(np.linalg.norm(y_c))
        return ErrorCurve(
            errs=np.array([base / norm_c]),
            errs_raw=np.array([base / norm_raw]),
            split_label=split_label,
        )
    s = hidden_features(model.w_hat, x_std)
    if model.s_means is not None:
        s = s - model.s_means
    cum = np.cumsum(s * model.beta_hat, axis=1)
    resid = y_c[:, None] - cum
    nums = np.linalg.norm(resid, axis=0)
    return ErrorCurve(
        errs=nums / norm_c, errs_raw=nums / norm_raw, split_label=split_label
    )


def predict(x, model: EnrModel, prep: Preprocess) -> float:
    """Prediction for a single raw input vector."""
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    return float(predict_batch(x[:, None], model, prep)[0])


def predict_batch(x_cols, model: EnrModel, prep: Preprocess):
    """Predictions for raw inputs arranged one per column."""
    x_cols = np.asarray(x_cols, dtype=np.float64)
    if model.n_neurons == 0:
        return np.full(x_cols.shape[1], model.target_mean)
    if model.w_hat.shape[1] != x_cols.shape[0]:
        raise ValueError(
            f"model expects {model.w_hat.shape[1]} features, data has {x_cols.shape[0]}"
        )
    s = hidden_features(model.w_hat, prep.transform_inputs(x_cols))
    if model.s_means is not None:
        s = s - model.s_means
    return model.target_mean + s @ model.beta_hat


def default_max_neurons(n0: int, t_train: int) -> int:
    """Default neuron budget: min(50 * n0, floor(t_train / 2))."""
    return min(50 * n0, t_train // 2)


def curvature_selection(errs) -> int | None:
    """Neuron count at the largest second difference of an error curve.

    An optional alternative to the curve minimum; returns None for curves
    too short to have an interior point.
    """
    errs = np.asarray(errs, dtype=np.float64)
    if errs.shape[0] < 3:
        return None
    d2 = errs[2:] - 2.0 * errs[1:-1] + errs[:-2]
    return int(np.argmax(d2)) + 2
