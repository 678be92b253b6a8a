"""Traditional random-weight extreme learning machine and its error-curve sweep."""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.linalg import lapack

from .errors import RankDeficiencyError
from .numerics import erf

__all__ = [
    "ElmModel",
    "ElmSweep",
    "sample_weights",
    "fit_ols",
    "fit_ridge",
    "elm_error_sweep",
]

log = logging.getLogger(__name__)

COND_LIMIT = 1e10


def sample_weights(n: int, n0: int, seed):
    """Random hidden weights, i.i.d. N(0, 1/n0), deterministic per seed."""
    if n < 1 or n0 < 1:
        raise ValueError("n and n0 must be at least 1")
    rng = np.random.default_rng(seed)
    return rng.normal(0.0, 1.0 / np.sqrt(n0), size=(n, n0))


def _chol_solve_rcond(g, rhs):
    """Cholesky solve of an SPD system plus a reciprocal condition estimate.

    Returns (None, 0.0) when the matrix is not positive definite.
    """
    anorm = float(np.abs(g).sum(axis=0).max())
    c, info = lapack.dpotrf(g, lower=0)
    if info != 0:
        return None, 0.0
    rcond, info = lapack.dpocon(c, anorm, uplo="U")
    if info != 0:
        return None, 0.0
    sol, info = lapack.dpotrs(c, rhs[:, None], lower=0)
    if info != 0:
        return None, 0.0
    return sol[:, 0], float(rcond)


def fit_ols(s, y, cond_limit: float = COND_LIMIT):
    """Ordinary least squares via the normal equations.

    Raises :class:`RankDeficiencyError` when the feature Gram matrix fails a
    condition estimate, in which case the caller should use ridge instead.
    """
    s = np.asarray(s, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    g = s.T @ s
    b = s.T @ y
    sol, rcond = _chol_solve_rcond(g, b)
    if sol is None or rcond < 1.0 / cond_limit:
        raise RankDeficiencyError(
            f"feature Gram matrix condition estimate exceeds {cond_limit:.1e}"
        )
    return sol


def fit_ridge(s, y, ridge_lambda: float, mode: str = "auto"):
    """Ridge regression in whichever of the two equivalent forms is cheaper.

    The feature-space form solves an n x n system, the sample-space form a
    T x T system; ``auto`` picks by the smaller dimension. Both produce the
    same coefficients up to roundoff.
    """
    if not ridge_lambda > 0:
        raise ValueError("ridge_lambda must be positive")
    s = np.asarray(s, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    t, n = s.shape
    if mode not in ("auto", "primal", "dual"):
        raise ValueError(f"unknown mode {mode!r}")
    use_primal = mode == "primal" or (mode == "auto" and n <= t)
    if use_primal:
        g = s.T @ s + ridge_lambda * np.eye(n)
        return np.linalg.solve(g, s.T @ y)
    g = s @ s.T + ridge_lambda * np.eye(t)
    return s.T @ np.linalg.solve(g, y)


@dataclass(frozen=True)
class ElmModel:
    """One fitted random-feature regressor."""

    w: np.ndarray
    beta: np.ndarray
    ridge_lambda: float
    seed: int


def fit_elm(x_std, y_c, n: int, seed, ridge_lambda=None) -> ElmModel:
    """Sample ``n`` hidden neurons and fit the output layer."""
    x_std = np.asarray(x_std, dtype=np.float64)
    w = sample_weights(n, x_std.shape[0], seed)
    s = erf(w @ x_std).T
    if ridge_lambda is not None and ridge_lambda > 0:
        beta = fit_ridge(s, y_c, ridge_lambda)
        lam = float(ridge_lambda)
    else:
        try:
            beta = fit_ols(s, y_c)
            lam = 0.0
        except RankDeficiencyError:
            lam = 1e-8 * float(np.trace(s.T @ s)) / n
            beta = fit_ridge(s, y_c, lam)
    return ElmModel(w=w, beta=beta, ridge_lambda=lam, seed=seed)


@dataclass(frozen=True)
class ElmSweep:
    """Aggregated error curves of independent sweep realizations."""

    train_mean: np.ndarray
    train_min: np.ndarray
    train_max: np.ndarray
    test_mean: np.ndarray
    test_min: np.ndarray
    test_max: np.ndarray
    train_per_real: np.ndarray
    test_per_real: np.ndarray
    n_max: int
    realizations: int
    seed: int
    fallback_count: int


def _solve_policy(g, b, ridge_lambda):
    """Output-layer solve for one neuron count.

    ``None`` selects OLS when the condition estimate allows it and otherwise
    ridge with lambda = 1e-8 * trace / n; an explicit 0.0 forces OLS with a
    jitter ladder only if the factorization fails outright; a positive value
    forces ridge. Returns (solution, used_fallback).
    """
    n = g.shape[0]
    if ridge_lambda is not None and ridge_lambda > 0:
        return np.linalg.solve(g + ridge_lambda * np.eye(n), b), False
    sol, rcond = _chol_solve_rcond(g, b)
    if sol is not None and (ridge_lambda == 0.0 or rcond >= 1.0 / COND_LIMIT):
        return sol, False
    lam = 1e-8 * float(np.trace(g)) / n
    if lam <= 0.0:
        lam = 1e-12
    for _ in range(4):
        try:
            sol = np.linalg.solve(g + lam * np.eye(n), b)
            return sol, True
        except np.linalg.LinAlgError:
            lam *= 10.0
    raise RankDeficiencyError("ridge fallback failed even with jittered lambda")


def elm_error_sweep(
    x_train,
    y_train,
    x_test,
    y_test,
    n_max: int,
    realizations: int = 20,
    seed: int = 0,
    ridge_lambda=None,
    nested: bool = True,
    threads: int = 1,
) -> ElmSweep:
    """Normalized train/test error for every neuron count, over realizations.

    Inputs are standardized features (one data point per column) and centered
    targets. With ``nested`` each realization draws a single n_max-row weight
    matrix and truncates it, so curves within a realization are nested; the
    alternative resamples weights fresh at every n. Realization r uses seed
    ``seed + r`` and results are reduced in realization order, so the output
    is deterministic regardless of thread count.
    """
    x_train = np.asarray(x_train, dtype=np.float64)
    x_test = np.asarray(x_test, dtype=np.float64)
    y_train = np.asarray(y_train, dtype=np.float64)
    y_test = np.asarray(y_test, dtype=np.float64)
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    if realizations < 1:
        raise ValueError("realizations must be at least 1")
    n0 = x_train.shape[0]
    norm_tr = float(np.linalg.norm(y_train))
    norm_te = float(np.linalg.norm(y_test))
    if norm_tr == 0.0 or norm_te == 0.0:
        raise ValueError("target norms must be nonzero")

    def one_realization(r):
        tr_errs = np.empty(n_max)
        te_errs = np.empty(n_max)
        fallbacks = 0
        if nested:
            # One sampling pass per realization; every n is still an
            # independent model fit on the first n features.
            w = sample_weights(n_max, n0, seed + r)
            s_tr = erf(w @ x_train).T
            s_te = erf(w @ x_test).T
            for n in range(1, n_max + 1):
                s_n = s_tr[:, :n]
                beta, fell = _solve_policy(s_n.T @ s_n, s_n.T @ y_train, ridge_lambda)
                fallbacks += fell
                tr_errs[n - 1] = np.linalg.norm(y_train - s_n @ beta) / norm_tr
                te_errs[n - 1] = np.linalg.norm(y_test - s_te[:, :n] @ beta) / norm_te
        else:
            for n in range(1, n_max + 1):
                w = sample_weights(n, n0, np.random.SeedSequence((seed, r, n)))
                s_tr = erf(w @ x_train).T
                s_te = erf(w @ x_test).T
                beta, fell = _solve_policy(
                    s_tr.T @ s_tr, s_tr.T @ y_train, ridge_lambda
                )
                fallbacks += fell
                tr_errs[n - 1] = np.linalg.norm(y_train - s_tr @ beta) / norm_tr
                te_errs[n - 1] = np.linalg.norm(y_test - s_te @ beta) / norm_te
        return tr_errs, te_errs, fallbacks

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one_realization, range(realizations)))
    else:
        results = [one_realization(r) for r in range(realizations)]
    train_mat = np.stack([res[0] for res in results])
    test_mat = np.stack([res[1] for res in results])
    fallback_count = sum(res[2] for res in results)
    if fallback_count:
        log.info("elm sweep used the ridge fallback %d times", fallback_count)
    return ElmSweep(
        train_mean=train_mat.mean(axis=0),
        train_min=train_mat.min(axis=0),
        train_max=train_mat.max(axis=0),
        test_mean=test_mat.mean(axis=0),
        test_min=test_mat.min(axis=0),
        test_max=test_mat.max(axis=0),
        train_per_real=train_mat,
        test_per_real=test_mat,
        n_max=n_max,
        realizations=realizations,
        seed=seed,
        fallback_count=fallback_count,
    )
