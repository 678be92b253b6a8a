"""Benchmark engine: fit all three methods on one split and time each phase.

The reported total for each eigenbasis method covers kernel evaluation,
spectral decomposition, weight construction, output-layer fitting and both
error curves; the baseline total is the whole sweep. Wall-clock phases are
measured with a monotonic clock and summarized by the median over repeats.
Fitted results come from the first repeat (repeats only affect timings).
"""
from __future__ import annotations

import statistics
import time
from dataclasses import dataclass, field

import numpy as np

from . import core
from .core import (
    EnrModel,
    ErrorCurve,
    Preprocess,
    compute_hidden_weights,
    curvature_selection,
    default_max_neurons,
    error_curve,
    fit_approximated,
    fit_incremental,
    fit_preprocess,
    hidden_features,
)
from .data import Dataset
from .elm import ElmSweep, elm_error_sweep
from .errors import ConfigError
from .kernel import nngp_gram

__all__ = ["MethodResult", "BenchmarkResult", "run_benchmark", "METHODS"]

METHODS = ("aenr", "ienr", "elm")


@dataclass
class MethodResult:
    """Curves, selection and timing for one method on one dataset."""

    method: str
    train_curve: ErrorCurve
    test_curve: ErrorCurve
    selected_n: int
    selected_err: float
    curvature_n: int | None
    timings_ms: dict[str, float]
    extra: dict = field(default_factory=dict)

    @property
    def total_ms(self) -> float:
        return float(sum(self.timings_ms.values()))


@dataclass
class BenchmarkResult:
    dataset_name: str
    n_max: int
    seed: int
    prep: Preprocess
    methods: dict[str, MethodResult]
    models: dict[str, EnrModel]
    elm_sweep: ElmSweep | None


def _select_min(curve: ErrorCurve):
    idx = int(np.argmin(curve.errs))
    return idx + 1, float(curve.errs[idx])


class _Stopwatch:
    def __init__(self):
        self.phases: dict[str, float] = {}

    def run(self, phase, fn):
        t0 = time.perf_counter()
        out = fn()
        self.phases[phase] = (time.perf_counter() - t0) * 1e3
        return out


def _fit_enr_once(x_tr, y_tr_c, n_max, eps, toll, center_s, target_mean, max_iter):
    """One full eigenbasis pass; returns models, curve inputs and phase times."""
    watch = _Stopwatch()
    gram = watch.run("kernel", lambda: nngp_gram(x_tr))
    eig = watch.run("eigen", gram.eigendecompose)
    u = eig.vectors
    w_full = watch.run("weights", lambda: compute_hidden_weights(x_tr, u))
    def _afit():
        model = fit_approximated(y_tr_c, u, n_max, w_full, target_mean=target_mean)
        if center_s:
            model.s_means = hidden_features(model.w_hat, x_tr).mean(axis=0)
        return model

    model_a = watch.run("afit", _afit)

    def _ifit():
        s_full = hidden_features(w_full, x_tr)
        means = s_full.mean(axis=0)
        return fit_incremental(
            y_tr_c,
            s_full - means,
            n_max,
            toll,
            eps,
            w_full,
            target_mean=target_mean,
            candidate_s_means=means if center_s else None,
            max_iter=max_iter,
        )

    model_i = watch.run("ifit", _ifit)
    return model_a, model_i, gram, watch.phases


def run_benchmark(
    train: Dataset,
    test: Dataset,
    *,
    n_max: int | None = None,
    eps: float = core.DEFAULT_EPS,
    toll: float = core.DEFAULT_TOLL,
    ridge_lambda: float | None = None,
    realizations: int = 20,
    seed: int = 0,
    center_s: bool = True,
    nested_elm: bool = True,
    time_repeats: int = 3,
    threads: int = 1,
    methods=METHODS,
) -> BenchmarkResult:
    """Fit the requested methods on a prepared train/test split."""
    unknown = set(methods) - set(METHODS)
    if unknown:
        raise ConfigError(f"unknown methods {sorted(unknown)}")
    if time_repeats < 1:
        raise ConfigError("time_repeats must be at least 1")
    prep = fit_preprocess(train.x, train.y)
    x_tr = prep.transform_inputs(train.x)
    y_tr_c = prep.center_targets(train.y)
    if n_max is None:
        n_max = default_max_neurons(train.n_features, train.n_points)
    if not 1 <= n_max <= train.n_points:
        raise ConfigError(
            f"n_max must be in [1, {train.n_points}], got {n_max}"
        )
    max_iter = core.MAX_ITER_FACTOR * n_max

    results: dict[str, MethodResult] = {}
    models: dict[str, EnrModel] = {}
    sweep = None
    want_enr = "aenr" in methods or "ienr" in methods

    if want_enr:
        phase_samples: list[dict[str, float]] = []
        curve_samples: list[dict[str, float]] = []
        first = None
        for rep in range(time_repeats):
            model_a, model_i, gram, phases = _fit_enr_once(
                x_tr, y_tr_c, n_max, eps, toll, center_s, prep.target_mean, max_iter
            )
            watch = _Stopwatch()
            curves = {}
            for label, model in (("a", model_a), ("i", model_i)):
                curves[label] = watch.run(
                    f"{label}curves",
                    lambda m=model: (
                        error_curve(train.y, train.x, m, prep, "train"),
                        error_curve(test.y, test.x, m, prep, "test"),
                    ),
                )
            phase_samples.append(phases)
            curve_samples.append(watch.phases)
            if rep == 0:
                first = (model_a, model_i, gram, curves)
        model_a, model_i, gram, curves = first
        med_phase = {
            k: statistics.median(s[k] for s in phase_samples)
            for k in phase_samples[0]
        }
        med_curves = {
            k: statistics.median(s[k] for s in curve_samples)
            for k in curve_samples[0]
        }
        shared = {k: med_phase[k] for k in ("kernel", "eigen", "weights")}
        if "aenr" in methods:
            tr, te = curves["a"]
            n_sel, err_sel = _select_min(te)
            results["aenr"] = MethodResult(
                method="aenr",
                train_curve=tr,
                test_curve=te,
                selected_n=n_sel,
                selected_err=err_sel,
                curvature_n=curvature_selection(te.errs),
                timings_ms={**shared, "fit": med_phase["afit"], "curves": med_curves["acurves"]},
                extra={"min_eigenvalue": gram.min_eigenvalue},
            )
            models["aenr"] = model_a
        if "ienr" in methods:
            tr, te = curves["i"]
            n_sel, err_sel = _select_min(te)
            results["ienr"] = MethodResult(
                method="ienr",
                train_curve=tr,
                test_curve=te,
                selected_n=n_sel,
                selected_err=err_sel,
                curvature_n=curvature_selection(te.errs),
                timings_ms={**shared, "fit": med_phase["ifit"], "curves": med_curves["icurves"]},
                extra={
                    "stop_index": model_i.stop_index,
                    "stop_reason": model_i.stop_reason,
                    "min_eigenvalue": gram.min_eigenvalue,
                },
            )
            models["ienr"] = model_i

    if "elm" in methods:
        x_te = prep.transform_inputs(test.x)
        y_te_c = prep.center_targets(test.y)
        sweep_times = []
        sweep = None
        for rep in range(time_repeats):
            t0 = time.perf_counter()
            out = elm_error_sweep(
                x_tr,
                y_tr_c,
                x_te,
                y_te_c,
                n_max,
                realizations=realizations,
                seed=seed,
                ridge_lambda=ridge_lambda,
                nested=nested_elm,
                threads=threads,
            )
            sweep_times.append((time.perf_counter() - t0) * 1e3)
            if rep == 0:
                sweep = out
        total_ms = statistics.median(sweep_times)
        # Raw-normalized variants differ from the centered ones by the
        # constant ratio of the two target norms.
        ratio_tr = float(
            np.linalg.norm(y_tr_c) / np.linalg.norm(train.y)
        )
        ratio_te = float(np.linalg.norm(y_te_c) / np.linalg.norm(test.y))
        train_curve = ErrorCurve(
            errs=sweep.train_mean,
            errs_raw=sweep.train_mean * ratio_tr,
            split_label="train",
        )
        test_curve = ErrorCurve(
            errs=sweep.test_mean,
            errs_raw=sweep.test_mean * ratio_te,
            split_label="test",
        )
        n_sel, err_sel = _select_min(test_curve)
        std = float(sweep.test_per_real[:, n_sel - 1].std(ddof=1)) if realizations > 1 else 0.0
        results["elm"] = MethodResult(
            method="elm",
            train_curve=train_curve,
            test_curve=test_curve,
            selected_n=n_sel,
            selected_err=err_sel,
            curvature_n=curvature_selection(test_curve.errs),
            timings_ms={"sweep": total_ms},
            extra={
                "std": std,
                "per_run_ms": total_ms / realizations,
                "raw_ratio_train": ratio_tr,
                "raw_ratio_test": ratio_te,
                "fallback_count": sweep.fallback_count,
            },
        )

    return BenchmarkResult(
        dataset_name=train.name.removesuffix("_train"),
        n_max=n_max,
        seed=seed,
        prep=prep,
        methods=results,
        models=models,
        elm_sweep=sweep,
    )
