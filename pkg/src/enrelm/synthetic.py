"""Seeded generators for the 48 synthetic benchmark configurations.

The grid crosses sample size {300, 1200}, input dimension {20, 80}, three
input distributions, two target families and two signal-to-noise levels.
Configuration ids run 1..48 in that nesting order.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .data import Dataset
from .errors import ZeroVarianceError
from .numerics import erf

__all__ = [
    "SyntheticSpec",
    "INPUT_DISTS",
    "TARGET_FNS",
    "spec_table",
    "get_spec",
    "gen_inputs",
    "gen_target_linear",
    "gen_target_shallow",
    "apply_noise",
    "generate",
    "linear_values",
    "shallow_values",
]

INPUT_DISTS = ("uniform", "indep_gaussian", "toeplitz_gaussian")
TARGET_FNS = ("linear", "shallow_nn")
TOEPLITZ_RHO = 0.8
SHALLOW_HIDDEN = 100


@dataclass(frozen=True)
class SyntheticSpec:
    """One synthetic dataset configuration."""

    spec_id: int
    t: int
    n0: int
    input_dist: str
    target_fn: str
    snr: float
    seed: int


def spec_table(base_seed: int = 0) -> tuple[SyntheticSpec, ...]:
    """All 48 configurations, ids 1..48."""
    specs = []
    spec_id = 0
    for t in (300, 1200):
        for n0 in (20, 80):
            for target_fn in TARGET_FNS:
                for dist in INPUT_DISTS:
                    for snr in (2.0, 10.0):
                        spec_id += 1
                        specs.append(
                            SyntheticSpec(
                                spec_id=spec_id,
                                t=t,
                                n0=n0,
                                input_dist=dist,
                                target_fn=target_fn,
                                snr=snr,
                                seed=base_seed,
                            )
                        )
    return tuple(specs)


def get_spec(spec_id: int, base_seed: int = 0) -> SyntheticSpec:
    table = spec_table(base_seed)
    if not 1 <= spec_id <= len(table):
        raise ValueError(f"spec id must be in [1, {len(table)}], got {spec_id}")
    return table[spec_id - 1]


def _rng(spec: SyntheticSpec, phase: int):
    return np.random.default_rng(
        np.random.SeedSequence((spec.seed, spec.spec_id, phase))
    )


def gen_inputs(spec: SyntheticSpec):
    """Input matrix (n0 x t) drawn from the configured distribution."""
    rng = _rng(spec, 0)
    if spec.input_dist == "uniform":
        return rng.uniform(-2.0 * np.pi, 2.0 * np.pi, size=(spec.n0, spec.t))
    if spec.input_dist == "indep_gaussian":
        return rng.standard_normal((spec.n0, spec.t))
    if spec.input_dist == "toeplitz_gaussian":
        idx = np.arange(spec.n0)
        cov = TOEPLITZ_RHO ** np.abs(idx[:, None] - idx[None, :])
        chol = np.linalg.cholesky(cov)
        return chol @ rng.standard_normal((spec.n0, spec.t))
    raise ValueError(f"unknown input distribution {spec.input_dist!r}")


def linear_values(x, alpha, intercept: float):
    """Evaluate the linear target alpha.x + intercept on the columns of x."""
    return np.asarray(alpha, dtype=np.float64) @ np.asarray(x, dtype=np.float64) + intercept


def gen_target_linear(x, seed):
    """Linear target with coefficients drawn uniformly from [-2, 2]."""
    x = np.asarray(x, dtype=np.float64)
    rng = np.random.default_rng(seed)
    alpha = rng.uniform(-2.0, 2.0, size=x.shape[0])
    intercept = float(rng.uniform(-2.0, 2.0))
    return linear_values(x, alpha, intercept), {"alpha": alpha, "intercept": intercept}


def shallow_values(x, w_hidden, w_out):
    """Evaluate a one-hidden-layer erf network on the columns of x."""
    return np.asarray(w_out, dtype=np.float64) @ erf(
        np.asarray(w_hidden, dtype=np.float64) @ np.asarray(x, dtype=np.float64)
    )


def gen_target_shallow(x, seed, hidden: int = SHALLOW_HIDDEN):
    """Target generated by a random erf network with one hidden layer.

    Hidden weights are N(0, 1/n0), output weights N(0, 1/hidden).
    """
    x = np.asarray(x, dtype=np.float64)
    rng = np.random.default_rng(seed)
    n0 = x.shape[0]
    w_hidden = rng.normal(0.0, 1.0 / np.sqrt(n0), size=(hidden, n0))
    w_out = rng.normal(0.0, 1.0 / np.sqrt(hidden), size=hidden)
    return shallow_values(x, w_hidden, w_out), {"w_hidden": w_hidden, "w_out": w_out}


def apply_noise(f_values, snr: float, seed):
    """Add Gaussian noise with variance var(f) / snr; an infinite snr adds none."""
    f = np.asarray(f_values, dtype=np.float64)
    if math.isinf(snr):
        return f.copy()
    if not snr > 0:
        raise ValueError("snr must be positive")
    var_f = float(f.var())
    if var_f <= 0.0:
        raise ZeroVarianceError("target values are constant; cannot set a noise level")
    rng = np.random.default_rng(seed)
    sigma = math.sqrt(var_f / snr)
    return f + rng.normal(0.0, sigma, size=f.shape)


def generate(spec: SyntheticSpec) -> Dataset:
    """Full dataset for one configuration, deterministic per (seed, id)."""
    x = gen_inputs(spec)
    target_seed = np.random.SeedSequence((spec.seed, spec.spec_id, 1))
    if spec.target_fn == "linear":
        f, _ = gen_target_linear(x, target_seed)
    elif spec.target_fn == "shallow_nn":
        f, _ = gen_target_shallow(x, target_seed)
    else:
        raise ValueError(f"unknown target family {spec.target_fn!r}")
    y = apply_noise(f, spec.snr, np.random.SeedSequence((spec.seed, spec.spec_id, 2)))
    names = [f"x{i + 1}" for i in range(spec.n0)]
    return Dataset(x=x, y=y, feature_names=names, name=f"dataset_{spec.spec_id:02d}")
