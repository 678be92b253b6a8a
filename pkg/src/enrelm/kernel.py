"""Exact Gram matrix of infinitely wide erf hidden features, plus its Monte-Carlo check.

For hidden weights drawn i.i.d. N(0, 1/n0) and the erf activation, the
expected feature product E[erf(w.x) erf(w.y)] has the closed form

    (2/pi) * arcsin( 2 k(x,y) / sqrt((1 + 2 k(x,x)) (1 + 2 k(y,y))) )

with k the input-layer kernel. The Monte-Carlo estimator ships in the
library, not just in tests, so the closed form (and any future activation)
can be validated against sampling on real data.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .numerics import EigenPair, erf, sym_eig

__all__ = ["KernelGram", "input_kernel", "erf_dual", "nngp_gram", "mc_gram_estimate"]

log = logging.getLogger(__name__)

_TWO_OVER_PI = 2.0 / np.pi
_MC_CHUNK = 32768


@dataclass
class KernelGram:
    """A T x T hidden-feature Gram matrix with lazy spectral decomposition.

    ``scaled_inputs`` records whether the input-layer kernel was <x,y>/n0
    (matching the N(0, 1/n0) weight law, the default) or the raw <x,y>.
    """

    gram: np.ndarray
    scaled_inputs: bool = True
    eigen: EigenPair | None = field(default=None, repr=False)
    min_eigenvalue: float | None = None

    @property
    def size(self) -> int:
        return self.gram.shape[0]

    def eigendecompose(self) -> EigenPair:
        """Compute (once) and return the spectral decomposition of the gram."""
        if self.eigen is None:
            self.eigen = sym_eig(self.gram)
            self.min_eigenvalue = float(self.eigen.values[-1])
            log.debug(
                "gram spectrum: max %.6g, min %.6g",
                float(self.eigen.values[0]),
                self.min_eigenvalue,
            )
        return self.eigen


def input_kernel(x, scaled: bool = True):
    """Pairwise inner products of the data columns of ``x`` (n0 x T).

    With ``scaled`` set, entries are divided by n0 so they equal the
    covariance E[(w.x)(w.y)] under the N(0, 1/n0) weight law.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2:
        raise ValueError("x must be a matrix with one data point per column")
    if not np.all(np.isfinite(x)):
        raise ValueError("x contains non-finite entries")
    k0 = x.T @ x
    if scaled:
        k0 = k0 / x.shape[0]
    return k0


def erf_dual(k_xx, k_xy, k_yy):
    """Post-activation covariance of erf under a bivariate normal law.

    Maps the preactivation covariance block [[k_xx, k_xy], [k_xy, k_yy]] to
    E[erf(u) erf(v)]. Scalar or array arguments broadcast together; the
    arcsine argument is clamped to [-1, 1] to absorb roundoff at duplicated
    points.
    """
    xx = np.asarray(k_xx, dtype=np.float64)
    xy = np.asarray(k_xy, dtype=np.float64)
    yy = np.asarray(k_yy, dtype=np.float64)
    if np.any(xx < 0) or np.any(yy < 0):
        raise ValueError("diagonal kernel entries must be nonnegative")
    bound = np.sqrt(xx * yy)
    if np.any(np.abs(xy) > bound * (1.0 + 1e-12) + 1e-12):
        raise ValueError("covariance block is not positive semi-definite")
    arg = 2.0 * xy / np.sqrt((1.0 + 2.0 * xx) * (1.0 + 2.0 * yy))
    out = _TWO_OVER_PI * np.arcsin(np.clip(arg, -1.0, 1.0))
    if np.isscalar(k_xy) or (xy.ndim == 0 and xx.ndim == 0 and yy.ndim == 0):
        return float(out)
    return out


def nngp_gram(x, scaled: bool = True) -> KernelGram:
    """Expected Gram matrix of the data under the infinitely wide erf map.

    ``x`` is n0 x T with one (already standardized) data point per column.
    The result is symmetric and positive semi-definite up to roundoff.
    """
    k0 = input_kernel(x, scaled=scaled)
    d = np.diag(k0)
    denom = np.sqrt(np.outer(1.0 + 2.0 * d, 1.0 + 2.0 * d))
    arg = np.clip(2.0 * k0 / denom, -1.0, 1.0)
    gram = _TWO_OVER_PI * np.arcsin(arg)
    gram = 0.5 * (gram + gram.T)
    return KernelGram(gram=gram, scaled_inputs=scaled)


def mc_gram_estimate(x, width: int, seed, return_stderr: bool = False):
    """Empirical feature Gram over ``width`` sampled hidden neurons.

    Samples W with i.i.d. N(0, 1/n0) entries, forms Z = erf(W x) and returns
    Z.T @ Z / width, an unbiased estimate of :func:`nngp_gram` (default
    scaling). Deterministic for a fixed seed. With ``return_stderr`` the
    entrywise Monte-Carlo standard error is returned as a second array.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2:
        raise ValueError("x must be a matrix with one data point per column")
    if width < 1:
        raise ValueError("width must be at least 1")
    n0, t = x.shape
    rng = np.random.default_rng(seed)
    acc = np.zeros((t, t))
    acc_sq = np.zeros((t, t)) if return_stderr else None
    sigma = 1.0 / np.sqrt(n0)
    remaining = int(width)
    while remaining > 0:
        c = min(_MC_CHUNK, remaining)
        w = rng.normal(0.0, sigma, size=(c, n0))
        z = erf(w @ x)
        acc += z.T @ z
        if return_stderr:
            zsq = z * z
            acc_sq += zsq.T @ zsq
        remaining -= c
    mean = acc / width
    if not return_stderr:
        return mean
    var = np.maximum(acc_sq / width - mean * mean, 0.0)
    stderr = np.sqrt(var / width)
    return mean, stderr
