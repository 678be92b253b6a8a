"""Special functions and dense symmetric linear algebra used by every other module.

``erf`` and ``erf_inv`` are implemented natively (a Maclaurin polynomial, a
positive-term scaled series, and a Lentz continued fraction for the tail,
polished by Newton steps for the inverse) so that results do not depend on
the platform's libm. Both accept scalars or numpy arrays and are vectorized.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import EigenSolveError, RankDeficiencyWarning

__all__ = [
    "EigenPair",
    "erf",
    "erf_inv",
    "sym_eig",
    "row_space_projector_apply",
]

_SQRT_PI = 1.7724538509055160273
_TWO_OVER_SQRT_PI = 2.0 / _SQRT_PI

# Maclaurin coefficients of erf(x)*sqrt(pi)/(2x) in powers of x^2:
# (-1)^k / (k! (2k+1)).  19 terms are exact to double precision for |x| <= 0.5.
_TAYLOR = []
_fact = 1.0
for _k in range(19):
    if _k:
        _fact *= _k
    _TAYLOR.append((-1.0) ** _k / (_fact * (2 * _k + 1)))
_TAYLOR_DESC = tuple(_TAYLOR[::-1])
del _fact, _k, _TAYLOR


def _erfc_cf(x):
    """erfc on x >= 3 via the classical continued fraction (modified Lentz).

    sqrt(pi) * exp(x^2) * erfc(x) = 1/(x+ (1/2)/(x+ 1/(x+ (3/2)/(x+ ...))))
    """
    tiny = 1e-300
    f = np.full_like(x, tiny)
    c = f.copy()
    d = np.zeros_like(x)
    for k in range(1, 201):
        a_k = 1.0 if k == 1 else 0.5 * (k - 1)
        d = x + a_k * d
        d = np.where(d == 0.0, tiny, d)
        c = x + a_k / c
        c = np.where(c == 0.0, tiny, c)
        d = 1.0 / d
        delta = c * d
        f = f * delta
        if np.all(np.abs(delta - 1.0) < 1e-16):
            break
    return np.exp(-x * x) / _SQRT_PI * f


def _erf_abs(a):
    """erf on nonnegative values, elementwise, by branch."""
    out = np.ones_like(a)
    small = a <= 0.5
    mid = (a > 0.5) & (a < 3.0)
    big = (a >= 3.0) & (a < 6.0)
    if small.any():
        t = a[small]
        t2 = t * t
        acc = np.full_like(t, _TAYLOR_DESC[0])
        for coef in _TAYLOR_DESC[1:]:
            acc = acc * t2 + coef
        out[small] = _TWO_OVER_SQRT_PI * t * acc
    if mid.any():
        # erf(x) = (2/sqrt(pi)) x e^{-x^2} sum_k (2x^2)^k / (2k+1)!!,
        # all terms positive, no cancellation.
        t = a[mid]
        q = 2.0 * t * t
        term = np.ones_like(t)
        total = np.ones_like(t)
        for k in range(1, 300):
            term = term * (q / (2 * k + 1))
            total = total + term
            if np.all(term <= 1e-17 * total):
                break
        out[mid] = _TWO_OVER_SQRT_PI * t * np.exp(-t * t) * total
    if big.any():
        out[big] = 1.0 - _erfc_cf(a[big])
    return out


def _erfc_pos(x):
    """erfc on nonnegative values; relative accuracy in the far tail."""
    out = np.empty_like(x)
    lo = x < 3.0
    if lo.any():
        out[lo] = 1.0 - _erf_abs(x[lo])
    hi = ~lo
    if hi.any():
        out[hi] = _erfc_cf(x[hi])
    return out


def erf(x):
    """Gauss error function, odd and bounded by (-1, 1) on finite inputs.

    Accepts a scalar or array; scalar in, Python float out. Absolute error
    is below 1e-14 everywhere.
    """
    arr = np.asarray(x, dtype=np.float64)
    flat = arr.reshape(-1)
    vals = _erf_abs(np.abs(flat))
    signed = np.copysign(vals, flat)
    if arr.ndim == 0:
        return float(signed[0])
    return signed.reshape(arr.shape)


_GILES_CENTRAL = (
    2.81022636e-08,
    3.43273939e-07,
    -3.5233877e-06,
    -4.39150654e-06,
    0.00021858087,
    -0.00125372503,
    -0.00417768164,
    0.246640727,
    1.50140941,
)
_GILES_TAIL = (
    -0.000200214257,
    0.000100950558,
    0.00134934322,
    -0.00367342844,
    0.00573950773,
    -0.0076224613,
    0.00943887047,
    1.00167406,
    2.83297682,
)


def _horner(coeffs, w):
    acc = np.full_like(w, coeffs[0])
    for c in coeffs[1:]:
        acc = acc * w + c
    return acc


def erf_inv(p):
    """Inverse of :func:`erf` on (-1, 1).

    A single-precision rational starter is polished with Newton steps; in the
    tail the iteration runs on the complementary function to avoid
    cancellation. Round trip ``erf(erf_inv(p))`` is accurate to well below
    1e-10 absolute.

    Raises
    ------
    ValueError
        If any input has ``|p| >= 1`` or is not finite.
    """
    arr = np.asarray(p, dtype=np.float64)
    flat = arr.reshape(-1)
    if flat.size and (not np.all(np.isfinite(flat)) or np.any(np.abs(flat) >= 1.0)):
        raise ValueError("erf_inv is defined only for finite |p| < 1")
    a = np.abs(flat)
    # -log(1 - p^2), stable near the boundary.
    w = -(np.log1p(a) + np.log1p(-a))
    z = np.empty_like(flat)
    central = w < 5.0
    if central.any():
        z[central] = _horner(_GILES_CENTRAL, w[central] - 2.5) * flat[central]
    mid_tail = (~central) & (w <= 25.0)
    if mid_tail.any():
        z[mid_tail] = _horner(_GILES_TAIL, np.sqrt(w[mid_tail]) - 3.0) * flat[mid_tail]
    far = w > 25.0
    if far.any():
        # asymptotic inversion of erfc(z) ~ exp(-z^2)/(z sqrt(pi))
        ell = -np.log1p(-a[far])
        z0 = np.sqrt(ell)
        for _ in range(3):
            z0 = np.sqrt(ell - np.log(_SQRT_PI * z0))
        z[far] = np.copysign(z0, flat[far])

    tail = a > 0.99
    tail_any = bool(tail.any())
    cen = ~tail
    cen_any = bool(cen.any())
    q = 1.0 - a  # exact for a in [0.5, 1)
    for _ in range(2):
        if cen_any:
            if tail_any:
                zc = z[cen]
                step = (
                    _erf_abs(np.abs(zc)) * np.copysign(1.0, zc) - flat[cen]
                ) * (0.5 * _SQRT_PI) * np.exp(zc * zc)
                z[cen] = zc - step
            else:
                step = (
                    _erf_abs(np.abs(z)) * np.copysign(1.0, z) - flat
                ) * (0.5 * _SQRT_PI) * np.exp(z * z)
                z = z - step
        if tail_any:
            za = np.abs(z[tail])
            step = (_erfc_pos(za) - q[tail]) * (0.5 * _SQRT_PI) * np.exp(za * za)
            step = np.clip(step, -0.5, 0.5)
            z[tail] = np.copysign(za + step, flat[tail])
    if arr.ndim == 0:
        return float(z[0])
    return z.reshape(arr.shape)


@dataclass(frozen=True)
class EigenPair:
    """Spectral decomposition of a symmetric matrix.

    ``values`` is sorted in descending order; column ``j`` of ``vectors``
    pairs with ``values[j]``. Columns are orthonormal.
    """

    values: np.ndarray
    vectors: np.ndarray

    @property
    def size(self) -> int:
        return self.values.shape[0]


def sym_eig(a) -> EigenPair:
    """Eigen-decomposition of a (numerically) symmetric matrix.

    The input is symmetrized as (A + A.T)/2 before factorization; grossly
    asymmetric input is rejected. Eigenvalues come back in descending order.
    """
    m = np.asarray(a, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    if m.size:
        scale = max(1.0, float(np.max(np.abs(m))))
        asym = float(np.max(np.abs(m - m.T)))
        if asym > 1e-8 * scale:
            raise ValueError(
                f"matrix is not symmetric (max asymmetry {asym:.3e} at scale {scale:.3e})"
            )
    s = 0.5 * (m + m.T)
    try:
        vals, vecs = np.linalg.eigh(s)
    except np.linalg.LinAlgError as exc:
        raise EigenSolveError(
            f"symmetric eigensolver did not converge on a "
            f"{s.shape[0]}x{s.shape[0]} matrix: {exc}"
        ) from exc
    order = np.argsort(-vals, kind="stable")
    return EigenPair(values=vals[order], vectors=vecs[:, order])


def row_space_projector_apply(x, b):
    """Return ``b @ x.T @ inv(x @ x.T)`` with a pseudo-inverse fallback.

    When ``x @ x.T`` is singular the inverse is replaced by an
    eigen-thresholded pseudo-inverse (threshold ``T * eps * lambda_max`` with
    ``T`` the number of columns of ``x``) and a rank-deficiency warning is
    emitted.
    """
    x = np.asarray(x, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if x.ndim != 2 or b.ndim != 2:
        raise ValueError("x and b must be matrices")
    if b.shape[1] != x.shape[1]:
        raise ValueError(
            f"column mismatch: b has {b.shape[1]} columns, x has {x.shape[1]}"
        )
    g = x @ x.T
    g = 0.5 * (g + g.T)
    vals, vecs = np.linalg.eigh(g)
    lam_max = float(vals[-1]) if vals.size else 0.0
    thresh = x.shape[1] * np.finfo(np.float64).eps * max(lam_max, 0.0)
    keep = vals > thresh
    dropped = int(np.count_nonzero(~keep))
    if dropped:
        warnings.warn(
            f"x @ x.T is rank deficient: {dropped} of {vals.size} eigenvalues "
            f"at or below threshold {thresh:.3e}; using pseudo-inverse",
            RankDeficiencyWarning,
            stacklevel=2,
        )
    inv_vals = np.zeros_like(vals)
    inv_vals[keep] = 1.0 / vals[keep]
    g_pinv = (vecs * inv_vals) @ vecs.T
    return b @ x.T @ g_pinv
