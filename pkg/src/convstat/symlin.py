"""Dense symmetric linear algebra used by the test statistics.

Symmetric matrices are plain ``numpy.ndarray`` objects validated by
:func:`ensure_symmetric`.  The eigensolver is a cyclic Jacobi iteration:
the matrices here are small (a few dozen rows at most) and Jacobi retains
high relative accuracy on tiny eigenvalues, which the rank decisions in
the tests depend on.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatch,
    DomainError,
    NoConvergence,
    NotSymmetric,
    RankOutOfRange,
)

__all__ = [
    "EigenDecomp",
    "ensure_symmetric",
    "eigh",
    "rank_r_approx",
    "pinv",
    "quad_form",
    "chi2_sf",
    "PINV_TOL",
]

# Relative eigenvalue cutoff for pseudo-inversion; matches double-precision
# machine epsilon scale (1e-15).
PINV_TOL = 1e-15

_SYM_TOL = 1e-12
_JACOBI_TOL = 1e-14
_MAX_SWEEPS = 100


@dataclass(frozen=True)
class EigenDecomp:
    """Spectral decomposition ``A == vectors @ diag(values) @ vectors.T``.

    ``values`` is sorted descending; ``vectors`` holds orthonormal columns
    with the sign fixed so each column's first non-negligible component is
    positive, giving reproducible output for tied eigenvalues.
    """

    values: np.ndarray
    vectors: np.ndarray


def ensure_symmetric(a, name: str = "matrix") -> np.ndarray:
    """Validate symmetry within 1e-12 * max|A| and return (A + A') / 2."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise NotSymmetric(f"{name} must be square, got shape {a.shape}")
    scale = np.max(np.abs(a)) if a.size else 0.0
    if np.max(np.abs(a - a.T)) > _SYM_TOL * max(scale, 1.0):
        raise NotSymmetric(f"{name} is not symmetric within tolerance")
    return 0.5 * (a + a.T)


def _fix_signs(vectors: np.ndarray) -> np.ndarray:
    for j in range(vectors.shape[1]):
        col = vectors[:, j]
        big = np.abs(col) > 1e-12 * max(np.max(np.abs(col)), 1e-300)
        idx = np.argmax(big)
        if col[idx] < 0.0:
            vectors[:, j] = -col
    return vectors


def eigh(a) -> EigenDecomp:
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    Sweeps run until the off-diagonal Frobenius norm falls below
    1e-14 * ||A||_F, with a cap of 100 sweeps (``NoConvergence`` beyond).
    """
    w = ensure_symmetric(a)
    d = w.shape[0]
    v = np.eye(d)
    fro = float(np.linalg.norm(w))
    if fro == 0.0 or d == 1:
        return EigenDecomp(values=np.diag(w).copy(), vectors=v)
    thresh = _JACOBI_TOL * fro
    off_mask = ~np.eye(d, dtype=bool)
    for _ in range(_MAX_SWEEPS):
        off = float(np.linalg.norm(w[off_mask]))
        if off <= thresh:
            break
        for p in range(d - 1):
            for q in range(p + 1, d):
                apq = w[p, q]
                if abs(apq) <= 1e-18 * fro:
                    continue
                theta = (w[q, q] - w[p, p]) / (2.0 * apq)
                t = math.copysign(1.0, theta) / (
                    abs(theta) + math.sqrt(theta * theta + 1.0)
                )
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                # w <- G' w G and v <- v G with G the (p,q) rotation.
                wp = w[:, p].copy()
                wq = w[:, q].copy()
                w[:, p] = c * wp - s * wq
                w[:, q] = s * wp + c * wq
                wp = w[p, :].copy()
                wq = w[q, :].copy()
                w[p, :] = c * wp - s * wq
                w[q, :] = s * wp + c * wq
                w[p, q] = 0.0
                w[q, p] = 0.0
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    else:
        raise NoConvergence("Jacobi eigensolver did not converge in 100 sweeps")
    values = np.diag(w).copy()
    order = np.argsort(-values, kind="stable")
    return EigenDecomp(
        values=values[order], vectors=_fix_signs(v[:, order])
    )


def rank_r_approx(a, r: int) -> np.ndarray:
    """Best symmetric rank-r approximation (truncated eigendecomposition).

    Keeps the r algebraically largest eigenvalues and zeroes the rest; ties
    are broken by the deterministic ordering of :func:`eigh`.
    """
    dec = eigh(a)
    d = dec.values.size
    if not 0 < r <= d:
        raise RankOutOfRange(f"rank must be in 1..{d}, got {r}")
    kept = dec.values.copy()
    kept[r:] = 0.0
    out = (dec.vectors * kept) @ dec.vectors.T
    return 0.5 * (out + out.T)


def pinv(a, tol: float = PINV_TOL) -> np.ndarray:
    """Moore-Penrose pseudo-inverse via the eigendecomposition.

    Eigenvalues with ``|lam| > tol * max|lam|`` are inverted, others
    zeroed.  The zero matrix maps to the zero matrix.
    """
    dec = eigh(a)
    absvals = np.abs(dec.values)
    scale = absvals.max() if absvals.size else 0.0
    inv = np.zeros_like(dec.values)
    if scale > 0.0:
        keep = absvals > tol * scale
        inv[keep] = 1.0 / dec.values[keep]
    out = (dec.vectors * inv) @ dec.vectors.T
    return 0.5 * (out + out.T)


def quad_form(vec, a) -> float:
    """Quadratic form ``v' A v``."""
    vec = np.asarray(vec, dtype=float)
    a = np.asarray(a, dtype=float)
    if vec.ndim != 1 or a.shape != (vec.size, vec.size):
        raise DimensionMismatch(
            f"quad_form got vector of size {vec.size} and matrix {a.shape}"
        )
    return float(vec @ a @ vec)


def chi2_sf(t: float, r: int) -> float:
    """Survival function ``P(chi2(r) >= t)`` for integer dof ``r >= 1``.

    Evaluates the regularized upper incomplete gamma function Q(r/2, t/2)
    by the exact finite series (even r) or the erfc-based recurrence
    (odd r); both are accurate well below 1e-12 absolute error.
    """
    if isinstance(r, bool) or int(r) != r or int(r) < 1:
        raise DomainError(f"degrees of freedom must be an integer >= 1, got {r!r}")
    r = int(r)
    t = float(t)
    if math.isnan(t):
        raise DomainError("chi2_sf received NaN")
    if t < 0.0:
        raise DomainError(f"chi2_sf requires t >= 0, got {t}")
    if math.isinf(t):
        return 0.0
    x = 0.5 * t
    if r % 2 == 0:
        # Q(k, x) = exp(-x) * sum_{i<k} x^i / i!  with k = r/2.
        term = math.exp(-x)
        total = term
        for i in range(1, r // 2):
            term *= x / i
            total += term
    else:
        # Q(1/2, x) = erfc(sqrt(x)); Q(a+1, x) = Q(a, x) + x^a e^-x / Gamma(a+1).
        total = math.erfc(math.sqrt(x))
        term = 2.0 * math.sqrt(x) * math.exp(-x) / math.sqrt(math.pi)
        a = 0.5
        for _ in range((r - 1) // 2):
            total += term
            a += 1.0
            term *= x / a
    return min(max(total, 0.0), 1.0)
