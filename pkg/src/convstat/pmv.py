"""Probability mass vectors on integer supports.

A PMV represents the distribution of a random variable taking values in
``{0, ..., r}``.  The module provides empirical estimation from samples,
discrete convolution (the distribution of a sum of independent variables),
the banded convolution matrix, and the multinomial covariance matrix.
"""

from dataclasses import dataclass
from functools import reduce

import numpy as np

from .errors import (
    DimensionMismatch,
    EmptyProduct,
    EmptySample,
    InvalidPMV,
    SupportViolation,
)

__all__ = [
    "PMV",
    "EmpiricalPMV",
    "empirical_pmv",
    "convolve",
    "convolve_all",
    "conv_matrix",
    "multinomial_cov",
]

# Drift beyond this triggers renormalization; within it, entries are kept
# bit-for-bit so exact-equality tests on convolutions stay exact.
_SUM_TOL = 1e-12


class PMV:
    """Probability mass vector ``(p_0, ..., p_r)`` on ``{0, ..., r}``.

    Entries must be nonnegative and finite.  If the sum drifts from 1 by
    more than 1e-12 (accumulated convolution roundoff) the vector is
    renormalized; otherwise it is stored untouched.

    Attributes
    ----------
    probs : read-only ndarray of the probabilities.
    r : support degree (``len(probs) - 1``).
    interior : True iff every entry is strictly positive.
    degenerate : True iff the PMV is a point mass (some entry equals 1,
        which includes the single-entry identity ``(1.0,)``).
    """

    __slots__ = ("_probs",)

    def __init__(self, probs):
        p = np.asarray(probs, dtype=float).copy()
        if p.ndim != 1 or p.size == 0:
            raise InvalidPMV("PMV must be a nonempty 1-D vector")
        if not np.all(np.isfinite(p)):
            raise InvalidPMV("PMV entries must be finite")
        if np.any(p < 0.0):
            raise InvalidPMV("PMV entries must be nonnegative")
        total = float(p.sum())
        if total <= 0.0:
            raise InvalidPMV("PMV entries must have positive sum")
        if abs(total - 1.0) > _SUM_TOL:
            p /= total
        p.flags.writeable = False
        self._probs = p

    @property
    def probs(self) -> np.ndarray:
        return self._probs

    @property
    def r(self) -> int:
        return self._probs.size - 1

    @property
    def support_len(self) -> int:
        return self._probs.size

    @property
    def interior(self) -> bool:
        return bool(np.all(self._probs > 0.0))

    @property
    def degenerate(self) -> bool:
        return bool(np.max(self._probs) == 1.0)

    @property
    def zero_indices(self) -> tuple:
        """Indices of zero entries (the sets ``L_i`` of the rank bound)."""
        return tuple(int(i) for i in np.nonzero(self._probs == 0.0)[0])

    def __len__(self) -> int:
        return self._probs.size

    def __getitem__(self, i):
        return self._probs[i]

    def __eq__(self, other) -> bool:
        if not isinstance(other, PMV):
            return NotImplemented
        return np.array_equal(self._probs, other._probs)

    def __hash__(self):
        return hash(self._probs.tobytes())

    def __repr__(self) -> str:
        body = ", ".join(f"{v:g}" for v in self._probs)
        return f"PMV(({body}))"


@dataclass(frozen=True)
class EmpiricalPMV:
    """Maximum-likelihood PMV estimate together with its sample count."""

    pmv: PMV
    n: int


def empirical_pmv(samples, r: int) -> EmpiricalPMV:
    """Estimate a PMV on ``{0, ..., r}`` by relative frequencies.

    Raises ``EmptySample`` for empty input and ``SupportViolation`` when
    any observation is non-integral or outside ``{0, ..., r}``.
    """
    values = np.asarray(samples)
    if values.size == 0:
        raise EmptySample("no observations supplied")
    if not np.issubdtype(values.dtype, np.integer):
        as_int = np.rint(values).astype(np.int64)
        if np.any(np.abs(values - as_int) > 0):
            raise SupportViolation("observations must be integers")
        values = as_int
    if int(r) < 0:
        raise SupportViolation("support degree r must be nonnegative")
    if values.min() < 0 or values.max() > int(r):
        raise SupportViolation(
            f"observations must lie in {{0, ..., {int(r)}}}; "
            f"got range [{values.min()}, {values.max()}]"
        )
    n = values.size
    counts = np.bincount(values, minlength=int(r) + 1)
    return EmpiricalPMV(pmv=PMV(counts / n), n=int(n))


def convolve(a: PMV, b: PMV) -> PMV:
    """Discrete convolution: the PMV of ``X + Y`` for independent X, Y."""
    return PMV(np.convolve(a.probs, b.probs))


def convolve_all(pmvs) -> PMV:
    """Left fold of :func:`convolve`; the PMV of a sum of k variables."""
    pmvs = list(pmvs)
    if not pmvs:
        raise EmptyProduct("convolve_all requires at least one PMV")
    return reduce(convolve, pmvs)


def _conv_matrix(vec: np.ndarray, cols: int) -> np.ndarray:
    """Banded matrix M with ``M @ w == convolve(vec, w)`` for len-cols w."""
    vec = np.asarray(vec, dtype=float)
    rows = vec.size + cols - 1
    m = np.zeros((rows, cols))
    for j in range(cols):
        m[j : j + vec.size, j] = vec
    return m


def conv_matrix(v: PMV, cols: int) -> np.ndarray:
    """Convolution matrix of shape ``(v.r + cols, cols)``.

    Column j holds ``v.probs`` shifted down by j rows, so that
    ``conv_matrix(v, w.size) @ w.probs == convolve(v, w).probs``.
    """
    if cols < 1:
        raise DimensionMismatch(f"conv_matrix needs at least one column, got {cols}")
    return _conv_matrix(v.probs, cols)


def multinomial_cov(v: PMV) -> np.ndarray:
    """Multinomial covariance ``diag(v) - v v'`` of a one-hot indicator."""
    p = v.probs
    return np.diag(p) - np.outer(p, p)
