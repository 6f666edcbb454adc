"""Uniform B-spline bases: knot construction, evaluation, derivatives.

Every learnable activation in the network is a weighted sum of B-spline
basis functions over a fixed uniform grid.  The grid spans a nominal input
range (normally [-1, 1]) and is extended by ``degree`` extra knots on each
side so that a full set of ``grid_count + degree`` bases is supported on
the nominal range.  Inputs outside the range are clamped to the nearest
endpoint before evaluation, which makes evaluation total: out-of-range
inputs just saturate at the boundary value of the spline.

Basis values are computed with the triangular recurrence (the standard
knot-span algorithm), vectorised over sample arrays.  Derivatives use the
uniform-knot identity  B'_i,k(x) = (B_i,k-1(x) - B_i+1,k-1(x)) / h.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "KnotVector",
    "SplineParams",
    "make_knot_vector",
    "basis_values",
    "basis_derivatives",
    "eval_spline",
]


@dataclass(frozen=True)
class KnotVector:
    """Uniform knot sequence over ``interior_count`` grid intervals.

    ``knots`` has length ``interior_count + 2 * degree + 1``: the grid over
    [range_min, range_max] plus ``degree`` uniformly continued knots per
    side.  The sequence is non-decreasing with constant spacing.
    """

    knots: np.ndarray
    degree: int
    interior_count: int
    range_min: float
    range_max: float

    @property
    def n_basis(self) -> int:
        """Number of basis functions supported on the nominal range."""
        return self.interior_count + self.degree

    @property
    def spacing(self) -> float:
        return (self.range_max - self.range_min) / self.interior_count


@dataclass
class SplineParams:
    """Coefficients of one spline; length must match the knot vector's ``n_basis``."""

    coefficients: np.ndarray


def make_knot_vector(
    range_min: float, range_max: float, grid_count: int, degree: int
) -> KnotVector:
    """Build the uniform extended knot vector for a grid of ``grid_count`` intervals."""
    if not range_min < range_max:
        raise ValueError(
            f"invalid-range: need range_min < range_max, got [{range_min}, {range_max}]"
        )
    if grid_count < 1:
        raise ValueError(f"invalid-grid: grid_count must be >= 1, got {grid_count}")
    if degree < 0:
        raise ValueError(f"invalid-degree: degree must be >= 0, got {degree}")
    h = (range_max - range_min) / grid_count
    knots = range_min + h * np.arange(-degree, grid_count + degree + 1)
    return KnotVector(
        knots=knots,
        degree=int(degree),
        interior_count=int(grid_count),
        range_min=float(range_min),
        range_max=float(range_max),
    )


def _dense_basis(kv: KnotVector, x: np.ndarray, degree: int) -> np.ndarray:
    """Degree-``degree`` basis values over ``kv.knots`` for clamped 1-D ``x``.

    Returns shape ``(len(x), len(kv.knots) - degree - 1)``.  ``degree`` may be
    lower than ``kv.degree`` (used for the derivative identity); the knot span
    containing each sample is the same either way.
    """
    t = kv.knots
    h = kv.spacing
    n = x.shape[0]
    # span s satisfies t[s] <= x < t[s+1]; uniform spacing gives it in O(1)
    span = np.floor((x - kv.range_min) / h).astype(np.int64) + kv.degree
    np.clip(span, kv.degree, kv.degree + kv.interior_count - 1, out=span)

    vals = np.zeros((n, degree + 1))
    vals[:, 0] = 1.0
    left = np.empty((n, degree + 1))
    right = np.empty((n, degree + 1))
    for j in range(1, degree + 1):
        left[:, j] = x - t[span + 1 - j]
        right[:, j] = t[span + j] - x
        saved = np.zeros(n)
        for r in range(j):
            temp = vals[:, r] / (right[:, r + 1] + left[:, j - r])
            vals[:, r] = saved + right[:, r + 1] * temp
            saved = left[:, j - r] * temp
        vals[:, j] = saved

    dense = np.zeros((n, len(t) - degree - 1))
    cols = (span - degree)[:, None] + np.arange(degree + 1)[None, :]
    np.put_along_axis(dense, cols, vals, axis=1)
    return dense


def _clamped(kv: KnotVector, x) -> tuple[np.ndarray, bool]:
    arr = np.asarray(x, dtype=np.float64)
    scalar = arr.ndim == 0
    arr = np.clip(np.atleast_1d(arr), kv.range_min, kv.range_max)
    return arr, scalar


def basis_values(knots: KnotVector, x) -> np.ndarray:
    """Evaluate all basis functions at ``x`` (scalar or 1-D array).

    Returns shape ``(n_basis,)`` for scalar input, ``(len(x), n_basis)`` for
    array input.  Values are non-negative, at most ``degree + 1`` per sample
    are nonzero, and each row sums to 1 on the nominal range.
    """
    arr, scalar = _clamped(knots, x)
    dense = _dense_basis(knots, arr, knots.degree)
    return dense[0] if scalar else dense


def basis_derivatives(knots: KnotVector, x) -> np.ndarray:
    """First derivatives of all basis functions at ``x``, same shapes as values.

    Derivatives are taken with respect to the clamped input, so they describe
    the basis on the nominal range only.  Degree 0 bases are piecewise
    constant and have no useful derivative here.
    """
    if knots.degree < 1:
        raise ValueError("unsupported-degree: derivatives need degree >= 1")
    arr, scalar = _clamped(knots, x)
    lower = _dense_basis(knots, arr, knots.degree - 1)  # one extra column
    dense = (lower[:, :-1] - lower[:, 1:]) / knots.spacing
    return dense[0] if scalar else dense


def eval_spline(params: SplineParams, knots: KnotVector, x):
    """Evaluate the spline sum(c_i * B_i(x)); scalar in, float out (arrays pass through)."""
    coef = np.asarray(params.coefficients, dtype=np.float64)
    if coef.shape != (knots.n_basis,):
        raise ValueError(
            f"length-mismatch: expected {knots.n_basis} coefficients, got {coef.shape}"
        )
    b = basis_values(knots, x)
    out = b @ coef
    return float(out) if b.ndim == 1 else out
