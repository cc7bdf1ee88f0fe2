"""Dense complex matrix kernel: exponential, singular values, log-determinant
and one-dimensional adaptive quadrature.

Matrices are plain ``numpy`` arrays with a complex dtype.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.linalg

from bogofock.errors import DimensionError, DomainError, QuadratureError

__all__ = [
    "Tolerance",
    "as_matrix",
    "mat_exp",
    "svd_values",
    "hs_norm",
    "op_norm",
    "log_det_one_minus",
    "integrate",
]

# Quadrature subdivision cap; the integrands in this package are smooth.
MAX_INTERVALS = 2**20


@dataclass(frozen=True)
class Tolerance:
    """Absolute/relative tolerance pair."""

    abs: float = 1e-10
    rel: float = 0.0

    def __post_init__(self):
        if self.abs < 0 or self.rel < 0:
            raise ValueError("tolerances must be nonnegative")
        if self.abs == 0 and self.rel == 0:
            raise ValueError("abs and rel tolerance cannot both be zero")

    def bound(self, reference: float = 0.0) -> float:
        return max(self.abs, self.rel * abs(reference))

    def accepts(self, error: float, reference: float = 0.0) -> bool:
        return error <= self.bound(reference)


def as_matrix(m, name: str = "matrix") -> np.ndarray:
    """Coerce to a finite 2-D complex array."""
    arr = np.asarray(m, dtype=complex)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    if arr.ndim != 2:
        raise DimensionError(f"{name} must be 2-D, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    return arr


def _square(m, name: str = "matrix") -> np.ndarray:
    arr = as_matrix(m, name)
    if arr.shape[0] != arr.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {arr.shape}")
    return arr


def mat_exp(m) -> np.ndarray:
    """Matrix exponential by scaling and squaring with a degree-13 Pade
    approximant (Al-Mohy & Higham, as shipped in SciPy)."""
    return scipy.linalg.expm(_square(m))


def svd_values(m) -> np.ndarray:
    """Singular values in nonincreasing order."""
    return np.linalg.svd(_square(m), compute_uv=False)


def hs_norm(m) -> float:
    """Hilbert-Schmidt (Frobenius) norm."""
    return float(np.linalg.norm(as_matrix(m), "fro"))


def op_norm(m) -> float:
    """Operator norm, i.e. the largest singular value."""
    arr = as_matrix(m)
    if arr.size == 0:
        return 0.0
    return float(np.linalg.norm(arr, 2))


def log_det_one_minus(k) -> float:
    """``Tr log(1 - K*K) = sum_i log(1 - s_i**2)`` over the singular values of K.

    Raises DomainError when ``||K|| >= 1``.
    """
    s = svd_values(k)
    if s.size and s[0] >= 1.0:
        raise DomainError(f"||K|| = {float(s[0])!r} >= 1; 1 - K*K is not positive definite")
    return float(np.sum(np.log1p(-(s**2))))


def _simpson(fa, fm, fb, h):
    return h * (fa + 4.0 * fm + fb) / 6.0


def integrate(
    f: Callable[[float], float],
    a: float,
    b: float,
    tol: Tolerance = Tolerance(),
    max_intervals: int = MAX_INTERVALS,
) -> float:
    """Adaptive composite Simpson rule for a smooth scalar integrand.

    Each accepted panel satisfies the local Richardson criterion
    ``|S2 - S1| <= 15 * eps_panel``; the panel budgets sum to
    ``max(tol.abs, tol.rel * |I|)`` with ``I`` estimated by a coarse pass.
    Reversed limits flip the sign.
    """
    a = float(a)
    b = float(b)
    if a == b:
        return 0.0
    if b < a:
        return -integrate(f, b, a, tol, max_intervals)

    m = 0.5 * (a + b)
    fa, fm, fb = float(f(a)), float(f(m)), float(f(b))
    whole = _simpson(fa, fm, fb, b - a)
    target = tol.bound(whole)
    length = b - a

    total = 0.0
    intervals = 1
    # stack of (left, right, f(left), f(mid), f(right), simpson estimate)
    stack = [(a, b, fa, fm, fb, whole)]
    while stack:
        lo, hi, flo, fmid, fhi, coarse = stack.pop()
        mid = 0.5 * (lo + hi)
        lm = 0.5 * (lo + mid)
        rm = 0.5 * (mid + hi)
        flm, frm = float(f(lm)), float(f(rm))
        left = _simpson(flo, flm, fmid, mid - lo)
        right = _simpson(fmid, frm, fhi, hi - mid)
        fine = left + right
        eps = target * (hi - lo) / length
        if abs(fine - coarse) <= 15.0 * eps or hi - lo <= 4.0 * np.finfo(float).eps * max(1.0, abs(mid)):
            total += fine + (fine - coarse) / 15.0
            continue
        intervals += 1
        if intervals > max_intervals:
            raise QuadratureError(
                f"adaptive Simpson did not converge within {max_intervals} intervals"
            )
        stack.append((mid, hi, fmid, frm, fhi, right))
        stack.append((lo, mid, flo, flm, fmid, left))
    if not math.isfinite(total):
        raise QuadratureError("integrand produced a non-finite value")
    return total
