"""Bessel functions of the first kind, their positive zeros, and the
zero-matching inverse problems that fix beta_i and n_alpha^m.

Evaluation is delegated to :func:`scipy.special.jv`; the zero search and the
inverse problems are implemented here.
"""

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import optimize, special

from .errors import (
    ConvergenceError,
    InconsistencyError,
    InvalidArgumentError,
    SearchExhaustedError,
)
from .intmath import ceil, floor
from .params import ProblemParams

ZERO_RESIDUAL_TOL = 1e-10
BETA_TOL = 1e-10
SCAN_STEP = math.pi / 4
SEARCH_HORIZON = 1e4


@dataclass(frozen=True)
class ZeroTable:
    beta: float
    zeros: tuple

    @property
    def k(self):
        return len(self.zeros)


def _check_order(beta):
    if not math.isfinite(beta) or beta < 0:
        raise InvalidArgumentError(f"Bessel order must be finite and >= 0, got {beta!r}")


def eval_bessel(beta, r):
    """J_beta(r) for real order beta >= 0 and r >= 0 (scalar or array)."""
    _check_order(beta)
    r_arr = np.asarray(r, dtype=float)
    if not np.all(np.isfinite(r_arr)) or np.any(r_arr < 0):
        raise InvalidArgumentError("Bessel argument must be finite and >= 0")
    out = special.jv(beta, r_arr)
    return float(out) if out.ndim == 0 else out


def _scan_origin(beta):
    # J_beta has no zeros in (0, beta]; j_{0,1} = 2.40 keeps the beta ~ 0 start clear of the first zero.
    return max(beta, 0.5)


@lru_cache(maxsize=65536)
def _zero(beta, i, horizon):
    start = _scan_origin(beta)
    found = 0
    lo = start
    f_lo = special.jv(beta, lo)
    chunk = 8 * (i + 1)
    while lo < horizon:
        grid = lo + SCAN_STEP * np.arange(1, chunk + 1)
        grid = grid[grid <= horizon]
        if len(grid) == 0:
            break
        vals = special.jv(beta, grid)
        prev = np.concatenate(([f_lo], vals[:-1]))
        changes = np.flatnonzero(np.sign(prev) * np.sign(vals) < 0)
        if found + len(changes) >= i:
            k = changes[i - found - 1]
            a = lo if k == 0 else grid[k - 1]
            b = grid[k]
            z = optimize.brentq(lambda x: special.jv(beta, x), a, b, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
            if abs(special.jv(beta, z)) > ZERO_RESIDUAL_TOL:
                raise ConvergenceError(f"zero z_{i}({beta}) residual above tolerance", bracket=(a, b))
            return z
        found += len(changes)
        lo, f_lo = grid[-1], vals[-1]
    raise SearchExhaustedError(f"fewer than {i} zeros of J_{beta} below {horizon}", horizon=horizon)


def bessel_zero(beta, i, horizon=SEARCH_HORIZON):
    """The i-th positive zero z_i(beta) of J_beta.

    Sign changes are bracketed on a grid of step pi/4 starting at max(beta, 0.5)
    and polished with Brent's method; consecutive zeros are more than pi/2
    apart, so exactly i-1 zeros lie below the returned value.
    """
    _check_order(beta)
    if int(i) != i or i < 1:
        raise InvalidArgumentError(f"zero index must be an integer >= 1, got {i!r}")
    return _zero(float(beta), int(i), float(horizon))


def zero_table(beta, k):
    return ZeroTable(float(beta), tuple(bessel_zero(beta, i) for i in range(1, k + 1)))


def solve_beta_i(params: ProblemParams, i):
    """Order beta_i with z_i(beta_i) = z_m((N-2)/(2+alpha)).

    beta_m is returned exactly. For i < m the root is bracketed from below by
    (N-2)/(2+alpha) + 2(m-i), where z_i already lies below the target.
    """
    m = params.m
    if int(i) != i or not 1 <= i <= m:
        raise InvalidArgumentError(f"index i must satisfy 1 <= i <= m = {m}, got {i!r}")
    base = params.bessel_base_order
    if i == m:
        return base
    target = bessel_zero(base, m)

    def gap(beta):
        return bessel_zero(beta, i) - target

    lo = base + 2 * (m - i)
    while gap(lo) >= 0:
        # z_i(base + 2(m-i)) < target holds analytically; only numerical trouble lands here.
        lo = max(base, lo - 1.0)
        if lo == base:
            break
    hi = lo + 1.0
    for _ in range(200):
        if gap(hi) > 0:
            break
        lo, hi = hi, hi + 1.0
    else:
        raise ConvergenceError("could not bracket beta_i", bracket=(lo, hi))
    try:
        beta, info = optimize.brentq(gap, lo, hi, xtol=BETA_TOL, rtol=1e-15, maxiter=200, full_output=True)
    except RuntimeError as exc:
        raise ConvergenceError(str(exc), bracket=(lo, hi)) from exc
    if not info.converged:
        raise ConvergenceError("beta_i root finder did not converge", bracket=(lo, hi))
    return beta


def beta_table(params: ProblemParams):
    """Rows (i, beta_i, z_i(beta_i)) for i = 1..m."""
    rows = []
    for i in range(1, params.m + 1):
        b = solve_beta_i(params, i)
        rows.append((i, b, bessel_zero(b, i)))
    return rows


def compute_n_alpha_m(params: ProblemParams):
    """n_alpha^m = ceil(((2+alpha) beta_1 - N)/2), checked against the
    equivalent double inequality on first zeros."""
    N, alpha, m = params.N, params.alpha, params.m
    if N < 3 or m < 2:
        raise InvalidArgumentError("n_alpha^m is defined for N >= 3 and m >= 2")
    beta1 = solve_beta_i(params, 1)
    n = ceil(((2 + alpha) * beta1 - N) / 2)
    target = bessel_zero(params.bessel_base_order, m)
    left = bessel_zero((2 * n + N - 2) / (2 + alpha), 1)
    right = bessel_zero((2 * n + N) / (2 + alpha), 1)
    slack = 1e-9 * target
    if not (left < target + slack and target <= right + slack):
        raise InconsistencyError(
            f"n = {n} violates z_1 bracketing: {left} < {target} <= {right} fails"
        )
    lower = 2 * (m - 1) + floor(alpha * (m - 1))
    if n < lower:
        raise InconsistencyError(f"n = {n} below the guaranteed lower bound {lower}")
    return n
