"""Floor/ceiling of reals with snapping, and spherical-harmonic multiplicities."""

import math

from .errors import InvalidArgumentError

SNAP_TOL = 1e-9


def snap(x, tol=SNAP_TOL):
    """Return the nearest integer if ``x`` is within ``tol`` of it, else ``x``."""
    k = round(x)
    if abs(x - k) <= tol:
        return float(k)
    return x


def floor(x, tol=SNAP_TOL):
    return math.floor(snap(x, tol))


def ceil(x, tol=SNAP_TOL):
    return math.ceil(snap(x, tol))


def multiplicity(N, j):
    """Multiplicity N_j of the eigenvalue j(N+j-2) of the Laplace-Beltrami
    operator on the unit sphere of R^N.

    Exact integer arithmetic, so large ``j`` cannot overflow.
    """
    if int(N) != N or N < 2:
        raise InvalidArgumentError(f"dimension must be an integer >= 2, got {N}")
    if int(j) != j or j < 0:
        raise InvalidArgumentError(f"harmonic degree must be an integer >= 0, got {j}")
    N, j = int(N), int(j)
    if j == 0:
        return 1
    if N == 2:
        return 2
    # (N+2j-2)(N+j-3)! / ((N-2)! j!)
    return (N + 2 * j - 2) * math.factorial(N + j - 3) // (math.factorial(N - 2) * math.factorial(j))


def multiplicity_sum(N, j_from, j_to):
    """Sum of N_j for j_from <= j <= j_to (empty sum is 0)."""
    return sum(multiplicity(N, j) for j in range(max(j_from, 0), j_to + 1))
