"""Negative singular eigenvalues of

    -(t^{M-1} phi')' - t^{M-1} a_p phi = nu t^{M-3} phi,   phi(1) = 0,

with phi / t square-integrable against t^{M-1}.

With s = log t and phi = t^{-(M-2)/2} psi the problem becomes the
half-line Schrodinger problem

    -psi'' + (c^2 - t^2 a_p(t)) psi = nu psi,   s < 0,   psi(0) = 0,

where c = (M-2)/2. The weighted inner product on phi is the plain L^2
product on psi, the Hardy threshold c^2 is the bottom of the continuous
spectrum, and t^2 a_p(t) = p r^2 |v(r)|^{p-1} (r = tau_m t) is scale free.
The operator is discretized by second-order finite differences on a
uniform s-grid (symmetric tridiagonal, identity mass matrix) and the two
finest levels are Richardson-extrapolated.
"""

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import special
from scipy.linalg import eigh_tridiagonal

from .cache import entry_key
from .errors import CountMismatchError, HenonError, NumericalError
from .params import ProblemParams
from .radial import RadialProfile, Shot, shoot

DEFAULT_RESOLUTION = 256
POTENTIAL_FLOOR = -20.0
DECAY_LENGTHS = 22.0
MIN_TAIL = 20.0
MAX_LENGTH = 4000.0
QUAD_POINTS = 6


def hardy_threshold(M):
    """((M-2)/2)^2: bottom of the continuous spectrum of the singular problem."""
    return ((M - 2) / 2) ** 2


def _fd_eigs(q, c2, h, k, vectors):
    n = len(q)
    d = 2.0 / h**2 + c2 - q
    e = np.full(n - 1, -1.0 / h**2)
    k = min(k, n)
    try:
        if vectors:
            w, v = eigh_tridiagonal(d, e, select="i", select_range=(0, k - 1))
            return w, v
        return eigh_tridiagonal(d, e, eigvals_only=True, select="i", select_range=(0, k - 1)), None
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"tridiagonal eigensolver failed: {exc}") from exc


@dataclass(frozen=True)
class LogGridProblem:
    """Cell-averaged potential t^2 a_p on a uniform grid in s = log t (interior nodes)."""

    s: np.ndarray
    q: np.ndarray
    h: float
    M: float

    @property
    def c2(self):
        return hardy_threshold(self.M)

    def eigs(self, k, vectors=False):
        return _fd_eigs(self.q, self.c2, self.h, k, vectors)

    def quadratic_form(self, psi):
        """Discrete Q(phi) = int (psi'^2 + (c^2 - q) psi^2) ds, consistent with the stencil."""
        padded = np.concatenate(([0.0], psi, [0.0]))
        grad = np.diff(padded) / self.h
        return self.h * (np.sum(grad**2) + np.sum((self.c2 - self.q) * psi**2))


_GL = np.polynomial.legendre.leggauss(QUAD_POINTS)


def _cell_averages(shot: Shot, s, h):
    """Cell means of q over [s_k - h/2, s_k + h/2].

    q vanishes like |s - z|^{p-1} at nodes z of v; cells containing a node
    are split there and integrated with Gauss-Jacobi rules carrying that
    factor as weight, so the cusp costs no accuracy.
    """
    p = shot.params.p
    x, w = _GL
    pts = (s[:, None] + 0.5 * h * x[None, :]).ravel()
    vals = np.exp(shot.log_weighted_potential(shot.log_tau + pts)).reshape(len(s), -1)
    q = vals @ w / 2
    if p == 1:
        return q
    uj_l, wj_l = special.roots_jacobi(QUAD_POINTS, p - 1, 0.0)  # weight (1-u)^{p-1}
    uj_r, wj_r = special.roots_jacobi(QUAD_POINTS, 0.0, p - 1)  # weight (1+u)^{p-1}
    for z in shot.log_zeros[:-1] - shot.log_tau:
        k = int(np.searchsorted(s, z))
        for idx in (k - 1, k):
            if not 0 <= idx < len(s):
                continue
            a, b = s[idx] - h / 2, s[idx] + h / 2
            if not a < z < b:
                continue
            xl = a + (uj_l + 1) * (z - a) / 2
            xr = z + (uj_r + 1) * (b - z) / 2
            fl = np.exp(shot.log_weighted_potential(shot.log_tau + xl)) / (1 - uj_l) ** (p - 1)
            fr = np.exp(shot.log_weighted_potential(shot.log_tau + xr)) / (1 + uj_r) ** (p - 1)
            total = (z - a) / 2 * np.dot(wj_l, fl) + (b - z) / 2 * np.dot(wj_r, fr)
            q[idx] = total / h
    return q


def _sample(shot: Shot, left, resolution):
    h = 1.0 / resolution
    n = int(math.ceil(-left / h))
    s = -h * np.arange(n - 1, 0, -1)
    return LogGridProblem(s, _cell_averages(shot, s, h), h, shot.params.M)


@dataclass(frozen=True)
class SingularSpectrum:
    params: ProblemParams
    eigenvalues: np.ndarray
    fine_eigenvalues: np.ndarray
    log_grid: np.ndarray
    psi: np.ndarray
    admissibility_threshold: float
    problem: LogGridProblem = field(repr=False)
    negative_count: int = 0
    profile: RadialProfile | None = field(default=None, repr=False)

    @property
    def count(self):
        return len(self.eigenvalues)

    def eigenfunction(self, i, t=None):
        """phi_i(t) = t^{-(M-2)/2} psi_i(log t), i starting at 1.

        Without ``t`` the values on the native grid t = exp(log_grid) are returned.
        """
        c = (self.params.M - 2) / 2
        psi = self.psi[i - 1]
        if t is None:
            return np.exp(self.log_grid), np.exp(-c * self.log_grid) * psi
        t = np.asarray(t, dtype=float)
        s = np.log(t)
        # include the boundary node psi(0) = 0 so the last cell interpolates to zero
        grid = np.append(self.log_grid, 0.0)
        vals = np.interp(s, grid, np.append(psi, 0.0), left=0.0, right=0.0)
        return np.exp(-c * s) * vals

    def weighted_gram(self):
        """Matrix of int t^{M-3} phi_i phi_j dt."""
        return self.problem.h * self.psi @ self.psi.T

    def rayleigh_residuals(self):
        """|Q(phi_i) - nu_i int t^{M-3} phi_i^2| for the fine-grid eigenpairs."""
        out = []
        for nu, psi in zip(self.fine_eigenvalues, self.psi):
            qf = self.problem.quadratic_form(psi)
            out.append(abs(qf - nu * self.problem.h * np.sum(psi**2)))
        return np.array(out)

    def nodal_domains(self, i):
        psi = self.psi[i - 1]
        # Lobes can be exponentially small (large p in the plane), so only
        # round-off level values are discarded.
        cut = 1e-14 * np.max(np.abs(psi))
        sig = np.sign(psi[np.abs(psi) > cut])
        return int(np.count_nonzero(sig[1:] != sig[:-1])) + 1

    def to_dict(self):
        t, _ = self.eigenfunction(1)
        stride = max(1, len(t) // 2048)
        return {
            "params": self.params.as_dict(),
            "eigenvalues": self.eigenvalues.tolist(),
            "admissibility_threshold": self.admissibility_threshold,
            "negative_count": self.negative_count,
            "grid": t[::stride].tolist(),
            "eigenfunctions": [self.eigenfunction(i + 1)[1][::stride].tolist() for i in range(self.count)],
        }


def _normalize(psi, h):
    psi = psi / math.sqrt(h * np.sum(psi**2))
    big = np.flatnonzero(np.abs(psi) > 1e-3 * np.max(np.abs(psi)))
    if psi[big[0]] < 0:
        psi = -psi
    return psi


def discrete_spectrum(shot: Shot, count, resolution=DEFAULT_RESOLUTION, richardson=True, left=None):
    """Lowest ``2 * count`` eigenpairs of the log-grid problem.

    Returns ``(eigenvalues, fine_eigenvalues, problem, vectors)``; eigenvalues
    are Richardson-extrapolated from step h and h/2 when ``richardson`` is set.
    The left end of the s-window is pushed out until the top requested
    eigenfunction has decayed through ``DECAY_LENGTHS`` e-foldings.
    """
    c2 = hardy_threshold(shot.params.M)
    k = 2 * count
    floor = POTENTIAL_FLOOR - shot.log_tau
    tail = MIN_TAIL
    while True:
        lo = left if left is not None else floor - tail
        fine_res = 2 * resolution if richardson else resolution
        fine = _sample(shot, lo, fine_res)
        w_f, v_f = fine.eigs(k, vectors=True)
        if richardson:
            coarse = _sample(shot, lo, resolution)
            w_c, _ = coarse.eigs(k)
            w = (4 * w_f - w_c) / 3
        else:
            w = w_f
        if left is not None:
            break
        # only negative eigenvalues need resolving; anything above zero is
        # reported as a count mismatch by the caller
        negative = w[:count][w[:count] < 0]
        if negative.size == 0:
            break
        decay = math.sqrt(c2 - negative[-1])
        need = DECAY_LENGTHS / decay
        if need <= tail:
            break
        if need + (-floor) > MAX_LENGTH:
            raise NumericalError(
                f"eigenfunction decay rate {decay:.3g} needs a log-window longer than {MAX_LENGTH}"
            )
        tail = need * 1.1
    return w, w_f, fine, v_f


def compute_spectrum(profile, count=None, resolution=DEFAULT_RESOLUTION, richardson=True, left=None):
    """The ``count`` lowest (negative) singular eigenvalues with eigenfunctions.

    ``profile`` is a :class:`RadialProfile` or a bare :class:`Shot`.
    """
    shot = profile.shot if isinstance(profile, RadialProfile) else profile
    params = shot.params
    if count is None:
        count = params.m
    w, w_f, fine, vecs = discrete_spectrum(shot, count, resolution, richardson, left)
    negative = int(np.count_nonzero(w < 0))
    if negative < count:
        raise CountMismatchError(
            f"only {negative} negative eigenvalues found, {count} requested "
            f"(grid too coarse or p outside the admissible range)"
        )
    psi = np.array([_normalize(vecs[:, i], fine.h) for i in range(count)])
    return SingularSpectrum(
        params=params,
        eigenvalues=w[:count].copy(),
        fine_eigenvalues=w_f[:count].copy(),
        log_grid=fine.s,
        psi=psi,
        admissibility_threshold=hardy_threshold(params.M),
        problem=fine,
        negative_count=negative,
        profile=profile if isinstance(profile, RadialProfile) else None,
    )


def spectrum_at(params: ProblemParams, count=None, resolution=DEFAULT_RESOLUTION, richardson=True):
    """Shoot the radial solution for ``params`` and return its singular spectrum."""
    return compute_spectrum(shoot(params), count, resolution, richardson)


def negative_eigenvalues_of_potential(potential, M, log_window=(-40.0, 0.0), resolution=DEFAULT_RESOLUTION, k=8):
    """Negative eigenvalues for an arbitrary weighted potential t^2 a(t).

    ``potential`` maps an array of t-values to a(t). Used for operator checks
    (e.g. a = 0 has no negative eigenvalues).
    """
    lo, hi = log_window
    h = 1.0 / resolution
    n = int(math.ceil((hi - lo) / h))
    s = lo + h * np.arange(1, n)
    t = np.exp(s)
    q = t**2 * np.asarray(potential(t), dtype=float)
    problem = LogGridProblem(s, q, h, M)
    w, _ = problem.eigs(k)
    return w[w < 0]


@dataclass(frozen=True)
class CurvePoint:
    p: float
    eigenvalues: tuple | None
    error: str | None = None

    @property
    def ok(self):
        return self.eigenvalues is not None

    @property
    def nu1(self):
        return None if self.eigenvalues is None else self.eigenvalues[0]


def _eigen_job(args):
    N, alpha, m, p, resolution = args
    try:
        s = spectrum_at(ProblemParams(N, alpha, m, p), resolution=resolution)
        return p, tuple(float(x) for x in s.eigenvalues), None
    except HenonError as exc:
        return p, None, f"{exc.category}: {exc}"


def eigenvalue_curve(params: ProblemParams, p_values, resolution=DEFAULT_RESOLUTION, cache=None, jobs=1):
    """First m singular eigenvalues along ``p_values``.

    ``params.p`` is ignored. Points that fail are returned with ``error`` set
    instead of aborting the sweep. With ``cache`` (an :class:`EigenCache`)
    finished points are read from and written to disk; ``jobs > 1`` spreads
    the remaining points over worker processes.
    """
    N, alpha, m = params.N, params.alpha, params.m
    p_values = [float(p) for p in p_values]
    for p in p_values:
        params.with_power(p)  # validates the range
    known = cache.load(N, alpha, m) if cache is not None else {}
    results = {}
    todo = []
    for p in p_values:
        hit = known.get(entry_key(resolution, p))
        if hit is not None and len(hit) == m:
            results[p] = CurvePoint(p, tuple(hit))
        elif p not in results:
            todo.append(p)
    todo = list(dict.fromkeys(todo))
    tasks = [(N, alpha, m, p, resolution) for p in todo]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_eigen_job, tasks))
    else:
        outcomes = [_eigen_job(t) for t in tasks]
    fresh = {}
    for p, eig, err in outcomes:
        results[p] = CurvePoint(p, eig, err)
        if eig is not None:
            fresh[entry_key(resolution, p)] = list(eig)
    if cache is not None:
        cache.update(N, alpha, m, fresh)
    return [results[p] for p in p_values]


def nu1_curve(params: ProblemParams, p_values, **kwargs):
    """(p, nu_1(p)) pairs, ``None`` where the computation failed."""
    return [(pt.p, pt.nu1) for pt in eigenvalue_curve(params, p_values, **kwargs)]
