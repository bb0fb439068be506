"""Nonradial degeneracy points and predicted bifurcation ranges.

A radial solution is degenerate exactly when some nu_i(p) equals an angular
level -(2/(2+alpha))^2 j(N-2+j), j >= 1. Bifurcation in the symmetric cone
of mode n follows when nu_1 crosses the n-th level; the fixed-point index
in that cone is 0 while nu_1 sits below the level and +-1 above it.
"""

import json
import logging
import math
import warnings
from dataclasses import asdict, dataclass


from .bessel import compute_n_alpha_m, solve_beta_i
from .cache import MemoryCache
from .errors import DegenerateInputError, InconsistencyError, InvalidArgumentError, UnsupportedCaseError
from .intmath import ceil, floor
from .morse import KAPPA
from .params import ProblemParams
from .spectrum import DEFAULT_RESOLUTION, eigenvalue_curve, spectrum_at

log = logging.getLogger(__name__)

DEGENERACY_TOL = 1e-6
P_TOL = 1e-4
FACTOR_TOL = 1e-12
FLIP_DELTA = 0.02
SUP_FRACTION = 0.98
PLANAR_P_MAX = 60.0
DEFAULT_P_MIN = 1.02
COVER_MARGIN = 0.25


class CoverageWarning(UserWarning):
    """The sufficient condition holds but the scan window found no crossing."""


def angular_level(params: ProblemParams, n):
    """The level -(2/(2+alpha))^2 n(N-2+n) that nu_1 must cross for mode n."""
    return -params.angular_level(n)


@dataclass(frozen=True)
class BranchPrediction:
    theorem: str
    n_range: tuple
    count: int
    provenance: str

    @property
    def modes(self):
        return list(range(self.n_range[0], self.n_range[1] + 1))

    def to_dict(self):
        return asdict(self)


def predicted_ranges(N, alpha, m):
    """Modes n for which a nonradial branch is guaranteed to bifurcate.

    m = 1 with alpha = 0 yields the empty range [1, 0].
    """
    params = ProblemParams(N, alpha, m)
    if m == 1:
        lo, hi = 1, ceil(alpha / 2)
        theorem, prov = "positive", "n = 1 .. ceil(alpha/2)"
    elif N == 2:
        if m != 2:
            raise UnsupportedCaseError("planar nodal predictions are only available for m = 2")
        beta = solve_beta_i(params, 1)
        lo = floor((2 + alpha) * beta / 2 + 1)
        hi = ceil((2 + alpha) * KAPPA / 2 - 1)
        theorem, prov = "planar-nodal", "n = [(2+alpha)beta/2 + 1] .. ceil((2+alpha)kappa/2 - 1)"
    else:
        lo, hi = 2 + floor(alpha / 2), compute_n_alpha_m(params)
        theorem = "lane-emden" if alpha == 0 else "higher-dim"
        prov = "n = 2 + [alpha/2] .. n_alpha^m"
    return BranchPrediction(theorem, (lo, hi), max(0, hi - lo + 1), prov)


def endpoint_limits(params: ProblemParams):
    """(lim_{p->1} nu_1, lim nu_1 at the top of the existence range)."""
    b = params.bessel_base_order
    beta1 = solve_beta_i(params, 1)
    at_one = b * b - beta1 * beta1
    if params.N >= 3:
        at_sup = params.sup_limit
    elif params.m == 1:
        at_sup = -1.0
    elif params.m == 2:
        at_sup = -KAPPA**2
    else:
        raise UnsupportedCaseError("the p -> infinity limit of nu_1 is unknown in the plane for m >= 3")
    return at_one, at_sup


@dataclass(frozen=True)
class SufficientCondition:
    n: int
    holds: bool
    level: float
    endpoint_p1: float
    endpoint_sup: float
    factors: tuple

    def to_dict(self):
        return asdict(self)


def check_sufficient_condition(params: ProblemParams, n):
    """Whether nu_1 + c_n has opposite signs at the two ends of the p-range.

    Factors within ``FACTOR_TOL`` of zero count as zero, so a limit sitting
    exactly on the level does not satisfy the condition.
    """
    if int(n) != n or n < 1:
        raise InvalidArgumentError(f"mode n must be an integer >= 1, got {n!r}")
    c = params.angular_level(n)
    e1, e2 = endpoint_limits(params)
    f1, f2 = e1 + c, e2 + c
    f1 = 0.0 if abs(f1) <= FACTOR_TOL * max(1.0, c) else f1
    f2 = 0.0 if abs(f2) <= FACTOR_TOL * max(1.0, c) else f2
    return SufficientCondition(int(n), f1 * f2 < 0, -c, e1, e2, (f1, f2))


@dataclass(frozen=True)
class Crossing:
    p: float
    bracket: tuple
    g_left: float
    g_right: float

    def to_dict(self):
        return {"p": self.p, "bracket": list(self.bracket)}


def default_window(params: ProblemParams):
    hi = PLANAR_P_MAX if params.N == 2 else SUP_FRACTION * params.p_alpha
    return DEFAULT_P_MIN, hi


def _sample_grid(lo, hi, step):
    k = int(math.floor((hi - lo) / step + 1e-9))
    grid = [round(lo + i * step, 12) for i in range(k + 1)]
    if hi - grid[-1] > 1e-9:
        grid.append(hi)
    return grid


def _covers(params, lo, hi):
    top = PLANAR_P_MAX if params.N == 2 else params.p_alpha - COVER_MARGIN
    return lo <= 1 + COVER_MARGIN and hi >= top


def locate_crossings(params: ProblemParams, n, p_window=None, p_step=0.05, cache=None,
                     resolution=DEFAULT_RESOLUTION, jobs=1, p_tol=P_TOL):
    """All p in the window where nu_1(p) crosses the n-th angular level.

    nu_1 is sampled every ``p_step`` (through the cache when given); each
    sign change of g(p) = nu_1(p) + c_n is refined by bisection to ``p_tol``.
    If the sufficient condition holds and the window covers the existence
    range, an even number of crossings is an inconsistency.
    """
    if p_step <= 0:
        raise InvalidArgumentError("p_step must be positive")
    lo, hi = p_window if p_window is not None else default_window(params)
    if not (1 < lo < hi < params.p_alpha):
        raise InvalidArgumentError(f"window ({lo}, {hi}) must lie inside (1, {params.p_alpha})")
    c = params.angular_level(n)
    grid = _sample_grid(lo, hi, p_step)
    curve = eigenvalue_curve(params, grid, resolution, cache, jobs)
    for pt in curve:
        if not pt.ok:
            log.warning("nu_1 unavailable at p=%s: %s", pt.p, pt.error)
    points = [pt for pt in curve if pt.ok]

    def g(p):
        return spectrum_at(params.with_power(p), resolution=resolution).eigenvalues[0] + c

    out = []
    for a, b in zip(points, points[1:]):
        ga, gb = a.nu1 + c, b.nu1 + c
        if ga == 0:
            out.append(Crossing(a.p, (a.p, a.p), ga, ga))
            continue
        if ga * gb > 0 or gb == 0:
            continue
        pa, pb = a.p, b.p
        while pb - pa > p_tol:
            mid = 0.5 * (pa + pb)
            gm = g(mid)
            if gm == 0:
                pa = pb = mid
                break
            if (gm < 0) == (ga < 0):
                pa, ga = mid, gm
            else:
                pb, gb = mid, gm
        out.append(Crossing(0.5 * (pa + pb), (pa, pb), ga, gb))
    if points and points[-1].nu1 + c == 0:
        last = points[-1]
        out.append(Crossing(last.p, (last.p, last.p), 0.0, 0.0))

    cond = check_sufficient_condition(params, n)
    if cond.holds and not out:
        warnings.warn(
            f"no crossing of level {-c:.6g} found in [{lo}, {hi}] although one must exist; widen the window",
            CoverageWarning,
            stacklevel=2,
        )
    if cond.holds and _covers(params, lo, hi) and len(out) % 2 == 0:
        raise InconsistencyError(
            f"found {len(out)} crossings of level {-c:.6g} over the full range; expected an odd number"
        )
    return out


def _degenerate_pairs(spec, tol):
    params = spec.params
    hits = []
    for i, nu in enumerate(spec.eigenvalues, start=1):
        j = 1
        while params.angular_level(j) <= -nu + tol:
            r = nu + params.angular_level(j)
            if abs(r) <= tol:
                hits.append((i, j, r))
            j += 1
    return hits


def classify_cone_index(spec, n, tol=DEGENERACY_TOL):
    """"zero" when nu_1 lies below the n-th level, "plus-minus-one" above it."""
    hits = _degenerate_pairs(spec, tol)
    if hits:
        i, j, r = hits[0]
        raise DegenerateInputError(
            f"radial solution is degenerate: nu_{i} + level_{j} = {r:.3g}", pair=(i, j)
        )
    level = angular_level(spec.params, n)
    return "zero" if spec.eigenvalues[0] < level else "plus-minus-one"


def degeneracy_table(spec, j_max, tol=DEGENERACY_TOL):
    """Rows (i, j, residual, degenerate) with residual nu_i + (2/(2+alpha))^2 j(N-2+j)."""
    if j_max < 1:
        raise InvalidArgumentError("j_max must be >= 1")
    rows = []
    for i, nu in enumerate(spec.eigenvalues, start=1):
        for j in range(1, j_max + 1):
            r = float(nu + spec.params.angular_level(j))
            rows.append((i, j, r, abs(r) <= tol))
    return rows


def _classify_at(params, p, n, resolution):
    try:
        return classify_cone_index(spectrum_at(params.with_power(p), resolution=resolution), n)
    except DegenerateInputError as exc:
        return f"degenerate{exc.pair}"


@dataclass
class BifurcationAtlas:
    params_base: ProblemParams
    window: tuple
    prediction: BranchPrediction | None
    entries: list

    def to_dict(self):
        p = self.params_base
        return {
            "params": {"N": p.N, "alpha": p.alpha, "m": p.m},
            "window": list(self.window),
            "prediction": None if self.prediction is None else self.prediction.to_dict(),
            "entries": self.entries,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def scan(params: ProblemParams, n_min=1, n_max=None, p_window=None, p_step=None, cache=None,
         resolution=DEFAULT_RESOLUTION, jobs=1, delta=FLIP_DELTA):
    """Bifurcation atlas for modes n_min..n_max over a p-window."""
    try:
        prediction = predicted_ranges(params.N, params.alpha, params.m)
    except UnsupportedCaseError:
        prediction = None
    if n_max is None:
        n_max = max(n_min, (prediction.n_range[1] if prediction else n_min) + 1)
    if p_window is None:
        p_window = default_window(params)
    if p_step is None:
        p_step = 0.5 if params.N == 2 else 0.05
    lo, hi = p_window
    if cache is None:
        cache = MemoryCache()
    entries = []
    for n in range(n_min, n_max + 1):
        cond = check_sufficient_condition(params, n)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", CoverageWarning)
            try:
                found = locate_crossings(params, n, p_window, p_step, cache, resolution, jobs)
                parity_error = None
            except InconsistencyError as exc:
                found, parity_error = [], str(exc)
        crossings = []
        for cr in found:
            left = _classify_at(params, cr.p - delta, n, resolution) if cr.p - delta > 1 else None
            right = _classify_at(params, cr.p + delta, n, resolution) if cr.p + delta < params.p_alpha else None
            crossings.append({"p": cr.p, "bracket": list(cr.bracket), "cone_index_left": left, "cone_index_right": right})
        entries.append({
            "n": n,
            "target_level": angular_level(params, n),
            "condition_holds": cond.holds,
            "endpoints": [cond.endpoint_p1, cond.endpoint_sup],
            "crossings": crossings,
            "cone_index_left": crossings[0]["cone_index_left"] if crossings else None,
            "cone_index_right": crossings[0]["cone_index_right"] if crossings else None,
            "predicted": bool(prediction and prediction.n_range[0] <= n <= prediction.n_range[1]),
            "parity_error": parity_error,
        })
    return BifurcationAtlas(params, (lo, hi), prediction, entries)

