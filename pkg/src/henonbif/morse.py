"""Morse indices from singular eigenvalues, plus the closed-form asymptotic
values and lower bounds used to cross-check them.

For a radial solution with m nodal zones and singular eigenvalues
nu_1 < ... < nu_m < 0,

    J_i = (2+alpha)/2 * (sqrt(b^2 - nu_i) - b),      b = (N-2)/(2+alpha),

and the Morse index is sum_i sum_{j=0}^{ceil(J_i - 1)} N_j, where N_j is
the multiplicity of the j-th spherical-harmonic eigenvalue.
"""

import math
from dataclasses import dataclass, field

from .bessel import solve_beta_i
from .errors import InvalidArgumentError, UnsupportedCaseError
from .intmath import SNAP_TOL, ceil, floor, multiplicity, multiplicity_sum
from .params import ProblemParams

__all__ = [
    "KAPPA",
    "CEILING_GUARD",
    "MorseReport",
    "IndexEstimate",
    "multiplicity",
    "index_from_spectrum",
    "index_from_eigenvalues",
    "asymptotic_index_p1",
    "asymptotic_index_sup",
    "morse_lower_bounds",
    "h_value",
    "morse_gap_check",
]

# Planar two-zone limit sqrt(-lim nu_1) as p -> infinity. It comes from a
# limit problem that is not solved here, so it is carried as a literal.
KAPPA = 5.1869
CEILING_GUARD = 1e-6
RESONANCE_TOL = 1e-9


def j_index(params: ProblemParams, nu):
    b = params.bessel_base_order
    return (2 + params.alpha) / 2 * (math.sqrt(b * b - nu) - b)


@dataclass(frozen=True)
class MorseReport:
    params: ProblemParams
    nu: tuple
    J: tuple
    ceilings: tuple
    total_index: int
    radial_index: int
    contributions: tuple
    near_resonant: bool = False
    flags: tuple = ()

    def to_dict(self):
        return {
            "params": self.params.as_dict(),
            "nu": list(self.nu),
            "J": list(self.J),
            "ceilings": list(self.ceilings),
            "total_index": self.total_index,
            "radial_index": self.radial_index,
            "contributions": list(self.contributions),
            "near_resonant": self.near_resonant,
            "flags": list(self.flags),
        }


def index_from_eigenvalues(params: ProblemParams, nu, guard=CEILING_GUARD):
    """Morse report for a list of m negative singular eigenvalues."""
    nu = [float(x) for x in nu]
    if len(nu) != params.m:
        raise InvalidArgumentError(f"expected m = {params.m} eigenvalues, got {len(nu)}")
    if any(x >= 0 for x in nu):
        raise InvalidArgumentError("singular eigenvalues of a nodal radial solution must be negative")
    Js, ceils, contrib, flags = [], [], [], []
    for i, x in enumerate(nu, start=1):
        J = j_index(params, x)
        c = ceil(J - 1)
        Js.append(J)
        ceils.append(c)
        contrib.append(multiplicity_sum(params.N, 0, c))
        if abs(J - round(J)) <= guard:
            flags.append(f"J_{i} = {J:.12g} is within {guard:g} of an integer")
    return MorseReport(
        params=params,
        nu=tuple(nu),
        J=tuple(Js),
        ceilings=tuple(ceils),
        total_index=sum(contrib),
        radial_index=len(nu),
        contributions=tuple(contrib),
        near_resonant=bool(flags),
        flags=tuple(flags),
    )


def index_from_spectrum(spec, guard=CEILING_GUARD):
    """Morse report for a :class:`~henonbif.spectrum.SingularSpectrum` with m eigenvalues."""
    return index_from_eigenvalues(spec.params, spec.eigenvalues, guard)


@dataclass(frozen=True)
class IndexEstimate:
    """A Morse index known exactly (lower == upper) or only up to an interval."""

    lower: int | float
    upper: int | float
    formula: str
    alternatives: dict = field(default_factory=dict)
    flags: tuple = ()

    @property
    def exact(self):
        return self.lower == self.upper

    @property
    def value(self):
        return self.lower if self.exact else None

    def contains(self, k):
        return self.lower <= k <= self.upper

    def to_dict(self):
        return {
            "lower": self.lower,
            "upper": self.upper,
            "exact": self.exact,
            "formula": self.formula,
            "alternatives": dict(self.alternatives),
            "flags": list(self.flags),
        }


def asymptotic_index_p1(params: ProblemParams):
    """Morse index for p close to 1, from beta_1, ..., beta_{m-1}.

    The exponent x_i = ((2+alpha) beta_i - N)/2 is the limit of J_i - 1;
    when some x_i is an integer (resonant alpha) only a bracket is known.
    """
    N, alpha = params.N, params.alpha
    base = 1
    extra = 0
    resonant = []
    for i in range(1, params.m):
        x = ((2 + alpha) * solve_beta_i(params, i) - N) / 2
        top = ceil(x, RESONANCE_TOL)
        base += multiplicity_sum(N, 0, top)
        if abs(x - round(x)) <= RESONANCE_TOL:
            resonant.append(i)
            extra += multiplicity(N, int(round(x)) + 1)
    if resonant:
        flags = (f"alpha is resonant for beta_{resonant}",)
        return IndexEstimate(base, base + extra, "p->1 bracket", flags=flags)
    return IndexEstimate(base, base, "p->1")


def asymptotic_index_sup(params: ProblemParams):
    """Morse index near the top of the existence range.

    N >= 3: the closed form near p_alpha. Evaluating the general ceiling
    formula at the common limit J_i -> (2+alpha)/2 gives one more (the j = 0
    term of the m-th eigenvalue); that value is reported under
    ``alternatives["ceiling-limit"]`` and the difference is flagged.
    N = 2: p -> infinity closed forms for m = 1 and m = 2.
    """
    N, alpha, m = params.N, params.alpha, params.m
    half = ceil(alpha / 2)
    if N >= 3:
        closed = multiplicity_sum(N, 1, half) + (m - 1) * multiplicity_sum(N, 0, floor((2 + alpha) / 2))
        J_lim = (2 + alpha) / 2
        # nu_i < limit for i < m and nu_m > limit, so J_i approaches from above / below.
        from_above = ceil(J_lim - 1) if abs(J_lim - round(J_lim)) > SNAP_TOL else round(J_lim)
        from_below = ceil(J_lim - 1)
        limit_value = (m - 1) * multiplicity_sum(N, 0, from_above) + multiplicity_sum(N, 0, from_below)
        flags = ()
        if limit_value != closed:
            flags = (f"closed form {closed} differs from ceiling-formula limit {limit_value}",)
        return IndexEstimate(closed, closed, "p->p_alpha", {"ceiling-limit": limit_value}, flags)
    if m == 1:
        v = 1 + 2 * half
        return IndexEstimate(v, v, "p->inf, m=1")
    if m == 2:
        x = (2 + alpha) * KAPPA / 2
        if abs(x - round(x)) <= RESONANCE_TOL:
            lo = (2 + alpha) * KAPPA + 2 * half
            return IndexEstimate(lo, lo + 2, "p->inf, m=2 bracket", flags=("alpha is resonant for kappa",))
        v = 2 * ceil(x) + 2 * half
        return IndexEstimate(v, v, "p->inf, m=2")
    raise UnsupportedCaseError(
        "large-p Morse index in the plane is only available for m <= 2 nodal zones"
    )


def morse_lower_bounds(params: ProblemParams):
    """The three p->1 lower bounds: direct, rearranged and coarsened.

    The first two are the same sum in two orders and must agree; the third
    replaces [(2+alpha)k] by (2+[alpha])k and is never larger.
    """
    N, alpha, m = params.N, params.alpha, params.m
    direct = 1 + sum(multiplicity_sum(N, 0, floor((2 + alpha) * (m - i))) for i in range(1, m))
    rearranged = m + sum(
        (m - k) * multiplicity_sum(N, 1 + floor((2 + alpha) * (k - 1)), floor((2 + alpha) * k))
        for k in range(1, m)
    )
    a = floor(alpha)
    coarse = m + sum(
        (m - k) * multiplicity_sum(N, 1 + (2 + a) * (k - 1), (2 + a) * k) for k in range(1, m)
    )
    return {"direct": direct, "rearranged": rearranged, "coarse": coarse}


def h_value(N, alpha, m):
    """h(m): coarse p->1 bound minus m * sum_{j=1}^{1+[alpha/2]} N_j (positivity gives the gap)."""
    a = floor(alpha)
    first = sum((m - i) * multiplicity_sum(N, 1 + (2 + a) * (i - 1), (2 + a) * i) for i in range(1, m))
    return first - m * multiplicity_sum(N, 1, 1 + floor(alpha / 2))


@dataclass(frozen=True)
class GapReport:
    params: ProblemParams
    h: int
    symbolic_holds: bool
    p_low: float
    p_high: float
    index_low: int | None
    index_high: int | None
    empirical_holds: bool | None
    flags: tuple = ()

    def to_dict(self):
        return {
            "params": self.params.as_dict(),
            "h": self.h,
            "symbolic_holds": self.symbolic_holds,
            "p_low": self.p_low,
            "p_high": self.p_high,
            "index_low": self.index_low,
            "index_high": self.index_high,
            "empirical_holds": self.empirical_holds,
            "flags": list(self.flags),
        }


def morse_gap_check(params: ProblemParams, p_low=1.05, p_high=None, empirical=True, **spectrum_kwargs):
    """Check that the index drops between p near 1 and p near p_alpha.

    Symbolically via h(m) > 0; empirically by computing both indices from
    the singular spectrum (``p_high`` defaults to 0.98 p_alpha).
    """
    N, alpha, m = params.N, params.alpha, params.m
    if N < 3 or m < 2:
        raise InvalidArgumentError("the index gap check needs N >= 3 and m >= 2")
    h = h_value(N, alpha, m)
    if p_high is None:
        p_high = 0.98 * params.p_alpha
    lo_idx = hi_idx = verdict = None
    flags = []
    if empirical:
        from .spectrum import spectrum_at

        r_lo = index_from_spectrum(spectrum_at(params.with_power(p_low), **spectrum_kwargs))
        r_hi = index_from_spectrum(spectrum_at(params.with_power(p_high), **spectrum_kwargs))
        lo_idx, hi_idx = r_lo.total_index, r_hi.total_index
        verdict = lo_idx > hi_idx
        flags = [f"p={p_low}: {f}" for f in r_lo.flags] + [f"p={p_high}: {f}" for f in r_hi.flags]
    return GapReport(params, h, h > 0, p_low, p_high, lo_idx, hi_idx, verdict, tuple(flags))

