"""Run the acceptance checks end to end and write a Markdown report."""

import math
import time
from dataclasses import dataclass

import numpy as np

from .bessel import bessel_zero, compute_n_alpha_m, solve_beta_i
from .bifurcation import classify_cone_index, locate_crossings, predicted_ranges
from .errors import HenonError, UnsupportedCaseError
from .intmath import ceil, floor
from .morse import KAPPA, index_from_spectrum, morse_lower_bounds
from .params import ProblemParams
from .spectrum import eigenvalue_curve, spectrum_at


@dataclass
class Verdict:
    key: str
    title: str
    passed: bool
    detail: str
    seconds: float
    limit: float

    @property
    def in_time(self):
        return self.seconds <= self.limit


def _c1(cache):
    b = solve_beta_i(ProblemParams(2, 0, 2), 1)
    return 2.300 <= b <= 2.310, f"beta_1 = {b:.12g}"


def _c2(cache):
    pred = predicted_ranges(2, 0, 2)
    return pred.modes == [3, 4, 5], f"modes {pred.modes}"


def _c3(cache):
    bad = []
    rows = []
    for N in (3, 4, 5):
        for m in (2, 3, 4):
            n = compute_n_alpha_m(ProblemParams(N, 0, m))
            rows.append(f"N={N},m={m}:{n}")
            if n != 2 * (m - 1):
                bad.append(f"N={N},m={m}: {n} != {2 * (m - 1)}")
    return not bad, "; ".join(bad) if bad else " ".join(rows)


def _c4(cache):
    worst = math.inf
    for beta in np.arange(0, 10.25, 0.5):
        for m in range(2, 6):
            for i in range(1, m):
                worst = min(worst, bessel_zero(beta, m) - bessel_zero(beta + 2 * (m - i), i))
    return worst > 0, f"smallest margin {worst:.6g}"


def _c5(cache):
    params = ProblemParams(3, 0, 2)
    beta1 = solve_beta_i(params, 1)
    lim1 = 0.25 - beta1**2
    pts = eigenvalue_curve(params, [1.02, 4.9], cache=cache)
    nu_lo, nu_hi = pts[0].nu1, pts[1].nu1
    ok = abs(nu_lo - lim1) <= 0.2 and abs(nu_hi + 2) <= 0.15
    return ok, f"nu_1(1.02) = {nu_lo:.8g} vs {lim1:.8g}; nu_1(4.9) = {nu_hi:.8g} vs -2"


def _c6(cache):
    pts = eigenvalue_curve(ProblemParams(2, 0, 2), [20.0, 35.0, 50.0], cache=cache)
    roots = [math.sqrt(-pt.eigenvalues[0]) for pt in pts]
    r2 = math.sqrt(-pts[-1].eigenvalues[1])
    ok = roots[0] < roots[1] < roots[2] < KAPPA and 4.4 <= roots[2] <= 5.3 and 0.85 <= r2 <= 1.1
    return ok, f"sqrt(-nu_1) = {[round(r, 6) for r in roots]}, sqrt(-nu_2(50)) = {r2:.8g}"


def _c7(cache):
    idx = {}
    for p in (1.1, 2.0, 3.0, 4.5):
        idx[p] = index_from_spectrum(spectrum_at(ProblemParams(3, 0, 1, p))).total_index
    return all(v == 1 for v in idx.values()), f"indices {idx}"


def _c8(cache):
    lo = index_from_spectrum(spectrum_at(ProblemParams(3, 0, 2, 1.05)))
    hi = index_from_spectrum(spectrum_at(ProblemParams(3, 0, 2, 4.8)))
    bound = morse_lower_bounds(ProblemParams(3, 0, 2))["coarse"]
    ok = lo.total_index >= bound and bound == 10 and hi.total_index <= 5
    return ok, f"index(1.05) = {lo.total_index} (bound {bound}), index(4.8) = {hi.total_index}"


def _c9(cache):
    params = ProblemParams(3, 0, 2)
    found = locate_crossings(params, 2, (1.05, 4.8), 0.05, cache=cache)
    flips = []
    for cr in found:
        left = classify_cone_index(spectrum_at(params.with_power(cr.p - 0.02)), 2)
        right = classify_cone_index(spectrum_at(params.with_power(cr.p + 0.02)), 2)
        flips.append(left != right)
    ok = len(found) % 2 == 1 and all(flips)
    return ok, f"crossings {[round(c.p, 5) for c in found]}, flips {flips}"


def _c10(cache):
    bad = []
    for alpha in (0.0, 1.0, 3.5):
        for m in (1, 2, 3):
            for N in (2, 3, 4):
                try:
                    count = predicted_ranges(N, alpha, m).count
                except UnsupportedCaseError:
                    continue
                if m == 1:
                    want, ok = ceil(alpha / 2), count == ceil(alpha / 2)
                elif N == 2:
                    continue
                elif alpha == 0:
                    want, ok = 2 * m - 3, count == 2 * m - 3
                else:
                    want = 2 * m - 3 + floor(alpha * (m - 1)) - floor(alpha / 2)
                    ok = count >= want
                if not ok:
                    bad.append(f"N={N},alpha={alpha},m={m}: count {count} vs {want}")
    return not bad, "; ".join(bad) if bad else "all counts match"


def _c11(cache):
    problems = []
    for args in [(3, 0, 2, 2.0), (3, 1, 3, 2.5), (2, 0, 2, 3.0), (4, 0.5, 2, 1.8)]:
        params = ProblemParams(*args)
        s = spectrum_at(params)
        nu = s.eigenvalues
        if not (np.all(np.diff(nu) > 0) and np.all(nu < 0)):
            problems.append(f"{args}: ordering/sign")
        if params.N >= 3 and not (np.all(nu[:-1] < params.sup_limit) and params.sup_limit < nu[-1]):
            problems.append(f"{args}: separation by the sup level")
        if [s.nodal_domains(i) for i in range(1, s.count + 1)] != list(range(1, s.count + 1)):
            problems.append(f"{args}: nodal domains")
        gram = s.weighted_gram()
        if np.max(np.abs(gram - np.eye(s.count))) > 1e-8:
            problems.append(f"{args}: orthogonality")
        fine = spectrum_at(params, resolution=512).eigenvalues
        if np.max(np.abs(fine - nu) / np.abs(fine)) > 1e-6:
            problems.append(f"{args}: grid convergence")
    for beta in (0.0, 0.5, 1.3):
        z = [bessel_zero(beta, k) for k in range(1, 5)]
        z1 = [bessel_zero(beta + 1, k) for k in range(1, 5)]
        if not all(z[k] < z1[k] < z[k + 1] for k in range(3)):
            problems.append(f"interlacing at beta={beta}")
    for N in (3, 4, 5):
        for alpha in (0.0, 0.5, 1.0, 3.5):
            for m in range(1, 6):
                b = morse_lower_bounds(ProblemParams(N, alpha, m))
                if b["direct"] != b["rearranged"]:
                    problems.append(f"summation identity N={N},alpha={alpha},m={m}")
    return not problems, "; ".join(problems) if problems else "all property checks pass"


CRITERIA = [
    ("1", "beta reproduction", _c1, 1.0),
    ("2", "planar branch range", _c2, 1.0),
    ("3", "Lane-Emden n-table", _c3, 10.0),
    ("4", "Bessel zero lemma", _c4, 10.0),
    ("5", "nu endpoint limits", _c5, 60.0),
    ("6", "planar large-p limit", _c6, 300.0),
    ("7", "positive solution index", _c7, 30.0),
    ("8", "Morse gap", _c8, 60.0),
    ("9", "crossing existence and parity", _c9, 300.0),
    ("10", "branch-count formulas", _c10, 30.0),
    ("11", "property suites", _c11, 600.0),
]


def run_criteria(cache=None, only=None):
    out = []
    for key, title, fn, limit in CRITERIA:
        if only is not None and key not in only:
            continue
        t0 = time.perf_counter()
        try:
            ok, detail = fn(cache)
        except HenonError as exc:
            ok, detail = False, f"{exc.category}: {exc}"
        dt = time.perf_counter() - t0
        out.append(Verdict(key, title, bool(ok), detail, dt, limit))
    return out


def render_report(verdicts):
    lines = [
        "# Reproduction report",
        "",
        "| # | criterion | verdict | time (s) | limit (s) | detail |",
        "|---|---|---|---|---|---|",
    ]
    for v in verdicts:
        status = "PASS" if v.passed and v.in_time else "FAIL"
        if v.passed and not v.in_time:
            status = "FAIL (slow)"
        detail = v.detail.replace("|", "\\|")
        lines.append(f"| {v.key} | {v.title} | {status} | {v.seconds:.2f} | {v.limit:g} | {detail} |")
    passed = sum(v.passed and v.in_time for v in verdicts)
    lines += ["", f"{passed}/{len(verdicts)} criteria passed."]
    return "\n".join(lines) + "\n"
