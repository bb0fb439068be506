import json
import math
import os
from concurrent.futures import ProcessPoolExecutor

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from henonbif import spectrum as spectrum_mod
from henonbif.cache import EigenCache, entry_key
from henonbif.errors import CountMismatchError
from henonbif.params import ProblemParams
from henonbif.radial import potential_on_grid, shoot, solve_radial
from henonbif.spectrum import (
    compute_spectrum,
    eigenvalue_curve,
    hardy_threshold,
    negative_eigenvalues_of_potential,
    nu1_curve,
    spectrum_at,
)

from oracles import shooting_eigenvalue

CASES = [(3, 0, 2, 2.0), (3, 1, 3, 2.5), (2, 0, 2, 3.0), (4, 0.5, 2, 1.8), (5, 2.0, 3, 1.4), (2, 1.5, 1, 6.0)]


@pytest.fixture(scope="module")
def spectra():
    return {args: spectrum_at(ProblemParams(*args)) for args in CASES}


@pytest.mark.parametrize(
    "args,i,bracket",
    [
        ((3, 0, 2, 2.0), 0, (-11.0, -10.0)),
        ((3, 0, 2, 2.0), 1, (-2.0, -1.5)),
        ((3, 0, 2, 4.9), 0, (-2.3, -2.1)),
        ((2, 0, 1, 3.0), 0, (-0.7, -0.5)),
        ((4, 1.0, 2, 2.0), 1, (-2.5, -1.8)),
    ],
)
def test_against_r_variable_shooting(args, i, bracket):
    params = ProblemParams(*args)
    ref = shooting_eigenvalue(params.M, params.p, params.m, bracket)
    assert spectrum_at(params).eigenvalues[i] == pytest.approx(ref, rel=1e-6)


def test_linear_limit_positive_solution():
    nu = spectrum_at(ProblemParams(3, 0, 1, 1.01)).eigenvalues[0]
    assert -0.15 < nu < 0


def test_positive_solution_near_critical():
    nu = spectrum_at(ProblemParams(3, 0, 1, 4.9)).eigenvalues[0]
    assert abs(nu + 2) < 0.1


def test_planar_large_power():
    s = spectrum_at(ProblemParams(2, 0, 2, 50.0))
    assert 4.5 < math.sqrt(-s.eigenvalues[0]) < 5.2
    assert math.sqrt(-s.eigenvalues[1]) == pytest.approx(1.0, abs=0.05)


@pytest.mark.parametrize("args", CASES)
def test_ordering_and_sign(spectra, args):
    nu = spectra[args].eigenvalues
    assert np.all(np.diff(nu) > 0) and np.all(nu < 0)
    assert spectra[args].negative_count == args[2]


@pytest.mark.parametrize("args", [a for a in CASES if a[0] >= 3])
def test_separation_by_limit_level(spectra, args):
    params = ProblemParams(*args)
    nu = spectra[args].eigenvalues
    assert np.all(nu[:-1] < params.sup_limit) and params.sup_limit < nu[-1] < 0


@pytest.mark.parametrize("args", CASES)
def test_nodal_domains(spectra, args):
    s = spectra[args]
    assert [s.nodal_domains(i) for i in range(1, s.count + 1)] == list(range(1, s.count + 1))


@pytest.mark.parametrize("args", CASES)
def test_weighted_orthonormality(spectra, args):
    s = spectra[args]
    assert np.max(np.abs(s.weighted_gram() - np.eye(s.count))) <= 1e-8


@pytest.mark.parametrize("args", CASES)
def test_rayleigh_residual(spectra, args):
    assert np.max(spectra[args].rayleigh_residuals()) <= 1e-7


@pytest.mark.parametrize("args", [(3, 0, 2, 2.0), (2, 0, 1, 3.0), (4, 1.0, 2, 2.0)])
def test_quotient_in_original_variable(args):
    """Q(phi) = int t^{M-1}(phi'^2 - a phi^2) dt against nu int t^{M-3} phi^2 dt, by quadrature in t."""
    params = ProblemParams(*args)
    prof = solve_radial(params, grid_size=512)
    s = compute_spectrum(prof)
    M = params.M
    t = np.exp(np.linspace(-25, 0, 400001))[:-1]
    pot = potential_on_grid(prof, t)
    for i in range(1, s.count + 1):
        phi = s.eigenfunction(i, t)
        dphi = np.gradient(phi, t)
        q = np.trapezoid(t ** (M - 1) * (dphi**2 - pot * phi**2), t)
        w = np.trapezoid(t ** (M - 3) * phi**2, t)
        assert w == pytest.approx(1.0, rel=1e-3)
        assert q / w == pytest.approx(s.eigenvalues[i - 1], rel=2e-3)


def test_first_lobe_positive(spectra):
    for s in spectra.values():
        for psi in s.psi:
            big = np.flatnonzero(np.abs(psi) > 1e-3 * np.abs(psi).max())
            assert psi[big[0]] > 0


def test_grid_convergence_benchmark():
    shot = shoot(ProblemParams(3, 0, 2, 2.0))
    a = compute_spectrum(shot, resolution=256).eigenvalues
    b = compute_spectrum(shot, resolution=512).eigenvalues
    assert np.max(np.abs(a - b) / np.abs(b)) <= 1e-6


def test_left_cutoff_insensitive():
    shot = shoot(ProblemParams(3, 0, 2, 2.0))
    auto = compute_spectrum(shot).eigenvalues
    far = compute_spectrum(shot, left=-90.0).eigenvalues
    assert np.max(np.abs(auto - far) / np.abs(far)) <= 1e-9


@pytest.mark.parametrize("M", [2.0, 2.5, 3.0, 4.0])
def test_zero_potential_has_no_negative_eigenvalues(M):
    assert negative_eigenvalues_of_potential(lambda t: np.zeros_like(t), M).size == 0


def test_threshold_is_bottom_of_continuum():
    # the lowest discrete eigenvalue of the free problem approaches ((M-2)/2)^2 from above
    M = 3.0
    from henonbif.spectrum import LogGridProblem

    h = 1 / 64
    s = -h * np.arange(1, 64 * 400)[::-1]
    w, _ = LogGridProblem(s, np.zeros_like(s), h, M).eigs(1)
    assert hardy_threshold(M) < w[0] < hardy_threshold(M) + 1e-3


def test_threshold_metadata():
    s = spectrum_at(ProblemParams(4, 1.0, 1, 2.0))
    assert s.admissibility_threshold == pytest.approx(((s.params.M - 2) / 2) ** 2)


def test_count_mismatch():
    with pytest.raises(CountMismatchError):
        compute_spectrum(shoot(ProblemParams(3, 0, 2, 2.0)), count=3)


def test_eigenfunction_interpolation(spectra):
    s = spectra[(3, 0, 2, 2.0)]
    t, phi = s.eigenfunction(2)
    sel = slice(1000, None, 997)
    assert np.allclose(s.eigenfunction(2, t[sel]), phi[sel], rtol=1e-12, atol=1e-14)


@settings(max_examples=12, deadline=None)
@given(st.integers(2, 5), st.floats(0, 3), st.integers(1, 3), st.floats(0.05, 0.9))
def test_invariants_random_parameters(N, alpha, m, frac):
    base = ProblemParams(N, alpha, m)
    top = min(base.p_alpha, 10.0)
    p = 1.1 + frac * (top - 1.1) * 0.95
    s = spectrum_at(base.with_power(p))
    assert np.all(np.diff(s.eigenvalues) > 0) and np.all(s.eigenvalues < 0)
    if N >= 3 and m > 1:
        # near p_alpha nu_m meets the limit level to round-off
        assert np.all(s.eigenvalues[:-1] < base.sup_limit) and base.sup_limit - 1e-8 < s.eigenvalues[-1]
    assert [s.nodal_domains(i) for i in range(1, m + 1)] == list(range(1, m + 1))
    assert np.max(s.rayleigh_residuals()) <= 1e-7


# ----------------------------------------------------------------- curves / cache

def test_curve_brackets_mode_two_level():
    curve = dict(nu1_curve(ProblemParams(3, 0, 2), [1.05, 4.9]))
    assert curve[1.05] < -2 < curve[4.9]


def test_curve_trend_and_top_level():
    params = ProblemParams(3, 0, 2)
    lo, hi = eigenvalue_curve(params, [1.05, 4.9])
    assert lo.nu1 < hi.nu1 < params.sup_limit
    assert hi.eigenvalues[1] == pytest.approx(params.sup_limit, abs=1e-6)


def test_positive_planar_curve_range():
    for _, nu in nu1_curve(ProblemParams(2, 0, 1), [1.2, 2.0, 5.0, 15.0, 40.0]):
        assert -1 < nu < 0


def test_curve_continuity():
    grid = [round(1.5 + 0.05 * k, 10) for k in range(21)]
    nu = np.array([v for _, v in nu1_curve(ProblemParams(3, 0, 2), grid)])
    jumps = np.abs(np.diff(nu))
    for k in range(1, len(jumps) - 1):
        assert jumps[k] <= 10 * max(jumps[k - 1], jumps[k + 1])


def test_cache_round_trip(tmp_path):
    cache = EigenCache(tmp_path)
    params = ProblemParams(3, 0, 2)
    first = eigenvalue_curve(params, [2.0, 3.0], cache=cache)
    data = json.loads(cache.path(3, 0.0, 2).read_text())
    assert set(data["entries"]) == {entry_key(256, 2.0), entry_key(256, 3.0)}
    second = eigenvalue_curve(params, [2.0, 3.0], cache=cache)
    assert [p.eigenvalues for p in first] == [p.eigenvalues for p in second]
    assert not [f for f in os.listdir(tmp_path) if f.endswith(".tmp")]


def test_cache_hit_skips_solver(tmp_path, monkeypatch):
    cache = EigenCache(tmp_path)
    params = ProblemParams(3, 0, 1)
    eigenvalue_curve(params, [2.0], cache=cache)

    def boom(*a, **k):
        raise AssertionError("solver called despite cache hit")

    monkeypatch.setattr(spectrum_mod, "spectrum_at", boom)
    assert eigenvalue_curve(params, [2.0], cache=cache)[0].ok


def test_corrupt_cache_is_rebuilt(tmp_path):
    cache = EigenCache(tmp_path)
    params = ProblemParams(3, 0, 1)
    ref = eigenvalue_curve(params, [2.0], cache=cache)[0].nu1
    cache.path(3, 0.0, 1).write_text("{not json")
    with pytest.warns(RuntimeWarning, match="unreadable"):
        again = eigenvalue_curve(params, [2.0], cache=cache)[0].nu1
    assert again == ref
    assert json.loads(cache.path(3, 0.0, 1).read_text())["entries"]


def test_failed_points_are_marked(monkeypatch):
    real = spectrum_mod.spectrum_at

    def flaky(params, **kw):
        if params.p == 2.5:
            raise CountMismatchError("synthetic failure")
        return real(params, **kw)

    monkeypatch.setattr(spectrum_mod, "spectrum_at", flaky)
    pts = eigenvalue_curve(ProblemParams(3, 0, 1), [2.0, 2.5, 3.0])
    assert [p.ok for p in pts] == [True, False, True]
    assert "count-mismatch" in pts[1].error


def _writer(args):
    directory, p = args
    cache = EigenCache(directory)
    eigenvalue_curve(ProblemParams(3, 0, 1), [p], cache=cache)
    return p


def test_concurrent_writers_merge(tmp_path):
    ps = [1.5, 2.0, 2.5, 3.0]
    with ProcessPoolExecutor(max_workers=2) as pool:
        list(pool.map(_writer, [(str(tmp_path), p) for p in ps]))
    data = json.loads(EigenCache(tmp_path).path(3, 0.0, 1).read_text())
    assert set(data["entries"]) == {entry_key(256, p) for p in ps}


def test_parallel_matches_serial():
    params = ProblemParams(3, 0, 2)
    grid = [2.0, 2.5, 3.0]
    serial = eigenvalue_curve(params, grid)
    parallel = eigenvalue_curve(params, grid, jobs=2)
    assert [p.eigenvalues for p in serial] == [p.eigenvalues for p in parallel]
