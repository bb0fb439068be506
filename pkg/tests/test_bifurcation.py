import json
import math
from types import SimpleNamespace

import numpy as np
import pytest

from henonbif import bifurcation as bif
from henonbif.bessel import solve_beta_i
from henonbif.bifurcation import (
    CoverageWarning,
    check_sufficient_condition,
    classify_cone_index,
    degeneracy_table,
    locate_crossings,
    predicted_ranges,
    scan,
)
from henonbif.cache import EigenCache, MemoryCache
from henonbif.errors import DegenerateInputError, InconsistencyError, UnsupportedCaseError
from henonbif.morse import KAPPA
from henonbif.params import ProblemParams
from henonbif.spectrum import CurvePoint, spectrum_at

from oracles import shooting_eigenvalue


# ------------------------------------------------------------ predictions

def test_planar_two_zone_modes():
    pred = predicted_ranges(2, 0, 2)
    beta = solve_beta_i(ProblemParams(2, 0, 2), 1)
    assert pred.modes == [3, 4, 5]
    assert pred.n_range == (math.floor(beta + 1), math.ceil(KAPPA - 1))
    assert pred.theorem == "planar-nodal"


def test_lane_emden_two_zones():
    pred = predicted_ranges(3, 0, 2)
    assert pred.n_range == (2, 2) and pred.count == 1 == 2 * 2 - 3
    assert pred.theorem == "lane-emden"


@pytest.mark.parametrize("N", [2, 3, 5])
def test_positive_solution_modes(N):
    pred = predicted_ranges(N, 4.0, 1)
    assert pred.n_range == (1, 2) and pred.count == 2
    assert pred.theorem == "positive"


def test_positive_solution_without_weight_has_no_modes():
    pred = predicted_ranges(3, 0, 1)
    assert pred.count == 0 and pred.modes == []


def test_higher_dimension_tag():
    assert predicted_ranges(4, 1.0, 2).theorem == "higher-dim"


def test_planar_many_zones_unsupported():
    with pytest.raises(UnsupportedCaseError):
        predicted_ranges(2, 0, 3)
    with pytest.raises(UnsupportedCaseError):
        check_sufficient_condition(ProblemParams(2, 0, 3), 1)


RANGE_SETS = [(3, 0, 2), (3, 0, 3), (3, 1, 2), (3, 1, 3), (2, 0, 2), (2, 1, 2),
              (3, 1, 1), (3, 4, 1), (2, 1, 1), (2, 4, 1)]


@pytest.mark.parametrize("args", RANGE_SETS)
def test_range_consistency(args):
    pred = predicted_ranges(*args)
    params = ProblemParams(*args)
    lo, hi = pred.n_range
    for n in range(1, hi + 4):
        assert check_sufficient_condition(params, n).holds == (lo <= n <= hi), n


# ------------------------------------------------------------ sufficient condition

def test_condition_lane_emden_mode_two():
    params = ProblemParams(3, 0, 2)
    cond = check_sufficient_condition(params, 2)
    beta = solve_beta_i(params, 1)
    assert cond.endpoint_p1 == pytest.approx(0.25 - beta**2, rel=1e-12)
    # c_2 = (2/2)^2 * 2 * (3 - 2 + 2) = 6
    assert cond.factors[0] < 0 and cond.factors[1] == pytest.approx(-2.0 + 6.0)
    assert cond.holds and cond.level == pytest.approx(-6.0)


def test_condition_boundary_case_excluded():
    cond = check_sufficient_condition(ProblemParams(3, 0, 2), 1)
    assert cond.factors[1] == 0.0 and not cond.holds


@pytest.mark.parametrize("n", range(1, 8))
def test_condition_planar_positive_unweighted(n):
    cond = check_sufficient_condition(ProblemParams(2, 0, 1), n)
    assert cond.endpoint_p1 == pytest.approx(0.0, abs=1e-12)
    assert cond.endpoint_sup == -1.0
    assert all(f >= 0 for f in cond.factors) and not cond.holds


# ------------------------------------------------------------ crossings

@pytest.fixture(scope="module")
def lane_emden_crossing():
    params = ProblemParams(3, 0, 2)
    cache = MemoryCache()
    return params, cache, locate_crossings(params, 2, (1.05, 4.9), 0.05, cache=cache)


def test_single_crossing_mode_two(lane_emden_crossing):
    params, _, found = lane_emden_crossing
    assert len(found) == 1
    cr = found[0]
    assert cr.bracket[1] - cr.bracket[0] <= 1e-4
    assert cr.g_left * cr.g_right < 0


def test_crossing_against_shooting_oracle(lane_emden_crossing):
    params, _, found = lane_emden_crossing
    p = found[0].p
    level = -params.angular_level(2)
    below = shooting_eigenvalue(params.M, p - 2e-3, 2, (level - 1, level + 1))
    above = shooting_eigenvalue(params.M, p + 2e-3, 2, (level - 1, level + 1))
    assert (below - level) * (above - level) < 0


def test_classification_flips(lane_emden_crossing):
    params, _, found = lane_emden_crossing
    p = found[0].p
    left = classify_cone_index(spectrum_at(params.with_power(p - 0.02)), 2)
    right = classify_cone_index(spectrum_at(params.with_power(p + 0.02)), 2)
    assert {left, right} == {"zero", "plus-minus-one"}


def test_degeneracy_at_crossing(lane_emden_crossing):
    params, _, found = lane_emden_crossing
    spec = spectrum_at(params.with_power(found[0].p))
    rows = {(i, j): r for i, j, r, _ in degeneracy_table(spec, 4)}
    assert abs(rows[(1, 2)]) <= 1e-4 * params.angular_level(2)
    assert min(j for _, j in rows) == 1


def test_no_degeneracy_at_generic_point(lane_emden_crossing):
    params, _, found = lane_emden_crossing
    spec = spectrum_at(params.with_power(0.5 * (1.05 + found[0].p)))
    assert not any(flag for *_, flag in degeneracy_table(spec, 10))


def test_coverage_warning():
    with pytest.warns(CoverageWarning):
        assert locate_crossings(ProblemParams(3, 0, 2), 2, (1.05, 2.0), 0.25) == []


@pytest.mark.parametrize("n", [1, 2])
def test_positive_unweighted_has_no_crossings(n):
    assert locate_crossings(ProblemParams(3, 0, 1), n, (1.05, 4.9), 0.1) == []


def test_planar_mode_four():
    found = locate_crossings(ProblemParams(2, 0, 2), 4, (1.05, 60.0), 0.5)
    assert len(found) >= 1
    assert all(c.g_left * c.g_right < 0 for c in found)


def _fake_nu1(monkeypatch, fn):
    def curve(params, grid, *a, **k):
        return [CurvePoint(p, np.array([fn(p)]), None) for p in grid]

    def spec(params, **k):
        return SimpleNamespace(eigenvalues=np.array([fn(params.p)]))

    monkeypatch.setattr(bif, "eigenvalue_curve", curve)
    monkeypatch.setattr(bif, "spectrum_at", spec)


def test_multiple_crossings_all_reported(monkeypatch):
    params = ProblemParams(3, 0, 2)
    _fake_nu1(monkeypatch, lambda p: -6.0 + math.sin(3 * p))  # three sign changes on [1.05, 4.5]
    found = locate_crossings(params, 2, (1.05, 4.5), 0.05)
    roots = [k * math.pi / 3 for k in (1, 2, 3, 4) if 1.05 < k * math.pi / 3 < 4.5]
    assert [round(c.p, 3) for c in found] == [round(r, 3) for r in roots]


def test_even_count_on_full_window_is_inconsistent(monkeypatch):
    params = ProblemParams(3, 0, 2)
    _fake_nu1(monkeypatch, lambda p: -6.0 + math.cos(2 * p))
    with pytest.raises(InconsistencyError):
        locate_crossings(params, 2, (1.05, 4.9), 0.05)


# ------------------------------------------------------------ classification

def test_classify_positive_solution_mode_one():
    spec = spectrum_at(ProblemParams(3, 0, 1, 2.0))
    assert -2 < spec.eigenvalues[0] < 0
    assert classify_cone_index(spec, 1) == "plus-minus-one"


def test_classify_just_below_and_above():
    params = ProblemParams(3, 0, 2, 2.0)
    level = -params.angular_level(2)
    below = SimpleNamespace(params=params, eigenvalues=np.array([level - 1e-3, -1.0]))
    above = SimpleNamespace(params=params, eigenvalues=np.array([level + 1e-3, -1.0]))
    assert classify_cone_index(below, 2) == "zero"
    assert classify_cone_index(above, 2) == "plus-minus-one"


def test_classify_degenerate_input():
    params = ProblemParams(3, 0, 2, 2.0)
    level = -params.angular_level(3)
    spec = SimpleNamespace(params=params, eigenvalues=np.array([level + 1e-8, -1.0]))
    with pytest.raises(DegenerateInputError) as info:
        classify_cone_index(spec, 2)
    assert info.value.pair == (1, 3)


# ------------------------------------------------------------ atlas

def test_atlas_determinism(tmp_path):
    params = ProblemParams(3, 0, 2)
    kw = dict(n_min=1, n_max=3, p_window=(3.5, 3.9), p_step=0.1)
    first = scan(params, cache=EigenCache(tmp_path), **kw).to_json()
    second = scan(params, cache=EigenCache(tmp_path), **kw).to_json()
    third = scan(params, cache=MemoryCache(), **kw).to_json()
    assert first == second == third


def test_atlas_schema():
    atlas = json.loads(scan(ProblemParams(3, 0, 2), n_min=2, n_max=2, p_window=(3.6, 3.8), p_step=0.1).to_json())
    assert set(atlas) >= {"params", "entries"}
    entry = atlas["entries"][0]
    assert set(entry) >= {"n", "target_level", "condition_holds", "endpoints", "crossings",
                          "cone_index_left", "cone_index_right"}
    assert entry["target_level"] == pytest.approx(-6.0)
    (cr,) = entry["crossings"]
    assert cr["bracket"][0] <= cr["p"] <= cr["bracket"][1]
    assert {cr["cone_index_left"], cr["cone_index_right"]} == {"zero", "plus-minus-one"}
