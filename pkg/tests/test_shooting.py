import logging
import math

import numpy as np
import pytest

from conftest import scaled
from oracles import REFERENCE_ODE_SPEEDS
from wildfront.pde import ModelVariant
from wildfront.shooting import (BracketInvalid, ShootingConfig, closest_approach, find_both_speeds,
                                find_c_plus, wind_threshold)


@pytest.fixture(scope="module")
def results():
    return {w: find_both_speeds(scaled(w=w)) for w in (0.0, 0.03, 0.3)}


def rel(a, b):
    return abs(a - b) / abs(b)


def test_config_validation():
    for kwargs in ({"c_lo": 0.0}, {"c_lo": 1.0, "c_hi": 0.5}, {"tol_c": 0.0}, {"d_tol": -1.0}, {"n_probe": 1}):
        with pytest.raises(ValueError):
            ShootingConfig(**kwargs)


def test_no_wind_speed(results):
    res = results[0.0]
    d = scaled()
    assert rel(d.speed_to_mps(res.c_plus), REFERENCE_ODE_SPEEDS[0.0][1]) < 0.05


def test_no_wind_is_an_exact_mirror(results):
    res = results[0.0]
    assert res.c_minus == -res.c_plus
    assert res.r_minus == res.r_plus


def test_mild_wind_speeds(results):
    res = results[0.03]
    d = scaled(w=0.03)
    lo, hi = REFERENCE_ODE_SPEEDS[0.03]
    assert rel(d.speed_to_mps(res.c_minus), lo) < 0.05
    assert rel(d.speed_to_mps(res.c_plus), hi) < 0.05
    assert res.c_plus + res.c_minus > 0
    assert res.c_plus > 0 > res.c_minus


def test_strong_wind_has_only_the_downwind_wave(results):
    res = results[0.3]
    d = scaled(w=0.3)
    assert res.c_minus is None and res.r_minus is None
    assert rel(d.speed_to_mps(res.c_plus), REFERENCE_ODE_SPEEDS[0.3][1]) < 0.05
    assert res.plus.bracket_used[1] > 1.0  # auto-extended


def test_speed_bracketed_to_tolerance(results):
    for res in results.values():
        diag = res.plus.diagnostics
        assert diag["flank_outcomes"] == ("undershoot", "overshoot")


def test_c_plus_increases_with_wind(results):
    speeds = [scaled(w=w).speed_to_mps(results[w].c_plus) for w in (0.0, 0.03, 0.3)]
    assert speeds[0] < speeds[1] < speeds[2]


def test_residual_fuel_in_unit_interval(results):
    for res in results.values():
        for r in (res.r_plus, res.r_minus):
            if r is not None:
                assert 0.0 < r < 1.0


def test_residual_fuel_matches_pde_plateau(bundled_reports, results):
    for name, w in (("no_wind", 0.0), ("strong_wind", 0.3)):
        report = bundled_reports[name]
        d = report.dimensionless
        final = report.variants[ModelVariant.PF_linearized].final_state
        x_m = d.x_to_m(report.scenario.grid(d).centers)
        front = d.x_to_m(report.variants[ModelVariant.PF_linearized].track.x_right[-1])
        behind = (x_m > front - 25.0) & (x_m < front - 10.0)
        plateau = float(np.median(final.v[behind]))
        assert rel(results[w].r_plus, plateau) < 0.05


@pytest.mark.xfail(strict=True, reason="the stored orbit leaves the burnt state before z settles; "
                                       "z(-inf) is not observable from the trajectory itself")
def test_trajectory_tail_satisfies_burnt_state_relation(results):
    res = results[0.0]
    d = scaled()
    traj = res.plus.trajectory
    z_end, v_end = traj.z[-1], traj.v[-1]
    assert rel(z_end, (1 - v_end) / (d.gamma * d.h_tilde)) < 1e-4


def test_accepted_trajectories_conserve_the_first_integral(results):
    for res in results.values():
        for search in (res.plus, res.minus):
            if search.found:
                assert np.max(np.abs(search.trajectory.first_integral_residual())) < 1e-6


@pytest.mark.xfail(strict=True, reason="closest approach is taken at ignition (about 1) for every speed; "
                                       "see the saddle analysis in the shooting module")
def test_closest_approach_vanishes_at_the_speed(results):
    d_c, _ = closest_approach(results[0.0].c_plus, scaled())
    assert d_c < 1e-6


def test_closest_approach_misfire(results):
    cfg = ShootingConfig()
    d_c, _ = closest_approach(10 * results[0.0].c_plus, scaled(), cfg)
    assert d_c >= 10 * cfg.d_tol
    with pytest.raises(ValueError):
        closest_approach(-1.0, scaled())


def test_no_wave_when_cooling_dominates():
    d = scaled(h=19.85)
    assert d.h_tilde == pytest.approx(1.5, rel=1e-12)
    search = find_c_plus(d)
    assert not search.found
    assert search.diagnostics["reason"]
    for c in np.linspace(0.1, 1.0, 10):
        assert closest_approach(float(c), d)[0] > 0.5


def test_least_squares_lambda_finds_no_wave_in_bracket():
    from wildfront.params import PhysicalParams, fit_lambda, nondimensionalize
    d = nondimensionalize(PhysicalParams(), fit_lambda(400.0, 300.0))
    assert not find_c_plus(d).found


def test_bracket_without_ignition_is_invalid():
    d = scaled().with_wind(20.0)
    with pytest.raises(BracketInvalid):
        find_c_plus(d, ShootingConfig(c_lo=0.1, c_hi=1.0, max_extend=1.0))


def test_unimodality_warning_in_strong_wind(caplog):
    with caplog.at_level(logging.WARNING, logger="wildfront.shooting"):
        search = find_c_plus(scaled(w=0.3))
    assert search.found
    assert search.diagnostics["probe_side_changes"] > 1
    assert "non_isolated_connections" in search.diagnostics
    assert any("single-minimiser" in rec.message for rec in caplog.records)


def test_record_units_round_trip(results):
    d = scaled(w=0.03)
    rec = results[0.03].as_record(d)
    assert set(rec) == {"c_plus_scaled", "c_plus_mps", "c_minus_scaled", "c_minus_mps",
                        "r_plus", "r_minus", "d_c", "bracket_used"}
    for side in ("plus", "minus"):
        assert rec[f"c_{side}_mps"] == pytest.approx(rec[f"c_{side}_scaled"] * d.L_ref / d.t_ref, rel=1e-12)


def test_wind_threshold_lies_between_mild_and_strong():
    d = scaled()
    lo, hi = wind_threshold(d, w_lo=scaled(w=0.03).w_tilde, w_hi=scaled(w=0.3).w_tilde, max_steps=5)
    assert lo < hi
    assert find_c_plus(d.with_wind(-lo)).found
    assert not find_c_plus(d.with_wind(-hi)).found
    assert math.isclose(hi - lo, (scaled(w=0.3).w_tilde - scaled(w=0.03).w_tilde) / 32)
