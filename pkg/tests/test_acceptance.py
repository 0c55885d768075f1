"""Acceptance suite: each test prints one PASS/FAIL line per criterion it checks."""

import dataclasses
import time

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import scaled
from oracles import REFERENCE_PDE_SPEEDS, REFERENCE_ODE_SPEEDS
from wildfront.harness import run_scenario
from wildfront.params import PhysicalParams, fit_lambda, nondimensionalize
from wildfront.pde import Grid1D, ModelVariant, iterate, make_hot_region_ic
from wildfront.shooting import find_c_plus
from wildfront.twode import TWState, tw_rhs

WIND_SCENARIOS = (("no_wind", 0.0), ("mild_wind", 0.03), ("strong_wind", 0.3))


@pytest.fixture
def verdict(capsys):
    """Print a PASS/FAIL line past pytest's capture, then assert it."""
    def check(label, ok, detail):
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} {label}: {detail}")
        assert ok, f"{label}: {detail}"
    return check


def rel(a, b):
    return abs(a - b) / abs(b)


def pde_speeds_mps(report, variant=ModelVariant.PF_linearized):
    d = report.dimensionless
    return tuple(None if c is None else d.speed_to_mps(c) for c in report.variants[variant].speeds())


def compare(found, expected, tol):
    """Per-entry relative errors; a missing wave must be missing on both sides."""
    errors = []
    for got, want in zip(found, expected):
        if want is None or got is None:
            errors.append(0.0 if want is got else float("inf"))
        else:
            errors.append(rel(got, want))
    return max(errors) <= tol, errors


def fmt_pair(pair):
    return "(" + ", ".join("NA" if c is None else f"{c:+.6f}" for c in pair) + ")"


@pytest.mark.parametrize("name, w", WIND_SCENARIOS)
def test_A1_shooting_speeds(name, w, verdict):
    d = scaled(w=w)
    found, times = [], []
    for sign in (-1.0, 1.0):
        t0 = time.perf_counter()
        search = find_c_plus(d.with_wind(sign * d.w_tilde) if sign < 0 else d)
        times.append(time.perf_counter() - t0)
        c = None if search.c is None else sign * d.speed_to_mps(search.c)
        found.append(c)
    ok, errors = compare(found, REFERENCE_ODE_SPEEDS[w], 0.05)
    ok_time = max(times) < 10.0
    verdict(f"A1 {name}", ok and ok_time,
            f"(c-, c+) = {fmt_pair(found)} m/s vs {fmt_pair(REFERENCE_ODE_SPEEDS[w])}, "
            f"max rel err {max(errors):.4f} (tol 0.05), slowest speed {max(times):.2f} s (limit 10 s)")


def test_A1_least_squares_lambda_is_documented(capsys):
    # informational: the fitted slope is not the convention the speeds rely on
    d = nondimensionalize(PhysicalParams(), fit_lambda(400.0, 300.0))
    found = find_c_plus(d).found
    with capsys.disabled():
        print(f"\nINFO A1 least-squares Lambda {d.Lambda:.6e}: wave found = {found}; "
              f"calibrated Lambda route is the one checked above")


@pytest.mark.parametrize("name, w", WIND_SCENARIOS)
def test_A2_linearized_pde_speeds(name, w, bundled_reports, verdict):
    found = pde_speeds_mps(bundled_reports[name])
    ok, errors = compare(found, REFERENCE_PDE_SPEEDS[w], 0.10)
    verdict(f"A2 {name}", ok,
            f"(c-, c+) = {fmt_pair(found)} m/s vs {fmt_pair(REFERENCE_PDE_SPEEDS[w])}, "
            f"max rel err {max(errors):.4f} (tol 0.10)")


@pytest.mark.parametrize("name, w", WIND_SCENARIOS)
def test_A3_pde_matches_shooting(name, w, bundled_reports, verdict):
    report = bundled_reports[name]
    pde = pde_speeds_mps(report)
    d = report.dimensionless
    ode = tuple(None if c is None else d.speed_to_mps(c)
                for c in (report.shooting.c_minus, report.shooting.c_plus))
    ok, errors = compare(pde, ode, 0.06)
    verdict(f"A3 {name}", ok,
            f"PDE {fmt_pair(pde)} vs ODE {fmt_pair(ode)} m/s, max rel diff {max(errors):.4f} (tol 0.06)")


@pytest.mark.parametrize("name, w", WIND_SCENARIOS)
def test_A4_ef_and_pf_speeds_agree_fuel_differs(name, w, bundled_reports, verdict):
    report = bundled_reports[name]
    ef = pde_speeds_mps(report, ModelVariant.EF_exponential)
    pf = pde_speeds_mps(report, ModelVariant.PF_exponential)
    ok_speed, errors = compare(ef, pf, 0.01)
    v_gap = float(np.max(np.abs(report.variants[ModelVariant.EF_exponential].final_state.v
                                - report.variants[ModelVariant.PF_exponential].final_state.v)))
    verdict(f"A4 {name}", ok_speed and v_gap > 0.01,
            f"EF {fmt_pair(ef)} vs PF {fmt_pair(pf)} m/s, max rel diff {max(errors):.4f} (tol 0.01); "
            f"max |v_EF - v_PF| at t_end = {v_gap:.4f} (needs > 0.01)")


def test_A5_extinction(bundled_reports, verdict):
    report = bundled_reports["extinction"]
    d = report.dimensionless
    t_end = d.t_from_s(report.scenario.t_end_seconds)
    lines, ok = [], abs(d.h_tilde - 1.5) < 1e-12
    for variant, res in report.variants.items():
        died = res.t_below_ignition is not None and res.t_below_ignition < t_end
        kind = res.classification.kind if res.classification else res.error
        ok &= died and kind == "extinction"
        when = "never" if res.t_below_ignition is None else f"{d.t_to_s(res.t_below_ignition):.1f} s"
        lines.append(f"{variant.value}: max u < 1 at {when}, {kind}")
    sh = report.shooting
    # extension only triggers while probes undershoot; here every probe overshoots
    ok &= sh.c_plus is None and sh.c_minus is None
    lines.append(f"shooting: {'not found' if sh.c_plus is None else 'found'} on bracket "
                 f"({sh.plus.bracket_used[0]:.3g}, {sh.plus.bracket_used[1]:.3g}), "
                 f"probe outcomes {sh.plus.diagnostics['probe_outcomes']}")
    verdict("A5 extinction", ok, f"h~ = {d.h_tilde:.3g}; " + "; ".join(lines))


def test_A6_no_wind_mirror_symmetry(bundled_reports, verdict):
    report = bundled_reports["no_wind"]
    worst = 0.0
    for res in report.variants.values():
        for s in res.snapshots:
            worst = max(worst, float(np.max(np.abs(s.u - s.u[::-1]))), float(np.max(np.abs(s.v - s.v[::-1]))))
    sh = report.shooting
    ok = worst == 0.0 and sh.c_minus == -sh.c_plus
    verdict("A6 symmetry", ok, f"max mirror defect over all snapshots {worst:.3g}; "
                               f"c- = {sh.c_minus!r}, c+ = {sh.c_plus!r}")


@settings(max_examples=10, deadline=None)
@given(variant=st.sampled_from(list(ModelVariant)), half=st.floats(3.0, 30.0), T_hot=st.floats(420.0, 600.0))
def test_A6_mirror_symmetry_property(variant, half, T_hot):
    d = scaled()
    grid = Grid1D(d.x_from_m(-80.0), d.x_from_m(80.0), 320)
    ic = make_hot_region_ic(grid, d, hot_range_m=(-half, half), T_hot=T_hot)
    for s in iterate(ic, grid, variant, d, t_end=10.0, dt=0.2):
        np.testing.assert_array_equal(s.u, s.u[::-1])
        np.testing.assert_array_equal(s.v, s.v[::-1])


def test_A7_halving_dx_and_dt(bundled_reports, verdict):
    base = bundled_reports["no_wind"]
    s = base.scenario
    fine = dataclasses.replace(s, n_cells=2 * s.n_cells, dt_seconds=s.dt_seconds / 2, transport_substeps=2,
                               variants=(ModelVariant.PF_linearized,))
    report = run_scenario(fine, write=False, shoot=False)
    coarse, refined = pde_speeds_mps(base), pde_speeds_mps(report)
    ok, errors = compare(refined, coarse, 0.01)
    verdict("A7 convergence", ok,
            f"n={s.n_cells}, dt={s.dt_seconds} s: {fmt_pair(coarse)}; n={fine.n_cells}, dt={fine.dt_seconds} s: "
            f"{fmt_pair(refined)} m/s, max rel change {max(errors):.4f} (tol 0.01)")


def test_A8_first_integral_conservation(bundled_reports, verdict):
    worst, n = 0.0, 0
    for name, _ in WIND_SCENARIOS:
        sh = bundled_reports[name].shooting
        for search in (sh.plus, sh.minus):
            if search.found:
                worst = max(worst, float(np.max(np.abs(search.trajectory.first_integral_residual()))))
                n += 1
    verdict("A8 conservation", n == 5 and worst < 1e-6,
            f"max relative drift {worst:.3g} over {n} accepted trajectories (tol 1e-6)")


@given(r=st.floats(0.001, 0.999), c=st.floats(0.05, 10.0), w=st.floats(-1.0, 1.0))
def test_A8_equilibria_are_fixed_points(r, c, w):
    d = scaled().with_wind(w)
    for on in (False, True):
        assert tw_rhs(TWState(0.0, 0.0, 1.0, 0.0), c, d, on) == (0.0, 0.0, 0.0)
    z = (1.0 - r) / (d.gamma * d.h_tilde)
    du, dv, dz = tw_rhs((0.0, r, z), c, d, True)
    assert abs(du) <= 8 * np.finfo(float).eps * c / d.gamma  # rounding of z only
    assert dv == 0.0 and dz == 0.0


def test_A9_monotone_wind_response(bundled_reports, verdict):
    pde = [pde_speeds_mps(bundled_reports[name])[1] for name, _ in WIND_SCENARIOS]
    ode = [bundled_reports[name].dimensionless.speed_to_mps(bundled_reports[name].shooting.c_plus)
           for name, _ in WIND_SCENARIOS]
    ok = all(a < b for a, b in zip(pde, pde[1:])) and all(a < b for a, b in zip(ode, ode[1:]))
    verdict("A9 ordering", ok, "c+ over w = 0, 0.03, 0.3 m/s: PDE "
            + " < ".join(f"{c:.4f}" for c in pde) + "; ODE " + " < ".join(f"{c:.4f}" for c in ode))
