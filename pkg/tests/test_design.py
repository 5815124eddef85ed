import math

import numpy as np
import pytest

from perfectw.design import (
    WTarget,
    compensate,
    compensating_phases,
    gamma_for,
    generated_state,
    kz_for,
    kz_numeric,
    physical_length,
    recurrence_positions,
    separations,
    solve_design,
    target_state,
)
from perfectw.errors import ValidationError
from perfectw.lattice import ModeState, equal_up_to_global_phase, evolve, lattice


@pytest.mark.parametrize("s, gamma", [(1, math.sqrt(2)), (2, math.sqrt(3)), (3, 2.0)])
def test_gamma_matches_per_s_laws(s, gamma):
    assert gamma_for(s) == pytest.approx(gamma, abs=1e-15)


@pytest.mark.parametrize("bad", [0, -1, float("nan")])
def test_rejects_nonpositive_s(bad):
    for fn in (gamma_for, kz_for, kz_numeric):
        with pytest.raises(ValidationError):
            fn(bad)


def test_kz_closed_form_values():
    assert kz_for(1) == pytest.approx(0.6046, abs=5e-5)
    assert kz_for(1) == pytest.approx(math.pi / (3 * math.sqrt(3)), abs=1e-15)
    assert kz_for(2) == pytest.approx(0.4777, abs=5e-5)
    assert kz_for(2) == pytest.approx(0.5 * math.atan(math.sqrt(2)), abs=1e-15)
    assert kz_for(3) == pytest.approx(math.atan(math.sqrt(5 / 3)) / math.sqrt(5), abs=1e-15)


def _bisect_centre_population(s, tol=1e-13):
    """Hand-rolled bisection on |c2|^2 = s/(2+2s) with the closed-form centre amplitude."""
    w = math.sqrt(2 + s)
    target = s / (2 + 2 * s)
    lo, hi = 0.0, math.pi / (2 * w)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if math.cos(w * mid) ** 2 > target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@pytest.mark.parametrize("s", [0.5, 1, 2, 3, 5])
def test_kz_numeric_agrees_with_closed_form(s):
    assert abs(kz_numeric(s) - kz_for(s)) < 1e-9
    assert abs(kz_numeric(s) - _bisect_centre_population(s)) < 1e-9


def test_kz_numeric_reference_values():
    assert kz_numeric(1) == pytest.approx(0.604599788, abs=1e-9)
    assert kz_numeric(2) == pytest.approx(0.477658309, abs=1e-9)
    assert kz_numeric(3) == pytest.approx(0.407741759, abs=1e-9)


def test_physical_length():
    assert physical_length(0.6046, 0.37) == pytest.approx(1.634, abs=1e-3)
    assert physical_length(0.4777, 0.37) == pytest.approx(1.291, abs=1e-3)
    assert physical_length(0.0, 0.37) == 0.0
    with pytest.raises(ValidationError):
        physical_length(1.0, 0.0)


def test_separations():
    d0, d1 = 3.0, 15.0
    s1 = separations(1, d0, d1)
    assert s1[0] == d1
    assert s1[1] == pytest.approx(d1 - d0 * math.log(math.sqrt(2)))
    assert separations(2, d0, d1)[1] == pytest.approx(d1 - d0 * math.log(math.sqrt(3)))
    assert separations(3, d0, d1)[1] == pytest.approx(d1 - d0 * math.log(math.sqrt(4)))
    with pytest.raises(ValidationError):
        separations(1, 0.0, d1)
    with pytest.raises(ValidationError):
        separations(1, d0, -1.0)


@pytest.mark.parametrize("s", [0.3, 1, 2, 7])
def test_stronger_bond_means_smaller_gap(s):
    d = separations(s, 2.0, 10.0)
    assert d[1] < d[0]


def test_separations_reproduce_couplings_through_gap_law():
    k, d0, d1 = 0.37, 2.5, 12.0
    for s in (1, 2, 3):
        ks = [k * math.exp(-(d - d1) / d0) for d in separations(s, d0, d1)]
        np.testing.assert_allclose(ks, [k, k * gamma_for(s)], rtol=1e-14)


def test_target_states():
    np.testing.assert_allclose(target_state(WTarget(1)).amplitudes, [0.5, 0.5, 1 / math.sqrt(2)], atol=1e-15)
    np.testing.assert_allclose(
        target_state(WTarget(2)).amplitudes, np.array([1, math.sqrt(2), math.sqrt(3)]) / math.sqrt(6), atol=1e-15
    )
    np.testing.assert_allclose(
        target_state(WTarget(1, phi1=math.pi)).amplitudes, [0.5, -0.5, 1 / math.sqrt(2)], atol=1e-15
    )


def test_recurrence_s1():
    kz = recurrence_positions(1, 2)
    z = [physical_length(x, 0.37) for x in kz]
    assert z[0] == pytest.approx(1.634, abs=1e-3)
    assert z[1] == pytest.approx(3.268, abs=1e-3)
    assert kz[1] == pytest.approx(2 * kz[0], abs=1e-14)
    assert recurrence_positions(1, 1) == [pytest.approx(math.pi / (3 * math.sqrt(3)), abs=1e-15)]
    with pytest.raises(ValidationError):
        recurrence_positions(1, 0)


@pytest.mark.parametrize("s", [0.5, 2, 3])
def test_recurrence_general_s_reaches_target(s):
    want = WTarget(s).probabilities
    positions = recurrence_positions(s, 6)
    assert positions == sorted(positions) and positions[0] == pytest.approx(kz_for(s), abs=1e-10)
    M = lattice((1.0, gamma_for(s)))
    for kz in positions:
        np.testing.assert_allclose(evolve(ModeState.basis(3, 1), M, kz).probabilities, want, atol=1e-9)


def test_recurrence_scan_agrees_with_s1_closed_form():
    # nudge off s=1 to force the scanning branch, then compare
    scanned = recurrence_positions(1 + 1e-12, 5)
    np.testing.assert_allclose(scanned, recurrence_positions(1, 5), atol=1e-9)


@pytest.mark.parametrize("s", [0.25, 0.5, 1, 2, 3, 5, 10])
def test_round_trip_probabilities(s):
    M = lattice((1.0, gamma_for(s)))
    p = evolve(ModeState.basis(3, 1), M, kz_for(s)).probabilities
    np.testing.assert_allclose(p, np.array([1, s, s + 1]) / (2 + 2 * s), atol=1e-9)


@pytest.mark.parametrize("s", [0.25, 0.5, 1, 2, 3, 5, 10])
def test_phase_round_trip(s):
    raw = generated_state(s, compensated=False)
    phases = compensating_phases(raw, WTarget(s))
    assert phases[0] == 0.0
    assert abs(phases[2]) < 1e-12  # guides 1 and 3 already share their phase
    fixed = compensate(raw, WTarget(s))
    assert equal_up_to_global_phase(fixed, target_state(WTarget(s)), 1e-9)


def test_phase_round_trip_with_target_phases():
    t = WTarget(2, phi1=0.3, phi2=-1.1)
    fixed = compensate(generated_state(2, compensated=False), t)
    assert equal_up_to_global_phase(fixed, target_state(t), 1e-12)


def test_sign_flipped_recurrence_is_compensated():
    kz2 = recurrence_positions(1, 2)[1]
    raw = generated_state(1, kz2, compensated=False)
    assert raw.amplitudes[1].real < 0
    assert equal_up_to_global_phase(compensate(raw, WTarget(1)), target_state(WTarget(1)), 1e-12)


def test_kz_decreasing_in_s():
    values = [kz_for(s) for s in np.linspace(0.5, 10, 200)]
    assert all(a > b for a, b in zip(values, values[1:]))


def test_solve_design():
    sol = solve_design(1, 0.37, d0=2.0, d1=10.0, recurrences=3)
    assert sol.gamma == pytest.approx(math.sqrt(2))
    assert sol.z_star_cm == pytest.approx(1.634, abs=1e-3)
    assert len(sol.recurrence) == 3
    assert sol.separations == pytest.approx((10.0, 10.0 - 2.0 * math.log(math.sqrt(2))))
    assert solve_design(2, 0.37).separations is None
    with pytest.raises(ValidationError):
        solve_design(1, 0.37, d0=2.0)
