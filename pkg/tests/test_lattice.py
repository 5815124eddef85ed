import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import random_tridiagonal, taylor_expm
from perfectw.errors import ValidationError
from perfectw.lattice import (
    CouplingSpec,
    ModeState,
    apply_phase_shift,
    build_coupling_matrix,
    closed_form_evolution_s1,
    closed_form_evolution_s2,
    equal_up_to_global_phase,
    evolution_operator,
    evolve,
    lattice,
)

R2, R3 = math.sqrt(2), math.sqrt(3)
KZ_S1 = 0.6046
S1 = lattice((1.0, R2))
S2 = lattice((1.0, R3))
CENTER = ModeState.basis(3, 1)


@pytest.mark.parametrize(
    "n, gamma, k, expected",
    [
        (3, (1, R2), 1.0, [[0, 1, 0], [1, 0, R2], [0, R2, 0]]),
        (3, (1, R3), 1.0, [[0, 1, 0], [1, 0, R3], [0, R3, 0]]),
        (2, (1,), 0.37, [[0, 0.37], [0.37, 0]]),
    ],
)
def test_coupling_matrix(n, gamma, k, expected):
    M = build_coupling_matrix(CouplingSpec(n, gamma, k))
    np.testing.assert_allclose(M, expected, atol=1e-15)


@pytest.mark.parametrize(
    "kwargs, field",
    [
        (dict(n_guides=3, gamma=(1, 0), k=1), "gamma"),
        (dict(n_guides=3, gamma=(1, -2), k=1), "gamma"),
        (dict(n_guides=3, gamma=(1, 1), k=0), "k"),
        (dict(n_guides=3, gamma=(1, 1), k=-0.37), "k"),
        (dict(n_guides=1, gamma=(), k=1), "n_guides"),
        (dict(n_guides=3, gamma=(1,), k=1), "gamma"),
    ],
)
def test_invalid_spec_names_field(kwargs, field):
    with pytest.raises(ValidationError) as err:
        CouplingSpec(**kwargs)
    assert err.value.field == field


def test_identity_at_zero():
    np.testing.assert_allclose(evolution_operator(S1, 0.0), np.eye(3), atol=1e-15)


def test_fig2_populations_at_generation_length():
    U = evolution_operator(S1, KZ_S1)
    np.testing.assert_allclose(np.abs(U[:, 1]) ** 2, [0.25, 0.25, 0.5], atol=1e-3)


def test_matches_series_oracle_fixed_length():
    rng = np.random.default_rng(7)
    M = random_tridiagonal(rng, 3)
    np.testing.assert_allclose(evolution_operator(M, 0.7), taylor_expm(-0.7j * M), atol=1e-10)


def test_rejects_non_tridiagonal():
    M = np.ones((3, 3)) - np.eye(3)
    with pytest.raises(ValidationError):
        evolution_operator(M, 1.0)


def test_closed_form_s1_entries():
    np.testing.assert_allclose(closed_form_evolution_s1(0.0), np.eye(3), atol=1e-15)
    U = closed_form_evolution_s1(math.pi / (3 * R3))
    assert U[1, 1] == pytest.approx(0.5, abs=1e-15)


def test_closed_form_s2_entries():
    np.testing.assert_allclose(closed_form_evolution_s2(0.0), np.eye(3), atol=1e-15)
    U = closed_form_evolution_s2(0.4777)
    # centre amplitude cos(2kz) carries the target population 2/6
    assert abs(U[1, 1]) ** 2 == pytest.approx(1 / 3, abs=2e-3)
    assert abs(U[0, 1]) ** 2 == pytest.approx(1 / 6, abs=2e-3)


@pytest.mark.parametrize("closed, M", [(closed_form_evolution_s1, S1), (closed_form_evolution_s2, S2)])
def test_closed_forms_match_numeric(closed, M):
    for kz in np.linspace(0, 2, 100):
        assert np.max(np.abs(closed(kz) - evolution_operator(M, kz))) < 1e-10


def test_evolve_center_injection_amplitude_law():
    for kz in np.linspace(0, 3, 31):
        p = evolve(CENTER, S1, kz).probabilities
        sn = math.sin(R3 * kz) ** 2
        np.testing.assert_allclose(p, [sn / 3, math.cos(R3 * kz) ** 2, 2 * sn / 3], atol=1e-10)


def test_evolve_zero_length_and_dimension_check():
    psi = ModeState([0.6, 0.8j, 0])
    np.testing.assert_allclose(evolve(psi, S1, 0.0).amplitudes, psi.amplitudes, atol=1e-15)
    with pytest.raises(ValidationError):
        evolve(ModeState.basis(2, 0), S1, 1.0)


def test_phase_structure_of_center_column():
    for kz in np.linspace(0, 5, 51):
        c = evolve(CENTER, S1, kz).amplitudes
        assert abs(c[0].real) < 1e-10 and abs(c[2].real) < 1e-10
        assert abs(c[1].imag) < 1e-10


def test_mirror_symmetry_uniform_lattice():
    M = lattice((1.0, 1.0))
    for kz in np.linspace(0, 5, 51):
        c = evolve(CENTER, M, kz).amplitudes
        assert abs(abs(c[0]) - abs(c[2])) < 1e-10


def test_phase_shift_basics():
    psi = ModeState([0.6, 0.8j, 0])
    assert apply_phase_shift(psi, 1, 0.0).amplitudes.tolist() == psi.amplitudes.tolist()
    np.testing.assert_allclose(apply_phase_shift(psi, 1, 2 * math.pi).amplitudes, psi.amplitudes, atol=1e-12)
    np.testing.assert_allclose(apply_phase_shift(psi, 1, math.pi / 2).amplitudes, [0.6, -0.8, 0], atol=1e-15)
    with pytest.raises(ValidationError):
        apply_phase_shift(psi, 3, 1.0)


def test_phase_shift_restores_perfect_w():
    psi = evolve(CENTER, S1, KZ_S1)
    target = ModeState([0.5, 0.5, 1 / R2])
    shifted = apply_phase_shift(psi, 1, -math.pi / 2)
    assert abs(np.vdot(target.amplitudes, shifted.amplitudes)) ** 2 >= 1 - 1e-6
    # all three amplitudes now share one phase
    phases = np.angle(shifted.amplitudes)
    assert np.ptp(phases) < 1e-3


def test_equal_up_to_global_phase():
    psi = ModeState([0.5, 0.5j, 1 / R2])
    assert equal_up_to_global_phase(psi, psi, 1e-12)
    assert equal_up_to_global_phase(psi, ModeState(np.exp(1j * math.pi / 7) * psi.amplitudes), 1e-12)
    assert not equal_up_to_global_phase(ModeState.basis(3, 0), ModeState.basis(3, 1), 1e-6)
    with pytest.raises(ValidationError):
        equal_up_to_global_phase(psi, ModeState.basis(2, 0))


def test_mode_state_contracts():
    with pytest.raises(ValidationError):
        ModeState([1.0, 1.0])
    sub = ModeState([0.5, 0.5], normalized=False)
    assert sub.norm == pytest.approx(math.sqrt(0.5))
    with pytest.raises(ValidationError):
        ModeState([1.0, 1.0], normalized=False)


bonds = st.lists(st.floats(0.05, 2.0), min_size=1, max_size=5)
lengths = st.floats(0.0, 10.0)


@settings(max_examples=60, deadline=None)
@given(bonds, lengths)
def test_unitarity(gamma, z):
    U = evolution_operator(lattice(gamma), z)
    assert np.max(np.abs(U.conj().T @ U - np.eye(U.shape[0]))) < 1e-12


@settings(max_examples=60, deadline=None)
@given(bonds, lengths, lengths)
def test_composition(gamma, z1, z2):
    M = lattice(gamma)
    np.testing.assert_allclose(
        evolution_operator(M, z1 + z2), evolution_operator(M, z1) @ evolution_operator(M, z2), atol=1e-10
    )


@settings(max_examples=60, deadline=None)
@given(bonds, lengths, st.integers(0, 2**32 - 1))
def test_norm_conservation(gamma, z, seed):
    n = len(gamma) + 1
    rng = np.random.default_rng(seed)
    v = rng.normal(size=n) + 1j * rng.normal(size=n)
    psi = ModeState(v / np.linalg.norm(v))
    assert abs(evolve(psi, lattice(gamma), z).norm - 1) < 1e-10
