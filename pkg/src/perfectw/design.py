"""Inverse design of three-guide lattices that emit a perfect W-state.

A photon injected into the centre guide of the lattice ``(1, gamma)`` leaves
with amplitudes::

    c1 = -i sin(W kz) / W,   c2 = cos(W kz),   c3 = -i gamma sin(W kz) / W

where ``W = sqrt(1 + gamma**2)``. Matching the magnitudes to
``(1, s, s + 1) / (2 + 2s)`` fixes ``gamma = sqrt(s + 1)`` and the first
generation length ``kz* = arctan(sqrt(W**2 / s)) / W``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import bisect

from perfectw.errors import NumericError, ValidationError
from perfectw.lattice import ModeState, apply_phase_shift, evolution_operators, evolve, lattice

CENTER = 1
ROOT_XTOL = 1e-12
SCAN_STEP = 1e-4


def _check_s(s: float) -> float:
    if not (math.isfinite(s) and s > 0):
        raise ValidationError("s", f"asymmetry parameter must be positive, got {s!r}")
    return float(s)


@dataclass(frozen=True)
class WTarget:
    """Generalized perfect W-state ``(1, sqrt(s) e^{i phi1}, sqrt(s+1) e^{i phi2}) / sqrt(2+2s)``."""

    s: float
    phi1: float = 0.0
    phi2: float = 0.0

    def __post_init__(self):
        _check_s(self.s)

    @property
    def probabilities(self) -> np.ndarray:
        return np.array([1.0, self.s, self.s + 1.0]) / (2.0 + 2.0 * self.s)


@dataclass(frozen=True)
class DesignSolution:
    s: float
    gamma: float
    kz_star: float
    z_star_cm: float
    k: float
    separations: tuple[float, ...] | None = None
    recurrence: tuple[float, ...] = field(default_factory=tuple)

    @property
    def bonds(self) -> tuple[float, float]:
        return (1.0, self.gamma)

    @property
    def recurrence_cm(self) -> tuple[float, ...]:
        return tuple(kz / self.k for kz in self.recurrence)


def gamma_for(s: float) -> float:
    """Second bond weight (the first is fixed to 1)."""
    return math.sqrt(_check_s(s) + 1.0)


def bond_weights(s: float) -> tuple[float, float]:
    return (1.0, gamma_for(s))


def kz_for(s: float) -> float:
    """Closed-form first generation length in units of ``1/k``."""
    s = _check_s(s)
    w2 = 1.0 + gamma_for(s) ** 2
    return math.atan(math.sqrt(w2 / s)) / math.sqrt(w2)


def center_probabilities(s: float, kz: float) -> np.ndarray:
    """Guide populations after centre injection on the lattice designed for ``s``."""
    M = lattice(bond_weights(s))
    return evolve(ModeState.basis(3, CENTER), M, kz).probabilities


def _centre_mismatch(s: float):
    target = WTarget(s).probabilities[CENTER]
    M = lattice(bond_weights(s))
    psi0 = ModeState.basis(3, CENTER)
    return lambda kz: evolve(psi0, M, kz).probabilities[CENTER] - target


def kz_numeric(s: float) -> float:
    """First generation length found by bisection on the propagated centre population.

    The bracket ``(0, pi / (2 W))`` holds exactly one crossing: the centre
    population falls monotonically from 1 to 0 across it.
    """
    s = _check_s(s)
    f = _centre_mismatch(s)
    hi = math.pi / (2.0 * math.sqrt(1.0 + gamma_for(s) ** 2))
    lo = 0.0
    if not f(lo) > 0 > f(hi):
        raise NumericError("generation length is not bracketed", residual=min(abs(f(lo)), abs(f(hi))))
    return bisect(f, lo, hi, xtol=ROOT_XTOL, rtol=4 * np.finfo(float).eps, maxiter=200)


def physical_length(kz: float, k: float) -> float:
    """Convert a normalized length to cm for coupling strength ``k`` (cm^-1)."""
    if not (math.isfinite(k) and k > 0):
        raise ValidationError("k", f"coupling strength must be positive, got {k!r}")
    return kz / k


def separations(s: float, d0: float, d1: float) -> list[float]:
    """Guide separations ``d_j = d1 - d0 ln(gamma_j)`` for the two bonds.

    ``d0`` and ``d1`` are fabrication fit parameters of the exponential
    coupling-versus-gap law ``k_j = k exp(-(d_j - d1) / d0)``; they carry the
    length unit of the result.
    """
    _check_s(s)
    for name, value in (("d0", d0), ("d1", d1)):
        if not (math.isfinite(value) and value > 0):
            raise ValidationError(name, f"fit parameter must be positive, got {value!r}")
    return [d1 - d0 * math.log(g) for g in bond_weights(s)]


def target_state(t: WTarget) -> ModeState:
    amps = np.array(
        [1.0, math.sqrt(t.s) * np.exp(1j * t.phi1), math.sqrt(t.s + 1.0) * np.exp(1j * t.phi2)]
    )
    return ModeState(amps / math.sqrt(2.0 + 2.0 * t.s))


def recurrence_positions(s: float, count: int) -> list[float]:
    """First ``count`` normalized lengths where the populations match the target.

    Sign-flipped amplitude patterns count; they differ from the target only
    by phases that :func:`compensating_phases` removes. ``s = 1`` uses the
    closed form ``sqrt(3) kz in {pi/3, 2pi/3, 4pi/3, 5pi/3} + 2 pi m``; other
    values are located by scanning on a ``1e-4`` grid and polishing each
    sign change by bisection.
    """
    s = _check_s(s)
    if int(count) != count or count < 1:
        raise ValidationError("count", f"need a positive integer, got {count!r}")
    if s == 1.0:
        base = (1, 2, 4, 5)
        return [
            (math.pi / 3) * (base[i % 4] + 6 * (i // 4)) / math.sqrt(3.0) for i in range(count)
        ]

    f = _centre_mismatch(s)
    M = lattice(bond_weights(s))
    target = WTarget(s).probabilities[CENTER]
    # populations are periodic in W kz with period pi, two crossings per period
    period = math.pi / math.sqrt(2.0 + s)
    grid = np.arange(0.0, period * (count // 2 + 1) + SCAN_STEP, SCAN_STEP)
    values = np.abs(evolution_operators(M, grid)[:, CENTER, CENTER]) ** 2 - target
    roots: list[float] = []
    for i in np.flatnonzero(np.sign(values[:-1]) != np.sign(values[1:])):
        if values[i] == 0.0:
            roots.append(float(grid[i]))
        elif values[i + 1] != 0.0:
            roots.append(bisect(f, grid[i], grid[i + 1], xtol=ROOT_XTOL, rtol=4 * np.finfo(float).eps))
        if len(roots) == count:
            return roots
    raise NumericError("recurrence scan found too few crossings")


def compensating_phases(state: ModeState, t: WTarget) -> np.ndarray:
    """Per-guide phases that map ``state`` onto ``t`` up to a global phase.

    Guide 1 is the reference and always gets zero.
    """
    amps = state.amplitudes
    want = target_state(t).amplitudes
    phases = np.angle(want) - np.angle(amps)
    return np.mod(phases - phases[0] + np.pi, 2 * np.pi) - np.pi


def compensate(state: ModeState, t: WTarget) -> ModeState:
    for mode, phi in enumerate(compensating_phases(state, t)):
        if phi != 0.0:
            state = apply_phase_shift(state, mode, phi)
    return state


def generated_state(s: float, kz: float | None = None, compensated: bool = True) -> ModeState:
    """Output of centre injection on the designed lattice, optionally phase-corrected."""
    kz = kz_for(s) if kz is None else kz
    psi = evolve(ModeState.basis(3, CENTER), lattice(bond_weights(s)), kz)
    return compensate(psi, WTarget(s)) if compensated else psi


def solve_design(
    s: float,
    k: float,
    d0: float | None = None,
    d1: float | None = None,
    recurrences: int = 4,
) -> DesignSolution:
    """Full lattice design for the perfect W-state with parameter ``s``."""
    s = _check_s(s)
    kz = kz_for(s)
    z = physical_length(kz, k)
    seps = None
    if d0 is not None or d1 is not None:
        if d0 is None or d1 is None:
            raise ValidationError("d0" if d0 is None else "d1", "d0 and d1 must be given together")
        seps = tuple(separations(s, d0, d1))
    return DesignSolution(
        s=s,
        gamma=gamma_for(s),
        kz_star=kz,
        z_star_cm=z,
        k=k,
        separations=seps,
        recurrence=tuple(recurrence_positions(s, recurrences)),
    )
