"""Hardy-type nonlocality and the Bell-CH test for three-mode single-photon states.

Each guide is a qubit: ``|1>`` when it holds the photon, ``|0>`` when empty.
Two local measurements are available per site:

* ``Z``: outcome +1 for photon present, -1 for absent.
* ``K``: projection onto ``|k+> = cos(a/2)|1> + sin(a/2)|0>`` (outcome +1)
  or ``|k-> = sin(a/2)|1> - cos(a/2)|0>`` (outcome -1).

Qubit kets are indexed ``q1 q2 q3`` in binary, so ``|100>`` (photon in guide
1) is index 4. Lossy density matrices over ``(|000>, |100>, |010>, |001>)``
are embedded the same way; the vacuum reads ``z = -1`` at every site.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from perfectw.errors import ValidationError
from perfectw.lattice import ModeState

N_SITES = 3
VIOLATION_THRESHOLD = 1e-12
LADDER_TOL = 1e-10
CONDITIONING_FLOOR = 1e-12


def alpha_star() -> float:
    """Mixing angle with ``cos^2(a/2) = sqrt(2) sin^2(a/2)``, i.e. ``sin^2(a/2) = sqrt(2) - 1``."""
    return 2.0 * math.asin(math.sqrt(math.sqrt(2.0) - 1.0))


def embed(state) -> np.ndarray:
    """Map a single-photon state to the 8 qubit amplitudes, or a density matrix to 8x8.

    Accepts a :class:`ModeState`, an amplitude vector of length 3, an 8-vector
    already in qubit form, or a density matrix over vacuum + single excitation
    (4x4) or over all qubit kets (8x8).
    """
    if isinstance(state, ModeState):
        state = state.amplitudes
    arr = np.asarray(state, dtype=complex)
    dim = 2**N_SITES
    if arr.ndim == 1:
        if arr.size == dim:
            return arr
        if arr.size != N_SITES:
            raise ValidationError("state", f"expected {N_SITES} mode amplitudes, got {arr.size}")
        out = np.zeros(dim, dtype=complex)
        for j, c in enumerate(arr):
            out[1 << (N_SITES - 1 - j)] = c
        return out
    if arr.shape == (dim, dim):
        return arr
    if arr.shape == (N_SITES + 1, N_SITES + 1):
        idx = [0] + [1 << (N_SITES - 1 - j) for j in range(N_SITES)]
        out = np.zeros((dim, dim), dtype=complex)
        out[np.ix_(idx, idx)] = arr
        return out
    raise ValidationError("state", f"cannot embed array of shape {arr.shape}")


def basis_vector(setting: str, outcome: int, alpha: float) -> np.ndarray:
    """Single-site projector vector in the ``(|0>, |1>)`` basis."""
    c, s = math.cos(alpha / 2.0), math.sin(alpha / 2.0)
    if setting == "Z":
        vecs = {+1: (0.0, 1.0), -1: (1.0, 0.0)}
    elif setting == "K":
        vecs = {+1: (s, c), -1: (-c, s)}
    else:
        raise ValidationError("settings", f"unknown measurement {setting!r}; use 'Z' or 'K'")
    if outcome not in vecs:
        raise ValidationError("outcomes", f"outcome must be +1 or -1, got {outcome!r}")
    return np.array(vecs[outcome])


@dataclass(frozen=True)
class MeasurementSetting:
    """Per-site choices, e.g. ``("K", "K", "Z")``, sharing one K-basis angle."""

    sites: tuple[str, ...]
    alpha: float = field(default_factory=alpha_star)

    def __post_init__(self):
        sites = tuple(self.sites)
        object.__setattr__(self, "sites", sites)
        if len(sites) != N_SITES or any(x not in ("Z", "K") for x in sites):
            raise ValidationError("settings", f"need {N_SITES} entries from {{'Z', 'K'}}, got {sites!r}")

    @classmethod
    def parse(cls, settings, alpha: float | None = None) -> "MeasurementSetting":
        if isinstance(settings, MeasurementSetting):
            return settings if alpha is None else cls(settings.sites, alpha)
        sites = tuple(settings.upper()) if isinstance(settings, str) else tuple(settings)
        return cls(sites) if alpha is None else cls(sites, alpha)


def joint_probability(state, settings, outcomes: Sequence[int | None], alpha: float | None = None) -> float:
    """Probability of ``outcomes`` under ``settings``.

    A ``None`` outcome leaves that site unmeasured (summed over). Pure states
    give ``|<e1 e2 e3|psi>|^2``; density matrices give the trace form.
    """
    setting = MeasurementSetting.parse(settings, alpha)
    if len(outcomes) != N_SITES:
        raise ValidationError("outcomes", f"need {N_SITES} outcomes, got {len(outcomes)}")
    psi = embed(state)
    projectors = []
    for site, outcome in zip(setting.sites, outcomes):
        if outcome is None:
            projectors.append(np.eye(2))
        else:
            v = basis_vector(site, outcome, setting.alpha)
            projectors.append(np.outer(v, v))
    p1, p2, p3 = projectors
    if psi.ndim == 1:
        t = psi.reshape(2, 2, 2)
        projected = np.einsum("ai,bj,ck,ijk->abc", p1, p2, p3, t)
        prob = float(np.vdot(projected, projected).real)
    else:
        r = psi.reshape(2, 2, 2, 2, 2, 2)
        prob = float(np.einsum("ai,bj,ck,ijkabc->", p1, p2, p3, r).real)
    return prob


def outcome_table(state, settings, alpha: float | None = None) -> dict[tuple[int, int, int], float]:
    """All ``2**3`` joint probabilities for one setting triple."""
    signs = (+1, -1)
    return {
        (a, b, c): joint_probability(state, settings, (a, b, c), alpha)
        for a in signs
        for b in signs
        for c in signs
    }


@dataclass(frozen=True)
class HardyCertificate:
    alpha: float
    p_hardy: float
    p_veto1: float
    p_veto2: float
    p_veto3: float
    ch_lhs: float
    violated: bool
    vetoes_vanish: bool

    @property
    def vetoes(self) -> tuple[float, float, float]:
        return (self.p_veto1, self.p_veto2, self.p_veto3)


def hardy_certificate(state, alpha: float | None = None) -> HardyCertificate:
    """The four Bell-CH probabilities and the sign of their combination.

    ``vetoes_vanish`` records whether the three Hardy conditions hold; a
    positive CH value with nonzero vetoes is still a violation but no longer
    a Hardy argument.
    """
    alpha = alpha_star() if alpha is None else float(alpha)
    p_hardy = joint_probability(state, "KKK", (+1, +1, -1), alpha)
    p_veto1 = joint_probability(state, "ZKK", (-1, +1, -1), alpha)
    p_veto2 = joint_probability(state, "KZK", (+1, -1, -1), alpha)
    p_veto3 = joint_probability(state, "ZZK", (+1, +1, -1), alpha)
    ch = p_hardy - p_veto1 - p_veto2 - p_veto3
    return HardyCertificate(
        alpha=alpha,
        p_hardy=p_hardy,
        p_veto1=p_veto1,
        p_veto2=p_veto2,
        p_veto3=p_veto3,
        ch_lhs=ch,
        violated=ch > VIOLATION_THRESHOLD,
        vetoes_vanish=max(p_veto1, p_veto2, p_veto3) < VIOLATION_THRESHOLD,
    )


@dataclass(frozen=True)
class Rung:
    name: str
    description: str
    value: float | None
    status: str  # "pass", "fail" or "undefined"


@dataclass(frozen=True)
class LadderReport:
    alpha: float
    rungs: tuple[Rung, ...]

    @property
    def holds(self) -> bool:
        return all(r.status == "pass" for r in self.rungs)

    def __getitem__(self, name: str) -> Rung:
        for r in self.rungs:
            if r.name == name:
                return r
        raise KeyError(name)


def _conditional_rung(name, description, joint, condition) -> Rung:
    if condition <= CONDITIONING_FLOOR:
        return Rung(name, description, None, "undefined")
    value = joint / condition
    return Rung(name, description, value, "pass" if abs(value - 1.0) <= LADDER_TOL else "fail")


def hardy_ladder_report(state, alpha: float | None = None) -> LadderReport:
    """Evaluate the sometimes / always / always / never chain of the Hardy argument."""
    alpha = alpha_star() if alpha is None else float(alpha)
    p = lambda settings, outs: joint_probability(state, settings, outs, alpha)  # noqa: E731

    sometimes = p("KKK", (+1, +1, -1))
    rungs = [
        Rung(
            "sometimes",
            "p(k1=+1, k2=+1, k3=-1) > 0",
            sometimes,
            "pass" if sometimes > LADDER_TOL else "fail",
        ),
        _conditional_rung(
            "always_1",
            "p(z1=+1 | k2=+1, k3=-1) = 1",
            p("ZKK", (+1, +1, -1)),
            p("ZKK", (None, +1, -1)),
        ),
        _conditional_rung(
            "always_2",
            "p(z2=+1 | k1=+1, k3=-1) = 1",
            p("KZK", (+1, +1, -1)),
            p("KZK", (+1, None, -1)),
        ),
    ]
    never = p("ZZK", (+1, +1, None))
    rungs.append(
        Rung("never", "p(z1=+1, z2=+1) = 0", never, "pass" if never <= LADDER_TOL else "fail")
    )
    return LadderReport(alpha=alpha, rungs=tuple(rungs))
