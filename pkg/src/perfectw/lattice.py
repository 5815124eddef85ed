"""Coupling matrices and exact single-photon propagation in waveguide arrays.

A single photon shared between ``n`` identical, evanescently coupled guides
lives in the single-excitation sector, so the Heisenberg evolution of the
creation operators reduces to an ``n x n`` linear problem::

    i dA/dz = M A,    A(z) = exp(-i z M) A(0)

with ``M`` real, symmetric and tridiagonal. Everything here is expressed in
terms of the matrix entries; if the lattice is built with ``k = 1`` the
propagation length is the dimensionless product ``kz``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from perfectw.errors import NumericError, ValidationError

NORM_TOL = 1e-10


@dataclass(frozen=True)
class CouplingSpec:
    """Nearest-neighbour lattice: ``n_guides`` guides, bond ``j`` couples at ``k * gamma[j]``."""

    n_guides: int
    gamma: tuple[float, ...]
    k: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "gamma", tuple(float(g) for g in self.gamma))
        if int(self.n_guides) != self.n_guides or self.n_guides < 2:
            raise ValidationError("n_guides", f"need an integer >= 2, got {self.n_guides!r}")
        if len(self.gamma) != self.n_guides - 1:
            raise ValidationError(
                "gamma",
                f"expected {self.n_guides - 1} bond weights, got {len(self.gamma)}",
            )
        bad = [g for g in self.gamma if not (np.isfinite(g) and g > 0)]
        if bad:
            raise ValidationError("gamma", f"bond weights must be positive, got {bad}")
        if not (np.isfinite(self.k) and self.k > 0):
            raise ValidationError("k", f"coupling strength must be positive, got {self.k!r}")


@dataclass(frozen=True, eq=False)
class ModeState:
    """Single-photon amplitudes over the guide modes.

    ``normalized`` selects the contract: normalized states are checked to
    ``NORM_TOL`` on construction, while sub-normalized states (for example a
    post-selected block of a lossy density matrix) only need norm <= 1.
    """

    amplitudes: np.ndarray
    normalized: bool = True

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex).reshape(-1)
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)
        if amps.size < 1:
            raise ValidationError("amplitudes", "state needs at least one mode")
        norm = self.norm
        if self.normalized and abs(norm - 1.0) > NORM_TOL:
            raise ValidationError("amplitudes", f"state is not normalized (norm {norm:.12g})")
        if not self.normalized and norm > 1.0 + NORM_TOL:
            raise ValidationError("amplitudes", f"sub-normalized state has norm {norm:.12g} > 1")

    @classmethod
    def basis(cls, n_modes: int, mode: int) -> "ModeState":
        """Photon injected into guide ``mode`` (0-based)."""
        if not 0 <= mode < n_modes:
            raise ValidationError("mode", f"index {mode} out of range for {n_modes} modes")
        amps = np.zeros(n_modes, dtype=complex)
        amps[mode] = 1.0
        return cls(amps)

    @property
    def n_modes(self) -> int:
        return self.amplitudes.size

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    @property
    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def __len__(self):
        return self.n_modes


def _as_amplitudes(state) -> np.ndarray:
    if isinstance(state, ModeState):
        return state.amplitudes
    return np.asarray(state, dtype=complex).reshape(-1)


def build_coupling_matrix(spec: CouplingSpec) -> np.ndarray:
    """Real symmetric tridiagonal coupling matrix with off-diagonal ``k * gamma_j``.

    Diagonal propagation constants are dropped: for identical guides they
    only contribute a global phase.
    """
    bonds = spec.k * np.asarray(spec.gamma, dtype=float)
    return np.diag(bonds, 1) + np.diag(bonds, -1)


def lattice(gamma: Sequence[float], k: float = 1.0) -> np.ndarray:
    """Shorthand for ``build_coupling_matrix`` from bond weights alone."""
    return build_coupling_matrix(CouplingSpec(len(gamma) + 1, tuple(gamma), k))


def _check_coupling_matrix(M) -> np.ndarray:
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValidationError("M", f"coupling matrix must be square, got shape {M.shape}")
    if np.iscomplexobj(M):
        if np.max(np.abs(M.imag), initial=0.0) > 0:
            raise ValidationError("M", "coupling matrix must be real")
        M = M.real
    M = M.astype(float)
    if not np.allclose(M, M.T, rtol=0, atol=1e-14):
        raise ValidationError("M", "coupling matrix must be symmetric")
    if np.any(np.triu(M, 2)):
        raise ValidationError("M", "coupling matrix must be tridiagonal")
    return M


def evolution_operator(M, z: float) -> np.ndarray:
    """Propagator ``exp(-i z M)`` from the real-symmetric eigendecomposition of ``M``.

    Args:
        M: coupling matrix (units of inverse length).
        z: propagation length, in the reciprocal units of ``M``.

    Raises:
        NumericError: if the eigensolver fails or the decomposition residual
            is too large to trust the result.
    """
    return evolution_operators(M, [z])[0]


def evolution_operators(M, zs) -> np.ndarray:
    """Stack of propagators for every length in ``zs`` from one eigendecomposition."""
    M = _check_coupling_matrix(M)
    zs = np.asarray(zs, dtype=float).reshape(-1)
    if np.any(zs < 0):
        raise ValidationError("z", f"propagation length must be nonnegative, got {zs.min()!r}")
    try:
        evals, V = np.linalg.eigh(M)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"eigensolver did not converge: {exc}") from exc
    scale = max(1.0, float(np.max(np.abs(M), initial=0.0)))
    residual = float(np.max(np.abs(M @ V - V * evals), initial=0.0)) / scale
    if residual > 1e-12:
        raise NumericError("eigendecomposition of coupling matrix is inaccurate", residual)
    phases = np.exp(-1j * zs[:, None] * evals[None, :])
    return np.einsum("ij,zj,kj->zik", V, phases, V)


def closed_form_evolution_s1(kz: float) -> np.ndarray:
    """Analytic propagator of the ``gamma = (1, sqrt 2)`` lattice at normalized length ``kz``."""
    c = np.cos(np.sqrt(3.0) * kz)
    s = np.sin(np.sqrt(3.0) * kz)
    r2, r3 = np.sqrt(2.0), np.sqrt(3.0)
    return np.array(
        [
            [(2 + c) / 3, -1j * s / r3, r2 / 3 * (c - 1)],
            [-1j * s / r3, c, -1j * r2 / r3 * s],
            [r2 / 3 * (c - 1), -1j * r2 / r3 * s, (1 + 2 * c) / 3],
        ],
        dtype=complex,
    )


def closed_form_evolution_s2(kz: float) -> np.ndarray:
    """Analytic propagator of the ``gamma = (1, sqrt 3)`` lattice at normalized length ``kz``."""
    c, s = np.cos(kz), np.sin(kz)
    c2 = np.cos(2 * kz)
    r3 = np.sqrt(3.0)
    return np.array(
        [
            [(3 + c2) / 4, -1j * c * s, -r3 / 2 * s**2],
            [-1j * c * s, c2, -1j * r3 * c * s],
            [-r3 / 2 * s**2, -1j * r3 * c * s, (1 + 3 * c2) / 4],
        ],
        dtype=complex,
    )


def evolve(state: ModeState, M, z: float) -> ModeState:
    """Propagate a single-photon state through length ``z`` of the lattice ``M``."""
    amps = _as_amplitudes(state)
    M = np.asarray(M)
    if M.shape != (amps.size, amps.size):
        raise ValidationError(
            "state", f"state has {amps.size} modes but coupling matrix is {M.shape}"
        )
    normalized = state.normalized if isinstance(state, ModeState) else True
    return ModeState(evolution_operator(M, z) @ amps, normalized=normalized)


def apply_phase_shift(state: ModeState, mode: int, phi: float) -> ModeState:
    """Multiply the amplitude of guide ``mode`` (0-based) by ``exp(i phi)``."""
    amps = np.array(_as_amplitudes(state))
    if not 0 <= mode < amps.size:
        raise ValidationError("mode", f"index {mode} out of range for {amps.size} modes")
    amps[mode] *= np.exp(1j * phi)
    normalized = state.normalized if isinstance(state, ModeState) else True
    return ModeState(amps, normalized=normalized)


def overlap(a: ModeState, b: ModeState) -> complex:
    """Inner product ``<a|b>``."""
    va, vb = _as_amplitudes(a), _as_amplitudes(b)
    if va.size != vb.size:
        raise ValidationError("state", f"dimension mismatch: {va.size} vs {vb.size}")
    return complex(np.vdot(va, vb))


def equal_up_to_global_phase(a: ModeState, b: ModeState, tol: float = 1e-9) -> bool:
    """True when ``|<a|b>| >= 1 - tol``; componentwise phases are never compared."""
    return abs(overlap(a, b)) >= 1.0 - tol
