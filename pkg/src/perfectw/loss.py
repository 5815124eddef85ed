"""Photon loss in the vacuum plus single-excitation sector.

Density matrices are ``(n+1) x (n+1)`` over the ordered basis
``(|0...0>, |1_1>, ..., |1_n>)``; for three guides that is
``(|000>, |100>, |010>, |001>)``. The generator is::

    d rho/dz = -i [H, rho] - beta sum_j (a_j^+ a_j rho - 2 a_j rho a_j^+ + rho a_j^+ a_j)

so each guide empties at rate ``2 beta`` into the vacuum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from perfectw import design as _design
from perfectw.errors import NumericError, ValidationError
from perfectw.lattice import ModeState, lattice

HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-8
POSITIVITY_TOL = 1e-9
MAX_KZ_STEP = 1e-3
DEFAULT_RATIOS = tuple(round(0.01 * i, 2) for i in range(11))


@dataclass(frozen=True)
class LossParams:
    """Loss rate ``beta`` per unit length (cm^-1); ``beta_over_k`` is kept for reporting."""

    beta: float
    beta_over_k: float | None = None

    def __post_init__(self):
        if not (math.isfinite(self.beta) and self.beta >= 0):
            raise ValidationError("beta", f"loss rate must be nonnegative, got {self.beta!r}")

    @classmethod
    def from_ratio(cls, beta_over_k: float, k: float) -> "LossParams":
        if not (math.isfinite(beta_over_k) and beta_over_k >= 0):
            raise ValidationError("beta_over_k", f"must be nonnegative, got {beta_over_k!r}")
        if not (math.isfinite(k) and k > 0):
            raise ValidationError("k", f"coupling strength must be positive, got {k!r}")
        return cls(beta=beta_over_k * k, beta_over_k=beta_over_k)


def embed_hamiltonian(M) -> np.ndarray:
    """Coupling matrix padded with a decoupled vacuum row and column in front."""
    M = np.asarray(M)
    n = M.shape[0]
    H = np.zeros((n + 1, n + 1), dtype=complex)
    H[1:, 1:] = M
    return H


def lowering_operators(n_modes: int) -> np.ndarray:
    """Stack of ``a_j``, each mapping ``|1_j>`` to the vacuum."""
    ops = np.zeros((n_modes, n_modes + 1, n_modes + 1), dtype=complex)
    for j in range(n_modes):
        ops[j, 0, j + 1] = 1.0
    return ops


def pure_density_matrix(state: ModeState) -> np.ndarray:
    """``|psi><psi|`` of a single-photon state, embedded with an empty vacuum entry."""
    amps = state.amplitudes if isinstance(state, ModeState) else np.asarray(state, dtype=complex)
    vec = np.concatenate([[0.0], amps])
    return np.outer(vec, vec.conj())


def vacuum_density_matrix(n_modes: int) -> np.ndarray:
    rho = np.zeros((n_modes + 1, n_modes + 1), dtype=complex)
    rho[0, 0] = 1.0
    return rho


def validate_density_matrix(rho, name: str = "rho") -> np.ndarray:
    """Check hermiticity, unit trace and positivity within the module tolerances."""
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValidationError(name, f"density matrix must be square, got shape {rho.shape}")
    herm = float(np.max(np.abs(rho - rho.conj().T)))
    if herm > HERMITIAN_TOL:
        raise ValidationError(name, f"not Hermitian (max deviation {herm:.3e})")
    tr = complex(np.trace(rho))
    if abs(tr - 1.0) > TRACE_TOL:
        raise ValidationError(name, f"trace is {tr.real:.12g}, expected 1")
    low = float(np.linalg.eigvalsh((rho + rho.conj().T) / 2)[0])
    if low < -POSITIVITY_TOL:
        raise ValidationError(name, f"not positive semidefinite (eigenvalue {low:.3e})")
    return rho


def lindblad_rhs(rho, M, loss: LossParams) -> np.ndarray:
    """Derivative of ``rho`` with respect to propagation distance."""
    rho = np.asarray(rho, dtype=complex)
    H = embed_hamiltonian(M)
    if rho.shape != H.shape:
        raise ValidationError(
            "rho", f"density matrix is {rho.shape}, coupling matrix needs {H.shape}"
        )
    drho = -1j * (H @ rho - rho @ H)
    if loss.beta:
        a = lowering_operators(H.shape[0] - 1)
        ad = a.conj().transpose(0, 2, 1)
        n_op = (ad @ a).sum(axis=0)
        jump = (a @ rho @ ad).sum(axis=0)
        drho -= loss.beta * (n_op @ rho - 2.0 * jump + rho @ n_op)
    return drho


def default_steps(M, loss: LossParams, z: float) -> int:
    """Step count keeping the normalized step (``||M|| dz`` and ``beta dz``) under ``1e-3``."""
    rate = max(float(np.linalg.norm(np.asarray(M), 2)), loss.beta, 1e-300)
    return max(1, math.ceil(z * rate / MAX_KZ_STEP))


def integrate_master_equation(rho0, M, loss: LossParams, z: float, steps: int | None = None) -> np.ndarray:
    """Fixed-step classical RK4 integration of :func:`lindblad_rhs` from 0 to ``z``.

    Raises:
        NumericError: if the result drifts outside the density-matrix
            tolerances; rerun with more steps.
    """
    rho = validate_density_matrix(rho0, "rho0").copy()
    if not (math.isfinite(z) and z >= 0):
        raise ValidationError("z", f"propagation length must be nonnegative, got {z!r}")
    if steps is None:
        steps = default_steps(M, loss, z)
    if int(steps) != steps or steps < 1:
        raise ValidationError("steps", f"need a positive integer, got {steps!r}")
    H = embed_hamiltonian(M)
    if rho.shape != H.shape:
        raise ValidationError("rho0", f"density matrix is {rho.shape}, coupling matrix needs {H.shape}")

    h = z / steps
    for _ in range(int(steps)):
        k1 = lindblad_rhs(rho, M, loss)
        k2 = lindblad_rhs(rho + 0.5 * h * k1, M, loss)
        k3 = lindblad_rhs(rho + 0.5 * h * k2, M, loss)
        k4 = lindblad_rhs(rho + h * k3, M, loss)
        rho = rho + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

    try:
        validate_density_matrix(rho)
    except ValidationError as exc:
        raise NumericError(f"integration left the state space ({exc}); increase steps") from exc
    return rho


def phase_rotate(rho, phases: Sequence[float]) -> np.ndarray:
    """Apply per-guide phase shifters ``exp(i phi_j)`` to an embedded density matrix."""
    d = np.exp(1j * np.concatenate([[0.0], np.asarray(phases, dtype=float)]))
    return d[:, None] * np.asarray(rho) * d.conj()[None, :]


def _rank_one(rho: np.ndarray):
    w, v = np.linalg.eigh(rho)
    if np.sum(w > 1e-12) == 1 and abs(w[-1] - np.trace(rho).real) <= 1e-12:
        return w[-1], v[:, -1]
    return None


def _psd_sqrt(rho: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(rho)
    w = np.where(w > 1e-13 * max(w[-1], 1.0), w, 0.0)
    return (v * np.sqrt(w)) @ v.conj().T


def fidelity(sigma, rho) -> float:
    """Uhlmann fidelity ``(Tr sqrt(sqrt(sigma) rho sqrt(sigma)))**2``.

    If either argument is rank one the value is ``<psi|rho|psi>``. Otherwise
    it is the squared sum of singular values of ``sqrt(sigma) sqrt(rho)``,
    whose squares are the eigenvalues of the Hermitian product; this avoids
    square roots of round-off eigenvalues.
    """
    sigma = validate_density_matrix(sigma, "sigma")
    rho = validate_density_matrix(rho, "rho")
    if sigma.shape != rho.shape:
        raise ValidationError("rho", f"shape {rho.shape} does not match sigma {sigma.shape}")
    for pure, other in ((sigma, rho), (rho, sigma)):
        hit = _rank_one(pure)
        if hit is not None:
            weight, psi = hit
            f = weight * float(np.real(psi.conj() @ other @ psi))
            break
    else:
        svals = np.linalg.svd(_psd_sqrt(sigma) @ _psd_sqrt(rho), compute_uv=False)
        f = float(np.sum(svals)) ** 2
    return float(min(1.0, max(0.0, f)))


def lossy_output(s: float, loss: LossParams, k: float, steps: int | None = None) -> np.ndarray:
    """Phase-compensated density matrix at ``z*`` for centre injection with loss."""
    sol_kz = _design.kz_for(s)
    z_star = _design.physical_length(sol_kz, k)
    M = lattice(_design.bond_weights(s), k)
    rho0 = pure_density_matrix(ModeState.basis(3, _design.CENTER))
    rho = integrate_master_equation(rho0, M, loss, z_star, steps)
    phases = _design.compensating_phases(
        _design.generated_state(s, compensated=False), _design.WTarget(s)
    )
    return phase_rotate(rho, phases)


def sweep_fidelity_vs_loss(
    s: float,
    beta_over_k: Sequence[float] = DEFAULT_RATIOS,
    k: float = 0.37,
    steps: int | None = None,
) -> list[tuple[float, float]]:
    """Fidelity of the lossy output against the ideal perfect W-state, per loss ratio.

    Results come back in the order of ``beta_over_k``.
    """
    sigma = pure_density_matrix(_design.generated_state(s))
    rows = []
    for ratio in beta_over_k:
        rho = lossy_output(s, LossParams.from_ratio(ratio, k), k, steps)
        rows.append((float(ratio), fidelity(sigma, rho)))
    return rows
