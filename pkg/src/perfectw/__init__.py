"""Single-photon perfect W-states in coupled-waveguide lattices."""

from perfectw.design import (
    DesignSolution,
    WTarget,
    solve_design,
    gamma_for,
    kz_for,
    kz_numeric,
    physical_length,
    recurrence_positions,
    separations,
    target_state,
)
from perfectw.errors import NumericError, ValidationError
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
)
from perfectw.loss import (
    LossParams,
    fidelity,
    integrate_master_equation,
    lindblad_rhs,
    sweep_fidelity_vs_loss,
)
from perfectw.nonlocality import (
    HardyCertificate,
    MeasurementSetting,
    alpha_star,
    hardy_certificate,
    hardy_ladder_report,
    joint_probability,
)

__version__ = "0.1.0"
