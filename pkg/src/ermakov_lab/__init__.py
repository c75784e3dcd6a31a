"""Numerical laboratory for invariants of a continuously measured oscillator."""

from .params import (
    COEFF_CONSISTENT,
    COEFF_PAPER_LITERAL,
    TAU_INFINITE,
    DriveSpec,
    OmegaSpec,
    PhysParams,
)
from .ermakov import (
    ALPHA_MIN,
    ClassicalState,
    ErmakovState,
    Trajectory,
    alpha_from_delta,
    classical_rhs,
    conserving_drive,
    delta_from_alpha,
    els_invariant,
    els_invariant_rate,
    integrate,
    lewis_invariant,
    measurement_rhs,
)
from .madelung import (
    Grid,
    MadelungFields,
    Observables,
    WavePacket,
    continuity_residual,
    euler_residual,
    evolve,
    gaussian_packet,
    madelung_decompose,
    make_grid,
    observables,
    quantum_force_linearity,
    time_derivative,
)
from .identities import (
    AnsatzSlice,
    IdentityReport,
    check_coefficient_expansion,
    check_decomposition_integrals,
    check_integrating_factor,
    check_k0_gaussian,
    check_velocity_ansatz,
)

__version__ = "0.1.0"
