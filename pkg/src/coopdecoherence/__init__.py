"""Cooperative loss and decoherence of qubits sharing one bosonic environment."""
from .bath_sim import Mode, SimConfig, SimTrace, build_hamiltonian, evolve_delta, tau2_exact, thermal_state
from .coherence_codec import Circuit, LocalRotation, PMCnot, decode, efficiency_max, encode, pm_cnot, prepare_ancillas
from .collective_operator import (
    CouplingSpec,
    EigenspaceTable,
    LocalEigensystem,
    apply_A,
    eigenspace_dims,
    local_eigensystem,
    project_m,
    variance_A,
)
from .decoherence_rate import (
    BathSpec,
    PerModeCouplings,
    mean_occupation,
    omega_squared,
    rate_collective,
    rate_general,
    rate_independent,
)
from .errors import (
    CoopDecoherenceError,
    DegenerateCouplingError,
    DimensionCapError,
    DimensionError,
    InvalidStateError,
    NotACodewordError,
)
from .qubit_core import (
    DensityMatrix,
    PauliAxis,
    PureState,
    apply_site_operator,
    idempotency_defect,
    partial_trace,
    pauli_string_expectation,
    tensor,
)

__version__ = "0.1.0"
