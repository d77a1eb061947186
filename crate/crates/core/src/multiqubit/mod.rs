//! Multiqubit dephasing in a simultaneous eigenbasis of commuting Pauli
//! strings, reconstructed from a single random noise amplitude.

mod model;
mod pauli;
mod spec;

pub use model::{
    bell_states, check_transitivity, gamma_matrix, joint_eigenbasis, spans_bell_states,
    AlphaDistribution, BellBasisModel, McRMatrix, ThetaTable, TransitivityReport, ANTISYMMETRY_TOL,
    POSITIVITY_TOL, TRANSITIVITY_TOL,
};
pub use pauli::{
    partition_commuting_sets, partition_containing, pauli_commutes, CommutingSet, PauliString,
    MAX_PARTITION_QUBITS,
};
pub use spec::{BellBasisSpec, GammaTable, ThetaSpec};
