//! Classical field synthesis for pure-dephasing channels and the reverse
//! (dilation) construction.

mod classical;
mod dilation;
mod synthesis;
mod trace;
mod verify;

pub use classical::{
    classical_evolve, classical_evolve_grid, classical_evolve_with, classical_transfer_matrix,
    coherence_factor, evolve_with_angles, phases_at, transfer_from_angles, PhaseRoute,
};
pub use dilation::{dilation_build, dilation_channel, KrausSet, COMPLETENESS_TOL};
pub use synthesis::{
    analytic_fields, analytic_trace, beta_of, beta_with_cutoff, branch_angles,
    cumulative_trapezoid, derivative, fields_from_angles, format_f64, phase_angles,
    phase_angles_with_cutoff, synthesize, unwrap_phases, AnalyticDecoherence, FieldPair,
    PhaseAngles, R_MIN,
};
pub(crate) use trace::check_grid;
pub use trace::{DecoherenceTrace, COHERENCE_TOL};
pub use verify::{
    compare, verify_equivalence, EquivalenceReport, TimeDistance, VerifyOptions, ANGLE_TOLERANCE,
    FIELD_TOLERANCE,
};
