//! Sources of decoherence traces: spin-boson, central spin, tabulated data and
//! exactly diagonalized finite baths.

mod central_spin;
mod finite_bath;
pub mod quadrature;
mod spec;
mod spin_boson;
mod tabulated;

pub use central_spin::{central_spin_trace, CentralSpinParams};
pub use finite_bath::{
    finite_bath_unitary, modulated_hamiltonian, time_dependent_unitary, FiniteBathModel,
    TrotterResult, DEFAULT_TROTTER_STEPS,
};
pub use spec::ModelSpec;
pub use spin_boson::{
    gamma_ohmic, gamma_ohmic_rate, gamma_quadrature, ln_sinhc, spin_boson_trace, CouplingSpectrum,
    OhmicSpinBoson, SpinBosonCoupling, SpinBosonParams, QUADRATURE_TOL,
};
pub use tabulated::{
    load_decoherence_csv, read_decoherence_csv, TabulatedDecoherence, R_CLAMP_LIMIT,
};
