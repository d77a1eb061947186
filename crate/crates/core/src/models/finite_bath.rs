//! Exactly solvable qubit + finite bath with
//! `H = −½Bσ_z ⊗ I + I ⊗ H_B + σ_z ⊗ H_SB`.

use rand::Rng;

use crate::bloch::{quantum_transfer_series, reduced_evolution, DensityMatrix};
use crate::dephasing::DecoherenceTrace;
use crate::error::{validation, Error, Result};
use crate::linalg::{
    self, c, expm_hermitian, kron, max_diff, max_norm, pauli_z, random_hermitian, CMatrix,
    Hermitian, Unitary,
};

pub const DEFAULT_TROTTER_STEPS: usize = 1024;

#[derive(Debug, Clone, PartialEq)]
pub struct FiniteBathModel {
    h_bath: Hermitian,
    h_coupling: Hermitian,
    b: f64,
    rho_b0: DensityMatrix,
}

impl FiniteBathModel {
    pub fn new(
        h_bath: Hermitian,
        h_coupling: Hermitian,
        b: f64,
        rho_b0: DensityMatrix,
    ) -> Result<Self> {
        let d = h_bath.dim();
        if d == 0 || h_coupling.dim() != d || rho_b0.dim() != d {
            return Err(validation(format!(
                "bath dimensions disagree: H_B {d}, H_SB {}, ρ_B {}",
                h_coupling.dim(),
                rho_b0.dim()
            )));
        }
        if !b.is_finite() {
            return Err(validation("B must be finite"));
        }
        Ok(Self {
            h_bath,
            h_coupling,
            b,
            rho_b0,
        })
    }

    /// Random Hermitian bath and coupling of unit scale, Ginibre bath state,
    /// `B ∈ [0, 2]`.
    pub fn random<R: Rng + ?Sized>(bath_dim: usize, rng: &mut R) -> Result<Self> {
        if bath_dim == 0 {
            return Err(validation("bath dimension must be positive"));
        }
        let h_bath = random_hermitian(bath_dim, 1.0, rng);
        let h_coupling = random_hermitian(bath_dim, 1.0, rng);
        let rho = DensityMatrix::random(bath_dim, rng);
        let b = rng.random_range(0.0..=2.0);
        Self::new(h_bath, h_coupling, b, rho)
    }

    pub fn bath_dim(&self) -> usize {
        self.h_bath.dim()
    }

    pub fn static_field(&self) -> f64 {
        self.b
    }

    pub fn bath_state(&self) -> &DensityMatrix {
        &self.rho_b0
    }

    pub fn hamiltonian(&self) -> Hermitian {
        let d = self.bath_dim();
        let z = pauli_z();
        let h = kron(&z, &linalg::identity(d)) * c(-0.5 * self.b, 0.0)
            + kron(&linalg::identity(2), self.h_bath.matrix())
            + kron(&z, self.h_coupling.matrix());
        Hermitian::hermitize(&h)
    }

    /// Decoherence trace from the exact quantum transfer matrices.
    pub fn trace(&self, times: &[f64]) -> Result<DecoherenceTrace> {
        let ts = quantum_transfer_series(&self.hamiltonian(), &self.rho_b0, times)?;
        Ok(
            DecoherenceTrace::from_transfer_matrices(times.to_vec(), &ts, 1e-9)?
                .with_static_field(self.b),
        )
    }

    /// Reduced qubit states for initial state `rho_s` on the grid.
    pub fn reduced_states(
        &self,
        rho_s: &DensityMatrix,
        times: &[f64],
    ) -> Result<Vec<DensityMatrix>> {
        let spec = self.hamiltonian().spectrum();
        times
            .iter()
            .map(|&t| reduced_evolution(&spec.propagator(t), rho_s, &self.rho_b0))
            .collect()
    }

    /// Coherence at time `t`, `r = |Tr(U_↑ ρ_B U_↓†)|`.
    pub fn coherence(&self, t: f64) -> f64 {
        let d = self.bath_dim();
        let id = linalg::identity(d);
        let up = Hermitian::hermitize(
            &(self.h_bath.matrix() + self.h_coupling.matrix() - &id * c(0.5 * self.b, 0.0)),
        );
        let down = Hermitian::hermitize(
            &(self.h_bath.matrix() - self.h_coupling.matrix() + &id * c(0.5 * self.b, 0.0)),
        );
        let uu = expm_hermitian(&up, t);
        let ud = expm_hermitian(&down, t);
        linalg::trace(&(uu.matrix() * self.rho_b0.matrix() * ud.matrix().adjoint())).norm()
    }

    /// Largest `t ≤ t_cap` on a scan of `samples` points before `r` first
    /// drops below `r_floor`.
    pub fn coherence_horizon(&self, r_floor: f64, t_cap: f64, samples: usize) -> f64 {
        let dt = t_cap / samples as f64;
        for k in 1..=samples {
            if self.coherence(k as f64 * dt) < r_floor {
                return (k - 1) as f64 * dt;
            }
        }
        t_cap
    }
}

/// Joint unitary at time `t`. The Hamiltonian is constant, so `steps` does
/// not enter.
pub fn finite_bath_unitary(model: &FiniteBathModel, t: f64, _steps: usize) -> Result<Unitary> {
    Ok(expm_hermitian(&model.hamiltonian(), t))
}

/// Time-ordered propagator with a step-halving error estimate.
#[derive(Debug, Clone)]
pub struct TrotterResult {
    pub unitary: Unitary,
    /// `max |U_n − U_{n/2}|` elementwise.
    pub error_estimate: f64,
}

/// Ordered product of midpoint exponentials for `H(t)`, which must commute
/// with `σ_z ⊗ I` at every step.
pub fn time_dependent_unitary<F>(h_of_t: F, t: f64, steps: usize) -> Result<TrotterResult>
where
    F: Fn(f64) -> Hermitian,
{
    if steps < 2 {
        return Err(validation("need at least two Trotter steps"));
    }
    let dim = h_of_t(0.0).dim();
    if dim % 2 != 0 {
        return Err(validation("joint dimension must be 2 × bath dimension"));
    }
    let zi = kron(&pauli_z(), &linalg::identity(dim / 2));
    let checked = |s: f64| -> Result<Hermitian> {
        let h = h_of_t(s);
        let comm = linalg::commutator(h.matrix(), &zi);
        if max_norm(&comm) > 1e-10 * (1.0 + max_norm(h.matrix())) {
            return Err(Error::Structural(format!(
                "H(t) at t = {s} does not commute with σ_z ⊗ I"
            )));
        }
        Ok(h)
    };
    let fine = linalg::time_ordered_exp(checked, t, steps)?;
    let coarse = linalg::time_ordered_exp(checked, t, steps / 2)?;
    let error_estimate = max_diff(fine.matrix(), coarse.matrix());
    Ok(TrotterResult {
        unitary: fine,
        error_estimate,
    })
}

/// Joint Hamiltonian with bath and coupling operators scaled by `f(t)`.
pub fn modulated_hamiltonian(
    model: &FiniteBathModel,
    f: impl Fn(f64) -> f64,
) -> impl Fn(f64) -> Hermitian {
    let d = model.bath_dim();
    let z = pauli_z();
    let static_part: CMatrix = kron(&z, &linalg::identity(d)) * c(-0.5 * model.b, 0.0)
        + kron(&linalg::identity(2), model.h_bath.matrix());
    let coupling = kron(&z, model.h_coupling.matrix());
    move |t| Hermitian::hermitize(&(&static_part + &coupling * c(f(t), 0.0)))
}
