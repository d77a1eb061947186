use num_complex::Complex64;

use crate::bloch::{DensityMatrix, TransferMatrix4};
use crate::error::{validation, Result};

/// Tolerance on `c² + s² ≤ 1` and on the `t = 0` normalization.
pub const COHERENCE_TOL: f64 = 1e-9;

/// Off-diagonal evolution of a dephased qubit: `c = T_xx`, `s = T_yx` on a
/// strictly increasing grid starting at `t = 0`.
///
/// In matrix terms `ρ₀₁(t) = (c − i s) ρ₀₁(0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DecoherenceTrace {
    times: Vec<f64>,
    c: Vec<f64>,
    s: Vec<f64>,
    static_field: f64,
    flagged: Vec<usize>,
}

pub(crate) fn check_grid(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(validation("time grid is empty"));
    }
    if let Some(k) = times.windows(2).position(|w| !(w[1] > w[0])) {
        return Err(validation(format!(
            "time grid not strictly increasing at index {}",
            k + 1
        )));
    }
    if times.iter().any(|t| !t.is_finite()) {
        return Err(validation("time grid has non-finite entries"));
    }
    Ok(())
}

impl DecoherenceTrace {
    pub fn new(times: Vec<f64>, c: Vec<f64>, s: Vec<f64>) -> Result<Self> {
        check_grid(&times)?;
        if c.len() != times.len() || s.len() != times.len() {
            return Err(validation(format!(
                "trace lengths differ: {} times, {} c, {} s",
                times.len(),
                c.len(),
                s.len()
            )));
        }
        if times[0].abs() > 1e-12 {
            return Err(validation(format!(
                "trace must start at t = 0, got {}",
                times[0]
            )));
        }
        if (c[0] - 1.0).abs() > COHERENCE_TOL || s[0].abs() > COHERENCE_TOL {
            return Err(validation(format!(
                "trace must start at (c, s) = (1, 0), got ({}, {})",
                c[0], s[0]
            )));
        }
        for (k, (&ck, &sk)) in c.iter().zip(&s).enumerate() {
            let r2 = ck * ck + sk * sk;
            if !r2.is_finite() || r2 > 1.0 + COHERENCE_TOL {
                return Err(validation(format!(
                    "c² + s² = {r2} exceeds 1 at t = {}",
                    times[k]
                )));
            }
        }
        Ok(Self {
            times,
            c,
            s,
            static_field: 0.0,
            flagged: Vec::new(),
        })
    }

    /// Build from modulus `r` and total phase `ψ`: `c + i s = r e^{iψ}`.
    pub fn from_polar(times: Vec<f64>, r: &[f64], phase: &[f64]) -> Result<Self> {
        if r.len() != phase.len() {
            return Err(validation("r and phase arrays differ in length"));
        }
        let (c, s) = r
            .iter()
            .zip(phase)
            .map(|(&rk, &pk)| (rk * pk.cos(), rk * pk.sin()))
            .unzip();
        Self::new(times, c, s)
    }

    /// Extract the trace from a series of transfer matrices, rejecting any
    /// that are not of pure-dephasing form (affine terms included).
    pub fn from_transfer_matrices(
        times: Vec<f64>,
        matrices: &[TransferMatrix4],
        tol: f64,
    ) -> Result<Self> {
        if matrices.len() != times.len() {
            return Err(validation(
                "transfer-matrix series and grid differ in length",
            ));
        }
        let (c, s) = matrices
            .iter()
            .map(|m| m.dephasing_parameters(tol))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .unzip();
        Self::new(times, c, s)
    }

    /// Static splitting `B` of the generating model; only used to split the
    /// synthesized rotation rate into `−B + h`.
    pub fn with_static_field(mut self, b: f64) -> Self {
        self.static_field = b;
        self
    }

    /// Mark grid indices where the generating model is outside its validity domain.
    pub fn with_flags(mut self, flagged: Vec<usize>) -> Self {
        self.flagged = flagged;
        self
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn c(&self) -> &[f64] {
        &self.c
    }

    pub fn s(&self) -> &[f64] {
        &self.s
    }

    pub fn static_field(&self) -> f64 {
        self.static_field
    }

    pub fn flagged(&self) -> &[usize] {
        &self.flagged
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn r(&self, k: usize) -> f64 {
        self.c[k].hypot(self.s[k])
    }

    pub fn coherence_factor(&self, k: usize) -> Complex64 {
        Complex64::new(self.c[k], -self.s[k])
    }

    pub fn transfer_matrix(&self, k: usize) -> TransferMatrix4 {
        TransferMatrix4::dephasing(self.c[k], self.s[k])
    }

    /// The qubit state at grid index `k` for initial state `rho0`.
    pub fn apply(&self, rho0: &DensityMatrix, k: usize) -> Result<DensityMatrix> {
        if rho0.dim() != 2 {
            return Err(validation("decoherence traces act on single-qubit states"));
        }
        let mut m = rho0.matrix().clone();
        let f = self.coherence_factor(k);
        m[(0, 1)] *= f;
        m[(1, 0)] *= f.conj();
        DensityMatrix::from_evolved(m)
    }
}
