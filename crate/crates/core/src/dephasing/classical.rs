use num_complex::Complex64;

use super::synthesis::FieldPair;
use crate::bloch::{DensityMatrix, TransferMatrix4};
use crate::error::{validation, Error, Result};

/// Where the rotation angles come from when evolving the classical model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PhaseRoute {
    /// Stored unwrapped angles `Φ_i`. Exact up to interpolation.
    #[default]
    Angles,
    /// Trapezoid integral of `−B + h_i`. Carries discretization error.
    Fields,
}

/// Branch angles at time `t`, interpolated linearly between grid points.
pub fn phases_at(fields: &FieldPair, t: f64, route: PhaseRoute) -> Result<(f64, f64)> {
    let integrated;
    let (p1, p2) = match route {
        PhaseRoute::Angles => (&fields.phi1, &fields.phi2),
        PhaseRoute::Fields => {
            integrated = fields.integrated_phases();
            (&integrated.0, &integrated.1)
        }
    };
    let k = locate(&fields.times, t)?;
    Ok(interpolate(&fields.times, p1, p2, k, t))
}

fn locate(times: &[f64], t: f64) -> Result<usize> {
    let (start, end) = match (times.first(), times.last()) {
        (Some(&a), Some(&b)) => (a, b),
        _ => return Err(validation("field grid is empty")),
    };
    if !(t >= start && t <= end) {
        return Err(Error::Range {
            time: t,
            start,
            end,
        });
    }
    Ok(times.partition_point(|&x| x < t))
}

fn interpolate(times: &[f64], p1: &[f64], p2: &[f64], k: usize, t: f64) -> (f64, f64) {
    if times[k] == t || k == 0 {
        return (p1[k], p2[k]);
    }
    let w = (t - times[k - 1]) / (times[k] - times[k - 1]);
    (
        p1[k - 1] + w * (p1[k] - p1[k - 1]),
        p2[k - 1] + w * (p2[k] - p2[k - 1]),
    )
}

/// `½(e^{−iΦ₁} + e^{−iΦ₂})`, the factor multiplying `ρ₀₁`.
pub fn coherence_factor(phi1: f64, phi2: f64) -> Complex64 {
    0.5 * (Complex64::from_polar(1.0, -phi1) + Complex64::from_polar(1.0, -phi2))
}

/// Qubit state under the two-branch classical noise at time `t`.
pub fn classical_evolve(rho0: &DensityMatrix, fields: &FieldPair, t: f64) -> Result<DensityMatrix> {
    classical_evolve_with(rho0, fields, t, PhaseRoute::Angles)
}

pub fn classical_evolve_with(
    rho0: &DensityMatrix,
    fields: &FieldPair,
    t: f64,
    route: PhaseRoute,
) -> Result<DensityMatrix> {
    let (phi1, phi2) = phases_at(fields, t, route)?;
    evolve_with_angles(rho0, phi1, phi2)
}

/// Classical states at every grid point.
pub fn classical_evolve_grid(
    rho0: &DensityMatrix,
    fields: &FieldPair,
    route: PhaseRoute,
) -> Result<Vec<DensityMatrix>> {
    let (p1, p2) = match route {
        PhaseRoute::Angles => (fields.phi1.clone(), fields.phi2.clone()),
        PhaseRoute::Fields => fields.integrated_phases(),
    };
    p1.iter()
        .zip(&p2)
        .map(|(&a, &b)| evolve_with_angles(rho0, a, b))
        .collect()
}

/// `½ Σ_i R_i ρ₀ R_i†` with `R_i = exp(−iσ_zΦ_i/2)`. Populations are copied
/// untouched.
pub fn evolve_with_angles(rho0: &DensityMatrix, phi1: f64, phi2: f64) -> Result<DensityMatrix> {
    if rho0.dim() != 2 {
        return Err(validation(
            "classical dephasing acts on single-qubit states",
        ));
    }
    let mut m = rho0.matrix().clone();
    let f = coherence_factor(phi1, phi2);
    m[(0, 1)] *= f;
    m[(1, 0)] *= f.conj();
    DensityMatrix::from_evolved(m)
}

pub fn classical_transfer_matrix(fields: &FieldPair, t: f64) -> Result<TransferMatrix4> {
    let (phi1, phi2) = phases_at(fields, t, PhaseRoute::Angles)?;
    Ok(transfer_from_angles(phi1, phi2))
}

/// `(x,y)` block `½R(Φ₁) + ½R(Φ₂)`.
pub fn transfer_from_angles(phi1: f64, phi2: f64) -> TransferMatrix4 {
    let c = 0.5 * (phi1.cos() + phi2.cos());
    let s = 0.5 * (phi1.sin() + phi2.sin());
    TransferMatrix4::dephasing(c, s)
}
