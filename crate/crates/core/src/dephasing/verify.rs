use serde::{Deserialize, Serialize};

use super::classical::{classical_evolve_grid, PhaseRoute};
use super::synthesis::FieldPair;
use crate::bloch::DensityMatrix;
use crate::error::{validation, Result};

/// Tolerance when the classical model is driven by exact angles.
pub const ANGLE_TOLERANCE: f64 = 1e-6;
/// Tolerance when finite-difference fields are integrated back.
pub const FIELD_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    pub route: PhaseRoute,
    pub tolerance: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self::angles()
    }
}

impl VerifyOptions {
    pub fn angles() -> Self {
        Self {
            route: PhaseRoute::Angles,
            tolerance: ANGLE_TOLERANCE,
        }
    }

    pub fn fields() -> Self {
        Self {
            route: PhaseRoute::Fields,
            tolerance: FIELD_TOLERANCE,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeDistance {
    pub t: f64,
    pub trace_distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub max_trace_distance: f64,
    pub per_time: Vec<TimeDistance>,
    pub pass: bool,
    pub tolerance: f64,
}

impl EquivalenceReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Compare quantum reduced states on the field grid against the classical
/// two-branch model started from `quantum_states[0]`.
pub fn verify_equivalence(
    times: &[f64],
    quantum_states: &[DensityMatrix],
    fields: &FieldPair,
    options: VerifyOptions,
) -> Result<EquivalenceReport> {
    if times.len() != quantum_states.len() {
        return Err(validation(format!(
            "{} times but {} quantum states",
            times.len(),
            quantum_states.len()
        )));
    }
    if times.len() != fields.len()
        || times
            .iter()
            .zip(&fields.times)
            .any(|(a, b)| (a - b).abs() > 1e-12 * (1.0 + a.abs()))
    {
        return Err(validation("quantum and field time grids differ"));
    }
    let classical = classical_evolve_grid(&quantum_states[0], fields, options.route)?;
    Ok(compare(
        times,
        quantum_states,
        &classical,
        options.tolerance,
    ))
}

/// Pointwise trace distance between two state sequences.
pub fn compare(
    times: &[f64],
    a: &[DensityMatrix],
    b: &[DensityMatrix],
    tolerance: f64,
) -> EquivalenceReport {
    let per_time: Vec<TimeDistance> = times
        .iter()
        .zip(a.iter().zip(b))
        .map(|(&t, (x, y))| TimeDistance {
            t,
            trace_distance: x.trace_distance(y),
        })
        .collect();
    let max = per_time
        .iter()
        .map(|p| p.trace_distance)
        .fold(0.0, f64::max);
    EquivalenceReport {
        max_trace_distance: max,
        per_time,
        pass: max < tolerance,
        tolerance,
    }
}
