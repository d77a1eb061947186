//! Free-induction decay of a central spin in a nuclear bath, through the
//! effective decoherence function `D(t) = e^{i arctan(αt) − iBt}/√(1 + α²t²)`.

use serde::{Deserialize, Serialize};

use crate::dephasing::{analytic_trace, AnalyticDecoherence, DecoherenceTrace};
use crate::error::{validation, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CentralSpinParams {
    pub alpha: f64,
    #[serde(rename = "B", alias = "b", default)]
    pub b: f64,
}

impl CentralSpinParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0) || !self.b.is_finite() {
            return Err(validation(format!(
                "central spin needs α > 0 and finite B, got α = {}, B = {}",
                self.alpha, self.b
            )));
        }
        Ok(())
    }

    /// Grid indices with `αt > 1`, where the effective model is not trusted.
    pub fn out_of_validity(&self, grid: &[f64]) -> Vec<usize> {
        grid.iter()
            .enumerate()
            .filter(|(_, t)| self.alpha * **t > 1.0)
            .map(|(k, _)| k)
            .collect()
    }
}

impl AnalyticDecoherence for CentralSpinParams {
    fn static_field(&self) -> f64 {
        self.b
    }

    fn phase(&self, t: f64) -> (f64, f64) {
        let at = self.alpha * t;
        (
            at.atan() - self.b * t,
            self.alpha / (1.0 + at * at) - self.b,
        )
    }

    fn mixing(&self, t: f64) -> (f64, f64) {
        let at = self.alpha * t;
        (at.atan(), self.alpha / (1.0 + at * at))
    }
}

/// Trace sampled from `D_cs`, with the `αt > 1` points flagged.
pub fn central_spin_trace(params: &CentralSpinParams, grid: &[f64]) -> Result<DecoherenceTrace> {
    params.validate()?;
    Ok(analytic_trace(params, grid)?.with_flags(params.out_of_validity(grid)))
}
