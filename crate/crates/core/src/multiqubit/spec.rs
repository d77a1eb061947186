use serde::{Deserialize, Serialize};

use super::model::{AlphaDistribution, BellBasisModel, ThetaTable};
use super::pauli::{CommutingSet, PauliString};
use crate::error::{validation, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ThetaSpec {
    Table(ThetaTable),
    /// `θ_i(t) = rates[i]·t` on `points` evenly spaced times in `[0, t_max]`.
    Linear {
        rates: Vec<f64>,
        t_max: f64,
        points: usize,
    },
}

/// Directly supplied `γ` matrices, bypassing `θ`. Used to exercise the
/// transitivity check on inputs that do not come from per-level phases.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaTable {
    pub grid: Vec<f64>,
    pub values: Vec<Vec<Vec<f64>>>,
}

/// JSON form of a [`BellBasisModel`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BellBasisSpec {
    pub n: usize,
    pub commuting_set: Vec<PauliString>,
    pub theta: ThetaSpec,
    pub dist: AlphaDistribution,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<GammaTable>,
}

impl BellBasisSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn theta_table(&self, grid_override: Option<(f64, usize)>) -> Result<ThetaTable> {
        match &self.theta {
            ThetaSpec::Table(t) => Ok(t.clone()),
            ThetaSpec::Linear {
                rates,
                t_max,
                points,
            } => {
                let (t_max, points) = grid_override.unwrap_or((*t_max, *points));
                if points < 2 || !(t_max > 0.0) {
                    return Err(validation("θ grid needs at least 2 points and t_max > 0"));
                }
                let grid = (0..points)
                    .map(|k| t_max * k as f64 / (points - 1) as f64)
                    .collect();
                Ok(ThetaTable::linear(rates, grid))
            }
        }
    }

    pub fn build(&self, grid_override: Option<(f64, usize)>) -> Result<BellBasisModel> {
        let set = CommutingSet::new(self.commuting_set.clone())?;
        if set.n() != self.n {
            return Err(validation(format!(
                "model declares n = {} but the commuting set acts on {} qubits",
                self.n,
                set.n()
            )));
        }
        BellBasisModel::new(set, self.theta_table(grid_override)?, self.dist.clone())
    }
}
