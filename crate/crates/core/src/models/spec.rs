use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{
    central_spin_trace, load_decoherence_csv, spin_boson_trace, CentralSpinParams, FiniteBathModel,
    OhmicSpinBoson, SpinBosonParams,
};
use crate::dephasing::{AnalyticDecoherence, DecoherenceTrace};
use crate::error::Result;

/// A decoherence model named in a JSON document, e.g.
/// `{"type": "central-spin", "alpha": 1.0, "B": 0.0}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum ModelSpec {
    SpinBoson(SpinBosonParams),
    CentralSpin(CentralSpinParams),
    Tabulated {
        path: PathBuf,
        #[serde(rename = "B", alias = "b", default)]
        b: f64,
    },
    /// Random Hermitian bath; `seed` defaults to the run seed.
    FiniteBath {
        bath_dim: usize,
        #[serde(default)]
        seed: Option<u64>,
    },
}

impl ModelSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Relative tabulated paths are taken relative to `base`.
    pub fn resolve_paths(mut self, base: &Path) -> Self {
        if let ModelSpec::Tabulated { path, .. } = &mut self {
            if path.is_relative() {
                *path = base.join(&*path);
            }
        }
        self
    }

    pub fn finite_bath(&self, run_seed: u64) -> Result<Option<FiniteBathModel>> {
        match self {
            ModelSpec::FiniteBath { bath_dim, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed.unwrap_or(run_seed));
                Ok(Some(FiniteBathModel::random(*bath_dim, &mut rng)?))
            }
            _ => Ok(None),
        }
    }

    /// The model's closed-form polar decomposition, when it has one.
    pub fn analytic(&self) -> Option<Box<dyn AnalyticDecoherence>> {
        match self {
            ModelSpec::SpinBoson(p) => {
                OhmicSpinBoson::from_params(p).map(|m| Box::new(m) as Box<dyn AnalyticDecoherence>)
            }
            ModelSpec::CentralSpin(p) => Some(Box::new(*p)),
            _ => None,
        }
    }

    pub fn trace(&self, grid: &[f64], run_seed: u64) -> Result<DecoherenceTrace> {
        match self {
            ModelSpec::SpinBoson(p) => spin_boson_trace(p, grid),
            ModelSpec::CentralSpin(p) => central_spin_trace(p, grid),
            ModelSpec::Tabulated { path, b } => {
                load_decoherence_csv(path)?.with_static_field(*b).to_trace()
            }
            ModelSpec::FiniteBath { .. } => self
                .finite_bath(run_seed)?
                .expect("finite bath")
                .trace(grid),
        }
    }
}
