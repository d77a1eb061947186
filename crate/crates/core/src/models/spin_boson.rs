//! Qubit linearly coupled to a harmonic bath through `σ_z`.
//!
//! `D(t) = e^{Γ(t)} e^{−iBt}` with
//! `Γ(t) = −∫₀^∞ dω J(ω) coth(βω/2) (1 − cos ωt)/ω²`.

use serde::{Deserialize, Serialize};

use super::quadrature;
use crate::dephasing::{AnalyticDecoherence, DecoherenceTrace};
use crate::error::{validation, Result};

/// Absolute tolerance of the `Γ` quadrature.
pub const QUADRATURE_TOL: f64 = 1e-10;

/// `ln(sinh x / x)` without overflow or cancellation.
pub fn ln_sinhc(x: f64) -> f64 {
    let x = x.abs();
    if x < 1e-3 {
        let x2 = x * x;
        x2 / 6.0 - x2 * x2 / 180.0
    } else if x > 20.0 {
        x - std::f64::consts::LN_2 - x.ln() + (-(-2.0 * x).exp()).ln_1p()
    } else {
        (x.sinh() / x).ln()
    }
}

/// `coth x − 1/x`, regular at zero.
fn coth_minus_inv(x: f64) -> f64 {
    if x.abs() < 1e-3 {
        let x2 = x * x;
        x / 3.0 - x * x2 / 45.0
    } else {
        1.0 / x.tanh() - 1.0 / x
    }
}

/// Closed-form ohmic decoherence exponent with unit scale:
/// `Γ(t) = −½ ln(1 + Ω²t²) − ln(sinh(t/τ)/(t/τ))`.
pub fn gamma_ohmic(t: f64, cutoff: f64, tau: f64) -> f64 {
    -0.5 * (cutoff * t).powi(2).ln_1p() - ln_sinhc(t / tau)
}

/// `dΓ/dt` for [`gamma_ohmic`].
pub fn gamma_ohmic_rate(t: f64, cutoff: f64, tau: f64) -> f64 {
    let w2 = cutoff * cutoff;
    -w2 * t / (1.0 + w2 * t * t) - coth_minus_inv(t / tau) / tau
}

/// Spectral density `J(ω)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CouplingSpectrum {
    /// `J(ω) = A ω e^{−ω/Ω}`.
    Ohmic { amplitude: f64, cutoff: f64 },
    /// Piecewise-linear `J` on an increasing `ω` grid; zero beyond it.
    Tabulated { omega: Vec<f64>, j: Vec<f64> },
}

impl CouplingSpectrum {
    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Ohmic { amplitude, cutoff } => {
                if !(*amplitude >= 0.0) || !(*cutoff > 0.0) {
                    return Err(validation(format!(
                        "ohmic coupling needs A ≥ 0 and Ω > 0, got A = {amplitude}, Ω = {cutoff}"
                    )));
                }
            }
            Self::Tabulated { omega, j } => {
                if omega.len() != j.len() || omega.len() < 2 {
                    return Err(validation(
                        "tabulated J needs matching ω, J arrays of length ≥ 2",
                    ));
                }
                if omega[0] < 0.0 || omega.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(validation(
                        "tabulated ω grid must be non-negative and increasing",
                    ));
                }
                if j.iter().any(|v| !(*v >= 0.0)) {
                    return Err(validation("tabulated J must be non-negative"));
                }
            }
        }
        Ok(())
    }

    /// `J(ω)/ω`, finite as `ω → 0`.
    fn j_over_omega(&self, w: f64) -> f64 {
        match self {
            Self::Ohmic { amplitude, cutoff } => amplitude * (-w / cutoff).exp(),
            Self::Tabulated { omega, j } => {
                let last = omega.len() - 1;
                if w > omega[last] {
                    return 0.0;
                }
                let k = omega.partition_point(|&x| x < w).clamp(1, last);
                let (w0, w1) = (omega[k - 1], omega[k]);
                if w < w0 {
                    // Extrapolate linearly towards J(0) = 0 below the table.
                    return j[0] / w0.max(f64::MIN_POSITIVE);
                }
                if w == 0.0 {
                    return (j[k] - j[k - 1]) / (w1 - w0);
                }
                let val = j[k - 1] + (w - w0) / (w1 - w0) * (j[k] - j[k - 1]);
                val / w
            }
        }
    }

    fn upper_limit(&self, t: f64) -> f64 {
        match self {
            Self::Ohmic { cutoff, .. } => (50.0 * cutoff).max(50.0 / t),
            Self::Tabulated { omega, .. } => omega[omega.len() - 1],
        }
    }

    fn is_zero(&self) -> bool {
        match self {
            Self::Ohmic { amplitude, .. } => *amplitude == 0.0,
            Self::Tabulated { j, .. } => j.iter().all(|v| *v == 0.0),
        }
    }
}

/// `ω coth(βω/2)`, with its `ω → 0` limit `2/β`.
fn omega_coth(w: f64, beta: f64) -> f64 {
    let x = 0.5 * beta * w;
    if x < 1e-4 {
        (2.0 / beta) * (1.0 + x * x / 3.0)
    } else {
        w / x.tanh()
    }
}

/// `(sin x / x)²`.
fn sinc2(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - x * x / 3.0
    } else {
        (x.sin() / x).powi(2)
    }
}

/// `Γ(t)` by adaptive quadrature over `[0, ω_max]`, split into panels no
/// wider than half a period of `1 − cos ωt`.
pub fn gamma_quadrature(t: f64, coupling: &CouplingSpectrum, beta_th: f64) -> Result<f64> {
    coupling.validate()?;
    if !(beta_th > 0.0) {
        return Err(validation(format!(
            "inverse temperature must be positive, got {beta_th}"
        )));
    }
    if !(t >= 0.0) {
        return Err(validation(format!("Γ(t) needs t ≥ 0, got {t}")));
    }
    if t == 0.0 || coupling.is_zero() {
        return Ok(0.0);
    }
    let w_max = coupling.upper_limit(t);
    let mut width = std::f64::consts::PI / t;
    if let CouplingSpectrum::Ohmic { cutoff, .. } = coupling {
        width = width.min(*cutoff);
    }
    let panels = (w_max / width).ceil().max(1.0) as usize;
    let mut breaks: Vec<f64> = (0..=panels)
        .map(|k| k as f64 * w_max / panels as f64)
        .collect();
    if let CouplingSpectrum::Tabulated { omega, .. } = coupling {
        breaks.extend(omega.iter().copied());
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
    }
    let half_t2 = 0.5 * t * t;
    let integrand =
        |w: f64| coupling.j_over_omega(w) * omega_coth(w, beta_th) * half_t2 * sinc2(0.5 * w * t);
    Ok(-quadrature::integrate(integrand, &breaks, QUADRATURE_TOL)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "coupling", rename_all = "snake_case")]
pub enum SpinBosonCoupling {
    /// Closed form with thermal time `τ`; `scale` multiplies `Γ`.
    Ohmic {
        cutoff: f64,
        tau: f64,
        #[serde(default = "one")]
        scale: f64,
    },
    /// Quadrature over a spectral density at inverse temperature `beta`.
    Spectrum {
        spectrum: CouplingSpectrum,
        beta: f64,
    },
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpinBosonParams {
    #[serde(rename = "B", alias = "b", default)]
    pub b: f64,
    #[serde(flatten)]
    pub coupling: SpinBosonCoupling,
}

impl SpinBosonParams {
    pub fn ohmic(b: f64, cutoff: f64, tau: f64) -> Self {
        Self {
            b,
            coupling: SpinBosonCoupling::Ohmic {
                cutoff,
                tau,
                scale: 1.0,
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        match &self.coupling {
            SpinBosonCoupling::Ohmic { cutoff, tau, scale } => {
                if !(*cutoff > 0.0) || !(*tau > 0.0) || !(*scale >= 0.0) {
                    return Err(validation(format!(
                        "ohmic spin-boson needs Ω > 0, τ > 0, scale ≥ 0; got {cutoff}, {tau}, {scale}"
                    )));
                }
            }
            SpinBosonCoupling::Spectrum { spectrum, beta } => {
                spectrum.validate()?;
                if !(*beta > 0.0) {
                    return Err(validation("inverse temperature must be positive"));
                }
            }
        }
        Ok(())
    }

    pub fn gamma(&self, t: f64) -> Result<f64> {
        match &self.coupling {
            SpinBosonCoupling::Ohmic { cutoff, tau, scale } => {
                Ok(scale * gamma_ohmic(t, *cutoff, *tau))
            }
            SpinBosonCoupling::Spectrum { spectrum, beta } => gamma_quadrature(t, spectrum, *beta),
        }
    }
}

/// `c = e^Γ cos Bt`, `s = −e^Γ sin Bt`.
pub fn spin_boson_trace(params: &SpinBosonParams, grid: &[f64]) -> Result<DecoherenceTrace> {
    params.validate()?;
    let gammas: Vec<f64> = grid
        .iter()
        .map(|&t| params.gamma(t))
        .collect::<Result<_>>()?;
    let r: Vec<f64> = gammas.iter().map(|g| g.exp()).collect();
    let phase: Vec<f64> = grid.iter().map(|t| -params.b * t).collect();
    Ok(DecoherenceTrace::from_polar(grid.to_vec(), &r, &phase)?.with_static_field(params.b))
}

/// Closed-form ohmic spin-boson model for exact field synthesis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OhmicSpinBoson {
    pub b: f64,
    pub cutoff: f64,
    pub tau: f64,
    pub scale: f64,
}

impl OhmicSpinBoson {
    pub fn from_params(params: &SpinBosonParams) -> Option<Self> {
        match params.coupling {
            SpinBosonCoupling::Ohmic { cutoff, tau, scale } => Some(Self {
                b: params.b,
                cutoff,
                tau,
                scale,
            }),
            SpinBosonCoupling::Spectrum { .. } => None,
        }
    }

    /// Curvature `κ` in `Γ ≈ −κt²` near `t = 0`.
    pub fn kappa(&self) -> f64 {
        self.scale * (0.5 * self.cutoff * self.cutoff + 1.0 / (6.0 * self.tau * self.tau))
    }
}

impl AnalyticDecoherence for OhmicSpinBoson {
    fn static_field(&self) -> f64 {
        self.b
    }

    fn phase(&self, t: f64) -> (f64, f64) {
        (-self.b * t, -self.b)
    }

    fn mixing(&self, t: f64) -> (f64, f64) {
        if t == 0.0 {
            return (0.0, (2.0 * self.kappa()).sqrt());
        }
        let g = self.scale * gamma_ohmic(t, self.cutoff, self.tau);
        let dg = self.scale * gamma_ohmic_rate(t, self.cutoff, self.tau);
        let r = g.exp();
        let sin_chi = (-(2.0 * g).exp_m1()).sqrt();
        (sin_chi.atan2(r), -dg * r / sin_chi)
    }
}
