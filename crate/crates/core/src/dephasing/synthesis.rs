//! Two-branch field synthesis.
//!
//! A coherence vector `(c, s)` with `r = |(c, s)| ≤ 1` is written as the
//! midpoint of two unit vectors,
//!
//! ```text
//! (c, s) = ½ (c − βs, s + βc) + ½ (c + βs, s − βc),   β = √(1 − r²) / r,
//! ```
//!
//! so the `(x,y)` block of the transfer matrix is an equal-weight mixture of
//! two rotations. Writing `c + i s = r e^{iψ}` and `r = cos χ`, the two
//! rotation angles are `ψ + χ` (branch 1) and `ψ − χ` (branch 2). The fields
//! are `h_i = dΦ_i/dt + B`.

use std::f64::consts::PI;
use std::io::{Read, Write};
use std::path::Path;

use super::trace::{check_grid, DecoherenceTrace, COHERENCE_TOL};
use crate::error::{validation, Error, Result};

/// Below this coherence the branch angles spin arbitrarily fast and
/// synthesis is refused.
pub const R_MIN: f64 = 1e-6;

/// `β = √(1 − r²)/r`.
pub fn beta_of(c: f64, s: f64) -> Result<f64> {
    beta_with_cutoff(c, s, R_MIN)
}

pub fn beta_with_cutoff(c: f64, s: f64, r_min: f64) -> Result<f64> {
    let r2 = c * c + s * s;
    if !r2.is_finite() || r2 > 1.0 + COHERENCE_TOL {
        return Err(validation(format!("c² + s² = {r2} exceeds 1")));
    }
    let r = r2.sqrt();
    if r < r_min {
        return Err(Error::Singularity { time: None, r });
    }
    // Below this the square root only amplifies rounding in r².
    if r2 >= 1.0 - 1e-14 {
        return Ok(0.0);
    }
    Ok((1.0 - r2).sqrt() / r)
}

/// Wrapped branch angles `(Φ₁, Φ₂) ∈ (−π, π]²` at a single point.
pub fn branch_angles(c: f64, s: f64) -> Result<(f64, f64)> {
    let beta = beta_of(c, s)?;
    Ok((
        (s + beta * c).atan2(c - beta * s),
        (s - beta * c).atan2(c + beta * s),
    ))
}

/// Continuous branch angles on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseAngles {
    pub times: Vec<f64>,
    pub phi1: Vec<f64>,
    pub phi2: Vec<f64>,
}

/// Accumulate `raw` (each in `(−π, π]`) into a continuous sequence, choosing
/// the `2π` branch that keeps consecutive increments below `π`.
pub fn unwrap_phases(raw: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(raw.len());
    let mut offset = 0.0;
    let mut prev: Option<f64> = None;
    for &x in raw {
        if let Some(p) = prev {
            let mut d = x + offset - p;
            while d > PI {
                offset -= 2.0 * PI;
                d -= 2.0 * PI;
            }
            while d < -PI {
                offset += 2.0 * PI;
                d += 2.0 * PI;
            }
        }
        let v = x + offset;
        out.push(v);
        prev = Some(v);
    }
    out
}

/// Branch angles over a whole trace, unwrapped and starting from zero.
pub fn phase_angles(trace: &DecoherenceTrace) -> Result<PhaseAngles> {
    phase_angles_with_cutoff(trace, R_MIN)
}

pub fn phase_angles_with_cutoff(trace: &DecoherenceTrace, r_min: f64) -> Result<PhaseAngles> {
    let n = trace.len();
    let mut raw1 = Vec::with_capacity(n);
    let mut raw2 = Vec::with_capacity(n);
    for k in 0..n {
        let (c, s) = (trace.c()[k], trace.s()[k]);
        let beta = beta_with_cutoff(c, s, r_min).map_err(|e| match e {
            Error::Singularity { r, .. } => Error::Singularity {
                time: Some(trace.times()[k]),
                r,
            },
            other => other,
        })?;
        raw1.push((s + beta * c).atan2(c - beta * s));
        raw2.push((s - beta * c).atan2(c + beta * s));
    }
    Ok(PhaseAngles {
        times: trace.times().to_vec(),
        phi1: unwrap_phases(&raw1),
        phi2: unwrap_phases(&raw2),
    })
}

/// The synthesized classical noise: `h(t) = h₁(t)` or `h₂(t)`, each with
/// probability ½, on top of the static field `B`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldPair {
    pub times: Vec<f64>,
    pub h1: Vec<f64>,
    pub h2: Vec<f64>,
    pub phi1: Vec<f64>,
    pub phi2: Vec<f64>,
    pub b: f64,
}

impl FieldPair {
    pub const PROBABILITIES: [f64; 2] = [0.5, 0.5];

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// `∫₀ᵗ (−B + h_i) dt′` by the trapezoid rule on the grid.
    pub fn integrated_phases(&self) -> (Vec<f64>, Vec<f64>) {
        let shift = |h: &[f64]| h.iter().map(|x| x - self.b).collect::<Vec<_>>();
        (
            cumulative_trapezoid(&self.times, &shift(&self.h1)),
            cumulative_trapezoid(&self.times, &shift(&self.h2)),
        )
    }

    /// Largest deviation between the stored angles and the integrated fields,
    /// relative to `max(1, max |Φ|)`.
    pub fn phase_reconstruction_error(&self) -> f64 {
        let (p1, p2) = self.integrated_phases();
        let scale = self
            .phi1
            .iter()
            .chain(&self.phi2)
            .fold(1.0_f64, |acc, x| acc.max(x.abs()));
        let worst = p1
            .iter()
            .zip(&self.phi1)
            .chain(p2.iter().zip(&self.phi2))
            .fold(0.0_f64, |acc, (a, b)| acc.max((a - b).abs()));
        worst / scale
    }

    /// The same model with branch labels exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            times: self.times.clone(),
            h1: self.h2.clone(),
            h2: self.h1.clone(),
            phi1: self.phi2.clone(),
            phi2: self.phi1.clone(),
            b: self.b,
        }
    }

    /// CSV with header `t,h1,h2,phi1,phi2`, 17 significant digits.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "h1", "h2", "phi1", "phi2"])?;
        for k in 0..self.len() {
            w.write_record(
                [
                    self.times[k],
                    self.h1[k],
                    self.h2[k],
                    self.phi1[k],
                    self.phi2[k],
                ]
                .iter()
                .map(|x| format_f64(*x)),
            )?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }

    pub fn read_csv<R: Read>(input: R, b: f64) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(input);
        let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
        if header != ["t", "h1", "h2", "phi1", "phi2"] {
            return Err(Error::Parse {
                line: 1,
                message: format!(
                    "expected header t,h1,h2,phi1,phi2, got {}",
                    header.join(",")
                ),
            });
        }
        let mut cols: [Vec<f64>; 5] = Default::default();
        for (k, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let line = k + 2;
            if rec.len() != 5 {
                return Err(Error::Parse {
                    line,
                    message: format!("expected 5 fields, got {}", rec.len()),
                });
            }
            for (col, field) in cols.iter_mut().zip(rec.iter()) {
                col.push(field.parse::<f64>().map_err(|e| Error::Parse {
                    line,
                    message: format!("bad number {field:?}: {e}"),
                })?);
            }
        }
        let [times, h1, h2, phi1, phi2] = cols;
        check_grid(&times)?;
        Ok(Self {
            times,
            h1,
            h2,
            phi1,
            phi2,
            b,
        })
    }
}

/// Shortest-form-independent float formatting with 17 significant digits.
pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Fields from continuous branch angles by second-order finite differences
/// (central in the interior, one-sided three-point at the ends).
pub fn fields_from_angles(angles: &PhaseAngles, b: f64) -> Result<FieldPair> {
    let n = angles.times.len();
    if n < 3 {
        return Err(validation(format!(
            "field synthesis needs at least 3 grid points, got {n}"
        )));
    }
    if angles.phi1.len() != n || angles.phi2.len() != n {
        return Err(validation("angle arrays and grid differ in length"));
    }
    check_grid(&angles.times)?;
    let d1 = derivative(&angles.times, &angles.phi1);
    let d2 = derivative(&angles.times, &angles.phi2);
    Ok(FieldPair {
        times: angles.times.clone(),
        h1: d1.into_iter().map(|d| d + b).collect(),
        h2: d2.into_iter().map(|d| d + b).collect(),
        phi1: angles.phi1.clone(),
        phi2: angles.phi2.clone(),
        b,
    })
}

/// Trace → angles → fields, with `B` taken from the trace.
pub fn synthesize(trace: &DecoherenceTrace) -> Result<FieldPair> {
    fields_from_angles(&phase_angles(trace)?, trace.static_field())
}

/// Second-order derivative on a non-uniform grid (needs ≥ 3 points).
pub fn derivative(t: &[f64], f: &[f64]) -> Vec<f64> {
    let n = t.len();
    assert!(n >= 3 && f.len() == n);
    let mut d = vec![0.0; n];
    {
        let (h1, h2) = (t[1] - t[0], t[2] - t[1]);
        d[0] = -(2.0 * h1 + h2) / (h1 * (h1 + h2)) * f[0] + (h1 + h2) / (h1 * h2) * f[1]
            - h1 / (h2 * (h1 + h2)) * f[2];
    }
    for i in 1..n - 1 {
        let (hm, hp) = (t[i] - t[i - 1], t[i + 1] - t[i]);
        d[i] = -hp / (hm * (hm + hp)) * f[i - 1]
            + (hp - hm) / (hm * hp) * f[i]
            + hm / (hp * (hm + hp)) * f[i + 1];
    }
    {
        let (h1, h2) = (t[n - 1] - t[n - 2], t[n - 2] - t[n - 3]);
        d[n - 1] = (2.0 * h1 + h2) / (h1 * (h1 + h2)) * f[n - 1] - (h1 + h2) / (h1 * h2) * f[n - 2]
            + h1 / (h2 * (h1 + h2)) * f[n - 3];
    }
    d
}

pub fn cumulative_trapezoid(t: &[f64], f: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(t.len());
    let mut acc = 0.0;
    out.push(0.0);
    for k in 1..t.len() {
        acc += 0.5 * (f[k] + f[k - 1]) * (t[k] - t[k - 1]);
        out.push(acc);
    }
    out
}

/// A decoherence model with closed-form polar decomposition
/// `c + i s = cos χ(t) · e^{iψ(t)}` and closed-form time derivatives.
pub trait AnalyticDecoherence {
    /// Static splitting `B`.
    fn static_field(&self) -> f64;

    /// Total phase `ψ(t)` (continuous) and `dψ/dt`.
    fn phase(&self, t: f64) -> (f64, f64);

    /// Mixing angle `χ(t) = arccos r(t) ∈ [0, π/2]` and `dχ/dt`.
    fn mixing(&self, t: f64) -> (f64, f64);
}

/// Trace sampled from an analytic model.
pub fn analytic_trace<M: AnalyticDecoherence + ?Sized>(
    model: &M,
    times: &[f64],
) -> Result<DecoherenceTrace> {
    let (r, psi): (Vec<f64>, Vec<f64>) = times
        .iter()
        .map(|&t| (model.mixing(t).0.cos(), model.phase(t).0))
        .unzip();
    Ok(DecoherenceTrace::from_polar(times.to_vec(), &r, &psi)?
        .with_static_field(model.static_field()))
}

/// Fields from exact angle derivatives: `h_{1,2} = dψ/dt ± dχ/dt + B`.
pub fn analytic_fields<M: AnalyticDecoherence + ?Sized>(
    model: &M,
    times: &[f64],
) -> Result<FieldPair> {
    check_grid(times)?;
    let b = model.static_field();
    let mut fp = FieldPair {
        times: times.to_vec(),
        h1: Vec::with_capacity(times.len()),
        h2: Vec::with_capacity(times.len()),
        phi1: Vec::with_capacity(times.len()),
        phi2: Vec::with_capacity(times.len()),
        b,
    };
    for &t in times {
        let (psi, dpsi) = model.phase(t);
        let (chi, dchi) = model.mixing(t);
        if chi.cos() < R_MIN {
            return Err(Error::Singularity {
                time: Some(t),
                r: chi.cos(),
            });
        }
        fp.phi1.push(psi + chi);
        fp.phi2.push(psi - chi);
        fp.h1.push(dpsi + dchi + b);
        fp.h2.push(dpsi - dchi + b);
    }
    Ok(fp)
}
