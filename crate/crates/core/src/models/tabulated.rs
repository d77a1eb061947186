//! Decoherence functions supplied as data, `D(t) = r(t) e^{iφ(t)}` on top of
//! the free precession `e^{−iBt}`.

use std::io::Read;
use std::path::Path;

use crate::dephasing::{unwrap_phases, DecoherenceTrace, PhaseAngles, COHERENCE_TOL};
use crate::error::{Error, Result};

/// `r` above 1 by at most this much is clamped (with a warning past
/// [`COHERENCE_TOL`]); anything larger is rejected.
pub const R_CLAMP_LIMIT: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedDecoherence {
    pub times: Vec<f64>,
    pub r: Vec<f64>,
    pub phi: Vec<f64>,
    pub b: f64,
}

impl TabulatedDecoherence {
    pub fn with_static_field(mut self, b: f64) -> Self {
        self.b = b;
        self
    }

    /// `c + i s = r e^{i(φ − Bt)}`.
    pub fn to_trace(&self) -> Result<DecoherenceTrace> {
        let phase: Vec<f64> = self
            .times
            .iter()
            .zip(&self.phi)
            .map(|(t, p)| p - self.b * t)
            .collect();
        Ok(
            DecoherenceTrace::from_polar(self.times.clone(), &self.r, &phase)?
                .with_static_field(self.b),
        )
    }

    /// `Φ_{1,2} = −Bt + φ ± arccos r`, with `φ` unwrapped.
    pub fn closed_form_angles(&self) -> PhaseAngles {
        let phi = unwrap_phases(&self.phi);
        let (phi1, phi2) = self
            .times
            .iter()
            .zip(phi.iter().zip(&self.r))
            .map(|(t, (p, r))| {
                let chi = r.min(1.0).acos();
                (-self.b * t + p + chi, -self.b * t + p - chi)
            })
            .unzip();
        PhaseAngles {
            times: self.times.clone(),
            phi1,
            phi2,
        }
    }
}

pub fn load_decoherence_csv(path: &Path) -> Result<TabulatedDecoherence> {
    read_decoherence_csv(std::fs::File::open(path)?)
}

/// Parse `t,r,phi` rows. The grid must be strictly increasing and start at
/// `(0, 1, 0)`.
pub fn read_decoherence_csv<R: Read>(input: R) -> Result<TabulatedDecoherence> {
    let parse_err = |line: usize, message: String| Error::Parse { line, message };
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(input);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    if header != ["t", "r", "phi"] {
        return Err(parse_err(
            1,
            format!("expected header t,r,phi, got {}", header.join(",")),
        ));
    }
    let (mut times, mut rs, mut phis) = (Vec::new(), Vec::new(), Vec::new());
    for (k, rec) in rdr.records().enumerate() {
        let line = k + 2;
        let rec = rec.map_err(|e| parse_err(line, e.to_string()))?;
        if rec.len() != 3 {
            return Err(parse_err(
                line,
                format!("expected 3 fields, got {}", rec.len()),
            ));
        }
        let mut vals = [0.0; 3];
        for (v, field) in vals.iter_mut().zip(rec.iter()) {
            *v = field
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| parse_err(line, format!("bad number {field:?}")))?;
        }
        let [t, mut r, phi] = vals;
        if let Some(&prev) = times.last() {
            if !(t > prev) {
                return Err(parse_err(
                    line,
                    format!("t = {t} does not increase (previous {prev})"),
                ));
            }
        }
        if r < 0.0 {
            return Err(parse_err(line, format!("r = {r} is negative")));
        }
        if r > 1.0 {
            let excess = r - 1.0;
            if excess > R_CLAMP_LIMIT {
                return Err(parse_err(line, format!("r = {r} exceeds 1")));
            }
            if excess > COHERENCE_TOL {
                log::warn!("line {line}: r = {r} exceeds 1 by {excess:e}; clamped");
            }
            r = 1.0;
        }
        times.push(t);
        rs.push(r);
        phis.push(phi);
    }
    if times.is_empty() {
        return Err(parse_err(2, "no data rows".into()));
    }
    if times[0] != 0.0 || (rs[0] - 1.0).abs() > COHERENCE_TOL || phis[0].abs() > COHERENCE_TOL {
        return Err(parse_err(
            2,
            format!(
                "first row must be t=0, r=1, phi=0; got {}, {}, {}",
                times[0], rs[0], phis[0]
            ),
        ));
    }
    Ok(TabulatedDecoherence {
        times,
        r: rs,
        phi: phis,
        b: 0.0,
    })
}
