//! Depolarization as classical noise: random unitaries `e^{−iH_U t}` with
//! `U` Haar-distributed (or drawn from the Clifford group) and `H_U` the
//! principal generator of `U`.

mod clifford;

pub use clifford::{clifford_average, CliffordTable};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bloch::DensityMatrix;
use crate::dephasing::KrausSet;
use crate::error::{validation, Error, Result};
use crate::linalg::{
    self, c, eigenphases, gell_mann_basis, haar_unitary_with, kron, kron_all, CMatrix, Unitary,
};
use crate::mc::{monte_carlo, Moments};

/// Kraus operators of the `n`-qubit depolarizing channel with strength `p`.
pub fn depolarizing_kraus(n_qubits: usize, p: f64) -> Result<KrausSet> {
    if !(0.0..=1.0).contains(&p) {
        return Err(validation(format!(
            "depolarizing strength {p} outside [0, 1]"
        )));
    }
    if n_qubits == 0 || n_qubits > 6 {
        return Err(validation("Kraus depolarization supports 1 to 6 qubits"));
    }
    let n4 = 4usize.pow(n_qubits as u32);
    let dim = 1usize << n_qubits;
    let mut ops =
        vec![linalg::identity(dim) * c((1.0 - (n4 - 1) as f64 * p / n4 as f64).sqrt(), 0.0)];
    let scale = c(p.sqrt() / dim as f64, 0.0);
    for idx in 1..n4 {
        let factors: Vec<CMatrix> = (0..n_qubits)
            .map(|q| linalg::pauli((idx >> (2 * q)) & 3))
            .collect();
        ops.push(kron_all(&factors) * scale);
    }
    KrausSet::new(ops)
}

/// `(1 − p)ρ₀ + p I/N`: the Kraus sum for qubit registers, the convex
/// combination directly otherwise.
pub fn kraus_depolarize(rho0: &DensityMatrix, p: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&p) {
        return Err(validation(format!(
            "depolarizing strength {p} outside [0, 1]"
        )));
    }
    let n = rho0.dim();
    if n.is_power_of_two() && n > 1 && n <= 64 {
        return depolarizing_kraus(n.trailing_zeros() as usize, p)?.apply(rho0);
    }
    DensityMatrix::from_evolved(
        rho0.matrix() * c(1.0 - p, 0.0) + linalg::identity(n) * c(p / n as f64, 0.0),
    )
}

/// `sin(πx)`, exactly zero at integers.
fn sin_pi(x: f64) -> f64 {
    let r = x - 2.0 * (0.5 * x).round();
    if r == 0.0 || r.abs() == 1.0 {
        return 0.0;
    }
    let folded = if r > 0.5 {
        1.0 - r
    } else if r < -0.5 {
        -1.0 - r
    } else {
        r
    };
    (std::f64::consts::PI * folded).sin()
}

fn sinc_2pi(u: f64, sin2piu: f64) -> f64 {
    if u.abs() < 1e-6 {
        let x = 2.0 * std::f64::consts::PI * u;
        1.0 - x * x / 6.0
    } else {
        sin2piu / (2.0 * std::f64::consts::PI * u)
    }
}

/// `n_z(t) = 1/3 + sin(2πt)/(3π(t − t³))` for a qubit starting in `|0⟩`,
/// with the removable points `t = 0` (`n_z = 1`) and `t = 1` (`n_z = 0`).
pub fn analytic_nz(t: f64) -> f64 {
    let s = sin_pi(2.0 * t);
    if t < 0.5 {
        1.0 / 3.0 + (2.0 / 3.0) * sinc_2pi(t, s) / (1.0 - t * t)
    } else {
        // With u = 1 − t: sin 2πt = −sin 2πu and t − t³ = t u (1 + t).
        let u = 1.0 - t;
        1.0 / 3.0 - (2.0 / 3.0) * sinc_2pi(u, -s) / (t * (1.0 + t))
    }
}

/// First zero of [`analytic_nz`] in `(0.5, 1)`: the end of proper
/// depolarization.
pub fn find_nz_root() -> f64 {
    // n_z(1) = 0 as well, so bracket the interior sign change by scanning.
    let mut a = 0.5;
    let mut b = 0.5;
    for k in 1..50 {
        b = 0.5 + 0.01 * k as f64;
        if analytic_nz(b) < 0.0 {
            break;
        }
        a = b;
    }
    while b - a > 1e-12 {
        let m = 0.5 * (a + b);
        if analytic_nz(m) > 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Source of random unitaries for the classical depolarization model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum UnitarySource {
    #[default]
    Haar,
    Clifford,
}

/// Averaged states on a time grid, stored in the Gell-Mann basis
/// `ρ = I/N + ½ Σ_a n_a λ_a`.
#[derive(Debug, Clone, PartialEq)]
pub struct DepolarizeResult {
    pub dim: usize,
    pub times: Vec<f64>,
    pub samples: usize,
    /// `components[k][a] = ⟨Tr(λ_a ρ(t_k))⟩`.
    pub components: Vec<Vec<f64>>,
    pub stderr: Vec<Vec<f64>>,
}

impl DepolarizeResult {
    pub fn state(&self, k: usize) -> Result<DensityMatrix> {
        let basis = gell_mann_basis(self.dim);
        let m = basis.iter().zip(&self.components[k]).fold(
            linalg::identity(self.dim) * c(1.0 / self.dim as f64, 0.0),
            |acc, (l, n)| acc + l * c(0.5 * n, 0.0),
        );
        DensityMatrix::from_evolved(m)
    }

    /// `(n_z, σ)` at grid index `k` for a qubit.
    pub fn nz(&self, k: usize) -> Option<(f64, f64)> {
        (self.dim == 2).then(|| (self.components[k][2], self.stderr[k][2]))
    }

    pub fn write_nz_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        if self.dim != 2 {
            return Err(Error::Capability(
                "n_z sweep output is defined for a single qubit".into(),
            ));
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "nz_mc", "nz_err", "nz_analytic"])?;
        for (k, &t) in self.times.iter().enumerate() {
            let (nz, err) = self.nz(k).expect("qubit");
            w.write_record(
                [t, nz, err, analytic_nz(t)]
                    .iter()
                    .map(|x| crate::dephasing::format_f64(*x)),
            )?;
        }
        w.flush()?;
        Ok(())
    }
}

fn components(rho: &CMatrix, basis: &[CMatrix], out: &mut [f64]) {
    for (o, l) in out.iter_mut().zip(basis) {
        *o = linalg::trace(&(l * rho)).re;
    }
}

/// `e^{−iH t} ρ e^{iH t}` for `H = V diag(d) V†`, given `ρ' = V†ρV`.
fn evolve_in_eigenbasis(rho_eig: &CMatrix, phases: &[f64], vecs: &CMatrix, t: f64) -> CMatrix {
    let n = phases.len();
    let rotated = CMatrix::from_fn(n, n, |j, k| {
        rho_eig[(j, k)] * Complex64::from_polar(1.0, -(phases[j] - phases[k]) * t)
    });
    vecs * rotated * vecs.adjoint()
}

/// Haar Monte Carlo of `∫ e^{−iH_U t} ρ₀ e^{iH_U t} dU` on a grid, reusing each
/// draw at every time.
pub fn haar_mc_depolarize(
    rho0: &DensityMatrix,
    times: &[f64],
    samples: usize,
    seed: u64,
) -> Result<DepolarizeResult> {
    if samples == 0 {
        return Err(validation("need at least one sample"));
    }
    let n = rho0.dim();
    let basis = gell_mann_basis(n);
    let na = basis.len();
    let failures = std::sync::atomic::AtomicUsize::new(0);
    let moments = monte_carlo(seed, samples, times.len() * na, |rng, out| {
        let draw = haar_unitary_with(n, rng).and_then(|u| eigenphases(&u));
        let Ok((phases, vecs)) = draw else {
            failures.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
            return;
        };
        let rho_eig = vecs.adjoint() * rho0.matrix() * &vecs;
        for (k, &t) in times.iter().enumerate() {
            let rho_t = evolve_in_eigenbasis(&rho_eig, &phases, &vecs, t);
            components(&rho_t, &basis, &mut out[k * na..(k + 1) * na]);
        }
    });
    let failures = failures.into_inner();
    if failures > 0 {
        return Err(Error::Numerical(format!(
            "{failures} Haar draws failed to diagonalize"
        )));
    }
    Ok(split_moments(n, times, &moments, na))
}

fn split_moments(n: usize, times: &[f64], moments: &Moments, na: usize) -> DepolarizeResult {
    let mean = moments.mean();
    let err = moments.stderr();
    DepolarizeResult {
        dim: n,
        times: times.to_vec(),
        samples: moments.n,
        components: mean.chunks(na).map(<[f64]>::to_vec).collect(),
        stderr: err.chunks(na).map(<[f64]>::to_vec).collect(),
    }
}

/// Exact average of `e^{−iH_C t} ρ₀ e^{iH_C t}` over the Clifford table, with
/// `H_C` the principal generator of each determinant-one representative.
pub fn clifford_depolarize(
    rho0: &DensityMatrix,
    times: &[f64],
    table: &CliffordTable,
) -> Result<DepolarizeResult> {
    let n = rho0.dim();
    if table.dim() != n {
        return Err(validation("state and Clifford table dimensions differ"));
    }
    let basis = gell_mann_basis(n);
    let na = basis.len();
    let decomposed: Vec<(Vec<f64>, CMatrix)> = table
        .elements()
        .par_iter()
        .map(eigenphases)
        .collect::<Result<_>>()?;
    let mut moments = Moments::new(times.len() * na);
    let mut out = vec![0.0; times.len() * na];
    for (phases, vecs) in &decomposed {
        let rho_eig = vecs.adjoint() * rho0.matrix() * vecs;
        for (k, &t) in times.iter().enumerate() {
            let rho_t = evolve_in_eigenbasis(&rho_eig, phases, vecs, t);
            components(&rho_t, &basis, &mut out[k * na..(k + 1) * na]);
        }
        moments.push(&out);
    }
    let mut res = split_moments(n, times, &moments, na);
    // The average is exact; the spread is not an error bar.
    res.stderr.iter_mut().flatten().for_each(|e| *e = 0.0);
    Ok(res)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsotropyReport {
    pub t: f64,
    pub samples: usize,
    /// Mean Gell-Mann components orthogonal to the initial polarization.
    pub transverse: Vec<f64>,
    pub transverse_stderr: Vec<f64>,
    /// Mean component along the initial polarization.
    pub longitudinal: f64,
    pub pass: bool,
}

/// Check that the averaged polarization stays parallel to the initial one:
/// every transverse component is within 3σ of zero.
pub fn haar_isotropy_check(
    rho0: &DensityMatrix,
    t: f64,
    samples: usize,
    seed: u64,
) -> Result<IsotropyReport> {
    if samples == 0 {
        return Err(validation("need at least one sample"));
    }
    let n = rho0.dim();
    let basis = gell_mann_basis(n);
    let na = basis.len();
    let mut n0 = vec![0.0; na];
    components(rho0.matrix(), &basis, &mut n0);
    let norm = n0.iter().map(|x| x * x).sum::<f64>().sqrt();
    let axis: Option<Vec<f64>> = (norm > 1e-12).then(|| n0.iter().map(|x| x / norm).collect());
    let moments = monte_carlo(seed, samples, na + 1, |rng, out| {
        let Ok((phases, vecs)) = haar_unitary_with(n, rng).and_then(|u| eigenphases(&u)) else {
            out.iter_mut().for_each(|x| *x = f64::NAN);
            return;
        };
        let rho_eig = vecs.adjoint() * rho0.matrix() * &vecs;
        let rho_t = evolve_in_eigenbasis(&rho_eig, &phases, &vecs, t);
        let mut v = vec![0.0; na];
        components(&rho_t, &basis, &mut v);
        let along = axis
            .as_ref()
            .map_or(0.0, |a| a.iter().zip(&v).map(|(x, y)| x * y).sum());
        for a in 0..na {
            out[a] = v[a] - along * axis.as_ref().map_or(0.0, |ax| ax[a]);
        }
        out[na] = along;
    });
    let mean = moments.mean();
    if mean.iter().any(|x| x.is_nan()) {
        return Err(Error::Numerical("Haar draw failed to diagonalize".into()));
    }
    let err = moments.stderr();
    let pass = (0..na).all(|a| mean[a].abs() <= 3.0 * err[a] + 1e-14);
    Ok(IsotropyReport {
        t,
        samples,
        transverse: mean[..na].to_vec(),
        transverse_stderr: err[..na].to_vec(),
        longitudinal: mean[na],
        pass,
    })
}

/// Degree-2 moment `E[(U⊗U)(ρ⊗ρ)(U⊗U)†]` in the Pauli-product basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SecondMoment {
    pub components: Vec<f64>,
    pub stderr: Vec<f64>,
}

fn pair_basis(n: usize) -> Vec<CMatrix> {
    let single: Vec<CMatrix> = std::iter::once(linalg::identity(n))
        .chain(gell_mann_basis(n))
        .collect();
    single
        .iter()
        .flat_map(|a| single.iter().map(move |b| kron(a, b)))
        .collect()
}

fn second_moment_of(u: &Unitary, rho2: &CMatrix, basis: &[CMatrix], out: &mut [f64]) {
    let uu = kron(u.matrix(), u.matrix());
    components(&linalg::conjugate(&uu, rho2), basis, out);
}

pub fn clifford_second_moment(rho0: &DensityMatrix, table: &CliffordTable) -> Result<SecondMoment> {
    let n = rho0.dim();
    if table.dim() != n {
        return Err(validation("state and Clifford table dimensions differ"));
    }
    let basis = pair_basis(n);
    let rho2 = kron(rho0.matrix(), rho0.matrix());
    let mut sum = vec![0.0; basis.len()];
    let mut out = vec![0.0; basis.len()];
    for u in table.elements() {
        second_moment_of(u, &rho2, &basis, &mut out);
        sum.iter_mut().zip(&out).for_each(|(s, o)| *s += o);
    }
    Ok(SecondMoment {
        components: sum.iter().map(|s| s / table.len() as f64).collect(),
        stderr: vec![0.0; basis.len()],
    })
}

pub fn haar_second_moment(rho0: &DensityMatrix, samples: usize, seed: u64) -> Result<SecondMoment> {
    let n = rho0.dim();
    let basis = pair_basis(n);
    let rho2 = kron(rho0.matrix(), rho0.matrix());
    let moments = monte_carlo(
        seed,
        samples,
        basis.len(),
        |rng, out| match haar_unitary_with(n, rng) {
            Ok(u) => second_moment_of(&u, &rho2, &basis, out),
            Err(_) => out.iter_mut().for_each(|x| *x = f64::NAN),
        },
    );
    let components = moments.mean();
    if components.iter().any(|x| x.is_nan()) {
        return Err(Error::Numerical("Haar sampling failed".into()));
    }
    Ok(SecondMoment {
        components,
        stderr: moments.stderr(),
    })
}
