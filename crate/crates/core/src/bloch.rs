//! Qubit states as expanded Bloch vectors, transfer matrices, and the u/v
//! decomposition of dephasing evolutions.
//!
//! Convention: `ρ = ½(n₀ I + n_x σ_x + n_y σ_y + n_z σ_z)` with `n_i = Tr(σ_i ρ)`,
//! components ordered (0, x, y, z).

use nalgebra::Matrix4;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{structural, validation, Result};
use crate::linalg::{
    self, c, kron, max_diff, max_norm, partial_trace_second, pauli, pauli_z, CMatrix, Hermitian,
    Spectrum, Unitary, TOL,
};

/// Slack on density-matrix eigenvalues.
pub const POSITIVITY_SLACK: f64 = 1e-10;
const TRACE_TOL: f64 = 1e-12;

/// A trace-one positive semidefinite Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(CMatrix);

impl DensityMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        let h = Hermitian::new(m)?;
        Self::check(h.into_inner(), POSITIVITY_SLACK)
    }

    /// Symmetrize away round-off from an evolution, then validate.
    pub fn from_evolved(m: CMatrix) -> Result<Self> {
        Self::from_evolved_with_slack(m, POSITIVITY_SLACK)
    }

    /// As [`from_evolved`](Self::from_evolved) with a custom eigenvalue slack.
    pub fn from_evolved_with_slack(m: CMatrix, slack: f64) -> Result<Self> {
        Self::check(Hermitian::hermitize(&m).into_inner(), slack)
    }

    /// Smallest eigenvalue.
    pub fn min_eigenvalue(&self) -> f64 {
        Hermitian::hermitize(&self.0).eigh().0[0]
    }

    fn check(m: CMatrix, slack: f64) -> Result<Self> {
        let tr = linalg::trace(&m);
        if (tr - c(1.0, 0.0)).norm() > TRACE_TOL * m.nrows() as f64 {
            return Err(validation(format!(
                "density matrix trace is {tr}, expected 1"
            )));
        }
        let (vals, _) = Hermitian::hermitize(&m).eigh();
        if let Some(&low) = vals.first() {
            if low < -slack {
                return Err(validation(format!(
                    "density matrix has negative eigenvalue {low:e}"
                )));
            }
        }
        Ok(Self(m))
    }

    pub fn maximally_mixed(n: usize) -> Self {
        Self(linalg::identity(n) * c(1.0 / n as f64, 0.0))
    }

    /// `|k⟩⟨k|` in an `n`-level system.
    pub fn basis_state(n: usize, k: usize) -> Self {
        let mut m = CMatrix::zeros(n, n);
        m[(k, k)] = c(1.0, 0.0);
        Self(m)
    }

    /// `|ψ⟩⟨ψ|` for a (not necessarily normalized) state vector.
    pub fn pure(psi: &[Complex64]) -> Result<Self> {
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        if norm <= 0.0 {
            return Err(validation("zero state vector"));
        }
        let v = nalgebra::DVector::from_column_slice(psi) / c(norm.sqrt(), 0.0);
        Self::from_evolved(&v * v.adjoint())
    }

    /// Random mixed state `G G† / Tr(G G†)` from a complex Ginibre matrix.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let g = CMatrix::from_fn(n, n, |_, _| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            c(re, im)
        });
        let w = &g * g.adjoint();
        let tr = linalg::trace(&w).re;
        Self(Hermitian::hermitize(&(w / c(tr, 0.0))).into_inner())
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_inner(self) -> CMatrix {
        self.0
    }

    /// `U ρ U†`.
    pub fn evolve(&self, u: &Unitary) -> Result<Self> {
        if u.dim() != self.dim() {
            return Err(validation(format!(
                "unitary dimension {} does not match state dimension {}",
                u.dim(),
                self.dim()
            )));
        }
        Self::from_evolved(linalg::conjugate(u.matrix(), &self.0))
    }

    pub fn trace_distance(&self, other: &DensityMatrix) -> f64 {
        linalg::trace_distance(&self.0, &other.0)
    }
}

/// Expanded Bloch vector `(1, n_x, n_y, n_z)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochVector(pub [f64; 4]);

impl BlochVector {
    pub fn new(nx: f64, ny: f64, nz: f64) -> Result<Self> {
        let v = Self([1.0, nx, ny, nz]);
        if v.polarization() > 1.0 + 1e-10 {
            return Err(validation(format!(
                "Bloch vector length {} exceeds 1",
                v.polarization()
            )));
        }
        Ok(v)
    }

    pub fn polarization(&self) -> f64 {
        (self.0[1].powi(2) + self.0[2].powi(2) + self.0[3].powi(2)).sqrt()
    }

    pub fn x(&self) -> f64 {
        self.0[1]
    }

    pub fn y(&self) -> f64 {
        self.0[2]
    }

    pub fn z(&self) -> f64 {
        self.0[3]
    }
}

pub fn density_to_bloch(rho: &DensityMatrix) -> Result<BlochVector> {
    if rho.dim() != 2 {
        return Err(validation(format!(
            "Bloch vectors need a 2x2 density matrix, got {}x{}",
            rho.dim(),
            rho.dim()
        )));
    }
    Ok(bloch_of(rho.matrix()))
}

fn bloch_of(m: &CMatrix) -> BlochVector {
    let mut n = [0.0; 4];
    for (i, v) in n.iter_mut().enumerate() {
        *v = linalg::trace(&(pauli(i) * m)).re;
    }
    BlochVector(n)
}

pub fn bloch_to_density(n: &BlochVector) -> Result<DensityMatrix> {
    if (n.0[0] - 1.0).abs() > 1e-12 {
        return Err(validation(format!("n₀ must be 1, got {}", n.0[0])));
    }
    if n.polarization() > 1.0 + 1e-10 {
        return Err(validation(format!(
            "Bloch vector length {} exceeds 1",
            n.polarization()
        )));
    }
    let m = (0..4).fold(CMatrix::zeros(2, 2), |acc, i| {
        acc + pauli(i) * c(0.5 * n.0[i], 0.0)
    });
    DensityMatrix::from_evolved(m)
}

/// 4×4 real map on expanded Bloch vectors, index order (0, x, y, z).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferMatrix4(pub Matrix4<f64>);

impl TransferMatrix4 {
    pub fn identity() -> Self {
        Self(Matrix4::identity())
    }

    pub fn apply(&self, n: &BlochVector) -> BlochVector {
        let v = self.0 * nalgebra::Vector4::from(n.0);
        BlochVector([v[0], v[1], v[2], v[3]])
    }

    /// Largest affine entry `|T_i0|`, `i > 0`.
    pub fn affine_part(&self) -> f64 {
        (1..4).map(|i| self.0[(i, 0)].abs()).fold(0.0, f64::max)
    }

    /// Dephasing transfer matrix with `(x,y)` block `[[c, −s], [s, c]]`.
    pub fn dephasing(c: f64, s: f64) -> Self {
        let mut m = Matrix4::identity();
        m[(1, 1)] = c;
        m[(1, 2)] = -s;
        m[(2, 1)] = s;
        m[(2, 2)] = c;
        Self(m)
    }

    /// Extract `(c, s)` after checking the dephasing block structure:
    /// no affine column, `z` and `0` rows/columns trivial, and a rotation-like
    /// `(x,y)` block.
    pub fn dephasing_parameters(&self, tol: f64) -> Result<(f64, f64)> {
        let m = &self.0;
        let affine = self.affine_part();
        if affine > tol {
            return Err(structural(format!(
                "transfer matrix has an affine term |T_i0| = {affine:e}; \
                 no random-unitary model produces it"
            )));
        }
        let mut worst: f64 = (m[(0, 0)] - 1.0).abs().max((m[(3, 3)] - 1.0).abs());
        for k in 1..4 {
            worst = worst.max(m[(0, k)].abs());
        }
        for k in 1..3 {
            worst = worst.max(m[(3, k)].abs()).max(m[(k, 3)].abs());
        }
        worst = worst
            .max((m[(1, 1)] - m[(2, 2)]).abs())
            .max((m[(1, 2)] + m[(2, 1)]).abs());
        if worst > tol {
            return Err(structural(format!(
                "transfer matrix is not of dephasing form (deviation {worst:e})"
            )));
        }
        let cc = 0.5 * (m[(1, 1)] + m[(2, 2)]);
        let ss = 0.5 * (m[(2, 1)] - m[(1, 2)]);
        Ok((cc, ss))
    }
}

fn bath_dim(total: usize, what: &str) -> Result<usize> {
    if total < 2 || total % 2 != 0 {
        return Err(validation(format!(
            "{what} dimension {total} is not 2 × (bath dimension)"
        )));
    }
    Ok(total / 2)
}

/// Reduced qubit state after evolving `ρ_S ⊗ ρ_B` with `u` (qubit factor first).
pub fn reduced_evolution(
    u: &Unitary,
    rho_s: &DensityMatrix,
    rho_b0: &DensityMatrix,
) -> Result<DensityMatrix> {
    let db = bath_dim(u.dim(), "unitary")?;
    if rho_b0.dim() != db || rho_s.dim() != 2 {
        return Err(validation(format!(
            "state dimensions ({}, {}) do not match unitary of dimension {}",
            rho_s.dim(),
            rho_b0.dim(),
            u.dim()
        )));
    }
    let joint = kron(rho_s.matrix(), rho_b0.matrix());
    let evolved = linalg::conjugate(u.matrix(), &joint);
    DensityMatrix::from_evolved(partial_trace_second(&evolved, 2, db))
}

/// Transfer matrix of the reduced dynamics generated by a joint unitary,
/// from the images of the four basis Bloch vectors.
pub fn transfer_from_unitary(u: &Unitary, rho_b0: &DensityMatrix) -> Result<TransferMatrix4> {
    let inputs = [
        [1.0, 0.0, 0.0, 0.0],
        [1.0, 1.0, 0.0, 0.0],
        [1.0, 0.0, 1.0, 0.0],
        [1.0, 0.0, 0.0, 1.0],
    ];
    let mut images = [[0.0; 4]; 4];
    for (k, n) in inputs.iter().enumerate() {
        let rho = bloch_to_density(&BlochVector(*n))?;
        images[k] = density_to_bloch(&reduced_evolution(u, &rho, rho_b0)?)?.0;
    }
    let mut t = Matrix4::zeros();
    for i in 0..4 {
        t[(i, 0)] = images[0][i];
        for k in 1..4 {
            t[(i, k)] = images[k][i] - images[0][i];
        }
    }
    Ok(TransferMatrix4(t))
}

/// Quantum transfer matrix of `exp(-i H t)` acting on `ρ_S ⊗ ρ_B(0)`.
pub fn quantum_transfer_matrix(
    h_total: &Hermitian,
    rho_b0: &DensityMatrix,
    t: f64,
) -> Result<TransferMatrix4> {
    let db = bath_dim(h_total.dim(), "Hamiltonian")?;
    if rho_b0.dim() != db {
        return Err(validation(format!(
            "bath state dimension {} does not match Hamiltonian bath dimension {db}",
            rho_b0.dim()
        )));
    }
    transfer_from_unitary(&linalg::expm_hermitian(h_total, t), rho_b0)
}

/// Transfer matrices on a time grid, reusing one eigendecomposition.
pub fn quantum_transfer_series(
    h_total: &Hermitian,
    rho_b0: &DensityMatrix,
    times: &[f64],
) -> Result<Vec<TransferMatrix4>> {
    let spectrum: Spectrum = h_total.spectrum();
    times
        .iter()
        .map(|&t| transfer_from_unitary(&spectrum.propagator(t), rho_b0))
        .collect()
}

/// Bath operators with `U = I_S ⊗ u + σ_z ⊗ v`.
#[derive(Debug, Clone, PartialEq)]
pub struct UvPair {
    pub u: CMatrix,
    pub v: CMatrix,
    pub time: Option<f64>,
}

impl UvPair {
    pub fn at(mut self, t: f64) -> Self {
        self.time = Some(t);
        self
    }

    /// Largest violation of `uu† + vv† = I` and `uv† + vu† = 0`.
    pub fn unitarity_defect(&self) -> f64 {
        let n = self.u.nrows();
        let a = &self.u * self.u.adjoint() + &self.v * self.v.adjoint();
        let b = &self.u * self.v.adjoint() + &self.v * self.u.adjoint();
        max_diff(&a, &linalg::identity(n)).max(max_norm(&b))
    }

    pub fn recompose(&self) -> CMatrix {
        kron(&linalg::identity(2), &self.u) + kron(&pauli_z(), &self.v)
    }
}

/// Split a dephasing-form joint unitary into `u = ½Tr_S U`, `v = ½Tr_S(σ_z U)`.
pub fn uv_decompose(u_total: &Unitary) -> Result<UvPair> {
    let db = bath_dim(u_total.dim(), "unitary")?;
    let m = u_total.matrix();
    let off = m
        .view((0, db), (db, db))
        .iter()
        .chain(m.view((db, 0), (db, db)).iter())
        .fold(0.0, |acc: f64, z| acc.max(z.norm()));
    if off > TOL.unitarity {
        return Err(structural(format!(
            "unitary does not commute with σ_z ⊗ I (off-diagonal block norm {off:e})"
        )));
    }
    let upper = m.view((0, 0), (db, db)).into_owned();
    let lower = m.view((db, db), (db, db)).into_owned();
    let pair = UvPair {
        u: (&upper + &lower) * c(0.5, 0.0),
        v: (&upper - &lower) * c(0.5, 0.0),
        time: None,
    };
    let defect = pair.unitarity_defect();
    if defect > TOL.round_trip {
        return Err(structural(format!(
            "u/v unitarity relations violated by {defect:e}"
        )));
    }
    Ok(pair)
}

/// `c = Tr[(u†u − v†v) ρ_B]`, `s = Im Tr[(v†u − u†v) ρ_B]`, matching the
/// `(x,y)` block `[[c, −s], [s, c]]` of the transfer matrix.
pub fn cs_from_uv(uv: &UvPair, rho_b0: &DensityMatrix) -> Result<(f64, f64)> {
    if uv.u.nrows() != rho_b0.dim() {
        return Err(validation("u/v and bath state dimensions differ"));
    }
    let defect = uv.unitarity_defect();
    if defect > TOL.round_trip {
        return Err(structural(format!(
            "u/v unitarity relations violated by {defect:e}"
        )));
    }
    let rho = rho_b0.matrix();
    let ud = uv.u.adjoint();
    let vd = uv.v.adjoint();
    let cc = linalg::trace(&((&ud * &uv.u - &vd * &uv.v) * rho));
    if cc.im.abs() > 1e-10 {
        return Err(structural(format!("c has imaginary part {:e}", cc.im)));
    }
    let ss = linalg::trace(&((&vd * &uv.u - &ud * &uv.v) * rho));
    if ss.re.abs() > 1e-10 {
        return Err(structural(format!("s has real part {:e}", ss.re)));
    }
    let (cc, ss) = (cc.re, ss.im);
    if cc * cc + ss * ss > 1.0 + 1e-9 {
        return Err(structural(format!(
            "c² + s² = {} exceeds 1",
            cc * cc + ss * ss
        )));
    }
    Ok((cc, ss))
}
