//! Small dense complex linear algebra.
//!
//! Everything here works on `nalgebra::DMatrix<Complex64>`. Dimensions stay
//! small (qubit ⊗ bath up to a few dozen), so plain dense algorithms are used
//! throughout: Hermitian eigendecomposition for matrix exponentials, complex
//! Schur for unitary spectra, Householder QR for Haar sampling.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{validation, Error, Result};

pub type CMatrix = DMatrix<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

/// Numerical tolerances used by the dense-matrix checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Hermiticity, elementwise.
    pub symmetry: f64,
    /// `U U† = I`, max-norm.
    pub unitarity: f64,
    /// Reconstruction after a decomposition round trip, max-norm.
    pub round_trip: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        TOL
    }
}

pub const TOL: Tolerances = Tolerances {
    symmetry: 1e-12,
    unitarity: 1e-10,
    round_trip: 1e-9,
};

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn pauli_x() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
}

pub fn pauli_y() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO])
}

pub fn pauli_z() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE])
}

/// `σ_0 … σ_3` = (I, X, Y, Z).
pub fn pauli(index: usize) -> CMatrix {
    match index {
        0 => identity(2),
        1 => pauli_x(),
        2 => pauli_y(),
        3 => pauli_z(),
        _ => panic!("pauli index {index} out of range"),
    }
}

pub fn dagger(m: &CMatrix) -> CMatrix {
    m.adjoint()
}

/// Largest absolute entry.
pub fn max_norm(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn max_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape(), "shape mismatch in max_diff");
    a.iter()
        .zip(b.iter())
        .fold(0.0, |acc, (x, y)| acc.max((x - y).norm()))
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

pub fn trace(m: &CMatrix) -> Complex64 {
    m.diagonal().iter().sum()
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Kronecker product of a list of factors, left to right.
pub fn kron_all<'a>(factors: impl IntoIterator<Item = &'a CMatrix>) -> CMatrix {
    factors
        .into_iter()
        .fold(identity(1), |acc, f| kron(&acc, f))
}

/// Conjugate `U A U†`.
pub fn conjugate(u: &CMatrix, a: &CMatrix) -> CMatrix {
    u * a * u.adjoint()
}

/// Trace out the second factor of a `d1·d2` square matrix.
pub fn partial_trace_second(m: &CMatrix, d1: usize, d2: usize) -> CMatrix {
    assert_eq!(m.nrows(), d1 * d2);
    CMatrix::from_fn(d1, d1, |a, b| {
        (0..d2).map(|k| m[(a * d2 + k, b * d2 + k)]).sum()
    })
}

/// Trace out the first factor of a `d1·d2` square matrix.
pub fn partial_trace_first(m: &CMatrix, d1: usize, d2: usize) -> CMatrix {
    assert_eq!(m.nrows(), d1 * d2);
    CMatrix::from_fn(d2, d2, |a, b| {
        (0..d1).map(|k| m[(k * d2 + a, k * d2 + b)]).sum()
    })
}

fn check_square(m: &CMatrix, what: &str) -> Result<()> {
    if m.nrows() == 0 || m.nrows() != m.ncols() {
        return Err(validation(format!(
            "{what} must be square and non-empty, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(validation(format!("{what} has non-finite entries")));
    }
    Ok(())
}

/// A square matrix equal to its conjugate transpose.
#[derive(Debug, Clone, PartialEq)]
pub struct Hermitian(CMatrix);

impl Hermitian {
    pub fn new(m: CMatrix) -> Result<Self> {
        check_square(&m, "Hermitian matrix")?;
        let asym = max_diff(&m, &m.adjoint());
        if asym > TOL.symmetry * (1.0 + max_norm(&m)) {
            return Err(validation(format!(
                "matrix is not Hermitian (max |H - H†| = {asym:e})"
            )));
        }
        Ok(Self(m))
    }

    /// Symmetrize `(m + m†)/2` without checking.
    pub fn hermitize(m: &CMatrix) -> Self {
        Self((m + m.adjoint()).scale(0.5))
    }

    pub fn zeros(n: usize) -> Self {
        Self(CMatrix::zeros(n, n))
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

    /// Real eigenvalues (ascending) and orthonormal eigenvectors as columns.
    pub fn eigh(&self) -> (Vec<f64>, CMatrix) {
        let eig = nalgebra::SymmetricEigen::new(self.0.clone());
        let mut order: Vec<usize> = (0..self.dim()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let vectors = CMatrix::from_fn(self.dim(), self.dim(), |r, col| {
            eig.eigenvectors[(r, order[col])]
        });
        (values, vectors)
    }

    pub fn spectrum(&self) -> Spectrum {
        let (values, vectors) = self.eigh();
        Spectrum { values, vectors }
    }
}

/// Cached eigendecomposition of a Hermitian matrix, for evaluating
/// `exp(-i H t)` at many times.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl Spectrum {
    pub fn propagator(&self, t: f64) -> Unitary {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for (col, &e) in self.values.iter().enumerate() {
            let phase = Complex64::from_polar(1.0, -e * t);
            for r in 0..n {
                scaled[(r, col)] *= phase;
            }
        }
        Unitary(scaled * self.vectors.adjoint())
    }
}

/// A square matrix with `U U† = I`.
#[derive(Debug, Clone, PartialEq)]
pub struct Unitary(CMatrix);

impl Unitary {
    pub fn new(m: CMatrix) -> Result<Self> {
        check_square(&m, "unitary matrix")?;
        let n = m.nrows();
        let defect = max_diff(&(&m * m.adjoint()), &identity(n));
        if defect > TOL.unitarity {
            return Err(validation(format!(
                "matrix is not unitary (max |UU† - I| = {defect:e})"
            )));
        }
        Ok(Self(m))
    }

    pub fn identity(n: usize) -> Self {
        Self(identity(n))
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

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    /// Product of two unitaries of equal dimension.
    pub fn then(&self, next: &Unitary) -> Unitary {
        Unitary(&next.0 * &self.0)
    }
}

/// `exp(-i h t)` via eigendecomposition.
pub fn expm_hermitian(h: &Hermitian, t: f64) -> Unitary {
    h.spectrum().propagator(t)
}

/// Ordered product `∏ exp(-i H(t_k) Δt)` with midpoint sampling.
pub fn time_ordered_exp<F>(h_of_t: F, t: f64, steps: usize) -> Result<Unitary>
where
    F: Fn(f64) -> Result<Hermitian>,
{
    if steps == 0 {
        return Err(validation(
            "time-ordered exponential needs at least one step",
        ));
    }
    let dt = t / steps as f64;
    let first = h_of_t(0.5 * dt)?;
    let mut acc = expm_hermitian(&first, dt).into_inner();
    for k in 1..steps {
        let h = h_of_t((k as f64 + 0.5) * dt)?;
        acc = expm_hermitian(&h, dt).matrix() * acc;
    }
    Ok(Unitary(acc))
}

/// Draw an `n × n` unitary from the Haar measure on SU(n).
pub fn haar_random_unitary(n: usize, seed: u64) -> Result<Unitary> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    haar_unitary_with(n, &mut rng)
}

/// Haar sampling from a caller-supplied generator.
///
/// QR of a complex Ginibre matrix, with the phases of `diag(R)` moved into `Q`
/// so the result is Haar on U(n), then the determinant phase divided out
/// (principal `n`-th root) to land in SU(n).
pub fn haar_unitary_with<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Unitary> {
    if n == 0 {
        return Err(validation("Haar sampling needs dimension n >= 1"));
    }
    let g = CMatrix::from_fn(n, n, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c(re, im) * std::f64::consts::FRAC_1_SQRT_2
    });
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for col in 0..n {
        let d = r[(col, col)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { ONE };
        for row in 0..n {
            q[(row, col)] *= phase;
        }
    }
    let det = q.determinant();
    let correction = Complex64::from_polar(1.0, -det.arg() / n as f64);
    q *= correction;
    Ok(Unitary(q))
}

fn wrap_phase(d: f64) -> f64 {
    // map into (-π, π]; values within round-off of -π go to +π
    let mut x = d.rem_euclid(2.0 * PI);
    if x > PI {
        x -= 2.0 * PI;
    }
    if x <= -PI + 1e-12 {
        x += 2.0 * PI;
    }
    if (x - PI).abs() < 1e-12 {
        x = PI;
    }
    x
}

/// Spectral decomposition `u = Σ_j e^{-i d_j} |j⟩⟨j|` with `d_j ∈ (-π, π]`.
///
/// Returns the phases and the eigenvectors as columns.
pub fn eigenphases(u: &Unitary) -> Result<(Vec<f64>, CMatrix)> {
    let n = u.dim();
    if let Some((phases, vecs)) = schur_phases(u) {
        return Ok((phases, vecs));
    }
    // Near-degenerate spectra can leave the Schur factor with residual
    // off-diagonal mass; fall back to diagonalizing a generic Hermitian
    // combination of the (commuting) real and imaginary parts.
    let m = u.matrix();
    let herm = (m + m.adjoint()).scale(0.5);
    let skew = (m - m.adjoint()) * c(0.0, -0.5);
    let (cs, sn) = (0.577_215_664_9_f64.cos(), 0.577_215_664_9_f64.sin());
    let mix = Hermitian::hermitize(&(herm * c(cs, 0.0) + skew * c(sn, 0.0)));
    let (_, vecs) = mix.eigh();
    let diag = vecs.adjoint() * m * &vecs;
    let phases: Vec<f64> = (0..n).map(|j| wrap_phase(-diag[(j, j)].arg())).collect();
    let rebuilt = rebuild(&phases, &vecs);
    let err = max_diff(&rebuilt, m);
    if err > TOL.unitarity {
        return Err(Error::Numerical(format!(
            "eigenphase decomposition failed to converge (reconstruction error {err:e})"
        )));
    }
    Ok((phases, vecs))
}

fn schur_phases(u: &Unitary) -> Option<(Vec<f64>, CMatrix)> {
    let n = u.dim();
    let schur = nalgebra::Schur::try_new(u.matrix().clone(), 1e-15, 10_000)?;
    let (q, t) = schur.unpack();
    let phases: Vec<f64> = (0..n).map(|j| wrap_phase(-t[(j, j)].arg())).collect();
    let rebuilt = rebuild(&phases, &q);
    if max_diff(&rebuilt, u.matrix()) > TOL.unitarity {
        return None;
    }
    Some((phases, q))
}

fn rebuild(phases: &[f64], vecs: &CMatrix) -> CMatrix {
    let mut scaled = vecs.clone();
    for (col, &d) in phases.iter().enumerate() {
        let z = Complex64::from_polar(1.0, -d);
        for r in 0..vecs.nrows() {
            scaled[(r, col)] *= z;
        }
    }
    scaled * vecs.adjoint()
}

/// The Hermitian generator `H_U = Σ_j d_j |j⟩⟨j|` with `exp(-i H_U) = u`.
pub fn log_unitary(u: &Unitary) -> Result<Hermitian> {
    let (phases, vecs) = eigenphases(u)?;
    Ok(Hermitian::hermitize(&spectral_sum(&phases, &vecs)))
}

/// Eigen-decomposed generator of a unitary, kept in spectral form so that
/// `exp(-i H_U t)` is cheap to evaluate at many `t`.
pub fn unitary_generator(u: &Unitary) -> Result<Spectrum> {
    let (values, vectors) = eigenphases(u)?;
    Ok(Spectrum { values, vectors })
}

fn spectral_sum(values: &[f64], vecs: &CMatrix) -> CMatrix {
    let mut scaled = vecs.clone();
    for (col, &v) in values.iter().enumerate() {
        for r in 0..vecs.nrows() {
            scaled[(r, col)] *= v;
        }
    }
    scaled * vecs.adjoint()
}

/// Trace distance `½‖a − b‖₁` of two Hermitian matrices.
pub fn trace_distance(a: &CMatrix, b: &CMatrix) -> f64 {
    let diff = Hermitian::hermitize(&(a - b));
    let (vals, _) = diff.eigh();
    0.5 * vals.iter().map(|v| v.abs()).sum::<f64>()
}

/// Random Hermitian matrix with i.i.d. Gaussian entries (GUE-like), scaled by `scale`.
pub fn random_hermitian<R: Rng + ?Sized>(n: usize, scale: f64, rng: &mut R) -> Hermitian {
    let g = CMatrix::from_fn(n, n, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c(re, im)
    });
    Hermitian::hermitize(&((&g + g.adjoint()) * c(0.5 * scale, 0.0)))
}

/// Orthonormal generalized Gell-Mann basis of traceless Hermitian `n × n`
/// matrices, normalized to `Tr(λ_a λ_b) = 2 δ_ab`. For `n = 2` these are
/// the Pauli matrices X, Y, Z.
pub fn gell_mann_basis(n: usize) -> Vec<CMatrix> {
    let mut basis = Vec::with_capacity(n * n - 1);
    for j in 0..n {
        for k in (j + 1)..n {
            let mut sym = CMatrix::zeros(n, n);
            sym[(j, k)] = ONE;
            sym[(k, j)] = ONE;
            basis.push(sym);
            let mut asym = CMatrix::zeros(n, n);
            asym[(j, k)] = -I;
            asym[(k, j)] = I;
            basis.push(asym);
        }
    }
    for l in 1..n {
        let norm = (2.0 / (l * (l + 1)) as f64).sqrt();
        let mut d = CMatrix::zeros(n, n);
        for m in 0..l {
            d[(m, m)] = c(norm, 0.0);
        }
        d[(l, l)] = c(-(l as f64) * norm, 0.0);
        basis.push(d);
    }
    if n == 2 {
        // conventional ordering X, Y, Z
        return vec![basis[0].clone(), basis[1].clone(), basis[2].clone()];
    }
    basis
}
