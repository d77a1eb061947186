use rand::Rng;
use rand_distr::StandardNormal;

use super::synthesis::FieldPair;
use crate::bloch::DensityMatrix;
use crate::error::{validation, Error, Result};
use crate::linalg::{self, c, max_diff, partial_trace_second, CMatrix, Hermitian, Unitary};

/// Completeness tolerance `‖Σ M†M − I‖_max`.
pub const COMPLETENESS_TOL: f64 = 1e-10;

/// Operators `M_α` with `Σ_α M_α† M_α = I`.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausSet(Vec<CMatrix>);

impl KrausSet {
    pub fn new(ops: Vec<CMatrix>) -> Result<Self> {
        let first = ops.first().ok_or_else(|| validation("empty Kraus set"))?;
        let s = first.nrows();
        if ops.iter().any(|m| m.nrows() != s || m.ncols() != s) {
            return Err(validation(
                "Kraus operators must be square and share a dimension",
            ));
        }
        let sum = ops
            .iter()
            .fold(CMatrix::zeros(s, s), |acc, m| acc + m.adjoint() * m);
        let defect = max_diff(&sum, &linalg::identity(s));
        if defect > COMPLETENESS_TOL {
            return Err(validation(format!(
                "Kraus set is incomplete: |Σ M†M − I| = {defect:e}"
            )));
        }
        Ok(Self(ops))
    }

    /// `{√½ R₁, √½ R₂}` from the field pair at time `t`.
    pub fn from_fields(fields: &FieldPair, t: f64) -> Result<Self> {
        let (p1, p2) = super::classical::phases_at(fields, t, Default::default())?;
        let rot = |phi: f64| {
            let mut m = CMatrix::zeros(2, 2);
            m[(0, 0)] = c(0.0, -phi / 2.0).exp() * std::f64::consts::FRAC_1_SQRT_2;
            m[(1, 1)] = c(0.0, phi / 2.0).exp() * std::f64::consts::FRAC_1_SQRT_2;
            m
        };
        Self::new(vec![rot(p1), rot(p2)])
    }

    /// A random complete set, `M_α = G_α S^{−1/2}` with Ginibre `G_α`.
    pub fn random<R: Rng + ?Sized>(s: usize, d: usize, rng: &mut R) -> Result<Self> {
        if s == 0 || d == 0 {
            return Err(validation("Kraus set needs positive dimensions"));
        }
        let g: Vec<CMatrix> = (0..d)
            .map(|_| {
                CMatrix::from_fn(s, s, |_, _| {
                    c(rng.sample(StandardNormal), rng.sample(StandardNormal))
                })
            })
            .collect();
        let sum = g
            .iter()
            .fold(CMatrix::zeros(s, s), |acc, m| acc + m.adjoint() * m);
        let (vals, vecs) = Hermitian::hermitize(&sum).eigh();
        if vals[0] <= 1e-12 {
            return Err(Error::Numerical("singular Ginibre normalization".into()));
        }
        let inv_sqrt = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            s,
            vals.iter().map(|v| c(v.sqrt().recip(), 0.0)),
        ));
        let norm = &vecs * inv_sqrt * vecs.adjoint();
        Self::new(g.into_iter().map(|m| m * &norm).collect())
    }

    pub fn operators(&self) -> &[CMatrix] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn system_dim(&self) -> usize {
        self.0[0].nrows()
    }

    /// `Σ_α M_α ρ M_α†`.
    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.dim() != self.system_dim() {
            return Err(validation("state and Kraus dimensions differ"));
        }
        let s = self.system_dim();
        let out = self.0.iter().fold(CMatrix::zeros(s, s), |acc, m| {
            acc + m * rho.matrix() * m.adjoint()
        });
        DensityMatrix::from_evolved(out)
    }
}

/// Joint unitary on `S ⊗ B` (index `n·D + α`) with
/// `U(|n⟩ ⊗ |0⟩) = Σ_α M_α|n⟩ ⊗ |α⟩`; other columns by Gram–Schmidt.
pub fn dilation_build(kraus: &KrausSet) -> Result<Unitary> {
    let s = kraus.system_dim();
    let d = kraus.len();
    let n = s * d;
    let mut cols: Vec<nalgebra::DVector<num_complex::Complex64>> = Vec::with_capacity(n);
    for col in 0..s {
        let mut v = nalgebra::DVector::zeros(n);
        for (alpha, m) in kraus.operators().iter().enumerate() {
            for row in 0..s {
                v[row * d + alpha] = m[(row, col)];
            }
        }
        cols.push(v);
    }
    for e in 0..n {
        if cols.len() == n {
            break;
        }
        let mut v = nalgebra::DVector::zeros(n);
        v[e] = linalg::ONE;
        for _ in 0..2 {
            for q in &cols {
                let proj = q.dotc(&v);
                v -= q * proj;
            }
        }
        let norm = v.norm();
        if norm > 1e-6 {
            cols.push(v / c(norm, 0.0));
        }
    }
    if cols.len() != n {
        return Err(Error::Numerical(
            "Gram–Schmidt completion ran out of vectors".into(),
        ));
    }
    // Fixed columns go to positions n·D; the completion fills the rest in order.
    let mut u = CMatrix::zeros(n, n);
    let mut extra = cols[s..].iter();
    for j in 0..n {
        let v = if j % d == 0 {
            &cols[j / d]
        } else {
            extra.next().expect("column count")
        };
        u.set_column(j, v);
    }
    Unitary::new(u)
}

/// `Tr_B[U (ρ ⊗ |0⟩⟨0|) U†]` for a dilation with bath dimension `d`.
pub fn dilation_channel(u: &Unitary, rho: &DensityMatrix, d: usize) -> Result<DensityMatrix> {
    let s = rho.dim();
    if u.dim() != s * d {
        return Err(validation("dilation and state dimensions differ"));
    }
    let joint = linalg::kron(rho.matrix(), DensityMatrix::basis_state(d, 0).matrix());
    let evolved = u.matrix() * joint * u.matrix().adjoint();
    DensityMatrix::from_evolved(partial_trace_second(&evolved, s, d))
}
