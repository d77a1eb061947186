//! Dephasing diagonal in the joint eigenbasis of a commuting Pauli set, driven
//! by a single random amplitude `α`: `U_α(t) = exp(−iα diag θ(t))` and
//! `ρ_ij(t) = ρ_ij(0) p̃(θ_i − θ_j)`.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::pauli::{CommutingSet, PauliString};
use crate::bloch::DensityMatrix;
use crate::error::{validation, Error, Result};
use crate::linalg::{self, c, CMatrix, Hermitian, Unitary};
use crate::mc::{monte_carlo, Moments};

/// Eigenvalue slack for the positivity check after the elementwise product.
pub const POSITIVITY_TOL: f64 = 1e-8;
/// Antisymmetry tolerance on input `γ`.
pub const ANTISYMMETRY_TOL: f64 = 1e-12;
/// Transitivity tolerance.
pub const TRANSITIVITY_TOL: f64 = 1e-10;

/// Distribution of the noise amplitude `α`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AlphaDistribution {
    Gaussian {
        sigma: f64,
        #[serde(default)]
        mean: f64,
    },
    Uniform {
        a: f64,
        b: f64,
    },
    Discrete {
        points: Vec<f64>,
        weights: Vec<f64>,
    },
    /// Tabulated density, normalized by the trapezoid rule.
    Density {
        alpha: Vec<f64>,
        p: Vec<f64>,
    },
}

impl AlphaDistribution {
    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Gaussian { sigma, mean } => {
                if !(*sigma >= 0.0) || !mean.is_finite() {
                    return Err(validation("Gaussian needs σ ≥ 0 and a finite mean"));
                }
            }
            Self::Uniform { a, b } => {
                if !(b > a) || !a.is_finite() || !b.is_finite() {
                    return Err(validation("uniform distribution needs a < b"));
                }
            }
            Self::Discrete { points, weights } => {
                if points.is_empty() || points.len() != weights.len() {
                    return Err(validation(
                        "discrete distribution needs matching points and weights",
                    ));
                }
                if weights.iter().any(|w| !(*w >= 0.0)) {
                    return Err(validation("discrete weights must be non-negative"));
                }
                let total: f64 = weights.iter().sum();
                if (total - 1.0).abs() > 1e-12 {
                    return Err(validation(format!(
                        "discrete weights sum to {total}, not 1"
                    )));
                }
            }
            Self::Density { alpha, p } => {
                if alpha.len() < 2 || alpha.len() != p.len() {
                    return Err(validation(
                        "tabulated density needs matching α, p arrays of length ≥ 2",
                    ));
                }
                if alpha.windows(2).any(|w| !(w[1] > w[0])) || p.iter().any(|v| !(*v >= 0.0)) {
                    return Err(validation("tabulated density needs increasing α and p ≥ 0"));
                }
                if !(trapezoid(alpha, p) > 0.0) {
                    return Err(validation("tabulated density has zero mass"));
                }
            }
        }
        Ok(())
    }

    /// `p̃(x) = ∫ p(α) e^{−iαx} dα`.
    pub fn characteristic(&self, x: f64) -> Complex64 {
        match self {
            Self::Gaussian { sigma, mean } => {
                Complex64::from_polar((-0.5 * (sigma * x).powi(2)).exp(), -mean * x)
            }
            Self::Uniform { a, b } => {
                let (m, w) = (0.5 * (a + b), 0.5 * (b - a));
                let wx = w * x;
                let sinc = if wx.abs() < 1e-8 {
                    1.0 - wx * wx / 6.0
                } else {
                    wx.sin() / wx
                };
                Complex64::from_polar(sinc, -m * x)
            }
            Self::Discrete { points, weights } => points
                .iter()
                .zip(weights)
                .map(|(a, w)| Complex64::from_polar(*w, -a * x))
                .sum(),
            Self::Density { alpha, p } => {
                let norm = trapezoid(alpha, p);
                let f: Vec<Complex64> = alpha
                    .iter()
                    .zip(p)
                    .map(|(a, pv)| Complex64::from_polar(*pv, -a * x))
                    .collect();
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 1..alpha.len() {
                    acc += (f[k] + f[k - 1]) * (0.5 * (alpha[k] - alpha[k - 1]));
                }
                acc / norm
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Self::Gaussian { sigma, mean } => {
                Normal::new(*mean, *sigma).expect("validated σ").sample(rng)
            }
            Self::Uniform { a, b } => rng.random_range(*a..*b),
            Self::Discrete { points, weights } => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                for (p, w) in points.iter().zip(weights) {
                    acc += w;
                    if u < acc {
                        return *p;
                    }
                }
                *points.last().expect("non-empty")
            }
            Self::Density { alpha, p } => {
                // Inverse CDF of the piecewise-linear density.
                let total = trapezoid(alpha, p);
                let target = rng.random::<f64>() * total;
                let mut acc = 0.0;
                for k in 1..alpha.len() {
                    let h = alpha[k] - alpha[k - 1];
                    let mass = 0.5 * (p[k] + p[k - 1]) * h;
                    if acc + mass >= target && mass > 0.0 {
                        let need = target - acc;
                        let (p0, slope) = (p[k - 1], (p[k] - p[k - 1]) / h);
                        let dx = if slope.abs() < 1e-14 {
                            need / p0
                        } else {
                            (-p0 + (p0 * p0 + 2.0 * slope * need).max(0.0).sqrt()) / slope
                        };
                        return alpha[k - 1] + dx.clamp(0.0, h);
                    }
                    acc += mass;
                }
                alpha[alpha.len() - 1]
            }
        }
    }
}

fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2)
        .zip(y.windows(2))
        .map(|(xw, yw)| 0.5 * (yw[0] + yw[1]) * (xw[1] - xw[0]))
        .sum()
}

/// Antisymmetric matrix of differences `γ_ij = θ_i − θ_j`. Row-major, `N × N`.
pub fn gamma_matrix(theta: &[f64]) -> Vec<Vec<f64>> {
    theta
        .iter()
        .map(|ti| theta.iter().map(|tj| ti - tj).collect())
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransitivityReport {
    pub transitive: bool,
    pub worst_violation: f64,
}

/// `γ_ij = γ_ik + γ_kj` over all triples.
pub fn check_transitivity(gamma: &[Vec<f64>]) -> Result<TransitivityReport> {
    let n = gamma.len();
    if gamma.iter().any(|row| row.len() != n) {
        return Err(validation("γ must be square"));
    }
    for i in 0..n {
        for j in 0..n {
            let asym = (gamma[i][j] + gamma[j][i]).abs();
            if asym > ANTISYMMETRY_TOL {
                return Err(validation(format!(
                    "γ is not antisymmetric at ({i}, {j}): |γ_ij + γ_ji| = {asym:e}"
                )));
            }
        }
    }
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                worst = worst.max((gamma[i][j] - gamma[i][k] - gamma[k][j]).abs());
            }
        }
    }
    Ok(TransitivityReport {
        transitive: worst <= TRANSITIVITY_TOL,
        worst_violation: worst,
    })
}

/// Joint eigenbasis of commuting Hermitian matrices by recursive splitting of
/// common eigenspaces. Columns are phase-fixed so the largest entry is real
/// and positive.
pub fn joint_eigenbasis(ops: &[CMatrix]) -> Result<Unitary> {
    let dim = ops
        .first()
        .ok_or_else(|| validation("no operators"))?
        .nrows();
    let mut blocks: Vec<CMatrix> = vec![linalg::identity(dim)];
    for op in ops {
        let mut next = Vec::new();
        for q in blocks {
            if q.ncols() == 1 {
                next.push(q);
                continue;
            }
            let (vals, vecs) = Hermitian::hermitize(&(q.adjoint() * op * &q)).eigh();
            let rotated = &q * vecs;
            let mut start = 0;
            for k in 1..=vals.len() {
                if k == vals.len() || vals[k] - vals[start] > 1e-8 {
                    next.push(rotated.columns(start, k - start).into_owned());
                    start = k;
                }
            }
        }
        blocks = next;
    }
    let mut u = CMatrix::zeros(dim, dim);
    let mut col = 0;
    for q in &blocks {
        for j in 0..q.ncols() {
            let mut v = q.column(j).into_owned();
            let big = v.iter().copied().fold(Complex64::new(0.0, 0.0), |acc, z| {
                if z.norm() > acc.norm() + 1e-12 {
                    z
                } else {
                    acc
                }
            });
            v *= big.conj() / big.norm();
            u.set_column(col, &v);
            col += 1;
        }
    }
    Unitary::new(u)
}

/// The four Bell states `(|00⟩ ± |11⟩)/√2`, `(|01⟩ ± |10⟩)/√2` as columns.
pub fn bell_states() -> CMatrix {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut b = CMatrix::zeros(4, 4);
    b[(0, 0)] = c(h, 0.0);
    b[(3, 0)] = c(h, 0.0);
    b[(0, 1)] = c(h, 0.0);
    b[(3, 1)] = c(-h, 0.0);
    b[(1, 2)] = c(h, 0.0);
    b[(2, 2)] = c(h, 0.0);
    b[(1, 3)] = c(h, 0.0);
    b[(2, 3)] = c(-h, 0.0);
    b
}

/// True if every column of `basis` equals some Bell state up to phase.
pub fn spans_bell_states(basis: &Unitary) -> bool {
    let overlaps = bell_states().adjoint() * basis.matrix();
    (0..4).all(|j| (0..4).any(|i| (overlaps[(i, j)].norm() - 1.0).abs() < 1e-10))
}

/// Per-level phases `θ_i(t)` on a time grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaTable {
    pub grid: Vec<f64>,
    /// `values[k][i] = θ_i(grid[k])`.
    pub values: Vec<Vec<f64>>,
}

impl ThetaTable {
    /// `θ_i(t) = rate_i · t`.
    pub fn linear(rates: &[f64], grid: Vec<f64>) -> Self {
        let values = grid
            .iter()
            .map(|t| rates.iter().map(|r| r * t).collect())
            .collect();
        Self { grid, values }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BellBasisModel {
    set: CommutingSet,
    basis: Unitary,
    theta: ThetaTable,
    dist: AlphaDistribution,
}

impl BellBasisModel {
    pub fn new(set: CommutingSet, theta: ThetaTable, dist: AlphaDistribution) -> Result<Self> {
        dist.validate()?;
        let dim = 1usize << set.n();
        crate::dephasing::check_grid(&theta.grid)?;
        if theta.values.len() != theta.grid.len() || theta.values.iter().any(|v| v.len() != dim) {
            return Err(validation(format!(
                "θ table must have one row of {dim} phases per grid point"
            )));
        }
        let ops: Vec<CMatrix> = set.members().iter().map(PauliString::matrix).collect();
        let basis = joint_eigenbasis(&ops)?;
        for op in &ops {
            let d = basis.matrix().adjoint() * op * basis.matrix();
            let off = (0..dim)
                .flat_map(|i| (0..dim).map(move |j| (i, j)))
                .filter(|(i, j)| i != j)
                .fold(0.0_f64, |m, (i, j)| m.max(d[(i, j)].norm()));
            if off > 1e-10 {
                return Err(Error::Numerical(format!(
                    "joint basis leaves off-diagonal {off:e}"
                )));
            }
        }
        Ok(Self {
            set,
            basis,
            theta,
            dist,
        })
    }

    pub fn n(&self) -> usize {
        self.set.n()
    }

    pub fn dim(&self) -> usize {
        1 << self.set.n()
    }

    pub fn commuting_set(&self) -> &CommutingSet {
        &self.set
    }

    pub fn basis(&self) -> &Unitary {
        &self.basis
    }

    pub fn times(&self) -> &[f64] {
        &self.theta.grid
    }

    pub fn theta(&self, k: usize) -> &[f64] {
        &self.theta.values[k]
    }

    pub fn distribution(&self) -> &AlphaDistribution {
        &self.dist
    }

    fn index_of(&self, t: f64) -> Result<usize> {
        let grid = &self.theta.grid;
        grid.iter()
            .position(|g| (g - t).abs() <= 1e-12 * (1.0 + t.abs()))
            .ok_or(Error::Range {
                time: t,
                start: grid[0],
                end: grid[grid.len() - 1],
            })
    }

    /// `r_ij(t_k) = p̃(γ_ij(t_k))` at grid index `k`.
    pub fn r_matrix_at(&self, k: usize) -> CMatrix {
        let g = gamma_matrix(self.theta(k));
        let n = self.dim();
        CMatrix::from_fn(n, n, |i, j| {
            if i == j {
                c(1.0, 0.0)
            } else {
                self.dist.characteristic(g[i][j])
            }
        })
    }

    pub fn r_matrix(&self, t: f64) -> Result<CMatrix> {
        Ok(self.r_matrix_at(self.index_of(t)?))
    }

    /// `ρ(t) = ρ₀ ∘ r(t)` for `ρ₀` expressed in the model basis.
    pub fn evolve(&self, rho0: &DensityMatrix, t: f64) -> Result<DensityMatrix> {
        self.evolve_at(rho0, self.index_of(t)?)
    }

    pub fn evolve_at(&self, rho0: &DensityMatrix, k: usize) -> Result<DensityMatrix> {
        if rho0.dim() != self.dim() {
            return Err(validation("state and model dimensions differ"));
        }
        let r = self.r_matrix_at(k);
        let mut m = rho0.matrix().component_mul(&r);
        for i in 0..self.dim() {
            m[(i, i)] = rho0.matrix()[(i, i)];
        }
        let min = Hermitian::hermitize(&m).eigh().0[0];
        if min < -POSITIVITY_TOL {
            return Err(Error::Model(format!(
                "state lost positivity at t = {} (eigenvalue {min:e})",
                self.theta.grid[k]
            )));
        }
        DensityMatrix::from_evolved_with_slack(m, POSITIVITY_TOL)
    }

    /// Convert a computational-basis state into the model basis.
    pub fn to_model_basis(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        DensityMatrix::from_evolved(linalg::conjugate(
            &self.basis.matrix().adjoint(),
            rho.matrix(),
        ))
    }

    /// Monte Carlo estimate of `r(t_k)` for every grid index, reusing the same
    /// draws of `α` at all times. Components: `[k][i][j] → (re, im)`.
    pub fn monte_carlo_r(&self, seed: u64, samples: usize) -> McRMatrix {
        let n = self.dim();
        let nt = self.theta.grid.len();
        let per_t = 2 * n * n;
        let moments = monte_carlo(seed, samples, nt * per_t, |rng, out| {
            let alpha = self.dist.sample(rng);
            for k in 0..nt {
                let th = &self.theta.values[k];
                for i in 0..n {
                    for j in 0..n {
                        let z = Complex64::from_polar(1.0, -alpha * (th[i] - th[j]));
                        let base = k * per_t + 2 * (i * n + j);
                        out[base] = z.re;
                        out[base + 1] = z.im;
                    }
                }
            }
        });
        McRMatrix {
            n,
            times: self.theta.grid.clone(),
            moments,
        }
    }
}

/// Sample mean and standard errors of `r_ij(t)`.
#[derive(Debug, Clone)]
pub struct McRMatrix {
    n: usize,
    pub times: Vec<f64>,
    moments: Moments,
}

impl McRMatrix {
    pub fn samples(&self) -> usize {
        self.moments.n
    }

    pub fn mean(&self, k: usize) -> CMatrix {
        let m = self.moments.mean();
        let n = self.n;
        CMatrix::from_fn(n, n, |i, j| {
            let base = k * 2 * n * n + 2 * (i * n + j);
            c(m[base], m[base + 1])
        })
    }

    /// `√(se_re² + se_im²)` per element.
    pub fn stderr(&self, k: usize) -> Vec<Vec<f64>> {
        let s = self.moments.stderr();
        let n = self.n;
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let base = k * 2 * n * n + 2 * (i * n + j);
                        s[base].hypot(s[base + 1])
                    })
                    .collect()
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn bell_model(dist: AlphaDistribution) -> BellBasisModel {
        let set = CommutingSet::parse(&["XX", "YY", "ZZ"]).unwrap();
        let grid: Vec<f64> = (0..11).map(|k| k as f64 * 0.2).collect();
        BellBasisModel::new(set, ThetaTable::linear(&[1.0, -1.0, 2.0, 0.0], grid), dist).unwrap()
    }

    #[test]
    fn characteristic_functions() {
        let dists = [
            AlphaDistribution::Gaussian {
                sigma: 0.7,
                mean: 0.3,
            },
            AlphaDistribution::Uniform { a: -1.0, b: 2.0 },
            AlphaDistribution::Discrete {
                points: vec![-1.0, 1.0],
                weights: vec![0.5, 0.5],
            },
        ];
        for d in &dists {
            assert!((d.characteristic(0.0) - c(1.0, 0.0)).norm() < 1e-15);
            for k in 0..50 {
                assert!(d.characteristic(k as f64 * 0.37 - 9.0).norm() <= 1.0 + 1e-15);
            }
        }
        let two_point = &dists[2];
        assert!((two_point.characteristic(0.9) - c(0.9f64.cos(), 0.0)).norm() < 1e-15);

        // Tabulated Gaussian density reproduces the closed form.
        let alpha: Vec<f64> = (0..=4000).map(|k| -10.0 + k as f64 * 0.005).collect();
        let p: Vec<f64> = alpha.iter().map(|a| (-0.5 * a * a).exp()).collect();
        let dens = AlphaDistribution::Density { alpha, p };
        let gauss = AlphaDistribution::Gaussian {
            sigma: 1.0,
            mean: 0.0,
        };
        for x in [0.0, 0.5, 1.7, 3.0] {
            assert!((dens.characteristic(x) - gauss.characteristic(x)).norm() < 1e-6);
        }
    }

    #[test]
    fn density_sampling_matches_mean() {
        let dens = AlphaDistribution::Density {
            alpha: vec![0.0, 1.0, 2.0],
            p: vec![0.0, 1.0, 0.0],
        };
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 20_000;
        let mean: f64 = (0..n).map(|_| dens.sample(&mut rng)).sum::<f64>() / n as f64;
        assert!((mean - 1.0).abs() < 0.02);
    }

    #[test]
    fn gamma_and_transitivity() {
        assert!(gamma_matrix(&[0.0; 4]).iter().flatten().all(|g| *g == 0.0));
        let g = gamma_matrix(&[1.0, 0.0, 0.0, 0.0]);
        assert!((1..4).all(|j| g[0][j] == 1.0 && g[j][0] == -1.0));
        assert!(check_transitivity(&g).unwrap().transitive);
        let mut bad = vec![vec![0.0; 3]; 3];
        bad[0][1] = 1.0;
        bad[1][2] = 1.0;
        bad[0][2] = 3.0;
        for (i, j) in [(0, 1), (1, 2), (0, 2)] {
            bad[j][i] = -bad[i][j];
        }
        let rep = check_transitivity(&bad).unwrap();
        assert!(!rep.transitive);
        assert!((rep.worst_violation - 1.0).abs() < 1e-15);
        let mut asym = vec![vec![0.0; 2]; 2];
        asym[0][1] = 1.0;
        assert!(check_transitivity(&asym).is_err());
    }

    #[test]
    fn bell_basis_from_xx_yy_zz() {
        let m = bell_model(AlphaDistribution::Gaussian {
            sigma: 1.0,
            mean: 0.0,
        });
        assert!(spans_bell_states(m.basis()));
    }

    #[test]
    fn evolution_properties() {
        let m = bell_model(AlphaDistribution::Gaussian {
            sigma: 1.0,
            mean: 0.0,
        });
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let rho = DensityMatrix::random(4, &mut rng);
        assert_eq!(m.evolve(&rho, 0.0).unwrap(), rho);
        assert!(m
            .r_matrix(0.0)
            .unwrap()
            .iter()
            .all(|z| (z - c(1.0, 0.0)).norm() < 1e-15));
        for k in 0..m.times().len() {
            let out = m.evolve_at(&rho, k).unwrap();
            for i in 0..4 {
                assert_eq!(out.matrix()[(i, i)], rho.matrix()[(i, i)]);
            }
            let r = m.r_matrix_at(k);
            let g = gamma_matrix(m.theta(k));
            for i in 0..4 {
                for j in 0..4 {
                    assert!((r[(i, j)] - r[(j, i)].conj()).norm() < 1e-15);
                    assert!((r[(i, j)].re - (-0.5 * g[i][j] * g[i][j]).exp()).abs() < 1e-15);
                }
            }
        }
        assert!(matches!(m.evolve(&rho, 0.1), Err(Error::Range { .. })));
    }

    #[test]
    fn positivity_failure_is_model_error() {
        let set = CommutingSet::parse(&["Z"]).unwrap();
        let theta = ThetaTable {
            grid: vec![0.0, 1.0],
            values: vec![vec![0.0, 0.0], vec![0.0, 1.0]],
        };
        let two_point = AlphaDistribution::Discrete {
            points: vec![0.0, 1.0],
            weights: vec![0.5, 0.5],
        };
        let mut m = BellBasisModel::new(set, theta, two_point).unwrap();
        let plus = DensityMatrix::pure(&[c(1.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert!(m.evolve_at(&plus, 1).is_ok());
        // Signed weights give |p̃| > 1, which no probability density can.
        m.dist = AlphaDistribution::Discrete {
            points: vec![0.0, 1.0],
            weights: vec![1.5, -0.5],
        };
        assert!(matches!(m.evolve_at(&plus, 1), Err(Error::Model(_))));
    }

    #[test]
    fn monte_carlo_agrees() {
        let m = bell_model(AlphaDistribution::Uniform { a: -1.0, b: 1.0 });
        let mc = m.monte_carlo_r(3, 20_000);
        for k in 0..m.times().len() {
            let mean = mc.mean(k);
            let se = mc.stderr(k);
            let r = m.r_matrix_at(k);
            for i in 0..4 {
                for j in 0..4 {
                    assert!((mean[(i, j)] - r[(i, j)]).norm() <= 4.0 * se[i][j] + 1e-12);
                }
            }
        }
    }
}
