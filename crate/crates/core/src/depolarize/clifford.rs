use std::collections::hash_map::Entry;
use std::collections::{HashMap, VecDeque};

use num_complex::Complex64;

use crate::bloch::DensityMatrix;
use crate::error::{validation, Error, Result};
use crate::linalg::{self, c, kron, max_diff, CMatrix, Unitary};

/// Clifford group modulo global phase. Each element is stored as its
/// determinant-one representative whose first significant entry has phase in
/// `(−π/N, π/N]`.
#[derive(Debug, Clone)]
pub struct CliffordTable {
    n: usize,
    elements: Vec<Unitary>,
}

fn hadamard() -> CMatrix {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    CMatrix::from_row_slice(2, 2, &[c(h, 0.0), c(h, 0.0), c(h, 0.0), c(-h, 0.0)])
}

fn phase_gate() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 1.0)])
}

fn cnot() -> CMatrix {
    let mut m = CMatrix::zeros(4, 4);
    m[(0, 0)] = c(1.0, 0.0);
    m[(1, 1)] = c(1.0, 0.0);
    m[(2, 3)] = c(1.0, 0.0);
    m[(3, 2)] = c(1.0, 0.0);
    m
}

/// Determinant-one representative with a canonical choice among the `N`
/// central phases.
pub(crate) fn canonical(m: &CMatrix) -> CMatrix {
    let n = m.nrows();
    let det = m.determinant();
    let mut u = m * Complex64::from_polar(1.0, -det.arg() / n as f64);
    let lead = u
        .iter()
        .find(|z| z.norm() > 1e-6)
        .copied()
        .unwrap_or(c(1.0, 0.0));
    let step = 2.0 * std::f64::consts::PI / n as f64;
    // Rotate by e^{2πik/N} so the leading phase lands in (−π/N, π/N].
    let k = (-lead.arg() / step).round();
    let mut rot = Complex64::from_polar(1.0, k * step);
    if (lead * rot).arg() <= -std::f64::consts::PI / n as f64 + 1e-9 {
        rot *= Complex64::from_polar(1.0, step);
    }
    u *= rot;
    u
}

/// Hash key for a matrix modulo global phase.
fn key(m: &CMatrix) -> Vec<i64> {
    let lead = m
        .iter()
        .find(|z| z.norm() > 1e-6)
        .copied()
        .unwrap_or(c(1.0, 0.0));
    let f = lead.conj() / lead.norm();
    m.iter()
        .flat_map(|z| {
            let w = z * f;
            [(w.re * 1e8).round() as i64, (w.im * 1e8).round() as i64]
        })
        .collect()
}

impl CliffordTable {
    /// Closure of the generators under multiplication. `n = 1` uses `{H, S}`,
    /// `n = 2` adds CNOT to the single-qubit gates on each wire.
    pub fn generate(n: usize) -> Result<Self> {
        let gens: Vec<CMatrix> = match n {
            1 => vec![hadamard(), phase_gate()],
            2 => {
                let id = linalg::identity(2);
                vec![
                    kron(&hadamard(), &id),
                    kron(&id, &hadamard()),
                    kron(&phase_gate(), &id),
                    kron(&id, &phase_gate()),
                    cnot(),
                ]
            }
            _ => {
                return Err(Error::Capability(format!(
                    "Clifford tables are available for 1 or 2 qubits, got {n}"
                )))
            }
        };
        let dim = 1 << n;
        let start = linalg::identity(dim);
        let mut seen: HashMap<Vec<i64>, usize> = HashMap::new();
        let mut elements = vec![start.clone()];
        seen.insert(key(&start), 0);
        let mut queue = VecDeque::from([0usize]);
        while let Some(i) = queue.pop_front() {
            for g in &gens {
                let next = g * &elements[i];
                if let Entry::Vacant(slot) = seen.entry(key(&next)) {
                    slot.insert(elements.len());
                    queue.push_back(elements.len());
                    elements.push(next);
                }
            }
        }
        let elements = elements
            .iter()
            .map(|m| Unitary::new(canonical(m)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { n, elements })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[Unitary] {
        &self.elements
    }

    /// Whether `u` equals a table element up to global phase.
    pub fn contains(&self, u: &CMatrix) -> bool {
        let k = key(u);
        self.elements.iter().any(|e| key(e.matrix()) == k)
    }

    /// Every element conjugates each Pauli string to ± a Pauli string.
    pub fn normalizes_paulis(&self) -> bool {
        let paulis: Vec<CMatrix> = (0..1usize << (2 * self.n))
            .map(|idx| {
                let factors: Vec<CMatrix> = (0..self.n)
                    .map(|q| linalg::pauli((idx >> (2 * q)) & 3))
                    .collect();
                linalg::kron_all(&factors)
            })
            .collect();
        self.elements.iter().all(|u| {
            paulis.iter().all(|p| {
                let img = linalg::conjugate(u.matrix(), p);
                paulis.iter().any(|q| {
                    max_diff(&img, q) < 1e-10 || max_diff(&img, &(q * c(-1.0, 0.0))) < 1e-10
                })
            })
        })
    }
}

/// `(1/|C|) Σ_C C ρ C†`.
pub fn clifford_average(rho0: &DensityMatrix, table: &CliffordTable) -> Result<DensityMatrix> {
    if rho0.dim() != table.dim() {
        return Err(validation("state and Clifford table dimensions differ"));
    }
    let n = rho0.dim();
    let sum = table.elements.iter().fold(CMatrix::zeros(n, n), |acc, u| {
        acc + linalg::conjugate(u.matrix(), rho0.matrix())
    });
    DensityMatrix::from_evolved(sum / c(table.len() as f64, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bloch::{bloch_to_density, BlochVector};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_qubit_table() {
        let t = CliffordTable::generate(1).unwrap();
        assert_eq!(t.len(), 24);
        assert!(t.contains(&linalg::identity(2)));
        assert!(t.normalizes_paulis());
        for u in t.elements() {
            assert!((u.matrix().determinant() - c(1.0, 0.0)).norm() < 1e-12);
        }
        // Closed under products.
        for a in t.elements() {
            for b in t.elements().iter().step_by(5) {
                assert!(t.contains(&(a.matrix() * b.matrix())));
            }
        }
    }

    #[test]
    fn two_qubit_table() {
        let t = CliffordTable::generate(2).unwrap();
        assert_eq!(t.len(), 11520);
        assert!(CliffordTable::generate(3).is_err());
    }

    #[test]
    fn averages_to_maximally_mixed() {
        let t = CliffordTable::generate(1).unwrap();
        let mixed = DensityMatrix::maximally_mixed(2);
        let cases = [
            mixed.clone(),
            DensityMatrix::basis_state(2, 0),
            bloch_to_density(&BlochVector::new(0.3, 0.0, 0.4).unwrap()).unwrap(),
        ];
        for rho in &cases {
            let avg = clifford_average(rho, &t).unwrap();
            assert!(max_diff(avg.matrix(), mixed.matrix()) < 1e-15);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let rho = DensityMatrix::random(2, &mut rng);
        assert!(clifford_average(&rho, &t).unwrap().trace_distance(&mixed) < 1e-12);
        assert!(clifford_average(&DensityMatrix::maximally_mixed(3), &t).is_err());
    }
}
