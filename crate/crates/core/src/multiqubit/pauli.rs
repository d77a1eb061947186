//! Pauli strings in symplectic form and partitions into commuting sets.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{validation, Error, Result};
use crate::linalg::{self, kron_all, CMatrix};

/// Largest qubit count for the exhaustive partition search.
pub const MAX_PARTITION_QUBITS: usize = 3;

/// Tensor product of single-qubit Paulis, stored as bit masks: qubit `k`
/// carries `X` if bit `k` of `x` is set, `Z` if bit `k` of `z` is set, `Y` if both.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString {
    n: usize,
    x: u32,
    z: u32,
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        Self { n, x: 0, z: 0 }
    }

    /// Letters `0..4` = `I, X, Y, Z`, qubit 0 first.
    pub fn from_letters(letters: &[u8]) -> Result<Self> {
        if letters.len() > 32 {
            return Err(validation("Pauli strings are limited to 32 qubits"));
        }
        let (mut x, mut z) = (0u32, 0u32);
        for (k, &l) in letters.iter().enumerate() {
            match l {
                0 => {}
                1 => x |= 1 << k,
                2 => {
                    x |= 1 << k;
                    z |= 1 << k;
                }
                3 => z |= 1 << k,
                _ => return Err(validation(format!("Pauli letter {l} out of range"))),
            }
        }
        Ok(Self {
            n: letters.len(),
            x,
            z,
        })
    }

    fn from_index(n: usize, v: usize) -> Self {
        let mask = (1u32 << n) - 1;
        Self {
            n,
            x: v as u32 & mask,
            z: (v >> n) as u32 & mask,
        }
    }

    fn index(&self) -> usize {
        self.x as usize | (self.z as usize) << self.n
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn letter(&self, k: usize) -> u8 {
        match ((self.x >> k) & 1, (self.z >> k) & 1) {
            (0, 0) => 0,
            (1, 0) => 1,
            (1, 1) => 2,
            _ => 3,
        }
    }

    pub fn letters(&self) -> Vec<u8> {
        (0..self.n).map(|k| self.letter(k)).collect()
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    pub fn matrix(&self) -> CMatrix {
        let factors: Vec<CMatrix> = (0..self.n)
            .map(|k| linalg::pauli(self.letter(k) as usize))
            .collect();
        if factors.is_empty() {
            return linalg::identity(1);
        }
        kron_all(&factors)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for k in 0..self.n {
            f.write_str(["I", "X", "Y", "Z"][self.letter(k) as usize])?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let letters: Vec<u8> = s
            .chars()
            .map(|ch| match ch.to_ascii_uppercase() {
                'I' | '0' => Ok(0),
                'X' => Ok(1),
                'Y' => Ok(2),
                'Z' => Ok(3),
                other => Err(validation(format!("bad Pauli letter {other:?} in {s:?}"))),
            })
            .collect::<Result<_>>()?;
        Self::from_letters(&letters)
    }
}

impl Serialize for PauliString {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PauliString {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Symplectic commutation test.
pub fn pauli_commutes(a: &PauliString, b: &PauliString) -> Result<bool> {
    if a.n != b.n {
        return Err(validation(format!(
            "Pauli strings on {} and {} qubits",
            a.n, b.n
        )));
    }
    Ok(symplectic(a.index(), b.index(), a.n) == 0)
}

fn symplectic(u: usize, v: usize, n: usize) -> u32 {
    let mask = (1usize << n) - 1;
    let (ux, uz, vx, vz) = (u & mask, u >> n, v & mask, v >> n);
    ((ux & vz) ^ (uz & vx)).count_ones() & 1
}

/// `2ⁿ − 1` pairwise commuting, non-identity Pauli strings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommutingSet {
    n: usize,
    members: Vec<PauliString>,
}

impl CommutingSet {
    pub fn new(members: Vec<PauliString>) -> Result<Self> {
        let n = members
            .first()
            .map(|p| p.n)
            .ok_or_else(|| validation("empty commuting set"))?;
        if n == 0 || n > 16 {
            return Err(validation(format!(
                "commuting sets need 1 to 16 qubits, got {n}"
            )));
        }
        if members.len() != (1 << n) - 1 {
            return Err(validation(format!(
                "a maximal commuting set on {n} qubits has {} members, got {}",
                (1 << n) - 1,
                members.len()
            )));
        }
        for (i, a) in members.iter().enumerate() {
            if a.is_identity() {
                return Err(validation("commuting set contains the identity"));
            }
            for b in &members[..i] {
                if a == b {
                    return Err(validation(format!("{a} appears twice")));
                }
                if !pauli_commutes(a, b)? {
                    return Err(validation(format!("{a} and {b} do not commute")));
                }
            }
        }
        Ok(Self { n, members })
    }

    pub fn parse(strings: &[&str]) -> Result<Self> {
        Self::new(strings.iter().map(|s| s.parse()).collect::<Result<_>>()?)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn members(&self) -> &[PauliString] {
        &self.members
    }

    pub fn contains(&self, p: &PauliString) -> bool {
        self.members.contains(p)
    }

    fn mask(&self) -> u64 {
        self.members.iter().fold(0, |m, p| m | 1 << p.index())
    }

    fn from_mask(n: usize, mask: u64) -> Self {
        let members = (1..1usize << (2 * n))
            .filter(|v| mask >> v & 1 == 1)
            .map(|v| PauliString::from_index(n, v))
            .collect();
        Self { n, members }
    }
}

/// All maximal isotropic subspaces of `F₂^{2n}`, as bit sets over Pauli
/// indices with the identity removed.
fn lagrangian_subspaces(n: usize) -> Vec<u64> {
    let total = 1usize << (2 * n);
    let mut found = Vec::new();
    let mut seen = std::collections::HashSet::new();
    fn span_add(span: &[usize], v: usize) -> Vec<usize> {
        let mut out = span.to_vec();
        out.extend(span.iter().map(|s| s ^ v));
        out
    }
    fn grow(
        span: Vec<usize>,
        dim: usize,
        n: usize,
        total: usize,
        seen: &mut std::collections::HashSet<u64>,
        found: &mut Vec<u64>,
    ) {
        let mask: u64 = span.iter().filter(|&&v| v != 0).fold(0, |m, &v| m | 1 << v);
        if !seen.insert(mask) {
            return;
        }
        if dim == n {
            found.push(mask);
            return;
        }
        for v in 1..total {
            if mask >> v & 1 == 1 {
                continue;
            }
            if span.iter().all(|&s| symplectic(s, v, n) == 0) {
                grow(span_add(&span, v), dim + 1, n, total, seen, found);
            }
        }
    }
    grow(vec![0], 0, n, total, &mut seen, &mut found);
    found.sort_unstable();
    found
}

fn exact_cover(subspaces: &[u64], full: u64, covered: u64, chosen: &mut Vec<u64>) -> bool {
    if covered == full {
        return true;
    }
    let first = (!covered & full).trailing_zeros();
    for &s in subspaces {
        if s >> first & 1 == 1 && s & covered == 0 {
            chosen.push(s);
            if exact_cover(subspaces, full, covered | s, chosen) {
                return true;
            }
            chosen.pop();
        }
    }
    false
}

/// Partition the `4ⁿ − 1` non-identity strings into `2ⁿ + 1` commuting sets,
/// starting from the all-`Z` set.
pub fn partition_commuting_sets(n: usize) -> Result<Vec<CommutingSet>> {
    if n == 0 {
        return Err(validation("need at least one qubit"));
    }
    let z_set: Vec<PauliString> = (1u32..1 << n).map(|z| PauliString { n, x: 0, z }).collect();
    partition_containing(n, &CommutingSet::new(z_set)?)
}

/// A partition that includes `seed` as one of its sets.
pub fn partition_containing(n: usize, seed: &CommutingSet) -> Result<Vec<CommutingSet>> {
    if n == 0 || n > MAX_PARTITION_QUBITS {
        return Err(Error::Capability(format!(
            "commuting-set partition is implemented for 1 to {MAX_PARTITION_QUBITS} qubits, got {n}"
        )));
    }
    if seed.n != n {
        return Err(validation("seed set has the wrong qubit count"));
    }
    let subspaces = lagrangian_subspaces(n);
    let total = 1u32 << (2 * n);
    let full = if total == 64 {
        u64::MAX
    } else {
        (1u64 << total) - 1
    } & !1;
    let start = seed.mask();
    let mut chosen = vec![start];
    if !exact_cover(&subspaces, full, start, &mut chosen) {
        return Err(Error::Numerical(format!(
            "no commuting-set partition extends {:?}",
            seed.members
        )));
    }
    Ok(chosen
        .into_iter()
        .map(|m| CommutingSet::from_mask(n, m))
        .collect())
}
