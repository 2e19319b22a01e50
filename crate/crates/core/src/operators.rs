//! Pauli matrices and their Kronecker-product embedding into the
//! `2^n`-dimensional product space of `n` two-level sites.
//!
//! Basis convention: tensor slot 0 is the leftmost Kronecker factor and maps
//! to the most significant bit of the basis index. Bit value 0 is spin up
//! (σz eigenvalue +1), bit value 1 is spin down.

use std::fmt;
use std::ops::{Add, Mul};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest number of sites any many-body operator may span.
pub const MAX_SITES: usize = 12;

/// Dense square complex matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    entries: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            entries: vec![Complex64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    /// Builds a matrix from row-major entries; `entries.len()` must be a
    /// perfect square.
    pub fn from_row_major(entries: Vec<Complex64>) -> Result<Self> {
        let dim = (entries.len() as f64).sqrt().round() as usize;
        if dim * dim != entries.len() {
            return Err(Error::InvalidArgument(format!(
                "{} entries do not form a square matrix",
                entries.len()
            )));
        }
        Ok(Self { dim, entries })
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = Complex64::new(d, 0.0);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Row-major view of all entries.
    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.entries[i * self.dim..(i + 1) * self.dim]
    }

    pub fn diagonal(&self) -> Vec<Complex64> {
        (0..self.dim).map(|i| self[(i, i)]).collect()
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.dim)
            .all(|i| (0..self.dim).all(|j| i == j || self[(i, j)] == Complex64::new(0.0, 0.0)))
    }

    pub fn is_real(&self) -> bool {
        self.entries.iter().all(|z| z.im == 0.0)
    }

    /// `max |M - M†|` over all entries.
    pub fn hermitian_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.dim {
            for j in i..self.dim {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn conj_transpose(&self) -> Self {
        let mut out = Self::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            dim: self.dim,
            entries: self.entries.iter().map(|z| z * factor).collect(),
        }
    }

    /// `self += factor * other`.
    pub fn add_scaled(&mut self, factor: f64, other: &ComplexMatrix) {
        assert_eq!(self.dim, other.dim, "dimension mismatch in add_scaled");
        for (a, b) in self.entries.iter_mut().zip(&other.entries) {
            *a += b * factor;
        }
    }

    pub fn matmul(&self, other: &ComplexMatrix) -> Self {
        assert_eq!(self.dim, other.dim, "dimension mismatch in matmul");
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    out.entries[i * n + j] += a * other.entries[k * n + j];
                }
            }
        }
        out
    }

    /// `out = self * v`.
    pub fn apply(&self, v: &[Complex64], out: &mut [Complex64]) {
        assert_eq!(v.len(), self.dim);
        assert_eq!(out.len(), self.dim);
        for (i, o) in out.iter_mut().enumerate() {
            *o = self
                .row(i)
                .iter()
                .zip(v)
                .fold(Complex64::new(0.0, 0.0), |acc, (a, x)| acc + a * x);
        }
    }

    /// Largest entrywise distance to `other`.
    pub fn max_abs_diff(&self, other: &ComplexMatrix) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.entries[i * self.dim + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.entries[i * self.dim + j]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        let mut out = self.clone();
        out.add_scaled(1.0, rhs);
        out
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{})", self.dim, self.dim)?;
        for i in 0..self.dim {
            let row: Vec<String> = self
                .row(i)
                .iter()
                .map(|z| {
                    if z.im == 0.0 {
                        format!("{}", z.re)
                    } else {
                        format!("{}{:+}i", z.re, z.im)
                    }
                })
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pauli {
    X,
    Z,
    Identity,
}

pub fn pauli(kind: Pauli) -> ComplexMatrix {
    let (a, b, c, d) = match kind {
        Pauli::X => (0.0, 1.0, 1.0, 0.0),
        Pauli::Z => (1.0, 0.0, 0.0, -1.0),
        Pauli::Identity => (1.0, 0.0, 0.0, 1.0),
    };
    ComplexMatrix {
        dim: 2,
        entries: [a, b, c, d].map(|x| Complex64::new(x, 0.0)).to_vec(),
    }
}

/// Kronecker product `a ⊗ b`.
///
/// Fails when the result would exceed the dimension of a
/// [`MAX_SITES`]-site register.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    let dim = a
        .dim
        .checked_mul(b.dim)
        .filter(|&d| d <= 1 << MAX_SITES)
        .ok_or(Error::Capacity {
            what: "Kronecker product",
            sites: (a.dim as f64 * b.dim as f64).log2().ceil() as usize,
            max: MAX_SITES,
        })?;
    let mut out = ComplexMatrix::zeros(dim);
    for i in 0..a.dim {
        for j in 0..a.dim {
            let aij = a[(i, j)];
            if aij == Complex64::new(0.0, 0.0) {
                continue;
            }
            for k in 0..b.dim {
                for l in 0..b.dim {
                    out[(i * b.dim + k, j * b.dim + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    Ok(out)
}

fn check_sites(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "site count must be at least 1".into(),
        ));
    }
    if n > MAX_SITES {
        return Err(Error::Capacity {
            what: "many-body operator",
            sites: n,
            max: MAX_SITES,
        });
    }
    Ok(())
}

/// `I ⊗ … ⊗ op ⊗ … ⊗ I` with `op` (2x2) in tensor slot `site`.
pub fn embed(op: &ComplexMatrix, site: usize, n: usize) -> Result<ComplexMatrix> {
    check_sites(n)?;
    if site >= n {
        return Err(Error::SiteOutOfRange { site, n });
    }
    if op.dim != 2 {
        return Err(Error::InvalidArgument(format!(
            "single-site operator must be 2x2, got {}x{}",
            op.dim, op.dim
        )));
    }
    let id = pauli(Pauli::Identity);
    let mut acc = ComplexMatrix::identity(1);
    for slot in 0..n {
        acc = kron(&acc, if slot == site { op } else { &id })?;
    }
    Ok(acc)
}

/// `σz_i σz_j` on `n` sites.
pub fn two_site_zz(i: usize, j: usize, n: usize) -> Result<ComplexMatrix> {
    check_sites(n)?;
    for site in [i, j] {
        if site >= n {
            return Err(Error::SiteOutOfRange { site, n });
        }
    }
    if i == j {
        return Err(Error::InvalidArgument(format!(
            "two-site coupling needs distinct sites, got {i} twice"
        )));
    }
    let z = pauli(Pauli::Z);
    Ok(embed(&z, i, n)?.matmul(&embed(&z, j, n)?))
}

/// σz eigenvalue of tensor slot `site` in basis state `index` of an
/// `n`-site register: +1 for a 0 bit, −1 for a 1 bit.
#[inline]
pub fn spin_of(index: usize, site: usize, n: usize) -> f64 {
    if (index >> (n - 1 - site)) & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn real_diag(m: &ComplexMatrix) -> Vec<f64> {
        assert!(m.is_diagonal());
        m.diagonal().iter().map(|z| z.re).collect()
    }

    #[test]
    fn pauli_matrices() {
        assert_eq!(real_diag(&pauli(Pauli::Z)), vec![1.0, -1.0]);
        assert_eq!(real_diag(&pauli(Pauli::Identity)), vec![1.0, 1.0]);
        let x = pauli(Pauli::X);
        assert_eq!(x[(0, 1)].re, 1.0);
        assert_eq!(x[(1, 0)].re, 1.0);
        assert_eq!(x[(0, 0)].re, 0.0);
        assert_eq!(x[(1, 1)].re, 0.0);
    }

    #[test]
    fn kron_examples() {
        let id = pauli(Pauli::Identity);
        let z = pauli(Pauli::Z);
        assert_eq!(kron(&id, &id).unwrap(), ComplexMatrix::identity(4));
        assert_eq!(
            real_diag(&kron(&z, &z).unwrap()),
            vec![1.0, -1.0, -1.0, 1.0]
        );
        assert_eq!(
            real_diag(&kron(&z, &id).unwrap()),
            vec![1.0, 1.0, -1.0, -1.0]
        );
    }

    #[test]
    fn kron_index_formula() {
        let x = pauli(Pauli::X);
        let z = pauli(Pauli::Z);
        let k = kron(&x, &z).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                for a in 0..2 {
                    for b in 0..2 {
                        assert_eq!(k[(i * 2 + a, j * 2 + b)], x[(i, j)] * z[(a, b)]);
                    }
                }
            }
        }
    }

    #[test]
    fn kron_capacity() {
        let big = ComplexMatrix::identity(1 << MAX_SITES);
        let err = kron(&big, &pauli(Pauli::Z)).unwrap_err();
        assert!(matches!(err, Error::Capacity { .. }));
    }

    #[test]
    fn embed_examples() {
        let z = pauli(Pauli::Z);
        assert_eq!(
            real_diag(&embed(&z, 0, 2).unwrap()),
            vec![1.0, 1.0, -1.0, -1.0]
        );
        assert_eq!(
            real_diag(&embed(&z, 1, 2).unwrap()),
            vec![1.0, -1.0, 1.0, -1.0]
        );
        for n in 1..=5 {
            for k in 0..n {
                assert_eq!(
                    embed(&pauli(Pauli::Identity), k, n).unwrap(),
                    ComplexMatrix::identity(1 << n)
                );
            }
        }
    }

    #[test]
    fn embed_errors() {
        let z = pauli(Pauli::Z);
        assert!(matches!(
            embed(&z, 3, 3),
            Err(Error::SiteOutOfRange { site: 3, n: 3 })
        ));
        assert!(matches!(embed(&z, 0, 0), Err(Error::InvalidArgument(_))));
        assert!(matches!(
            embed(&z, 0, MAX_SITES + 1),
            Err(Error::Capacity { .. })
        ));
        assert!(embed(&ComplexMatrix::identity(4), 0, 2).is_err());
    }

    #[test]
    fn zz_examples() {
        assert_eq!(
            real_diag(&two_site_zz(0, 1, 2).unwrap()),
            vec![1.0, -1.0, -1.0, 1.0]
        );
        // |↑↓↑⟩ = 0b010
        let zz = two_site_zz(0, 2, 3).unwrap();
        assert_eq!(zz[(0b010, 0b010)].re, 1.0);
        assert_eq!(two_site_zz(1, 3, 4).unwrap(), two_site_zz(3, 1, 4).unwrap());
    }

    #[test]
    fn zz_matches_bit_formula() {
        let n = 4;
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let d = real_diag(&two_site_zz(i, j, n).unwrap());
                for (b, &v) in d.iter().enumerate() {
                    assert_eq!(v, spin_of(b, i, n) * spin_of(b, j, n));
                }
                let plus = d.iter().filter(|&&v| v == 1.0).count();
                assert_eq!(plus, 1 << (n - 1));
                assert_eq!(d.len() - plus, 1 << (n - 1));
            }
        }
    }

    #[test]
    fn zz_errors() {
        assert!(matches!(
            two_site_zz(1, 1, 3),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            two_site_zz(0, 3, 3),
            Err(Error::SiteOutOfRange { .. })
        ));
    }

    #[test]
    fn embedded_paulis_are_exactly_hermitian_and_real() {
        for kind in [Pauli::X, Pauli::Z, Pauli::Identity] {
            for n in 1..=4 {
                for site in 0..n {
                    let m = embed(&pauli(kind), site, n).unwrap();
                    assert_eq!(m.hermitian_defect(), 0.0);
                    assert!(m.is_real());
                }
            }
        }
    }
}
