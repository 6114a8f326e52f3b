//! Dense complex linear algebra for the handful of tiny spaces the simulator
//! needs (dimensions 2, 3, 4 and 6).
//!
//! Every state, density matrix and operator carries the labels of its tensor
//! factors. Basis order is lexicographic in declared factor order, so for
//! `[A1, A2] ⊗ [B1, B2]` the amplitudes are ordered `A1B1, A1B2, A2B1, A2B2`.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance used for every "exact" structural check.
pub const TOL: f64 = 1e-12;

/// Eigenvalues of a density matrix may dip this far below zero.
pub const EIGEN_TOL: f64 = 1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Ordered tensor factors, each a list of basis labels.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Space(Vec<Vec<String>>);

impl Space {
    pub fn new<S: AsRef<str>>(factors: &[&[S]]) -> Self {
        Space(
            factors
                .iter()
                .map(|f| f.iter().map(|l| l.as_ref().to_owned()).collect())
                .collect(),
        )
    }

    pub fn single<S: AsRef<str>>(labels: &[S]) -> Self {
        Space(vec![labels.iter().map(|l| l.as_ref().to_owned()).collect()])
    }

    pub fn factors(&self) -> &[Vec<String>] {
        &self.0
    }

    pub fn factor_count(&self) -> usize {
        self.0.len()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.0.iter().map(Vec::len).collect()
    }

    pub fn dim(&self) -> usize {
        self.0.iter().map(Vec::len).product()
    }

    /// Factors of `self` followed by factors of `other`.
    pub fn concat(&self, other: &Space) -> Space {
        Space(self.0.iter().chain(other.0.iter()).cloned().collect())
    }

    pub fn factor(&self, index: usize) -> Result<Space> {
        self.0
            .get(index)
            .map(|f| Space(vec![f.clone()]))
            .ok_or(Error::FactorOutOfRange {
                index,
                count: self.0.len(),
            })
    }

    /// Flat index of the basis vector named by one label per factor.
    pub fn index_of(&self, labels: &[&str]) -> Option<usize> {
        if labels.len() != self.0.len() {
            return None;
        }
        let mut index = 0;
        for (factor, label) in self.0.iter().zip(labels) {
            let pos = factor.iter().position(|l| l == label)?;
            index = index * factor.len() + pos;
        }
        Some(index)
    }

    /// Labels (one per factor) of the basis vector at a flat index.
    pub fn labels_of(&self, mut index: usize) -> Vec<&str> {
        let mut out = vec![""; self.0.len()];
        for (slot, factor) in out.iter_mut().zip(&self.0).rev() {
            *slot = &factor[index % factor.len()];
            index /= factor.len();
        }
        out
    }
}

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, factor) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("⊗")?;
            }
            write!(f, "[{}]", factor.join(","))?;
        }
        Ok(())
    }
}

/// Row-major dense complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} entries cannot fill a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|z| !z.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |r, c| if r == c { ONE } else { ZERO })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[Complex64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn mul(&self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.cols, rhs.rows, "inner dimensions differ");
        Matrix::from_fn(self.rows, rhs.cols, |r, c| {
            (0..self.cols).map(|k| self.get(r, k) * rhs.get(k, c)).sum()
        })
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.cols, v.len(), "vector length differs from column count");
        (0..self.rows)
            .map(|r| self.row(r).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn adjoint(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |r, c| self.get(c, r).conj())
    }

    /// Kronecker product `self ⊗ rhs`.
    pub fn kron(&self, rhs: &Matrix) -> Matrix {
        Matrix::from_fn(self.rows * rhs.rows, self.cols * rhs.cols, |r, c| {
            self.get(r / rhs.rows, c / rhs.cols) * rhs.get(r % rhs.rows, c % rhs.cols)
        })
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).sum()
    }

    /// Largest entrywise modulus of `self - rhs`.
    pub fn max_abs_diff(&self, rhs: &Matrix) -> f64 {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        self.data
            .iter()
            .zip(&rhs.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `max |(A†A - I)_ij|`, plus `AA† - I` when square.
    pub fn unitarity_deviation(&self) -> f64 {
        let adj = self.adjoint();
        let mut dev = adj.mul(self).max_abs_diff(&Matrix::identity(self.cols));
        if self.rows == self.cols {
            dev = dev.max(self.mul(&adj).max_abs_diff(&Matrix::identity(self.rows)));
        }
        dev
    }

    /// Entries in row-major order.
    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }
}

/// Normalized ket on a labeled space.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    space: Space,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    pub fn new(space: Space, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != space.dim() {
            return Err(Error::Dimension(format!(
                "{} amplitudes for space {space} of dimension {}",
                amplitudes.len(),
                space.dim()
            )));
        }
        if let Some(i) = amplitudes.iter().position(|z| !z.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        let norm_sqr: f64 = amplitudes.iter().map(Complex64::norm_sqr).sum();
        if (norm_sqr - 1.0).abs() > TOL {
            return Err(Error::NotNormalized(norm_sqr));
        }
        Ok(StateVector { space, amplitudes })
    }

    /// The basis vector named by one label per factor.
    pub fn basis(space: Space, labels: &[&str]) -> Result<Self> {
        let index = space.index_of(labels).ok_or_else(|| {
            Error::Dimension(format!("no basis vector {labels:?} in {space}"))
        })?;
        let mut amplitudes = vec![ZERO; space.dim()];
        amplitudes[index] = ONE;
        Ok(StateVector { space, amplitudes })
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, labels: &[&str]) -> Option<Complex64> {
        self.space.index_of(labels).map(|i| self.amplitudes[i])
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt()
    }

    /// Born probabilities in basis order.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(Complex64::norm_sqr).collect()
    }

    /// `⟨self|other⟩`; spaces must agree.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        if self.space != other.space {
            return Err(Error::SpaceMismatch {
                expected: self.space.to_string(),
                found: other.space.to_string(),
            });
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }
}

#[derive(Serialize, Deserialize)]
struct StateVectorRepr {
    space: Space,
    amplitudes: Vec<[f64; 2]>,
}

impl Serialize for StateVector {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        StateVectorRepr {
            space: self.space.clone(),
            amplitudes: self.amplitudes.iter().map(|z| [z.re, z.im]).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for StateVector {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = StateVectorRepr::deserialize(deserializer)?;
        let amplitudes = repr
            .amplitudes
            .iter()
            .map(|[re, im]| Complex64::new(*re, *im))
            .collect();
        StateVector::new(repr.space, amplitudes).map_err(serde::de::Error::custom)
    }
}

/// Hermitian, positive, unit-trace matrix on a labeled space.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    space: Space,
    entries: Matrix,
}

impl DensityMatrix {
    pub fn new(space: Space, entries: Matrix) -> Result<Self> {
        let n = space.dim();
        if entries.rows() != n || entries.cols() != n {
            return Err(Error::Dimension(format!(
                "{}x{} matrix for space {space} of dimension {n}",
                entries.rows(),
                entries.cols()
            )));
        }
        let herm = entries.max_abs_diff(&entries.adjoint());
        if herm > TOL {
            return Err(Error::NotHermitian(herm));
        }
        let tr = entries.trace();
        if (tr.re - 1.0).abs() > TOL || tr.im.abs() > TOL {
            return Err(Error::BadTrace(tr.re));
        }
        let min_eig = min_eigenvalue(&entries);
        if min_eig < -EIGEN_TOL {
            return Err(Error::NotPositive(min_eig));
        }
        Ok(DensityMatrix { space, entries })
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn entries(&self) -> &Matrix {
        &self.entries
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.entries.get(r, c)
    }

    pub fn trace(&self) -> f64 {
        self.entries.trace().re
    }

    /// `Tr(ρ²)`.
    pub fn purity(&self) -> f64 {
        let n = self.entries.rows();
        // Tr(ρ²) = Σ |ρ_ij|² for Hermitian ρ
        (0..n)
            .flat_map(|r| (0..n).map(move |c| (r, c)))
            .map(|(r, c)| self.entries.get(r, c).norm_sqr())
            .sum()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut eig = hermitian_eigenvalues(&self.entries);
        eig.sort_by(f64::total_cmp);
        eig
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        self.entries.max_abs_diff(&self.entries.adjoint())
    }
}

#[derive(Serialize)]
struct DensityMatrixRepr {
    space: Space,
    entries: Vec<Vec<[f64; 2]>>,
}

impl Serialize for DensityMatrix {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let n = self.entries.rows();
        DensityMatrixRepr {
            space: self.space.clone(),
            entries: (0..n)
                .map(|r| self.entries.row(r).iter().map(|z| [z.re, z.im]).collect())
                .collect(),
        }
        .serialize(serializer)
    }
}

fn hermitian_eigenvalues(m: &Matrix) -> Vec<f64> {
    let n = m.rows();
    let dm = nalgebra::DMatrix::from_fn(n, n, |r, c| m.get(r, c));
    nalgebra::SymmetricEigen::new(dm).eigenvalues.iter().copied().collect()
}

fn min_eigenvalue(m: &Matrix) -> f64 {
    hermitian_eigenvalues(m).into_iter().fold(f64::INFINITY, f64::min)
}

/// Linear map between labeled spaces; unitary when square, isometric otherwise.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    input: Space,
    output: Space,
    matrix: Matrix,
}

impl Operator {
    pub fn new(input: Space, output: Space, matrix: Matrix) -> Result<Self> {
        if matrix.rows() != output.dim() || matrix.cols() != input.dim() {
            return Err(Error::Dimension(format!(
                "{}x{} matrix cannot map {input} to {output}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        if matrix.rows() < matrix.cols() {
            return Err(Error::Dimension(format!(
                "map from {input} to {output} cannot be isometric"
            )));
        }
        let dev = matrix.unitarity_deviation();
        if dev > TOL {
            return Err(Error::NotUnitary(dev));
        }
        Ok(Operator {
            input,
            output,
            matrix,
        })
    }

    pub fn identity(space: Space) -> Self {
        let matrix = Matrix::identity(space.dim());
        Operator {
            input: space.clone(),
            output: space,
            matrix,
        }
    }

    pub fn input_space(&self) -> &Space {
        &self.input
    }

    pub fn output_space(&self) -> &Space {
        &self.output
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn is_square(&self) -> bool {
        self.matrix.rows() == self.matrix.cols()
    }

    pub fn unitarity_deviation(&self) -> f64 {
        self.matrix.unitarity_deviation()
    }

    /// `self · first`: apply `first`, then `self`.
    pub fn after(&self, first: &Operator) -> Result<Operator> {
        if first.output != self.input {
            return Err(Error::SpaceMismatch {
                expected: self.input.to_string(),
                found: first.output.to_string(),
            });
        }
        Ok(Operator {
            input: first.input.clone(),
            output: self.output.clone(),
            matrix: self.matrix.mul(&first.matrix),
        })
    }

    /// `self ⊗ other` acting on the concatenated spaces.
    pub fn kron(&self, other: &Operator) -> Operator {
        Operator {
            input: self.input.concat(&other.input),
            output: self.output.concat(&other.output),
            matrix: self.matrix.kron(&other.matrix),
        }
    }

    /// Determinant of a square operator (dimensions here are at most 6).
    pub fn determinant(&self) -> Option<Complex64> {
        if !self.is_square() {
            return None;
        }
        let n = self.matrix.rows();
        let dm = nalgebra::DMatrix::from_fn(n, n, |r, c| self.matrix.get(r, c));
        Some(dm.determinant())
    }
}

/// Kronecker product of two states.
pub fn tensor(u: &StateVector, v: &StateVector) -> StateVector {
    let amplitudes = u
        .amplitudes
        .iter()
        .flat_map(|a| v.amplitudes.iter().map(move |b| a * b))
        .collect();
    StateVector {
        space: u.space.concat(&v.space),
        amplitudes,
    }
}

/// Apply an operator to a state whose space matches the operator's input.
pub fn apply(op: &Operator, psi: &StateVector) -> Result<StateVector> {
    if op.input != psi.space {
        return Err(Error::SpaceMismatch {
            expected: op.input.to_string(),
            found: psi.space.to_string(),
        });
    }
    StateVector::new(op.output.clone(), op.matrix.mul_vec(&psi.amplitudes))
}

/// `|ψ⟩⟨ψ|`.
pub fn density_of(psi: &StateVector) -> DensityMatrix {
    let a = &psi.amplitudes;
    DensityMatrix {
        space: psi.space.clone(),
        entries: Matrix::from_fn(a.len(), a.len(), |r, c| a[r] * a[c].conj()),
    }
}

/// Reduced state on factor `keep` of a two-factor density matrix.
pub fn partial_trace(rho: &DensityMatrix, keep: usize) -> Result<DensityMatrix> {
    let count = rho.space.factor_count();
    if count != 2 {
        return Err(Error::NotBipartite(count));
    }
    if keep >= count {
        return Err(Error::FactorOutOfRange { index: keep, count });
    }
    let dims = rho.space.dims();
    let (d0, d1) = (dims[0], dims[1]);
    let idx = |i: usize, j: usize| i * d1 + j;
    let entries = if keep == 0 {
        Matrix::from_fn(d0, d0, |r, c| (0..d1).map(|j| rho.get(idx(r, j), idx(c, j))).sum())
    } else {
        Matrix::from_fn(d1, d1, |r, c| (0..d0).map(|i| rho.get(idx(i, r), idx(i, c))).sum())
    };
    Ok(DensityMatrix {
        space: rho.space.factor(keep)?,
        entries,
    })
}
