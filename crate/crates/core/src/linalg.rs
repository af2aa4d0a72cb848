// Copyright 2026 The stq Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! Dense complex matrices with labeled tensor-factor bookkeeping.
//!
//! Matrices are stored row-major. Multi-slot spaces are ordered lists of
//! `(label, dim)` pairs; the first slot is the most significant factor of a
//! flat index, matching the order of a Kronecker product.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use nalgebra::{DMatrix, SymmetricEigen, SVD};
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{dim_err, Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Residual allowed when a matrix is accepted as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-10;

#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = ONE;
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return dim_err(format!(
                "{} entries supplied for a {rows}x{cols} matrix",
                data.len()
            ));
        }
        Ok(ComplexMatrix { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        ComplexMatrix { rows, cols, data }
    }

    /// Builds a matrix from real row-major entries.
    pub fn from_real(rows: usize, cols: usize, entries: &[f64]) -> Result<Self> {
        Self::from_vec(rows, cols, entries.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn diagonal(values: &[C64]) -> Self {
        let n = values.len();
        let mut m = Self::zeros(n, n);
        for (i, v) in values.iter().enumerate() {
            m.data[i * n + i] = *v;
        }
        m
    }

    /// `|ket⟩⟨bra|`.
    pub fn outer(ket: &[C64], bra: &[C64]) -> Self {
        Self::from_fn(ket.len(), bra.len(), |i, j| ket[i] * bra[j].conj())
    }

    /// `|i⟩⟨j|` in dimension `dim`.
    pub fn unit(dim: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(dim, dim);
        m.data[i * dim + j] = ONE;
        m
    }

    /// Column vector `|i⟩` in dimension `dim`.
    pub fn basis_vector(dim: usize, i: usize) -> Vec<C64> {
        let mut v = vec![ZERO; dim];
        v[i] = ONE;
        v
    }

    /// Pauli matrix σ_k for k in 0..4 (σ₀ = I).
    pub fn pauli(k: u8) -> Self {
        let i = C64::new(0.0, 1.0);
        let d = |a: C64, b: C64, c: C64, e: C64| ComplexMatrix { rows: 2, cols: 2, data: vec![a, b, c, e] };
        match k {
            0 => d(ONE, ZERO, ZERO, ONE),
            1 => d(ZERO, ONE, ONE, ZERO),
            2 => d(ZERO, -i, i, ZERO),
            3 => d(ONE, ZERO, ZERO, -ONE),
            _ => panic!("Pauli index {k} out of range"),
        }
    }

    /// The swap operator on `C^d ⊗ C^d`.
    pub fn swap(d: usize) -> Self {
        Self::from_fn(d * d, d * d, |r, c| {
            let (a, b) = (r / d, r % d);
            if c == b * d + a {
                ONE
            } else {
                ZERO
            }
        })
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Side length of a square matrix.
    pub fn dim(&self) -> usize {
        debug_assert!(self.is_square());
        self.rows
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<C64> {
        self.data
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn conj(&self) -> Self {
        self.map(|z| z.conj())
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> Self {
        ComplexMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&z| f(z)).collect() }
    }

    pub fn scale(&self, c: C64) -> Self {
        self.map(|z| z * c)
    }

    pub fn scale_real(&self, c: f64) -> Self {
        self.map(|z| z * c)
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch");
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// `max |A - A†|` entrywise; infinite for non-square input.
    pub fn hermitian_residual(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows;
        let mut r: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                r = r.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        r
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_residual() <= tol
    }

    /// `(A + A†)/2`.
    pub fn hermitian_part(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| (self.get(i, j) + self.get(j, i).conj()) * 0.5)
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len(), "shape mismatch");
        (0..self.rows)
            .map(|i| self.data[i * self.cols..(i + 1) * self.cols].iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn to_nalgebra(&self) -> DMatrix<C64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }

    pub fn from_nalgebra(m: &DMatrix<C64>) -> Self {
        Self::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
    }

    pub fn check_square(&self, what: &str) -> Result<usize> {
        if self.is_square() {
            Ok(self.rows)
        } else {
            dim_err(format!("{what} must be square, got {}x{}", self.rows, self.cols))
        }
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self.get(i, j);
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    /// Row-oriented product; zero entries of the left operand are skipped,
    /// which makes products with `ρ ⊗ I` style factors cheap.
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.cols, rhs.rows, "shape mismatch in product");
        let n = rhs.cols;
        let mut out = ComplexMatrix::zeros(self.rows, n);
        for i in 0..self.rows {
            let orow = &mut out.data[i * n..(i + 1) * n];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == ZERO {
                    continue;
                }
                let brow = &rhs.data[k * n..(k + 1) * n];
                for (o, b) in orow.iter_mut().zip(brow) {
                    *o += a * b;
                }
            }
        }
        out
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch in sum");
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch in difference");
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct MatrixRepr {
    rows: usize,
    cols: usize,
    data: Vec<[f64; 2]>,
}

impl Serialize for ComplexMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixRepr {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| [z.re, z.im]).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = MatrixRepr::deserialize(d)?;
        let data = repr.data.iter().map(|&[re, im]| C64::new(re, im)).collect();
        ComplexMatrix::from_vec(repr.rows, repr.cols, data).map_err(serde::de::Error::custom)
    }
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (br, bc) = (b.rows, b.cols);
    ComplexMatrix::from_fn(a.rows * br, a.cols * bc, |i, j| a.get(i / br, j / bc) * b.get(i % br, j % bc))
}

/// Kronecker product of a list of matrices, left to right.
pub fn kron_all<'a>(factors: impl IntoIterator<Item = &'a ComplexMatrix>) -> ComplexMatrix {
    factors.into_iter().fold(ComplexMatrix::identity(1), |acc, m| kron(&acc, m))
}

/// Kronecker product of state vectors.
pub fn kron_vec(a: &[C64], b: &[C64]) -> Vec<C64> {
    a.iter().flat_map(|x| b.iter().map(move |y| x * y)).collect()
}

/// `½(ab + ba)`.
pub fn anticommutator_half(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = a.check_square("anticommutator operand")?;
    if !b.is_square() || b.rows != n {
        return dim_err(format!("anticommutator of {n}x{n} with {}x{}", b.rows, b.cols));
    }
    Ok((&(a * b) + &(b * a)).scale_real(0.5))
}

/// `½(ab + ba)` for Hermitian operands, using `ba = (ab)†`.
pub(crate) fn hermitian_anticommutator(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    (a * b).hermitian_part()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Slot {
    pub label: String,
    pub dim: usize,
}

/// Ordered tensor factorization of a Hilbert space into labeled slots.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct SlotSpace {
    slots: Vec<Slot>,
}

impl<'de> Deserialize<'de> for SlotSpace {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let slots = Vec::<Slot>::deserialize(d)?;
        SlotSpace::from_slots(slots).map_err(serde::de::Error::custom)
    }
}

impl SlotSpace {
    pub fn new<S: Into<String>>(slots: impl IntoIterator<Item = (S, usize)>) -> Result<Self> {
        Self::from_slots(slots.into_iter().map(|(label, dim)| Slot { label: label.into(), dim }).collect())
    }

    pub fn from_slots(slots: Vec<Slot>) -> Result<Self> {
        for (k, s) in slots.iter().enumerate() {
            if s.dim == 0 {
                return dim_err(format!("slot `{}` has zero dimension", s.label));
            }
            if slots[..k].iter().any(|o| o.label == s.label) {
                return Err(Error::DuplicateLabel(s.label.clone()));
            }
        }
        Ok(SlotSpace { slots })
    }

    /// Slots `t1..tm`, each of dimension `dim`.
    pub fn times(m: usize, dim: usize) -> Self {
        SlotSpace { slots: (1..=m).map(|k| Slot { label: format!("t{k}"), dim }).collect() }
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn total_dim(&self) -> usize {
        self.slots.iter().map(|s| s.dim).product()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.slots.iter().map(|s| s.dim).collect()
    }

    pub fn labels(&self) -> Vec<&str> {
        self.slots.iter().map(|s| s.label.as_str()).collect()
    }

    pub fn position(&self, label: &str) -> Result<usize> {
        self.slots
            .iter()
            .position(|s| s.label == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn dim_of(&self, label: &str) -> Result<usize> {
        Ok(self.slots[self.position(label)?].dim)
    }

    /// Sub-space of the listed labels, kept in this space's order.
    pub fn restrict(&self, keep: &[&str]) -> Result<SlotSpace> {
        for l in keep {
            self.position(l)?;
        }
        Ok(SlotSpace { slots: self.slots.iter().filter(|s| keep.contains(&s.label.as_str())).cloned().collect() })
    }

    pub fn concat(&self, other: &SlotSpace) -> Result<SlotSpace> {
        Self::from_slots(self.slots.iter().chain(&other.slots).cloned().collect())
    }

    fn check_matrix(&self, m: &ComplexMatrix) -> Result<usize> {
        let n = m.check_square("operator")?;
        if n != self.total_dim() {
            return dim_err(format!("matrix dimension {n} does not match slot space dimension {}", self.total_dim()));
        }
        Ok(n)
    }

    fn positions(&self, labels: &[&str]) -> Result<Vec<usize>> {
        let mut out = Vec::with_capacity(labels.len());
        for l in labels {
            let p = self.position(l)?;
            if out.contains(&p) {
                return Err(Error::DuplicateLabel(l.to_string()));
            }
            out.push(p);
        }
        Ok(out)
    }
}

/// Digit table: `table[i]` is the multi-index of flat index `i`.
fn digit_table(dims: &[usize]) -> Vec<Vec<usize>> {
    let total: usize = dims.iter().product();
    (0..total)
        .map(|mut i| {
            let mut d = vec![0; dims.len()];
            for k in (0..dims.len()).rev() {
                d[k] = i % dims[k];
                i /= dims[k];
            }
            d
        })
        .collect()
}

fn flat(digits: &[usize], positions: &[usize], dims: &[usize]) -> usize {
    positions.iter().fold(0, |acc, &p| acc * dims[p] + digits[p])
}

/// Traces out every slot not listed in `keep`. The kept slots stay in the
/// order of `space`.
pub fn partial_trace(m: &ComplexMatrix, space: &SlotSpace, keep: &[&str]) -> Result<ComplexMatrix> {
    space.check_matrix(m)?;
    let keep_pos = space.positions(keep)?;
    let dims = space.dims();
    let kept: Vec<usize> = (0..dims.len()).filter(|p| keep_pos.contains(p)).collect();
    let traced: Vec<usize> = (0..dims.len()).filter(|p| !keep_pos.contains(p)).collect();
    let table = digit_table(&dims);
    let ki: Vec<usize> = table.iter().map(|d| flat(d, &kept, &dims)).collect();
    let ti: Vec<usize> = table.iter().map(|d| flat(d, &traced, &dims)).collect();
    let kd: usize = kept.iter().map(|&p| dims[p]).product();
    let n = m.rows;
    let mut out = ComplexMatrix::zeros(kd, kd);
    for i in 0..n {
        for j in 0..n {
            if ti[i] == ti[j] {
                out[(ki[i], ki[j])] += m.get(i, j);
            }
        }
    }
    Ok(out)
}

/// Lifts `op`, acting on the slots `acts_on` (in that order), to the full
/// space with identity on every other slot.
pub fn embed(op: &ComplexMatrix, space: &SlotSpace, acts_on: &[&str]) -> Result<ComplexMatrix> {
    let pos = space.positions(acts_on)?;
    let dims = space.dims();
    let sub: usize = pos.iter().map(|&p| dims[p]).product();
    if !op.is_square() || op.rows != sub {
        return dim_err(format!(
            "operator is {}x{} but slots {:?} span dimension {sub}",
            op.rows, op.cols, acts_on
        ));
    }
    let rest: Vec<usize> = (0..dims.len()).filter(|p| !pos.contains(p)).collect();
    let table = digit_table(&dims);
    let si: Vec<usize> = table.iter().map(|d| flat(d, &pos, &dims)).collect();
    let ri: Vec<usize> = table.iter().map(|d| flat(d, &rest, &dims)).collect();
    let n = space.total_dim();
    Ok(ComplexMatrix::from_fn(n, n, |i, j| if ri[i] == ri[j] { op.get(si[i], si[j]) } else { ZERO }))
}

/// Reorders the tensor factors of `m` so that the slots appear in `order`.
pub fn permute(m: &ComplexMatrix, space: &SlotSpace, order: &[&str]) -> Result<(ComplexMatrix, SlotSpace)> {
    space.check_matrix(m)?;
    let pos = space.positions(order)?;
    if pos.len() != space.len() {
        return Err(Error::InvalidArgument(format!("permutation {order:?} does not list every slot")));
    }
    let dims = space.dims();
    let table = digit_table(&dims);
    let target: Vec<usize> = table.iter().map(|d| flat(d, &pos, &dims)).collect();
    let n = m.rows;
    let mut out = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            out[(target[i], target[j])] = m.get(i, j);
        }
    }
    let new_space = SlotSpace { slots: pos.iter().map(|&p| space.slots[p].clone()).collect() };
    Ok((out, new_space))
}

/// Transposes the listed tensor factors in the computational basis.
pub fn partial_transpose(m: &ComplexMatrix, space: &SlotSpace, labels: &[&str]) -> Result<ComplexMatrix> {
    space.check_matrix(m)?;
    let pos = space.positions(labels)?;
    let dims = space.dims();
    let table = digit_table(&dims);
    let n = m.rows;
    let mut out = ComplexMatrix::zeros(n, n);
    let mut r = vec![0; dims.len()];
    let mut c = vec![0; dims.len()];
    let all: Vec<usize> = (0..dims.len()).collect();
    for i in 0..n {
        for j in 0..n {
            r.copy_from_slice(&table[i]);
            c.copy_from_slice(&table[j]);
            for &p in &pos {
                std::mem::swap(&mut r[p], &mut c[p]);
            }
            out[(flat(&r, &all, &dims), flat(&c, &all, &dims))] = m.get(i, j);
        }
    }
    Ok(out)
}

/// Hermitian eigendecomposition with eigenvalues in ascending order. The
/// eigenvectors are the columns of the returned matrix.
pub fn eigh(m: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    m.check_square("eigh input")?;
    let residual = m.hermitian_residual();
    if residual > HERMITIAN_TOL * m.max_abs().max(1.0) {
        return Err(Error::NotHermitian(residual));
    }
    let eig = SymmetricEigen::new(m.hermitian_part().to_nalgebra());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let n = m.rows;
    let vectors = ComplexMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok((values, vectors))
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn eigvalsh(m: &ComplexMatrix) -> Result<Vec<f64>> {
    eigh(m).map(|(v, _)| v)
}

/// Sum of singular values. Hermitian input goes through `eigh`.
pub fn trace_norm(m: &ComplexMatrix) -> f64 {
    if m.is_square() && m.hermitian_residual() <= HERMITIAN_TOL * m.max_abs().max(1.0) {
        if let Ok(values) = eigvalsh(m) {
            return values.iter().map(|v| v.abs()).sum();
        }
    }
    SVD::new(m.to_nalgebra(), false, false).singular_values.iter().sum()
}

/// Minimum eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue(m: &ComplexMatrix) -> Result<f64> {
    Ok(eigvalsh(m)?.first().copied().unwrap_or(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{haar_unitary, random_hermitian, rng};
    use proptest::prelude::*;

    fn sx() -> ComplexMatrix {
        ComplexMatrix::pauli(1)
    }
    fn sz() -> ComplexMatrix {
        ComplexMatrix::pauli(3)
    }

    #[test]
    fn kron_of_identities() {
        let i2 = ComplexMatrix::identity(2);
        assert_eq!(kron(&i2, &i2), ComplexMatrix::identity(4));
    }

    #[test]
    fn kron_sigma_x_sigma_z_blocks() {
        let k = kron(&sx(), &sz());
        let z = ComplexMatrix::zeros(2, 2);
        for (bi, bj, block) in [(0, 0, &z), (0, 1, &sz()), (1, 0, &sz()), (1, 1, &z)] {
            for i in 0..2 {
                for j in 0..2 {
                    assert_eq!(k.get(2 * bi + i, 2 * bj + j), block.get(i, j));
                }
            }
        }
    }

    #[test]
    fn kron_is_associative() {
        let mut r = rng(7);
        let (a, b, c) = (random_hermitian(2, &mut r), haar_unitary(2, &mut r), random_hermitian(2, &mut r));
        let left = kron(&kron(&a, &b), &c);
        let right = kron(&a, &kron(&b, &c));
        assert!(left.max_abs_diff(&right) < 1e-15);
    }

    #[test]
    fn partial_trace_of_product() {
        let mut r = rng(1);
        let (a, b) = (random_hermitian(2, &mut r), random_hermitian(3, &mut r));
        let space = SlotSpace::new([("1", 2), ("2", 3)]).unwrap();
        let pt = partial_trace(&kron(&a, &b), &space, &["1"]).unwrap();
        assert!(pt.max_abs_diff(&a.scale(b.trace())) < 1e-14);
    }

    #[test]
    fn partial_trace_of_swap_matches_entrywise_sum() {
        let swap = ComplexMatrix::swap(2);
        // oracle: (Tr_2 X)_{ac} = Σ_b X_{(a,b),(c,b)}
        let mut oracle = ComplexMatrix::zeros(2, 2);
        for a in 0..2 {
            for c in 0..2 {
                for b in 0..2 {
                    oracle[(a, c)] += swap.get(2 * a + b, 2 * c + b);
                }
            }
        }
        let space = SlotSpace::new([("1", 2), ("2", 2)]).unwrap();
        let pt = partial_trace(&swap, &space, &["1"]).unwrap();
        assert_eq!(pt, oracle);
        assert_eq!(pt, ComplexMatrix::identity(2));
    }

    #[test]
    fn partial_trace_unknown_label() {
        let space = SlotSpace::new([("1", 2), ("2", 2)]).unwrap();
        let err = partial_trace(&ComplexMatrix::identity(4), &space, &["3"]).unwrap_err();
        assert_eq!(err, Error::UnknownLabel("3".into()));
    }

    #[test]
    fn embed_left_and_right() {
        let space = SlotSpace::new([("A", 2), ("B", 2)]).unwrap();
        let i2 = ComplexMatrix::identity(2);
        assert_eq!(embed(&sx(), &space, &["A"]).unwrap(), kron(&sx(), &i2));
        assert_eq!(embed(&sx(), &space, &["B"]).unwrap(), kron(&i2, &sx()));
    }

    #[test]
    fn embed_non_adjacent_matches_permuted_kron() {
        let mut r = rng(3);
        let op = random_hermitian(4, &mut r);
        let space = SlotSpace::new([("A", 2), ("B", 2), ("C", 2)]).unwrap();
        let got = embed(&op, &space, &["A", "C"]).unwrap();
        // oracle: op ⊗ I_B lives on (A, C, B); conjugate by the permutation
        // taking (a, c, b) to (a, b, c).
        let on_acb = kron(&op, &ComplexMatrix::identity(2));
        let to_abc = |idx: usize| {
            let (a, c, b) = (idx >> 2 & 1, idx >> 1 & 1, idx & 1);
            a << 2 | b << 1 | c
        };
        let mut perm = ComplexMatrix::zeros(8, 8);
        for i in 0..8 {
            perm[(to_abc(i), i)] = ONE;
        }
        let oracle = &(&perm * &on_acb) * &perm.adjoint();
        assert!(got.max_abs_diff(&oracle) < 1e-15);
    }

    #[test]
    fn embed_then_trace_recovers_operator() {
        let mut r = rng(5);
        let op = random_hermitian(2, &mut r);
        let space = SlotSpace::new([("A", 2), ("B", 3), ("C", 2)]).unwrap();
        let big = embed(&op, &space, &["C"]).unwrap();
        let back = partial_trace(&big, &space, &["C"]).unwrap().scale_real(1.0 / 6.0);
        assert!(back.max_abs_diff(&op) < 1e-14);
    }

    #[test]
    fn embed_label_mismatch() {
        let space = SlotSpace::new([("A", 2), ("B", 2)]).unwrap();
        assert!(matches!(embed(&ComplexMatrix::identity(4), &space, &["A"]), Err(Error::Dimension(_))));
        assert!(matches!(embed(&sx(), &space, &["Z"]), Err(Error::UnknownLabel(_))));
    }

    #[test]
    fn eigh_examples() {
        assert_eq!(eigvalsh(&ComplexMatrix::identity(2)).unwrap(), vec![1.0, 1.0]);
        let z = eigvalsh(&sz()).unwrap();
        assert!((z[0] + 1.0).abs() < 1e-15 && (z[1] - 1.0).abs() < 1e-15);
        // SWAP: symmetric subspace (dim 3) has +1, antisymmetric singlet −1
        let s = eigvalsh(&ComplexMatrix::swap(2)).unwrap();
        for (got, want) in s.iter().zip([-1.0, 1.0, 1.0, 1.0]) {
            assert!((got - want).abs() < 1e-14);
        }
    }

    #[test]
    fn eigh_rejects_non_hermitian() {
        let m = ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(eigh(&m), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn trace_norm_examples() {
        let mut r = rng(11);
        let rho = crate::random::random_density(3, &mut r);
        assert!((trace_norm(&rho) - 1.0).abs() < 1e-12);
        assert!((trace_norm(&sz()) - 2.0).abs() < 1e-14);
        assert!((trace_norm(&ComplexMatrix::swap(2).scale_real(0.5)) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn trace_norm_general_matrix_uses_singular_values() {
        let m = ComplexMatrix::from_real(2, 2, &[0.0, 3.0, 0.0, 0.0]).unwrap();
        assert!((trace_norm(&m) - 3.0).abs() < 1e-14);
    }

    #[test]
    fn anticommutator_examples() {
        let i2 = ComplexMatrix::identity(2);
        assert_eq!(anticommutator_half(&i2, &i2).unwrap(), i2);
        assert!(anticommutator_half(&sx(), &sz()).unwrap().max_abs() < 1e-16);
        assert!(anticommutator_half(&i2, &ComplexMatrix::identity(3)).is_err());
    }

    #[test]
    fn partial_transpose_of_swap() {
        let space = SlotSpace::new([("1", 2), ("2", 2)]).unwrap();
        // SWAP^{T_1} = 2 |Φ+⟩⟨Φ+|
        let pt = partial_transpose(&ComplexMatrix::swap(2), &space, &["1"]).unwrap();
        let phi = [ONE, ZERO, ZERO, ONE];
        assert_eq!(pt, ComplexMatrix::outer(&phi, &phi));
    }

    #[test]
    fn permute_round_trip() {
        let mut r = rng(9);
        let m = random_hermitian(12, &mut r);
        let space = SlotSpace::new([("A", 2), ("B", 3), ("C", 2)]).unwrap();
        let (p, ps) = permute(&m, &space, &["C", "A", "B"]).unwrap();
        assert_eq!(ps.labels(), vec!["C", "A", "B"]);
        let (back, bs) = permute(&p, &ps, &["A", "B", "C"]).unwrap();
        assert_eq!(bs, space);
        assert_eq!(back, m);
    }

    #[test]
    fn slot_space_rejects_duplicates() {
        assert!(matches!(SlotSpace::new([("a", 2), ("a", 2)]), Err(Error::DuplicateLabel(_))));
    }

    #[test]
    fn json_encoding() {
        let m = ComplexMatrix::pauli(2);
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(s, r#"{"rows":2,"cols":2,"data":[[0.0,0.0],[-0.0,-1.0],[0.0,1.0],[0.0,0.0]]}"#);
        let back: ComplexMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
        assert!(serde_json::from_str::<ComplexMatrix>(r#"{"rows":2,"cols":2,"data":[[1,0]]}"#).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn partial_trace_linear_and_trace_preserving(seed in any::<u64>(), keep_mask in 1u8..8) {
            let mut r = rng(seed);
            let space = SlotSpace::new([("a", 2), ("b", 3), ("c", 2)]).unwrap();
            let (x, y) = (random_hermitian(12, &mut r), random_hermitian(12, &mut r));
            let keep: Vec<&str> = ["a", "b", "c"].iter().enumerate()
                .filter(|(k, _)| keep_mask >> k & 1 == 1).map(|(_, l)| *l).collect();
            let c = C64::new(0.3, -1.1);
            let lhs = partial_trace(&(&x + &y.scale(c)), &space, &keep).unwrap();
            let rhs = &partial_trace(&x, &space, &keep).unwrap() + &partial_trace(&y, &space, &keep).unwrap().scale(c);
            prop_assert!(lhs.max_abs_diff(&rhs) < 1e-12);
            prop_assert!((partial_trace(&x, &space, &keep).unwrap().trace() - x.trace()).norm() < 1e-12);
        }

        #[test]
        fn disjoint_embeddings_commute(seed in any::<u64>()) {
            let mut r = rng(seed);
            let space = SlotSpace::new([("a", 2), ("b", 2), ("c", 2)]).unwrap();
            let x = embed(&random_hermitian(4, &mut r), &space, &["c", "a"]).unwrap();
            let y = embed(&haar_unitary(2, &mut r), &space, &["b"]).unwrap();
            prop_assert!((&x * &y).max_abs_diff(&(&y * &x)) < 1e-12);
        }

        #[test]
        fn trace_norm_unitarily_invariant(seed in any::<u64>()) {
            let mut r = rng(seed);
            let m = random_hermitian(6, &mut r);
            let u = haar_unitary(6, &mut r);
            let rotated = &(&u * &m) * &u.adjoint();
            prop_assert!((trace_norm(&rotated) - trace_norm(&m)).abs() < 1e-10);
        }

        #[test]
        fn eigh_reconstructs(seed in any::<u64>(), n in 1usize..9) {
            let mut r = rng(seed);
            let m = random_hermitian(n, &mut r);
            let (vals, vecs) = eigh(&m).unwrap();
            prop_assert!(vals.windows(2).all(|w| w[0] <= w[1]));
            let lambda = ComplexMatrix::diagonal(&vals.iter().map(|&v| C64::new(v, 0.0)).collect::<Vec<_>>());
            let back = &(&vecs * &lambda) * &vecs.adjoint();
            prop_assert!(back.max_abs_diff(&m) <= 1e-10);
        }
    }
}
