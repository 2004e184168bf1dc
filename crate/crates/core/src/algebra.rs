//! Dense complex linear algebra on square operator matrices.
//!
//! Storage is row-major. Everything here is small-matrix code: composite
//! Hilbert spaces stay at a few hundred states, and explicit superoperators
//! at a few thousand.

use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type Complex = Complex64;

pub const ZERO: Complex = Complex::new(0.0, 0.0);
pub const ONE: Complex = Complex::new(1.0, 0.0);
pub const I: Complex = Complex::new(0.0, 1.0);

/// Largest tolerated `max |A - A^dagger|` for input to the Hermitian eigensolver.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Jacobi stops once the off-diagonal Frobenius norm drops below this times `||A||_F`.
pub const JACOBI_REL_TOL: f64 = 1e-12;
pub const JACOBI_MAX_SWEEPS: usize = 100;
/// A pivot smaller than this times `max |A_ij|` is treated as singular.
pub const SINGULAR_PIVOT_REL: f64 = 1e-13;

/// Tolerances for [`hermitian_eigenvalues_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenTolerances {
    pub hermitian: f64,
    pub relative_off_norm: f64,
    pub max_sweeps: usize,
}

impl Default for EigenTolerances {
    fn default() -> Self {
        Self {
            hermitian: HERMITIAN_TOL,
            relative_off_norm: JACOBI_REL_TOL,
            max_sweeps: JACOBI_MAX_SWEEPS,
        }
    }
}

/// Dense complex square matrix representing an operator on a finite Hilbert space.
#[derive(Clone, PartialEq)]
pub struct OperatorMatrix {
    dim: usize,
    data: Vec<Complex>,
}

impl fmt::Debug for OperatorMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "OperatorMatrix({}x{}) [", self.dim, self.dim)?;
        for row in self.data.chunks(self.dim) {
            write!(f, "  ")?;
            for z in row {
                write!(f, "{:>9.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl OperatorMatrix {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "operator dimension must be positive");
        Self {
            dim,
            data: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = ONE;
        }
        m
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = Complex::new(d, 0.0);
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(f(i, j));
            }
        }
        Self { dim, data }
    }

    /// Builds a matrix from row-major data, checking shape and finiteness.
    pub fn from_vec(dim: usize, data: Vec<Complex>) -> Result<Self> {
        if dim == 0 || data.len() != dim * dim {
            return Err(Error::NotSquare {
                rows: dim,
                cols: data.len().checked_div(dim).unwrap_or(0),
            });
        }
        if let Some(k) = data.iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::NonFinite {
                row: k / dim,
                col: k % dim,
            });
        }
        Ok(Self { dim, data })
    }

    pub fn from_rows(rows: &[Vec<Complex>]) -> Result<Self> {
        let dim = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != dim) {
            return Err(Error::NotSquare {
                rows: dim,
                cols: bad.len(),
            });
        }
        Self::from_vec(dim, rows.concat())
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let rows: Vec<Vec<Complex>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| Complex::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn as_slice(&self) -> &[Complex] {
        &self.data
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [Complex] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<Complex> {
        self.data
    }

    pub fn row(&self, i: usize) -> &[Complex] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn diagonal(&self) -> Vec<Complex> {
        (0..self.dim).map(|i| self[(i, i)]).collect()
    }

    fn check_same_dim(&self, other: &Self, op: &'static str) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                op,
                left: self.dim,
                right: other.dim,
            });
        }
        Ok(())
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other, "matmul")?;
        let n = self.dim;
        let mut out = vec![ZERO; n * n];
        for i in 0..n {
            let out_row = &mut out[i * n..(i + 1) * n];
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == ZERO {
                    continue;
                }
                let b_row = &other.data[k * n..(k + 1) * n];
                for (o, &b) in out_row.iter_mut().zip(b_row) {
                    *o += a * b;
                }
            }
        }
        Ok(Self { dim: n, data: out })
    }

    /// Kronecker product with `(A x B)[(i*db + k), (j*db + l)] = A[i,j] B[k,l]`.
    pub fn kron(&self, other: &Self) -> Result<Self> {
        let n = self
            .dim
            .checked_mul(other.dim)
            .filter(|n| n.checked_mul(*n).is_some())
            .ok_or(Error::DimensionOverflow {
                left: self.dim,
                right: other.dim,
            })?;
        let db = other.dim;
        let mut out = vec![ZERO; n * n];
        for i in 0..self.dim {
            for j in 0..self.dim {
                let a = self.data[i * self.dim + j];
                if a == ZERO {
                    continue;
                }
                for k in 0..db {
                    let row = (i * db + k) * n + j * db;
                    for l in 0..db {
                        out[row + l] = a * other.data[k * db + l];
                    }
                }
            }
        }
        Ok(Self { dim: n, data: out })
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    /// `AB - BA`.
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        Ok(self.matmul(other)? - other.matmul(self)?)
    }

    /// `AB + BA`.
    pub fn anticommutator(&self, other: &Self) -> Result<Self> {
        Ok(self.matmul(other)? + other.matmul(self)?)
    }

    pub fn trace(&self) -> Complex {
        (0..self.dim).map(|i| self.data[i * self.dim + i]).sum()
    }

    pub fn scale(&self, factor: Complex) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| z * factor).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `max |A_ij - B_ij|`; panics on mismatched dimensions.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim, "max_abs_diff dimension mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `max |A - A^dagger|`.
    pub fn hermiticity_error(&self) -> f64 {
        let n = self.dim;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.data[i * n + j] - self.data[j * n + i].conj()).norm());
            }
        }
        worst
    }

    /// Replaces the matrix by `(A + A^dagger) / 2`.
    pub fn hermitize(&mut self) {
        const TILE: usize = 32;
        let n = self.dim;
        for i in 0..n {
            self.data[i * n + i].im = 0.0;
        }
        for ib in (0..n).step_by(TILE) {
            for jb in (ib..n).step_by(TILE) {
                for i in ib..(ib + TILE).min(n) {
                    for j in jb.max(i + 1)..(jb + TILE).min(n) {
                        let avg = (self.data[i * n + j] + self.data[j * n + i].conj()) * 0.5;
                        self.data[i * n + j] = avg;
                        self.data[j * n + i] = avg.conj();
                    }
                }
            }
        }
    }

    /// Applies the matrix to a column vector.
    pub fn apply(&self, v: &[Complex]) -> Result<Vec<Complex>> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch {
                op: "apply",
                left: self.dim,
                right: v.len(),
            });
        }
        Ok(self
            .data
            .chunks(self.dim)
            .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect())
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

impl Index<(usize, usize)> for OperatorMatrix {
    type Output = Complex;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for OperatorMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex {
        &mut self.data[i * self.dim + j]
    }
}

macro_rules! elementwise {
    ($trait:ident, $method:ident, $assign_trait:ident, $assign:ident, $op:tt) => {
        impl $assign_trait<&OperatorMatrix> for OperatorMatrix {
            fn $assign(&mut self, rhs: &OperatorMatrix) {
                assert_eq!(self.dim, rhs.dim, "elementwise dimension mismatch");
                for (a, b) in self.data.iter_mut().zip(&rhs.data) {
                    *a $op *b;
                }
            }
        }

        impl $trait<&OperatorMatrix> for OperatorMatrix {
            type Output = OperatorMatrix;
            fn $method(mut self, rhs: &OperatorMatrix) -> OperatorMatrix {
                self.$assign(rhs);
                self
            }
        }

        impl $trait<OperatorMatrix> for OperatorMatrix {
            type Output = OperatorMatrix;
            fn $method(mut self, rhs: OperatorMatrix) -> OperatorMatrix {
                self.$assign(&rhs);
                self
            }
        }

        impl $trait<&OperatorMatrix> for &OperatorMatrix {
            type Output = OperatorMatrix;
            fn $method(self, rhs: &OperatorMatrix) -> OperatorMatrix {
                let mut out = self.clone();
                out.$assign(rhs);
                out
            }
        }
    };
}

elementwise!(Add, add, AddAssign, add_assign, +=);
elementwise!(Sub, sub, SubAssign, sub_assign, -=);

impl Mul<f64> for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn mul(self, rhs: f64) -> OperatorMatrix {
        self.scale(Complex::new(rhs, 0.0))
    }
}

impl Mul<f64> for OperatorMatrix {
    type Output = OperatorMatrix;
    fn mul(mut self, rhs: f64) -> OperatorMatrix {
        self.data.iter_mut().for_each(|z| *z *= rhs);
        self
    }
}

impl Mul<Complex> for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn mul(self, rhs: Complex) -> OperatorMatrix {
        self.scale(rhs)
    }
}

impl Mul<Complex> for OperatorMatrix {
    type Output = OperatorMatrix;
    fn mul(mut self, rhs: Complex) -> OperatorMatrix {
        self.data.iter_mut().for_each(|z| *z *= rhs);
        self
    }
}

impl Neg for OperatorMatrix {
    type Output = OperatorMatrix;
    fn neg(mut self) -> OperatorMatrix {
        self.data.iter_mut().for_each(|z| *z = -*z);
        self
    }
}

/// Real eigenvalues of a Hermitian matrix in ascending order, by cyclic Jacobi rotations.
pub fn hermitian_eigenvalues(a: &OperatorMatrix) -> Result<Vec<f64>> {
    hermitian_eigenvalues_with(a, &EigenTolerances::default())
}

pub fn hermitian_eigenvalues_with(a: &OperatorMatrix, tol: &EigenTolerances) -> Result<Vec<f64>> {
    let deviation = a.hermiticity_error();
    if deviation > tol.hermitian {
        return Err(Error::NotHermitian { deviation });
    }
    let n = a.dim();
    let mut m = a.clone();
    m.hermitize();
    let threshold = tol.relative_off_norm * m.frobenius_norm();

    let off_norm = |m: &OperatorMatrix| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                s += 2.0 * m[(i, j)].norm_sqr();
            }
        }
        s.sqrt()
    };

    let mut sweeps = 0;
    loop {
        let off = off_norm(&m);
        if off <= threshold || off == 0.0 {
            break;
        }
        if sweeps == tol.max_sweeps {
            return Err(Error::NoConvergence {
                sweeps,
                off_norm: off,
            });
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                jacobi_rotate(&mut m, p, q);
            }
        }
    }

    let mut eig: Vec<f64> = (0..n).map(|i| m[(i, i)].re).collect();
    eig.sort_by(|x, y| x.total_cmp(y));
    Ok(eig)
}

/// Annihilates `m[p,q]` (and `m[q,p]`) with a unitary similarity acting on rows/columns `p, q`.
fn jacobi_rotate(m: &mut OperatorMatrix, p: usize, q: usize) {
    let apq = m[(p, q)];
    let r = apq.norm();
    if r == 0.0 {
        return;
    }
    let n = m.dim();
    // Phase e^{-i phi} makes the pivot real; then a real symmetric rotation finishes.
    let phase = (apq / r).conj();
    let app = m[(p, p)].re;
    let aqq = m[(q, q)].re;
    let tau = (aqq - app) / (2.0 * r);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;

    // Columns: A G with G_pp = c, G_pq = s, G_qp = -s e^{-i phi}, G_qq = c e^{-i phi}.
    for k in 0..n {
        let akp = m[(k, p)];
        let akq = m[(k, q)] * phase;
        m[(k, p)] = akp * c - akq * s;
        m[(k, q)] = akp * s + akq * c;
    }
    // Rows: G^dagger (A G).
    let phase_c = phase.conj();
    for k in 0..n {
        let apk = m[(p, k)];
        let aqk = m[(q, k)] * phase_c;
        m[(p, k)] = apk * c - aqk * s;
        m[(q, k)] = apk * s + aqk * c;
    }
    m[(p, q)] = ZERO;
    m[(q, p)] = ZERO;
    m[(p, p)] = Complex::new(app - t * r, 0.0);
    m[(q, q)] = Complex::new(aqq + t * r, 0.0);
}

/// Solves `A x = b` by LU factorisation with partial pivoting.
pub fn solve_linear(a: &OperatorMatrix, b: &[Complex]) -> Result<Vec<Complex>> {
    solve_linear_with(a, b, SINGULAR_PIVOT_REL)
}

/// As [`solve_linear`] with an explicit relative pivot threshold.
///
/// Elimination skips structural zeros, so banded and block-sparse systems
/// (such as vectorised Lindblad generators) factor far faster than `n^3`.
pub fn solve_linear_with(a: &OperatorMatrix, b: &[Complex], pivot_rel: f64) -> Result<Vec<Complex>> {
    solve_linear_owned(a.clone(), b.to_vec(), pivot_rel)
}

/// As [`solve_linear_with`], factoring `a` in place.
pub fn solve_linear_owned(a: OperatorMatrix, b: Vec<Complex>, pivot_rel: f64) -> Result<Vec<Complex>> {
    let n = a.dim();
    if b.len() != n {
        return Err(Error::DimensionMismatch {
            op: "solve_linear",
            left: n,
            right: b.len(),
        });
    }
    let scale = a.max_abs();
    let min_pivot = pivot_rel * scale;
    let mut m = a.into_vec();
    let mut x = b;

    for k in 0..n {
        let (p, pivot_abs) = (k..n)
            .map(|i| (i, m[i * n + k].norm()))
            .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if !(pivot_abs > min_pivot) || scale == 0.0 {
            return Err(Error::Singular {
                index: k,
                pivot: pivot_abs.max(0.0),
            });
        }
        if p != k {
            for j in 0..n {
                m.swap(k * n + j, p * n + j);
            }
            x.swap(k, p);
        }
        let last = (k + 1..n).rev().find(|&j| m[k * n + j] != ZERO).unwrap_or(k);
        let pivot = m[k * n + k];
        let (upper, lower) = m.split_at_mut((k + 1) * n);
        let pivot_row = &upper[k * n + k + 1..k * n + last + 1];
        let xk = x[k];
        for (offset, row) in lower.chunks_mut(n).enumerate() {
            let lik = row[k];
            if lik == ZERO {
                continue;
            }
            let factor = lik / pivot;
            row[k] = ZERO;
            for (r, &u) in row[k + 1..last + 1].iter_mut().zip(pivot_row) {
                *r -= factor * u;
            }
            x[k + 1 + offset] -= factor * xk;
        }
    }

    for k in (0..n).rev() {
        let row = &m[k * n..(k + 1) * n];
        let mut acc = x[k];
        for j in (k + 1)..n {
            if row[j] != ZERO {
                acc -= row[j] * x[j];
            }
        }
        x[k] = acc / row[k];
    }
    Ok(x)
}

/// Cholesky test of `A + tol * I`: true iff every eigenvalue of the Hermitian
/// matrix `A` is at least `-tol` (up to rounding). Costs `n^3 / 6`, far below
/// a full eigendecomposition.
pub fn is_positive_semidefinite(a: &OperatorMatrix, tol: f64) -> bool {
    let n = a.dim();
    let mut l = vec![ZERO; n * n];
    let mut pivot_row = Vec::with_capacity(n);
    for j in 0..n {
        let d = a[(j, j)].re + tol - l[j * n..j * n + j].iter().map(|z| z.norm_sqr()).sum::<f64>();
        if !(d > 0.0) {
            return false;
        }
        let djj = d.sqrt();
        l[j * n + j] = Complex::new(djj, 0.0);
        pivot_row.clear();
        pivot_row.extend_from_slice(&l[j * n..j * n + j]);
        for i in (j + 1)..n {
            let row_i = &mut l[i * n..i * n + j + 1];
            let s: Complex = row_i[..j]
                .iter()
                .zip(&pivot_row)
                .map(|(x, y)| x * y.conj())
                .sum();
            row_i[j] = (a[(i, j)] - s) / djj;
        }
    }
    true
}

/// Minimum eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue(a: &OperatorMatrix) -> Result<f64> {
    Ok(hermitian_eigenvalues(a)?[0])
}

/// Compressed-row operator for products against dense matrices.
///
/// Ladder and Pauli operators lifted into a composite space have a handful of
/// nonzeros per row, so `S * rho` costs `O(nnz * D)` instead of `O(D^3)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOperator {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<Complex>,
}

impl SparseOperator {
    pub fn from_dense(op: &OperatorMatrix) -> Self {
        let n = op.dim();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for i in 0..n {
            for (j, &z) in op.row(i).iter().enumerate() {
                if z != ZERO {
                    cols.push(j);
                    vals.push(z);
                }
            }
            row_ptr.push(cols.len());
        }
        Self {
            dim: n,
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row_entries(&self, i: usize) -> impl Iterator<Item = (usize, Complex)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()].iter().copied().zip(self.vals[r].iter().copied())
    }

    /// `out = S * m` for a dense row-major `m`.
    pub fn mul_dense_into(&self, m: &[Complex], out: &mut [Complex]) {
        let n = self.dim;
        for (i, out_row) in out.chunks_mut(n).enumerate() {
            out_row.fill(ZERO);
            for (k, s) in self.row_entries(i) {
                let m_row = &m[k * n..(k + 1) * n];
                for (o, &x) in out_row.iter_mut().zip(m_row) {
                    *o += s * x;
                }
            }
        }
    }

    /// `out = m * S` for a dense row-major `m`.
    pub fn dense_mul_into(&self, m: &[Complex], out: &mut [Complex]) {
        let n = self.dim;
        for (m_row, out_row) in m.chunks(n).zip(out.chunks_mut(n)) {
            out_row.fill(ZERO);
            for (k, &x) in m_row.iter().enumerate() {
                if x == ZERO {
                    continue;
                }
                for (j, s) in self.row_entries(k) {
                    out_row[j] += x * s;
                }
            }
        }
    }

    /// For operators with at most one nonzero per row, `(column, value)` per row.
    pub fn as_monomial(&self) -> Option<Vec<Option<(usize, Complex)>>> {
        (0..self.dim)
            .map(|i| match self.row_ptr[i + 1] - self.row_ptr[i] {
                0 => Some(None),
                1 => Some(Some((self.cols[self.row_ptr[i]], self.vals[self.row_ptr[i]]))),
                _ => None,
            })
            .collect()
    }
}
