//! The Lindblad generator
//!
//! `L(rho) = -i[H, rho] + sum_n r_n (C_n rho C_n^dag - 1/2 {C_n^dag C_n, rho})`
//!
//! applied directly to density matrices, or materialised as a `D^2 x D^2`
//! superoperator (column-stacking `vec`) for steady-state solves.

use crate::algebra::{solve_linear_owned, Complex, OperatorMatrix, SparseOperator, I, ONE, SINGULAR_PIVOT_REL, ZERO};
use crate::error::{Error, Result};
use crate::models::{build_collapse_channels, build_hamiltonian, BathSpec, CollapseChannel, SystemSpec};
use crate::state::{check_state, DensityMatrix};

/// Largest system dimension for which the explicit superoperator is built.
pub const MAX_SUPEROPERATOR_DIM: usize = 64;
/// Hamiltonians must be Hermitian to this tolerance.
pub const HAMILTONIAN_HERMITIAN_TOL: f64 = 1e-13;
/// Tolerance on Hermiticity and positivity of a computed steady state.
pub const STEADY_STATE_TOL: f64 = 1e-8;

const TILE: usize = 32;

#[derive(Debug, Clone)]
enum JumpForm {
    /// At most one nonzero per row: `(row, column, rate * value)` and `(row, column, conj(value))`.
    Monomial {
        rows: Vec<(usize, usize, Complex)>,
        cols: Vec<(usize, usize, Complex)>,
    },
    General {
        op: SparseOperator,
        dagger: SparseOperator,
    },
}

#[derive(Debug, Clone)]
struct Jump {
    rate: f64,
    form: JumpForm,
}

impl Jump {
    fn new(channel: &CollapseChannel) -> Self {
        let sparse = SparseOperator::from_dense(&channel.operator);
        let form = match sparse.as_monomial() {
            Some(mono) => JumpForm::Monomial {
                rows: mono
                    .iter()
                    .enumerate()
                    .filter_map(|(i, e)| e.map(|(p, c)| (i, p, c * channel.rate)))
                    .collect(),
                cols: mono
                    .iter()
                    .enumerate()
                    .filter_map(|(j, e)| e.map(|(p, c)| (j, p, c.conj())))
                    .collect(),
            },
            None => JumpForm::General {
                dagger: SparseOperator::from_dense(&channel.operator.dagger()),
                op: sparse,
            },
        };
        Self {
            rate: channel.rate,
            form,
        }
    }

    /// `out += rate * C rho C^dag`.
    fn accumulate(&self, rho: &[Complex], out: &mut [Complex], n: usize, scratch: &mut [Complex], scratch2: &mut [Complex]) {
        match &self.form {
            JumpForm::Monomial { rows, cols } => {
                for &(i, p, a) in rows {
                    let rho_row = &rho[p * n..(p + 1) * n];
                    let out_row = &mut out[i * n..(i + 1) * n];
                    for &(j, q, b) in cols {
                        out_row[j] += a * b * rho_row[q];
                    }
                }
            }
            JumpForm::General { op, dagger } => {
                op.mul_dense_into(rho, scratch);
                dagger.dense_mul_into(scratch, scratch2);
                for (o, y) in out.iter_mut().zip(scratch2.iter()) {
                    *o += y * self.rate;
                }
            }
        }
    }

    /// Like `accumulate`, but only touches entries with `j >= i`.
    fn accumulate_upper(
        &self,
        rho: &[Complex],
        out: &mut [Complex],
        n: usize,
        scratch: &mut [Complex],
        scratch2: &mut [Complex],
    ) {
        match &self.form {
            JumpForm::Monomial { rows, cols } => {
                for &(i, p, a) in rows {
                    let rho_row = &rho[p * n..(p + 1) * n];
                    let out_row = &mut out[i * n..(i + 1) * n];
                    let start = cols.partition_point(|c| c.0 < i);
                    for &(j, q, b) in &cols[start..] {
                        out_row[j] += a * b * rho_row[q];
                    }
                }
            }
            JumpForm::General { op, dagger } => {
                op.mul_dense_into(rho, scratch);
                dagger.dense_mul_into(scratch, scratch2);
                for i in 0..n {
                    for j in i..n {
                        out[i * n + j] += scratch2[i * n + j] * self.rate;
                    }
                }
            }
        }
    }
}

/// Hamiltonian plus collapse channels: the full right-hand side of the master equation.
#[derive(Debug, Clone)]
pub struct Generator {
    hamiltonian: OperatorMatrix,
    channels: Vec<CollapseChannel>,
    decay_products: Vec<OperatorMatrix>,
    /// `H - (i/2) sum_n r_n C_n^dag C_n`.
    effective: SparseOperator,
    effective_dagger: SparseOperator,
    jumps: Vec<Jump>,
    anticommutator_sign: f64,
}

impl Generator {
    pub fn new(hamiltonian: OperatorMatrix, channels: Vec<CollapseChannel>) -> Result<Self> {
        let dim = hamiltonian.dim();
        let herm = hamiltonian.hermiticity_error();
        if herm > HAMILTONIAN_HERMITIAN_TOL {
            return Err(Error::NotHermitian { deviation: herm });
        }
        for ch in &channels {
            if ch.operator.dim() != dim {
                return Err(Error::DimensionMismatch {
                    op: "generator",
                    left: dim,
                    right: ch.operator.dim(),
                });
            }
            if !(ch.rate.is_finite() && ch.rate >= 0.0) {
                return Err(Error::InvalidParameter {
                    name: "rate",
                    reason: format!("collapse rate must be non-negative, got {}", ch.rate),
                });
            }
        }
        let decay_products = channels
            .iter()
            .map(|ch| ch.operator.dagger().matmul(&ch.operator))
            .collect::<Result<Vec<_>>>()?;
        let mut gen = Self {
            hamiltonian,
            channels,
            decay_products,
            effective: SparseOperator::from_dense(&OperatorMatrix::zeros(1)),
            effective_dagger: SparseOperator::from_dense(&OperatorMatrix::zeros(1)),
            jumps: Vec::new(),
            anticommutator_sign: 1.0,
        };
        gen.compile();
        Ok(gen)
    }

    /// Generator of the master equation for a configured system and bath.
    pub fn from_models(spec: &SystemSpec, bath: &BathSpec) -> Result<Self> {
        Self::new(build_hamiltonian(spec)?, build_collapse_channels(spec, bath)?)
    }

    fn compile(&mut self) {
        let mut effective = self.hamiltonian.clone();
        for (ch, k) in self.channels.iter().zip(&self.decay_products) {
            if ch.rate > 0.0 {
                effective -= &(k * (I * (0.5 * ch.rate * self.anticommutator_sign)));
            }
        }
        self.effective_dagger = SparseOperator::from_dense(&effective.dagger());
        self.effective = SparseOperator::from_dense(&effective);
        self.jumps = self
            .channels
            .iter()
            .filter(|ch| ch.rate > 0.0)
            .map(Jump::new)
            .collect();
    }

    /// Flips the sign of the anticommutator term, giving a generator that no
    /// longer preserves the trace. Used to check that the validation suite
    /// notices a broken dissipator.
    #[doc(hidden)]
    pub fn with_flipped_anticommutator(mut self) -> Self {
        self.anticommutator_sign = -self.anticommutator_sign;
        self.compile();
        self
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.dim()
    }

    pub fn hamiltonian(&self) -> &OperatorMatrix {
        &self.hamiltonian
    }

    pub fn channels(&self) -> &[CollapseChannel] {
        &self.channels
    }

    /// Cached `C_n^dag C_n`, one per channel.
    pub fn decay_products(&self) -> &[OperatorMatrix] {
        &self.decay_products
    }

    pub fn is_dissipative(&self) -> bool {
        self.channels.iter().any(|ch| ch.rate > 0.0)
    }

    /// Applies the generator to an arbitrary (not necessarily Hermitian) operator.
    pub fn apply(&self, rho: &OperatorMatrix) -> Result<OperatorMatrix> {
        let n = self.dim();
        if rho.dim() != n {
            return Err(Error::DimensionMismatch {
                op: "apply_generator",
                left: n,
                right: rho.dim(),
            });
        }
        let mut x = vec![ZERO; n * n];
        let mut w = vec![ZERO; n * n];
        self.effective.mul_dense_into(rho.as_slice(), &mut x);
        self.effective_dagger.dense_mul_into(rho.as_slice(), &mut w);
        let mut out: Vec<Complex> = x.iter().zip(&w).map(|(a, b)| (a - b) * (-I)).collect();
        for jump in &self.jumps {
            jump.accumulate(rho.as_slice(), &mut out, n, &mut x, &mut w);
        }
        OperatorMatrix::from_vec(n, out)
    }

    /// `out = L(rho)` for Hermitian `rho`, using `-i(X - X^dag)` with `X = H_eff rho`.
    /// Only the upper triangle is computed; the lower one is mirrored.
    pub(crate) fn apply_hermitian_into(&self, rho: &[Complex], out: &mut [Complex], work: &mut HermitianWork) {
        let n = self.dim();
        let x = &mut work.x;
        self.effective.mul_dense_into(rho, x);
        for ib in (0..n).step_by(TILE) {
            for jb in (ib..n).step_by(TILE) {
                for i in ib..(ib + TILE).min(n) {
                    for j in jb.max(i)..(jb + TILE).min(n) {
                        let d = x[i * n + j] - x[j * n + i].conj();
                        // -i * d
                        out[i * n + j] = Complex::new(d.im, -d.re);
                    }
                }
            }
        }
        for jump in &self.jumps {
            jump.accumulate_upper(rho, out, n, &mut work.x, &mut work.y);
        }
        for ib in (0..n).step_by(TILE) {
            for jb in (ib..n).step_by(TILE) {
                for i in ib..(ib + TILE).min(n) {
                    for j in jb.max(i + 1)..(jb + TILE).min(n) {
                        out[j * n + i] = out[i * n + j].conj();
                    }
                }
            }
        }
    }

    /// Explicit superoperator in the column-stacking convention.
    pub fn to_matrix(&self) -> Result<SuperoperatorMatrix> {
        let d = self.dim();
        if d > MAX_SUPEROPERATOR_DIM {
            return Err(Error::SuperoperatorTooLarge {
                dim: d,
                max: MAX_SUPEROPERATOR_DIM,
            });
        }
        let n = d * d;
        let mut l = OperatorMatrix::zeros(n);
        let at = |i: usize, j: usize| j * d + i;
        // -i H_eff rho: (i, j) <- (k, j).
        for i in 0..d {
            for (k, h) in self.effective.row_entries(i) {
                for j in 0..d {
                    l[(at(i, j), at(k, j))] += -I * h;
                }
            }
        }
        // +i rho H_eff^dag: (i, j) <- (i, m) with coefficient H_eff^dag[m, j].
        for m in 0..d {
            for (j, h) in self.effective_dagger.row_entries(m) {
                for i in 0..d {
                    l[(at(i, j), at(i, m))] += I * h;
                }
            }
        }
        // r C rho C^dag: (i, j) <- (k, m) with C[i, k] conj(C[j, m]).
        for ch in self.channels.iter().filter(|ch| ch.rate > 0.0) {
            let c = SparseOperator::from_dense(&ch.operator);
            for i in 0..d {
                for (k, a) in c.row_entries(i) {
                    for j in 0..d {
                        for (m, b) in c.row_entries(j) {
                            l[(at(i, j), at(k, m))] += a * b.conj() * ch.rate;
                        }
                    }
                }
            }
        }
        Ok(SuperoperatorMatrix { system_dim: d, matrix: l })
    }

    /// Unique stationary state, from `L vec(rho) = 0` with one row replaced by
    /// the trace constraint.
    pub fn steady_state(&self) -> Result<DensityMatrix> {
        if !self.is_dissipative() {
            return Err(Error::DegenerateSteadyState(
                "no channel with positive rate; every stationary state of the closed system is steady".into(),
            ));
        }
        let sup = self.to_matrix()?;
        let d = sup.system_dim;
        let n = d * d;
        // Rows of L are linearly dependent through the trace functional, whose
        // support is the diagonal entries. Replace the row of rho[d-1, d-1].
        let mut l = sup.matrix;
        let target = n - 1;
        for col in 0..n {
            l[(target, col)] = ZERO;
        }
        for k in 0..d {
            l[(target, k * d + k)] = ONE;
        }
        let mut rhs = vec![ZERO; n];
        rhs[target] = ONE;
        let v = solve_linear_owned(l, rhs, SINGULAR_PIVOT_REL).map_err(|e| match e {
            Error::Singular { index, pivot } => Error::DegenerateSteadyState(format!(
                "trace-constrained Liouvillian is singular at pivot {index} (|pivot| = {pivot:e}); \
                 the stationary space has dimension > 1"
            )),
            other => other,
        })?;
        let mut rho = unvectorize(&v, d)?;
        let herm = rho.hermiticity_error();
        if herm > STEADY_STATE_TOL {
            return Err(Error::DegenerateSteadyState(format!(
                "solution is not Hermitian (deviation {herm:e})"
            )));
        }
        rho.hermitize();
        check_state(&rho, STEADY_STATE_TOL)?;
        Ok(DensityMatrix::new_unchecked(rho))
    }
}

/// Scratch buffers for repeated generator application.
#[derive(Debug, Clone)]
pub(crate) struct HermitianWork {
    x: Vec<Complex>,
    y: Vec<Complex>,
}

impl HermitianWork {
    pub(crate) fn new(dim: usize) -> Self {
        Self {
            x: vec![ZERO; dim * dim],
            y: vec![ZERO; dim * dim],
        }
    }
}

pub fn apply_generator(gen: &Generator, rho: &OperatorMatrix) -> Result<OperatorMatrix> {
    gen.apply(rho)
}

pub fn to_matrix(gen: &Generator) -> Result<SuperoperatorMatrix> {
    gen.to_matrix()
}

pub fn steady_state(gen: &Generator) -> Result<DensityMatrix> {
    gen.steady_state()
}

/// Column-stacking vectorisation: `vec(rho)[j * D + i] = rho[i, j]`.
pub fn vectorize(rho: &OperatorMatrix) -> Vec<Complex> {
    let d = rho.dim();
    let mut v = vec![ZERO; d * d];
    for i in 0..d {
        for j in 0..d {
            v[j * d + i] = rho[(i, j)];
        }
    }
    v
}

pub fn unvectorize(v: &[Complex], dim: usize) -> Result<OperatorMatrix> {
    if v.len() != dim * dim {
        return Err(Error::DimensionMismatch {
            op: "unvectorize",
            left: dim * dim,
            right: v.len(),
        });
    }
    OperatorMatrix::from_vec(dim, (0..dim * dim).map(|k| v[(k % dim) * dim + k / dim]).collect())
}

/// `D^2 x D^2` matrix of the generator acting on `vec(rho)`.
#[derive(Debug, Clone)]
pub struct SuperoperatorMatrix {
    system_dim: usize,
    matrix: OperatorMatrix,
}

impl SuperoperatorMatrix {
    pub fn system_dim(&self) -> usize {
        self.system_dim
    }

    pub fn matrix(&self) -> &OperatorMatrix {
        &self.matrix
    }

    pub fn apply(&self, rho: &OperatorMatrix) -> Result<OperatorMatrix> {
        if rho.dim() != self.system_dim {
            return Err(Error::DimensionMismatch {
                op: "superoperator apply",
                left: self.system_dim,
                right: rho.dim(),
            });
        }
        unvectorize(&self.matrix.apply(&vectorize(rho))?, self.system_dim)
    }

    /// `max |vec(I)^dag L|`, zero for a trace-preserving generator.
    pub fn trace_preservation_error(&self) -> f64 {
        let d = self.system_dim;
        let n = d * d;
        let mut worst: f64 = 0.0;
        for col in 0..n {
            let s: Complex = (0..d).map(|k| self.matrix[(k * d + k, col)]).sum();
            worst = worst.max(s.norm());
        }
        worst
    }
}
