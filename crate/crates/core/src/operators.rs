//! Qubit and truncated-boson operators, and their embedding in a bipartite space.
//!
//! Qubit basis ordering is `|e> = (1, 0)`, `|g> = (0, 1)`, so `sigma_z = diag(1, -1)`
//! and `sigma_plus sigma_minus` projects on the excited state. Boson slots use the
//! Fock basis `|0> .. |d-1>`. Composite states are ordered `first (x) second`.

use crate::algebra::{Complex, OperatorMatrix, ONE};
use crate::error::{Error, Result};
use crate::DensityMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pauli {
    X,
    Z,
    Plus,
    Minus,
}

pub fn sigma(kind: Pauli) -> OperatorMatrix {
    let rows: [[f64; 2]; 2] = match kind {
        Pauli::X => [[0.0, 1.0], [1.0, 0.0]],
        Pauli::Z => [[1.0, 0.0], [0.0, -1.0]],
        Pauli::Plus => [[0.0, 1.0], [0.0, 0.0]],
        Pauli::Minus => [[0.0, 0.0], [1.0, 0.0]],
    };
    OperatorMatrix::from_fn(2, |i, j| Complex::new(rows[i][j], 0.0))
}

/// Truncated annihilation operator, `a[n, n+1] = sqrt(n+1)`.
pub fn annihilation(d: usize) -> Result<OperatorMatrix> {
    if d < 2 {
        return Err(Error::InvalidTruncation(d));
    }
    let mut a = OperatorMatrix::zeros(d);
    for n in 0..d - 1 {
        a[(n, n + 1)] = Complex::new(((n + 1) as f64).sqrt(), 0.0);
    }
    Ok(a)
}

pub fn creation(d: usize) -> Result<OperatorMatrix> {
    Ok(annihilation(d)?.dagger())
}

/// `a^dagger a = diag(0, 1, .., d-1)`.
pub fn number(d: usize) -> Result<OperatorMatrix> {
    if d < 2 {
        return Err(Error::InvalidTruncation(d));
    }
    Ok(OperatorMatrix::from_diagonal(
        &(0..d).map(|n| n as f64).collect::<Vec<_>>(),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubsystemKind {
    Qubit,
    /// Harmonic oscillator truncated to its lowest `d` Fock states.
    Boson(usize),
}

impl SubsystemKind {
    pub fn dim(self) -> usize {
        match self {
            SubsystemKind::Qubit => 2,
            SubsystemKind::Boson(d) => d,
        }
    }

    /// Number operator of the subsystem: `sigma_plus sigma_minus` or `a^dagger a`.
    pub fn number_operator(self) -> Result<OperatorMatrix> {
        match self {
            SubsystemKind::Qubit => sigma(Pauli::Plus).matmul(&sigma(Pauli::Minus)),
            SubsystemKind::Boson(d) => number(d),
        }
    }

    /// Lowering operator: `sigma_minus` or `a`.
    pub fn lowering(self) -> Result<OperatorMatrix> {
        match self {
            SubsystemKind::Qubit => Ok(sigma(Pauli::Minus)),
            SubsystemKind::Boson(d) => annihilation(d),
        }
    }

    pub fn raising(self) -> Result<OperatorMatrix> {
        Ok(self.lowering()?.dagger())
    }

    /// Index of the lowest-excitation basis state (`|g>` or `|0>`).
    pub fn ground_index(self) -> usize {
        match self {
            SubsystemKind::Qubit => 1,
            SubsystemKind::Boson(_) => 0,
        }
    }

    fn validate(self) -> Result<()> {
        match self {
            SubsystemKind::Boson(d) if d < 2 => Err(Error::InvalidTruncation(d)),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slot {
    First,
    Second,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CompositeSpace {
    first: SubsystemKind,
    second: SubsystemKind,
}

impl CompositeSpace {
    pub fn new(first: SubsystemKind, second: SubsystemKind) -> Result<Self> {
        first.validate()?;
        second.validate()?;
        first
            .dim()
            .checked_mul(second.dim())
            .ok_or(Error::DimensionOverflow {
                left: first.dim(),
                right: second.dim(),
            })?;
        Ok(Self { first, second })
    }

    pub fn first(&self) -> SubsystemKind {
        self.first
    }

    pub fn second(&self) -> SubsystemKind {
        self.second
    }

    pub fn kind(&self, slot: Slot) -> SubsystemKind {
        match slot {
            Slot::First => self.first,
            Slot::Second => self.second,
        }
    }

    pub fn total_dim(&self) -> usize {
        self.first.dim() * self.second.dim()
    }

    pub fn has_boson(&self) -> bool {
        matches!(self.first, SubsystemKind::Boson(_)) || matches!(self.second, SubsystemKind::Boson(_))
    }

    /// Composite basis index of `|i> (x) |j>`.
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.second.dim() + j
    }
}

/// Embeds a subsystem operator: `op (x) I` for the first slot, `I (x) op` for the second.
pub fn lift(op: &OperatorMatrix, slot: Slot, space: &CompositeSpace) -> Result<OperatorMatrix> {
    let expected = space.kind(slot).dim();
    if op.dim() != expected {
        return Err(Error::DimensionMismatch {
            op: "lift",
            left: expected,
            right: op.dim(),
        });
    }
    match slot {
        Slot::First => op.kron(&OperatorMatrix::identity(space.second.dim())),
        Slot::Second => OperatorMatrix::identity(space.first.dim()).kron(op),
    }
}

/// Sum of the lifted number operators of both slots.
pub fn total_excitation(space: &CompositeSpace) -> Result<OperatorMatrix> {
    let n1 = lift(&space.first.number_operator()?, Slot::First, space)?;
    let n2 = lift(&space.second.number_operator()?, Slot::Second, space)?;
    Ok(n1 + n2)
}

/// Pure joint ground state `|g/0> (x) |g/0>`.
pub fn ground_state(space: &CompositeSpace) -> DensityMatrix {
    basis_state(space, space.first.ground_index(), space.second.ground_index())
}

/// Pure product basis state `|i> (x) |j>` with subsystem basis indices `i`, `j`.
pub fn basis_state(space: &CompositeSpace, i: usize, j: usize) -> DensityMatrix {
    let k = space.index(i, j);
    let mut rho = OperatorMatrix::zeros(space.total_dim());
    rho[(k, k)] = ONE;
    DensityMatrix::new_unchecked(rho)
}
