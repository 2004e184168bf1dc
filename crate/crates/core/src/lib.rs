//! Open (Lindblad) dynamics of bipartite quantum systems.
//!
//! Three systems are covered, each with and without the rotating wave
//! approximation: two coupled qubits, two coupled harmonic oscillators, and a
//! qubit coupled to an oscillator (Rabi / Jaynes-Cummings). Each subsystem sees
//! its own thermal bath through raising and lowering collapse channels.
//!
//! ```
//! use bipartite_lindblad::{simulate, BathSpec, NbarMapping, SystemKind, SystemSpec, TimeGrid};
//!
//! let spec = SystemSpec::resonant(SystemKind::QubitQubit, false);
//! let bath = BathSpec::weak(0.0, NbarMapping::Bose);
//! let traj = simulate(&spec, &bath, &TimeGrid::new(0.0, 5.0, 0.01).unwrap()).unwrap();
//! assert_eq!(traj.len(), 501);
//! ```

pub mod algebra;
pub mod error;
pub mod evolve;
pub mod liouvillian;
pub mod models;
pub mod operators;
pub mod state;
pub mod validation;

pub use algebra::{Complex, OperatorMatrix};
pub use error::{Error, Result};
pub use evolve::{
    convergence_probe, expect, integrate, integrate_observed, occupation_observables, simulate, Observable, TimeGrid,
    Trajectory,
};
pub use liouvillian::{Generator, SuperoperatorMatrix};
pub use models::{
    build_collapse_channels, build_hamiltonian, thermal_occupation, BathSpec, CollapseChannel, NbarMapping, SystemKind,
    SystemSpec,
};
pub use operators::{CompositeSpace, Pauli, Slot, SubsystemKind};
pub use state::DensityMatrix;
