//! The three bipartite Hamiltonians (with and without the rotating wave
//! approximation) and their thermal collapse channels. Units have `hbar = 1`.

use std::fmt;
use std::str::FromStr;

use crate::algebra::OperatorMatrix;
use crate::error::{Error, Result};
use crate::operators::{lift, sigma, CompositeSpace, Pauli, Slot, SubsystemKind};

/// Coupling-to-frequency ratio above which the bare occupation observables stop
/// being meaningful (ultrastrong coupling).
pub const VALIDITY_BOUND: f64 = 0.3;

pub const DEFAULT_FOCK_DIM: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SystemKind {
    QubitQubit,
    OscOsc,
    QubitOsc,
}

impl SystemKind {
    pub const ALL: [SystemKind; 3] = [SystemKind::QubitQubit, SystemKind::OscOsc, SystemKind::QubitOsc];

    pub fn short_name(self) -> &'static str {
        match self {
            SystemKind::QubitQubit => "qq",
            SystemKind::OscOsc => "oo",
            SystemKind::QubitOsc => "qo",
        }
    }
}

impl fmt::Display for SystemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl FromStr for SystemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "qq" => Ok(SystemKind::QubitQubit),
            "oo" => Ok(SystemKind::OscOsc),
            "qo" => Ok(SystemKind::QubitOsc),
            other => Err(Error::InvalidParameter {
                name: "system",
                reason: format!("expected qq, oo or qo, got `{other}`"),
            }),
        }
    }
}

/// Which bipartite system, its bare frequencies, coupling and truncation.
///
/// `omega1` belongs to slot one (qubit 1, oscillator a, or the qubit of the
/// qubit-oscillator pair) and `omega2` to slot two.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemSpec {
    pub kind: SystemKind,
    pub omega1: f64,
    pub omega2: f64,
    pub g: f64,
    pub rwa: bool,
    /// Fock truncation of every boson slot; ignored for qubit slots.
    pub fock_dim: usize,
}

impl SystemSpec {
    pub fn new(kind: SystemKind, omega1: f64, omega2: f64, g: f64, rwa: bool, fock_dim: usize) -> Result<Self> {
        let spec = Self {
            kind,
            omega1,
            omega2,
            g,
            rwa,
            fock_dim,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Resonant unit frequencies with `g = 0.2`.
    pub fn resonant(kind: SystemKind, rwa: bool) -> Self {
        Self {
            kind,
            omega1: 1.0,
            omega2: 1.0,
            g: 0.2,
            rwa,
            fock_dim: DEFAULT_FOCK_DIM,
        }
    }

    pub fn with_g(self, g: f64) -> Self {
        Self { g, ..self }
    }

    pub fn with_rwa(self, rwa: bool) -> Self {
        Self { rwa, ..self }
    }

    pub fn with_fock_dim(self, fock_dim: usize) -> Self {
        Self { fock_dim, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, w) in [("omega1", self.omega1), ("omega2", self.omega2)] {
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("frequency must be positive and finite, got {w}"),
                });
            }
        }
        if !(self.g.is_finite() && self.g >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "g",
                reason: format!("coupling must be non-negative and finite, got {}", self.g),
            });
        }
        if self.kind != SystemKind::QubitQubit && self.fock_dim < 2 {
            return Err(Error::InvalidTruncation(self.fock_dim));
        }
        Ok(())
    }

    pub fn coupling_ratio(&self) -> f64 {
        self.g / self.omega1.min(self.omega2)
    }

    /// Warning text when `g / min(omega)` exceeds [`VALIDITY_BOUND`].
    pub fn validity_warning(&self) -> Option<String> {
        let ratio = self.coupling_ratio();
        (ratio > VALIDITY_BOUND).then(|| {
            format!(
                "g/omega = {ratio:.3} exceeds {VALIDITY_BOUND}: occupation observables \
                 <a^dag a>, <sigma+ sigma-> may report unphysical virtual excitations \
                 in the ultrastrong coupling regime"
            )
        })
    }

    pub fn space(&self) -> Result<CompositeSpace> {
        let boson = SubsystemKind::Boson(self.fock_dim);
        match self.kind {
            SystemKind::QubitQubit => CompositeSpace::new(SubsystemKind::Qubit, SubsystemKind::Qubit),
            SystemKind::OscOsc => CompositeSpace::new(boson, boson),
            SystemKind::QubitOsc => CompositeSpace::new(SubsystemKind::Qubit, boson),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NbarMapping {
    /// `N = 1 / (exp(omega / T) - 1)`.
    Bose,
    /// `N = T / omega`.
    Direct,
}

impl fmt::Display for NbarMapping {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NbarMapping::Bose => "bose",
            NbarMapping::Direct => "direct",
        })
    }
}

impl FromStr for NbarMapping {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "bose" => Ok(NbarMapping::Bose),
            "direct" => Ok(NbarMapping::Direct),
            other => Err(Error::InvalidParameter {
                name: "nbar",
                reason: format!("expected bose or direct, got `{other}`"),
            }),
        }
    }
}

/// Bath rates and temperature. `gamma` damps slot one, `kappa` slot two.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BathSpec {
    pub gamma: f64,
    pub kappa: f64,
    /// Temperature in frequency units (`k_B = hbar = 1`).
    pub temperature: f64,
    pub mapping: NbarMapping,
}

impl BathSpec {
    pub fn new(gamma: f64, kappa: f64, temperature: f64, mapping: NbarMapping) -> Result<Self> {
        let bath = Self {
            gamma,
            kappa,
            temperature,
            mapping,
        };
        bath.validate()?;
        Ok(bath)
    }

    /// `gamma = kappa = 0.01` at temperature `t`.
    pub fn weak(temperature: f64, mapping: NbarMapping) -> Self {
        Self {
            gamma: 0.01,
            kappa: 0.01,
            temperature,
            mapping,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("gamma", self.gamma), ("kappa", self.kappa), ("temperature", self.temperature)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("must be non-negative and finite, got {v}"),
                });
            }
        }
        Ok(())
    }
}

/// Mean thermal occupation of a bath mode at frequency `omega` and temperature `t`.
pub fn thermal_occupation(omega: f64, t: f64, mapping: NbarMapping) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    match mapping {
        NbarMapping::Bose => 1.0 / (omega / t).exp_m1(),
        NbarMapping::Direct => t / omega,
    }
}

/// One Lindblad term: a rate and an unscaled jump operator on the composite space.
#[derive(Debug, Clone, PartialEq)]
pub struct CollapseChannel {
    pub rate: f64,
    pub operator: OperatorMatrix,
}

impl CollapseChannel {
    pub fn new(rate: f64, operator: OperatorMatrix) -> Result<Self> {
        if !(rate.is_finite() && rate >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "rate",
                reason: format!("collapse rate must be non-negative, got {rate}"),
            });
        }
        Ok(Self { rate, operator })
    }
}

pub fn build_hamiltonian(spec: &SystemSpec) -> Result<OperatorMatrix> {
    spec.validate()?;
    let space = spec.space()?;
    let first = |op: &OperatorMatrix| lift(op, Slot::First, &space);
    let second = |op: &OperatorMatrix| lift(op, Slot::Second, &space);

    let bare = |slot: Slot, omega: f64| -> Result<OperatorMatrix> {
        let op = match space.kind(slot) {
            SubsystemKind::Qubit => sigma(Pauli::Z) * (0.5 * omega),
            SubsystemKind::Boson(_) => space.kind(slot).number_operator()? * omega,
        };
        lift(&op, slot, &space)
    };
    let free = bare(Slot::First, spec.omega1)? + bare(Slot::Second, spec.omega2)?;

    let lower1 = first(&space.first().lowering()?)?;
    let lower2 = second(&space.second().lowering()?)?;
    let raise1 = lower1.dagger();
    let raise2 = lower2.dagger();

    let interaction = if spec.rwa {
        // Excitation-conserving pair: raise one slot while lowering the other.
        raise1.matmul(&lower2)? + lower1.matmul(&raise2)?
    } else {
        // (sigma_x or a + a^dag) on each slot.
        (&lower1 + &raise1).matmul(&(&lower2 + &raise2))?
    };
    Ok(free + interaction * spec.g)
}

/// Thermal channels, in order: slot-one raising, slot-one lowering,
/// slot-two raising, slot-two lowering. Raising rates vanish at `T = 0`.
pub fn build_collapse_channels(spec: &SystemSpec, bath: &BathSpec) -> Result<Vec<CollapseChannel>> {
    spec.validate()?;
    bath.validate()?;
    let space = spec.space()?;
    let mut channels = Vec::with_capacity(4);
    for (slot, rate, omega) in [
        (Slot::First, bath.gamma, spec.omega1),
        (Slot::Second, bath.kappa, spec.omega2),
    ] {
        let n = thermal_occupation(omega, bath.temperature, bath.mapping);
        let lower = lift(&space.kind(slot).lowering()?, slot, &space)?;
        channels.push(CollapseChannel::new(rate * n, lower.dagger())?);
        channels.push(CollapseChannel::new(rate * (n + 1.0), lower)?);
    }
    Ok(channels)
}
