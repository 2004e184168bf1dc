//! Fixed-step RK4 integration of the master equation and observable recording.

use crate::algebra::{Complex, OperatorMatrix, SparseOperator, ZERO};
use crate::error::{Error, Result};
use crate::liouvillian::{Generator, HermitianWork};
use crate::models::{BathSpec, SystemKind, SystemSpec};
use crate::operators::{ground_state, lift, Slot};
use crate::state::{check_state, min_eigenvalue_at_least, DensityMatrix};

pub const DEFAULT_DT: f64 = 0.01;
pub const DEFAULT_T_MAX: f64 = 50.0;

/// Largest tolerated `|Im tr(O rho)|`.
pub const EXPECT_IMAG_TOL: f64 = 1e-8;
/// Trace drift beyond this (or an eigenvalue below its negative) aborts integration.
pub const DIVERGENCE_TOL: f64 = 1e-6;
/// Trace drift below this is left alone; between this and [`DIVERGENCE_TOL`] it is renormalised.
pub const RENORMALIZE_FLOOR: f64 = 1e-12;
const INITIAL_STATE_TOL: f64 = 1e-10;

/// Uniform time grid `t_start, t_start + dt, .., t_end`. Samples are recorded
/// every `sample_stride` steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    t_start: f64,
    t_end: f64,
    steps: usize,
    sample_stride: usize,
}

impl TimeGrid {
    pub fn new(t_start: f64, t_end: f64, dt: f64) -> Result<Self> {
        if !(t_start.is_finite() && t_end.is_finite() && t_end > t_start) {
            return Err(Error::InvalidParameter {
                name: "t_end",
                reason: format!("need t_end > t_start, got [{t_start}, {t_end}]"),
            });
        }
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidParameter {
                name: "dt",
                reason: format!("step must be positive, got {dt}"),
            });
        }
        let span = t_end - t_start;
        let steps = (span / dt).round();
        if steps < 1.0 || (steps * dt - span).abs() > 1e-9 * span.max(1.0) {
            return Err(Error::InvalidParameter {
                name: "dt",
                reason: format!("dt = {dt} does not divide the interval length {span}"),
            });
        }
        Ok(Self {
            t_start,
            t_end,
            steps: steps as usize,
            sample_stride: 1,
        })
    }

    /// `[0, 50]` with `dt = 0.01`.
    pub fn standard() -> Self {
        Self::new(0.0, DEFAULT_T_MAX, DEFAULT_DT).expect("standard grid is valid")
    }

    /// Records a sample every `stride` steps; `stride` must divide the step count.
    pub fn with_sample_stride(self, stride: usize) -> Result<Self> {
        if stride == 0 || !self.steps.is_multiple_of(stride) {
            return Err(Error::InvalidParameter {
                name: "sample_stride",
                reason: format!("{stride} does not divide {} steps", self.steps),
            });
        }
        Ok(Self {
            sample_stride: stride,
            ..self
        })
    }

    pub fn t_start(&self) -> f64 {
        self.t_start
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn dt(&self) -> f64 {
        (self.t_end - self.t_start) / self.steps as f64
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn sample_stride(&self) -> usize {
        self.sample_stride
    }

    pub fn sample_count(&self) -> usize {
        self.steps / self.sample_stride + 1
    }

    pub fn time_at_step(&self, step: usize) -> f64 {
        if step == self.steps {
            self.t_end
        } else {
            self.t_start + step as f64 * self.dt()
        }
    }

    pub fn sample_times(&self) -> Vec<f64> {
        (0..=self.steps)
            .step_by(self.sample_stride)
            .map(|s| self.time_at_step(s))
            .collect()
    }
}

/// A named operator whose expectation value is recorded.
#[derive(Debug, Clone)]
pub struct Observable {
    name: String,
    operator: OperatorMatrix,
    sparse: SparseOperator,
}

impl Observable {
    pub fn new(name: impl Into<String>, operator: OperatorMatrix) -> Self {
        let sparse = SparseOperator::from_dense(&operator);
        Self {
            name: name.into(),
            operator,
            sparse,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn operator(&self) -> &OperatorMatrix {
        &self.operator
    }

    fn trace_product(&self, rho: &[Complex]) -> Complex {
        let n = self.operator.dim();
        let mut s = ZERO;
        for i in 0..n {
            for (k, o) in self.sparse.row_entries(i) {
                s += o * rho[k * n + i];
            }
        }
        s
    }
}

/// `Re tr(O rho)`, failing if the imaginary part exceeds [`EXPECT_IMAG_TOL`].
pub fn expect(obs: &Observable, rho: &OperatorMatrix) -> Result<f64> {
    if obs.operator.dim() != rho.dim() {
        return Err(Error::DimensionMismatch {
            op: "expect",
            left: obs.operator.dim(),
            right: rho.dim(),
        });
    }
    real_expectation(obs, rho.as_slice())
}

fn real_expectation(obs: &Observable, rho: &[Complex]) -> Result<f64> {
    let v = obs.trace_product(rho);
    if v.im.abs() > EXPECT_IMAG_TOL || !v.re.is_finite() {
        return Err(Error::ComplexExpectation { imag: v.im });
    }
    Ok(v.re)
}

/// Occupation observables `n1`, `n2` of a system.
///
/// Qubit pairs: `<sigma+ sigma->` of each qubit. Oscillator pairs: `<a^dag a>`,
/// `<b^dag b>`. Qubit-oscillator: `n1` is the cavity `<a^dag a>` and `n2` the
/// qubit `<sigma+ sigma->`.
pub fn occupation_observables(spec: &SystemSpec) -> Result<Vec<Observable>> {
    let space = spec.space()?;
    let number = |slot: Slot| -> Result<OperatorMatrix> { lift(&space.kind(slot).number_operator()?, slot, &space) };
    let (n1, n2) = match spec.kind {
        SystemKind::QubitQubit | SystemKind::OscOsc => (number(Slot::First)?, number(Slot::Second)?),
        SystemKind::QubitOsc => (number(Slot::Second)?, number(Slot::First)?),
    };
    Ok(vec![Observable::new("n1", n1), Observable::new("n2", n2)])
}

/// Time series of observable expectations.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub names: Vec<String>,
    /// `values[k][s]` is observable `k` at sample `s`.
    pub values: Vec<Vec<f64>>,
    /// Parameter echo as ordered key/value pairs.
    pub metadata: Vec<(String, String)>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn series(&self, name: &str) -> Option<&[f64]> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|k| self.values[k].as_slice())
    }

    pub fn last(&self, name: &str) -> Option<f64> {
        self.series(name).and_then(|s| s.last().copied())
    }

    /// Largest absolute difference over all shared samples and observables.
    pub fn max_deviation(&self, other: &Trajectory) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max)
    }
}

/// Integrates `rho0` over `grid` and records `observables` at every sample.
pub fn integrate(gen: &Generator, rho0: &DensityMatrix, grid: &TimeGrid, observables: &[Observable]) -> Result<Trajectory> {
    integrate_observed(gen, rho0, grid, observables, |_, _| {})
}

/// As [`integrate`], also handing every sampled state to `on_sample`.
pub fn integrate_observed(
    gen: &Generator,
    rho0: &DensityMatrix,
    grid: &TimeGrid,
    observables: &[Observable],
    mut on_sample: impl FnMut(f64, &OperatorMatrix),
) -> Result<Trajectory> {
    let n = gen.dim();
    if rho0.dim() != n {
        return Err(Error::DimensionMismatch {
            op: "integrate",
            left: n,
            right: rho0.dim(),
        });
    }
    if let Some(obs) = observables.iter().find(|o| o.operator.dim() != n) {
        return Err(Error::DimensionMismatch {
            op: "integrate observable",
            left: n,
            right: obs.operator.dim(),
        });
    }
    check_state(rho0, INITIAL_STATE_TOL)?;

    let dt = grid.dt();
    // Cholesky positivity costs ~D^3/6 against ~60 D^2 per step, so large
    // systems certify positivity on a subset of samples.
    let positivity_stride = (n / 16).max(1);

    let mut rho = rho0.as_operator().clone();
    let mut stepper = Rk4::new(n);
    let mut traj = Trajectory {
        times: Vec::with_capacity(grid.sample_count()),
        names: observables.iter().map(|o| o.name.clone()).collect(),
        values: vec![Vec::with_capacity(grid.sample_count()); observables.len()],
        metadata: Vec::new(),
    };

    let mut sample_index = 0usize;
    let mut record = |step: usize, rho: &OperatorMatrix, traj: &mut Trajectory| -> Result<()> {
        let t = grid.time_at_step(step);
        let check_positivity = sample_index.is_multiple_of(positivity_stride) || step == grid.steps();
        if check_positivity && !min_eigenvalue_at_least(rho, -DIVERGENCE_TOL)? {
            return Err(Error::Diverged {
                time: t,
                reason: format!("state has an eigenvalue below -{DIVERGENCE_TOL:e}"),
            });
        }
        sample_index += 1;
        traj.times.push(t);
        for (obs, series) in observables.iter().zip(traj.values.iter_mut()) {
            let v = real_expectation(obs, rho.as_slice()).map_err(|e| Error::Diverged {
                time: t,
                reason: e.to_string(),
            })?;
            series.push(v);
        }
        on_sample(t, rho);
        Ok(())
    };

    record(0, &rho, &mut traj)?;
    for step in 1..=grid.steps() {
        stepper.step(gen, &mut rho, dt);
        rho.hermitize();
        let t = grid.time_at_step(step);
        let tr = rho.trace();
        let drift = (tr.re - 1.0).abs();
        if !(drift <= DIVERGENCE_TOL) || !tr.is_finite() {
            return Err(Error::Diverged {
                time: t,
                reason: format!("trace drifted to {}", tr.re),
            });
        }
        if drift > RENORMALIZE_FLOOR {
            let inv = 1.0 / tr.re;
            rho.as_mut_slice().iter_mut().for_each(|z| *z *= inv);
        }
        if step % grid.sample_stride() == 0 {
            record(step, &rho, &mut traj)?;
        }
    }
    Ok(traj)
}

struct Rk4 {
    k: Vec<Complex>,
    acc: Vec<Complex>,
    stage: Vec<Complex>,
    work: HermitianWork,
}

impl Rk4 {
    fn new(dim: usize) -> Self {
        Self {
            k: vec![ZERO; dim * dim],
            acc: vec![ZERO; dim * dim],
            stage: vec![ZERO; dim * dim],
            work: HermitianWork::new(dim),
        }
    }

    fn step(&mut self, gen: &Generator, rho: &mut OperatorMatrix, dt: f64) {
        let r = rho.as_slice();
        gen.apply_hermitian_into(r, &mut self.k, &mut self.work);
        for ((a, s), (&x, &k)) in self.acc.iter_mut().zip(self.stage.iter_mut()).zip(r.iter().zip(&self.k)) {
            *a = x + k * (dt / 6.0);
            *s = x + k * (dt / 2.0);
        }
        for (weight, advance) in [(dt / 3.0, dt / 2.0), (dt / 3.0, dt)] {
            gen.apply_hermitian_into(&self.stage, &mut self.k, &mut self.work);
            for ((a, s), (&x, &k)) in self.acc.iter_mut().zip(self.stage.iter_mut()).zip(r.iter().zip(&self.k)) {
                *a += k * weight;
                *s = x + k * advance;
            }
        }
        gen.apply_hermitian_into(&self.stage, &mut self.k, &mut self.work);
        for (a, &k) in self.acc.iter_mut().zip(&self.k) {
            *a += k * (dt / 6.0);
        }
        rho.as_mut_slice().swap_with_slice(&mut self.acc);
    }
}

/// Runs the configured system from the joint ground state and records `n1`, `n2`.
pub fn simulate(spec: &SystemSpec, bath: &BathSpec, grid: &TimeGrid) -> Result<Trajectory> {
    let gen = Generator::from_models(spec, bath)?;
    let rho0 = ground_state(&spec.space()?);
    let mut traj = integrate(&gen, &rho0, grid, &occupation_observables(spec)?)?;
    traj.metadata = parameter_echo(spec, bath, grid);
    Ok(traj)
}

pub fn parameter_echo(spec: &SystemSpec, bath: &BathSpec, grid: &TimeGrid) -> Vec<(String, String)> {
    let mut meta = vec![
        ("system".to_string(), spec.kind.to_string()),
        ("rwa".to_string(), spec.rwa.to_string()),
        ("omega1".to_string(), spec.omega1.to_string()),
        ("omega2".to_string(), spec.omega2.to_string()),
        ("g".to_string(), spec.g.to_string()),
    ];
    if spec.kind != SystemKind::QubitQubit {
        meta.push(("fock_dim".to_string(), spec.fock_dim.to_string()));
    }
    meta.extend([
        ("gamma".to_string(), bath.gamma.to_string()),
        ("kappa".to_string(), bath.kappa.to_string()),
        ("temperature".to_string(), bath.temperature.to_string()),
        ("nbar".to_string(), bath.mapping.to_string()),
        ("t_start".to_string(), grid.t_start().to_string()),
        ("t_max".to_string(), grid.t_end().to_string()),
        ("dt".to_string(), grid.dt().to_string()),
        ("initial_state".to_string(), "ground".to_string()),
    ]);
    meta
}

/// Largest deviation between trajectories at Fock truncations `d_low` and `d_high`.
pub fn convergence_probe(spec: &SystemSpec, bath: &BathSpec, grid: &TimeGrid, d_low: usize, d_high: usize) -> Result<f64> {
    if spec.kind == SystemKind::QubitQubit {
        return Err(Error::NotApplicable(
            "truncation convergence is not applicable to a qubit-qubit system (no boson slot)".into(),
        ));
    }
    if d_high <= d_low {
        return Err(Error::InvalidParameter {
            name: "d_high",
            reason: format!("need d_high > d_low, got {d_high} <= {d_low}"),
        });
    }
    let low = simulate(&spec.with_fock_dim(d_low), bath, grid)?;
    let high = simulate(&spec.with_fock_dim(d_high), bath, grid)?;
    Ok(low.max_deviation(&high))
}
