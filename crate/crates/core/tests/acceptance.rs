//! Acceptance gate. Each test prints exactly one `PASS`/`FAIL` line to
//! stderr (bypassing output capture) and then asserts its outcome.

use std::collections::HashMap;
use std::io::Write;
use std::sync::{Mutex, OnceLock};

use bipartite_lindblad::algebra::{is_positive_semidefinite, min_eigenvalue};
use bipartite_lindblad::models::thermal_occupation;
use bipartite_lindblad::operators::{basis_state, ground_state, total_excitation};
use bipartite_lindblad::validation::{damped_oscillator_oracle, damped_qubit_oracle, vacuum_rabi_oracle};
use bipartite_lindblad::{
    build_hamiltonian, expect, integrate, integrate_observed, occupation_observables, BathSpec, Generator,
    NbarMapping, SystemKind, SystemSpec, TimeGrid, Trajectory,
};

const TRACE_TOL: f64 = 1e-8;
const HERMITICITY_TOL: f64 = 1e-10;
const MIN_EIGENVALUE: f64 = -1e-8;

fn report(name: &str, passed: bool, detail: &str) {
    let verdict = if passed { "PASS" } else { "FAIL" };
    let mut err = std::io::stderr().lock();
    let _ = writeln!(err, "{verdict} {name}: {detail}");
}

/// A scenario run from the joint ground state with per-sample state checks.
struct Run {
    traj: Trajectory,
    max_trace_error: f64,
    max_hermiticity_error: f64,
    /// Smallest eigenvalue seen, when the dimension allows a full eigen solve.
    min_eigenvalue: Option<f64>,
    positivity_violations: usize,
}

/// Large systems record every tenth step so that each recorded state can be
/// certified positive semidefinite.
fn scenario_grid(dim: usize) -> TimeGrid {
    let stride = if dim > 64 { 10 } else { 1 };
    TimeGrid::standard().with_sample_stride(stride).unwrap()
}

fn scenario(kind: SystemKind, rwa: bool, temperature: f64, mapping: NbarMapping, fock_dim: usize) -> &'static Run {
    static CACHE: OnceLock<Mutex<HashMap<String, &'static Run>>> = OnceLock::new();
    let key = format!("{kind}/{rwa}/{temperature}/{mapping}/{fock_dim}");
    let mut cache = CACHE.get_or_init(Default::default).lock().unwrap_or_else(|e| e.into_inner());
    if let Some(run) = cache.get(&key) {
        return run;
    }
    let spec = SystemSpec::resonant(kind, rwa).with_fock_dim(fock_dim);
    let bath = BathSpec::weak(temperature, mapping);
    let gen = Generator::from_models(&spec, &bath).unwrap();
    let dim = gen.dim();
    let mut max_trace_error = 0.0f64;
    let mut max_hermiticity_error = 0.0f64;
    let mut min_eig: Option<f64> = None;
    let mut positivity_violations = 0;
    let traj = integrate_observed(
        &gen,
        &ground_state(&spec.space().unwrap()),
        &scenario_grid(dim),
        &occupation_observables(&spec).unwrap(),
        |_, rho| {
            max_trace_error = max_trace_error.max((rho.trace() - 1.0).norm());
            max_hermiticity_error = max_hermiticity_error.max(rho.hermiticity_error());
            if dim <= 64 {
                let m = min_eigenvalue(rho).unwrap();
                min_eig = Some(min_eig.map_or(m, |x| x.min(m)));
                if m < MIN_EIGENVALUE {
                    positivity_violations += 1;
                }
            } else if !is_positive_semidefinite(rho, -MIN_EIGENVALUE) {
                positivity_violations += 1;
            }
        },
    )
    .unwrap();
    let run: &'static Run = Box::leak(Box::new(Run {
        traj,
        max_trace_error,
        max_hermiticity_error,
        min_eigenvalue: min_eig,
        positivity_violations,
    }));
    cache.insert(key, run);
    run
}

fn figure_run(kind: SystemKind, rwa: bool, temperature: f64) -> &'static Run {
    scenario(kind, rwa, temperature, NbarMapping::Direct, 20)
}

fn series<'a>(run: &'a Run, name: &str) -> &'a [f64] {
    run.traj.series(name).unwrap()
}

fn value_at(run: &Run, name: &str, t: f64) -> f64 {
    let idx = run.traj.times.iter().position(|&s| (s - t).abs() < 1e-9).unwrap();
    series(run, name)[idx]
}

fn steady_values(spec: &SystemSpec, bath: &BathSpec) -> Vec<f64> {
    let ss = Generator::from_models(spec, bath).unwrap().steady_state().unwrap();
    occupation_observables(spec)
        .unwrap()
        .iter()
        .map(|o| expect(o, &ss).unwrap())
        .collect()
}

#[test]
fn cptp_suite() {
    let mut worst = (0.0f64, 0.0f64, f64::INFINITY);
    let mut violations = 0;
    let mut scenarios = 0;
    for kind in SystemKind::ALL {
        for rwa in [true, false] {
            for temperature in [0.0, 2.0] {
                let run = figure_run(kind, rwa, temperature);
                worst.0 = worst.0.max(run.max_trace_error);
                worst.1 = worst.1.max(run.max_hermiticity_error);
                if let Some(m) = run.min_eigenvalue {
                    worst.2 = worst.2.min(m);
                }
                if run.max_trace_error > TRACE_TOL || run.max_hermiticity_error > HERMITICITY_TOL {
                    violations += 1;
                }
                violations += run.positivity_violations;
                scenarios += 1;
            }
        }
    }
    let passed = violations == 0;
    report(
        "cptp_suite",
        passed,
        &format!(
            "{scenarios} scenarios, max |tr-1| = {:.2e}, max hermiticity error = {:.2e}, min eigenvalue (D<=64) = {:.2e}, \
             Cholesky certified >= -1e-8 for D > 64; {violations} violations",
            worst.0, worst.1, worst.2
        ),
    );
    assert!(passed);
}

#[test]
fn oracle_equivalence() {
    let grid = TimeGrid::standard();
    let mut worst = 0.0f64;
    for mapping in [NbarMapping::Direct, NbarMapping::Bose] {
        // g = 0 decouples the subsystems; each follows its own thermal closed form.
        let spec = SystemSpec::resonant(SystemKind::QubitOsc, false).with_g(0.0);
        let bath = BathSpec::weak(2.0, mapping);
        let gen = Generator::from_models(&spec, &bath).unwrap();
        let traj = integrate(
            &gen,
            &ground_state(&spec.space().unwrap()),
            &grid,
            &occupation_observables(&spec).unwrap(),
        )
        .unwrap();
        let n_cavity = thermal_occupation(spec.omega2, 2.0, mapping);
        let n_qubit = thermal_occupation(spec.omega1, 2.0, mapping);
        for (i, &t) in traj.times.iter().enumerate() {
            let cavity = damped_oscillator_oracle(t, bath.kappa, n_cavity, 0.0);
            let qubit = damped_qubit_oracle(t, bath.gamma, n_qubit, 0.0);
            worst = worst.max((traj.values[0][i] - cavity).abs());
            worst = worst.max((traj.values[1][i] - qubit).abs());
        }
    }
    let thermal = worst;

    let spec = SystemSpec::resonant(SystemKind::QubitOsc, true);
    let closed = BathSpec::new(0.0, 0.0, 0.0, NbarMapping::Direct).unwrap();
    let gen = Generator::from_models(&spec, &closed).unwrap();
    // |e, 0>: qubit excited (index 0), cavity empty.
    let traj = integrate(
        &gen,
        &basis_state(&spec.space().unwrap(), 0, 0),
        &grid,
        &occupation_observables(&spec).unwrap(),
    )
    .unwrap();
    let rabi = traj
        .times
        .iter()
        .zip(traj.series("n2").unwrap())
        .map(|(&t, &p)| (p - vacuum_rabi_oracle(t, spec.g)).abs())
        .fold(0.0, f64::max);

    let passed = thermal <= 1e-6 && rabi <= 1e-6;
    report(
        "oracle_equivalence",
        passed,
        &format!("thermal qubit/oscillator max deviation {thermal:.2e}, vacuum Rabi max deviation {rabi:.2e} (tol 1e-6)"),
    );
    assert!(passed);
}

#[test]
fn dark_state() {
    let mut rwa_max = 0.0f64;
    let mut full_min_peak = f64::INFINITY;
    for kind in SystemKind::ALL {
        let rwa = figure_run(kind, true, 0.0);
        let full = figure_run(kind, false, 0.0);
        for name in ["n1", "n2"] {
            rwa_max = rwa_max.max(series(rwa, name).iter().cloned().fold(0.0, f64::max));
            full_min_peak = full_min_peak.min(series(full, name).iter().cloned().fold(0.0, f64::max));
        }
    }
    let passed = rwa_max <= 1e-10 && full_min_peak > 1e-3;
    report(
        "dark_state",
        passed,
        &format!("RWA max occupation {rwa_max:.2e} (<= 1e-10), smallest full-Hamiltonian peak {full_min_peak:.4e} (> 1e-3)"),
    );
    assert!(passed);
}

#[test]
fn rwa_conservation() {
    let mut rwa_worst = 0.0f64;
    let mut full_weakest = f64::INFINITY;
    let mut g = 0.0;
    for kind in SystemKind::ALL {
        for rwa in [true, false] {
            let spec = SystemSpec::resonant(kind, rwa);
            g = spec.g;
            let n_tot = total_excitation(&spec.space().unwrap()).unwrap();
            let norm = build_hamiltonian(&spec).unwrap().commutator(&n_tot).unwrap().max_abs();
            if rwa {
                rwa_worst = rwa_worst.max(norm);
            } else {
                full_weakest = full_weakest.min(norm);
            }
        }
    }
    let passed = rwa_worst <= 1e-13 && full_weakest >= g;
    report(
        "rwa_conservation",
        passed,
        &format!("max ||[H_rwa, N]|| = {rwa_worst:.2e} (<= 1e-13), min ||[H_full, N]|| = {full_weakest:.3} (>= g = {g})"),
    );
    assert!(passed);
}

#[test]
fn steady_state_consistency() {
    let long = TimeGrid::new(0.0, 500.0, 0.01).unwrap();
    let long = long.with_sample_stride(long.steps()).unwrap();
    let mut worst = 0.0f64;
    let mut failing = Vec::new();
    let mut cases = 0;
    for (kind, fock_dim) in [(SystemKind::QubitQubit, 2), (SystemKind::QubitOsc, 8), (SystemKind::OscOsc, 8)] {
        for rwa in [true, false] {
            for temperature in [0.0, 2.0] {
                // At T = 0 both mappings give N = 0 and the same generator.
                let mappings: &[NbarMapping] = if temperature == 0.0 {
                    &[NbarMapping::Direct]
                } else {
                    &[NbarMapping::Direct, NbarMapping::Bose]
                };
                for &mapping in mappings {
                    let spec = SystemSpec::resonant(kind, rwa).with_fock_dim(fock_dim);
                    let bath = BathSpec::weak(temperature, mapping);
                    let steady = steady_values(&spec, &bath);
                    let gen = Generator::from_models(&spec, &bath).unwrap();
                    let traj = integrate(
                        &gen,
                        &ground_state(&spec.space().unwrap()),
                        &long,
                        &occupation_observables(&spec).unwrap(),
                    )
                    .unwrap();
                    let dev = steady
                        .iter()
                        .zip(&traj.values)
                        .map(|(s, v)| (s - v[v.len() - 1]).abs())
                        .fold(0.0, f64::max);
                    worst = worst.max(dev);
                    cases += 1;
                    if dev > 1e-4 {
                        let h = if rwa { "rwa" } else { "full" };
                        failing.push(format!("{kind}/{h}/T={temperature}/{mapping}: {dev:.2e}"));
                    }
                }
            }
        }
    }
    let passed = failing.is_empty();
    report(
        "steady_state_consistency",
        passed,
        &format!(
            "{cases} cases, max |steady - integrated(t=500)| = {worst:.2e} (tol 1e-4); over tolerance: [{}]",
            failing.join(", ")
        ),
    );
    assert!(passed);
}

#[test]
fn explicit_generator_trace() {
    let mut worst = 0.0f64;
    let mut count = 0;
    for (kind, dims) in [
        (SystemKind::QubitQubit, vec![2]),
        (SystemKind::QubitOsc, vec![6, 8, 20]),
        (SystemKind::OscOsc, vec![6, 8]),
    ] {
        for fock_dim in dims {
            for rwa in [true, false] {
                for (temperature, mapping) in [
                    (0.0, NbarMapping::Direct),
                    (2.0, NbarMapping::Direct),
                    (2.0, NbarMapping::Bose),
                ] {
                    let spec = SystemSpec::resonant(kind, rwa).with_fock_dim(fock_dim);
                    let gen = Generator::from_models(&spec, &BathSpec::weak(temperature, mapping)).unwrap();
                    worst = worst.max(gen.to_matrix().unwrap().trace_preservation_error());
                    count += 1;
                }
            }
        }
    }
    let passed = worst <= 1e-11;
    report(
        "explicit_generator_trace",
        passed,
        &format!("{count} generators with D <= 64, max ||vec(I)^dag L|| = {worst:.2e} (tol 1e-11)"),
    );
    assert!(passed);
}

#[test]
fn truncation_convergence() {
    let mut parts = Vec::new();
    let mut worst = 0.0f64;
    for kind in [SystemKind::QubitOsc, SystemKind::OscOsc] {
        for rwa in [true, false] {
            let low = figure_run(kind, rwa, 2.0);
            let high = scenario(kind, rwa, 2.0, NbarMapping::Direct, 25);
            let dev = low.traj.max_deviation(&high.traj);
            worst = worst.max(dev);
            let h = if rwa { "rwa" } else { "full" };
            parts.push(format!("{kind}/{h} {dev:.2e}"));
        }
    }
    let passed = worst <= 1e-3;
    report(
        "truncation_convergence",
        passed,
        &format!("T=2, fock_dim 20 vs 25: {} (tol 1e-3)", parts.join(", ")),
    );
    assert!(passed);
}

#[test]
fn qubit_pair_thermal_occupation() {
    let spec = SystemSpec::resonant(SystemKind::QubitQubit, false);
    let direct = steady_values(&spec, &BathSpec::weak(2.0, NbarMapping::Direct));
    let bose = steady_values(&spec, &BathSpec::weak(2.0, NbarMapping::Bose));
    let within = |v: &[f64]| v.iter().all(|x| (x - 0.45).abs() <= 0.10);
    let passed = within(&direct);
    let at_50 = value_at(figure_run(SystemKind::QubitQubit, false, 2.0), "n1", 50.0);
    report(
        "qubit_pair_thermal_occupation",
        passed,
        &format!(
            "steady n1 = {:.4}, n2 = {:.4} direct (0.45 +/- 0.10), bose {:.4} / {:.4} ({}); t=50 value {at_50:.4}",
            direct[0],
            direct[1],
            bose[0],
            bose[1],
            if within(&bose) { "in range" } else { "out of range" }
        ),
    );
    assert!(passed);
}

#[test]
fn oscillator_pair_vacuum_plateau() {
    // The explicit generator is capped at D = 64, so the steady state is
    // solved at fock_dim 8 and compared against fock_dim 6.
    let spec = SystemSpec::resonant(SystemKind::OscOsc, false);
    let bath = BathSpec::weak(0.0, NbarMapping::Direct);
    let d8 = steady_values(&spec.with_fock_dim(8), &bath);
    let d6 = steady_values(&spec.with_fock_dim(6), &bath);
    let run = figure_run(SystemKind::OscOsc, false, 0.0);
    let plateau = value_at(run, "n1", 50.0);
    let in_band = |v: f64| (v - 0.025).abs() <= 0.02 && v > 1e-3;
    let passed = d8.iter().all(|&v| in_band(v));
    report(
        "oscillator_pair_vacuum_plateau",
        passed,
        &format!(
            "steady n1 = {:.4}, n2 = {:.4} at fock_dim 8 (0.025 +/- 0.02, > 1e-3), fock_dim 6 gives {:.4}; \
             fock_dim 20 trajectory at t=50 gives {plateau:.4}; mapping-independent at T=0",
            d8[0], d8[1], d6[0]
        ),
    );
    assert!(passed);
}

#[test]
fn oscillator_pair_thermal_growth() {
    let direct = figure_run(SystemKind::OscOsc, false, 2.0);
    let bose = scenario(SystemKind::OscOsc, false, 2.0, NbarMapping::Bose, 20);
    let summarize = |run: &Run| {
        let n = series(run, "n1");
        let times = &run.traj.times;
        let k = n.len() - 1;
        let slope = (n[k] - n[k - 1]) / (times[k] - times[k - 1]);
        (n[k], slope)
    };
    let (value, slope) = summarize(direct);
    let (bose_value, bose_slope) = summarize(bose);
    let passed = (value - 0.85).abs() <= 0.15 && slope > 0.0;
    report(
        "oscillator_pair_thermal_growth",
        passed,
        &format!(
            "n(50) = {value:.4} direct (0.85 +/- 0.15), slope {slope:.2e} (> 0); bose n(50) = {bose_value:.4}, slope {bose_slope:.2e} ({})",
            if (bose_value - 0.85).abs() <= 0.15 && bose_slope > 0.0 { "in range" } else { "out of range" }
        ),
    );
    assert!(passed);
}

#[test]
fn qubit_oscillator_fast_relaxation() {
    let spec = SystemSpec::resonant(SystemKind::QubitOsc, false);
    let relative = |mapping: NbarMapping| {
        let steady = steady_values(&spec, &BathSpec::weak(2.0, mapping))[1];
        let at_20 = value_at(scenario(SystemKind::QubitOsc, false, 2.0, mapping, 20), "n2", 20.0);
        (at_20, steady, (at_20 - steady).abs() / steady)
    };
    let (v, s, r) = relative(NbarMapping::Direct);
    let (bv, bs, br) = relative(NbarMapping::Bose);
    let passed = r <= 0.15;
    report(
        "qubit_oscillator_fast_relaxation",
        passed,
        &format!(
            "qubit occupation at t=20 {v:.4} vs steady {s:.4}, relative deviation {:.1}% direct (tol 15%); \
             bose {bv:.4} vs {bs:.4}, {:.1}%",
            r * 100.0,
            br * 100.0
        ),
    );
    assert!(passed);
}

#[test]
fn qubit_oscillator_two_frequencies() {
    let run = figure_run(SystemKind::QubitOsc, false, 0.0);
    let x = series(run, "n2");
    let n = x.len();
    let mean = x.iter().sum::<f64>() / n as f64;
    let magnitudes: Vec<f64> = (0..=n / 2)
        .map(|k| {
            let (mut re, mut im) = (0.0, 0.0);
            for (j, v) in x.iter().enumerate() {
                let phase = -2.0 * std::f64::consts::PI * ((k * j) % n) as f64 / n as f64;
                re += (v - mean) * phase.cos();
                im += (v - mean) * phase.sin();
            }
            re.hypot(im)
        })
        .collect();
    let mut sorted = magnitudes[1..].to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let median = sorted[sorted.len() / 2];
    let dt = run.traj.times[1] - run.traj.times[0];
    // Bins 0 and 1 border the removed mean and are not counted as peaks.
    let peaks: Vec<(f64, f64)> = (2..magnitudes.len() - 1)
        .filter(|&k| {
            magnitudes[k] > magnitudes[k - 1] && magnitudes[k] > magnitudes[k + 1] && magnitudes[k] > 5.0 * median
        })
        .map(|k| (k as f64 / (n as f64 * dt), magnitudes[k] / median))
        .collect();
    let passed = peaks.len() >= 2;
    let listing: Vec<String> = peaks.iter().map(|(f, r)| format!("f={f:.4} ({r:.0}x median)")).collect();
    report(
        "qubit_oscillator_two_frequencies",
        passed,
        &format!("{} spectral maxima above 5x median: [{}]", peaks.len(), listing.join(", ")),
    );
    assert!(passed);
}

#[test]
fn subsystem_symmetry() {
    let mut worst = 0.0f64;
    let mut samples = 0;
    for kind in [SystemKind::QubitQubit, SystemKind::OscOsc] {
        for rwa in [true, false] {
            for temperature in [0.0, 2.0] {
                let run = figure_run(kind, rwa, temperature);
                for (a, b) in series(run, "n1").iter().zip(series(run, "n2")) {
                    worst = worst.max((a - b).abs());
                    samples += 1;
                }
            }
        }
    }
    let passed = worst <= 1e-9;
    report(
        "subsystem_symmetry",
        passed,
        &format!("{samples} samples over qq/oo runs, max |n1 - n2| = {worst:.2e} (tol 1e-9)"),
    );
    assert!(passed);
}
