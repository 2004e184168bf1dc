use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use bipartite_lindblad::evolve::parameter_echo;
use bipartite_lindblad::validation::{run_oracle_suite, SuiteOptions, SuiteReport};
use bipartite_lindblad::{
    expect, occupation_observables, simulate, Generator, NbarMapping, SystemKind, TimeGrid, Trajectory,
};

use crate::config::ScenarioConfig;
use crate::error::{CliError, Result};
use crate::plot::{render_svg, Chart, Curve, LineStyle};
use crate::table::render_csv;

/// Largest composite dimension for which an explicit generator is built.
pub const STEADY_MAX_DIM: usize = 64;

/// One panel of the published figure set: a system at a bath temperature,
/// drawn with and without the rotating wave approximation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FigureId {
    QubitsCold,
    QubitsWarm,
    OscillatorsCold,
    OscillatorsWarm,
    MixedCold,
    MixedWarm,
}

impl FigureId {
    pub const ALL: [FigureId; 6] = [
        FigureId::QubitsCold,
        FigureId::QubitsWarm,
        FigureId::OscillatorsCold,
        FigureId::OscillatorsWarm,
        FigureId::MixedCold,
        FigureId::MixedWarm,
    ];

    pub fn label(self) -> &'static str {
        match self {
            FigureId::QubitsCold => "4a",
            FigureId::QubitsWarm => "4b",
            FigureId::OscillatorsCold => "5a",
            FigureId::OscillatorsWarm => "5b",
            FigureId::MixedCold => "6a",
            FigureId::MixedWarm => "6b",
        }
    }

    pub fn system(self) -> SystemKind {
        match self {
            FigureId::QubitsCold | FigureId::QubitsWarm => SystemKind::QubitQubit,
            FigureId::OscillatorsCold | FigureId::OscillatorsWarm => SystemKind::OscOsc,
            FigureId::MixedCold | FigureId::MixedWarm => SystemKind::QubitOsc,
        }
    }

    pub fn temperature(self) -> f64 {
        match self {
            FigureId::QubitsCold | FigureId::OscillatorsCold | FigureId::MixedCold => 0.0,
            _ => 2.0,
        }
    }

    /// Legend names of the two recorded observables.
    fn observable_labels(self) -> [&'static str; 2] {
        match self.system() {
            SystemKind::QubitQubit => ["qubit 1 <s+s->", "qubit 2 <s+s->"],
            SystemKind::OscOsc => ["oscillator a <a^dag a>", "oscillator b <b^dag b>"],
            SystemKind::QubitOsc => ["cavity <a^dag a>", "qubit <s+s->"],
        }
    }
}

impl fmt::Display for FigureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for FigureId {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().trim_start_matches("fig").to_ascii_lowercase();
        FigureId::ALL
            .into_iter()
            .find(|f| f.label() == s)
            .ok_or_else(|| CliError::Config(format!("unknown figure `{s}`, expected one of 4a 4b 5a 5b 6a 6b")))
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

fn csv_comments(cfg: &ScenarioConfig, traj: &Trajectory) -> Vec<(String, String)> {
    let mut comments = traj.metadata.clone();
    let observables = match cfg.system {
        SystemKind::QubitQubit => "n1 = <sigma+ sigma-> qubit 1, n2 = <sigma+ sigma-> qubit 2",
        SystemKind::OscOsc => "n1 = <a^dag a>, n2 = <b^dag b>",
        SystemKind::QubitOsc => "n1 = <a^dag a> cavity, n2 = <sigma+ sigma-> qubit",
    };
    comments.push(("observables".into(), observables.into()));
    comments
}

fn trajectory_curves(traj: &Trajectory, labels: [&str; 2], rwa: bool) -> Vec<Curve> {
    let (colors, styles) = if rwa {
        (["red", "black"], [LineStyle::Solid, LineStyle::DashDot])
    } else {
        (["blue", "green"], [LineStyle::Solid, LineStyle::Dashed])
    };
    let tag = if rwa { "RWA" } else { "full" };
    (0..2)
        .map(|k| Curve {
            label: format!("{} ({tag})", labels[k]),
            color: colors[k],
            style: styles[k],
            points: traj.times.iter().copied().zip(traj.values[k].iter().copied()).collect(),
        })
        .collect()
}

/// Warnings raised by a configuration that still allows the run.
fn emit_warnings(cfg: &ScenarioConfig, warn: &mut dyn Write) -> Result<()> {
    if let Some(w) = cfg.system_spec()?.validity_warning() {
        let _ = writeln!(warn, "warning: {w}");
    }
    Ok(())
}

/// Runs the configured scenario. Returns the CSV text; it is also written to
/// `cfg.out` when set, and an SVG is written to `cfg.svg` when set.
pub fn cmd_simulate(cfg: &ScenarioConfig, warn: &mut dyn Write) -> Result<String> {
    let (spec, bath, grid) = cfg.validate()?;
    emit_warnings(cfg, warn)?;
    let traj = simulate(&spec, &bath, &grid)?;
    let csv = render_csv(&traj, &csv_comments(cfg, &traj));
    if let Some(path) = &cfg.out {
        write_file(path, &csv)?;
    }
    if let Some(path) = &cfg.svg {
        let labels = match cfg.system {
            SystemKind::QubitQubit => ["n1 qubit 1", "n2 qubit 2"],
            SystemKind::OscOsc => ["n1 oscillator a", "n2 oscillator b"],
            SystemKind::QubitOsc => ["n1 cavity", "n2 qubit"],
        };
        let chart = Chart {
            title: format!("{} at T = {} ({} mapping)", cfg.system, cfg.temperature, cfg.nbar),
            x_label: "t".into(),
            y_label: "occupation".into(),
            curves: trajectory_curves(&traj, labels, cfg.rwa),
        };
        write_file(path, &render_svg(&chart))?;
    }
    Ok(csv)
}

/// Files written by [`cmd_reproduce`].
#[derive(Debug, Clone, PartialEq)]
pub struct ReproduceOutput {
    pub rwa_csv: PathBuf,
    pub full_csv: PathBuf,
    pub svg: PathBuf,
}

/// Published parameters for a panel, with the direct temperature mapping.
pub fn figure_config(figure: FigureId) -> ScenarioConfig {
    ScenarioConfig {
        system: figure.system(),
        temperature: figure.temperature(),
        ..ScenarioConfig::with_mapping(NbarMapping::Direct)
    }
}

pub fn cmd_reproduce(figure: FigureId, base: &ScenarioConfig, out_dir: &Path, warn: &mut dyn Write) -> Result<ReproduceOutput> {
    let rwa_cfg = ScenarioConfig {
        rwa: true,
        out: None,
        svg: None,
        ..base.clone()
    };
    let full_cfg = ScenarioConfig { rwa: false, ..rwa_cfg.clone() };
    let (rwa_spec, bath, grid) = rwa_cfg.validate()?;
    let (full_spec, _, _) = full_cfg.validate()?;
    emit_warnings(&full_cfg, warn)?;
    std::fs::create_dir_all(out_dir).map_err(|e| CliError::io(out_dir, e))?;

    let (rwa_traj, full_traj) = std::thread::scope(|s| {
        let rwa = s.spawn(|| simulate(&rwa_spec, &bath, &grid));
        let full = simulate(&full_spec, &bath, &grid);
        (rwa.join().expect("rwa simulation thread panicked"), full)
    });
    let (rwa_traj, full_traj) = (rwa_traj?, full_traj?);

    let stem = format!("fig{}", figure.label());
    let out = ReproduceOutput {
        rwa_csv: out_dir.join(format!("{stem}_rwa.csv")),
        full_csv: out_dir.join(format!("{stem}_full.csv")),
        svg: out_dir.join(format!("{stem}.svg")),
    };
    let mut rwa_comments = csv_comments(&rwa_cfg, &rwa_traj);
    let mut full_comments = csv_comments(&full_cfg, &full_traj);
    rwa_comments.insert(0, ("figure".into(), figure.label().into()));
    full_comments.insert(0, ("figure".into(), figure.label().into()));
    write_file(&out.rwa_csv, &render_csv(&rwa_traj, &rwa_comments))?;
    write_file(&out.full_csv, &render_csv(&full_traj, &full_comments))?;

    let labels = figure.observable_labels();
    let mut curves = trajectory_curves(&rwa_traj, labels, true);
    curves.extend(trajectory_curves(&full_traj, labels, false));
    let chart = Chart {
        title: format!(
            "Figure {}: {} at T = {} ({} mapping)",
            figure.label(),
            figure.system(),
            base.temperature,
            base.nbar
        ),
        x_label: "t".into(),
        y_label: "occupation".into(),
        curves,
    };
    write_file(&out.svg, &render_svg(&chart))?;
    Ok(out)
}

/// Largest Fock truncation keeping the composite dimension within [`STEADY_MAX_DIM`].
pub fn steady_fock_cap(system: SystemKind) -> Option<usize> {
    match system {
        SystemKind::QubitQubit => None,
        SystemKind::QubitOsc => Some(STEADY_MAX_DIM / 2),
        SystemKind::OscOsc => Some((STEADY_MAX_DIM as f64).sqrt() as usize),
    }
}

fn steady_value(x: f64) -> String {
    let x = if x.abs() < 5e-10 { 0.0 } else { x };
    format!("{x:.9}")
}

/// Steady-state occupations as `key = value` text.
pub fn cmd_steady(cfg: &ScenarioConfig, warn: &mut dyn Write) -> Result<String> {
    let mut cfg = cfg.clone();
    if let Some(cap) = steady_fock_cap(cfg.system) {
        if cfg.fock_dim > cap {
            let _ = writeln!(
                warn,
                "warning: fock_dim {} reduced to {cap} so that the explicit generator stays within dimension {STEADY_MAX_DIM}",
                cfg.fock_dim
            );
            cfg.fock_dim = cap;
        }
    }
    let spec = cfg.system_spec()?;
    let bath = cfg.bath_spec()?;
    emit_warnings(&cfg, warn)?;
    let rho = Generator::from_models(&spec, &bath)?.steady_state()?;
    let mut out = format!("# {} {}\n", crate::table::TOOL_NAME, crate::table::TOOL_VERSION);
    for (k, v) in parameter_echo(&spec, &bath, &TimeGrid::standard())
        .into_iter()
        .filter(|(k, _)| !matches!(k.as_str(), "t_start" | "t_max" | "dt" | "initial_state"))
    {
        out.push_str(&format!("# {k} = {v}\n"));
    }
    for obs in occupation_observables(&spec)? {
        out.push_str(&format!("{} = {}\n", obs.name(), steady_value(expect(&obs, &rho)?)));
    }
    out.push_str(&format!("purity = {}\n", steady_value(rho.purity())));
    if let Some(path) = &cfg.out {
        write_file(path, &out)?;
    }
    Ok(out)
}

/// Runs the oracle suite; fails when any check fails.
pub fn cmd_validate(dt: Option<f64>) -> (SuiteReport, Result<()>) {
    let mut opts = SuiteOptions::default();
    if let Some(dt) = dt {
        opts.dt = dt;
    }
    let report = run_oracle_suite(&opts);
    let status = if report.all_passed() {
        Ok(())
    } else {
        let failed: Vec<&str> = report.failures().map(|c| c.name.as_str()).collect();
        Err(CliError::ValidationFailed(format!("{} check(s) failed: {}", failed.len(), failed.join(", "))))
    };
    (report, status)
}
