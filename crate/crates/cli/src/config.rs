//! Scenario configuration: defaults, flat `key = value` files, and flags.
//!
//! Layering is defaults, then the config file, then command-line flags.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use bipartite_lindblad::models::DEFAULT_FOCK_DIM;
use bipartite_lindblad::{BathSpec, NbarMapping, SystemKind, SystemSpec, TimeGrid};
use clap::Args;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialState {
    /// Both subsystems in their ground state.
    Ground,
}

impl fmt::Display for InitialState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("ground")
    }
}

impl FromStr for InitialState {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "ground" => Ok(InitialState::Ground),
            other => Err(CliError::Config(format!("initial_state: only `ground` is supported, got `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub system: SystemKind,
    pub rwa: bool,
    pub omega1: f64,
    pub omega2: f64,
    pub g: f64,
    pub gamma: f64,
    pub kappa: f64,
    pub temperature: f64,
    pub nbar: NbarMapping,
    pub fock_dim: usize,
    pub t_max: f64,
    pub dt: f64,
    pub initial_state: InitialState,
    pub out: Option<PathBuf>,
    pub svg: Option<PathBuf>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            system: SystemKind::QubitQubit,
            rwa: false,
            omega1: 1.0,
            omega2: 1.0,
            g: 0.2,
            gamma: 0.01,
            kappa: 0.01,
            temperature: 0.0,
            nbar: NbarMapping::Bose,
            fock_dim: DEFAULT_FOCK_DIM,
            t_max: 50.0,
            dt: 0.01,
            initial_state: InitialState::Ground,
            out: None,
            svg: None,
        }
    }
}

/// Scenario flags shared by `simulate` and `steady`.
#[derive(Debug, Clone, Default, Args)]
pub struct ScenarioArgs {
    /// Flat `key = value` file; flags given on the command line win.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// qq, oo or qo.
    #[arg(long)]
    pub system: Option<String>,
    /// Use the rotating wave approximation (`--rwa false` to override a config file).
    #[arg(long, num_args = 0..=1, default_missing_value = "true", value_name = "BOOL")]
    pub rwa: Option<bool>,
    /// Bath temperature in frequency units.
    #[arg(long = "temp")]
    pub temperature: Option<f64>,
    #[arg(long)]
    pub g: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub kappa: Option<f64>,
    #[arg(long)]
    pub omega1: Option<f64>,
    #[arg(long)]
    pub omega2: Option<f64>,
    #[arg(long = "fock-dim")]
    pub fock_dim: Option<usize>,
    #[arg(long = "tmax")]
    pub t_max: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    /// bose or direct.
    #[arg(long)]
    pub nbar: Option<String>,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, value_name = "PATH")]
    pub svg: Option<PathBuf>,
}

fn parse_number<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| CliError::Config(format!("{key}: cannot parse `{}`", value.trim())))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.trim().to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        other => Err(CliError::Config(format!("{key}: expected true or false, got `{other}`"))),
    }
}

impl ScenarioConfig {
    pub fn with_mapping(nbar: NbarMapping) -> Self {
        Self {
            nbar,
            ..Self::default()
        }
    }

    /// Defaults, then `args.config` if given, then the remaining flags.
    pub fn resolve(args: &ScenarioArgs, default_mapping: NbarMapping) -> Result<Self> {
        let mut cfg = Self::with_mapping(default_mapping);
        if let Some(path) = &args.config {
            cfg.apply_file(path)?;
        }
        cfg.apply_args(args)?;
        Ok(cfg)
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        self.apply_text(&text)
            .map_err(|e| CliError::Config(format!("{}: {}", path.display(), e.message())))
    }

    /// Applies `key = value` lines. Blank lines and `#` comments are skipped.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {}: expected `key = value`", lineno + 1)))?;
            self.set(key.trim(), value.trim())
                .map_err(|e| CliError::Config(format!("line {}: {}", lineno + 1, e.message())))?;
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key.replace('-', "_").as_str() {
            "system" => self.system = value.parse().map_err(|e: bipartite_lindblad::Error| CliError::Config(e.to_string()))?,
            "rwa" => self.rwa = parse_bool(key, value)?,
            "omega1" => self.omega1 = parse_number(key, value)?,
            "omega2" => self.omega2 = parse_number(key, value)?,
            "g" => self.g = parse_number(key, value)?,
            "gamma" => self.gamma = parse_number(key, value)?,
            "kappa" => self.kappa = parse_number(key, value)?,
            "temp" | "temperature" => self.temperature = parse_number(key, value)?,
            "nbar" | "nbar_mapping" => {
                self.nbar = value.parse().map_err(|e: bipartite_lindblad::Error| CliError::Config(e.to_string()))?
            }
            "fock_dim" => self.fock_dim = parse_number(key, value)?,
            "tmax" | "t_max" => self.t_max = parse_number(key, value)?,
            "dt" => self.dt = parse_number(key, value)?,
            "initial_state" => self.initial_state = value.parse()?,
            "out" => self.out = Some(PathBuf::from(value)),
            "svg" => self.svg = Some(PathBuf::from(value)),
            other => return Err(CliError::Config(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    pub fn apply_args(&mut self, args: &ScenarioArgs) -> Result<()> {
        if let Some(s) = &args.system {
            self.set("system", s)?;
        }
        if let Some(s) = &args.nbar {
            self.set("nbar", s)?;
        }
        if let Some(v) = args.rwa {
            self.rwa = v;
        }
        macro_rules! take {
            ($($field:ident),*) => {
                $(if let Some(v) = args.$field { self.$field = v; })*
            };
        }
        take!(temperature, g, gamma, kappa, omega1, omega2, fock_dim, t_max, dt);
        if let Some(p) = &args.out {
            self.out = Some(p.clone());
        }
        if let Some(p) = &args.svg {
            self.svg = Some(p.clone());
        }
        Ok(())
    }

    pub fn system_spec(&self) -> Result<SystemSpec> {
        Ok(SystemSpec::new(self.system, self.omega1, self.omega2, self.g, self.rwa, self.fock_dim)?)
    }

    pub fn bath_spec(&self) -> Result<BathSpec> {
        Ok(BathSpec::new(self.gamma, self.kappa, self.temperature, self.nbar)?)
    }

    pub fn time_grid(&self) -> Result<TimeGrid> {
        Ok(TimeGrid::new(0.0, self.t_max, self.dt)?)
    }

    /// Checks every parameter before any computation starts.
    pub fn validate(&self) -> Result<(SystemSpec, BathSpec, TimeGrid)> {
        let spec = self.system_spec()?;
        let bath = self.bath_spec()?;
        let grid = self.time_grid()?;
        Ok((spec, bath, grid))
    }
}

impl CliError {
    fn message(&self) -> String {
        match self {
            CliError::Config(m) => m.clone(),
            other => other.to_string(),
        }
    }
}
