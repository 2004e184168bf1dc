use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use bipartite_cli::{
    cmd_reproduce, cmd_simulate, cmd_steady, cmd_validate, figure_config, CliError, FigureId, ScenarioArgs,
    ScenarioConfig,
};
use bipartite_lindblad::NbarMapping;
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "bipartite", version, about = "Lindblad dynamics of bipartite quantum systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one scenario from the ground state and write n1, n2 as CSV.
    Simulate(ScenarioArgs),
    /// Regenerate a figure panel: RWA and full CSVs plus an SVG overlay.
    Reproduce {
        /// 4a, 4b, 5a, 5b, 6a or 6b.
        figure: String,
        /// Output directory.
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long)]
        nbar: Option<String>,
        #[arg(long = "fock-dim")]
        fock_dim: Option<usize>,
        #[arg(long = "tmax")]
        t_max: Option<f64>,
        #[arg(long)]
        dt: Option<f64>,
    },
    /// Print steady-state occupations from the null space of the generator.
    Steady(ScenarioArgs),
    /// Run the oracle and invariant suite.
    Validate {
        /// Step used by every integration-based check.
        #[arg(long)]
        dt: Option<f64>,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    let stdout = std::io::stdout();
    let mut stderr = std::io::stderr();
    match cli.command {
        Command::Simulate(args) => {
            let cfg = ScenarioConfig::resolve(&args, NbarMapping::Bose)?;
            let csv = cmd_simulate(&cfg, &mut stderr)?;
            if cfg.out.is_none() {
                let _ = stdout.lock().write_all(csv.as_bytes());
            }
        }
        Command::Reproduce {
            figure,
            out,
            nbar,
            fock_dim,
            t_max,
            dt,
        } => {
            let figure: FigureId = figure.parse()?;
            let mut cfg = figure_config(figure);
            if let Some(n) = nbar {
                cfg.set("nbar", &n)?;
            }
            cfg.fock_dim = fock_dim.unwrap_or(cfg.fock_dim);
            cfg.t_max = t_max.unwrap_or(cfg.t_max);
            cfg.dt = dt.unwrap_or(cfg.dt);
            let written = cmd_reproduce(figure, &cfg, &out, &mut stderr)?;
            let mut lock = stdout.lock();
            for path in [&written.rwa_csv, &written.full_csv, &written.svg] {
                let _ = writeln!(lock, "{}", path.display());
            }
        }
        Command::Steady(args) => {
            let cfg = ScenarioConfig::resolve(&args, NbarMapping::Bose)?;
            let text = cmd_steady(&cfg, &mut stderr)?;
            let _ = stdout.lock().write_all(text.as_bytes());
        }
        Command::Validate { dt } => {
            let (report, status) = cmd_validate(dt);
            let _ = writeln!(stdout.lock(), "{report}");
            status?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
