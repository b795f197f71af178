use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use lbcm::bc_operators::BoundaryOps;
use lbcm::data::NoisyData;
use lbcm::grid::relative_l2;
use lbcm::harness::experiment::{clean_source, estimate};
use lbcm::harness::noise::{NoiseModel, NoiseScope};
use lbcm::harness::report::emit_report;
use lbcm::harness::suite::{
    all_passed, control_suite, experiment_band, experiment_lines, frechet_suite, identity_suite,
    CheckLine,
};
use lbcm::harness::truth::ground_truth;
use lbcm::harness::{run_experiment, ExperimentConfig};
use lbcm::recon::reconstruct;

#[derive(Parser)]
#[command(
    name = "lbcm",
    version,
    about = "Linearized boundary control reconstruction of a 1D density"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Number of grid cells on [-1, 1].
    #[arg(long, global = true)]
    nx: Option<usize>,
    /// Control horizon T.
    #[arg(long, global = true)]
    t_final: Option<f64>,
    /// dt / dx.
    #[arg(long, global = true)]
    dt_ratio: Option<f64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// File of `key = value` settings applied before the flags.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Boundary and linearized identity residuals.
    IdentityCheck,
    /// Final-state error of the D'Alembert controls for modes 1 to 10.
    ControlCheck,
    /// One reconstruction, exported as CSV and JSON.
    Reconstruct {
        #[arg(long, default_value_t = 1)]
        experiment: u8,
        #[arg(long)]
        modes: Option<usize>,
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Full experiment with noise sweep, CSV, JSON and SVG output.
    Experiment {
        id: u8,
        /// Noise levels as fractions of the clean trace RMS.
        #[arg(long, num_args = 1.., value_delimiter = ',')]
        noise: Option<Vec<f64>>,
        #[arg(long)]
        seeds: Option<usize>,
    },
    /// Convergence orders of the linearization.
    FrechetCheck,
}

fn config_for(global: &Global, id: u8) -> Result<ExperimentConfig> {
    let mut c = ExperimentConfig::new(id);
    if let Some(path) = &global.config {
        c.apply_file(path)?;
    }
    if let Some(v) = global.nx {
        c.nx = v;
    }
    if let Some(v) = global.t_final {
        c.t_final = v;
    }
    if let Some(v) = global.dt_ratio {
        c.dt_ratio = v;
    }
    Ok(c)
}

fn report(lines: &[CheckLine]) -> bool {
    for l in lines {
        println!("{l}");
    }
    all_passed(lines)
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(value)?)
        .with_context(|| format!("writing {}", path.display()))
}

fn run_reconstruct(
    global: &Global,
    id: u8,
    modes: Option<usize>,
    noise: f64,
    seed: Option<u64>,
) -> Result<bool> {
    let mut config = config_for(global, id)?;
    if let Some(m) = modes {
        config.modes = m;
    }
    if let Some(s) = seed {
        config.seed = s;
    }
    config.validate()?;
    let grid = config.grid()?;
    let ops = BoundaryOps::new(grid);
    let scope = if id == 3 {
        NoiseScope::Difference
    } else {
        NoiseScope::Linearized
    };
    let data = NoisyData {
        inner: clean_source(&config)?,
        model: NoiseModel::new(noise, config.seed, scope),
    };
    let result = reconstruct(&ops, &data, config.modes, noise, config.seed)?;
    let truth = ground_truth(id, &grid, config.modes, config.eps)?;
    let est = estimate(id, &result.field);
    let error = relative_l2(&est, &truth, grid.dx);

    fs::create_dir_all(&global.out)?;
    let mut w = csv::Writer::from_path(global.out.join("coefficients.csv"))?;
    w.write_record(["mode", "a", "b"])?;
    w.write_record([
        "0".to_string(),
        format!("{:.17e}", result.coefficients.c0),
        String::new(),
    ])?;
    for (j, (a, b)) in result
        .coefficients
        .a
        .iter()
        .zip(&result.coefficients.b)
        .enumerate()
    {
        w.write_record([
            (j + 1).to_string(),
            format!("{a:.17e}"),
            format!("{b:.17e}"),
        ])?;
    }
    w.flush()?;
    let mut w = csv::Writer::from_path(global.out.join("field.csv"))?;
    w.write_record(["x", "rho_dot", "estimate", "truth"])?;
    for (i, x) in grid.xs().iter().enumerate() {
        w.write_record([x, &result.field[i], &est[i], &truth[i]].map(|v| format!("{v:.17e}")))?;
    }
    w.flush()?;
    write_json(&global.out.join("metadata.json"), &result.metadata)?;

    println!(
        "experiment {id}, {} modes, noise {noise}, seed {}",
        config.modes, config.seed
    );
    println!("relative L2 error {error:.4e}");
    println!("wrote {}", global.out.display());
    Ok(match (noise == 0.0, experiment_band(id, 0.0)) {
        (true, Some((lo, hi))) => report(&[CheckLine::within(
            format!("experiment {id} noiseless reconstruction"),
            error,
            lo,
            hi,
        )]),
        _ => true,
    })
}

fn run(cli: Cli) -> Result<bool> {
    let g = &cli.global;
    match cli.command {
        Command::IdentityCheck => Ok(report(&identity_suite(&config_for(g, 1)?.grid()?)?)),
        Command::ControlCheck => Ok(report(&control_suite(&config_for(g, 1)?.grid()?)?)),
        Command::FrechetCheck => Ok(report(&frechet_suite(&config_for(g, 1)?.grid()?)?)),
        Command::Reconstruct {
            experiment,
            modes,
            noise,
            seed,
        } => run_reconstruct(g, experiment, modes, noise, seed),
        Command::Experiment { id, noise, seeds } => {
            let mut config = config_for(g, id)?;
            if let Some(n) = noise {
                config.noise_levels = n;
            }
            if let Some(s) = seeds {
                config.seeds = s;
            }
            let rep = run_experiment(&config)?;
            for l in &rep.levels {
                println!(
                    "noise {}: median error {:.4e} over {} run(s)",
                    l.level,
                    l.median_error,
                    l.errors.len()
                );
            }
            for path in emit_report(&rep, &g.out)? {
                println!("wrote {}", path.display());
            }
            Ok(report(&experiment_lines(&rep)))
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
