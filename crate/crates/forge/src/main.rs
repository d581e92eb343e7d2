use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use calabi_core::symplin::WeightVector;
use calabi_forge::commands;
use calabi_forge::report::{scaling_csv, trajectories_csv, write_file, write_json};
use calabi_forge::{ForgeError, Result, RunConfig};

#[derive(Debug, Parser)]
#[command(
    name = "calabi-forge",
    version,
    about = "Calabi invariants of Hamiltonian loops on sphere products"
)]
struct Cli {
    /// TOML run configuration; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides `seed` from the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory for report.json and CSV tables.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Maslov index of a rotation loop or of a sampled loop.
    Maslov {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        weights: Option<Vec<i64>>,
        /// Sampled loop, one row-major matrix per line.
        #[arg(long, conflicts_with = "weights")]
        loop_csv: Option<PathBuf>,
    },
    /// Based null-homotopy of a rotation loop and its boundary residuals.
    Contract {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        weights: Option<Vec<i64>>,
    },
    /// Cut-off loop with small Calabi invariant.
    Lemma {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        weights: Option<Vec<i64>>,
        #[arg(long)]
        epsilon: Option<f64>,
        /// Initial outer radius.
        #[arg(long)]
        outer: Option<f64>,
    },
    /// Calabi invariant of the cut-off loop across outer radii.
    Scaling {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        weights: Option<Vec<i64>>,
        #[arg(long, value_delimiter = ',')]
        radii: Option<Vec<f64>>,
    },
    /// Full construction on the configured sphere product.
    Theorem {
        /// Also write trajectories.csv.
        #[arg(long)]
        trajectories: bool,
    },
    /// Hofer-length estimates of the constructed loops.
    Hofer,
    /// Action-Maslov index of the configured circle action.
    ActionMaslov,
}

fn weights_or(cfg: &RunConfig, w: Option<Vec<i64>>) -> WeightVector {
    w.map(WeightVector::new)
        .unwrap_or_else(|| cfg.loop_weights())
}

fn verdict(pass: bool, what: &str) -> Result<()> {
    if pass {
        Ok(())
    } else {
        Err(ForgeError::Tolerance(format!("{what}: see report.json")))
    }
}

fn run(cli: Cli) -> Result<()> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    let out: &Path = &cli.out;
    std::fs::create_dir_all(out).map_err(|e| ForgeError::io(out, e))?;

    match cli.command {
        Command::Maslov { weights, loop_csv } => {
            let s = match loop_csv {
                Some(path) => commands::maslov_csv(&path)?,
                None => commands::maslov(&weights_or(&cfg, weights), cfg.linear_loop.intervals)?,
            };
            println!("maslov index {} (residual {:.3e})", s.index, s.residual);
            write_json(out, "maslov", &cfg, &s)
        }
        Command::Contract { weights } => {
            let w = weights_or(&cfg, weights);
            let s = commands::contract(&w, cfg.linear_loop.grid, cfg.tolerances.homotopy)?;
            println!(
                "{}: boundary {:.3e}, symplectic {:.3e}",
                s.transfers,
                s.boundary.max_boundary(),
                s.boundary.symplectic
            );
            write_json(out, "contract", &cfg, &s)?;
            verdict(s.pass, "homotopy residuals")
        }
        Command::Lemma {
            weights,
            epsilon,
            outer,
        } => {
            let w = weights_or(&cfg, weights);
            if let Some(o) = outer {
                cfg.lemma.outer = o;
            }
            let eps = epsilon.unwrap_or(cfg.linear_loop.epsilon);
            let s = commands::lemma(&cfg, &w, eps)?;
            println!(
                "Cal(g) = {:.6e} ± {:.1e}, bound {:.6e}, rho3 = {}",
                s.cal.value, s.cal.error, s.certified_bound, s.balls.outer
            );
            write_json(out, "lemma", &cfg, &s)?;
            write_file(&out.join("scaling.csv"), &scaling_csv(&s.scaling)?)?;
            verdict(s.pass, "lemma checks")
        }
        Command::Scaling { weights, radii } => {
            let w = weights_or(&cfg, weights);
            let radii = radii.unwrap_or_else(|| cfg.linear_loop.scaling_radii.clone());
            let s = commands::scaling(&cfg, &w, &radii)?;
            for r in &s.rows {
                println!(
                    "rho3 {:<8} |Cal| {:.6e} ± {:.1e}",
                    r.outer, r.cal_abs, r.error
                );
            }
            write_json(out, "scaling", &cfg, &s)?;
            write_file(&out.join("scaling.csv"), &scaling_csv(&s.rows)?)?;
            verdict(s.monotone, "scaling table is not monotone")
        }
        Command::Theorem { trajectories } => {
            if trajectories {
                cfg.output.trajectories = true;
            }
            let r = commands::theorem(&cfg)?;
            for c in &r.checks {
                println!(
                    "{} {:<40} {:.6e} (threshold {:.6e})",
                    if c.pass { "pass" } else { "FAIL" },
                    c.name,
                    c.value,
                    c.threshold
                );
            }
            println!(
                "Cal(h) = {:.10e}, target = {:.10e}, epsilon = {:.10e}",
                r.cal_h.value, r.target.value, r.epsilon
            );
            write_json(out, "theorem", &cfg, &r)?;
            write_file(&out.join("scaling.csv"), &scaling_csv(&r.scaling)?)?;
            if cfg.output.trajectories {
                write_file(
                    &out.join("trajectories.csv"),
                    &trajectories_csv(&r.trajectories)?,
                )?;
            }
            verdict(r.pass, "theorem checks")
        }
        Command::Hofer => {
            let s = commands::hofer(&cfg)?;
            println!("g: length {:.6e}, certified {}", s.g.length, s.g.certified);
            println!("h: length {:.6e}, certified {}", s.h.length, s.h.certified);
            write_json(out, "hofer", &cfg, &s)?;
            verdict(s.g.certified && s.h.certified, "Hofer inequality")
        }
        Command::ActionMaslov => {
            let s = commands::action_maslov_index(&cfg)?;
            println!(
                "I = {:.12e}, noncontractible if monotone: {}",
                s.action_maslov.value, s.action_maslov.noncontractible_if_monotone
            );
            write_json(out, "action-maslov", &cfg, &s)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(4);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
