use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use epora_core::experiments::{
    report_lp_diagnostics, run_experiment, simulate_csv, ExperimentConfig,
};
use epora_core::instance::{
    generate_homogeneous_synthetic, generate_lower_bound_instance, generate_table1_shaped,
    ingest_csv, table1_targets, CsvSources, HomogeneousParams,
};
use epora_core::lp::{
    build_general_lp, build_homogeneous_lp, check_lp_bounds, normalize_homogeneous, solve,
    FEASIBILITY_TOL,
};
use epora_core::policies::PolicyKind;
use epora_core::Instance;

#[derive(Parser)]
#[command(
    name = "epora",
    version,
    about = "Equitable online allocation under Poisson arrivals"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a generated instance as JSON.
    Generate {
        #[command(subcommand)]
        family: Family,
    },
    /// Solve the benchmark LP of an instance.
    Lp {
        file: PathBuf,
        /// Solve the per-type model instead of the grouped one.
        #[arg(long)]
        homogeneous: bool,
        /// Scale assignments down to the per-type floors (needs --homogeneous).
        #[arg(long)]
        normalize: bool,
        #[arg(short = 'o', long = "output")]
        output: PathBuf,
    },
    /// Replicate one policy and print a CSV row.
    Simulate {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        policy: String,
        #[arg(long)]
        reps: u64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        rho: Option<f64>,
        #[arg(long = "b-floor")]
        b_floor: Option<u32>,
    },
    /// Run an experiment grid from a config file.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        #[arg(short = 'o', long = "output")]
        output: PathBuf,
    },
    /// Build an instance from county-level supply, demand and adjacency CSVs.
    Ingest {
        #[arg(long)]
        supply: PathBuf,
        #[arg(long)]
        demand: PathBuf,
        #[arg(long)]
        adjacency: PathBuf,
        #[arg(short = 'o', long = "output")]
        output: PathBuf,
    },
}

#[derive(Subcommand)]
enum Family {
    /// n unit supplies, n rare types and one common type.
    LowerBound {
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        out: Output,
    },
    /// Random bipartite graph with singleton groups.
    Homogeneous {
        #[arg(long, default_value_t = 500)]
        n_supply: usize,
        #[arg(long, default_value_t = 500)]
        n_demand: usize,
        #[arg(long, default_value_t = 10)]
        avg_degree: usize,
        #[arg(long, default_value_t = 5)]
        capacity: u32,
        #[arg(long, default_value_t = 1.0)]
        kappa_floor: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: Output,
    },
    /// County-level synthetic instance with five racial groups.
    Table1 {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: Output,
    },
}

#[derive(Args)]
struct Output {
    #[arg(short = 'o', long = "output")]
    output: PathBuf,
}

fn save(inst: &Instance, path: &Path) -> Result<()> {
    inst.ensure_valid()?;
    inst.save(path)?;
    eprintln!(
        "wrote {}: {} supply, {} demand, {} edges, {} groups",
        path.display(),
        inst.supply.len(),
        inst.demand.len(),
        inst.edges.len(),
        inst.groups.len()
    );
    Ok(())
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate { family } => match family {
            Family::LowerBound { n, out } => save(&generate_lower_bound_instance(n)?, &out.output),
            Family::Homogeneous {
                n_supply,
                n_demand,
                avg_degree,
                capacity,
                kappa_floor,
                seed,
                out,
            } => {
                let params = HomogeneousParams {
                    n_supply,
                    n_demand,
                    avg_degree,
                    capacity,
                    kappa_floor,
                };
                save(&generate_homogeneous_synthetic(params, seed)?, &out.output)
            }
            Family::Table1 { seed, out } => save(&generate_table1_shaped(seed)?, &out.output),
        },
        Command::Lp {
            file,
            homogeneous,
            normalize,
            output,
        } => {
            if normalize && !homogeneous {
                bail!("--normalize requires --homogeneous");
            }
            let inst = Instance::load(&file)?;
            inst.ensure_valid()?;
            let model = if homogeneous {
                build_homogeneous_lp(&inst)?
            } else {
                build_general_lp(&inst)
            };
            let mut sol = solve(&inst, &model, FEASIBILITY_TOL)?;
            if homogeneous {
                let check = check_lp_bounds(&sol, &inst)?;
                if !check.holds {
                    eprintln!("warning: s* exceeds kappa_bar or B/lambda: {check:?}");
                }
            }
            if normalize {
                sol = normalize_homogeneous(&sol, &inst)?;
            }
            let d = report_lp_diagnostics(&inst)?;
            eprintln!(
                "s* = {} (kappa_bar {}, B/lambda {}, b_bar {}, bottleneck {})",
                sol.s_star,
                d.kappa_bar,
                d.b_over_lambda,
                d.b_bar,
                d.bottleneck.label()
            );
            write_text(&output, &(serde_json::to_string_pretty(&sol)? + "\n"))
        }
        Command::Simulate {
            instance,
            policy,
            reps,
            seed,
            rho,
            b_floor,
        } => {
            let kind: PolicyKind = policy.parse()?;
            let inst = Instance::load(&instance)?;
            let csv = simulate_csv(&inst, kind, reps, seed, rho, b_floor)?;
            std::io::stdout().write_all(csv.as_bytes())?;
            Ok(())
        }
        Command::Experiment { config, output } => {
            let cfg = ExperimentConfig::load(&config)?;
            let res = run_experiment(&cfg, Some(&output))?;
            eprintln!(
                "{} rows written to {}",
                res.rows.len(),
                output.join(&cfg.name).display()
            );
            Ok(())
        }
        Command::Ingest {
            supply,
            demand,
            adjacency,
            output,
        } => {
            let sources = CsvSources {
                supply,
                demand,
                adjacency,
            };
            save(&ingest_csv(&sources, &table1_targets())?, &output)
        }
    }
}

fn main() -> std::process::ExitCode {
    match run(Cli::parse()) {
        Ok(()) => std::process::ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::ExitCode::FAILURE
        }
    }
}
