use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rfim_core::exact::SpinSystem;
use rfim_core::harness::{all_pass, decay_experiment, lemma_suite, write_outputs, ExperimentConfig};
use rfim_core::mc::{sample_magnetizations, Cftp, DEFAULT_SWEEP_BUDGET};
use rfim_core::{BoundaryCondition, DisorderRealization, EngineChoice, ExactEngine, LatticeRegion, ModelParams};
use serde_json::json;

#[derive(Parser)]
#[command(name = "rfim", version, about = "Random field Ising model: exact engines, CFTP sampling, checks and decay sweeps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Boundary {
    Plus,
    Minus,
}

#[derive(Clone, Copy, ValueEnum)]
enum Engine {
    Auto,
    Enumeration,
    TransferMatrix,
}

#[derive(clap::Args)]
struct Instance {
    /// `square:<n>` or `sites:<path>`.
    #[arg(long, default_value = "square:4")]
    region: String,
    /// Inverse temperature; `inf` for ground states.
    #[arg(long, default_value = "1", value_parser = parse_beta)]
    beta: f64,
    #[arg(long, default_value_t = 1.0)]
    v: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Disorder replica index.
    #[arg(long, default_value_t = 0)]
    replica: u64,
    #[arg(long, value_enum, default_value = "plus")]
    boundary: Boundary,
}

#[derive(Subcommand)]
enum Command {
    /// Exact free energy and magnetizations for one disorder realization.
    Exact {
        #[command(flatten)]
        instance: Instance,
        #[arg(long, value_enum, default_value = "auto")]
        engine: Engine,
    },
    /// CFTP estimates of the magnetizations for one disorder realization.
    Mc {
        #[command(flatten)]
        instance: Instance,
        /// Number of perfect samples.
        #[arg(long, default_value_t = 1000)]
        replicas: usize,
        /// Largest CFTP window, in sweeps.
        #[arg(long, default_value_t = DEFAULT_SWEEP_BUDGET)]
        budget: u64,
        /// Seed of the sampler; defaults to the disorder seed.
        #[arg(long)]
        mc_seed: Option<u64>,
    },
    /// Runs the named check group and prints the reports as JSON.
    Verify { selector: String },
    /// Runs the decay sweep described by a config file.
    Sweep { config: PathBuf },
}

fn parse_beta(s: &str) -> Result<f64, String> {
    match s.trim() {
        "inf" | "infinity" => Ok(f64::INFINITY),
        t => t.parse::<f64>().map_err(|e| e.to_string()).and_then(|b| if b >= 0.0 { Ok(b) } else { Err("beta must be non-negative".into()) }),
    }
}

fn setup(instance: &Instance) -> rfim_core::Result<(LatticeRegion, ModelParams, SpinSystem)> {
    let region = LatticeRegion::parse_spec(&instance.region, Path::new("."))?;
    let params = ModelParams::new(instance.beta, instance.v)?;
    let gamma = match instance.boundary {
        Boundary::Plus => BoundaryCondition::all_plus(&region),
        Boundary::Minus => BoundaryCondition::all_minus(&region),
    };
    let field: Vec<f64> = DisorderRealization::generate(&region, instance.seed, instance.replica).values().iter().map(|g| params.sqrt_v() * g).collect();
    let system = SpinSystem::from_region(&region, &gamma, &field)?;
    Ok((region, params, system))
}

fn beta_json(beta: f64) -> serde_json::Value {
    if beta.is_finite() {
        json!(beta)
    } else {
        json!("inf")
    }
}

fn run(cli: Cli) -> rfim_core::Result<bool> {
    match cli.command {
        Command::Exact { instance, engine } => {
            let (region, params, system) = setup(&instance)?;
            let choice = match engine {
                Engine::Auto => EngineChoice::Auto,
                Engine::Enumeration => EngineChoice::Enumeration,
                Engine::TransferMatrix => EngineChoice::TransferMatrix,
            };
            let obs = ExactEngine::new(choice).observables(&system, params.beta())?;
            let out = json!({
                "sites": region.len(),
                "beta": beta_json(params.beta()),
                "v": params.v(),
                "seed": instance.seed,
                "replica": instance.replica,
                "engine": obs.engine,
                "free_energy": obs.free_energy,
                "magnetization": obs.magnetization,
            });
            println!("{}", serde_json::to_string_pretty(&out)?);
            Ok(true)
        }
        Command::Mc { instance, replicas, budget, mc_seed } => {
            let (region, params, system) = setup(&instance)?;
            let sampler = Cftp::new(system, params.beta(), budget)?;
            let (means, ses) = sample_magnetizations(&sampler, mc_seed.unwrap_or(instance.seed), replicas)?;
            let out = json!({
                "sites": region.len(),
                "beta": beta_json(params.beta()),
                "v": params.v(),
                "seed": instance.seed,
                "replica": instance.replica,
                "samples": replicas,
                "magnetization": means,
                "std_error": ses,
            });
            println!("{}", serde_json::to_string_pretty(&out)?);
            Ok(true)
        }
        Command::Verify { selector } => {
            let reports = lemma_suite(&selector)?;
            println!("{}", serde_json::to_string_pretty(&reports)?);
            Ok(all_pass(&reports))
        }
        Command::Sweep { config } => {
            let cfg = ExperimentConfig::from_file(&config)?;
            let output = decay_experiment(&cfg)?;
            for path in write_outputs(&cfg, &output)? {
                println!("{}", path.display());
            }
            let failed: Vec<String> = output.rows.iter().filter_map(|r| r.error.as_ref().map(|e| format!("n={} beta={}: {e}", r.n, r.beta))).collect();
            for f in &failed {
                eprintln!("row failed: {f}");
            }
            Ok(failed.is_empty() && output.block_rows.iter().all(|b| b.error.is_none()))
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
