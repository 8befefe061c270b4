use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};

use mbmp::dictionary::Dictionary;
use mbmp::error::Result;
use mbmp::guarantees::{
    coherence_condition, cumulative_coherence_condition, design_branch_vector, mb_coherence,
    neuman_erc, DesignMethod, DesignStrategy, OirValue, DEFAULT_NODE_BUDGET,
};
use mbmp::harness::{run_experiment, ExperimentConfig};
use mbmp::matrix_io::load_matrix;
use mbmp::observation::ObservationSet;
use mbmp::pursuit::{mbmp, BranchVector, PursuitConfig, DEFAULT_SUPPORT_BUDGET};

#[derive(Parser)]
#[command(name = "mbmp", version, about = "Multi-branch matching pursuit toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Recover a joint-sparse support from observations.
    Solve {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        observations: PathBuf,
        #[arg(long, value_parser = parse_branch_vector)]
        branch_vector: BranchVector,
        /// Score raw projected atoms instead of renormalized ones.
        #[arg(long)]
        no_dict_refine: bool,
        /// Score against the residual instead of its orthonormal basis.
        #[arg(long)]
        no_subspace_refine: bool,
        /// CSV destination; stdout when omitted.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Evaluate a recovery certificate on a dictionary.
    Certify {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long, value_enum)]
        condition: Condition,
        #[arg(long = "K")]
        k: usize,
        /// Branch count at the root (mb-coherence only).
        #[arg(long, default_value_t = 1)]
        d: usize,
        /// Assumed orthogonal interference ratio; the noise-to-signal ratio for neuman.
        #[arg(long, default_value_t = 0.0)]
        oir: f64,
        /// Maximum number of supports scanned.
        #[arg(long, default_value_t = DEFAULT_SUPPORT_BUDGET)]
        budget: u64,
    },
    /// Choose a branch vector from the dictionary alone.
    DesignD {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long = "K")]
        k: usize,
        #[arg(long, value_parser = parse_strategy, default_value = "level1")]
        strategy: DesignStrategy,
        #[arg(long, value_parser = parse_method, default_value = "bruteforce")]
        method: DesignMethod,
        /// Support scans (bruteforce) or search nodes (mip) per width computation.
        #[arg(long)]
        budget: Option<u64>,
    },
    /// Run a Monte Carlo experiment described by a config file.
    Experiment {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Condition {
    Coherence,
    Babel,
    Neuman,
    MbCoherence,
}

fn parse_branch_vector(s: &str) -> std::result::Result<BranchVector, String> {
    s.parse().map_err(|e: mbmp::error::Error| e.to_string())
}

fn parse_strategy(s: &str) -> std::result::Result<DesignStrategy, String> {
    s.parse().map_err(|e: mbmp::error::Error| e.to_string())
}

fn parse_method(s: &str) -> std::result::Result<DesignMethod, String> {
    s.parse().map_err(|e: mbmp::error::Error| e.to_string())
}

fn emit(text: &str, path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text)?,
        None => io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Solve {
            matrix,
            observations,
            branch_vector,
            no_dict_refine,
            no_subspace_refine,
            output,
        } => {
            let dict = Dictionary::from_matrix(load_matrix(&matrix)?);
            let obs = ObservationSet::new(load_matrix(&observations)?);
            let cfg = PursuitConfig::with_refinements(!no_dict_refine, !no_subspace_refine);
            let start = Instant::now();
            let result = mbmp(&obs, &dict, &branch_vector, &cfg)?;
            let millis = start.elapsed().as_secs_f64() * 1e3;
            let support: Vec<String> = result.support.iter().map(|g| g.to_string()).collect();
            let csv = format!(
                "support_indices;residual_norm;nodes_expanded;wall_time_ms\n{};{:.15e};{};{:.4}\n",
                support.join(" "),
                result.residual_norm,
                result.nodes_expanded,
                millis
            );
            emit(&csv, output.as_deref())
        }
        Command::Certify {
            matrix,
            condition,
            k,
            d,
            oir,
            budget,
        } => {
            let dict = Dictionary::normalized_from(load_matrix(&matrix)?)?;
            let report = match condition {
                Condition::Coherence => coherence_condition(&dict, k)?,
                Condition::Babel => cumulative_coherence_condition(&dict, k)?,
                Condition::Neuman => neuman_erc(&dict, k, oir, budget)?,
                Condition::MbCoherence => {
                    mb_coherence(&dict, &[], k, d, &OirValue::assumed(oir)?, budget)?
                }
            };
            println!("{}", report.csv_row());
            Ok(())
        }
        Command::DesignD {
            matrix,
            k,
            strategy,
            method,
            budget,
        } => {
            let dict = Dictionary::normalized_from(load_matrix(&matrix)?)?;
            let budget = budget.unwrap_or(match method {
                DesignMethod::BruteForce => DEFAULT_SUPPORT_BUDGET,
                DesignMethod::Mip => DEFAULT_NODE_BUDGET,
            });
            let d = design_branch_vector(&dict, k, strategy, method, budget)?;
            println!("{d}");
            Ok(())
        }
        Command::Experiment { config } => {
            let cfg = ExperimentConfig::parse(&fs::read_to_string(&config)?)?;
            let csv = run_experiment(&cfg)?;
            let out = cfg.out.as_ref().map(|p| match config.parent() {
                Some(dir) if p.is_relative() => dir.join(p),
                _ => p.clone(),
            });
            emit(&csv, out.as_deref())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::FAILURE
        }
    }
}
