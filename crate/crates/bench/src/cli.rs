//! Command-line interface of the `carbonflow` binary.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use carbonflow_core::baselines::{brute_force_pareto, Nsga2Params};
use carbonflow_core::kdma::KdmaParams;
use carbonflow_core::model::EvalConfig;

use crate::ablation::{self, run_ablation};
use crate::experiment::{run_experiment, AlgoConfig, Experiment, RunOptions, Variant};
use crate::generator::{generate_instances, GeneratorConfig};
use crate::instance_io::{self, read_instance, write_instance, ReadError};
use crate::report::{write_report, GanttSpec};
use crate::taguchi::{self, run_taguchi};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Guard(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    /// 2 bad arguments, 3 malformed input, 4 size guard, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Input(_) => 3,
            CliError::Guard(_) => 4,
            CliError::Io(_) => 1,
        }
    }
}

impl From<ReadError> for CliError {
    fn from(e: ReadError) -> Self {
        match e {
            ReadError::Io { .. } => CliError::Io(e.to_string()),
            ReadError::Parse { .. } => CliError::Input(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "carbonflow", version, about = "Energy-efficient distributed flow-shop benchmark")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a seeded instance dataset.
    Generate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the seed in the configuration file.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run algorithms on every instance of a directory.
    Run {
        #[arg(long)]
        instances: PathBuf,
        /// Comma-separated list of kdma, nsga2, random.
        #[arg(long, value_delimiter = ',', default_value = "kdma")]
        algo: Vec<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Full KDMA against its three single-strategy ablations.
    Ablate {
        #[arg(long)]
        instances: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Orthogonal-array calibration of PS, pc and pm.
    Tune {
        #[arg(long)]
        instances: PathBuf,
        /// Use only the first k instances.
        #[arg(long)]
        limit: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Rebuild CSV tables and plots from stored records.
    Report {
        /// Directory holding records.json.
        #[arg(long)]
        records: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Gantt chart of a run, as instance:seed[:algorithm].
        #[arg(long)]
        gantt: Option<GanttSpec>,
    },
    /// Exact Pareto front of a small instance.
    Oracle {
        #[arg(long)]
        instance: PathBuf,
        /// Evaluate without the off/on strategy.
        #[arg(long)]
        no_reduction: bool,
    },
}

#[derive(Debug, Args)]
pub struct Common {
    #[arg(long)]
    pub out: PathBuf,
    /// Replicates per (instance, algorithm).
    #[arg(long, default_value_t = 10)]
    pub seeds: u64,
    /// Evaluation budget per run.
    #[arg(long, default_value_t = 10_000)]
    pub evals: u64,
    /// Population size.
    #[arg(long, default_value_t = 100)]
    pub ps: usize,
    /// Master seed for run seed derivation.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Worker threads; does not affect results.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Record wall-clock times (makes runtime_ms nonzero and output
    /// machine-dependent).
    #[arg(long)]
    pub timing: bool,
}

impl Common {
    fn options(&self) -> RunOptions {
        RunOptions {
            replicates: self.seeds,
            master_seed: self.seed,
            workers: self.workers.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get())),
            timing: self.timing,
            exact_fronts: true,
        }
    }

    fn kdma(&self) -> Result<KdmaParams, CliError> {
        let p = KdmaParams {
            population_size: self.ps,
            max_evaluations: self.evals,
            ..KdmaParams::default()
        };
        p.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(p)
    }
}

pub const RECORDS_FILE: &str = "records.json";

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |e| CliError::Io(format!("{}: {e}", path.display()))
}

fn save_records(exp: &Experiment, out: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(out).map_err(io_err(out))?;
    let path = out.join(RECORDS_FILE);
    let json = serde_json::to_string(exp).map_err(|e| CliError::Io(e.to_string()))?;
    std::fs::write(&path, json).map_err(io_err(&path))
}

fn load_records(dir: &Path) -> Result<Experiment, CliError> {
    let path = dir.join(RECORDS_FILE);
    let text = std::fs::read_to_string(&path).map_err(io_err(&path))?;
    serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn write_text(path: &Path, text: String) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(io_err(path))
}

fn load_instances(dir: &Path) -> Result<Vec<carbonflow_core::model::Instance>, CliError> {
    let instances = instance_io::read_dir(dir)?;
    if instances.is_empty() {
        return Err(CliError::Input(format!(
            "{}: no .{} instance files",
            dir.display(),
            instance_io::EXTENSION
        )));
    }
    Ok(instances)
}

fn variant_for(name: &str, common: &Common) -> Result<Variant, CliError> {
    let kdma = common.kdma()?;
    let config = match name {
        "kdma" => AlgoConfig::Kdma(kdma),
        "nsga2" => AlgoConfig::Nsga2(Nsga2Params::from(&kdma)),
        "random" => AlgoConfig::Random {
            evaluations: common.evals,
            reduction: false,
        },
        other => return Err(CliError::Usage(format!("unknown algorithm `{other}` (kdma, nsga2, random)"))),
    };
    Ok(Variant::new(name, config))
}

pub fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Generate { config, out, seed } => {
            let text = std::fs::read_to_string(&config).map_err(io_err(&config))?;
            let mut cfg = GeneratorConfig::from_toml(&text)
                .map_err(|e| CliError::Input(format!("{}: {e}", config.display())))?;
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            std::fs::create_dir_all(&out).map_err(io_err(&out))?;
            let instances = generate_instances(&cfg);
            for inst in &instances {
                let path = out.join(format!("{}.{}", inst.id(), instance_io::EXTENSION));
                write_instance(inst, &path).map_err(io_err(&path))?;
            }
            println!("wrote {} instances to {}", instances.len(), out.display());
        }
        Command::Run { instances, algo, common } => {
            let mut names = algo.clone();
            names.dedup();
            let variants = names
                .iter()
                .map(|a| variant_for(a, &common))
                .collect::<Result<Vec<_>, _>>()?;
            let exp = run_experiment(load_instances(&instances)?, variants, &common.options());
            save_records(&exp, &common.out)?;
            write_report(&exp, &common.out, None).map_err(CliError::Io)?;
            println!("{} runs written to {}", exp.records.len(), common.out.display());
        }
        Command::Ablate { instances, common } => {
            let exp = run_ablation(load_instances(&instances)?, &common.kdma()?, &common.options());
            save_records(&exp, &common.out)?;
            write_report(&exp, &common.out, None).map_err(CliError::Io)?;
            write_text(&common.out.join("ablation_carbon.csv"), ablation::carbon_csv(&exp))?;
            write_text(&common.out.join("ablation_summary.csv"), ablation::summary_csv(&exp))?;
            print!("{}", ablation::summary_csv(&exp));
        }
        Command::Tune { instances, limit, common } => {
            let mut all = load_instances(&instances)?;
            if let Some(k) = limit {
                all.truncate(k.max(1));
            }
            let (exp, summary) = run_taguchi(all, &common.kdma()?, &common.options());
            save_records(&exp, &common.out)?;
            write_text(&common.out.join("taguchi_runs.csv"), taguchi::runs_csv(&summary))?;
            write_text(&common.out.join("taguchi_summary.csv"), taguchi::summary_csv(&summary))?;
            print!("{}", taguchi::summary_csv(&summary));
        }
        Command::Report { records, out, gantt } => {
            let mut exp = load_records(&records)?;
            exp.compute_indicators();
            let written = write_report(&exp, &out, gantt.as_ref()).map_err(|e| {
                if e.starts_with("no ") || e.contains("empty archive") {
                    CliError::Usage(e)
                } else {
                    CliError::Io(e)
                }
            })?;
            println!("wrote {} files to {}", written.len(), out.display());
        }
        Command::Oracle { instance, no_reduction } => {
            let inst = read_instance(&instance)?;
            let front = brute_force_pareto(&inst, EvalConfig::new(!no_reduction))
                .map_err(|e| CliError::Guard(e.to_string()))?;
            let mut s = String::from("makespan,ce_total,sequences\n");
            for (g, p) in front.sorted() {
                let seqs: Vec<String> = g
                    .sequences()
                    .iter()
                    .map(|seq| seq.iter().map(|j| (j + 1).to_string()).collect::<Vec<_>>().join(" "))
                    .collect();
                let _ = writeln!(s, "{},{:.6},{}", p.makespan, p.ce_total, seqs.join("|"));
            }
            print!("{s}");
        }
    }
    Ok(())
}
