use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use cvqd_cli::commands::{
    cmd_bench, cmd_deflate, cmd_gen_data, cmd_oracle, cmd_screen, cmd_solve, cmd_train, TrainOptions,
};
use cvqd_cli::config::{write_json, RunConfig, SecondaryConfig};
use cvqd_cli::report::{write_oracle_csv, write_trace_csv, ScreeningReport};
use cvqd_cli::{CliError, CliResult};
use cvqd_core::ansatz::{AnsatzKind, Backend, OptimizerKind, SampledBackend};
use cvqd_core::deflation::{BetaPolicy, DeflationMode};
use cvqd_core::fm::{TrainConfig, DEFAULT_R_THRESHOLD};
use cvqd_core::planted::EMBEDDED_SEED;
use cvqd_core::problem::Sense;

/// Surrogate-model screening with variational ground and excited state search.
///
/// Exit status: 0 on success, 2 for invalid input or configuration, 3 when a
/// numerical procedure fails (divergence, non-convergence).
#[derive(Parser)]
#[command(name = "cvqd", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the full data set of a seeded planted model with Gaussian noise.
    GenData {
        /// Planted model seed.
        #[arg(long, default_value_t = EMBEDDED_SEED)]
        seed: u64,
        /// Standard deviation of the target noise.
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
        /// Seed of the noise draw.
        #[arg(long, default_value_t = 0)]
        data_seed: u64,
        /// Dataset CSV (`bits,target`).
        #[arg(long)]
        out: PathBuf,
        /// Planted model JSON; defaults to the dataset path with `.model.json`.
        #[arg(long)]
        model_out: Option<PathBuf>,
    },
    /// Train a factorization machine on a dataset CSV.
    Train(TrainArgs),
    /// Ground-state search. Writes `solve.json` and `trace.csv` with `--out`.
    Solve(RunArgs),
    /// Ground state plus k excited levels. Writes `report.json`, `levels.csv`
    /// and `trace.csv` with `--out`.
    Deflate(RunArgs),
    /// Exact lowest k+1 levels by enumeration. Writes `oracle.json` and
    /// `oracle.csv` with `--out`.
    Oracle(RunArgs),
    /// Deflate until a level passes the secondary-property check. Writes
    /// `report.json`, `levels.csv` and `trace.csv` with `--out`.
    ///
    /// levels.csv columns: rank, bitstring, groups, energy, exact_energy,
    /// oracle_energy, score, oracle_score, oracle_rank, probability,
    /// secondary, pass. trace.csv columns: rank, iteration, objective.
    Screen(RunArgs),
    /// Timing of gate application, VQE iterations and deflation per size.
    Bench {
        #[arg(long, value_delimiter = ',', default_value = "8,12,16")]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// JSON output file; stdout otherwise.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    dataset: PathBuf,
    /// FM model JSON.
    #[arg(long)]
    out: PathBuf,
    /// Fit report JSON.
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long)]
    kappa: Option<usize>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long)]
    l2: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Hold out this fraction of the data for the test correlation.
    #[arg(long, conflicts_with = "active_batch")]
    test_fraction: Option<f64>,
    /// Run the stratified acquisition loop with this batch size.
    #[arg(long)]
    active_batch: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_R_THRESHOLD)]
    r_threshold: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum SenseArg {
    Minimize,
    Maximize,
}

#[derive(Clone, Copy, ValueEnum)]
enum AnsatzArg {
    Ry,
    Qaoa,
}

#[derive(Clone, Copy, ValueEnum)]
enum OptimizerArg {
    Simplex,
    Spsa,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Vqd,
    Cvqd,
}

/// Flags override the `--config` document, which overrides the defaults.
#[derive(Args)]
struct RunArgs {
    /// RunConfig JSON.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Dataset CSV to train the surrogate on.
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// FM or QUBO model JSON.
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long, value_enum)]
    sense: Option<SenseArg>,
    #[arg(long, value_enum)]
    ansatz: Option<AnsatzArg>,
    /// R_y entangling layers or QAOA p.
    #[arg(long)]
    depth: Option<usize>,
    #[arg(long, value_enum)]
    optimizer: Option<OptimizerArg>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    restarts: Option<usize>,
    /// Optimizer seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Switch to the sampled backend with this many shots.
    #[arg(long)]
    shots: Option<u64>,
    #[arg(long)]
    backend_seed: Option<u64>,
    /// Uniform per-qubit readout flip probability (sampled backend).
    #[arg(long)]
    readout_noise: Option<f64>,
    /// Confusion spec JSON used to mitigate sampled estimates.
    #[arg(long)]
    mitigation: Option<PathBuf>,
    /// Excited levels after the ground state.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Fixed penalty weight.
    #[arg(long, conflicts_with = "beta_factor")]
    beta: Option<f64>,
    /// Penalty weight as a multiple of the energy range.
    #[arg(long)]
    beta_factor: Option<f64>,
    /// Secondary-property table CSV (`bits,value`).
    #[arg(long)]
    secondary: Option<PathBuf>,
    /// Minimum secondary value for a level to pass.
    #[arg(long)]
    threshold: Option<f64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl RunArgs {
    fn resolve(&self) -> CliResult<RunConfig> {
        let mut c = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if self.dataset.is_some() || self.model.is_some() {
            c.dataset = self.dataset.clone();
            c.model = self.model.clone();
        }
        if let Some(s) = self.sense {
            c.sense = match s {
                SenseArg::Minimize => Sense::Minimize,
                SenseArg::Maximize => Sense::Maximize,
            };
        }
        if let Some(a) = self.ansatz {
            c.ansatz.kind = match a {
                AnsatzArg::Ry => AnsatzKind::Ry,
                AnsatzArg::Qaoa => AnsatzKind::Qaoa,
            };
        }
        if let Some(d) = self.depth {
            c.ansatz.depth = d;
        }
        if let Some(o) = self.optimizer {
            c.optimizer.kind = match o {
                OptimizerArg::Simplex => OptimizerKind::Simplex,
                OptimizerArg::Spsa => OptimizerKind::Spsa,
            };
        }
        if let Some(v) = self.max_iter {
            c.optimizer.max_iter = v;
        }
        if let Some(v) = self.restarts {
            c.optimizer.restarts = v;
        }
        if let Some(v) = self.seed {
            c.optimizer.seed = v;
        }
        if let Some(shots) = self.shots {
            c.backend = match c.backend {
                Backend::Sampled(s) => Backend::Sampled(SampledBackend { shots, ..s }),
                Backend::Exact => Backend::sampled(shots, 0),
            };
        }
        if let Some(seed) = self.backend_seed {
            let Backend::Sampled(s) = &mut c.backend else {
                return Err(CliError::Config("--backend-seed needs a sampled backend".into()));
            };
            s.seed = seed;
        }
        if let Some(p) = self.readout_noise {
            c.readout_noise = Some(p);
        }
        if let Some(p) = &self.mitigation {
            c.mitigation = Some(p.clone());
        }
        if let Some(k) = self.k {
            c.k = k;
        }
        if let Some(m) = self.mode {
            c.mode = match m {
                ModeArg::Vqd => DeflationMode::Vqd,
                ModeArg::Cvqd => DeflationMode::Cvqd,
            };
        }
        if let Some(beta) = self.beta {
            c.beta = BetaPolicy::Fixed { beta };
        }
        if let Some(factor) = self.beta_factor {
            c.beta = BetaPolicy::Auto { factor };
        }
        match (&self.secondary, self.threshold, &mut c.secondary) {
            (Some(path), Some(threshold), _) => c.secondary = Some(SecondaryConfig { path: path.clone(), threshold }),
            (None, Some(threshold), Some(s)) => s.threshold = threshold,
            (Some(path), None, Some(s)) => s.path = path.clone(),
            (None, None, _) => {}
            _ => return Err(CliError::Config("--secondary and --threshold go together".into())),
        }
        Ok(c)
    }
}

fn ensure_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.to_owned(), source })
}

fn print_json<T: serde::Serialize>(value: &T) {
    println!("{}", serde_json::to_string_pretty(value).expect("report types serialize"));
}

fn write_screening(report: &ScreeningReport, out: Option<&Path>) -> CliResult<()> {
    match out {
        Some(dir) => {
            ensure_dir(dir)?;
            write_json(&dir.join("report.json"), report)?;
            report.write_csv(dir)
        }
        None => {
            print_json(report);
            Ok(())
        }
    }
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::GenData { seed, noise, data_seed, out, model_out } => {
            let model_out = model_out.unwrap_or_else(|| out.with_extension("model.json"));
            cmd_gen_data(seed, noise, data_seed, &out, &model_out)?;
            eprintln!("wrote {} and {}", out.display(), model_out.display());
        }
        Command::Train(a) => {
            let d = TrainConfig::default();
            let config = TrainConfig {
                kappa: a.kappa.unwrap_or(d.kappa),
                epochs: a.epochs.unwrap_or(d.epochs),
                learning_rate: a.learning_rate.unwrap_or(d.learning_rate),
                l2: a.l2.unwrap_or(d.l2),
                seed: a.seed.unwrap_or(d.seed),
                ..d
            };
            let opts = TrainOptions {
                config,
                test_fraction: a.test_fraction,
                active_batch: a.active_batch,
                r_threshold: a.r_threshold,
            };
            let out = cmd_train(&a.dataset, &opts)?;
            write_json(&a.out, &out.model)?;
            match &a.report {
                Some(p) => write_json(p, &out)?,
                None => print_json(&out.fit),
            }
        }
        Command::Solve(a) => {
            let report = cmd_solve(&a.resolve()?)?;
            match &a.out {
                Some(dir) => {
                    ensure_dir(dir)?;
                    write_json(&dir.join("solve.json"), &report)?;
                    write_trace_csv(&dir.join("trace.csv"), [(0, report.result.trace.as_slice())])?;
                }
                None => print_json(&report),
            }
        }
        Command::Deflate(a) => write_screening(&cmd_deflate(&a.resolve()?)?, a.out.as_deref())?,
        Command::Screen(a) => write_screening(&cmd_screen(&a.resolve()?)?, a.out.as_deref())?,
        Command::Oracle(a) => {
            let rows = cmd_oracle(&a.resolve()?)?;
            match &a.out {
                Some(dir) => {
                    ensure_dir(dir)?;
                    write_json(&dir.join("oracle.json"), &rows)?;
                    write_oracle_csv(&dir.join("oracle.csv"), &rows)?;
                }
                None => print_json(&rows),
            }
        }
        Command::Bench { sizes, seed, out } => {
            let report = cmd_bench(&sizes, seed)?;
            match &out {
                Some(p) => write_json(p, &report)?,
                None => print_json(&report),
            }
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
