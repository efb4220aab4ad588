use std::collections::HashMap;
use std::fs::File;
use std::path::Path;
use std::time::Instant;

use cvqd_core::ansatz::{build_ansatz, vqe_run, AnsatzSpec, Backend, OptimizerConfig, VqeResult};
use cvqd_core::deflation::{BetaPolicy, DeflationMode, Deflator};
use cvqd_core::fm::{
    active_learning_loop, fm_to_qubo_with_sense, fm_train, fm_train_eval, FitReport, FmModel, TrainConfig,
};
use cvqd_core::planted::{generate_dataset, planted_model, random_split};
use cvqd_core::problem::{
    exact_spectrum, group_string, load_csv, qubo_to_ising, save_csv, IsingModel, LabeledSample, QuboModel, Sense,
};
use cvqd_core::sim::{apply_circuit, Statevector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::{read_json, RunConfig};
use crate::error::{CliError, CliResult};
use crate::report::{
    oracle_rows, LevelReport, OracleLevel, RunMetadata, ScreenStatus, ScreeningReport, SolveReport, Timings,
};

/// The model being searched, with the surrogate it came from if any.
#[derive(Debug, Clone)]
pub struct Surrogate {
    pub qubo: QuboModel,
    pub fm: Option<FmModel>,
    pub fit: Option<FitReport>,
}

pub fn load_surrogate(cfg: &RunConfig) -> CliResult<Surrogate> {
    if let Some(path) = &cfg.dataset {
        let data = load_csv(path)?;
        let (fm, fit) = fm_train(&data, &cfg.train)?;
        return Ok(Surrogate { qubo: fm_to_qubo_with_sense(&fm, cfg.sense), fm: Some(fm), fit: Some(fit) });
    }
    let path = cfg.model.as_ref().ok_or_else(|| CliError::Config("a dataset or a model is required".into()))?;
    let value: serde_json::Value = read_json(path)?;
    let parse_err = |source| CliError::Parse { path: path.clone(), source };
    if value.get("kappa").is_some() {
        let fm: FmModel = serde_json::from_value(value).map_err(parse_err)?;
        fm.validate()?;
        Ok(Surrogate { qubo: fm_to_qubo_with_sense(&fm, cfg.sense), fm: Some(fm), fit: None })
    } else {
        let qubo: QuboModel = serde_json::from_value(value).map_err(parse_err)?;
        Ok(Surrogate { qubo, fm: None, fit: None })
    }
}

/// Secondary-property table: CSV with header `bits,value`.
pub fn load_secondary(path: &Path) -> CliResult<HashMap<String, f64>> {
    let io_err = |e: csv::Error| CliError::Io { path: path.to_owned(), source: std::io::Error::other(e) };
    let file = File::open(path).map_err(|source| CliError::Io { path: path.to_owned(), source })?;
    let mut rdr = csv::Reader::from_reader(file);
    let headers = rdr.headers().map_err(io_err)?.clone();
    if headers.get(0) != Some("bits") || headers.get(1) != Some("value") {
        return Err(CliError::Config(format!("{}: header must start with `bits,value`", path.display())));
    }
    let mut table = HashMap::new();
    for record in rdr.records() {
        let record = record.map_err(io_err)?;
        let bits = record.get(0).unwrap_or_default().trim().to_string();
        let value: f64 = record
            .get(1)
            .unwrap_or_default()
            .trim()
            .parse()
            .map_err(|_| CliError::Config(format!("{}: bad value for {bits}", path.display())))?;
        table.insert(bits, value);
    }
    Ok(table)
}

struct Context {
    cfg: RunConfig,
    surrogate: Surrogate,
    ising: IsingModel,
    diag: Vec<f64>,
    spec: AnsatzSpec,
    backend: Backend,
    model_s: f64,
}

impl Context {
    fn new(cfg: &RunConfig) -> CliResult<Self> {
        cfg.validate()?;
        let start = Instant::now();
        let surrogate = load_surrogate(cfg)?;
        let ising = qubo_to_ising(&surrogate.qubo);
        let diag = ising.diagonal()?;
        Ok(Context {
            cfg: cfg.clone(),
            spec: cfg.ansatz.spec(ising.n()),
            backend: cfg.resolved_backend(ising.n())?,
            surrogate,
            ising,
            diag,
            model_s: start.elapsed().as_secs_f64(),
        })
    }

    fn level(&self, rank: usize, r: &VqeResult, beta: f64, attempts: usize) -> LevelReport {
        let k = r.top_bitstring.index() as usize;
        let oracle_energy = self.diag[k] + self.ising.offset();
        LevelReport {
            rank,
            bitstring: r.top_bitstring.to_string(),
            groups: group_string(&r.top_bitstring).ok(),
            energy: r.energy,
            exact_energy: r.exact_energy,
            oracle_energy,
            predicted_score: r.score,
            oracle_score: self.ising.score(oracle_energy),
            oracle_rank: self.diag.iter().filter(|&&e| e < self.diag[k]).count(),
            probability: r.top_probability,
            secondary: None,
            pass: true,
            beta,
            attempts,
            evals: r.evals,
            trace: r.trace.clone(),
        }
    }

    fn metadata(&self, beta: f64, levels_s: Vec<f64>, total_s: f64) -> RunMetadata {
        RunMetadata {
            version: env!("CARGO_PKG_VERSION").to_string(),
            n_qubits: self.ising.n(),
            ansatz: self.spec,
            mode: self.cfg.mode,
            optimizer_seed: self.cfg.optimizer.seed,
            train_seed: self.cfg.dataset.as_ref().map(|_| self.cfg.train.seed),
            fit: self.surrogate.fit.clone(),
            shots: match &self.backend {
                Backend::Sampled(s) => Some(s.shots),
                Backend::Exact => None,
            },
            backend: self.backend.clone(),
            beta,
            k: self.cfg.k,
            threshold: self.cfg.secondary.as_ref().map(|s| s.threshold),
            timings: Timings { model_s: self.model_s, levels_s, total_s },
        }
    }
}

/// Ground-state search only.
pub fn cmd_solve(cfg: &RunConfig) -> CliResult<SolveReport> {
    let start = Instant::now();
    let ctx = Context::new(cfg)?;
    let t = Instant::now();
    let result = vqe_run(&ctx.ising, &ctx.spec, &cfg.optimizer, &ctx.backend)?;
    let level = ctx.level(0, &result, 0.0, 1);
    let metadata = ctx.metadata(0.0, vec![t.elapsed().as_secs_f64()], start.elapsed().as_secs_f64());
    Ok(SolveReport { result, level, metadata })
}

/// Ground state plus `k` excited levels; with `stop_on_pass`, the search
/// ends at the first level that passes the secondary check.
fn run_levels(cfg: &RunConfig, stop_on_pass: bool) -> CliResult<ScreeningReport> {
    let start = Instant::now();
    let ctx = Context::new(cfg)?;
    let table = cfg.secondary.as_ref().map(|s| load_secondary(&s.path)).transpose()?;
    let threshold = cfg.secondary.as_ref().map(|s| s.threshold);
    let mut d = Deflator::new(&ctx.ising, &ctx.spec, &cfg.optimizer, &ctx.backend, cfg.mode, &cfg.beta)?;
    let mut levels = Vec::new();
    let mut times = Vec::new();
    let mut found = false;
    let mut stalled = false;
    for rank in 0..=cfg.k {
        let t = Instant::now();
        let Some(rec) = d.step()? else {
            stalled = true;
            break;
        };
        times.push(t.elapsed().as_secs_f64());
        let mut level = ctx.level(rank, &rec.result, rec.beta, rec.attempts);
        if let (Some(table), Some(th)) = (&table, threshold) {
            level.secondary = table.get(&level.bitstring).copied();
            level.pass = level.secondary.is_some_and(|v| v >= th);
        }
        found |= table.is_some() && level.pass;
        levels.push(level);
        if found && stop_on_pass {
            break;
        }
    }
    let status = match (table.is_some(), found, stalled) {
        (true, true, _) => ScreenStatus::Found,
        (_, _, true) => ScreenStatus::DeflationStalled,
        (false, _, _) => ScreenStatus::Unchecked,
        (true, false, _) => ScreenStatus::Exhausted,
    };
    let metadata = ctx.metadata(d.beta(), times, start.elapsed().as_secs_f64());
    Ok(ScreeningReport { status, levels, metadata })
}

pub fn cmd_deflate(cfg: &RunConfig) -> CliResult<ScreeningReport> {
    run_levels(cfg, false)
}

/// The screening loop: search the ground state, then deflate one level at a
/// time until a level passes the secondary check or `k` excited levels have
/// been tried.
pub fn cmd_screen(cfg: &RunConfig) -> CliResult<ScreeningReport> {
    run_levels(cfg, true)
}

/// The `k + 1` lowest distinct levels by enumeration.
pub fn cmd_oracle(cfg: &RunConfig) -> CliResult<Vec<OracleLevel>> {
    cfg.validate()?;
    let surrogate = load_surrogate(cfg)?;
    let s = exact_spectrum(&qubo_to_ising(&surrogate.qubo), cfg.k + 1)?;
    Ok(oracle_rows(&s))
}

/// Writes the full data set of a planted model plus Gaussian noise, and the
/// noiseless model itself as JSON.
pub fn cmd_gen_data(seed: u64, noise: f64, data_seed: u64, out: &Path, model_out: &Path) -> CliResult<QuboModel> {
    let model = planted_model(seed);
    let data = generate_dataset(&model, noise, data_seed)?;
    save_csv(out, &data)?;
    crate::config::write_json(model_out, &model)?;
    Ok(model)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainOptions {
    pub config: TrainConfig,
    /// Hold out a seeded random fraction of the data for `r_test`.
    pub test_fraction: Option<f64>,
    /// Run the stratified acquisition loop with this batch size.
    pub active_batch: Option<usize>,
    pub r_threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainOutput {
    pub model: FmModel,
    pub fit: FitReport,
    /// Per-round statistics of the acquisition loop, if it ran.
    pub rounds: Vec<FitReport>,
}

pub fn cmd_train(dataset: &Path, opts: &TrainOptions) -> CliResult<TrainOutput> {
    let data = load_csv(dataset)?;
    if let Some(batch) = opts.active_batch {
        let (model, rounds) = active_learning_loop(&data, batch, opts.r_threshold, &opts.config)?;
        // the loop returns the threshold-reaching round, else the best held-out R
        let r_test = |f: &FitReport| f.r_test.unwrap_or(f64::NEG_INFINITY);
        let last = rounds.last().expect("at least one round");
        let fit = if r_test(last) >= opts.r_threshold {
            last
        } else {
            rounds.iter().reduce(|best, f| if r_test(f) > r_test(best) { f } else { best }).expect("non-empty")
        };
        return Ok(TrainOutput { model, fit: fit.clone(), rounds });
    }
    let (train, test): (Vec<LabeledSample>, Vec<LabeledSample>) = match opts.test_fraction {
        Some(f) => {
            if !(0.0..1.0).contains(&f) {
                return Err(CliError::Config(format!("test fraction {f} must lie in [0, 1)")));
            }
            let n_test = (f * data.len() as f64).round() as usize;
            let (test_idx, train_idx) = random_split(data.len(), n_test, opts.config.seed);
            (train_idx.iter().map(|&i| data[i].clone()).collect(), test_idx.iter().map(|&i| data[i].clone()).collect())
        }
        None => (data, Vec::new()),
    };
    let (model, fit) = fm_train_eval(&train, &test, &opts.config)?;
    Ok(TrainOutput { model, fit, rounds: Vec::new() })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchEntry {
    pub n: usize,
    /// Single-qubit and CNOT gates applied per second by the R_y circuit.
    pub gates_per_s: f64,
    pub vqe_iterations_per_s: f64,
    /// Wall time of a ground state plus one excited level.
    pub deflation_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub entries: Vec<BenchEntry>,
}

fn random_model(n: usize, seed: u64) -> QuboModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lin = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
    let pairs: Vec<_> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .map(|(i, j)| (i, j, rng.random_range(-2.0..2.0)))
        .collect();
    QuboModel::new(0.0, lin, pairs, Sense::Minimize).expect("finite")
}

/// Fixed small workloads at each register size: a seeded random model,
/// R_y depth 1, one restart of 100 simplex iterations.
pub fn cmd_bench(sizes: &[usize], seed: u64) -> CliResult<BenchReport> {
    let mut entries = Vec::new();
    for &n in sizes {
        let m = qubo_to_ising(&random_model(n, seed));
        let spec = AnsatzSpec::ry(n, 1);
        let params: Vec<f64> = (0..spec.n_params()).map(|i| 0.1 * i as f64).collect();
        let circuit = build_ansatz(&spec, &m)?;
        let zero = Statevector::zero_state(n)?;
        let reps = (1usize << 22 >> n).max(4);
        let t = Instant::now();
        for _ in 0..reps {
            std::hint::black_box(apply_circuit(&circuit, &params, &zero)?);
        }
        let gates_per_s = (reps * circuit.gates().len()) as f64 / t.elapsed().as_secs_f64();

        let opt = OptimizerConfig { restarts: 1, max_iter: 100, seed, ..OptimizerConfig::default() };
        let t = Instant::now();
        let r = vqe_run(&m, &spec, &opt, &Backend::Exact)?;
        let vqe_iterations_per_s = r.iterations as f64 / t.elapsed().as_secs_f64();

        let t = Instant::now();
        let mut d = Deflator::new(&m, &spec, &opt, &Backend::Exact, DeflationMode::Cvqd, &BetaPolicy::default())?;
        d.step()?;
        d.step()?;
        let deflation_s = t.elapsed().as_secs_f64();
        entries.push(BenchEntry { n, gates_per_s, vqe_iterations_per_s, deflation_s });
    }
    Ok(BenchReport { entries })
}
