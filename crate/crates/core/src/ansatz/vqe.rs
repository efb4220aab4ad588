use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::objective::{Evaluator, Measurement, Penalty, Sampling};
use super::{build_ansatz, AnsatzKind, AnsatzSpec};
use crate::error::{Error, Result};
use crate::mitigation::{mitigate, mitigated_expectation, ConfusionSpec};
use crate::optim::{nelder_mead, spsa, Minimum, SimplexOptions, SpsaGains};
use crate::problem::{Bitstring, IsingModel};
use crate::rng::stream;
use crate::sim::{Circuit, ReadoutNoise};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerKind {
    Simplex,
    Spsa,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerConfig {
    pub kind: OptimizerKind,
    pub max_iter: usize,
    pub seed: u64,
    /// Independent local searches; the best one wins.
    pub restarts: usize,
    pub spsa: SpsaGains,
    pub x_tol: f64,
    pub f_tol: f64,
    /// Edge length of the initial simplex.
    pub simplex_step: f64,
    /// First-restart R_y angles are uniform in `(-init_range, init_range)`.
    pub init_range: f64,
    /// Later restarts draw from `(-restart_range, restart_range)`.
    pub restart_range: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            kind: OptimizerKind::Simplex,
            max_iter: 5000,
            seed: 0,
            restarts: 20,
            spsa: SpsaGains::default(),
            x_tol: 1e-6,
            f_tol: 1e-9,
            simplex_step: 0.5,
            init_range: 0.1,
            restart_range: std::f64::consts::PI,
        }
    }
}

impl OptimizerConfig {
    pub fn spsa(max_iter: usize, seed: u64) -> Self {
        OptimizerConfig { kind: OptimizerKind::Spsa, max_iter, seed, restarts: 1, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iter == 0 || self.restarts == 0 {
            return Err(Error::InvalidParameter("max_iter and restarts must be positive".into()));
        }
        if !(self.x_tol > 0.0
            && self.f_tol > 0.0
            && self.simplex_step > 0.0
            && self.init_range > 0.0
            && self.restart_range > 0.0)
        {
            return Err(Error::InvalidParameter("simplex tolerances, step and init range must be positive".into()));
        }
        self.spsa.validate()
    }

    fn simplex_options(&self) -> SimplexOptions {
        SimplexOptions {
            max_iter: self.max_iter,
            x_tol: self.x_tol,
            f_tol: self.f_tol,
            initial_step: self.simplex_step,
        }
    }
}

/// Finite-shot execution, optionally with classical readout noise and
/// readout-error mitigation of the final estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledBackend {
    pub shots: u64,
    pub seed: u64,
    #[serde(default)]
    pub noise: Option<ReadoutNoise>,
    /// Mitigate the final estimate: energy, top bitstring and probability.
    #[serde(default)]
    pub mitigate: bool,
    /// Calibration used for mitigation; defaults to the channel in `noise`.
    #[serde(default)]
    pub confusion: Option<ConfusionSpec>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Backend {
    #[default]
    Exact,
    Sampled(SampledBackend),
}

impl Backend {
    pub fn sampled(shots: u64, seed: u64) -> Self {
        Backend::Sampled(SampledBackend { shots, seed, noise: None, mitigate: false, confusion: None })
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Backend::Exact)
    }

    fn sampling(&self, restart: u64) -> Sampling<'_> {
        match self {
            Backend::Exact => Sampling::Exact,
            Backend::Sampled(s) => {
                Sampling::Shots { shots: s.shots, noise: s.noise.as_ref(), rng: Box::new(stream(s.seed, restart)) }
            }
        }
    }
}

/// Result of one variational minimization. Energies are in the model's
/// internal (minimized) sign and include the offset; `score` undoes any
/// negation applied to a maximization problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VqeResult {
    pub params: Vec<f64>,
    /// Backend estimate of the mean energy at `params`, without penalty.
    pub energy: f64,
    pub score: f64,
    /// Noiseless `<psi(params)|H|psi(params)>`.
    pub exact_energy: f64,
    /// Best penalized objective value observed during the search.
    pub objective: f64,
    pub top_bitstring: Bitstring,
    pub top_probability: f64,
    pub evals: usize,
    pub iterations: usize,
    /// Index of the restart that produced the result.
    pub restart: usize,
    /// Objective (including offset) per iteration of the winning restart:
    /// best-so-far on the exact backend, the noisy iterate estimate otherwise.
    pub trace: Vec<f64>,
}

/// Minimizes the mean energy of `m` over the ansatz.
pub fn vqe_run(m: &IsingModel, spec: &AnsatzSpec, opt: &OptimizerConfig, backend: &Backend) -> Result<VqeResult> {
    run_penalized(m, spec, opt, backend, &Penalty::None, None)
}

/// Like [`vqe_run`] but with explicit starting parameters for every restart.
pub fn vqe_run_with_init(
    m: &IsingModel,
    spec: &AnsatzSpec,
    opt: &OptimizerConfig,
    backend: &Backend,
    init: &[f64],
) -> Result<VqeResult> {
    if init.len() != spec.n_params() {
        return Err(Error::LengthMismatch { expected: spec.n_params(), got: init.len() });
    }
    run_penalized(m, spec, opt, backend, &Penalty::None, Some(init))
}

struct Context<'a> {
    m: &'a IsingModel,
    diag: Vec<f64>,
    opt: &'a OptimizerConfig,
    backend: &'a Backend,
    penalty: &'a Penalty,
}

struct Local {
    min: Minimum,
    evals: usize,
}

pub(crate) fn run_penalized(
    m: &IsingModel,
    spec: &AnsatzSpec,
    opt: &OptimizerConfig,
    backend: &Backend,
    penalty: &Penalty,
    init: Option<&[f64]>,
) -> Result<VqeResult> {
    opt.validate()?;
    spec.validate(m)?;
    if let Backend::Sampled(s) = backend {
        if s.shots == 0 {
            return Err(Error::InvalidParameter("shots must be at least 1".into()));
        }
        if s.mitigate && s.noise.is_none() && s.confusion.is_none() {
            return Err(Error::InvalidParameter(
                "mitigation requires a readout-noise model or a confusion spec".into(),
            ));
        }
    }
    let ctx = Context { m, diag: m.diagonal()?, opt, backend, penalty };
    let circuit = build_ansatz(spec, m)?;

    let runs: Vec<Result<(Local, usize)>> = (0..opt.restarts)
        .into_par_iter()
        .map(|r| {
            let local = match (spec.kind, init) {
                (_, Some(x0)) => ctx.local(&circuit, x0, r as u64)?,
                (AnsatzKind::Ry, None) => {
                    let mut rng = stream(opt.seed, 2 * r as u64);
                    let w = if r == 0 { opt.init_range } else { opt.restart_range };
                    let x0: Vec<f64> = (0..spec.n_params()).map(|_| rng.random_range(-w..w)).collect();
                    ctx.local(&circuit, &x0, r as u64)?
                }
                (AnsatzKind::Qaoa, None) => ctx.qaoa_ladder(spec, r)?,
            };
            Ok((local, r))
        })
        .collect();
    let mut best: Option<(Local, usize)> = None;
    let mut evals = 0;
    for run in runs {
        let (local, r) = run?;
        evals += local.evals;
        if best.as_ref().is_none_or(|(b, _)| local.min.f < b.min.f) {
            best = Some((local, r));
        }
    }
    let (best, restart) = best.expect("at least one restart");
    ctx.finish(&circuit, best, restart, evals)
}

impl Context<'_> {
    fn evaluator<'c>(&'c self, circuit: &'c Circuit, restart: u64) -> Result<Evaluator<'c>> {
        Evaluator::new(circuit, &self.diag, self.penalty, self.backend.sampling(restart))
    }

    fn local(&self, circuit: &Circuit, x0: &[f64], restart: u64) -> Result<Local> {
        let mut ev = self.evaluator(circuit, restart)?;
        let mut min = match self.opt.kind {
            OptimizerKind::Simplex => nelder_mead(|x| ev.objective(x), x0, &self.opt.simplex_options())?,
            OptimizerKind::Spsa => {
                let mut rng = stream(self.opt.seed, 2 * restart + 1);
                let mut min = spsa(|x| ev.objective(x), x0, self.opt.max_iter, &self.opt.spsa, &mut rng)?;
                if self.backend.is_exact() {
                    let mut run = f64::INFINITY;
                    for v in min.trace.iter_mut() {
                        run = run.min(*v);
                        *v = run;
                    }
                }
                min
            }
        };
        min.trace.iter_mut().for_each(|v| *v += self.m.offset());
        Ok(Local { min, evals: ev.evals })
    }

    /// QAOA is solved layer by layer: a coarse `(gamma, beta)` grid seeds
    /// `p = 1`, and every deeper level starts from the previous optimum both
    /// interpolated and zero-padded. The zero-padded start reproduces the
    /// previous state, so the optimum never gets worse as `p` grows.
    fn qaoa_ladder(&self, spec: &AnsatzSpec, restart: usize) -> Result<Local> {
        let mut evals = 0;
        let circuit1 = build_ansatz(&AnsatzSpec::qaoa(spec.n_qubits, 1), self.m)?;
        let starts = self.qaoa_grid(&circuit1, &mut evals)?;
        // restart r refines the r-th best grid point
        let x0 = starts[restart % starts.len()].1.clone();
        let mut local = self.local(&circuit1, &x0, restart as u64)?;
        evals += local.evals;
        for p in 2..=spec.depth {
            let circuit = build_ansatz(&AnsatzSpec::qaoa(spec.n_qubits, p), self.m)?;
            let prev = &local.min.x;
            let mut best: Option<Local> = None;
            for x0 in [interpolate_qaoa(prev), [prev.as_slice(), &[0.0, 0.0]].concat()] {
                let cand = self.local(&circuit, &x0, restart as u64)?;
                evals += cand.evals;
                if best.as_ref().is_none_or(|b| cand.min.f < b.min.f) {
                    best = Some(cand);
                }
            }
            local = best.expect("two candidates");
        }
        local.evals = evals;
        Ok(local)
    }

    /// Grid points sorted by objective. `gamma` spans `(0, pi / s]` with `s`
    /// the largest local field magnitude; `beta` spans `[-pi/2, pi/2)`.
    fn qaoa_grid(&self, circuit: &Circuit, evals: &mut usize) -> Result<Vec<(f64, Vec<f64>)>> {
        let m = self.m;
        let s = (0..m.n())
            .map(|i| m.h()[i].abs() + (0..m.n()).filter(|&j| j != i).map(|j| m.coupling(i, j).abs()).sum::<f64>())
            .fold(0.0, f64::max)
            .max(f64::MIN_POSITIVE);
        let mut ev = self.evaluator(circuit, u64::MAX)?;
        let mut pts = Vec::with_capacity(QAOA_GRID * QAOA_GRID);
        let pi = std::f64::consts::PI;
        for a in 0..QAOA_GRID {
            for b in 0..QAOA_GRID {
                let gamma = (a + 1) as f64 * pi / (s * QAOA_GRID as f64);
                let beta = -pi / 2.0 + b as f64 * pi / QAOA_GRID as f64;
                let x = vec![gamma, beta];
                pts.push((ev.objective(&x), x));
            }
        }
        *evals += ev.evals;
        if pts.iter().any(|(f, _)| f.is_nan()) {
            return Err(Error::Divergence("QAOA grid scan produced NaN".into()));
        }
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(pts)
    }

    fn finish(&self, circuit: &Circuit, best: Local, restart: usize, evals: usize) -> Result<VqeResult> {
        let m = self.m;
        let mut ev = self.evaluator(circuit, u64::MAX - 1)?;
        let meas: Measurement = ev.measure(&best.min.x)?;
        let exact_energy = crate::sim::expectation_with_diagonal(&self.diag, ev.state())? + m.offset();
        let (mut top_bitstring, mut top_probability) = ev.top_of(&meas);
        let mut energy = meas.energy + m.offset();
        if let (Backend::Sampled(s), Some(hist)) = (self.backend, &meas.histogram) {
            if s.mitigate {
                let spec = match (&s.confusion, &s.noise) {
                    (Some(c), _) => c.clone(),
                    (None, Some(noise)) => ConfusionSpec::from(noise),
                    (None, None) => unreachable!("validated above"),
                };
                let quasi = mitigate(hist, &spec, crate::mitigation::DEFAULT_TOL)?;
                energy = mitigated_expectation(m, &quasi)? + m.offset();
                if let Some(top) = quasi.nearest_probability().most_likely() {
                    (top_bitstring, top_probability) = top;
                }
            }
        }
        Ok(VqeResult {
            params: best.min.x,
            energy,
            score: m.score(energy),
            exact_energy,
            objective: best.min.f + m.offset(),
            top_bitstring,
            top_probability,
            evals: evals + 1,
            iterations: best.min.iterations,
            restart,
            trace: best.min.trace,
        })
    }
}

const QAOA_GRID: usize = 8;

/// Linear interpolation of a depth-`p` QAOA schedule onto `p + 1` layers.
fn interpolate_qaoa(x: &[f64]) -> Vec<f64> {
    let p = x.len() / 2;
    let old = |k: usize, i: isize| -> f64 {
        if i < 0 || i as usize >= p {
            0.0
        } else {
            x[2 * i as usize + k]
        }
    };
    let mut out = Vec::with_capacity(2 * (p + 1));
    for i in 0..=p {
        let w = i as f64 / p as f64;
        for k in 0..2 {
            out.push(w * old(k, i as isize - 1) + (1.0 - w) * old(k, i as isize));
        }
    }
    out
}
