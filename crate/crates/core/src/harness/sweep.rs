use std::path::PathBuf;
use std::time::Instant;

use rayon::prelude::*;

use super::config::{MethodSelection, RegionSizeMode, RunConfig};
use super::results::{SweepResult, SweepRow};
use crate::error::{Error, Result};
use crate::model::{generate, ClusterLayout, ModelParams};
use crate::recovery::{assess, DEFAULT_THRESHOLD};
use crate::rng::{derive_seed, rng_from_seed};
use crate::solvers::{solve_blind, solve_intelligent, LambdaMode, Method, SolverConfig};

/// Environment variable that sets the worker count when no flag is given.
pub const WORKERS_ENV: &str = "DENSECLUSTER_WORKERS";

/// A phase-transition experiment: for each `p` in the grid, `trials`
/// graphs are drawn and each configured method is run on the same graph.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    pub layout: ClusterLayout,
    pub q: f64,
    pub p_grid: Vec<f64>,
    pub lambda_mode: LambdaMode,
    pub solver: SolverConfig,
    pub trials: usize,
    pub base_seed: u64,
    pub methods: MethodSelection,
    pub region_size_mode: RegionSizeMode,
    pub workers: Option<usize>,
    pub output: Option<PathBuf>,
}

impl SweepConfig {
    /// Defaults: 20 trials, seed 0, both methods, simulation weight.
    pub fn from_config(cfg: &RunConfig) -> Result<Self> {
        let layout = cfg.layout()?;
        let q = cfg
            .q
            .ok_or_else(|| Error::Config("sweep config is missing key `q`".into()))?;
        let p_grid = cfg
            .p_grid
            .clone()
            .ok_or_else(|| Error::Config("sweep config is missing key `p_grid`".into()))?;
        let lambda_mode = cfg.lambda_mode.unwrap_or(LambdaMode::Simulation);
        let lambda = cfg.lambda_for(layout.n(), lambda_mode);
        let config = SweepConfig {
            layout,
            q,
            p_grid,
            lambda_mode,
            solver: cfg.solver_config(lambda),
            trials: cfg.trials.unwrap_or(20),
            base_seed: cfg.base_seed.unwrap_or(0),
            methods: cfg.method.unwrap_or(MethodSelection::Both),
            region_size_mode: cfg.region_size_mode()?,
            workers: cfg.workers,
            output: cfg.output.clone(),
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.p_grid.is_empty() {
            return Err(Error::Config("p_grid is empty".into()));
        }
        if let Some(&p) = self.p_grid.iter().find(|&&p| !(p > self.q && p <= 1.0)) {
            return Err(Error::Config(format!(
                "grid value p = {p} outside (q, 1] with q = {}",
                self.q
            )));
        }
        self.solver.validate()?;
        self.params_at(self.p_grid[0])?;
        if self.methods.methods().contains(&Method::Intelligent) {
            self.region_size_mode.resolve(Some(&self.layout))?;
        }
        Ok(())
    }

    fn params_at(&self, p: f64) -> Result<ModelParams> {
        ModelParams::new(vec![p; self.layout.t()], self.q)
    }
}

/// Worker count: the explicit flag, then the environment variable, then
/// the config value, then the number of available cores.
pub fn resolve_workers(flag: Option<usize>, config: Option<usize>) -> Result<usize> {
    if let Some(n) = flag {
        return if n == 0 {
            Err(Error::Config("worker count must be at least 1".into()))
        } else {
            Ok(n)
        };
    }
    let env =
        match std::env::var(WORKERS_ENV) {
            Ok(v) => Some(v.trim().parse::<usize>().map_err(|_| {
                Error::Config(format!("{WORKERS_ENV}=`{v}` is not a worker count"))
            })?),
            Err(_) => None,
        };
    let chosen = env
        .or(config)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if chosen == 0 {
        return Err(Error::Config("worker count must be at least 1".into()));
    }
    Ok(chosen)
}

struct TrialOutcome {
    success: bool,
    iterations: usize,
    mismatch: usize,
    seconds: f64,
}

fn run_trial(config: &SweepConfig, point: usize, trial: usize) -> Result<Vec<TrialOutcome>> {
    let p = config.p_grid[point];
    let params = config.params_at(p)?;
    let seed = derive_seed(config.base_seed, point as u32, trial as u32);
    let graph = generate(&config.layout, &params, seed, &mut rng_from_seed(seed))?;
    let adjacency = graph.adjacency();
    let region = region_size(config)?;
    let mut out = Vec::new();
    for method in config.methods.methods() {
        let start = Instant::now();
        let solved = match method {
            Method::Blind => solve_blind(&adjacency, &config.solver),
            Method::Intelligent => solve_intelligent(&adjacency, region, &config.solver),
        };
        let seconds = start.elapsed().as_secs_f64();
        // A solver error or a run that hits the iteration cap counts as a
        // failed trial; it never stops the sweep.
        out.push(match solved {
            Ok(dec) => {
                let outcome = assess(&dec.low_rank, &config.layout, DEFAULT_THRESHOLD);
                TrialOutcome {
                    success: outcome.exact && dec.converged,
                    iterations: dec.iterations,
                    mismatch: outcome.mismatch_count,
                    seconds,
                }
            }
            Err(_) => TrialOutcome {
                success: false,
                iterations: config.solver.max_iter,
                mismatch: config.layout.region_size(),
                seconds,
            },
        });
    }
    Ok(out)
}

fn region_size(config: &SweepConfig) -> Result<f64> {
    match config.methods {
        MethodSelection::Blind => Ok(0.0),
        _ => config.region_size_mode.resolve(Some(&config.layout)),
    }
}

/// Runs every `(point, trial)` on a pool of `workers` threads. Trial seeds
/// come from [`derive_seed`], and rows are emitted point by point in grid
/// order with methods in the order blind, intelligent, so the output does
/// not depend on scheduling.
pub fn run_sweep(config: &SweepConfig, workers: usize) -> Result<SweepResult> {
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    let tasks: Vec<(usize, usize)> = (0..config.p_grid.len())
        .flat_map(|point| (0..config.trials).map(move |trial| (point, trial)))
        .collect();
    let outcomes: Vec<Vec<TrialOutcome>> = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(point, trial)| run_trial(config, point, trial))
            .collect::<Result<_>>()
    })?;

    let methods = config.methods.methods();
    let mut rows = Vec::new();
    for (point, &p) in config.p_grid.iter().enumerate() {
        let trials = &outcomes[point * config.trials..(point + 1) * config.trials];
        for (m, &method) in methods.iter().enumerate() {
            let count = trials.len() as f64;
            let mean = |f: &dyn Fn(&TrialOutcome) -> f64| {
                trials.iter().map(|t| f(&t[m])).sum::<f64>() / count
            };
            rows.push(SweepRow {
                method,
                p,
                trials: trials.len(),
                successes: trials.iter().filter(|t| t[m].success).count(),
                mean_iterations: mean(&|t| t.iterations as f64),
                mean_mismatch: mean(&|t| t.mismatch as f64),
                mean_solve_seconds: mean(&|t| t.seconds),
            });
        }
    }
    Ok(SweepResult { rows })
}
