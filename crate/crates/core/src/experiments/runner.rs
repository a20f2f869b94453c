use std::io::{Read, Write};
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, ExperimentKind, Method};
use crate::datagen::{
    make_experiment_instance, make_randomized_design_over, sample_dataset, HardInstanceSpec,
    RewardMode,
};
use crate::error::Result;
use crate::estimator::{count_pairwise, lcb_estimates};
use crate::mle::{mle_assortment, MleConfig};
use crate::mnl::{suboptimality, MnlInstance, OfflineDataset};
use crate::optimizer::{optimize, OptimizeResult, DEFAULT_TOL};

/// Column order of the results CSV.
pub const CSV_HEADER: &str =
    "experiment,method,reward_mode,n_items,capacity,n,epsilon,replication,seed,subopt,wall_ms";

/// One CSV record: a single method on a single replication.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub experiment: ExperimentKind,
    pub method: Method,
    pub reward_mode: RewardMode,
    pub n_items: usize,
    pub capacity: usize,
    pub n: usize,
    pub epsilon: f64,
    pub replication: usize,
    pub seed: u64,
    pub subopt: f64,
    pub wall_ms: f64,
}

/// A replication that could not be run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunFailure {
    pub capacity: usize,
    pub n: usize,
    pub replication: usize,
    pub message: String,
}

/// How often the lower bounds stayed below the truth for every item.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CoverageTally {
    pub capacity: usize,
    pub n: usize,
    pub covered: usize,
    pub total: usize,
}

impl CoverageTally {
    pub fn fraction(&self) -> f64 {
        self.covered as f64 / self.total.max(1) as f64
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExperimentRun {
    pub rows: Vec<ResultRow>,
    pub failures: Vec<RunFailure>,
    /// Filled for `coverage_check` experiments only.
    pub lcb_coverage: Vec<CoverageTally>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Serial,
    #[default]
    Parallel,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of one replication, a pure function of its coordinates.
pub fn replication_seed(master_seed: u64, capacity: usize, n: usize, replication: usize) -> u64 {
    [capacity as u64, n as u64, replication as u64]
        .iter()
        .fold(splitmix64(master_seed), |acc, &part| splitmix64(acc ^ part))
}

#[derive(Debug, Clone, Copy)]
struct Task {
    k_index: usize,
    n_index: usize,
    capacity: usize,
    n: usize,
    replication: usize,
}

struct TaskOutput {
    task: Task,
    rows: Vec<ResultRow>,
    covered: Option<bool>,
    failure: Option<String>,
}

fn run_method(
    method: Method,
    dataset: &OfflineDataset,
    instance: &MnlInstance,
    delta: f64,
) -> Result<OptimizeResult> {
    let capacity = instance.capacity();
    match method {
        Method::Prb => {
            let counts = count_pairwise(dataset, instance.n_items())?;
            let estimates = lcb_estimates(&counts, delta)?;
            optimize(&estimates.v_lcb, instance.rewards(), capacity, DEFAULT_TOL)
        }
        Method::Mle => mle_assortment(dataset, instance.rewards(), capacity, &MleConfig::default()),
    }
}

fn run_task(config: &ExperimentConfig, task: Task) -> Result<TaskOutput> {
    let epsilon = config
        .epsilon_rule
        .epsilon(task.capacity, task.n, task.n_index);
    let seed = replication_seed(config.master_seed, task.capacity, task.n, task.replication);
    let spec = HardInstanceSpec::new(config.n_items, task.capacity, epsilon, config.reward_mode);
    let instance = make_experiment_instance(&spec)?;
    let best = optimize(instance.attractions(), instance.rewards(), task.capacity, DEFAULT_TOL)?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let design = make_randomized_design_over(
        config.n_items,
        task.capacity,
        config.observed_block.size(task.capacity),
        task.n,
        &mut rng,
    )?;
    let dataset = sample_dataset(&instance, &design, &mut rng)?;
    drop(design);

    let delta = config.effective_delta();
    let mut rows = Vec::with_capacity(config.methods.len());
    for &method in &config.methods {
        let start = Instant::now();
        let chosen = run_method(method, &dataset, &instance, delta)?;
        let wall_ms = start.elapsed().as_secs_f64() * 1e3;
        let subopt = suboptimality(&instance, &chosen.assortment, &best.assortment)?;
        rows.push(ResultRow {
            experiment: config.experiment,
            method,
            reward_mode: config.reward_mode,
            n_items: config.n_items,
            capacity: task.capacity,
            n: task.n,
            epsilon,
            replication: task.replication,
            seed,
            subopt,
            wall_ms,
        });
    }

    let covered = (config.experiment == ExperimentKind::CoverageCheck)
        .then(|| -> Result<bool> {
            let counts = count_pairwise(&dataset, instance.n_items())?;
            let estimates = lcb_estimates(&counts, delta)?;
            Ok(estimates
                .v_lcb
                .iter()
                .zip(instance.attractions())
                .all(|(lcb, v)| lcb <= v))
        })
        .transpose()?;

    Ok(TaskOutput {
        task,
        rows,
        covered,
        failure: None,
    })
}

/// Runs every `(K, n, replication)` cell of the config.
///
/// Each replication draws its instance, design and dataset from its own
/// seeded stream, and all methods are scored on the same dataset. Output
/// order is `(K, n, method, replication)` following the config lists, so the
/// result does not depend on `execution`.
pub fn run_experiment_with(config: &ExperimentConfig, execution: Execution) -> Result<ExperimentRun> {
    config.validate()?;
    let mut tasks = Vec::new();
    for (k_index, &capacity) in config.capacity_list.iter().enumerate() {
        for (n_index, &n) in config.n_list.iter().enumerate() {
            for replication in 0..config.replications {
                tasks.push(Task {
                    k_index,
                    n_index,
                    capacity,
                    n,
                    replication,
                });
            }
        }
    }

    let run = |task: Task| match run_task(config, task) {
        Ok(out) => out,
        Err(e) => TaskOutput {
            task,
            rows: Vec::new(),
            covered: None,
            failure: Some(e.to_string()),
        },
    };
    let outputs: Vec<TaskOutput> = match execution {
        Execution::Serial => tasks.into_iter().map(run).collect(),
        Execution::Parallel => tasks.into_par_iter().map(run).collect(),
    };

    let method_rank = |m: Method| config.methods.iter().position(|x| *x == m).unwrap_or(usize::MAX);
    let mut result = ExperimentRun::default();
    let mut keyed_rows = Vec::new();
    for out in &outputs {
        let t = out.task;
        for row in &out.rows {
            keyed_rows.push(((t.k_index, t.n_index, method_rank(row.method), t.replication), row.clone()));
        }
        if let Some(message) = &out.failure {
            result.failures.push(RunFailure {
                capacity: t.capacity,
                n: t.n,
                replication: t.replication,
                message: message.clone(),
            });
        }
        if let Some(covered) = out.covered {
            match result
                .lcb_coverage
                .iter_mut()
                .find(|c| c.capacity == t.capacity && c.n == t.n)
            {
                Some(tally) => {
                    tally.total += 1;
                    tally.covered += covered as usize;
                }
                None => result.lcb_coverage.push(CoverageTally {
                    capacity: t.capacity,
                    n: t.n,
                    covered: covered as usize,
                    total: 1,
                }),
            }
        }
    }
    keyed_rows.sort_by_key(|(key, _)| *key);
    result.rows = keyed_rows.into_iter().map(|(_, row)| row).collect();
    Ok(result)
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentRun> {
    run_experiment_with(config, Execution::Parallel)
}

/// Writes the header and one line per row, LF-terminated.
pub fn write_csv<W: Write>(rows: &[ResultRow], writer: W) -> Result<()> {
    let mut out = csv::WriterBuilder::new()
        .has_headers(false)
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(writer);
    out.write_record(CSV_HEADER.split(','))?;
    for row in rows {
        out.serialize(row)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(reader: R) -> Result<Vec<ResultRow>> {
    let mut input = csv::Reader::from_reader(reader);
    let rows = input.deserialize().collect::<std::result::Result<Vec<ResultRow>, _>>()?;
    Ok(rows)
}
