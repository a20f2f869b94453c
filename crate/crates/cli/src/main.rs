//! `mnl-offline`: command-line front end for the offline MNL assortment toolkit.

use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use mnl_offline::datagen::make_randomized_design_over;
use mnl_offline::experiments::{
    capacity_curve, loglog_slope, presets, read_csv, run_experiment_with, summarize, write_csv,
    Execution, ExperimentConfig, Method,
};
use mnl_offline::{
    brute_force_optimize, make_experiment_instance, make_fixed_lb_design, make_hard_instance,
    mle_fit, optimize, prb_estimate, sample_dataset, Assortment, HardInstanceSpec, MleConfig,
    MnlInstance, OfflineDataset, RewardMode,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Parser)]
#[command(name = "mnl-offline", version, about = "Offline MNL assortment optimization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Uniform,
    NonUniform,
}

impl From<ModeArg> for RewardMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Uniform => RewardMode::Uniform,
            ModeArg::NonUniform => RewardMode::NonUniform,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum DesignArg {
    /// `{⌈i/n_min⌉, 4K+1, …, 5K-1}` for i = 1..4K·n_min.
    Fixed,
    /// Each anchor item with K-1 random decoys, `reps` times.
    Randomized,
}

#[derive(Subcommand)]
enum Command {
    /// Run a simulation study and write its CSV.
    Run {
        #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
        config: Option<PathBuf>,
        /// Built-in study instead of a config file.
        #[arg(long)]
        preset: Option<String>,
        /// Override the config's master seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the config's output path.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Run replications one after another on the calling thread.
        #[arg(long)]
        serial: bool,
    },
    /// Print a built-in study config as JSON (or list the names).
    Preset { name: Option<String> },
    /// Write a hard instance as JSON.
    GenInstance {
        #[arg(long)]
        n_items: usize,
        #[arg(long)]
        capacity: usize,
        #[arg(long)]
        epsilon: f64,
        #[arg(long, value_enum, default_value = "non-uniform")]
        reward_mode: ModeArg,
        /// Comma-separated optimal block (default 1..=K).
        #[arg(long, value_delimiter = ',')]
        n_opt: Option<Vec<usize>>,
        /// Allow epsilon >= 1/(4K).
        #[arg(long)]
        allow_large_gap: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample a dataset (JSON lines) from an instance and a design.
    GenData {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_enum, default_value = "randomized")]
        design: DesignArg,
        /// n_min for the fixed design, repetitions per anchor for the randomized one.
        #[arg(long)]
        reps: usize,
        /// Randomized design: anchor only items 1..=observed (default 4K).
        #[arg(long)]
        observed: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the design, one assortment per line.
        #[arg(long)]
        design_out: Option<PathBuf>,
    },
    /// Pessimistic rank-breaking estimates for a dataset.
    ///
    /// The bound uses log(1/delta) per item. Pass --union-bound to use
    /// delta/N instead, which makes the bound hold for all items at once.
    Estimate {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        n_items: usize,
        #[arg(long, default_value_t = 0.05)]
        delta: f64,
        #[arg(long)]
        union_bound: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Revenue-maximizing assortment for an instance's attraction vector.
    Optimize {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        /// Enumerate all subsets instead (N <= 22).
        #[arg(long)]
        brute_force: bool,
    },
    /// Maximum-likelihood attraction fit.
    Mle {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        n_items: usize,
        #[arg(long, default_value_t = 5000)]
        max_iterations: usize,
        #[arg(long, default_value_t = 1.0)]
        step_size: f64,
        #[arg(long, default_value_t = 1e-6)]
        grad_tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Mean and standard error per (method, K, n) of a results CSV.
    Summarize {
        #[arg(long)]
        csv: PathBuf,
    },
    /// Log-log slope of mean suboptimality against K.
    Slope {
        #[arg(long)]
        csv: PathBuf,
        #[arg(long, default_value = "prb")]
        method: String,
        #[arg(long)]
        n: usize,
    },
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)?;
            }
            Box::new(BufWriter::new(
                File::create(p).with_context(|| format!("creating {}", p.display()))?,
            ))
        }
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

fn write_json<T: serde::Serialize>(value: &T, path: Option<&Path>) -> Result<()> {
    let mut out = output(path)?;
    serde_json::to_writer(&mut out, value)?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(())
}

fn read_dataset(path: &Path) -> Result<OfflineDataset> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    Ok(OfflineDataset::read_jsonl(BufReader::new(file))?)
}

fn read_instance(path: &Path) -> Result<MnlInstance> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn run(
    config: Option<PathBuf>,
    preset: Option<String>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    serial: bool,
) -> Result<()> {
    let mut config = match (config, preset) {
        (Some(path), _) => {
            let text = fs::read_to_string(&path)
                .with_context(|| format!("reading {}", path.display()))?;
            ExperimentConfig::from_json(&text)?
        }
        (None, Some(name)) => presets::preset(&name)?,
        (None, None) => bail!("either --config or --preset is required"),
    };
    if let Some(seed) = seed {
        config.master_seed = seed;
    }
    let out = out.unwrap_or_else(|| PathBuf::from(&config.output_path));
    let execution = if serial {
        Execution::Serial
    } else {
        Execution::Parallel
    };

    let result = run_experiment_with(&config, execution)?;
    write_csv(&result.rows, output(Some(&out))?)?;

    let mut err = io::stderr().lock();
    for failure in &result.failures {
        writeln!(
            err,
            "failed: K={} n={} replication={}: {}",
            failure.capacity, failure.n, failure.replication, failure.message
        )?;
    }
    writeln!(err, "method,capacity,n,replications,mean_subopt,std_err")?;
    for s in summarize(&result.rows) {
        writeln!(
            err,
            "{},{},{},{},{},{}",
            s.method.as_str(),
            s.capacity,
            s.n,
            s.replications,
            s.mean,
            s.std_err
        )?;
    }
    for tally in &result.lcb_coverage {
        writeln!(
            err,
            "lcb_coverage K={} n={}: {}/{} = {}",
            tally.capacity,
            tally.n,
            tally.covered,
            tally.total,
            tally.fraction()
        )?;
    }
    writeln!(err, "wrote {} rows to {}", result.rows.len(), out.display())?;
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            config,
            preset,
            seed,
            out,
            serial,
        } => run(config, preset, seed, out, serial)?,
        Command::Preset { name: None } => {
            for name in presets::PRESET_NAMES {
                println!("{name}");
            }
        }
        Command::Preset { name: Some(name) } => {
            let config = presets::preset(&name)?;
            println!("{}", serde_json::to_string_pretty(&config)?);
        }
        Command::GenInstance {
            n_items,
            capacity,
            epsilon,
            reward_mode,
            n_opt,
            allow_large_gap,
            out,
        } => {
            let mut spec = HardInstanceSpec::new(n_items, capacity, epsilon, reward_mode.into());
            if let Some(items) = n_opt {
                spec = spec.with_n_opt(Assortment::from_unsorted(items)?);
            }
            let instance = if allow_large_gap {
                make_experiment_instance(&spec)?
            } else {
                make_hard_instance(&spec)?
            };
            write_json(&instance, out.as_deref())?;
        }
        Command::GenData {
            instance,
            design,
            reps,
            observed,
            seed,
            out,
            design_out,
        } => {
            let instance = read_instance(&instance)?;
            let (n, k) = (instance.n_items(), instance.capacity());
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let design = match design {
                DesignArg::Fixed => make_fixed_lb_design(n, k, reps)?,
                DesignArg::Randomized => {
                    make_randomized_design_over(n, k, observed.unwrap_or(4 * k), reps, &mut rng)?
                }
            };
            if let Some(path) = design_out {
                design.write_jsonl(output(Some(&path))?)?;
            }
            let dataset = sample_dataset(&instance, &design, &mut rng)?;
            dataset.write_jsonl(output(out.as_deref())?)?;
        }
        Command::Estimate {
            data,
            n_items,
            delta,
            union_bound,
            out,
        } => {
            let dataset = read_dataset(&data)?;
            let delta = if union_bound {
                delta / n_items as f64
            } else {
                delta
            };
            let estimates = prb_estimate(&dataset, n_items, delta)?;
            write_json(&estimates, out.as_deref())?;
        }
        Command::Optimize {
            instance,
            tol,
            brute_force,
        } => {
            let instance = read_instance(&instance)?;
            let (v, r, k) = (instance.attractions(), instance.rewards(), instance.capacity());
            let result = if brute_force {
                brute_force_optimize(v, r, k)?
            } else {
                optimize(v, r, k, tol)?
            };
            write_json(&result, None)?;
        }
        Command::Mle {
            data,
            n_items,
            max_iterations,
            step_size,
            grad_tol,
            out,
        } => {
            let dataset = read_dataset(&data)?;
            let config = MleConfig {
                max_iterations,
                step_size,
                grad_tol,
                theta_init: None,
            };
            let fit = mle_fit(&dataset, n_items, &config)?;
            write_json(&fit, out.as_deref())?;
        }
        Command::Summarize { csv } => {
            let rows = read_csv(File::open(&csv).with_context(|| format!("opening {}", csv.display()))?)?;
            println!("method,capacity,n,replications,mean_subopt,std_err");
            for s in summarize(&rows) {
                println!(
                    "{},{},{},{},{},{}",
                    s.method.as_str(),
                    s.capacity,
                    s.n,
                    s.replications,
                    s.mean,
                    s.std_err
                );
            }
        }
        Command::Slope { csv, method, n } => {
            let method = match method.as_str() {
                "prb" => Method::Prb,
                "mle" => Method::Mle,
                other => bail!("unknown method {other:?}"),
            };
            let rows = read_csv(File::open(&csv).with_context(|| format!("opening {}", csv.display()))?)?;
            let curve = capacity_curve(&summarize(&rows), method, n);
            println!("{}", loglog_slope(&curve)?);
        }
    }
    Ok(())
}
