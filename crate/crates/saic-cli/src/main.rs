//! Command-line driver for the rendezvous compression experiments.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use saic::aggregation::{
    aggregated_value, compression_ratio, epsilon_of_partition, kmedian_1d_weighted,
    marginal_value, optimistic_marginal_value, return_gap_bound, uniform_non_goal,
    ConditionalDist,
};
use saic::harness::{
    config_hash, read_partition_csv, render_report, run_sweep, write_curve_csv,
    write_partition_csv, write_summary, write_value_grid_csv, ExperimentConfig, SummaryRow,
};
use saic::qcore::{
    load_central_qtable, save_agent_qtable, save_central_qtable, train_centralized,
    train_distributed, value_iteration, UpdateRule,
};
use saic::schemes::{
    ceil_log2, evaluate_exact, observation_occupancy, run_scheme, CentralPolicy, CommPolicy,
    DistributedPolicy, SchemeKind,
};

#[derive(Parser)]
#[command(name = "saic", about = "Rendezvous experiments under rate-limited communication", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct ConfigArgs {
    /// Experiment config file (key=value lines).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a config key, e.g. --set episodes=1000 (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

impl ConfigArgs {
    fn load(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::from_file(path)
                .with_context(|| format!("loading config {}", path.display()))?,
            None => ExperimentConfig::default(),
        };
        for entry in &self.overrides {
            let (key, value) = entry
                .split_once('=')
                .with_context(|| format!("override `{entry}` is not KEY=VALUE"))?;
            cfg.apply_override(key.trim(), value.trim())?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Train the centralized controller and dump its Q-table.
    TrainCentral {
        #[command(flatten)]
        config: ConfigArgs,
        /// Output directory.
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Training seed (defaults to the first config seed).
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Build the value-based observation partition from a central Q-table.
    Aggregate {
        #[command(flatten)]
        config: ConfigArgs,
        /// Central Q-table dump produced by train-central.
        #[arg(long)]
        qtable: PathBuf,
        /// Channel rate in bits.
        #[arg(long)]
        rate: u32,
        /// Value definition: "best-case" (pipeline default) or "expected".
        #[arg(long, default_value = "best-case")]
        values: String,
        /// Also export the joint-value row and aggregated values for this cell.
        #[arg(long)]
        fix_obs: Option<u16>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Train both distributed agents against a frozen partition.
    TrainDist {
        #[command(flatten)]
        config: ConfigArgs,
        /// Partition CSV, as written by aggregate or sweep.
        #[arg(long)]
        partition: PathBuf,
        /// Channel rate in bits (defaults to the smallest rate that fits).
        #[arg(long)]
        rate: Option<u32>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Run one scheme end to end.
    Run {
        /// Scheme name: centralized, saic, cic, lbic, hnc, hoc, hybrid, nocomm.
        scheme: String,
        #[command(flatten)]
        config: ConfigArgs,
        /// Channel rate in bits (defaults to the first config rate).
        #[arg(long)]
        rate: Option<u32>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Run the full (scheme, rate, seed) grid of a config or preset.
    Sweep {
        /// Preset name (resolved as presets/<name>.cfg) or a config path.
        target: String,
        #[command(flatten)]
        config: ConfigArgs,
        /// Parent directory for the run directory.
        #[arg(long, default_value = "runs")]
        out: PathBuf,
        /// Worker threads.
        #[arg(long, default_value_t = 4)]
        workers: usize,
    },
    /// Render the summary table of a finished run directory.
    Report {
        /// Run directory containing summary.csv.
        run_dir: PathBuf,
    },
}

fn resolve_preset(target: &str) -> Result<PathBuf> {
    let direct = Path::new(target);
    if direct.exists() {
        return Ok(direct.to_path_buf());
    }
    let preset = Path::new("presets").join(format!("{target}.cfg"));
    if preset.exists() {
        return Ok(preset);
    }
    bail!("`{target}` is neither a config file nor a preset under presets/")
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::TrainCentral { config, out, seed } => train_central(config, out, seed),
        Command::Aggregate { config, qtable, rate, values, fix_obs, out } => {
            aggregate(config, qtable, rate, &values, fix_obs, out)
        }
        Command::TrainDist { config, partition, rate, seed, out } => {
            train_dist(config, partition, rate, seed, out)
        }
        Command::Run { scheme, config, rate, seed, out } => run_one(&scheme, config, rate, seed, out),
        Command::Sweep { target, config, out, workers } => sweep(&target, config, out, workers),
        Command::Report { run_dir } => report(run_dir),
    }
}

fn train_central(config: ConfigArgs, out: PathBuf, seed: Option<u64>) -> Result<()> {
    let cfg = config.load()?;
    let spec = cfg.grid_spec()?;
    let seed = seed.unwrap_or(cfg.seeds[0]);
    let train_cfg = cfg.train_config(seed)?;

    let (q, record) = train_centralized(&spec, &train_cfg);
    std::fs::create_dir_all(&out)?;
    save_central_qtable(out.join("central_qtable.txt"), &q, cfg.gamma, seed)?;
    write_curve_csv(out.join("central_curve.csv"), &record, cfg.smooth_window)?;

    let vi = value_iteration(&spec, cfg.gamma, 1e-10)?;
    let optimum = vi.mean_value_over_starts(&spec);
    let eval = evaluate_exact(&CentralPolicy { table: &q }, &spec, cfg.gamma, cfg.horizon);
    println!(
        "trained {} episodes (seed {seed}); greedy return {:.4} vs optimal {:.4} (normalized {:.4})",
        cfg.episodes,
        eval.mean,
        optimum,
        eval.mean / optimum
    );
    println!("wrote {}", out.join("central_qtable.txt").display());
    Ok(())
}

fn aggregate(
    config: ConfigArgs,
    qtable: PathBuf,
    rate: u32,
    values_kind: &str,
    fix_obs: Option<u16>,
    out: PathBuf,
) -> Result<()> {
    let cfg = config.load()?;
    let spec = cfg.grid_spec()?;
    let (q, gamma, _seed) = load_central_qtable(&qtable)?;
    if q.cells() != spec.cells() {
        bail!("Q-table covers {} cells but the config grid has {}", q.cells(), spec.cells());
    }

    let obs_dist = uniform_non_goal(&spec);
    let values = match values_kind {
        "best-case" => optimistic_marginal_value(&q),
        "expected" => marginal_value(&q, &obs_dist)?,
        other => bail!("unknown --values `{other}` (use best-case or expected)"),
    };
    let occupancy = observation_occupancy(&CentralPolicy { table: &q }, &spec, cfg.horizon);
    let clustered = kmedian_1d_weighted(&values, &occupancy, 1usize << rate)?;
    let comm = CommPolicy::from_partition(&clustered.partition, rate)?;

    let epsilon = epsilon_of_partition(&values, &clustered.partition);
    let bound = return_gap_bound(epsilon, gamma)?;
    let ratio = compression_ratio(&obs_dist, &comm.message_distribution(&obs_dist))?;

    std::fs::create_dir_all(&out)?;
    write_partition_csv(out.join("partition.csv"), &clustered.partition, spec.side())?;
    write_value_grid_csv(out.join("marginal_values.csv"), &values, spec.side())?;
    println!(
        "{} classes, epsilon {:.6}, return-gap bound {:.6}, compression {ratio}",
        clustered.partition.num_clusters(),
        epsilon,
        bound
    );

    if let Some(cell) = fix_obs {
        if usize::from(cell) >= spec.cells() {
            bail!("--fix-obs {cell} outside the grid");
        }
        let joint = q.greedy_value();
        let row: Vec<f64> = (0..spec.cells())
            .map(|oj| joint[usize::from(cell) * spec.cells() + oj])
            .collect();
        write_value_grid_csv(out.join(format!("values_obs{cell}.csv")), &row, spec.side())?;
        let cond = ConditionalDist::uniform(&comm);
        let agg = aggregated_value(&joint, &comm, &cond)?;
        let agg_row: Vec<f64> = (0..comm.message_space())
            .map(|c| agg[usize::from(cell) * comm.message_space() + c])
            .collect();
        let rendered: Vec<String> = agg_row.iter().map(|v| format!("{v:.4}")).collect();
        println!("aggregated values at cell {cell}: [{}]", rendered.join(", "));
    }
    println!("wrote {}", out.join("partition.csv").display());
    Ok(())
}

fn train_dist(
    config: ConfigArgs,
    partition_path: PathBuf,
    rate: Option<u32>,
    seed: Option<u64>,
    out: PathBuf,
) -> Result<()> {
    let cfg = config.load()?;
    let spec = cfg.grid_spec()?;
    let (partition, side) = read_partition_csv(&partition_path)?;
    if side != spec.side() {
        bail!("partition is {side}x{side} but the config grid is {0}x{0}", spec.side());
    }
    let rate = rate.unwrap_or_else(|| ceil_log2(partition.num_clusters()));
    let comm = CommPolicy::from_partition(&partition, rate)?;
    let seed = seed.unwrap_or(cfg.seeds[0]);
    let train_cfg = cfg.train_config(seed)?;

    let (q1, q2, record) =
        train_distributed(&spec, &comm, &comm, &train_cfg, UpdateRule::Optimistic);
    std::fs::create_dir_all(&out)?;
    save_agent_qtable(out.join("agent1_qtable.txt"), &q1, cfg.gamma, seed)?;
    save_agent_qtable(out.join("agent2_qtable.txt"), &q2, cfg.gamma, seed)?;
    write_curve_csv(out.join("distributed_curve.csv"), &record, cfg.smooth_window)?;

    let vi = value_iteration(&spec, cfg.gamma, 1e-10)?;
    let optimum = vi.mean_value_over_starts(&spec);
    let policy = DistributedPolicy { q1: &q1, q2: &q2, comm1: &comm, comm2: &comm };
    let eval = evaluate_exact(&policy, &spec, cfg.gamma, cfg.horizon);
    println!(
        "distributed return {:.4} vs optimal {:.4} (normalized {:.4})",
        eval.mean,
        optimum,
        eval.mean / optimum
    );
    Ok(())
}

fn run_one(
    scheme: &str,
    config: ConfigArgs,
    rate: Option<u32>,
    seed: Option<u64>,
    out: PathBuf,
) -> Result<()> {
    let cfg = config.load()?;
    let spec = cfg.grid_spec()?;
    let kind: SchemeKind = scheme.parse()?;
    let rate = rate.unwrap_or(cfg.rate_bits[0]);
    let seed = seed.unwrap_or(cfg.seeds[0]);
    let train_cfg = cfg.train_config(seed)?;

    let vi = value_iteration(&spec, cfg.gamma, 1e-10)?;
    let optimum = vi.mean_value_over_starts(&spec);
    let outcome = run_scheme(kind, &spec, &train_cfg, rate, optimum)?;

    std::fs::create_dir_all(&out)?;
    let tag = format!("{kind}_r{rate}_s{seed}");
    if !outcome.result.record.is_empty() {
        write_curve_csv(out.join(format!("curve_{tag}.csv")), &outcome.result.record, cfg.smooth_window)?;
    }
    if let Some(partition) = &outcome.partition {
        write_partition_csv(out.join(format!("partition_{tag}.csv")), partition, spec.side())?;
    }
    if let Some(values) = &outcome.marginal_values {
        write_value_grid_csv(out.join(format!("values_{tag}.csv")), values, spec.side())?;
    }
    let row = SummaryRow::from_result(&outcome.result, cfg.smooth_window);
    write_summary(out.join(format!("summary_{tag}.csv")), &[row])?;

    println!(
        "{kind} R={rate} seed={seed}: return {:.4}, normalized {:.4}{}",
        outcome.result.mean_return,
        outcome.result.normalized,
        match (outcome.result.epsilon, outcome.result.bound) {
            (Some(e), Some(b)) => format!(", epsilon {e:.4}, bound {b:.4}"),
            _ => String::new(),
        }
    );
    Ok(())
}

fn sweep(target: &str, config: ConfigArgs, out: PathBuf, workers: usize) -> Result<()> {
    let path = resolve_preset(target)?;
    let mut args = config;
    args.config = Some(path);
    let cfg = args.load()?;

    let stamp = SystemTime::now().duration_since(UNIX_EPOCH)?.as_secs();
    let run_dir = out.join(format!("{}-{stamp}", config_hash(&cfg)));
    let report = run_sweep(&cfg, &run_dir, workers)?;

    println!(
        "{} cells done, {} failed; centralized optimum {:.4}",
        report.results.len(),
        report.failures.len(),
        report.centralized_optimum
    );
    let rows = saic::harness::read_summary(run_dir.join("summary.csv"))?;
    print!("{}", render_report(&rows));
    println!("run directory: {}", run_dir.display());
    for failure in &report.failures {
        eprintln!("FAILED {}: {}", failure.cell.tag(), failure.message);
    }
    if !report.failures.is_empty() {
        std::process::exit(1);
    }
    Ok(())
}

fn report(run_dir: PathBuf) -> Result<()> {
    let rows = saic::harness::read_summary(run_dir.join("summary.csv"))?;
    print!("{}", render_report(&rows));
    Ok(())
}
