//! `coalsense` command-line front end.
//!
//! Configuration comes from an optional JSON file (see [`ScenarioConfig`]),
//! then `--set key=value` overrides, then the dedicated flags. Exit codes:
//! 0 on success, 1 on configuration or input errors, 2 when a combinatorial
//! capacity guard is hit.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::formation::{GameContext, Partition, StrategyRegistry};
use crate::game::max_coalition_size;
use crate::oracle::optimal_partition;
use crate::scenario::{
    deploy_random, metrics_csv, mobility_csv, mobility_run, sweep_network_size, sweep_pf,
    validate_random_coalitions, validation_csv, write_atomic, Mover, ScenarioConfig, Trajectory,
};
use crate::sensing::lambda_for_target_pf;

#[derive(Debug, Parser)]
#[command(name = "coalsense", version, about = "Coalition formation for collaborative spectrum sensing")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Average metrics per network size over drops and the pf grid.
    SweepN {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        out: PathBuf,
    },
    /// Metrics per pf target at a fixed network size.
    SweepPf {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        out: PathBuf,
    },
    /// Move one node in a straight line and re-form coalitions as it goes.
    Mobility {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        out: PathBuf,
        /// SU id to move; 0 moves the PU.
        #[arg(long, default_value_t = 1)]
        node: usize,
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        dx: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        dy: f64,
        /// Meters per tick.
        #[arg(long, default_value_t = 50.0)]
        step: f64,
        #[arg(long, default_value_t = 40)]
        steps: usize,
        /// Re-run coalition formation every this many ticks.
        #[arg(long, default_value_t = 1)]
        theta: usize,
    },
    /// Distributed and centralized partitions of one deployment.
    Snapshot {
        #[command(flatten)]
        common: Common,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        /// Which random drop to deploy.
        #[arg(long, default_value_t = 0)]
        drop: u64,
    },
    /// Check the fusion formulas against bit-level simulation.
    Validate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long, default_value_t = 50)]
        coalitions: usize,
    },
    /// Print the coalition-size bound for `alpha` and `pf`.
    Mmax {
        #[arg(long, default_value_t = 0.1)]
        alpha: f64,
        #[arg(long)]
        pf: f64,
    },
}

#[derive(Debug, Args)]
struct Common {
    /// JSON configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a configuration key, e.g. `--set drops=100`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    drops: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    /// Comma-separated pf targets (replaces the grid).
    #[arg(long, value_delimiter = ',')]
    pf: Option<Vec<f64>>,
    /// Comma-separated network sizes; `sweep-n` takes the list, other commands the first entry.
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<usize>>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    centralized_cap: Option<usize>,
    #[arg(long)]
    strategy: Option<String>,
}

impl Common {
    fn load(&self, sweep_sizes: bool) -> Result<ScenarioConfig> {
        let mut root = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Error::config("--config", format!("{}: {e}", path.display())))?;
                serde_json::from_str::<Value>(&text)
                    .map_err(|e| Error::config("--config", format!("{}: {e}", path.display())))?
            }
            None => Value::Object(Map::new()),
        };
        let obj = root
            .as_object_mut()
            .ok_or_else(|| Error::config("--config", "top level must be a JSON object"))?;
        for item in &self.overrides {
            let (key, raw) = item
                .split_once('=')
                .ok_or_else(|| Error::config(item.clone(), "override must look like key=value"))?;
            let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
            obj.insert(key.trim().to_string(), value);
        }
        let mut set = |k: &str, v: Value| {
            obj.insert(k.to_string(), v);
        };
        if let Some(v) = self.seed {
            set("seed", v.into());
        }
        if let Some(v) = self.drops {
            set("drops", v.into());
        }
        if let Some(v) = self.alpha {
            set("alpha", v.into());
        }
        if let Some(v) = &self.pf {
            set("pf_grid", v.clone().into());
        }
        if let Some(v) = &self.n {
            if sweep_sizes {
                set("n_list", v.clone().into());
            } else if let Some(&first) = v.first() {
                set("n_sus", first.into());
            }
        }
        if let Some(v) = self.threads {
            set("threads", v.into());
        }
        if let Some(v) = self.centralized_cap {
            set("centralized_cap", v.into());
        }
        if let Some(v) = &self.strategy {
            set("strategy", v.clone().into());
        }
        ScenarioConfig::from_value(root)
    }
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Capacity { .. } => 2,
        _ => 1,
    }
}

/// Parses `argv` (including the program name), runs the command and returns
/// the process exit code.
pub fn parse_and_run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match run(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn with_pool<T: Send>(config: &ScenarioConfig, job: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = config.threads {
        builder = builder.num_threads(t);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::config("threads", e.to_string()))?;
    pool.install(job)
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::SweepN { common, out } => {
            let config = common.load(true)?;
            let records = with_pool(&config, || sweep_network_size(&config, &config.n_list))?;
            write_atomic(&out, metrics_csv(&records)?.as_bytes())
        }
        Command::SweepPf { common, out } => {
            let config = common.load(false)?;
            let records = with_pool(&config, || sweep_pf(&config, config.n_sus))?;
            write_atomic(&out, metrics_csv(&records)?.as_bytes())
        }
        Command::Mobility {
            common,
            out,
            node,
            dx,
            dy,
            step,
            steps,
            theta,
        } => {
            let config = common.load(false)?;
            let ctx = single_context(&config, 0)?;
            let strategy = StrategyRegistry::with_builtins(config.centralized_cap).get(&config.strategy)?;
            let trajectory = Trajectory {
                mover: if node == 0 { Mover::Pu } else { Mover::Su(node) },
                direction: (dx, dy),
                step_m: step,
                n_steps: steps,
            };
            let trace = mobility_run(ctx.network(), trajectory, theta, &config.game(), strategy.as_ref())?;
            write_atomic(&out, mobility_csv(&trace)?.as_bytes())
        }
        Command::Snapshot { common, out, drop } => {
            let config = common.load(false)?;
            snapshot(&config, drop, &out)
        }
        Command::Validate {
            common,
            out,
            trials,
            coalitions,
        } => {
            let config = common.load(false)?;
            let rows = validate_random_coalitions(&config, coalitions, trials)?;
            let passed = rows.iter().filter(|r| r.within(4.0)).count();
            write_atomic(&out, validation_csv(&rows, 4.0)?.as_bytes())?;
            println!("{passed}/{} coalitions within 4 standard errors", rows.len());
            Ok(())
        }
        Command::Mmax { alpha, pf } => {
            println!("{}", max_coalition_size(alpha, pf).map_err(|e| Error::config("pf", e.to_string()))?);
            Ok(())
        }
    }
}

/// Network of drop `drop` at the first pf of the grid.
fn single_context(config: &ScenarioConfig, drop: u64) -> Result<GameContext> {
    let lambda = lambda_for_target_pf(config.pf_grid[0], config.m)?;
    let net = deploy_random(config, drop)?.with_params(config.radio(lambda))?;
    GameContext::new(net, config.game())
}

fn describe(out: &mut String, title: &str, p: &Partition) {
    let _ = writeln!(out, "{title}: avg missing {}, avg false alarm {}", p.avg_missing(), p.avg_false_alarm());
    for c in p.coalitions() {
        let _ = writeln!(
            out,
            "  {} head {}: Q_m {} Q_f {} value {}",
            c.members,
            c.head,
            c.qm(),
            c.qf(),
            c.utility()
        );
    }
    let _ = writeln!(out, "  utilities:");
    for (id, u) in p.utilities() {
        let _ = writeln!(out, "    SU {id}: {u}");
    }
}

/// Writes `distributed.txt`, `centralized.txt` (when enabled), `trace.log`
/// and `report.txt` into `dir`.
fn snapshot(config: &ScenarioConfig, drop: u64, dir: &Path) -> Result<()> {
    let ctx = single_context(config, drop)?;
    if config.centralized && ctx.n() > config.centralized_cap {
        return Err(Error::Capacity {
            what: "number of SUs for the centralized snapshot",
            requested: ctx.n(),
            limit: config.centralized_cap,
        });
    }
    let strategy = StrategyRegistry::with_builtins(config.centralized_cap).get(&config.strategy)?;
    let formed = strategy.form(&ctx, Partition::singletons(&ctx))?;
    let central = if config.centralized {
        Some(optimal_partition(&ctx, config.centralized_cap)?)
    } else {
        None
    };

    std::fs::create_dir_all(dir)?;
    let mut report = String::new();
    let _ = writeln!(report, "N = {}, P_f = {}, alpha = {}", ctx.n(), ctx.pf(), ctx.alpha());
    for (id, pos) in ctx.network().nodes() {
        let _ = writeln!(report, "SU {id} at ({}, {}), P_m {}", pos.x, pos.y, ctx.pm(id));
    }
    describe(&mut report, &format!("distributed ({})", strategy.name()), &formed.partition);
    write_atomic(&dir.join("distributed.txt"), formed.partition.snapshot().as_bytes())?;
    write_atomic(&dir.join("trace.log"), formed.trace.to_log().as_bytes())?;
    if let Some(sol) = central {
        describe(&mut report, "centralized", &sol.partition);
        write_atomic(&dir.join("centralized.txt"), sol.partition.snapshot().as_bytes())?;
    }
    write_atomic(&dir.join("report.txt"), report.as_bytes())?;
    print!("{report}");
    Ok(())
}
