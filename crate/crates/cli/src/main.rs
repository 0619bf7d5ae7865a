use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use aic_core::config::BatchConfig;
use aic_core::harness::{run_batch, run_episode, BatchSummary, Outcome, TrialMetrics};
use aic_core::output::{self, SweepRow};
use aic_core::{Error, RunConfig, SweepParam};
use clap::{Args, Parser, Subcommand};

const EXIT_CONFIG: u8 = 1;
const EXIT_DIVERGED: u8 = 2;

/// Simulate active inference controllers (AIC and u-AIC) on joint-space plants.
#[derive(Parser, Debug)]
#[command(name = "aicsim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one episode per scenario and write its trajectory and metrics.
    Simulate(Common),
    /// Run seeded trials per scenario and write the summary tables.
    Batch(Common),
    /// Re-run every scenario once per parameter value.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// tau_inv, sigma_p or noise_std
        #[arg(long)]
        param: String,
        /// Values to sweep; `inf` disables the sigma_p prior.
        #[arg(long, num_args = 0.., allow_negative_numbers = true)]
        values: Vec<String>,
    },
}

#[derive(Args, Debug)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the configured seed (batch trial k uses seed + k).
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory [default: config `output_dir`, else `out`]
    #[arg(long, env = "AICSIM_OUT_DIR")]
    out: Option<PathBuf>,
    /// Overrides the number of batch trials.
    #[arg(long)]
    trials: Option<usize>,
    /// Also write the config after overrides to `effective_config.toml`.
    #[arg(long)]
    dump_effective_config: bool,
}

enum Failure {
    Config(String),
    Diverged(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Divergence { .. } => Failure::Diverged(e.to_string()),
            other => Failure::Config(other.to_string()),
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Failure + '_ {
    move |e| Failure::Config(format!("{}: {e}", path.display()))
}

struct Setup {
    cfg: RunConfig,
    out: PathBuf,
}

impl Common {
    fn load(&self) -> Result<Setup, Failure> {
        let mut cfg = RunConfig::load(&self.config)?;
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(trials) = self.trials {
            match &mut cfg.batch {
                Some(b) => b.trials = trials,
                None => {
                    cfg.batch = Some(BatchConfig {
                        trials,
                        randomize_collision: false,
                        start_range: [0.0, 3.0],
                        duration_range: [1.0, 3.0],
                    })
                }
            }
        }
        // build everything once so bad configs fail before any output
        cfg.scenarios()?;
        let out = self
            .out
            .clone()
            .or_else(|| cfg.output_dir.as_ref().map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("out"));
        Ok(Setup { cfg, out })
    }

    fn prepare(&self, setup: &Setup) -> Result<(), Failure> {
        fs::create_dir_all(&setup.out).map_err(io_err(&setup.out))?;
        if self.dump_effective_config {
            let path = setup.out.join("effective_config.toml");
            fs::write(&path, setup.cfg.to_toml()?).map_err(io_err(&path))?;
        }
        Ok(())
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path).map(BufWriter::new).map_err(io_err(path))
}

fn file_stem(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '.' { c } else { '_' })
        .collect()
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "not settled".to_owned(), |v| format!("{v:.4}"))
}

fn print_metrics_table(rows: &[(String, String, Option<TrialMetrics>)]) {
    println!(
        "{:<16} {:<6} {:>12} {:>12} {:>10} {:>12} {:>12}",
        "scenario", "ctrl", "e_ss [rad]", "t_s [s]", "os [%]", "RMSE [rad]", "track [rad]"
    );
    for (name, ctrl, m) in rows {
        match m {
            Some(m) => println!(
                "{:<16} {:<6} {:>12.4e} {:>12} {:>10.3} {:>12.4e} {:>12.4e}",
                name,
                ctrl,
                m.e_ss,
                fmt_opt(m.t_s),
                m.os,
                m.rmse_belief,
                m.tracking_rmse
            ),
            None => println!("{name:<16} {ctrl:<6} diverged"),
        }
    }
}

fn simulate(args: &Common) -> Result<(), Failure> {
    let setup = args.load()?;
    args.prepare(&setup)?;
    let mut rows = Vec::new();
    let mut diverged = Vec::new();
    for scenario in setup.cfg.scenarios()? {
        let outcome = run_episode(&scenario)?;
        let stem = file_stem(&scenario.name);
        let path = setup.out.join(format!("{stem}_trajectory.csv"));
        output::write_trajectory(create(&path)?, outcome.record()).map_err(io_err(&path))?;
        match &outcome {
            Outcome::Completed(ep) => {
                let path = setup.out.join(format!("{stem}_metrics.csv"));
                output::write_metrics(create(&path)?, &scenario.name, scenario.controller.label(), &ep.metrics)
                    .map_err(io_err(&path))?;
            }
            Outcome::Diverged { error, .. } => diverged.push(format!("{}: {error}", scenario.name)),
        }
        rows.push((scenario.name.clone(), scenario.controller.label().to_owned(), outcome.metrics().cloned()));
    }
    print_metrics_table(&rows);
    if diverged.is_empty() {
        Ok(())
    } else {
        Err(Failure::Diverged(diverged.join("; ")))
    }
}

fn batch(args: &Common) -> Result<(), Failure> {
    let setup = args.load()?;
    args.prepare(&setup)?;
    let randomization = setup.cfg.randomization();
    let trials = setup.cfg.trials();
    let mut summaries: Vec<BatchSummary> = Vec::new();
    for scenario in setup.cfg.scenarios()? {
        summaries.push(run_batch(&scenario, trials, randomization.as_ref())?);
    }
    let path = setup.out.join("summary.csv");
    output::write_summary(create(&path)?, &summaries).map_err(io_err(&path))?;
    let path = setup.out.join("summary_detail.csv");
    output::write_summary_detail(create(&path)?, &summaries).map_err(io_err(&path))?;

    println!(
        "{:<16} {:>7} {:>9} {:>12} {:>12} {:>10} {:>12}",
        "scenario", "trials", "diverged", "e_ss [rad]", "t_s [s]", "os [%]", "RMSE [rad]"
    );
    for s in &summaries {
        println!(
            "{:<16} {:>7} {:>9} {:>12.4e} {:>12.4} {:>10.3} {:>12.4e}",
            s.scenario, s.n_trials, s.divergences, s.e_ss.mean, s.t_s.mean, s.os.mean, s.rmse_belief.mean
        );
    }
    let diverged: Vec<String> = summaries
        .iter()
        .flat_map(|s| {
            s.trials.iter().filter_map(move |t| {
                t.divergence.as_ref().map(|e| format!("{} trial {} (seed {}): {e}", s.scenario, t.index, t.seed))
            })
        })
        .collect();
    if diverged.is_empty() {
        Ok(())
    } else {
        Err(Failure::Diverged(diverged.join("; ")))
    }
}

fn sweep(args: &Common, param: &str, values: &[String]) -> Result<(), Failure> {
    let param: SweepParam = param.parse()?;
    if values.is_empty() {
        return Err(Failure::Config("sweep needs at least one value".into()));
    }
    let parsed = values
        .iter()
        .map(|v| {
            v.parse::<f64>()
                .map_err(|_| Failure::Config(format!("sweep value `{v}` is not a number")))
        })
        .collect::<Result<Vec<f64>, _>>()?;
    let setup = args.load()?;
    let configs = parsed
        .iter()
        .map(|&v| {
            let c = setup.cfg.with_param(param, v)?;
            c.scenarios()?;
            Ok(c)
        })
        .collect::<Result<Vec<_>, Failure>>()?;
    args.prepare(&setup)?;

    let mut rows = Vec::new();
    let mut diverged = Vec::new();
    for ((label, &value), cfg) in values.iter().zip(&parsed).zip(&configs) {
        for scenario in cfg.scenarios()? {
            let outcome = run_episode(&scenario)?;
            let path = setup.out.join(format!(
                "sweep_{}_{}_{}_trajectory.csv",
                param.name(),
                file_stem(label),
                file_stem(&scenario.name)
            ));
            output::write_trajectory(create(&path)?, outcome.record()).map_err(io_err(&path))?;
            if let Outcome::Diverged { error, .. } = &outcome {
                diverged.push(format!("{} = {label}, {}: {error}", param.name(), scenario.name));
            }
            rows.push(SweepRow {
                parameter: param.name().to_owned(),
                value,
                scenario: scenario.name.clone(),
                controller: scenario.controller.label().to_owned(),
                metrics: outcome.metrics().cloned(),
            });
        }
    }
    let path = setup.out.join(format!("sweep_{}.csv", param.name()));
    output::write_sweep(create(&path)?, &rows).map_err(io_err(&path))?;

    println!("{:>10} {:<16} {:>12} {:>10} {:>12} {:>14}", param.name(), "scenario", "e_ss [rad]", "os [%]", "RMSE [rad]", "du^2 mean");
    for r in &rows {
        match &r.metrics {
            Some(m) => println!(
                "{:>10} {:<16} {:>12.4e} {:>10.3} {:>12.4e} {:>14.4e}",
                r.value, r.scenario, m.e_ss, m.os, m.rmse_belief, m.control_increment_ms
            ),
            None => println!("{:>10} {:<16} diverged", r.value, r.scenario),
        }
    }
    if diverged.is_empty() {
        Ok(())
    } else {
        Err(Failure::Diverged(diverged.join("; ")))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Simulate(c) => simulate(c),
        Command::Batch(c) => batch(c),
        Command::Sweep { common, param, values } => sweep(common, param, values),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(Failure::Diverged(msg)) => {
            eprintln!("diverged: {msg}");
            ExitCode::from(EXIT_DIVERGED)
        }
    }
}
