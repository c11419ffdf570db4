use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::{parse_a_kind, AlgoChoice, ExperimentConfig, ExperimentKind, Settings};
use crate::error::{AppError, AppResult};
use crate::experiments::{self, CellStats, GridOutput};
use crate::plots;
use crate::record;

#[derive(Debug, Parser)]
#[command(name = "blinddeconv", version, about = "Blind deconvolution by regularized gradient descent")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one instance and dump its trace.
    Solve,
    /// Success fraction versus L.
    PhaseTransition,
    /// Success fraction over (mu_h2, L) with indicator channels.
    IncoherenceScan,
    /// regGrad versus Grad on a strongly coherent channel.
    LargeIncoherence,
    /// Mean relative error versus noise level.
    NoiseSweep,
    /// QPSK symbols through a synthetic multipath channel.
    CommsDemo,
    /// Sample the local isometry ratio around a ground truth.
    RipCheck,
    /// Write the plot script for an existing output directory.
    Plot,
}

impl Command {
    pub fn kind(&self) -> Option<ExperimentKind> {
        Some(match self {
            Command::Solve => ExperimentKind::SingleSolve,
            Command::PhaseTransition => ExperimentKind::PhaseTransition,
            Command::IncoherenceScan => ExperimentKind::IncoherenceScan,
            Command::LargeIncoherence => ExperimentKind::LargeIncoherence,
            Command::NoiseSweep => ExperimentKind::NoiseSweep,
            Command::CommsDemo => ExperimentKind::CommsDemo,
            Command::RipCheck => ExperimentKind::RipCheck,
            Command::Plot => return None,
        })
    }
}

#[derive(Debug, Args, Default)]
pub struct Flags {
    /// Master seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Trials per grid cell (samples for rip-check).
    #[arg(long, global = true)]
    pub trials: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_name = "gaussian|hadamard")]
    pub a_kind: Option<String>,
    #[arg(long, global = true, value_name = "reggrad|grad|both")]
    pub algo: Option<String>,
    /// Start from the unprojected spectral estimate.
    #[arg(long, global = true)]
    pub skip_projection: bool,
    /// Constant stepsize instead of backtracking.
    #[arg(long, global = true)]
    pub eta: Option<f64>,
    /// Flat `key = value` config file; flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(short = 'K', global = true)]
    pub k: Option<usize>,
    #[arg(short = 'N', global = true)]
    pub n: Option<usize>,
    /// Comma-separated L grid.
    #[arg(short = 'L', global = true, value_delimiter = ',')]
    pub l: Option<Vec<usize>>,
    /// Comma-separated noise levels.
    #[arg(long, global = true, value_delimiter = ',')]
    pub sigma: Option<Vec<f64>>,
    /// Comma-separated indicator-channel supports.
    #[arg(long, global = true, value_delimiter = ',')]
    pub mu_h2: Option<Vec<usize>>,
    #[arg(long, global = true)]
    pub max_iters: Option<usize>,
    #[arg(long, global = true)]
    pub power_iters: Option<usize>,
    /// Success threshold on the relative error.
    #[arg(long, global = true)]
    pub threshold: Option<f64>,
    /// Write wall_s as 0 so rows are reproducible byte for byte.
    #[arg(long, global = true)]
    pub no_timing: bool,
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Run only trial T of grid cell C and print its rows.
    #[arg(long, global = true, value_name = "C:T")]
    pub rerun: Option<String>,
}

impl Flags {
    pub fn settings(&self) -> AppResult<Settings> {
        Ok(Settings {
            seed: self.seed,
            trials: self.trials,
            out: self.out.clone(),
            a_kind: self.a_kind.as_deref().map(parse_a_kind).transpose()?,
            algo: self.algo.as_deref().map(str::parse::<AlgoChoice>).transpose()?,
            skip_projection: self.skip_projection.then_some(true),
            eta: self.eta,
            k: self.k,
            n: self.n,
            l: self.l.clone(),
            sigma: self.sigma.clone(),
            mu_h2: self.mu_h2.clone(),
            max_iters: self.max_iters,
            power_iters: self.power_iters,
            threshold: self.threshold,
            timing: self.no_timing.then_some(false),
            threads: self.threads,
        })
    }

    fn rerun(&self) -> AppResult<Option<(usize, usize)>> {
        let Some(spec) = &self.rerun else {
            return Ok(None);
        };
        let bad = || AppError::config(format!("--rerun expects CELL:TRIAL, got `{spec}`"));
        let (c, t) = spec.split_once(':').ok_or_else(bad)?;
        Ok(Some((c.trim().parse().map_err(|_| bad())?, t.trim().parse().map_err(|_| bad())?)))
    }
}

pub fn resolve(cli: &Cli) -> AppResult<Option<ExperimentConfig>> {
    let file = match &cli.flags.config {
        Some(p) => Settings::from_file(p)?,
        None => Settings::default(),
    };
    let settings = file.overridden_by(cli.flags.settings()?);
    cli.command
        .kind()
        .map(|k| ExperimentConfig::resolve(k, &settings))
        .transpose()
}

fn print_stats(stats: &[CellStats]) {
    println!("L,mu_h2,sigma,algo,successes/trials,mean_rel_err");
    for s in stats {
        println!(
            "{},{},{:.3e},{},{}/{},{:.3e}",
            s.l,
            s.mu_h2.map_or_else(|| "-".into(), |m| m.to_string()),
            s.sigma,
            s.algo.as_str(),
            s.successes,
            s.trials,
            s.mean_rel_err
        );
    }
}

fn finish_grid(out: GridOutput, dir: &std::path::Path) -> AppResult<()> {
    out.write(dir)?;
    print_stats(&out.stats);
    println!("wrote {}", dir.display());
    if out.aborted > 0 {
        return Err(AppError::NonFinite(format!(
            "{} solver run(s) hit a non-finite iterate",
            out.aborted
        )));
    }
    Ok(())
}

pub fn execute(cli: &Cli) -> AppResult<()> {
    let Some(cfg) = resolve(cli)? else {
        let dir = cli
            .flags
            .out
            .clone()
            .ok_or_else(|| AppError::config("plot needs --out <dir>"))?;
        let path = plots::emit_plots(&dir)?;
        println!("wrote {}", path.display());
        return Ok(());
    };
    if let Some((cell, trial)) = cli.flags.rerun()? {
        let rows = experiments::rerun(&cfg, cell, trial)?;
        print!("{}", record::RESULTS_HEADER.join(",") + "\n");
        for r in &rows {
            print!("{}", r.csv_row());
        }
        return Ok(());
    }
    let dir = cfg.out.clone();
    match cfg.kind {
        ExperimentKind::PhaseTransition => finish_grid(experiments::run_phase_transition(&cfg)?, &dir),
        ExperimentKind::IncoherenceScan | ExperimentKind::LargeIncoherence => {
            finish_grid(experiments::run_incoherence_scan(&cfg)?, &dir)
        }
        ExperimentKind::NoiseSweep => finish_grid(experiments::run_noise_sweep(&cfg)?, &dir),
        ExperimentKind::CommsDemo => finish_grid(experiments::run_comms_demo(&cfg)?, &dir),
        ExperimentKind::RipCheck => {
            let out = experiments::run_rip_check(&cfg)?;
            out.write(&dir, &cfg)?;
            println!(
                "{} samples, ratio range [{:.4}, {:.4}]",
                out.ratios.len(),
                out.min(),
                out.max()
            );
            Ok(())
        }
        ExperimentKind::SingleSolve => {
            let out = experiments::run_single(&cfg)?;
            out.write(&dir, &cfg)?;
            for (r, o) in out.records.iter().zip(&out.outcome.outcomes) {
                println!(
                    "{}: rel_err {:.3e}, {} iterations, {}",
                    r.algo.as_str(),
                    r.rel_err,
                    r.iters,
                    o.trace.termination.as_str()
                );
            }
            println!("wrote {}", dir.display());
            if out.outcome.aborted() {
                return Err(AppError::NonFinite("solver hit a non-finite iterate".into()));
            }
            Ok(())
        }
    }
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
