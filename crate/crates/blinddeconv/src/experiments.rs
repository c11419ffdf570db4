//! Monte Carlo grids over `(channel, L, sigma)` cells, summaries and the
//! files each experiment writes.

use std::path::{Path, PathBuf};

use rayon::prelude::*;

use blinddeconv_core::numeric::{cvec, RngStream};
use blinddeconv_core::objective::{empirical_rip_ratio, RegParams, MAX_EPS};
use blinddeconv_core::C64;

use crate::config::{Algo, ExperimentConfig, ExperimentKind};
use crate::error::{AppError, AppResult};
use crate::plots;
use crate::record::{self, fmt_f64, TrialRecord};
use crate::trial::{self, CellSpec, Channel, Signal, TrialOutcome};

/// Tap power decay constant of the synthetic multipath channel.
pub const MULTIPATH_DECAY: f64 = 32.0;

pub const SUMMARY_HEADER: [&str; 10] = [
    "L",
    "ratio",
    "mu_h2",
    "sigma",
    "algo",
    "trials",
    "successes",
    "fraction",
    "mean_rel_err",
    "mean_rel_err_db",
];

pub const SER_HEADER: [&str; 8] = ["seed", "trial", "K", "N", "L", "algo", "rel_err", "ser"];

pub const RIP_HEADER: [&str; 2] = ["sample", "ratio"];

/// Cells of a grid experiment: channel model outermost, then `L`, then
/// `sigma`.
pub fn cells(cfg: &ExperimentConfig) -> Vec<CellSpec> {
    let channels: Vec<Channel> = match cfg.kind {
        ExperimentKind::CommsDemo => vec![Channel::Multipath {
            decay: MULTIPATH_DECAY,
        }],
        _ => cfg
            .channel_grid()
            .into_iter()
            .map(|m| m.map_or(Channel::Gaussian, Channel::Indicator))
            .collect(),
    };
    let signal = match cfg.kind {
        ExperimentKind::CommsDemo => Signal::Qpsk,
        _ => Signal::Gaussian,
    };
    let mut out = Vec::new();
    for &channel in &channels {
        for &l in &cfg.l_grid {
            for &sigma in &cfg.sigma_grid {
                out.push(CellSpec {
                    kind: cfg.kind,
                    k: cfg.k,
                    n: cfg.n,
                    l,
                    a_kind: cfg.a_kind,
                    sigma,
                    channel,
                    signal,
                });
            }
        }
    }
    out
}

fn with_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> AppResult<T> {
    match threads {
        None => Ok(f()),
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| AppError::config(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Runs every `(cell, trial)` pair in parallel and returns `f`'s results in
/// grid order, independent of scheduling.
pub fn execute<T, F>(cfg: &ExperimentConfig, cells: &[CellSpec], f: F) -> AppResult<Vec<T>>
where
    T: Send,
    F: Fn(&CellSpec, TrialOutcome) -> T + Sync + Send,
{
    let algos = cfg.algo.algos();
    let jobs: Vec<(usize, usize)> = (0..cells.len())
        .flat_map(|c| (0..cfg.trials).map(move |t| (c, t)))
        .collect();
    with_pool(cfg.threads, || {
        jobs.par_iter()
            .map(|&(c, t)| {
                let cell = &cells[c];
                trial::run_trial(cell, &cfg.solver, &algos, cfg.seed, t, cfg.timing).map(|o| f(cell, o))
            })
            .collect::<AppResult<Vec<T>>>()
    })?
}

/// Re-runs one trial of one cell and returns its rows.
pub fn rerun(cfg: &ExperimentConfig, cell: usize, trial_index: usize) -> AppResult<Vec<TrialRecord>> {
    let all = cells(cfg);
    let spec = all
        .get(cell)
        .ok_or_else(|| AppError::config(format!("cell {cell} out of range (grid has {})", all.len())))?;
    let out = trial::run_trial(spec, &cfg.solver, &cfg.algo.algos(), cfg.seed, trial_index, cfg.timing)?;
    Ok(trial::records(spec, &out))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellStats {
    pub l: usize,
    pub ratio: f64,
    pub mu_h2: Option<usize>,
    pub sigma: f64,
    pub algo: Algo,
    pub trials: usize,
    pub successes: usize,
    pub mean_rel_err: f64,
}

impl CellStats {
    pub fn fraction(&self) -> f64 {
        self.successes as f64 / self.trials as f64
    }

    fn fields(&self) -> Vec<String> {
        vec![
            self.l.to_string(),
            fmt_f64(self.ratio),
            self.mu_h2.map_or_else(String::new, |m| m.to_string()),
            fmt_f64(self.sigma),
            self.algo.as_str().to_string(),
            self.trials.to_string(),
            self.successes.to_string(),
            fmt_f64(self.fraction()),
            fmt_f64(self.mean_rel_err),
            fmt_f64(20.0 * self.mean_rel_err.log10()),
        ]
    }
}

/// Per-cell, per-algorithm success counts and mean errors. `records` must be
/// in grid order as produced by [`execute`].
pub fn summarize(cfg: &ExperimentConfig, cells: &[CellSpec], records: &[TrialRecord]) -> Vec<CellStats> {
    let algos = cfg.algo.algos();
    let per_cell = cfg.trials * algos.len();
    assert_eq!(records.len(), cells.len() * per_cell, "records not in grid layout");
    let mut out = Vec::new();
    for (cell, chunk) in cells.iter().zip(records.chunks(per_cell)) {
        for &algo in &algos {
            let rows: Vec<&TrialRecord> = chunk.iter().filter(|r| r.algo == algo).collect();
            let successes = rows.iter().filter(|r| r.success).count();
            let mean = rows.iter().map(|r| r.rel_err).sum::<f64>() / rows.len() as f64;
            out.push(CellStats {
                l: cell.l,
                ratio: cell.l as f64 / (cell.k + cell.n) as f64,
                mu_h2: cell.mu_label(),
                sigma: cell.sigma,
                algo,
                trials: rows.len(),
                successes,
                mean_rel_err: mean,
            });
        }
    }
    out
}

/// Success fraction versus `L` for one algorithm and channel label.
pub fn success_curve(stats: &[CellStats], algo: Algo, mu_h2: Option<usize>) -> Vec<(usize, f64)> {
    stats
        .iter()
        .filter(|s| s.algo == algo && s.mu_h2 == mu_h2)
        .map(|s| (s.l, s.fraction()))
        .collect()
}

/// Smallest `L` whose success fraction reaches `level`.
pub fn min_l_reaching(stats: &[CellStats], algo: Algo, mu_h2: Option<usize>, level: f64) -> Option<usize> {
    success_curve(stats, algo, mu_h2)
        .into_iter()
        .filter(|&(_, f)| f >= level)
        .map(|(l, _)| l)
        .min()
}

/// Least-squares slope of `log10 y` against `log10 x`.
pub fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.log10()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.log10()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Mean relative error versus `sigma` at fixed `L` and algorithm.
pub fn error_curve(stats: &[CellStats], algo: Algo, l: usize) -> Vec<(f64, f64)> {
    stats
        .iter()
        .filter(|s| s.algo == algo && s.l == l)
        .map(|s| (s.sigma, s.mean_rel_err))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SerRow {
    pub seed: u64,
    pub trial: usize,
    pub k: usize,
    pub n: usize,
    pub l: usize,
    pub algo: Algo,
    pub rel_err: f64,
    pub ser: f64,
}

/// Nearest QPSK symbol.
pub fn quantize_qpsk(z: C64) -> C64 {
    if z.re.abs() >= z.im.abs() {
        C64::new(z.re.signum(), 0.0)
    } else {
        C64::new(0.0, z.im.signum())
    }
}

/// Symbol error rate of `x` after the least-squares scalar alignment
/// `alpha = <x, x0> / ||x||^2`.
pub fn symbol_error_rate(x: &[C64], x0: &[C64]) -> f64 {
    let nx = cvec::norm_sqr(x);
    if nx == 0.0 || !nx.is_finite() {
        return 1.0;
    }
    let alpha = cvec::dot(x, x0) / nx;
    let errors = x
        .iter()
        .zip(x0)
        .filter(|(xi, si)| quantize_qpsk(alpha * **xi) != **si)
        .count();
    errors as f64 / x.len() as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridOutput {
    pub cfg: ExperimentConfig,
    pub cells: Vec<CellSpec>,
    pub records: Vec<TrialRecord>,
    pub stats: Vec<CellStats>,
    pub ser: Vec<SerRow>,
    pub aborted: usize,
}

fn run_grid(cfg: &ExperimentConfig) -> AppResult<GridOutput> {
    let cells = cells(cfg);
    let comms = cfg.kind == ExperimentKind::CommsDemo;
    let per_trial = execute(cfg, &cells, |cell, out| {
        let ser: Vec<SerRow> = if comms {
            out.outcomes
                .iter()
                .map(|o| SerRow {
                    seed: out.cell_seed,
                    trial: out.trial,
                    k: cell.k,
                    n: cell.n,
                    l: cell.l,
                    algo: o.algo,
                    rel_err: o.rel_err,
                    ser: if o.trace.aborted() {
                        1.0
                    } else {
                        symbol_error_rate(&o.trace.x, &out.instance.truth.x0)
                    },
                })
                .collect()
        } else {
            Vec::new()
        };
        let aborted = out.outcomes.iter().filter(|o| o.trace.aborted()).count();
        (trial::records(cell, &out), ser, aborted)
    })?;
    let mut records = Vec::new();
    let mut ser = Vec::new();
    let mut aborted = 0;
    for (r, s, a) in per_trial {
        records.extend(r);
        ser.extend(s);
        aborted += a;
    }
    let stats = summarize(cfg, &cells, &records);
    Ok(GridOutput {
        cfg: cfg.clone(),
        cells,
        records,
        stats,
        ser,
        aborted,
    })
}

fn expect_kind(cfg: &ExperimentConfig, kinds: &[ExperimentKind]) -> AppResult<()> {
    if kinds.contains(&cfg.kind) {
        Ok(())
    } else {
        Err(AppError::config(format!("config kind {} does not match the experiment", cfg.kind)))
    }
}

pub fn run_phase_transition(cfg: &ExperimentConfig) -> AppResult<GridOutput> {
    expect_kind(cfg, &[ExperimentKind::PhaseTransition])?;
    run_grid(cfg)
}

pub fn run_incoherence_scan(cfg: &ExperimentConfig) -> AppResult<GridOutput> {
    expect_kind(cfg, &[ExperimentKind::IncoherenceScan, ExperimentKind::LargeIncoherence])?;
    if cfg.mu2_grid.is_empty() {
        return Err(AppError::config("incoherence scan needs mu_h2 values"));
    }
    run_grid(cfg)
}

pub fn run_noise_sweep(cfg: &ExperimentConfig) -> AppResult<GridOutput> {
    expect_kind(cfg, &[ExperimentKind::NoiseSweep])?;
    run_grid(cfg)
}

pub fn run_comms_demo(cfg: &ExperimentConfig) -> AppResult<GridOutput> {
    expect_kind(cfg, &[ExperimentKind::CommsDemo])?;
    run_grid(cfg)
}

fn meta_lines(cfg: &ExperimentConfig) -> Vec<String> {
    let list = |v: Vec<String>| v.join(",");
    let mut lines = vec![
        format!("kind = {}", cfg.kind),
        format!("seed = {}", cfg.seed),
        format!("trials = {}", cfg.trials),
        format!("a_kind = {}", cfg.a_kind.as_str()),
        format!("algo = {}", list(cfg.algo.algos().iter().map(|a| a.as_str().to_string()).collect())),
        format!("k = {}", cfg.k),
        format!("n = {}", cfg.n),
        format!("l = {}", list(cfg.l_grid.iter().map(|l| l.to_string()).collect())),
        format!("sigma = {}", list(cfg.sigma_grid.iter().map(|&s| fmt_f64(s)).collect())),
        format!("skip_projection = {}", cfg.solver.skip_projection),
        format!(
            "step = {}",
            cfg.solver.eta.map_or("backtracking".to_string(), |e| format!("constant {}", fmt_f64(e)))
        ),
        format!("max_iters = {}", cfg.solver.max_iters),
        format!("power_iters = {}", cfg.solver.power_iters),
        format!("threshold = {}", fmt_f64(cfg.solver.threshold)),
        format!("timing = {}", cfg.timing),
        "noise = relative".to_string(),
    ];
    if !cfg.mu2_grid.is_empty() {
        lines.push(format!("mu_h2 = {}", list(cfg.mu2_grid.iter().map(|m| m.to_string()).collect())));
    }
    if cfg.kind == ExperimentKind::CommsDemo {
        lines.push(format!(
            "channel = synthetic multipath, tap k ~ CN(0, exp(-k/{MULTIPATH_DECAY})), x0 QPSK"
        ));
    }
    lines
}

pub fn results_path(dir: &Path) -> PathBuf {
    dir.join("results.csv")
}

pub fn summary_path(dir: &Path) -> PathBuf {
    dir.join("summary.csv")
}

pub fn meta_path(dir: &Path) -> PathBuf {
    dir.join("meta.txt")
}

pub fn write_summary(path: &Path, stats: &[CellStats]) -> AppResult<()> {
    record::write_table(path, &SUMMARY_HEADER, stats.iter().map(CellStats::fields))
}

impl GridOutput {
    /// Writes `results.csv`, `summary.csv`, `meta.txt`, `comms_ser.csv`
    /// (comms demo only) and the plot script into `dir`.
    pub fn write(&self, dir: &Path) -> AppResult<()> {
        record::write_results(&results_path(dir), &self.records)?;
        write_summary(&summary_path(dir), &self.stats)?;
        record::write_lines(&meta_path(dir), &meta_lines(&self.cfg))?;
        if self.cfg.kind == ExperimentKind::CommsDemo {
            record::write_table(
                &dir.join("comms_ser.csv"),
                &SER_HEADER,
                self.ser.iter().map(|r| {
                    vec![
                        r.seed.to_string(),
                        r.trial.to_string(),
                        r.k.to_string(),
                        r.n.to_string(),
                        r.l.to_string(),
                        r.algo.as_str().to_string(),
                        fmt_f64(r.rel_err),
                        fmt_f64(r.ser),
                    ]
                }),
            )?;
        }
        plots::emit_plots(dir)?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RipOutput {
    pub seed: u64,
    pub ratios: Vec<f64>,
}

impl RipOutput {
    pub fn min(&self) -> f64 {
        self.ratios.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn write(&self, dir: &Path, cfg: &ExperimentConfig) -> AppResult<()> {
        record::write_table(
            &dir.join("rip.csv"),
            &RIP_HEADER,
            self.ratios
                .iter()
                .enumerate()
                .map(|(i, r)| vec![i.to_string(), fmt_f64(*r)]),
        )?;
        let mut lines = meta_lines(cfg);
        lines.push(format!("rip_min = {}", fmt_f64(self.min())));
        lines.push(format!("rip_max = {}", fmt_f64(self.max())));
        record::write_lines(&meta_path(dir), &lines)?;
        plots::emit_plots(dir).map(|_| ())
    }
}

/// Samples `cfg.trials` points of the basin around a balanced Gaussian truth
/// at `L = cfg.l_grid[0]` and returns the isometry ratios.
pub fn run_rip_check(cfg: &ExperimentConfig) -> AppResult<RipOutput> {
    expect_kind(cfg, &[ExperimentKind::RipCheck])?;
    let cell = CellSpec::gaussian(cfg.kind, cfg.k, cfg.n, cfg.l_grid[0], cfg.a_kind);
    let seed = cell.seed(cfg.seed);
    let mut rng = RngStream::new(seed, 0);
    let inst = trial::draw_instance(&cell, &mut rng)?;
    let truth = inst.truth.clone().balanced();
    let mu2 = RegParams::experiment_defaults(1.0, cell.l, cell.k, cell.n)?.mu2.max(truth.mu_h2);
    let p = RegParams::new(truth.d0 * truth.d0 / 100.0, truth.d0, mu2, MAX_EPS)?;
    let ratios = empirical_rip_ratio(&truth, &inst.lifted, &p, cfg.trials, &mut rng)?;
    Ok(RipOutput { seed, ratios })
}

#[derive(Debug, Clone)]
pub struct SingleOutput {
    pub cell: CellSpec,
    pub outcome: TrialOutcome,
    pub records: Vec<TrialRecord>,
}

pub const SOLUTION_HEADER: [&str; 4] = ["vector", "index", "re", "im"];

/// Solves one instance: the first `L`, `sigma` and channel of the grid, trial
/// index 0.
pub fn run_single(cfg: &ExperimentConfig) -> AppResult<SingleOutput> {
    expect_kind(cfg, &[ExperimentKind::SingleSolve])?;
    let cell = cells(cfg)[0];
    let outcome = trial::run_trial(&cell, &cfg.solver, &cfg.algo.algos(), cfg.seed, 0, cfg.timing)?;
    let records = trial::records(&cell, &outcome);
    Ok(SingleOutput {
        cell,
        outcome,
        records,
    })
}

fn vector_rows(name: &str, v: &[C64]) -> Vec<Vec<String>> {
    v.iter()
        .enumerate()
        .map(|(i, z)| vec![name.to_string(), i.to_string(), fmt_f64(z.re), fmt_f64(z.im)])
        .collect()
}

impl SingleOutput {
    /// Writes `results.csv`, `trace_<algo>.csv` and `solution_<algo>.csv`
    /// (rows of `h`, `x`, `h0`, `x0`).
    pub fn write(&self, dir: &Path, cfg: &ExperimentConfig) -> AppResult<()> {
        record::write_results(&results_path(dir), &self.records)?;
        let truth = &self.outcome.instance.truth;
        for o in &self.outcome.outcomes {
            let tag = o.algo.as_str();
            record::write_trace(&dir.join(format!("trace_{tag}.csv")), &o.trace.records)?;
            let rows: Vec<Vec<String>> = [
                vector_rows("h", &o.trace.h),
                vector_rows("x", &o.trace.x),
                vector_rows("h0", &truth.h0),
                vector_rows("x0", &truth.x0),
            ]
            .concat();
            record::write_table(&dir.join(format!("solution_{tag}.csv")), &SOLUTION_HEADER, rows)?;
        }
        record::write_lines(&meta_path(dir), &meta_lines(cfg))?;
        plots::emit_plots(dir).map(|_| ())
    }
}

/// Reads `(h, x, h0, x0)` back from a solution file.
pub fn read_solution(path: &Path) -> AppResult<[Vec<C64>; 4]> {
    let rows = record::read_table(path, &SOLUTION_HEADER)?;
    let mut out: [Vec<C64>; 4] = Default::default();
    for (i, r) in rows.iter().enumerate() {
        let bad = || AppError::file(path, format!("row {}: malformed solution record", i + 2));
        let slot = match &r[0] {
            "h" => 0,
            "x" => 1,
            "h0" => 2,
            "x0" => 3,
            _ => return Err(bad()),
        };
        let idx: usize = r[1].parse().map_err(|_| bad())?;
        if idx != out[slot].len() {
            return Err(bad());
        }
        let re = record::parse_f64(&r[2]).ok_or_else(bad)?;
        let im = record::parse_f64(&r[3]).ok_or_else(bad)?;
        out[slot].push(C64::new(re, im));
    }
    Ok(out)
}
