//! Experiment configuration: flat `key = value` files, CLI overrides and
//! per-experiment defaults.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use blinddeconv_core::ensembles::AKind;

use crate::error::{AppError, AppResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ExperimentKind {
    PhaseTransition,
    IncoherenceScan,
    LargeIncoherence,
    NoiseSweep,
    CommsDemo,
    SingleSolve,
    RipCheck,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 7] = [
        ExperimentKind::PhaseTransition,
        ExperimentKind::IncoherenceScan,
        ExperimentKind::LargeIncoherence,
        ExperimentKind::NoiseSweep,
        ExperimentKind::CommsDemo,
        ExperimentKind::SingleSolve,
        ExperimentKind::RipCheck,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::PhaseTransition => "phase-transition",
            ExperimentKind::IncoherenceScan => "incoherence-scan",
            ExperimentKind::LargeIncoherence => "large-incoherence",
            ExperimentKind::NoiseSweep => "noise-sweep",
            ExperimentKind::CommsDemo => "comms-demo",
            ExperimentKind::SingleSolve => "single-solve",
            ExperimentKind::RipCheck => "rip-check",
        }
    }

    fn id(self) -> u64 {
        self as u64 + 1
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentKind {
    type Err = AppError;

    fn from_str(s: &str) -> AppResult<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| AppError::config(format!("unknown experiment kind `{s}`")))
    }
}

/// Seed-mixing tag of an experiment kind.
pub fn kind_tag(kind: ExperimentKind) -> u64 {
    kind.id()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algo {
    RegGrad,
    Grad,
}

impl Algo {
    pub fn as_str(self) -> &'static str {
        match self {
            Algo::RegGrad => "regGrad",
            Algo::Grad => "Grad",
        }
    }

    pub fn regularized(self) -> bool {
        self == Algo::RegGrad
    }
}

impl FromStr for Algo {
    type Err = AppError;

    fn from_str(s: &str) -> AppResult<Self> {
        match s {
            "regGrad" => Ok(Algo::RegGrad),
            "Grad" => Ok(Algo::Grad),
            _ => Err(AppError::config(format!("unknown algorithm `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlgoChoice {
    RegGrad,
    Grad,
    Both,
}

impl AlgoChoice {
    pub fn algos(self) -> Vec<Algo> {
        match self {
            AlgoChoice::RegGrad => vec![Algo::RegGrad],
            AlgoChoice::Grad => vec![Algo::Grad],
            AlgoChoice::Both => vec![Algo::RegGrad, Algo::Grad],
        }
    }
}

impl FromStr for AlgoChoice {
    type Err = AppError;

    fn from_str(s: &str) -> AppResult<Self> {
        match s.to_ascii_lowercase().as_str() {
            "reggrad" => Ok(AlgoChoice::RegGrad),
            "grad" => Ok(AlgoChoice::Grad),
            "both" => Ok(AlgoChoice::Both),
            _ => Err(AppError::config(format!("algo must be reggrad, grad or both, got `{s}`"))),
        }
    }
}

pub fn parse_a_kind(s: &str) -> AppResult<AKind> {
    match s.to_ascii_lowercase().as_str() {
        "gaussian" => Ok(AKind::Gaussian),
        "hadamard" => Ok(AKind::Hadamard),
        _ => Err(AppError::config(format!("a-kind must be gaussian or hadamard, got `{s}`"))),
    }
}

/// Partially specified settings, as read from a config file or the command
/// line. `None` means "not given".
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings {
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    pub out: Option<PathBuf>,
    pub a_kind: Option<AKind>,
    pub algo: Option<AlgoChoice>,
    pub skip_projection: Option<bool>,
    pub eta: Option<f64>,
    pub k: Option<usize>,
    pub n: Option<usize>,
    pub l: Option<Vec<usize>>,
    pub sigma: Option<Vec<f64>>,
    pub mu_h2: Option<Vec<usize>>,
    pub max_iters: Option<usize>,
    pub power_iters: Option<usize>,
    pub threshold: Option<f64>,
    pub timing: Option<bool>,
    pub threads: Option<usize>,
}

fn parse_value<T: FromStr>(key: &str, v: &str) -> Result<T, String> {
    v.parse()
        .map_err(|_| format!("invalid value `{v}` for `{key}`"))
}

fn parse_list<T: FromStr>(key: &str, v: &str) -> Result<Vec<T>, String> {
    let items: Result<Vec<T>, String> = v
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_value(key, s))
        .collect();
    let items = items?;
    if items.is_empty() {
        return Err(format!("`{key}` must list at least one value"));
    }
    Ok(items)
}

fn parse_bool(key: &str, v: &str) -> Result<bool, String> {
    match v.to_ascii_lowercase().as_str() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(format!("invalid boolean `{v}` for `{key}`")),
    }
}

impl Settings {
    pub const KEYS: [&'static str; 17] = [
        "seed",
        "trials",
        "out",
        "a_kind",
        "algo",
        "skip_projection",
        "eta",
        "k",
        "n",
        "l",
        "sigma",
        "mu_h2",
        "max_iters",
        "power_iters",
        "threshold",
        "timing",
        "threads",
    ];

    fn set(&mut self, key: &str, v: &str) -> Result<(), String> {
        match key {
            "seed" => self.seed = Some(parse_value(key, v)?),
            "trials" => self.trials = Some(parse_value(key, v)?),
            "out" => self.out = Some(PathBuf::from(v)),
            "a_kind" => self.a_kind = Some(parse_a_kind(v).map_err(|e| e.to_string())?),
            "algo" => self.algo = Some(v.parse().map_err(|e: AppError| e.to_string())?),
            "skip_projection" => self.skip_projection = Some(parse_bool(key, v)?),
            "eta" => self.eta = Some(parse_value(key, v)?),
            "k" => self.k = Some(parse_value(key, v)?),
            "n" => self.n = Some(parse_value(key, v)?),
            "l" => self.l = Some(parse_list(key, v)?),
            "sigma" => self.sigma = Some(parse_list(key, v)?),
            "mu_h2" => self.mu_h2 = Some(parse_list(key, v)?),
            "max_iters" => self.max_iters = Some(parse_value(key, v)?),
            "power_iters" => self.power_iters = Some(parse_value(key, v)?),
            "threshold" => self.threshold = Some(parse_value(key, v)?),
            "timing" => self.timing = Some(parse_bool(key, v)?),
            "threads" => self.threads = Some(parse_value(key, v)?),
            _ => return Err(format!("unknown key `{key}`")),
        }
        Ok(())
    }

    /// Parses `key = value` lines. Keys are case-insensitive and `-` is read
    /// as `_`; `#` starts a comment; lists are comma separated.
    pub fn parse(text: &str) -> AppResult<Self> {
        let mut out = Settings::default();
        let mut seen = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| AppError::ConfigLine { line: line_no, msg };
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| err("expected `key = value`".into()))?;
            let key = k.trim().to_ascii_lowercase().replace('-', "_");
            let value = v.trim();
            if value.is_empty() {
                return Err(err(format!("missing value for `{key}`")));
            }
            if let Some(prev) = seen.insert(key.clone(), line_no) {
                return Err(err(format!("`{key}` already set on line {prev}")));
            }
            out.set(&key, value).map_err(err)?;
        }
        Ok(out)
    }

    pub fn from_file(path: &std::path::Path) -> AppResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
        Self::parse(&text)
    }

    /// Fields set in `over` replace those in `self`.
    pub fn overridden_by(self, over: Settings) -> Settings {
        Settings {
            seed: over.seed.or(self.seed),
            trials: over.trials.or(self.trials),
            out: over.out.or(self.out),
            a_kind: over.a_kind.or(self.a_kind),
            algo: over.algo.or(self.algo),
            skip_projection: over.skip_projection.or(self.skip_projection),
            eta: over.eta.or(self.eta),
            k: over.k.or(self.k),
            n: over.n.or(self.n),
            l: over.l.or(self.l),
            sigma: over.sigma.or(self.sigma),
            mu_h2: over.mu_h2.or(self.mu_h2),
            max_iters: over.max_iters.or(self.max_iters),
            power_iters: over.power_iters.or(self.power_iters),
            threshold: over.threshold.or(self.threshold),
            timing: over.timing.or(self.timing),
            threads: over.threads.or(self.threads),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverSettings {
    pub skip_projection: bool,
    /// Constant stepsize; backtracking when unset.
    pub eta: Option<f64>,
    pub max_iters: usize,
    pub power_iters: usize,
    pub threshold: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            skip_projection: false,
            eta: None,
            max_iters: 5000,
            power_iters: 50,
            threshold: 1e-2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub k: usize,
    pub n: usize,
    pub l_grid: Vec<usize>,
    pub trials: usize,
    pub sigma_grid: Vec<f64>,
    /// Indicator channels with this many leading ones; Gaussian `h0` when
    /// empty.
    pub mu2_grid: Vec<usize>,
    pub a_kind: AKind,
    pub algo: AlgoChoice,
    pub solver: SolverSettings,
    pub seed: u64,
    pub out: PathBuf,
    /// Record wall-clock seconds; `wall_s` is written as 0 when off.
    pub timing: bool,
    pub threads: Option<usize>,
}

fn pow2_grid(lo: u32, hi: u32) -> Vec<usize> {
    (lo..=hi).map(|s| 1usize << s).collect()
}

/// `points` values from `lo` to `hi` inclusive, evenly spaced and rounded.
pub fn linear_grid(lo: usize, hi: usize, points: usize) -> Vec<usize> {
    if points <= 1 {
        return vec![lo];
    }
    (0..points)
        .map(|i| {
            let t = i as f64 / (points - 1) as f64;
            (lo as f64 + t * (hi as f64 - lo as f64)).round() as usize
        })
        .collect()
}

/// `points` log-spaced values from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    if points <= 1 {
        return vec![lo];
    }
    let (a, b) = (lo.log10(), hi.log10());
    (0..points)
        .map(|i| {
            let t = i as f64 / (points - 1) as f64;
            10f64.powf(a + t * (b - a))
        })
        .collect()
}

fn scaled(m: usize, r: f64) -> usize {
    (m as f64 * r).round() as usize
}

fn next_pow2(v: usize) -> usize {
    v.next_power_of_two()
}

impl ExperimentConfig {
    pub fn resolve(kind: ExperimentKind, s: &Settings) -> AppResult<Self> {
        use ExperimentKind::*;
        let a_kind = s.a_kind.unwrap_or(AKind::Gaussian);
        let hadamard = a_kind == AKind::Hadamard;
        let (dk, dn) = match kind {
            PhaseTransition | IncoherenceScan | SingleSolve => (50, 50),
            LargeIncoherence => (200, 200),
            NoiseSweep => (100, 100),
            CommsDemo => (123, 123),
            RipCheck => (20, 20),
        };
        let k = s.k.unwrap_or(dk);
        let n = s.n.unwrap_or(dn);
        let m = k + n;
        let default_l = match (kind, hadamard) {
            (PhaseTransition, false) => linear_grid(m, 4 * m, 16),
            (PhaseTransition, true) => pow2_grid(6, 10),
            (IncoherenceScan, false) => linear_grid(m, 8 * m, 15),
            (IncoherenceScan, true) => pow2_grid(7, 11),
            (LargeIncoherence, false) => (3..=8).map(|r| r * m).collect(),
            (LargeIncoherence, true) => pow2_grid(10, 12),
            (NoiseSweep, false) => vec![scaled(m, 2.5), 5 * m],
            (NoiseSweep, true) => vec![next_pow2(scaled(m, 2.5)), next_pow2(5 * m)],
            (CommsDemo, false) => (3..=10).map(|h| scaled(m, h as f64 / 2.0)).collect(),
            (CommsDemo, true) => pow2_grid(9, 11),
            (SingleSolve, false) => vec![4 * m],
            (SingleSolve, true) => vec![next_pow2(4 * m)],
            (RipCheck, _) => vec![2048],
        };
        let default_trials = match kind {
            PhaseTransition => 50,
            SingleSolve => 1,
            RipCheck => 100,
            _ => 20,
        };
        let default_sigma = match kind {
            NoiseSweep => log_grid(1e-4, 1.0, 9),
            _ => vec![0.0],
        };
        let default_mu2 = match kind {
            IncoherenceScan => (1..=10).map(|i| 3 * i).collect(),
            LargeIncoherence => vec![100],
            _ => Vec::new(),
        };
        let default_algo = match kind {
            PhaseTransition | LargeIncoherence => AlgoChoice::Both,
            _ => AlgoChoice::RegGrad,
        };
        let d = SolverSettings::default();
        let cfg = ExperimentConfig {
            kind,
            k,
            n,
            l_grid: s.l.clone().unwrap_or(default_l),
            trials: s.trials.unwrap_or(default_trials),
            sigma_grid: s.sigma.clone().unwrap_or(default_sigma),
            mu2_grid: s.mu_h2.clone().unwrap_or(default_mu2),
            a_kind,
            algo: s.algo.unwrap_or(default_algo),
            solver: SolverSettings {
                skip_projection: s.skip_projection.unwrap_or(d.skip_projection),
                eta: s.eta,
                max_iters: s.max_iters.unwrap_or(d.max_iters),
                power_iters: s.power_iters.unwrap_or(d.power_iters),
                threshold: s.threshold.unwrap_or(d.threshold),
            },
            seed: s.seed.unwrap_or(0),
            out: s
                .out
                .clone()
                .unwrap_or_else(|| PathBuf::from("out").join(kind.as_str())),
            timing: s.timing.unwrap_or(true),
            threads: s.threads,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> AppResult<()> {
        let err = |m: String| Err(AppError::Config(m));
        if self.k == 0 || self.n == 0 {
            return err("K and N must be positive".into());
        }
        if self.trials == 0 {
            return err("trials must be at least 1".into());
        }
        if self.l_grid.is_empty() || self.sigma_grid.is_empty() {
            return err("grids must be non-empty".into());
        }
        for &l in &self.l_grid {
            if l < self.k {
                return err(format!("L = {l} is smaller than K = {}", self.k));
            }
            if l < 2 {
                return err(format!("L = {l} is too small"));
            }
            if self.a_kind == AKind::Hadamard {
                if !l.is_power_of_two() {
                    return err(format!("Hadamard A needs L a power of two, got {l}"));
                }
                if l < self.n {
                    return err(format!("Hadamard A needs L >= N, got L = {l}, N = {}", self.n));
                }
            }
        }
        for &s in &self.sigma_grid {
            if !(s >= 0.0 && s.is_finite()) {
                return err(format!("sigma must be finite and >= 0, got {s}"));
            }
            if self.kind == ExperimentKind::NoiseSweep && s == 0.0 {
                return err("noise sweep needs positive sigma values".into());
            }
        }
        for &m in &self.mu2_grid {
            if m == 0 || m > self.k {
                return err(format!("mu_h2 = {m} must lie in 1..=K (K = {})", self.k));
            }
        }
        if let Some(eta) = self.solver.eta {
            if !(eta > 0.0 && eta.is_finite()) {
                return err(format!("eta must be positive, got {eta}"));
            }
        }
        if self.solver.max_iters == 0 || self.solver.power_iters == 0 {
            return err("iteration limits must be positive".into());
        }
        if !(self.solver.threshold > 0.0) {
            return err("threshold must be positive".into());
        }
        if self.threads == Some(0) {
            return err("threads must be positive".into());
        }
        Ok(())
    }

    /// Channel models scanned by this config: `None` is a Gaussian `h0`.
    pub fn channel_grid(&self) -> Vec<Option<usize>> {
        if self.mu2_grid.is_empty() {
            vec![None]
        } else {
            self.mu2_grid.iter().copied().map(Some).collect()
        }
    }
}
