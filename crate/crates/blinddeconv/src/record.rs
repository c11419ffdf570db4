//! Result and trace CSV files.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use blinddeconv_core::descent::IterRecord;

use crate::config::{Algo, ExperimentKind};
use crate::error::{AppError, AppResult};

pub const RESULTS_HEADER: [&str; 13] = [
    "kind", "seed", "trial", "K", "N", "L", "mu_h2", "sigma", "algo", "rel_err", "success", "iters",
    "wall_s",
];

pub const TRACE_HEADER: [&str; 7] = ["t", "ftilde", "f", "g", "grad_norm", "delta", "eta"];

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn parse_f64(s: &str) -> Option<f64> {
    s.trim().parse().ok()
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub kind: ExperimentKind,
    pub seed: u64,
    pub trial: usize,
    pub k: usize,
    pub n: usize,
    pub l: usize,
    pub mu_h2: f64,
    pub sigma: f64,
    pub algo: Algo,
    pub rel_err: f64,
    pub success: bool,
    pub iters: usize,
    pub wall_s: f64,
}

impl TrialRecord {
    pub fn fields(&self) -> [String; 13] {
        [
            self.kind.as_str().to_string(),
            self.seed.to_string(),
            self.trial.to_string(),
            self.k.to_string(),
            self.n.to_string(),
            self.l.to_string(),
            fmt_f64(self.mu_h2),
            fmt_f64(self.sigma),
            self.algo.as_str().to_string(),
            fmt_f64(self.rel_err),
            u8::from(self.success).to_string(),
            self.iters.to_string(),
            fmt_f64(self.wall_s),
        ]
    }

    pub fn from_fields(r: &csv::StringRecord) -> Result<Self, String> {
        if r.len() != RESULTS_HEADER.len() {
            return Err(format!("expected {} fields, got {}", RESULTS_HEADER.len(), r.len()));
        }
        fn int<T: std::str::FromStr>(s: &str, what: &str) -> Result<T, String> {
            s.parse().map_err(|_| format!("bad {what} `{s}`"))
        }
        fn float(s: &str, what: &str) -> Result<f64, String> {
            parse_f64(s).ok_or_else(|| format!("bad {what} `{s}`"))
        }
        Ok(TrialRecord {
            kind: r[0].parse().map_err(|e: AppError| e.to_string())?,
            seed: int(&r[1], "seed")?,
            trial: int(&r[2], "trial")?,
            k: int(&r[3], "K")?,
            n: int(&r[4], "N")?,
            l: int(&r[5], "L")?,
            mu_h2: float(&r[6], "mu_h2")?,
            sigma: float(&r[7], "sigma")?,
            algo: r[8].parse().map_err(|e: AppError| e.to_string())?,
            rel_err: float(&r[9], "rel_err")?,
            success: match &r[10] {
                "1" => true,
                "0" => false,
                s => return Err(format!("bad success flag `{s}`")),
            },
            iters: int(&r[11], "iters")?,
            wall_s: float(&r[12], "wall_s")?,
        })
    }

    /// The CSV line for this record, including the trailing newline.
    pub fn csv_row(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(self.fields()).expect("in-memory write");
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
    }
}

fn create(path: &Path) -> AppResult<File> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| AppError::io(dir, e))?;
    }
    File::create(path).map_err(|e| AppError::io(path, e))
}

fn csv_err(path: &Path, e: csv::Error) -> AppError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => AppError::io(path, io),
        other => AppError::file(path, format!("{other:?}")),
    }
}

/// Writes any table with a header row.
pub fn write_table<I, R>(path: &Path, header: &[&str], rows: I) -> AppResult<()>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator,
    R::Item: AsRef<[u8]>,
{
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(header).map_err(|e| csv_err(path, e))?;
    for row in rows {
        w.write_record(row).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| AppError::io(path, e))
}

/// Reads a table and checks its header.
pub fn read_table(path: &Path, header: &[&str]) -> AppResult<Vec<csv::StringRecord>> {
    let file = File::open(path).map_err(|e| AppError::io(path, e))?;
    let mut r = csv::Reader::from_reader(file);
    let got = r.headers().map_err(|e| csv_err(path, e))?.clone();
    if got.iter().ne(header.iter().copied()) {
        return Err(AppError::file(
            path,
            format!("unexpected header `{}`", got.iter().collect::<Vec<_>>().join(",")),
        ));
    }
    r.records()
        .map(|rec| rec.map_err(|e| csv_err(path, e)))
        .collect()
}

pub fn write_results(path: &Path, records: &[TrialRecord]) -> AppResult<()> {
    write_table(path, &RESULTS_HEADER, records.iter().map(TrialRecord::fields))
}

pub fn read_results(path: &Path) -> AppResult<Vec<TrialRecord>> {
    read_table(path, &RESULTS_HEADER)?
        .iter()
        .enumerate()
        .map(|(i, r)| {
            TrialRecord::from_fields(r).map_err(|m| AppError::file(path, format!("row {}: {m}", i + 2)))
        })
        .collect()
}

fn trace_fields(r: &IterRecord) -> [String; 7] {
    [
        r.t.to_string(),
        fmt_f64(r.ftilde),
        fmt_f64(r.f),
        fmt_f64(r.g),
        fmt_f64(r.grad_norm),
        r.delta.map_or_else(|| "NaN".to_string(), fmt_f64),
        fmt_f64(r.eta),
    ]
}

pub fn write_trace(path: &Path, records: &[IterRecord]) -> AppResult<()> {
    write_table(path, &TRACE_HEADER, records.iter().map(trace_fields))
}

pub fn read_trace(path: &Path) -> AppResult<Vec<IterRecord>> {
    let rows = read_table(path, &TRACE_HEADER)?;
    rows.iter()
        .enumerate()
        .map(|(i, r)| {
            let bad = || AppError::file(path, format!("row {}: malformed trace record", i + 2));
            if r.len() != TRACE_HEADER.len() {
                return Err(bad());
            }
            let f = |j: usize| parse_f64(&r[j]).ok_or_else(bad);
            let delta = f(5)?;
            Ok(IterRecord {
                t: r[0].parse().map_err(|_| bad())?,
                ftilde: f(1)?,
                f: f(2)?,
                g: f(3)?,
                grad_norm: f(4)?,
                delta: (!delta.is_nan()).then_some(delta),
                eta: f(6)?,
            })
        })
        .collect()
}

/// Appends free-form lines (used for small metadata files).
pub fn write_lines(path: &Path, lines: &[String]) -> AppResult<()> {
    let mut f = create(path)?;
    for l in lines {
        writeln!(f, "{l}").map_err(|e| AppError::io(path, e))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn record(rel_err: f64) -> TrialRecord {
        TrialRecord {
            kind: ExperimentKind::PhaseTransition,
            seed: 123,
            trial: 4,
            k: 50,
            n: 50,
            l: 240,
            mu_h2: 3.25,
            sigma: 0.0,
            algo: Algo::RegGrad,
            rel_err,
            success: rel_err < 1e-2,
            iters: 17,
            wall_s: 0.0,
        }
    }

    #[test]
    fn row_layout() {
        let row = record(1e-3).csv_row();
        assert_eq!(
            row,
            "phase-transition,123,4,50,50,240,3.2500000000000000e0,0.0000000000000000e0,regGrad,1.0000000000000000e-3,1,17,0.0000000000000000e0\n"
        );
    }

    #[test]
    fn results_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        let recs = vec![record(0.1), record(f64::INFINITY), record(1.0 / 3.0)];
        write_results(&path, &recs).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("kind,seed,trial,K,N,L,mu_h2,sigma,algo,rel_err,success,iters,wall_s\n"));
        assert_eq!(read_results(&path).unwrap(), recs);
    }

    #[test]
    fn trace_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        let recs = vec![
            IterRecord { t: 0, ftilde: 2.0, f: 1.5, g: 0.5, grad_norm: 3.0, delta: Some(0.7), eta: 0.0 },
            IterRecord { t: 1, ftilde: 1.0 / 3.0, f: 0.1, g: 0.2, grad_norm: 1e-300, delta: None, eta: 0.02 },
        ];
        write_trace(&path, &recs).unwrap();
        assert!(std::fs::read_to_string(&path).unwrap().starts_with("t,ftilde,f,g,grad_norm,delta,eta\n"));
        assert_eq!(read_trace(&path).unwrap(), recs);
    }

    #[test]
    fn rejects_wrong_header_and_bad_rows() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "a,b\n1,2\n").unwrap();
        assert!(matches!(read_results(&path), Err(AppError::File { .. })));
        let mut text = RESULTS_HEADER.join(",");
        text.push_str("\nphase-transition,1,0,5,5,20,x,0,regGrad,0,1,3,0\n");
        std::fs::write(&path, text).unwrap();
        assert!(matches!(read_results(&path), Err(AppError::File { .. })));
        assert!(matches!(read_results(&dir.path().join("missing.csv")), Err(AppError::Io { .. })));
    }

    proptest! {
        #[test]
        fn float_format_round_trips(bits in any::<u64>()) {
            let v = f64::from_bits(bits);
            prop_assume!(v.is_finite());
            let s = fmt_f64(v);
            prop_assert_eq!(parse_f64(&s).unwrap().to_bits(), v.to_bits());
        }
    }
}
