//! Standalone matplotlib scripts for the CSV files of an output directory.
//! Nothing is rendered here.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::config::ExperimentKind;
use crate::error::{AppError, AppResult};
use crate::experiments::{meta_path, summary_path, RIP_HEADER, SUMMARY_HEADER};
use crate::record;

fn read_kind(dir: &Path) -> AppResult<ExperimentKind> {
    let path = meta_path(dir);
    let text = std::fs::read_to_string(&path).map_err(|e| AppError::io(&path, e))?;
    let value = text
        .lines()
        .filter_map(|l| l.split_once('='))
        .find(|(k, _)| k.trim() == "kind")
        .map(|(_, v)| v.trim().to_string())
        .ok_or_else(|| AppError::file(&path, "no `kind` entry"))?;
    value
        .parse()
        .map_err(|_| AppError::file(&path, format!("unknown kind `{value}`")))
}

fn py_str(s: &str) -> String {
    format!("{s:?}")
}

const PRELUDE: &str = "import csv\nimport math\nimport os\n\nimport matplotlib\nmatplotlib.use(\"Agg\")\nimport matplotlib.pyplot as plt\n\nHERE = os.path.dirname(os.path.abspath(__file__))\n\n\ndef rows(name):\n    with open(os.path.join(HERE, name), newline=\"\") as f:\n        return list(csv.DictReader(f))\n\n\n";

/// Writes `plot_<kind>.py` into `dir` and returns its path.
pub fn emit_plots(dir: &Path) -> AppResult<PathBuf> {
    let kind = read_kind(dir)?;
    let mut s = String::from("#!/usr/bin/env python3\n");
    let _ = writeln!(s, "# {kind}: generated from the CSV files in this directory.");
    let body = match kind {
        ExperimentKind::SingleSolve => trace_script(dir)?,
        ExperimentKind::RipCheck => rip_script(dir)?,
        ExperimentKind::NoiseSweep => summary_script(dir, kind, true)?,
        _ => summary_script(dir, kind, false)?,
    };
    s.push_str(&body.0);
    s.push_str(PRELUDE);
    s.push_str(&body.1);
    let path = dir.join(format!("plot_{}.py", kind.as_str().replace('-', "_")));
    std::fs::write(&path, s).map_err(|e| AppError::io(&path, e))?;
    Ok(path)
}

/// `(leading comments, script body)`.
type Script = (String, String);

fn summary_script(dir: &Path, kind: ExperimentKind, noise: bool) -> AppResult<Script> {
    let path = summary_path(dir);
    let rows = record::read_table(&path, &SUMMARY_HEADER)?;
    let mut series = BTreeSet::new();
    for r in &rows {
        let key = if noise {
            (r[4].to_string(), r[0].parse::<usize>().unwrap_or(0), String::new())
        } else {
            (r[4].to_string(), 0, r[2].to_string())
        };
        series.insert(key);
    }
    let mut head = String::new();
    if rows.is_empty() {
        head.push_str("# warning: summary.csv has no data rows; the plot will be empty.\n");
    }
    let mut body = String::from("SERIES = [\n");
    for (algo, l, mu) in &series {
        if noise {
            let _ = writeln!(body, "    {{\"algo\": {}, \"L\": \"{l}\"}},", py_str(algo));
        } else {
            let _ = writeln!(body, "    {{\"algo\": {}, \"mu_h2\": {}}},", py_str(algo), py_str(mu));
        }
    }
    body.push_str("]\n\n");
    body.push_str("data = rows(\"summary.csv\")\nfig, ax = plt.subplots(figsize=(6, 4))\n");
    if noise {
        body.push_str(concat!(
            "for s in SERIES:\n",
            "    pts = [r for r in data if r[\"algo\"] == s[\"algo\"] and r[\"L\"] == s[\"L\"]]\n",
            "    snr = [-20.0 * math.log10(float(r[\"sigma\"])) for r in pts]\n",
            "    err = [float(r[\"mean_rel_err_db\"]) for r in pts]\n",
            "    ax.plot(snr, err, marker=\"o\", label=f\"{s['algo']}, L={s['L']}\")\n",
            "ax.set_xlabel(\"SNR (dB)\")\n",
            "ax.set_ylabel(\"mean relative error (dB)\")\n",
        ));
    } else {
        body.push_str(concat!(
            "for s in SERIES:\n",
            "    pts = [r for r in data if r[\"algo\"] == s[\"algo\"] and r[\"mu_h2\"] == s[\"mu_h2\"]]\n",
            "    x = [float(r[\"ratio\"]) for r in pts]\n",
            "    y = [float(r[\"fraction\"]) for r in pts]\n",
            "    label = s[\"algo\"] + (f\", mu_h2={s['mu_h2']}\" if s[\"mu_h2\"] else \"\")\n",
            "    ax.plot(x, y, marker=\"o\", label=label)\n",
            "ax.set_xlabel(\"L / (K + N)\")\n",
            "ax.set_ylabel(\"success fraction\")\n",
            "ax.set_ylim(-0.05, 1.05)\n",
        ));
    }
    let _ = writeln!(body, "ax.set_title({})", py_str(kind.as_str()));
    body.push_str(concat!(
        "if SERIES:\n",
        "    ax.legend()\n",
        "fig.tight_layout()\n",
    ));
    let _ = writeln!(
        body,
        "fig.savefig(os.path.join(HERE, {}))",
        py_str(&format!("{}.png", kind.as_str()))
    );
    Ok((head, body))
}

fn trace_script(dir: &Path) -> AppResult<Script> {
    let mut files = Vec::new();
    let entries = std::fs::read_dir(dir).map_err(|e| AppError::io(dir, e))?;
    for e in entries {
        let e = e.map_err(|e| AppError::io(dir, e))?;
        let name = e.file_name().to_string_lossy().into_owned();
        if name.starts_with("trace_") && name.ends_with(".csv") {
            record::read_trace(&e.path())?;
            files.push(name);
        }
    }
    files.sort();
    let mut head = String::new();
    if files.is_empty() {
        head.push_str("# warning: no trace files found; the plot will be empty.\n");
    }
    let mut body = String::from("TRACES = [\n");
    for f in &files {
        let _ = writeln!(body, "    {},", py_str(f));
    }
    body.push_str("]\n\n");
    body.push_str(concat!(
        "fig, (a1, a2) = plt.subplots(1, 2, figsize=(10, 4))\n",
        "for name in TRACES:\n",
        "    data = rows(name)\n",
        "    t = [int(r[\"t\"]) for r in data]\n",
        "    label = name[len(\"trace_\"):-len(\".csv\")]\n",
        "    a1.semilogy(t, [float(r[\"ftilde\"]) for r in data], label=label)\n",
        "    a2.semilogy(t, [float(r[\"delta\"]) for r in data], label=label)\n",
        "a1.set_xlabel(\"iteration\")\n",
        "a1.set_ylabel(\"objective\")\n",
        "a2.set_xlabel(\"iteration\")\n",
        "a2.set_ylabel(\"relative error\")\n",
        "if TRACES:\n",
        "    a1.legend()\n",
        "fig.tight_layout()\n",
        "fig.savefig(os.path.join(HERE, \"trace.png\"))\n",
    ));
    Ok((head, body))
}

fn rip_script(dir: &Path) -> AppResult<Script> {
    let rows = record::read_table(&dir.join("rip.csv"), &RIP_HEADER)?;
    let mut head = String::new();
    if rows.is_empty() {
        head.push_str("# warning: rip.csv has no data rows; the plot will be empty.\n");
    }
    let body = concat!(
        "ratios = [float(r[\"ratio\"]) for r in rows(\"rip.csv\")]\n",
        "fig, ax = plt.subplots(figsize=(6, 4))\n",
        "ax.hist(ratios, bins=20)\n",
        "ax.axvline(0.75, color=\"k\", ls=\"--\")\n",
        "ax.axvline(1.25, color=\"k\", ls=\"--\")\n",
        "ax.set_xlabel(\"||A(hx* - h0x0*)||^2 / ||hx* - h0x0*||_F^2\")\n",
        "ax.set_ylabel(\"count\")\n",
        "fig.tight_layout()\n",
        "fig.savefig(os.path.join(HERE, \"rip.png\"))\n",
    )
    .to_string();
    Ok((head, body))
}
