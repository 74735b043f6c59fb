use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::budget::{sweep_budget, write_budget_csv, BudgetRow, Structure};
use crate::cancellation::Variant;
use crate::error::{Error, Result};
use crate::harness::config::{Experiment, ScenarioConfig};
use crate::harness::trial::{cancel_and_score, ideal_sinr_db, simulate_capture, trial_seed};

/// One trial of one variant at one grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct SinrRow {
    pub experiment: Experiment,
    pub variant: Variant,
    pub p_tx_dbm: f64,
    pub n_est: usize,
    pub calibrated: bool,
    pub trial: usize,
    pub seed: u64,
    pub sinr_db: f64,
    pub warnings: Vec<String>,
}

/// Trial statistics of one variant at one grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct SinrSummary {
    pub experiment: Experiment,
    pub variant: Variant,
    pub p_tx_dbm: f64,
    pub n_est: usize,
    pub calibrated: bool,
    pub n_trials: usize,
    pub mean_sinr_db: f64,
    pub std_sinr_db: f64,
    pub ideal_sinr_db: f64,
}

pub const SINR_CSV_HEADER: [&str; 9] =
    ["experiment", "variant", "p_tx_dbm", "n_est", "calibrated", "trial", "seed", "sinr_db", "warnings"];

pub const SUMMARY_CSV_HEADER: [&str; 9] = [
    "experiment",
    "variant",
    "p_tx_dbm",
    "n_est",
    "calibrated",
    "n_trials",
    "mean_sinr_db",
    "std_sinr_db",
    "ideal_sinr_db",
];

#[derive(Debug, Clone, Copy)]
struct GridPoint {
    p_tx_dbm: f64,
    n_est: usize,
    calibrated: bool,
}

fn grid(cfg: &ScenarioConfig) -> Vec<GridPoint> {
    let s = &cfg.sweep;
    match cfg.experiment {
        Experiment::SinrVsPtx => s
            .p_tx_dbm
            .iter()
            .map(|&p_tx_dbm| GridPoint { p_tx_dbm, n_est: s.fixed_n_est, calibrated: s.ptx_calibrated })
            .collect(),
        Experiment::SinrVsN => s
            .n_calibration
            .iter()
            .flat_map(|&calibrated| {
                s.n_est.iter().map(move |&n_est| GridPoint { p_tx_dbm: s.fixed_p_tx_dbm, n_est, calibrated })
            })
            .collect(),
        Experiment::BudgetSweep => Vec::new(),
    }
}

/// Monte-Carlo SINR rows of a `sinr-vs-ptx` or `sinr-vs-n` configuration.
///
/// Each (grid point, trial) job simulates one capture and scores every
/// requested variant on it. Rows come back sorted by variant, calibration
/// (calibrated first), transmit power, sample size and trial, independent of
/// scheduling.
pub fn simulate_sinr_rows(cfg: &ScenarioConfig) -> Result<Vec<SinrRow>> {
    cfg.validate()?;
    if cfg.experiment == Experiment::BudgetSweep {
        return Err(crate::error::arg_err("budget sweeps have no SINR rows"));
    }
    let variants = cfg.active_variants();
    let jobs: Vec<(GridPoint, usize)> =
        grid(cfg).into_iter().flat_map(|g| (0..cfg.n_trials).map(move |t| (g, t))).collect();
    let nested: Vec<Vec<SinrRow>> = jobs
        .par_iter()
        .map(|&(g, trial)| {
            let seed = trial_seed(cfg.seed, trial);
            let capture = simulate_capture(cfg, g.p_tx_dbm, g.n_est, g.calibrated, seed)?;
            variants
                .iter()
                .map(|&variant| {
                    let outcome = cancel_and_score(cfg, &capture, variant, g.calibrated)?;
                    Ok(SinrRow {
                        experiment: cfg.experiment,
                        variant,
                        p_tx_dbm: g.p_tx_dbm,
                        n_est: g.n_est,
                        calibrated: g.calibrated,
                        trial,
                        seed,
                        sinr_db: outcome.sinr_db,
                        warnings: capture.warnings.iter().chain(&outcome.warnings).cloned().collect(),
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let mut rows: Vec<SinrRow> = nested.into_iter().flatten().collect();
    rows.sort_by(|a, b| {
        (a.variant, !a.calibrated)
            .cmp(&(b.variant, !b.calibrated))
            .then(a.p_tx_dbm.total_cmp(&b.p_tx_dbm))
            .then((a.n_est, a.trial).cmp(&(b.n_est, b.trial)))
    });
    Ok(rows)
}

/// Mean and sample standard deviation (dB) per variant and grid point.
pub fn summarize(rows: &[SinrRow], ideal_sinr_db: f64) -> Vec<SinrSummary> {
    let mut out: Vec<SinrSummary> = Vec::new();
    let mut start = 0;
    while start < rows.len() {
        let key = &rows[start];
        let end = rows[start..]
            .iter()
            .position(|r| {
                (r.variant, r.calibrated, r.n_est) != (key.variant, key.calibrated, key.n_est)
                    || r.p_tx_dbm != key.p_tx_dbm
            })
            .map_or(rows.len(), |k| start + k);
        let vals: Vec<f64> = rows[start..end].iter().map(|r| r.sinr_db).collect();
        let n = vals.len() as f64;
        let mean = vals.iter().sum::<f64>() / n;
        let var = if vals.len() > 1 { vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
        out.push(SinrSummary {
            experiment: key.experiment,
            variant: key.variant,
            p_tx_dbm: key.p_tx_dbm,
            n_est: key.n_est,
            calibrated: key.calibrated,
            n_trials: vals.len(),
            mean_sinr_db: mean,
            std_sinr_db: var.sqrt(),
            ideal_sinr_db,
        });
        start = end;
    }
    out
}

fn csv_writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out)
}

fn flush<W: Write>(w: csv::Writer<W>, what: &str) -> Result<()> {
    w.into_inner()
        .map_err(|e| Error::Io { path: what.into(), source: e.into_error() })?
        .flush()
        .map_err(|e| Error::Io { path: what.into(), source: e })
}

pub fn write_sinr_csv<W: Write>(out: W, rows: &[SinrRow]) -> Result<()> {
    let mut w = csv_writer(out);
    w.write_record(SINR_CSV_HEADER)?;
    for r in rows {
        w.write_record([
            r.experiment.name().to_string(),
            r.variant.name().to_string(),
            r.p_tx_dbm.to_string(),
            r.n_est.to_string(),
            r.calibrated.to_string(),
            r.trial.to_string(),
            r.seed.to_string(),
            r.sinr_db.to_string(),
            r.warnings.join(";"),
        ])?;
    }
    flush(w, "<sinr csv>")
}

pub fn write_summary_csv<W: Write>(out: W, rows: &[SinrSummary]) -> Result<()> {
    let mut w = csv_writer(out);
    w.write_record(SUMMARY_CSV_HEADER)?;
    for r in rows {
        w.write_record([
            r.experiment.name().to_string(),
            r.variant.name().to_string(),
            r.p_tx_dbm.to_string(),
            r.n_est.to_string(),
            r.calibrated.to_string(),
            r.n_trials.to_string(),
            r.mean_sinr_db.to_string(),
            r.std_sinr_db.to_string(),
            r.ideal_sinr_db.to_string(),
        ])?;
    }
    flush(w, "<summary csv>")
}

/// `results.csv` → `results.summary.csv`.
pub fn summary_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    out.with_file_name(format!("{stem}.summary.csv"))
}

/// Everything an experiment produced.
#[derive(Debug, Clone)]
pub enum ExperimentReport {
    Budget { rows: Vec<BudgetRow>, path: PathBuf },
    Sinr { rows: Vec<SinrRow>, summary: Vec<SinrSummary>, path: PathBuf, summary_path: PathBuf },
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| Error::Io { path: path.display().to_string(), source: e })
}

/// Run the configured experiment and write its CSV to `cfg.output`.
/// The output files are opened before any simulation starts.
pub fn run_experiment(cfg: &ScenarioConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let path = cfg.output.clone();
    let main = create(&path)?;
    match cfg.experiment {
        Experiment::BudgetSweep => {
            let mut rows = sweep_budget(&cfg.transceiver, &cfg.sweep.p_tx_dbm, Structure::Proposed)?;
            rows.extend(sweep_budget(&cfg.transceiver, &cfg.sweep.p_tx_dbm, Structure::Traditional)?);
            write_budget_csv(main, &rows)?;
            Ok(ExperimentReport::Budget { rows, path })
        }
        _ => {
            let summary_path = summary_path(&path);
            let side = create(&summary_path)?;
            let rows = simulate_sinr_rows(cfg)?;
            let summary = summarize(&rows, ideal_sinr_db(cfg));
            write_sinr_csv(main, &rows)?;
            write_summary_csv(side, &summary)?;
            Ok(ExperimentReport::Sinr { rows, summary, path, summary_path })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(variant: Variant, p: f64, trial: usize, sinr: f64) -> SinrRow {
        SinrRow {
            experiment: Experiment::SinrVsPtx,
            variant,
            p_tx_dbm: p,
            n_est: 100,
            calibrated: true,
            trial,
            seed: 9,
            sinr_db: sinr,
            warnings: vec![],
        }
    }

    #[test]
    fn summary_groups_consecutive_points() {
        let rows = [
            row(Variant::RefRx, 0.0, 0, 10.0),
            row(Variant::RefRx, 0.0, 1, 12.0),
            row(Variant::RefRx, 5.0, 0, 8.0),
            row(Variant::Linear, 0.0, 0, 1.0),
        ];
        let s = summarize(&rows, 15.0);
        assert_eq!(s.len(), 3);
        assert_eq!(s[0].mean_sinr_db, 11.0);
        assert!((s[0].std_sinr_db - 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(s[1].std_sinr_db, 0.0);
        assert_eq!(s[2].variant, Variant::Linear);
    }

    #[test]
    fn csv_layout() {
        let mut r = row(Variant::WidelyLinear, -5.0, 3, 14.25);
        r.warnings = vec!["a".into(), "b".into()];
        let mut buf = Vec::new();
        write_sinr_csv(&mut buf, &[r]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "experiment,variant,p_tx_dbm,n_est,calibrated,trial,seed,sinr_db,warnings\n\
             sinr-vs-ptx,widely-linear,-5,100,true,3,9,14.25,a;b\n"
        );
    }

    #[test]
    fn summary_path_naming() {
        assert_eq!(summary_path(Path::new("/tmp/x/run.csv")), PathBuf::from("/tmp/x/run.summary.csv"));
        assert_eq!(summary_path(Path::new("run")), PathBuf::from("run.summary.csv"));
    }
}
