//! `run`, `sweep` and `check`: drive a configuration end to end and write
//! its results.
//!
//! Output directory layout:
//!
//! * `timeseries.csv`: `t,z,int_p,int_gp,min_n,max_n,min_p,flux_residual`,
//!   one row per snapshot
//! * `snapshot_<t>.csv`: `h,n,p`, one row per node
//! * `report.txt`: `NAME PASS|FAIL worst=<v> t=<t>` per invariant check
//!
//! Floats are written with 17 significant digits, so files round-trip
//! exactly and identical configs give byte-identical outputs.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use crate::analysis::{
    check_n_bound, check_positivity, check_z_inequality, fit_extinction, DecayFit, InvariantReport,
};
use crate::config::{is_numeric_key, RawConfig, RunConfig};
use crate::error::{Error, Result};
use crate::model::{Grid, Model, State};
use crate::timestepper::{integrate, Diagnostics, Trajectory};

/// Tolerance of the `N_BOUND` check.
pub const N_BOUND_TOL: f64 = 1e-8;

/// Exit code when the run finished but an invariant check failed.
pub const EXIT_CHECK_FAILED: i32 = 5;

pub const TIMESERIES_HEADER: &str = "t,z,int_p,int_gp,min_n,max_n,min_p,flux_residual";

/// 17 significant digits.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

/// `snapshot_<t>.csv`, with `t` printed to 9 decimals and trailing zeros trimmed.
pub fn snapshot_file_name(t: f64) -> String {
    let mut s = format!("{t:.9}");
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    format!("snapshot_{s}.csv")
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub exit_code: i32,
    pub reports: Vec<InvariantReport>,
    pub decay_fit: Option<DecayFit>,
    pub final_int_p: Option<f64>,
    pub final_z: Option<f64>,
    pub error: Option<String>,
}

impl RunOutcome {
    fn failed(err: &Error) -> Self {
        RunOutcome {
            exit_code: err.exit_code(),
            reports: Vec::new(),
            decay_fit: None,
            final_int_p: None,
            final_z: None,
            error: Some(err.to_string()),
        }
    }

    pub fn report(&self, name: &str) -> Option<&InvariantReport> {
        self.reports.iter().find(|r| r.name == name)
    }
}

/// Invariant checks run on every trajectory, plus the extinction fit when
/// `m_p > r/chi`.
pub fn analyze(
    traj: &Trajectory,
    config: &RunConfig,
    model: &Model,
    grid: &Grid,
) -> Result<(Vec<InvariantReport>, Option<DecayFit>, Vec<String>)> {
    let mut reports = vec![
        check_positivity(traj, config.solver.positivity_tol),
        check_n_bound(traj, &config.params, N_BOUND_TOL),
        check_z_inequality(traj, model, grid)?,
    ];
    let mut notes = Vec::new();
    let mut fit = None;
    if config.params.extinction_guaranteed() {
        let window = config.extinction_window();
        match fit_extinction(traj, &config.params, window) {
            Ok(f) => {
                reports.push(InvariantReport {
                    name: "EXTINCTION_RATE".into(),
                    passed: f.passed,
                    worst: f.rate,
                    node: None,
                    t: window.1,
                    tolerance: f.bound + crate::analysis::DECAY_RATE_SLACK * f.bound.abs(),
                });
                fit = Some(f);
            }
            Err(Error::Precondition(reason)) => {
                notes.push(format!("EXTINCTION_RATE skipped: {reason}"));
            }
            Err(e) => return Err(e),
        }
    }
    Ok((reports, fit, notes))
}

fn write_report(dir: &Path, reports: &[InvariantReport], notes: &[String]) -> Result<()> {
    let mut text = String::new();
    for r in reports {
        let _ = writeln!(text, "{r}");
    }
    for n in notes {
        let _ = writeln!(text, "# {n}");
    }
    fs::write(dir.join("report.txt"), text)?;
    Ok(())
}

fn write_outputs(dir: &Path, traj: &Trajectory, grid: &Grid) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut ts = String::from(TIMESERIES_HEADER);
    ts.push('\n');
    for d in &traj.diagnostics {
        let row = [
            d.t,
            d.z,
            d.int_p,
            d.int_gp,
            d.min_n,
            d.max_n,
            d.min_p,
            d.flux_residual,
        ]
        .map(format_float)
        .join(",");
        ts.push_str(&row);
        ts.push('\n');
    }
    fs::write(dir.join("timeseries.csv"), ts)?;

    for s in &traj.snapshots {
        let mut text = String::from("h,n,p\n");
        for (j, h) in grid.nodes().enumerate() {
            let _ = writeln!(
                text,
                "{},{},{}",
                format_float(h),
                format_float(s.n[j]),
                format_float(s.p[j])
            );
        }
        fs::write(dir.join(snapshot_file_name(s.t)), text)?;
    }
    Ok(())
}

fn finish(config: &RunConfig, traj: &Trajectory, model: &Model, grid: &Grid) -> Result<RunOutcome> {
    let (reports, decay_fit, notes) = analyze(traj, config, model, grid)?;
    write_report(&config.output_dir, &reports, &notes)?;
    let last = traj.diagnostics.last().expect("trajectory is never empty");
    let all_pass = reports.iter().all(|r| r.passed);
    Ok(RunOutcome {
        exit_code: if all_pass { 0 } else { EXIT_CHECK_FAILED },
        reports,
        decay_fit,
        final_int_p: Some(last.int_p),
        final_z: Some(last.z),
        error: None,
    })
}

fn execute_run(config: &RunConfig) -> Result<RunOutcome> {
    let model = config.model()?;
    let grid = config.grid()?;
    let state0 = config.initial_state(&grid)?;
    let traj = integrate(&state0, &model, &grid, &config.solver)?;
    write_outputs(&config.output_dir, &traj, &grid)?;
    finish(config, &traj, &model, &grid)
}

/// Integrates, then writes the output files and the check report.
/// Exit code 0 iff every check passes and the solver succeeded.
pub fn run_command(config: &RunConfig) -> RunOutcome {
    execute_run(config).unwrap_or_else(|e| RunOutcome::failed(&e))
}

fn parse_row(line: &str, path: &Path) -> Result<Vec<f64>> {
    line.split(',')
        .map(|v| {
            v.trim().parse::<f64>().map_err(|_| Error::DataFile {
                path: path.to_path_buf(),
                message: format!("cannot parse `{v}`"),
            })
        })
        .collect()
}

/// Rebuilds a trajectory from the files written by [`run_command`].
pub fn load_trajectory(dir: &Path, grid: &Grid) -> Result<Trajectory> {
    let ts_path = dir.join("timeseries.csv");
    if !ts_path.is_file() {
        return Err(Error::MissingFile(ts_path));
    }
    let text = fs::read_to_string(&ts_path)?;
    let mut lines = text.lines();
    if lines.next() != Some(TIMESERIES_HEADER) {
        return Err(Error::DataFile {
            path: ts_path,
            message: format!("expected header `{TIMESERIES_HEADER}`"),
        });
    }
    let mut snapshots = Vec::new();
    let mut diagnostics = Vec::new();
    for line in lines.filter(|l| !l.trim().is_empty()) {
        let row = parse_row(line, &ts_path)?;
        if row.len() != 8 {
            return Err(Error::DataFile {
                path: ts_path,
                message: format!("expected 8 columns, found {}", row.len()),
            });
        }
        let d = Diagnostics {
            t: row[0],
            z: row[1],
            int_p: row[2],
            int_gp: row[3],
            min_n: row[4],
            max_n: row[5],
            min_p: row[6],
            flux_residual: row[7],
        };
        let snap_path = dir.join(snapshot_file_name(d.t));
        if !snap_path.is_file() {
            return Err(Error::MissingFile(snap_path));
        }
        let snap_text = fs::read_to_string(&snap_path)?;
        let mut n = Vec::with_capacity(grid.len());
        let mut p = Vec::with_capacity(grid.len());
        for l in snap_text.lines().skip(1).filter(|l| !l.trim().is_empty()) {
            let r = parse_row(l, &snap_path)?;
            if r.len() != 3 {
                return Err(Error::DataFile {
                    path: snap_path,
                    message: "expected columns h,n,p".into(),
                });
            }
            n.push(r[1]);
            p.push(r[2]);
        }
        let state = State::new(n, p, d.z, d.t);
        state.check_shape(grid).map_err(|_| Error::DataFile {
            path: snap_path.clone(),
            message: format!("expected {} nodes", grid.len()),
        })?;
        snapshots.push(state);
        diagnostics.push(d);
    }
    Trajectory::from_parts(snapshots, diagnostics)
}

fn execute_check(config: &RunConfig) -> Result<RunOutcome> {
    let model = config.model()?;
    let grid = config.grid()?;
    let traj = load_trajectory(&config.output_dir, &grid)?;
    finish(config, &traj, &model, &grid)
}

/// Reruns the invariant checks on trajectory files already in
/// `config.output_dir` and rewrites `report.txt`.
pub fn check_command(config: &RunConfig) -> RunOutcome {
    execute_check(config).unwrap_or_else(|e| RunOutcome::failed(&e))
}

/// One row of `sweep_summary.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub index: usize,
    pub value: String,
    pub dir: PathBuf,
    pub outcome: RunOutcome,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutcome {
    pub rows: Vec<SweepRow>,
    /// 0 iff every run exited 0, otherwise the first nonzero code in input order.
    pub exit_code: i32,
    pub summary_path: PathBuf,
}

pub const SWEEP_HEADER: &str =
    "index,value,exit_code,final_int_p,final_z,decay_rate,positivity,n_bound,z_inequality,extinction";

fn flag(outcome: &RunOutcome, name: &str) -> &'static str {
    match outcome.report(name) {
        Some(r) if r.passed => "PASS",
        Some(_) => "FAIL",
        None => "NA",
    }
}

fn summary_line(row: &SweepRow) -> String {
    let o = &row.outcome;
    let num = |v: Option<f64>| v.map(format_float).unwrap_or_default();
    format!(
        "{},{},{},{},{},{},{},{},{},{}",
        row.index,
        row.value,
        o.exit_code,
        num(o.final_int_p),
        num(o.final_z),
        num(o.decay_fit.map(|f| f.rate)),
        flag(o, "POSITIVITY"),
        flag(o, "N_BOUND"),
        flag(o, "Z_INEQUALITY"),
        flag(o, "EXTINCTION_RATE"),
    )
}

/// Runs `raw` once per value of `key`, each in `<out>/run_<index>`, and
/// writes `<out>/sweep_summary.csv` in input order. Runs execute on up to
/// `available_parallelism` threads.
pub fn sweep_command(
    raw: &RawConfig,
    key: &str,
    values: &[String],
    out_dir: Option<&Path>,
) -> Result<SweepOutcome> {
    if !is_numeric_key(key) {
        return Err(Error::Validation {
            key: key.to_string(),
            message: "only numeric keys can be swept".into(),
        });
    }
    if values.is_empty() {
        return Err(Error::Validation {
            key: key.to_string(),
            message: "sweep needs at least one value".into(),
        });
    }
    let base = out_dir
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from(raw.get("output.dir").unwrap_or("out")));
    fs::create_dir_all(&base)?;

    let next = AtomicUsize::new(0);
    let rows: Mutex<Vec<SweepRow>> = Mutex::new(Vec::with_capacity(values.len()));
    let workers = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
        .min(values.len());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let index = next.fetch_add(1, Ordering::Relaxed);
                let Some(value) = values.get(index) else {
                    break;
                };
                let dir = base.join(format!("run_{index:03}"));
                let outcome = match value.trim().parse::<f64>() {
                    Ok(_) => match RunConfig::from_raw(&raw.with_override(key, value.trim())) {
                        Ok(mut cfg) => {
                            cfg.output_dir = dir.clone();
                            run_command(&cfg)
                        }
                        Err(e) => RunOutcome::failed(&e),
                    },
                    Err(_) => RunOutcome::failed(&Error::Validation {
                        key: key.to_string(),
                        message: format!("`{value}` is not a number"),
                    }),
                };
                rows.lock().expect("sweep worker panicked").push(SweepRow {
                    index,
                    value: value.trim().to_string(),
                    dir,
                    outcome,
                });
            });
        }
    });
    let mut rows = rows.into_inner().expect("sweep worker panicked");
    rows.sort_by_key(|r| r.index);

    let mut summary = String::from(SWEEP_HEADER);
    summary.push('\n');
    for row in &rows {
        summary.push_str(&summary_line(row));
        summary.push('\n');
    }
    let summary_path = base.join("sweep_summary.csv");
    fs::write(&summary_path, summary)?;
    let exit_code = rows
        .iter()
        .map(|r| r.outcome.exit_code)
        .find(|&c| c != 0)
        .unwrap_or(0);
    Ok(SweepOutcome {
        rows,
        exit_code,
        summary_path,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snapshot_names() {
        assert_eq!(snapshot_file_name(0.0), "snapshot_0.csv");
        assert_eq!(snapshot_file_name(40.0), "snapshot_40.csv");
        assert_eq!(snapshot_file_name(0.30000000000000004), "snapshot_0.3.csv");
        assert_eq!(snapshot_file_name(1.25), "snapshot_1.25.csv");
    }

    #[test]
    fn float_format_is_lossless() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0] {
            let s = format_float(v);
            assert_eq!(s.parse::<f64>().unwrap(), v);
            let mantissa = s.trim_start_matches('-').split('e').next().unwrap();
            assert_eq!(mantissa.replace('.', "").len(), 17);
        }
    }
}
