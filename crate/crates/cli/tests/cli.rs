use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn simulate(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_simulate"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path
}

const SMALL: &str =
    "grid.M = 21\nsolver.dt = 1e-3\nsolver.t_end = 0.2\nsolver.snapshot_every = 50\n";

const EXTINCTION: &str = "params.chi = 1\nparams.r = 0.5\nparams.m_p = 1\nparams.m = 0.1\n\
params.k = 1\nparams.H = 1\nparams.gamma = 1\nmodel.response = holling2\n\
model.light = exponential\ngrid.M = 41\nsolver.dt = 2e-3\nsolver.t_end = 10\n\
solver.snapshot_every = 250\ninit.z = 0.5\n";

fn run(cfg: &Path, out: &Path) -> Output {
    simulate(&["run", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()])
}

#[test]
fn trivial_equilibrium_rows_identical() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "trivial.cfg",
        &format!("{SMALL}init.p.profile = constant\ninit.p.base = 0\ninit.z = 0\n"),
    );
    let out = tmp.path().join("out");
    let res = run(&cfg, &out);
    assert_eq!(code(&res), 0, "{}", stderr(&res));
    let ts = fs::read_to_string(out.join("timeseries.csv")).unwrap();
    let rows: Vec<Vec<&str>> = ts.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 5);
    for row in &rows {
        assert_eq!(row[1..7], rows[0][1..7]);
    }
    let report = fs::read_to_string(out.join("report.txt")).unwrap();
    assert_eq!(report.lines().filter(|l| l.contains(" PASS ")).count(), 3);
    assert!(!report.contains("FAIL"));
    assert!(out.join("snapshot_0.2.csv").is_file());
}

#[test]
fn extinction_config_passes_rate_check() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "ext.cfg", EXTINCTION);
    let out = tmp.path().join("out");
    let res = run(&cfg, &out);
    assert_eq!(code(&res), 0, "{}", stderr(&res));
    let report = fs::read_to_string(out.join("report.txt")).unwrap();
    assert!(
        report
            .lines()
            .any(|l| l.starts_with("EXTINCTION_RATE PASS")),
        "{report}"
    );
}

#[test]
fn explicit_scheme_above_cfl_exits_3() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "rk4.cfg",
        "grid.M = 101\nsolver.scheme = rk4\nsolver.dt = 1e-3\nsolver.t_end = 0.1\n",
    );
    let res = run(&cfg, &tmp.path().join("out"));
    assert_eq!(code(&res), 3);
    assert!(
        stderr(&res).to_lowercase().contains("cfl"),
        "{}",
        stderr(&res)
    );
}

#[test]
fn config_errors_exit_1() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("out");
    let unknown = write_config(tmp.path(), "a.cfg", "params.foo = 1\n");
    let res = run(&unknown, &out);
    assert_eq!(code(&res), 1);
    assert!(stderr(&res).contains("params.foo"));

    let bad_chi = write_config(tmp.path(), "b.cfg", "params.chi = 0\n");
    let res = run(&bad_chi, &out);
    assert_eq!(code(&res), 1);
    assert!(stderr(&res).contains("chi must be > 0"), "{}", stderr(&res));

    let res = run(&tmp.path().join("missing.cfg"), &out);
    assert_eq!(code(&res), 1);

    let res = simulate(&["run"]);
    assert_eq!(code(&res), 1);
    let res = simulate(&["frobnicate", "x"]);
    assert_eq!(code(&res), 1);
}

#[test]
fn negative_initial_data_exits_2() {
    let tmp = TempDir::new().unwrap();
    let profile = tmp.path().join("p.csv");
    let values: Vec<String> = (0..11)
        .map(|j| if j == 4 { "-0.5".into() } else { "0.2".into() })
        .collect();
    fs::write(&profile, format!("p\n{}\n", values.join("\n"))).unwrap();
    let cfg = write_config(
        tmp.path(),
        "neg.cfg",
        &format!(
            "grid.M = 11\nsolver.t_end = 0.01\ninit.p.profile = from-file\ninit.p.path = {}\n",
            profile.display()
        ),
    );
    let res = run(&cfg, &tmp.path().join("out"));
    assert_eq!(code(&res), 2, "{}", stderr(&res));
}

#[test]
fn nutrient_near_pole_exits_4() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "pole.cfg",
        "grid.M = 11\nsolver.t_end = 0.01\nsolver.positivity_tol = 10\n\
         init.n.profile = constant\ninit.n.base = -0.9\n",
    );
    let res = run(&cfg, &tmp.path().join("out"));
    assert_eq!(code(&res), 4, "{}", stderr(&res));
}

#[test]
fn check_detects_tampered_trajectory() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "c.cfg", SMALL);
    let out = tmp.path().join("out");
    assert_eq!(code(&run(&cfg, &out)), 0);
    let check = |out: &Path| {
        simulate(&[
            "check",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--quiet",
        ])
    };
    let res = check(&out);
    assert_eq!(code(&res), 0, "{}", stderr(&res));
    assert!(res.stdout.is_empty());

    let snap = out.join("snapshot_0.1.csv");
    let text = fs::read_to_string(&snap).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    let cols: Vec<&str> = lines[3].split(',').collect();
    lines[3] = format!("{},5.0,{}", cols[0], cols[2]);
    fs::write(&snap, lines.join("\n")).unwrap();
    assert_eq!(code(&check(&out)), 5);
    let report = fs::read_to_string(out.join("report.txt")).unwrap();
    assert!(report.contains("N_BOUND FAIL"), "{report}");

    fs::remove_file(&snap).unwrap();
    assert_eq!(code(&check(&out)), 1);
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "r.cfg",
        &format!("{SMALL}init.p.profile = random\ninit.p.base = 0.5\ninit.p.amplitude = 0.4\nseed = 42\n"),
    );
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert_eq!(code(&run(&cfg, &a)), 0);
    assert_eq!(code(&run(&cfg, &b)), 0);
    let mut names: Vec<_> = fs::read_dir(&a)
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    assert!(names.len() > 3);
    for name in names {
        assert_eq!(
            fs::read(a.join(&name)).unwrap(),
            fs::read(b.join(&name)).unwrap(),
            "{name:?}"
        );
    }
}

#[test]
fn single_value_sweep_matches_run() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "s.cfg", &format!("{SMALL}params.r = 1.5\n"));
    let direct = tmp.path().join("direct");
    assert_eq!(code(&run(&cfg, &direct)), 0);
    let sweep = tmp.path().join("sweep");
    let res = simulate(&[
        "sweep",
        cfg.to_str().unwrap(),
        "--key",
        "params.r",
        "--values",
        "1.5",
        "--out",
        sweep.to_str().unwrap(),
    ]);
    assert_eq!(code(&res), 0, "{}", stderr(&res));
    for entry in fs::read_dir(&direct).unwrap() {
        let name = entry.unwrap().file_name();
        assert_eq!(
            fs::read(direct.join(&name)).unwrap(),
            fs::read(sweep.join("run_000").join(&name)).unwrap(),
            "{name:?}"
        );
    }
    let summary = fs::read_to_string(sweep.join("sweep_summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 2);
}

fn sweep(cfg: &Path, key: &str, values: &str, out: &Path) -> (Output, Vec<Vec<String>>) {
    let res = simulate(&[
        "sweep",
        cfg.to_str().unwrap(),
        "--key",
        key,
        "--values",
        values,
        "--out",
        out.to_str().unwrap(),
        "--quiet",
    ]);
    let summary = fs::read_to_string(out.join("sweep_summary.csv")).unwrap_or_default();
    let rows = summary
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(String::from).collect())
        .collect();
    (res, rows)
}

#[test]
fn sweep_flags_invalid_row_only() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "s.cfg", SMALL);
    let (res, rows) = sweep(&cfg, "params.chi", "1.0,0,2.0", &tmp.path().join("out"));
    assert_eq!(code(&res), 1);
    assert!(stderr(&res).contains("chi"));
    let codes: Vec<&str> = rows.iter().map(|r| r[2].as_str()).collect();
    assert_eq!(codes, ["0", "1", "0"]);
    assert_eq!(rows[1][1], "0");
    assert_eq!(rows[1][6], "NA");
    assert_eq!(rows[0][6], "PASS");
    assert_eq!(rows[2][6], "PASS");
}

#[test]
fn mortality_sweep_all_extinct() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "e.cfg", EXTINCTION);
    let (res, rows) = sweep(&cfg, "params.m_p", "0.6,0.8,1.0", &tmp.path().join("out"));
    assert_eq!(code(&res), 0, "{}", stderr(&res));
    let values: Vec<&str> = rows.iter().map(|r| r[1].as_str()).collect();
    assert_eq!(values, ["0.6", "0.8", "1.0"]);
    for row in &rows {
        assert_eq!(row[9], "PASS", "{row:?}");
        let rate: f64 = row[5].parse().unwrap();
        assert!(rate < 0.0);
    }
}

#[test]
fn sweep_rejects_non_numeric_key() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "s.cfg", SMALL);
    let (res, _) = sweep(&cfg, "model.light", "exponential", &tmp.path().join("out"));
    assert_eq!(code(&res), 1);
}
