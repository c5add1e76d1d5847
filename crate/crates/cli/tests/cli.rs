use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_dirac-hardy");

struct Run {
    out: Output,
    dir: PathBuf,
}

impl Run {
    fn code(&self) -> i32 {
        self.out.status.code().expect("exit code")
    }

    fn stderr(&self) -> String {
        String::from_utf8_lossy(&self.out.stderr).into_owned()
    }

    fn csv(&self, command: &str) -> Vec<Vec<String>> {
        let mut r = csv::Reader::from_path(self.dir.join(format!("{command}.csv"))).unwrap();
        let header: Vec<String> = r.headers().unwrap().iter().map(String::from).collect();
        let mut rows = vec![header];
        rows.extend(r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()));
        rows
    }

    fn raw_csv(&self, command: &str) -> Vec<u8> {
        std::fs::read(self.dir.join(format!("{command}.csv"))).unwrap()
    }

    fn manifest(&self, command: &str) -> toml::Table {
        let text = std::fs::read_to_string(self.dir.join(format!("{command}.manifest.txt"))).unwrap();
        text.parse().unwrap()
    }
}

fn run_with(tmp: &TempDir, command: &str, config: &str, env: &[(&str, &str)]) -> Run {
    let cfg = tmp.path().join(format!("{command}.toml"));
    std::fs::write(&cfg, config).unwrap();
    run_file(tmp.path(), command, &cfg, env)
}

fn run_file(dir: &Path, command: &str, cfg: &Path, env: &[(&str, &str)]) -> Run {
    let out_dir = dir.join("out");
    let mut cmd = Command::new(BIN);
    cmd.arg(command).arg("--config").arg(cfg).arg("--out").arg(&out_dir);
    cmd.env_remove("DIRAC_HARDY_THREADS");
    for (k, v) in env {
        cmd.env(k, v);
    }
    Run {
        out: cmd.output().unwrap(),
        dir: out_dir,
    }
}

fn run(command: &str, config: &str) -> (TempDir, Run) {
    let tmp = TempDir::new().unwrap();
    let r = run_with(&tmp, command, config, &[]);
    (tmp, r)
}

fn column(rows: &[Vec<String>], name: &str) -> Vec<String> {
    let idx = rows[0].iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"));
    rows[1..].iter().map(|r| r[idx].clone()).collect()
}

fn floats(rows: &[Vec<String>], name: &str) -> Vec<f64> {
    column(rows, name).iter().map(|s| s.parse().unwrap()).collect()
}

const COULOMB_HALF: &str = "[potential]\ntype = \"coulomb\"\nnu = 0.5\n";

#[test]
fn verify_hardy_critical_coupling_holds() {
    let (_t, r) = run(
        "verify-hardy",
        "c = 0.0\n[potential]\ntype = \"coulomb\"\nnu = 1.0\n[grid]\nN = 2000\n",
    );
    assert_eq!(r.code(), 0, "{}", r.stderr());
    let rows = r.csv("verify-hardy");
    assert_eq!(rows[0], ["kappa", "c", "gamma", "mu1", "verdict"]);
    assert_eq!(column(&rows, "kappa"), ["-1", "1", "-2", "2"]);
    assert!(floats(&rows, "mu1").iter().all(|&m| m >= -1e-6));
    assert_eq!(r.manifest("verify-hardy")["summary"]["verdict"].as_str(), Some("holds"));
}

#[test]
fn verify_hardy_above_sharp_constant_exits_two() {
    let (_t, r) = run(
        "verify-hardy",
        "c = 0.81\n[potential]\ntype = \"coulomb\"\nnu = 0.6\n[grid]\nN = 2000\n",
    );
    assert_eq!(r.code(), 2, "{}", r.stderr());
    assert!(column(&r.csv("verify-hardy"), "verdict").contains(&"fails".to_string()));
}

#[test]
fn solve_eigen_reports_oracle_and_error() {
    let (_t, r) = run("solve-eigen", COULOMB_HALF);
    assert_eq!(r.code(), 0, "{}", r.stderr());
    let rows = r.csv("solve-eigen");
    assert_eq!(
        rows[0],
        ["nu", "kappa", "k", "N", "E", "E_oracle", "rel_err", "gamma_lo", "gamma_hi", "mu_at_root", "flag"]
    );
    let e = floats(&rows, "E")[0];
    let exact = floats(&rows, "E_oracle")[0];
    assert!((exact - 0.75f64.sqrt()).abs() < 1e-15);
    assert!(floats(&rows, "rel_err")[0] <= 1e-3);
    assert!((e - exact).abs() / exact <= 1e-3);
    assert_eq!(column(&rows, "flag"), ["sign-change"]);
}

#[test]
fn empty_window_exits_two() {
    let (_t, r) = run("solve-eigen", &format!("window = [1.1, 1.5]\n{COULOMB_HALF}[grid]\nN = 1000\n"));
    assert_eq!(r.code(), 2, "{}", r.stderr());
    assert_eq!(column(&r.csv("solve-eigen"), "flag"), ["no-eigenvalue"]);
}

#[test]
fn malformed_value_names_the_field() {
    let (_t, r) = run("solve-eigen", "[potential]\ntype = \"coulomb\"\nnu = \"abc\"\n");
    assert_eq!(r.code(), 1);
    assert!(r.stderr().contains("nu"), "{}", r.stderr());
    assert!(!r.dir.join("solve-eigen.csv").exists());
}

#[test]
fn unknown_key_is_rejected() {
    let (_t, r) = run("solve-eigen", &format!("kapa = -1\n{COULOMB_HALF}"));
    assert_eq!(r.code(), 1);
    assert!(r.stderr().contains("kapa"), "{}", r.stderr());
}

#[test]
fn precondition_names_the_field() {
    let (_t, r) = run("verify-hardy", COULOMB_HALF);
    assert_eq!(r.code(), 1);
    assert!(r.stderr().contains("`c`"), "{}", r.stderr());

    let (_t, r) = run("solve-eigen", &format!("{COULOMB_HALF}[grid]\nN = 4\n"));
    assert_eq!(r.code(), 1);
    assert!(r.stderr().contains("grid.N"), "{}", r.stderr());

    let (_t, r) = run("solve-eigen", &format!("command = \"sweep\"\n{COULOMB_HALF}"));
    assert_eq!(r.code(), 1);
    assert!(r.stderr().contains("command"), "{}", r.stderr());
}

#[test]
fn empty_sweep_is_a_precondition_error() {
    let (_t, r) = run("sweep", &format!("{COULOMB_HALF}[sweep]\naxis = \"N\"\nvalues = []\n"));
    assert_eq!(r.code(), 1);
    assert!(r.stderr().contains("sweep.values"), "{}", r.stderr());
}

#[test]
fn mesh_sweep_orders_rows_and_converges() {
    let (_t, r) = run(
        "sweep",
        &format!("{COULOMB_HALF}[sweep]\naxis = \"N\"\nvalues = [4000, 1000, 2000]\n"),
    );
    assert_eq!(r.code(), 0, "{}", r.stderr());
    let rows = r.csv("sweep");
    assert_eq!(column(&rows, "N"), ["1000", "2000", "4000"]);
    let err = floats(&rows, "rel_err");
    assert!(err[0] > err[1] && err[1] > err[2], "{err:?}");
    assert_eq!(column(&rows, "ratio")[0], "");
    let ratios: Vec<f64> = column(&rows, "ratio")[1..].iter().map(|s| s.parse().unwrap()).collect();
    assert!(ratios.iter().all(|&q| q > 3.0 && q < 5.0), "{ratios:?}");
}

#[test]
fn shift_sweep_is_monotone() {
    let values: Vec<String> = (0..20).map(|i| format!("{}", 0.1 + 1.75 * i as f64 / 19.0)).collect();
    let (_t, r) = run(
        "sweep",
        &format!("{COULOMB_HALF}[grid]\nN = 1500\n[sweep]\naxis = \"gamma\"\nvalues = [{}]\n", values.join(", ")),
    );
    assert_eq!(r.code(), 0, "{}", r.stderr());
    let mu = floats(&r.csv("sweep"), "mu1");
    assert_eq!(mu.len(), 20);
    assert!(mu.windows(2).all(|w| w[0] > w[1]));
    assert!(floats(&r.csv("sweep"), "dmu1_dgamma").iter().all(|&d| d < 0.0));
}

#[test]
fn coupling_and_shift_sweeps() {
    let (_t, r) = run(
        "sweep",
        &format!("{COULOMB_HALF}[grid]\nN = 1500\n[sweep]\naxis = \"nu\"\nvalues = [0.9, 0.3, 1.0]\n"),
    );
    assert_eq!(r.code(), 0, "{}", r.stderr());
    let rows = r.csv("sweep");
    assert_eq!(column(&rows, "nu"), ["0.3", "0.9", "1"]);
    assert_eq!(column(&rows, "flag")[2], "critical-endpoint");

    let (_t, r) = run(
        "sweep",
        "[potential]\ntype = \"coulomb\"\nnu = 0.6\n[grid]\nN = 2000\n[sweep]\naxis = \"c\"\nvalues = [0.81, 0.79]\n",
    );
    assert_eq!(r.code(), 0, "{}", r.stderr());
    assert_eq!(column(&r.csv("sweep"), "verdict"), ["holds", "fails"]);
}

#[test]
fn sweep_is_deterministic_across_thread_counts() {
    let cfg = format!("{COULOMB_HALF}[grid]\nN = 1200\n[sweep]\naxis = \"gamma\"\nvalues = [1.2, 1.4, 1.1, 1.3]\n");
    let t1 = TempDir::new().unwrap();
    let t4 = TempDir::new().unwrap();
    let a = run_with(&t1, "sweep", &cfg, &[("DIRAC_HARDY_THREADS", "1")]);
    let b = run_with(&t4, "sweep", &cfg, &[("DIRAC_HARDY_THREADS", "4")]);
    assert_eq!(a.code(), 0);
    assert_eq!(b.code(), 0);
    assert_eq!(a.raw_csv("sweep"), b.raw_csv("sweep"));
    assert_eq!(a.manifest("sweep")["threads"].as_integer(), Some(1));
    assert_eq!(b.manifest("sweep")["threads"].as_integer(), Some(4));
}

#[test]
fn bad_thread_count_is_an_error() {
    let tmp = TempDir::new().unwrap();
    let r = run_with(&tmp, "solve-eigen", COULOMB_HALF, &[("DIRAC_HARDY_THREADS", "zero")]);
    assert_eq!(r.code(), 1);
    assert!(r.stderr().contains("DIRAC_HARDY_THREADS"));
}

#[test]
fn manifest_alone_reproduces_the_result() {
    let tmp = TempDir::new().unwrap();
    let first = run_with(
        &tmp,
        "resolvent-check",
        &format!("gamma = 1.3\nsamples = 12\nseed = 99\n{COULOMB_HALF}[grid]\nN = 1500\n"),
        &[],
    );
    assert_eq!(first.code(), 0, "{}", first.stderr());
    let manifest = first.manifest("resolvent-check");
    assert_eq!(manifest["tool"].as_str(), Some(concat!("dirac-hardy ", env!("CARGO_PKG_VERSION"))));
    assert!(manifest["wall_time_s"].as_float().unwrap() >= 0.0);
    assert!(manifest["mesh"].as_str().unwrap().contains("N=1500"));

    let mut echo = manifest["config"].as_table().unwrap().clone();
    echo.remove("output_path");
    let replay = TempDir::new().unwrap();
    let cfg = replay.path().join("replay.toml");
    std::fs::write(&cfg, toml::to_string(&echo).unwrap()).unwrap();
    let second = run_file(replay.path(), "resolvent-check", &cfg, &[]);
    assert_eq!(second.code(), 0, "{}", second.stderr());
    assert_eq!(first.raw_csv("resolvent-check"), second.raw_csv("resolvent-check"));

    let rows = first.csv("resolvent-check");
    assert_eq!(rows.len(), 13);
    assert!(floats(&rows, "residual").iter().all(|&x| x <= 1e-8));
    assert!(floats(&rows, "symmetry_defect").iter().all(|&x| x <= 1e-10));
}

#[test]
fn domain_diagnostics_at_critical_coupling() {
    let (_t, r) = run(
        "domain-diagnostics",
        "[potential]\ntype = \"coulomb\"\nnu = 1.0\n[grid]\nN = 3000\n",
    );
    assert_eq!(r.code(), 0, "{}", r.stderr());
    let summary = r.manifest("domain-diagnostics")["summary"].clone();
    assert_eq!(summary["r_inv_diverges"].as_str(), Some("true"));
    let drift: f64 = summary["log_slope_drift"].as_str().unwrap().parse().unwrap();
    assert!(drift <= 0.2);
    let integrals = floats(&r.csv("domain-diagnostics"), "truncated_integral");
    assert!(integrals.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn estimate_c_brackets_sharp_constant() {
    let (_t, r) = run(
        "estimate-c",
        "[potential]\ntype = \"coulomb\"\nnu = 0.6\n[grid]\nN = 2000\n[tolerances]\nestimate = 1e-3\n",
    );
    assert_eq!(r.code(), 0, "{}", r.stderr());
    let rows = r.csv("estimate-c");
    let c = floats(&rows, "c_est")[0];
    assert!((c - 0.8).abs() < 5e-3, "{c}");
    assert_eq!(floats(&rows, "c_reference")[0], 0.8);
}

#[test]
fn perturbed_coulomb_runs() {
    let (_t, r) = run(
        "verify-hardy",
        "c = 0.5\n[potential]\ntype = \"perturbed-coulomb\"\nnu = 0.5\nc1 = 0.2\ngamma_cap = 0.3\n[grid]\nN = 1500\n",
    );
    assert_eq!(r.code(), 0, "{}", r.stderr());
    let (_t, r) = run(
        "verify-hardy",
        "c = 0.1\n[potential]\ntype = \"perturbed-coulomb\"\nnu = 0.9\nc1 = 0.6\ngamma_cap = 0.9\n",
    );
    assert_eq!(r.code(), 1);
    assert!(r.stderr().contains("hypothesis"), "{}", r.stderr());
}
