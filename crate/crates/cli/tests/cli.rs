use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn vqspec(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vqspec"))
        .args(args)
        .current_dir(cwd)
        .env_remove("VQSPEC_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn report_json(out: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap()
}

fn energies(run: &Value) -> Vec<f64> {
    run["report"]["states"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| s["energy"].as_f64().unwrap())
        .collect()
}

fn run_dirs(out: &Path) -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = fs::read_dir(out)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.is_dir())
        .collect();
    v.sort();
    v
}

const Z0: &str = "qubits 1\n1.0 Z0\n";

#[test]
fn solve_single_z_finds_both_levels() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "z0.ham", Z0);
    let o = vqspec(
        &[
            "solve", "--pauli", "z0.ham", "--states", "2", "--out", "out",
        ],
        tmp.path(),
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let report = report_json(&tmp.path().join("out"));
    let mut e = energies(&report["runs"][0]);
    e.sort_by(f64::total_cmp);
    assert!(
        (e[0] + 1.0).abs() < 1e-2 && (e[1] - 1.0).abs() < 1e-2,
        "{e:?}"
    );
    assert_eq!(report["complete"], Value::Bool(true));
    assert!(tmp.path().join("out/report.txt").is_file());
}

#[test]
fn solve_generated_3sat_reaches_zero_energy() {
    let tmp = TempDir::new().unwrap();
    let o = vqspec(
        &["gen3sat", "4", "18", "7", "--out", "sat4.cnf"],
        tmp.path(),
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let o = vqspec(
        &[
            "solve", "--cnf", "sat4.cnf", "--ansatz", "compact", "--states", "3", "--seed", "7",
            "--out", "out",
        ],
        tmp.path(),
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let e = energies(&report_json(&tmp.path().join("out"))["runs"][0]);
    assert_eq!(e.len(), 3);
    let lowest = e.iter().copied().fold(f64::INFINITY, f64::min);
    assert!(lowest.abs() < 1e-2, "{e:?}");
}

#[test]
fn trajectory_and_eigenstate_files_are_written() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "z0.ham", Z0);
    let o = vqspec(
        &[
            "solve", "--pauli", "z0.ham", "--states", "2", "--out", "out",
        ],
        tmp.path(),
    );
    assert_eq!(code(&o), 0);
    let dirs = run_dirs(&tmp.path().join("out"));
    assert_eq!(dirs.len(), 1);
    let d = &dirs[0];
    assert!(d
        .file_name()
        .unwrap()
        .to_string_lossy()
        .ends_with("z0-seed0"));
    for f in ["eigenstate-000.bin", "eigenstate-001.bin"] {
        let bytes = fs::read(d.join(f)).unwrap();
        assert_eq!(&bytes[..8], b"VQSPECSV");
        assert_eq!(bytes.len(), 16 + 2 * 16);
    }

    let csv = fs::read_to_string(d.join("trajectory.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "iter,tau,energy,delta_theta_norm,lambda,n_deflations,event"
    );
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    let mut last_iter = -1i64;
    let mut below = 0usize;
    for r in &rows {
        assert_eq!(r.len(), 7);
        let iter: i64 = r[0].parse().unwrap();
        match r[6] {
            "step" => {
                assert!(iter > last_iter, "iterations must increase");
                last_iter = iter;
                let delta: f64 = r[3].parse().unwrap();
                below = if delta < 1e-2 { below + 1 } else { 0 };
            }
            "deflated" => assert!(below >= 3, "deflated after only {below} small steps"),
            "rerandomized" => below = 0,
            "converged" => {}
            other => panic!("unexpected event {other}"),
        }
    }
    assert_eq!(rows.iter().filter(|r| r[6] == "deflated").count(), 2);
}

#[test]
fn artifacts_are_reproducible() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "z0.ham", Z0);
    for out in ["a", "b"] {
        let o = vqspec(
            &[
                "solve", "--pauli", "z0.ham", "--states", "2", "--seed", "3", "--out", out,
            ],
            tmp.path(),
        );
        assert_eq!(code(&o), 0);
    }
    let (a, b) = (
        run_dirs(&tmp.path().join("a")),
        run_dirs(&tmp.path().join("b")),
    );
    for f in ["trajectory.csv", "eigenstate-000.bin", "eigenstate-001.bin"] {
        assert_eq!(
            fs::read(a[0].join(f)).unwrap(),
            fs::read(b[0].join(f)).unwrap(),
            "{f}"
        );
    }
    let (ra, rb) = (
        report_json(&tmp.path().join("a")),
        report_json(&tmp.path().join("b")),
    );
    assert_eq!(ra["runs"][0]["report"], rb["runs"][0]["report"]);
}

#[test]
fn sweep_and_repeats_merge_into_one_report() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "za.ham", Z0);
    write(tmp.path(), "zb.ham", "qubits 2\n0.5 Z0\n1.0 Z1\n");
    let o = vqspec(
        &[
            "solve",
            "--pauli",
            "za.ham",
            "zb.ham",
            "--repeats",
            "2",
            "--jobs",
            "2",
            "--out",
            "out",
        ],
        tmp.path(),
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let out = tmp.path().join("out");
    let names: Vec<String> = run_dirs(&out)
        .iter()
        .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
        .collect();
    assert_eq!(
        names,
        [
            "000-za-seed0",
            "001-za-seed1",
            "002-zb-seed0",
            "003-zb-seed1"
        ]
    );
    let report = report_json(&out);
    assert_eq!(report["runs"].as_array().unwrap().len(), 4);
    assert!((energies(&report["runs"][3])[0] + 1.5).abs() < 1e-2);
}

#[test]
fn recorded_states_seed_a_continuation_run() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "z0.ham", Z0);
    assert_eq!(
        code(&vqspec(
            &["solve", "--pauli", "z0.ham", "--out", "first"],
            tmp.path()
        )),
        0
    );
    let ground = run_dirs(&tmp.path().join("first"))[0].join("eigenstate-000.bin");
    let o = vqspec(
        &[
            "solve",
            "--pauli",
            "z0.ham",
            "--deflate",
            ground.to_str().unwrap(),
            "--out",
            "second",
        ],
        tmp.path(),
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let e = energies(&report_json(&tmp.path().join("second"))["runs"][0]);
    assert!((e[0] - 1.0).abs() < 1e-2, "{e:?}");
}

#[test]
fn output_directory_defaults_from_environment() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "z0.ham", Z0);
    let o = Command::new(env!("CARGO_BIN_EXE_vqspec"))
        .args(["solve", "--pauli", "z0.ham"])
        .current_dir(tmp.path())
        .env("VQSPEC_OUT_DIR", "from-env")
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert!(tmp.path().join("from-env/report.json").is_file());
}

#[test]
fn exhausted_budget_exits_incomplete() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "z0.ham", Z0);
    let o = vqspec(
        &[
            "solve",
            "--pauli",
            "z0.ham",
            "--states",
            "2",
            "--max-iterations",
            "5",
            "--out",
            "out",
        ],
        tmp.path(),
    );
    assert_eq!(code(&o), 2);
    assert_eq!(
        report_json(&tmp.path().join("out"))["complete"],
        Value::Bool(false)
    );
}

#[test]
fn missing_input_names_the_path() {
    let tmp = TempDir::new().unwrap();
    let o = vqspec(
        &["solve", "--pauli", "nowhere.ham", "--out", "out"],
        tmp.path(),
    );
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("nowhere.ham"), "{}", stderr(&o));
}

#[test]
fn parse_errors_name_file_and_line() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "bad.ham", "qubits 2\n1.0 Z0\n0.5 Q1\n");
    let o = vqspec(&["diag", "--pauli", "bad.ham"], tmp.path());
    assert_eq!(code(&o), 1);
    let msg = stderr(&o);
    assert!(msg.contains("bad.ham") && msg.contains("line 3"), "{msg}");

    write(tmp.path(), "bad.cnf", "p cnf 3 1\n1 2 0\n");
    let o = vqspec(&["diag", "--cnf", "bad.cnf"], tmp.path());
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("bad.cnf"));

    write(tmp.path(), "z0.ham", Z0);
    write(tmp.path(), "bad.ansatz", "qubits 1\nparams 1\nRQ q0 p0\n");
    let o = vqspec(
        &[
            "solve",
            "--pauli",
            "z0.ham",
            "--ansatz",
            "custom",
            "--ansatz-file",
            "bad.ansatz",
        ],
        tmp.path(),
    );
    assert_eq!(code(&o), 1);
    let msg = stderr(&o);
    assert!(
        msg.contains("bad.ansatz") && msg.contains("line 3"),
        "{msg}"
    );
}

#[test]
fn custom_ansatz_file_drives_a_run() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "z0.ham", Z0);
    write(
        tmp.path(),
        "ry.ansatz",
        "# single rotation\nqubits 1\nparams 1\nRY q0 p0\n",
    );
    let o = vqspec(
        &[
            "solve",
            "--pauli",
            "z0.ham",
            "--ansatz",
            "custom",
            "--ansatz-file",
            "ry.ansatz",
            "--out",
            "out",
        ],
        tmp.path(),
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let e = energies(&report_json(&tmp.path().join("out"))["runs"][0]);
    assert!((e[0] + 1.0).abs() < 1e-2, "{e:?}");
}

#[test]
fn usage_errors_exit_one_and_help_exits_zero() {
    let tmp = TempDir::new().unwrap();
    assert_eq!(code(&vqspec(&["solve"], tmp.path())), 1);
    assert_eq!(code(&vqspec(&["frobnicate"], tmp.path())), 1);
    assert_eq!(code(&vqspec(&["--help"], tmp.path())), 0);
    assert_eq!(code(&vqspec(&["--version"], tmp.path())), 0);
}

#[test]
fn diag_prints_grouped_levels() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "z0.ham", Z0);
    let o = vqspec(&["diag", "--pauli", "z0.ham"], tmp.path());
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), "-1 (x1)\n+1 (x1)\n");

    write(tmp.path(), "one.cnf", "p cnf 3 1\n1 2 3 0\n");
    let o = vqspec(&["diag", "--cnf", "one.cnf"], tmp.path());
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), "0 (x7)\n1 (x1)\n");
}

#[test]
fn diag_matches_the_solve_oracle() {
    let tmp = TempDir::new().unwrap();
    assert_eq!(
        code(&vqspec(
            &["gen3sat", "4", "18", "1", "--out", "s.cnf"],
            tmp.path()
        )),
        0
    );
    let diag = stdout(&vqspec(&["diag", "--cnf", "s.cnf"], tmp.path()));
    let o = vqspec(&["solve", "--cnf", "s.cnf", "--out", "out"], tmp.path());
    assert_eq!(code(&o), 0);
    let text = fs::read_to_string(tmp.path().join("out/report.txt")).unwrap();
    let block: String = text
        .split("exact levels:\n")
        .nth(1)
        .unwrap()
        .lines()
        .map(|l| format!("{}\n", l.trim_start()))
        .collect();
    assert_eq!(block, diag);
    assert!(diag.starts_with("0 (x1)\n"), "{diag}");
}

#[test]
fn diag_refuses_oversized_registers() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "big.ham", "qubits 13\n1.0 Z0\n");
    let o = vqspec(&["diag", "--pauli", "big.ham"], tmp.path());
    assert_eq!(code(&o), 3);
}

#[test]
fn gen3sat_is_deterministic_with_a_unique_solution() {
    let tmp = TempDir::new().unwrap();
    let a = vqspec(&["gen3sat", "4", "18", "1"], tmp.path());
    let b = vqspec(&["gen3sat", "4", "18", "1"], tmp.path());
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    write(tmp.path(), "g.cnf", &stdout(&a));
    let diag = stdout(&vqspec(&["diag", "--cnf", "g.cnf"], tmp.path()));
    assert!(diag.starts_with("0 (x1)\n"), "{diag}");
}

#[test]
fn gen3sat_budget_exhaustion_exits_four() {
    let tmp = TempDir::new().unwrap();
    let o = vqspec(&["gen3sat", "6", "2", "0"], tmp.path());
    assert_eq!(code(&o), 4);
    assert!(stderr(&o).contains("more clauses"));
}

#[test]
fn verify_passes_and_catches_a_sign_flip() {
    let tmp = TempDir::new().unwrap();
    let o = vqspec(&["verify"], tmp.path());
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(!stdout(&o).contains("FAIL"));

    let o = vqspec(&["verify", "--inject-v-sign-flip"], tmp.path());
    assert_eq!(code(&o), 5);
    assert!(stdout(&o).contains("FAIL  monotonic energy decay"));
}

#[test]
fn compare_writes_residual_distributions() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "h.ham", "qubits 2\n1.0 Z0 Z1\n0.7 X0\n0.7 X1\n");
    let o = vqspec(
        &[
            "compare",
            "--pauli",
            "h.ham",
            "--seeds",
            "3",
            "--params-per-qubit",
            "4",
            "--out",
            "out",
        ],
        tmp.path(),
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v: Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("out/compare.json")).unwrap())
            .unwrap();
    assert_eq!(v["imaginary_residuals"].as_array().unwrap().len(), 3);
    assert_eq!(v["gradient_residuals"].as_array().unwrap().len(), 3);
    assert!(stdout(&o).contains("median residual"));
}
