//! End-to-end checks of the command-line surface: subcommands compose
//! through CSV files on disk, the pipeline runs from a config file, and
//! bad inputs fail with a nonzero exit and a readable message.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_landscape-lab"))
}

fn run_ok(cmd: &mut Command) -> Output {
    let out = cmd.output().expect("binary should launch");
    assert!(
        out.status.success(),
        "expected success, got {:?}\nstdout: {}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn run_err(cmd: &mut Command) -> Output {
    let out = cmd.output().expect("binary should launch");
    assert!(
        !out.status.success(),
        "expected failure, got success\nstdout: {}",
        String::from_utf8_lossy(&out.stdout)
    );
    out
}

fn csv_lines(path: &Path) -> Vec<String> {
    let text =
        std::fs::read_to_string(path).unwrap_or_else(|e| panic!("reading {}: {e}", path.display()));
    text.lines().map(str::to_owned).collect()
}

#[test]
fn subcommands_compose_through_csv_files() {
    let dir = tempfile::tempdir().unwrap();
    let potential = dir.path().join("potential.csv");
    run_ok(
        bin()
            .args([
                "gen-potential",
                "--n",
                "400",
                "--intervals",
                "8",
                "--vmax",
                "5e3",
            ])
            .args(["--seed", "3", "--out"])
            .arg(&potential),
    );
    let rows = csv_lines(&potential);
    assert_eq!(rows[0], "node,x,value");
    assert_eq!(rows.len(), 401);

    let eigen = dir.path().join("eigen.csv");
    run_ok(
        bin()
            .arg("eigen")
            .arg("--potential")
            .arg(&potential)
            .args(["--k", "3", "--out"])
            .arg(&eigen),
    );
    let rows = csv_lines(&eigen);
    assert_eq!(rows.len(), 4, "one summary row per eigenpair");
    assert!(rows[0].starts_with("index,lambda"));
    let vectors = dir.path().join("eigen.vectors.csv");
    assert_eq!(csv_lines(&vectors).len(), 401);

    let landscape = dir.path().join("landscape.csv");
    run_ok(
        bin()
            .arg("landscape")
            .arg("--potential")
            .arg(&potential)
            .args(["--rhs", "constant:1", "--out"])
            .arg(&landscape),
    );
    assert_eq!(csv_lines(&landscape).len(), 401);

    let predictions = dir.path().join("predictions.csv");
    let out = run_ok(
        bin()
            .arg("predict")
            .arg("--potential")
            .arg(&potential)
            .args(["--k", "3", "--t", "1e-4", "--out"])
            .arg(&predictions),
    );
    assert_eq!(csv_lines(&predictions).len(), 4);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(
        stdout.contains("tolerance"),
        "predict should report its match tolerance: {stdout}"
    );
}

#[test]
fn pipeline_runs_from_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("artifacts");
    let config = dir.path().join("exp.conf");
    std::fs::write(
        &config,
        format!(
            "# small smoke configuration\n\
             seed = 11\n\
             n = 300\n\
             intervals = 6\n\
             vmax = 2e3\n\
             t = 1e-3\n\
             k = 2\n\
             rhs = modulated\n\
             mc_paths = 4000\n\
             mc_substeps = 8\n\
             out = {}\n",
            out_dir.display()
        ),
    )
    .unwrap();

    let out = run_ok(bin().arg("run").arg("--config").arg(&config));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(
        stdout.contains("eigen_identity"),
        "gate summary missing: {stdout}"
    );

    for name in [
        "potential.csv",
        "regularized.csv",
        "eigenvalues.csv",
        "landscape.csv",
        "generalized.csv",
        "feynman_kac.csv",
        "agmon.csv",
        "predictions.csv",
        "manifest.txt",
        "report.html",
    ] {
        assert!(
            out_dir.join(name).exists(),
            "{name} missing from artifact directory"
        );
    }
    assert!(!out_dir.join("FAILED").exists());

    let manifest = std::fs::read_to_string(out_dir.join("manifest.txt")).unwrap();
    assert!(manifest.contains("# gates"));
    assert!(
        !manifest.contains("FAIL ("),
        "manifest reports a failed gate:\n{manifest}"
    );
}

#[test]
fn invalid_config_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.conf");
    std::fs::write(&config, "n = 2\n").unwrap();
    let out = run_err(bin().arg("run").arg("--config").arg(&config));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(
        stderr.contains("error:"),
        "stderr should explain the rejection: {stderr}"
    );
    assert!(
        stderr.contains("at least 3"),
        "message should state the bound: {stderr}"
    );
}

#[test]
fn missing_potential_file_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_err(
        bin()
            .arg("eigen")
            .arg("--potential")
            .arg(dir.path().join("nowhere.csv"))
            .arg("--out")
            .arg(dir.path().join("eigen.csv")),
    );
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("missing input"), "stderr: {stderr}");
}

#[test]
fn thread_count_does_not_change_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let potential = dir.path().join("potential.csv");
    run_ok(
        bin()
            .args([
                "gen-potential",
                "--n",
                "300",
                "--intervals",
                "6",
                "--vmax",
                "1e3",
            ])
            .args(["--seed", "9", "--out"])
            .arg(&potential),
    );

    let mut outputs = Vec::new();
    for threads in ["1", "3"] {
        let residuals = dir.path().join(format!("residuals_{threads}.csv"));
        run_ok(
            bin()
                .args(["--threads", threads, "residuals"])
                .arg("--potential")
                .arg(&potential)
                .args(["--sweep", "1e-5..1e-3", "--points", "5", "--out"])
                .arg(&residuals),
        );
        outputs.push(std::fs::read(&residuals).unwrap());
    }
    assert_eq!(
        outputs[0], outputs[1],
        "residual sweep must not depend on the thread count"
    );
}
