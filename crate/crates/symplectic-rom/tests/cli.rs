//! CLI surface tests: subcommands, exit codes, output files, determinism.

use std::fs;
use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_symplectic-rom"))
}

const TINY_CONFIG: &str = r#"
seed = 7

[model]
kind = "sine_gordon"

[grid]
n = 64
length = 50.0

[physics]
v = 0.2
x0 = 10.0
boundary = "dirichlet"

[integration]
scheme = "implicit_midpoint"
dt = 0.05
t_final = 5.0

[snapshots]
stride = 10
gamma = 1.0

[reduction]
methods = ["pod", "deim", "sdeim"]
k = [4, 8]

[outputs]
directory = "unused"
"#;

fn write_config(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("config.toml");
    fs::write(&path, TINY_CONFIG).unwrap();
    path
}

#[test]
fn simulate_writes_trajectory_and_snapshots() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path());
    let out = dir.path().join("out");
    let status = bin()
        .args(["simulate", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    assert!(out.join("trajectory.csv").exists());
    assert!(out.join("snapshots.csv").exists());
    assert!(out.join("snapshots_nonlinear.csv").exists());
    assert!(out.join("manifest.toml").exists());

    let header = fs::read_to_string(out.join("trajectory.csv")).unwrap();
    assert!(header.starts_with("t,q1,"));
}

#[test]
fn reduce_writes_bases_spectra_and_indices() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path());
    let out = dir.path().join("out");
    let status = bin()
        .args(["reduce", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    for f in [
        "basis_pod_k4.csv",
        "basis_deim_k8.csv",
        "basis_sdeim_k4.csv",
        "indices_sdeim_k4.csv",
        "spectrum_pod.csv",
        "spectrum_sdeim.csv",
        "manifest.toml",
    ] {
        assert!(out.join(f).exists(), "missing {f}");
    }
    // The persisted basis round-trips and is orthonormal-symplectic.
    let basis = symplectic_rom::io::read_matrix(&out.join("basis_sdeim_k4.csv")).unwrap();
    assert_eq!(basis.nrows(), 128);
    assert_eq!(basis.ncols(), 8);
    assert!(symplectic_rom::symplectic::SymplecticBasis::validate(basis, 1e-10).is_ok());
    // Indices are 1-based and in range.
    let text = fs::read_to_string(out.join("indices_sdeim_k4.csv")).unwrap();
    for line in text.lines() {
        let v: usize = line.parse().unwrap();
        assert!(v >= 1 && v <= 128);
    }
}

#[test]
fn corrupted_basis_file_fails_symplecticity_with_residual() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path());
    let out = dir.path().join("out");
    assert!(bin()
        .args(["reduce", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap()
        .success());
    let path = out.join("basis_sdeim_k4.csv");
    let mut text = fs::read_to_string(&path).unwrap();
    text = text.replacen("\n", "\n0.5,", 1); // prepend a bogus entry to the first column
                                             // Corrupt one value instead: swap the first data char.
    let fixed = {
        let mut lines: Vec<String> = fs::read_to_string(&path)
            .unwrap()
            .lines()
            .map(String::from)
            .collect();
        let first_data = lines[1].clone();
        let mut cells: Vec<String> = first_data.split(',').map(String::from).collect();
        cells[0] = "9.9".into();
        lines[1] = cells.join(",");
        lines.join("\n")
    };
    let _ = text;
    fs::write(&path, fixed).unwrap();
    let basis = symplectic_rom::io::read_matrix(&path).unwrap();
    match symplectic_rom::symplectic::SymplecticBasis::validate(basis, 1e-10) {
        Err(symplectic_rom::Error::NotSymplectic { residual, .. }) => assert!(residual > 1e-8),
        other => panic!("expected symplecticity failure, got {other:?}"),
    }
}

#[test]
fn run_emits_reports_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path());
    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");
    for out in [&out_a, &out_b] {
        let status = bin()
            .args(["run", "--config"])
            .arg(&config)
            .arg("--out")
            .arg(out)
            .arg("--emit-svg")
            .status()
            .unwrap();
        assert!(status.success());
        for f in [
            "diagnostics.csv",
            "summary.csv",
            "runtimes.csv",
            "manifest.toml",
            "error_vs_time.svg",
            "energy_vs_time.svg",
            "total_error_vs_k.svg",
            "runtime_vs_k.svg",
        ] {
            assert!(out.join(f).exists(), "missing {f}");
        }
    }
    // Byte-identical CSVs across reruns, runtimes.csv excluded (wall clock).
    for f in [
        "diagnostics.csv",
        "summary.csv",
        "spectrum_pod.csv",
        "manifest.toml",
    ] {
        let a = fs::read(out_a.join(f)).unwrap();
        let b = fs::read(out_b.join(f)).unwrap();
        assert_eq!(a, b, "{f} differs between identical runs");
    }
    // Summary includes the full-model row plus one row per (method, k).
    let summary = fs::read_to_string(out_a.join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 1 + 1 + 6);
    // POD rows carry spectral columns; sdeim rows leave them empty.
    let pod_line = summary.lines().find(|l| l.starts_with("pod,4")).unwrap();
    assert!(!pod_line.ends_with(",,,"));
}

#[test]
fn empty_method_list_yields_empty_summary() {
    let dir = tempfile::tempdir().unwrap();
    let text = TINY_CONFIG.replace("methods = [\"pod\", \"deim\", \"sdeim\"]", "methods = []");
    let config = dir.path().join("config.toml");
    fs::write(&config, text).unwrap();
    let out = dir.path().join("out");
    let status = bin()
        .args(["run", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let summary = fs::read_to_string(out.join("summary.csv")).unwrap();
    // Header plus the full-model row only (sine-Gordon has an analytic reference).
    assert_eq!(summary.lines().count(), 2);
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    // Unknown key.
    let config = dir.path().join("bad.toml");
    fs::write(
        &config,
        TINY_CONFIG.replace("stride = 10", "stride = 10\nstrid = 2"),
    )
    .unwrap();
    let status = bin()
        .args(["run", "--config"])
        .arg(&config)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
    // Custom model kind is rejected by the CLI.
    let config2 = dir.path().join("custom.toml");
    fs::write(
        &config2,
        TINY_CONFIG.replace("kind = \"sine_gordon\"", "kind = \"custom\""),
    )
    .unwrap();
    let status = bin()
        .args(["simulate", "--config"])
        .arg(&config2)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
    // Missing file.
    let status = bin()
        .args(["run", "--config", "/nonexistent.toml"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn verify_passes_and_prints_property_lines() {
    let output = bin().args(["verify", "--seed", "3"]).output().unwrap();
    assert!(output.status.success());
    let stdout = String::from_utf8(output.stdout).unwrap();
    assert!(stdout.contains("lemma_symplectic_inverse_identities"));
    assert!(stdout.contains("deim_exactness"));
    assert!(stdout.lines().filter(|l| l.starts_with("PASS")).count() >= 10);
}
