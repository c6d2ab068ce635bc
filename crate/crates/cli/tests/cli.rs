use std::path::Path;
use std::process::{Command, Output};

fn kapila(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kapila"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

#[test]
fn run_writes_snapshots_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let o = kapila(
        &[
            "run",
            "--case",
            "3",
            "--cells",
            "40",
            "--snapshots",
            "1e-4,2e-4",
            "--output",
            "out",
        ],
        dir.path(),
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let out = dir.path().join("out");
    let snap = std::fs::read_to_string(out.join("snapshot_001.csv")).unwrap();
    assert!(snap.starts_with("# case: two-phase-water-air\n# time: 2e-4\n# grid: 40 1\n"));
    assert_eq!(snap.lines().filter(|l| !l.starts_with('#')).count(), 41);
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["status"], "ok");
    assert_eq!(manifest["grid"]["nx"], 40);
    assert_eq!(manifest["snapshots"].as_array().unwrap().len(), 2);
}

#[test]
fn config_file_with_overrides() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("run.cfg"),
        "case = 3\ncells = 400\nend_time = 5e-5\nformat = tsv\n",
    )
    .unwrap();
    let o = kapila(
        &[
            "run", "--config", "run.cfg", "--set", "cells=32", "--output", "o",
        ],
        dir.path(),
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let snap = std::fs::read_to_string(dir.path().join("o/snapshot_000.tsv")).unwrap();
    assert!(snap.contains("# grid: 32 1") && snap.contains("x\tzeta1\trho"));
}

#[test]
fn output_is_identical_across_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    for (w, name) in [("1", "a"), ("2", "b")] {
        let o = kapila(
            &[
                "run",
                "--case",
                "2a",
                "--cells",
                "50",
                "--workers",
                w,
                "--output",
                name,
            ],
            dir.path(),
        );
        assert_eq!(code(&o), 0);
    }
    let read = |d: &str| std::fs::read(dir.path().join(d).join("snapshot_000.csv")).unwrap();
    assert_eq!(read("a"), read("b"));
}

#[test]
fn configuration_errors_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        vec!["run", "--case", "9"],
        vec!["run", "--case", "3", "--cfl", "1.5"],
        vec!["run", "--case", "3", "--set", "nonsense=1"],
        vec!["run", "--config", "missing.cfg"],
        vec!["run", "--case", "3", "--snapshots", "1"],
        vec!["frobnicate"],
    ] {
        let o = kapila(&args, dir.path());
        assert_eq!(code(&o), 2, "{args:?}");
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn solver_failure_exits_with_1_and_dumps_state() {
    let dir = tempfile::tempdir().unwrap();
    // Far above the stable CFL range the strong shock tube breaks down.
    let o = kapila(
        &["run", "--case", "2", "--cfl", "0.95", "--output", "f"],
        dir.path(),
    );
    assert_eq!(code(&o), 1, "{}", String::from_utf8_lossy(&o.stdout));
    assert!(String::from_utf8_lossy(&o.stderr).contains("solver failed"));
    assert!(dir.path().join("f/failure.csv").exists());
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("f/manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["status"], "failed");
    assert!(manifest["error"].as_str().unwrap().contains("interface"));
}

#[test]
fn riemann_profile_to_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "riemann",
        "--left",
        "1,1,1,0,1",
        "--right",
        "1,0.125,1,0,0.1",
        "--phase1",
        "1.4,0",
        "--phase2",
        "1.4,0",
        "--time",
        "0.2",
        "--cells",
        "100",
    ];
    let o = kapila(&args, dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    let rows: Vec<Vec<f64>> = text
        .lines()
        .skip_while(|l| l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 100);
    // Sod star pressure and velocity in the plateau between the rarefaction tail and the shock.
    let star = rows.iter().find(|r| (r[0] - 0.6).abs() < 6e-3).unwrap();
    assert!(
        (star[4] - 0.30313).abs() < 1e-4 && (star[3] - 0.92745).abs() < 1e-4,
        "{star:?}"
    );
}

#[test]
fn run_aliases_for_riemann_and_convergence() {
    let dir = tempfile::tempdir().unwrap();
    let o = kapila(
        &[
            "run",
            "--riemann",
            "--case",
            "4",
            "--time",
            "1e-3",
            "--cells",
            "20",
        ],
        dir.path(),
    );
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stdout).contains("# case: cavitation"));
    let o = kapila(
        &["run", "--case", "1", "--convergence", "20,40"],
        dir.path(),
    );
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert!(text.lines().nth(2).unwrap().starts_with("40,"));
}

#[test]
fn compare_reports_pass_fail_and_shape_errors() {
    let dir = tempfile::tempdir().unwrap();
    for (cells, out) in [("40", "a.csv"), ("80", "b.csv")] {
        let o = kapila(
            &[
                "riemann", "--case", "3", "--time", "2e-4", "--cells", cells, "--output", out,
            ],
            dir.path(),
        );
        assert_eq!(code(&o), 0);
    }
    let a = std::fs::read_to_string(dir.path().join("a.csv")).unwrap();
    // Perturb every pressure by one part in 1e9.
    let perturbed: String = a
        .lines()
        .map(|l| {
            if l.starts_with('#') || l.starts_with('x') {
                return format!("{l}\n");
            }
            let mut f: Vec<String> = l.split(',').map(String::from).collect();
            let p: f64 = f[4].parse().unwrap();
            f[4] = format!("{:e}", p * (1.0 + 1e-9));
            f.join(",") + "\n"
        })
        .collect();
    std::fs::write(dir.path().join("p.csv"), perturbed).unwrap();

    let same = kapila(&["compare", "a.csv", "a.csv"], dir.path());
    assert_eq!(code(&same), 0);
    assert!(String::from_utf8_lossy(&same.stdout).contains("PASS"));
    assert_eq!(
        code(&kapila(
            &["compare", "p.csv", "a.csv", "--rel", "1e-6"],
            dir.path()
        )),
        0
    );
    assert_eq!(
        code(&kapila(
            &["compare", "p.csv", "a.csv", "--rel", "1e-12"],
            dir.path()
        )),
        1
    );
    let shape = kapila(&["compare", "b.csv", "a.csv"], dir.path());
    assert_eq!(code(&shape), 2);
    assert!(String::from_utf8_lossy(&shape.stderr).contains("shape mismatch"));
}
