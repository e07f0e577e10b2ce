use std::path::Path;
use std::process::{Command, Output};

use sdelab_cli::{load, ExperimentKind, Overrides};

fn sdelab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sdelab")).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn validate_succeeds_and_echoes_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", "seed = 4\n[model]\npreset = \"cir-scenario-1\"\nkappa = 4.0\n");
    let out = dir.path().to_str().unwrap();
    let o = sdelab(&["validate", "--config", &cfg, "--out", out]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("validate.csv")).unwrap();
    assert!(csv.contains("kappa: 4.0"));
    assert!(csv.contains("#   kappa = 4.0"));
    assert!(csv.contains("# seed = 4"));
    // 2κλ/θ² with κ = 4
    assert!(csv.contains(&format!("feller_ratio,{:.6}", 2.0 * 4.0 * 0.0457 / (0.48f64 * 0.48))));
}

#[test]
fn misspelled_key_names_its_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", "seed = 4\n[model]\npreset = \"cir-scenario-1\"\nkapa = 4.0\n");
    let o = sdelab(&["validate", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("line 4") && err.contains("kapa"), "{err}");
    assert!(!dir.path().join("validate.csv").exists());
}

#[test]
fn seed_is_required_and_cli_seed_wins() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = sdelab(&["validate", "--out", out]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("seed"));

    let cfg = write(dir.path(), "c.toml", "seed = 4\n");
    let o = sdelab(&["validate", "--config", &cfg, "--seed", "9", "--out", out]);
    assert_eq!(o.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("validate.csv")).unwrap();
    assert!(csv.contains("# seed = 9"));
}

#[test]
fn failed_fourier_self_check_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", "seed = 1\n[fourier]\nstability_tol = 1e-15\n");
    let o = sdelab(&["price", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("self-check"));
}

#[test]
fn thread_count_does_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", "seed = 3\n[grid]\nn = 64\nsamples = 3000\n");
    let mut outputs = Vec::new();
    for threads in ["1", "4"] {
        let out = dir.path().join(threads);
        std::fs::create_dir(&out).unwrap();
        let o = sdelab(&["negstats", "--config", &cfg, "--threads", threads, "--out", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        outputs.push(std::fs::read(out.join("negstats.csv")).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);

    let o = sdelab(&["negstats", "--config", &cfg, "--threads", "0", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn defaults_print_a_loadable_config() {
    for kind in ExperimentKind::ALL {
        let o = sdelab(&["defaults", kind.as_str()]);
        assert_eq!(o.status.code(), Some(0));
        let text = String::from_utf8(o.stdout).unwrap();
        let plan = load(kind, Some(&text), &Overrides { seed: Some(1), out: None }).unwrap();
        assert_eq!(plan.kind, kind);
    }
    assert_eq!(sdelab(&["defaults", "everything"]).status.code(), Some(2));
}

#[test]
fn semantic_errors_are_located() {
    let text = "seed = 1\n[grid]\nsteps = [16, 8]\nreference_steps = 64\n";
    let msg = load(ExperimentKind::Converge, Some(text), &Overrides::default()).err().unwrap().to_string();
    assert!(msg.contains("line 3"), "{msg}");

    let text = "seed = 1\n[model]\npreset = \"cir-scenario-1\"\nsigma = 0.3\n";
    let msg = load(ExperimentKind::Validate, Some(text), &Overrides::default()).err().unwrap().to_string();
    assert!(msg.contains("line 4"), "{msg}");
}
