use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn qgan(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qgan"))
        .args(args)
        .current_dir(cwd)
        .env_remove("QGAN_OUT_ROOT")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str], cwd: &Path) -> Output {
    let out = qgan(args, cwd);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn read(path: impl AsRef<Path>) -> String {
    std::fs::read_to_string(path.as_ref()).unwrap_or_else(|e| panic!("{}: {e}", path.as_ref().display()))
}

fn data_rows(csv: &str) -> usize {
    csv.lines().filter(|l| !l.starts_with('#')).count() - 1
}

#[test]
fn bell_training_writes_reproducible_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let cwd = dir.path();
    let args = [
        "train", "--qubits", "2", "--target", "bell", "--ratio", "5", "--epochs", "100", "--seed", "7", "--svg",
    ];
    ok(&[&args[..], &["--out", "a"]].concat(), cwd);
    ok(&[&args[..], &["--out", "b"]].concat(), cwd);
    let epochs = read(cwd.join("a/epochs.csv"));
    assert!(epochs.starts_with("# qgan epochs.csv v1\nepoch,gen_loss,disc_loss,kl_nats\n"));
    assert_eq!(data_rows(&epochs), 100);
    assert_eq!(epochs, read(cwd.join("b/epochs.csv")));

    let run: Value = serde_json::from_str(&read(cwd.join("a/run.json"))).unwrap();
    assert_eq!(run["config"]["ratio"], "5");
    assert_eq!(run["seed_mix"], "splitmix64-chain-v1");
    let params: Value = serde_json::from_str(&read(cwd.join("a/final_params.json"))).unwrap();
    assert_eq!(params["generator"].as_array().unwrap().len(), 12);
    assert_eq!(params["discriminator"].as_array().unwrap().len(), 12);
    assert_eq!(read(cwd.join("a/training.svg")).matches("<polyline").count(), 3);

    ok(&["train", "--config", "a/run.json", "--out", "replay"], cwd);
    assert_eq!(epochs, read(cwd.join("replay/epochs.csv")));
}

#[test]
fn three_qubit_run_has_full_history() {
    let dir = tempfile::tempdir().unwrap();
    ok(
        &[
            "train", "--qubits", "3", "--ratio", "25", "--epochs", "350", "--seed", "1", "--out", "q3",
        ],
        dir.path(),
    );
    assert_eq!(data_rows(&read(dir.path().join("q3/epochs.csv"))), 350);
}

#[test]
fn ratios_stay_exact_in_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let cwd = dir.path();
    ok(
        &[
            "sweep",
            "--qubits",
            "1",
            "--trials",
            "2",
            "--ratios",
            "1/8,1:4,3/2",
            "--epochs",
            "3",
            "--out",
            "s",
        ],
        cwd,
    );
    for file in [
        "sweep.csv",
        "aggregates.csv",
        "trials.csv",
        "best_settings.json",
        "sweep.json",
    ] {
        let text = read(cwd.join("s").join(file));
        assert!(!text.contains("0.125"), "{file}");
    }
    let sweep: Value = serde_json::from_str(&read(cwd.join("s/sweep.json"))).unwrap();
    assert_eq!(sweep["config"]["ratios"], serde_json::json!(["1/8", "1/4", "3/2"]));
    assert!(read(cwd.join("s/aggregates.csv")).contains("\n1/8,1,"));
    let sweep_csv = read(cwd.join("s/sweep.csv"));
    assert!(sweep_csv.contains("\nratio_num,ratio_den,trial,epoch,gen_loss,disc_loss,kl_nats\n1,8,0,1,"));
}

#[test]
fn sweeps_are_identical_across_job_counts_and_resume() {
    let dir = tempfile::tempdir().unwrap();
    let cwd = dir.path();
    let base = [
        "sweep", "--qubits", "2", "--trials", "3", "--ratios", "1/2,2", "--epochs", "6", "--seed", "5",
    ];
    ok(&[&base[..], &["--out", "one", "--jobs", "1"]].concat(), cwd);
    ok(&[&base[..], &["--out", "many", "--jobs", "4"]].concat(), cwd);
    let files = [
        "sweep.csv",
        "aggregates.csv",
        "trials.csv",
        "best_settings.json",
        "sweep.json",
    ];
    for f in files {
        assert_eq!(read(cwd.join("one").join(f)), read(cwd.join("many").join(f)), "{f}");
    }

    let store = cwd.join("one/trials");
    let mut stored: Vec<_> = std::fs::read_dir(&store).unwrap().map(|e| e.unwrap().path()).collect();
    stored.sort();
    assert_eq!(stored.len(), 6);
    for p in &stored[..2] {
        std::fs::remove_file(p).unwrap();
    }
    for f in files {
        std::fs::remove_file(cwd.join("one").join(f)).unwrap();
    }
    let out = ok(&[&base[..], &["--out", "one", "--jobs", "2"]].concat(), cwd);
    assert!(String::from_utf8_lossy(&out.stderr).contains("2 runs trained, 4 reused"));
    for f in files {
        assert_eq!(read(cwd.join("one").join(f)), read(cwd.join("many").join(f)), "{f}");
    }
}

fn best_settings(n: usize, epochs: u64, avg_ratio: &str, best_ratio: &str) -> String {
    serde_json::json!({
        "n_qubits": n,
        "trials": 25,
        "average": { "ratio": avg_ratio, "epochs": epochs, "kl": 0.01 },
        "best": { "ratio": best_ratio, "epochs": epochs, "kl": 1e-9 },
    })
    .to_string()
}

#[test]
fn fit_recovers_an_exact_power_law() {
    let dir = tempfile::tempdir().unwrap();
    let cwd = dir.path();
    // epochs = 3·n², average ratio = 2·n², best ratio = n³
    for n in 1..=4u64 {
        let text = best_settings(
            n as usize,
            3 * n * n,
            &(2 * n * n).to_string(),
            &(n * n * n).to_string(),
        );
        std::fs::write(cwd.join(format!("b{n}.json")), text).unwrap();
    }
    let out = ok(
        &[
            "fit",
            "--inputs",
            "b1.json",
            "b3.json",
            "b2.json",
            "--holdout",
            "b4.json",
            "--out",
            "f",
        ],
        cwd,
    );
    assert!(String::from_utf8_lossy(&out.stdout).contains("verdict best_ratio: power (polynomial)"));
    let fits: Value = serde_json::from_str(&read(cwd.join("f/fits.json"))).unwrap();
    let expected = [
        ("epochs", 3.0, 2.0),
        ("average_ratio", 2.0, 2.0),
        ("best_ratio", 1.0, 3.0),
    ];
    for (fit, (name, a, b)) in fits["fits"].as_array().unwrap().iter().zip(expected) {
        assert_eq!(fit["quantity"], name);
        let power = fit["models"]
            .as_array()
            .unwrap()
            .iter()
            .find(|m| m["family"] == "power")
            .unwrap();
        assert!((power["a"].as_f64().unwrap() - a).abs() < 1e-9);
        assert!((power["b"].as_f64().unwrap() - b).abs() < 1e-9);
        assert_eq!(fit["selection"]["selected"], "power");
    }
    let verdict: Value = serde_json::from_str(&read(cwd.join("f/verdict.json"))).unwrap();
    assert_eq!(verdict["verdicts"].as_array().unwrap().len(), 3);
    assert_eq!(verdict["verdicts"][0]["holdout_errors"].as_array().unwrap().len(), 3);

    ok(&["report", "f"], cwd);
    assert!(read(cwd.join("f/report.md")).contains("| best_ratio | power |"));
}

#[test]
fn fit_rejects_insufficient_or_overlapping_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let cwd = dir.path();
    std::fs::write(cwd.join("b1.json"), best_settings(1, 10, "1", "1")).unwrap();
    std::fs::write(cwd.join("b2.json"), best_settings(2, 20, "2", "2")).unwrap();
    assert_eq!(qgan(&["fit", "--inputs", "b1.json"], cwd).status.code(), Some(1));
    assert_eq!(
        qgan(&["fit", "--inputs", "b1.json", "b1.json"], cwd).status.code(),
        Some(1)
    );
    assert_eq!(
        qgan(&["fit", "--inputs", "b1.json", "b2.json", "--holdout", "b2.json"], cwd)
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        qgan(&["fit", "--inputs", "b1.json", "missing.json"], cwd).status.code(),
        Some(1)
    );
}

#[test]
fn reports_cover_runs_and_sweeps() {
    let dir = tempfile::tempdir().unwrap();
    let cwd = dir.path();
    ok(&["train", "--qubits", "1", "--epochs", "20", "--out", "run"], cwd);
    ok(&["report", "run"], cwd);
    let svg = read(cwd.join("run/training.svg"));
    assert!(svg.contains(">Losses<") && svg.contains(">KL divergence<"));
    assert!(read(cwd.join("run/report.md")).contains("## Training run"));

    ok(
        &[
            "sweep", "--qubits", "1", "--trials", "2", "--ratios", "1/8,5", "--epochs", "10", "--out", "sw",
        ],
        cwd,
    );
    ok(&["report", "sw", "--out", "rep"], cwd);
    let svg = read(cwd.join("rep/sweep_kl.svg"));
    assert!(svg.contains(">ratio 1/8<") && svg.contains(">ratio 5<"));
    assert_eq!(svg.matches("<polyline").count(), 4);
    assert!(read(cwd.join("rep/report.md")).contains("| 1/8 |"));

    std::fs::create_dir(cwd.join("empty")).unwrap();
    assert_eq!(qgan(&["report", "empty"], cwd).status.code(), Some(1));
    assert_eq!(qgan(&["report", "nowhere"], cwd).status.code(), Some(1));
}

#[test]
fn exit_codes_separate_usage_from_runtime_failures() {
    let dir = tempfile::tempdir().unwrap();
    let cwd = dir.path();
    assert_eq!(qgan(&["train", "--qubits", "x"], cwd).status.code(), Some(1));
    assert_eq!(qgan(&["train", "--qubits", "9"], cwd).status.code(), Some(1));
    assert_eq!(
        qgan(&["train", "--qubits", "1", "--target", "nope.json"], cwd)
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        qgan(&["train", "--qubits", "1", "--lr", "-1"], cwd).status.code(),
        Some(1)
    );
    assert_eq!(qgan(&["sweep"], cwd).status.code(), Some(1));
    std::fs::write(cwd.join("blocker"), "").unwrap();
    let out = qgan(
        &["train", "--qubits", "1", "--epochs", "2", "--out", "blocker/run"],
        cwd,
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
    assert_eq!(qgan(&["--version"], cwd).status.code(), Some(0));
}

#[test]
fn default_output_root_comes_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_qgan"))
        .args(["train", "--qubits", "1", "--epochs", "3", "--seed", "4"])
        .current_dir(dir.path())
        .env("QGAN_OUT_ROOT", dir.path().join("root"))
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(dir.path().join("root/train-q1-s4/epochs.csv").exists());
}

#[test]
fn config_files_fill_in_missing_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cwd = dir.path();
    std::fs::write(
        cwd.join("sweep.cfg"),
        "qubits = 1\ntrials = 2\nratios = 1/8, 2\nepochs = 4\nseed = 9\nout = from-file\n",
    )
    .unwrap();
    ok(&["sweep", "--config", "sweep.cfg", "--jobs", "1"], cwd);
    ok(
        &["sweep", "--config", "sweep.cfg", "--epochs", "5", "--out", "flagged"],
        cwd,
    );
    assert_eq!(data_rows(&read(cwd.join("from-file/aggregates.csv"))), 8);
    assert_eq!(data_rows(&read(cwd.join("flagged/aggregates.csv"))), 10);
    ok(&["sweep", "--config", "from-file/sweep.json", "--out", "replayed"], cwd);
    assert_eq!(
        read(cwd.join("from-file/sweep.csv")),
        read(cwd.join("replayed/sweep.csv"))
    );
}
