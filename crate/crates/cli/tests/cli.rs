use std::path::Path;
use std::process::{Command, Output};

fn closek(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_closek"))
        .args(args)
        .current_dir(dir)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

const SMALL_RUN: &str = "split_count = 3\nlambdas = 0.001, 0.1\nepochs = 60\n";

#[test]
fn generate_writes_expected_rows_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let o = closek(
        dir.path(),
        &[
            "generate", "example2", "--n", "1000", "--seed", "7", "--out", "ex2.csv",
        ],
    );
    assert_eq!(code(&o), 0, "{o:?}");
    assert!(stdout(&o).contains("n=2000 d=1 positives=1000 negatives=1000"));
    let first = std::fs::read(dir.path().join("ex2.csv")).unwrap();
    assert_eq!(String::from_utf8_lossy(&first).lines().count(), 2001);

    closek(
        dir.path(),
        &[
            "generate",
            "example2",
            "--n",
            "1000",
            "--seed",
            "7",
            "--out",
            "again.csv",
        ],
    );
    assert_eq!(std::fs::read(dir.path().join("again.csv")).unwrap(), first);

    let o = closek(
        dir.path(),
        &[
            "generate",
            "figure1",
            "--scenario",
            "ambiguous",
            "--n",
            "200",
            "--out",
            "amb.csv",
        ],
    );
    assert_eq!(code(&o), 0);
    let text = std::fs::read_to_string(dir.path().join("amb.csv")).unwrap();
    assert_eq!(text.lines().next().unwrap(), "x0,x1,target");

    let o = closek(
        dir.path(),
        &[
            "generate",
            "figure1",
            "--scenario",
            "spiral",
            "--out",
            "x.csv",
        ],
    );
    assert_eq!(code(&o), 2);
    let o = closek(
        dir.path(),
        &[
            "generate",
            "example1",
            "--n",
            "50",
            "--magnitude",
            "10",
            "--out",
            "x.csv",
        ],
    );
    assert_eq!(code(&o), 2);
}

#[test]
fn train_reaches_the_example1_optimum() {
    let dir = tempfile::tempdir().unwrap();
    closek(dir.path(), &["generate", "example1", "--out", "ex1.csv"]);
    let o = closek(
        dir.path(),
        &[
            "train",
            "ex1.csv",
            "--method",
            "close_decay",
            "--k-star",
            "1",
        ],
    );
    assert_eq!(code(&o), 0, "{o:?}");
    assert!(
        stdout(&o).contains("train 0-1 loss: 2 of 102"),
        "{}",
        stdout(&o)
    );
    assert!(dir.path().join("model.json").exists());
    let trace = std::fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    assert_eq!(trace.lines().count(), 301);

    let o = closek(dir.path(), &["train", "ex1.csv", "--method", "average"]);
    assert!(
        stdout(&o).contains("train 0-1 loss: 100 of 102"),
        "{}",
        stdout(&o)
    );
}

#[test]
fn train_with_zero_learning_rate_has_a_flat_trace() {
    let dir = tempfile::tempdir().unwrap();
    closek(
        dir.path(),
        &["generate", "example2", "--n", "50", "--out", "d.csv"],
    );
    let o = closek(
        dir.path(),
        &[
            "train",
            "d.csv",
            "--method",
            "average",
            "--lr",
            "0",
            "--epochs",
            "20",
            "--split-seed",
            "3",
        ],
    );
    assert_eq!(code(&o), 0, "{o:?}");
    assert!(stdout(&o).contains("test 0-1 loss"));
    let trace = std::fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    let losses: Vec<&str> = trace
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(2).unwrap())
        .collect();
    assert_eq!(losses.len(), 20);
    assert!(losses.iter().all(|l| *l == losses[0]));
}

#[test]
fn exit_codes_follow_error_classes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&closek(dir.path(), &["train", "missing.csv"])), 3);
    assert_eq!(code(&closek(dir.path(), &["train"])), 2);

    closek(dir.path(), &["generate", "example1", "--out", "ex1.csv"]);
    assert_eq!(
        code(&closek(dir.path(), &["train", "ex1.csv", "--epochs", "10"])),
        2
    );
    let o = closek(
        dir.path(),
        &[
            "train", "ex1.csv", "--method", "average", "--lr", "1e306", "--loss", "hinge",
        ],
    );
    assert_eq!(code(&o), 4, "{o:?}");

    std::fs::write(dir.path().join("one.csv"), "x0,target\n1,1\n2,1\n").unwrap();
    assert_eq!(code(&closek(dir.path(), &["train", "one.csv"])), 5);
}

fn manifest(dir: &Path) -> std::path::PathBuf {
    let m = dir.join("manifest");
    std::fs::create_dir(&m).unwrap();
    closek(
        dir,
        &[
            "generate",
            "figure1",
            "--n",
            "200",
            "--seed",
            "1",
            "--out",
            "manifest/easy.csv",
        ],
    );
    closek(
        dir,
        &[
            "generate",
            "example2",
            "--n",
            "100",
            "--seed",
            "2",
            "--out",
            "manifest/ex2.csv",
        ],
    );
    std::fs::write(m.join("run.conf"), SMALL_RUN).unwrap();
    m
}

#[test]
fn bench_emits_tables_and_resumes() {
    let dir = tempfile::tempdir().unwrap();
    manifest(dir.path());
    let o = closek(dir.path(), &["bench", "manifest", "--out", "out"]);
    assert_eq!(code(&o), 0, "{o:?}");
    assert!(stdout(&o).contains("datasets: 2 completed, 0 failed"));
    let out = dir.path().join("out");
    for f in [
        "matrix.csv",
        "per_dataset.csv",
        "summary.csv",
        "kstar.csv",
        "schema.txt",
    ] {
        assert!(out.join(f).exists(), "{f}");
    }
    let matrix = std::fs::read_to_string(out.join("matrix.csv")).unwrap();
    assert_eq!(matrix.lines().count(), 1 + 2 * 5);
    let per = std::fs::read_to_string(out.join("per_dataset.csv")).unwrap();
    assert_eq!(per.lines().count(), 1 + 2 * 3 * 5);

    let ledger = std::fs::read_to_string(out.join("ledger.jsonl")).unwrap();
    let o = closek(
        dir.path(),
        &["bench", "manifest", "--out", "out", "--resume"],
    );
    assert_eq!(code(&o), 0);
    assert_eq!(
        std::fs::read_to_string(out.join("ledger.jsonl")).unwrap(),
        ledger
    );
    assert_eq!(
        std::fs::read_to_string(out.join("per_dataset.csv")).unwrap(),
        per
    );

    // a different configuration must not reuse the ledger
    let o = closek(
        dir.path(),
        &[
            "bench",
            "manifest",
            "--out",
            "out",
            "--resume",
            "--seed-base",
            "5",
        ],
    );
    assert_eq!(code(&o), 2, "{o:?}");
}

#[test]
fn bench_skips_bad_datasets_and_rejects_empty_manifests() {
    let dir = tempfile::tempdir().unwrap();
    let m = manifest(dir.path());
    std::fs::write(m.join("broken.csv"), "x0,target\n1,a\n2,b\n3,c\n").unwrap();
    let o = closek(
        dir.path(),
        &[
            "bench",
            "manifest",
            "--out",
            "out",
            "--methods",
            "average,close_decay",
        ],
    );
    assert_eq!(code(&o), 0, "{o:?}");
    assert!(
        stdout(&o).contains("datasets: 2 completed, 1 failed; warnings: 1"),
        "{}",
        stdout(&o)
    );

    std::fs::create_dir(dir.path().join("empty")).unwrap();
    let o = closek(dir.path(), &["bench", "empty", "--out", "out2"]);
    assert_ne!(code(&o), 0);
}

#[test]
fn config_file_overrides_flags() {
    let dir = tempfile::tempdir().unwrap();
    manifest(dir.path());
    // the run.conf sets split_count = 3, which wins over --splits 2
    let o = closek(
        dir.path(),
        &[
            "bench",
            "manifest",
            "--out",
            "out",
            "--splits",
            "2",
            "--methods",
            "average",
        ],
    );
    assert_eq!(code(&o), 0, "{o:?}");
    let per = std::fs::read_to_string(dir.path().join("out/per_dataset.csv")).unwrap();
    assert_eq!(per.lines().count(), 1 + 2 * 3);

    std::fs::write(dir.path().join("bad.conf"), "colour = red\n").unwrap();
    let o = closek(
        dir.path(),
        &["bench", "manifest", "--config", "bad.conf", "--out", "out3"],
    );
    assert_eq!(code(&o), 2);
}

#[test]
fn simulate_writes_one_row_per_level_and_method() {
    let dir = tempfile::tempdir().unwrap();
    let m = manifest(dir.path());
    let conf = m.join("run.conf");
    let conf = conf.to_str().unwrap();
    let o = closek(
        dir.path(),
        &[
            "simulate",
            "manifest/easy.csv",
            "--corruption",
            "outliers",
            "--levels",
            "0,0.01,0.05,0.10",
            "--methods",
            "close_decay,average",
            "--config",
            conf,
            "--out",
            "sweep",
        ],
    );
    assert_eq!(code(&o), 0, "{o:?}");
    let text = std::fs::read_to_string(dir.path().join("sweep/sweep_outliers.csv")).unwrap();
    assert_eq!(text.lines().count(), 1 + 4 * 2);

    // level 0 matches a clean bench run with the same seeds
    let o = closek(
        dir.path(),
        &[
            "bench",
            "manifest",
            "--methods",
            "close_decay,average",
            "--out",
            "b",
        ],
    );
    assert_eq!(code(&o), 0);
    let summary = std::fs::read_to_string(dir.path().join("b/per_dataset.csv")).unwrap();
    let bench_mean: f64 = {
        let accs: Vec<f64> = summary
            .lines()
            .filter(|l| l.contains(",easy,average,"))
            .map(|l| l.split(',').nth(10).unwrap().parse().unwrap())
            .collect();
        accs.iter().sum::<f64>() / accs.len() as f64
    };
    let sweep_mean: f64 = text
        .lines()
        .find(|l| l.starts_with("outliers,0,average,"))
        .unwrap()
        .split(',')
        .nth(3)
        .unwrap()
        .parse()
        .unwrap();
    assert!(
        (bench_mean - sweep_mean).abs() < 1e-12,
        "{bench_mean} vs {sweep_mean}"
    );

    let o = closek(
        dir.path(),
        &["simulate", "manifest/easy.csv", "--corruption", "noise"],
    );
    assert_eq!(code(&o), 2);
}

#[test]
fn help_lists_defaults() {
    let dir = tempfile::tempdir().unwrap();
    for sub in ["generate", "train", "bench", "simulate"] {
        let o = closek(dir.path(), &[sub, "--help"]);
        assert_eq!(code(&o), 0);
        assert!(stdout(&o).contains("[default:"), "{sub}");
    }
    let o = closek(dir.path(), &["bench", "--help"]);
    assert!(stdout(&o).contains("override command-line flags"));
}
