mod common;

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use common::*;
use hofm::data::write_svmlight;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn hofm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hofm"))
        .args(args)
        .env_remove("HOFM_SEED")
        .output()
        .expect("binary runs")
}

fn dataset(dir: &Path, name: &str, d: usize, seed: u64) -> PathBuf {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = random_matrix(&mut rng, 40, d, 3);
    let y: Vec<f64> = (0..40).map(|_| rng.random_range(-1.0..1.0)).collect();
    let path = dir.join(name);
    write_svmlight(&data, &y, std::fs::File::create(&path).unwrap()).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn train_predict_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let data = dataset(dir.path(), "train.svm", 8, 1);
    let model = dir.path().join("model.txt");
    let cached = dir.path().join("cached.txt");
    let preds = dir.path().join("preds.txt");
    let out = hofm(&[
        "train",
        "--data",
        s(&data),
        "--variant",
        "separate",
        "--degree",
        "3",
        "--rank",
        "4",
        "--beta",
        "0.1",
        "--solver",
        "cd",
        "--epochs",
        "5",
        "--seed",
        "7",
        "--dim",
        "8",
        "--out",
        s(&model),
        "--train-predictions",
        s(&cached),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(String::from_utf8_lossy(&out.stdout).contains("objective="));
    assert!(out.stderr.is_empty());
    let trace = std::fs::read_to_string(format!("{}.trace.csv", s(&model))).unwrap();
    assert!(trace.starts_with("epoch,objective,seconds"));

    let out = hofm(&[
        "predict",
        "--model",
        s(&model),
        "--data",
        s(&data),
        "--out",
        s(&preds),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let read = |p: &Path| -> Vec<f64> {
        std::fs::read_to_string(p)
            .unwrap()
            .lines()
            .map(|l| l.parse().unwrap())
            .collect()
    };
    let (a, b) = (read(&preds), read(&cached));
    assert_eq!(a.len(), 40);
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).abs() <= 1e-8 * x.abs().max(1.0));
    }

    let out = hofm(&[
        "evaluate",
        "--model",
        s(&model),
        "--data",
        s(&data),
        "--metric",
        "rmse",
    ]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("rmse="));
}

#[test]
fn zero_epochs_and_wrong_dimension() {
    let dir = tempfile::tempdir().unwrap();
    let data = dataset(dir.path(), "train.svm", 6, 2);
    let wide = dataset(dir.path(), "wide.svm", 30, 3);
    let model = dir.path().join("m.txt");
    let out = hofm(&[
        "train",
        "--data",
        s(&data),
        "--epochs",
        "0",
        "--rank",
        "2",
        "--dim",
        "6",
        "--out",
        s(&model),
    ]);
    assert!(out.status.success());
    assert!(std::fs::read_to_string(&model)
        .unwrap()
        .starts_with("hofm-model v1"));
    let out = hofm(&["predict", "--model", s(&model), "--data", s(&wide)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!out.stderr.is_empty());
}

#[test]
fn usage_errors() {
    let out = hofm(&["train", "--out", "x"]);
    assert_eq!(out.status.code(), Some(2));
    let out = hofm(&["bench", "--data", "x", "--solvers", "lbfgs"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bench_writes_one_cell_per_pair() {
    let dir = tempfile::tempdir().unwrap();
    let data = dataset(dir.path(), "bench.svm", 10, 4);
    let csv = dir.path().join("trace.csv");
    let out = hofm(&[
        "bench",
        "--data",
        s(&data),
        "--solvers",
        "cd,adagrad",
        "--degrees",
        "2,3,4",
        "--rank",
        "2",
        "--epochs",
        "2",
        "--out",
        s(&csv),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut cells: Vec<(String, String)> = text
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].to_string(), f[1].to_string())
        })
        .collect();
    cells.dedup();
    assert_eq!(cells.len(), 6);

    let out = hofm(&[
        "bench",
        "--data",
        s(&data),
        "--solvers",
        "cd",
        "--degrees",
        "2",
        "--rank",
        "2",
        "--epochs",
        "1",
    ]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8_lossy(&out.stdout).lines().count(), 1 + 2);
}

#[test]
fn link_command_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let nodes = dir.path().join("nodes.svm");
    let pairs = dir.path().join("pairs.txt");
    // two communities; links only inside a community
    let mut text = String::new();
    for i in 0..20 {
        text.push_str(&format!("0 {}:1 {}:1\n", i + 1, 21 + i / 10));
    }
    std::fs::write(&nodes, text).unwrap();
    let mut links = String::new();
    for i in 0..20 {
        for j in (i + 1)..20 {
            if i / 10 == j / 10 && (i + j) % 3 != 0 {
                links.push_str(&format!("{i} {j}\n"));
            }
        }
    }
    std::fs::write(&pairs, links).unwrap();
    let run = || {
        hofm(&[
            "link",
            "--left",
            s(&nodes),
            "--pairs",
            s(&pairs),
            "--degree",
            "2",
            "--rank",
            "4",
            "--beta",
            "0.001",
            "--epochs",
            "20",
            "--seed",
            "3",
        ])
    };
    let (a, b) = (run(), run());
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8_lossy(&a.stdout);
    let auc: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("test_auc="))
        .unwrap()
        .parse()
        .unwrap();
    assert!(auc > 0.5, "{text}");

    std::fs::write(&pairs, "0 1\n0 99\n").unwrap();
    assert_eq!(run().status.code(), Some(1));
}
