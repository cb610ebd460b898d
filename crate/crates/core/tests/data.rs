mod common;

use std::collections::HashSet;
use std::io::Write;

use common::*;
use hofm::data::*;
use hofm::HofmError;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn svmlight_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let data = random_matrix(&mut rng, 30, 12, 4);
    let targets: Vec<f64> = (0..30).map(|i| i as f64 * 0.1 - 1.0).collect();
    let mut buf = Vec::new();
    write_svmlight(&data, &targets, &mut buf).unwrap();
    let (back, y) = load_svmlight(buf.as_slice(), Some(12)).unwrap();
    assert_eq!(back, data);
    assert_eq!(y, targets);
}

fn node_file(dir: &std::path::Path, name: &str, n: usize) -> std::path::PathBuf {
    let path = dir.join(name);
    let mut f = std::fs::File::create(&path).unwrap();
    for i in 0..n {
        writeln!(f, "0 {}:1", i + 1).unwrap();
    }
    path
}

#[test]
fn link_files_and_split() {
    let dir = tempfile::tempdir().unwrap();
    let left = node_file(dir.path(), "a.svm", 6);
    let right = node_file(dir.path(), "b.svm", 5);
    let pairs = dir.path().join("pairs.txt");
    std::fs::write(&pairs, "0 1\n2 3\n4 4\n5 0\n1 2\n3 3\n").unwrap();
    let ld = load_link_dataset(&left, Some(right.as_path()), &pairs).unwrap();
    assert_eq!(ld.pair_dim(), 11);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let split = split_links(&ld, &SplitOptions::default(), &mut rng).unwrap();
    assert_eq!(split.train_positives, 3);
    assert_eq!(split.test_positives, 3);
    let positives: HashSet<_> = ld.positives().iter().copied().collect();
    let train_pos: HashSet<_> = split
        .train_pairs
        .iter()
        .zip(&split.train_targets)
        .filter(|(_, &y)| y == 1.0)
        .map(|(p, _)| *p)
        .collect();
    let test_pos: HashSet<_> = split
        .test_pairs
        .iter()
        .zip(&split.test_targets)
        .filter(|(_, &y)| y == 1.0)
        .map(|(p, _)| *p)
        .collect();
    assert!(train_pos.is_disjoint(&test_pos));
    assert_eq!(&train_pos | &test_pos, positives);
    for (pair, y) in split.train_pairs.iter().zip(&split.train_targets) {
        if *y != 1.0 {
            assert!(!positives.contains(pair));
        }
    }
    // all 30 - 6 negatives go to test: 3 used for training
    assert_eq!(split.test_targets.len() - split.test_positives, 30 - 6 - 3);

    std::fs::write(&pairs, "0 1\n9 0\n").unwrap();
    let err = load_link_dataset(&left, Some(right.as_path()), &pairs).unwrap_err();
    assert!(matches!(err, HofmError::Parse { line: 2, .. }));
}
