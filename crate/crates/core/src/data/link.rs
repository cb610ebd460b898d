//! Link prediction as supervised learning: the sample for a node pair
//! `(i, j)` is the concatenation `[a_i, b_j]`, labelled positive when the
//! link is observed.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;

use super::svmlight::load_svmlight_file;
use super::SampleMatrix;
use crate::error::{HofmError, Result};
use crate::kernels::{SparseRef, SparseVector};

/// Concatenates two node feature vectors; indices of `b` shift by `a.dim()`.
pub fn make_pair_sample<'a, 'b>(
    a: impl Into<SparseRef<'a>>,
    b: impl Into<SparseRef<'b>>,
) -> SparseVector {
    let a = a.into();
    let b = b.into();
    let shift = a.dim();
    let mut indices = Vec::with_capacity(a.nnz() + b.nnz());
    let mut values = Vec::with_capacity(a.nnz() + b.nnz());
    indices.extend_from_slice(a.indices());
    values.extend_from_slice(a.values());
    indices.extend(b.indices().iter().map(|&j| j + shift));
    values.extend_from_slice(b.values());
    SparseVector::from_parts_unchecked(a.dim() + b.dim(), indices, values)
}

/// Node features for both sides of a bipartite (or, with `b = None`,
/// undirected) graph plus the observed links.
#[derive(Debug, Clone)]
pub struct LinkDataset {
    a: SampleMatrix,
    b: Option<SampleMatrix>,
    positives: Vec<(usize, usize)>,
}

impl LinkDataset {
    /// `a` and `b` hold one row per node. When `b` is `None` the graph is
    /// undirected over the nodes of `a`: pairs are stored as `(i, j)` with
    /// `i < j`, self-pairs are rejected and reversed duplicates merged.
    pub fn new(
        a: SampleMatrix,
        b: Option<SampleMatrix>,
        positives: Vec<(usize, usize)>,
    ) -> Result<Self> {
        if positives.is_empty() {
            return Err(HofmError::invalid("no positive pairs"));
        }
        let n_a = a.n_samples();
        let n_b = b.as_ref().map_or(n_a, SampleMatrix::n_samples);
        let symmetric = b.is_none();
        let mut pairs = Vec::with_capacity(positives.len());
        let mut seen = HashSet::with_capacity(positives.len());
        for (i, j) in positives {
            if i >= n_a || j >= n_b {
                return Err(HofmError::invalid(format!(
                    "pair ({i}, {j}) out of range for {n_a} x {n_b} nodes"
                )));
            }
            let pair = if symmetric {
                if i == j {
                    return Err(HofmError::invalid(format!(
                        "self-pair ({i}, {i}) in an undirected graph"
                    )));
                }
                (i.min(j), i.max(j))
            } else {
                (i, j)
            };
            if !seen.insert(pair) {
                if symmetric {
                    continue;
                }
                return Err(HofmError::invalid(format!("duplicate pair ({i}, {j})")));
            }
            pairs.push(pair);
        }
        Ok(LinkDataset {
            a,
            b,
            positives: pairs,
        })
    }

    pub fn is_symmetric(&self) -> bool {
        self.b.is_none()
    }

    pub fn left(&self) -> &SampleMatrix {
        &self.a
    }

    pub fn right(&self) -> &SampleMatrix {
        self.b.as_ref().unwrap_or(&self.a)
    }

    pub fn positives(&self) -> &[(usize, usize)] {
        &self.positives
    }

    pub fn pair_dim(&self) -> usize {
        self.a.dim() + self.right().dim()
    }

    pub fn pair_sample(&self, i: usize, j: usize) -> SparseVector {
        make_pair_sample(self.a.row(i), self.right().row(j))
    }

    /// Number of admissible pairs (`i < j` when undirected).
    pub fn candidate_pairs(&self) -> usize {
        let n_a = self.a.n_samples();
        if self.is_symmetric() {
            n_a * n_a.saturating_sub(1) / 2
        } else {
            n_a * self.right().n_samples()
        }
    }

    fn random_pair<R: Rng>(&self, rng: &mut R) -> (usize, usize) {
        let n_a = self.a.n_samples();
        if self.is_symmetric() {
            loop {
                let i = rng.random_range(0..n_a);
                let j = rng.random_range(0..n_a);
                if i != j {
                    return (i.min(j), i.max(j));
                }
            }
        } else {
            (
                rng.random_range(0..n_a),
                rng.random_range(0..self.right().n_samples()),
            )
        }
    }

    fn all_pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n_a = self.a.n_samples();
        let n_b = self.right().n_samples();
        let symmetric = self.is_symmetric();
        (0..n_a).flat_map(move |i| {
            let start = if symmetric { i + 1 } else { 0 };
            (start..n_b).map(move |j| (i, j))
        })
    }

    /// Draws `count` distinct admissible pairs outside `exclude`, uniformly
    /// without replacement.
    fn sample_pairs<R: Rng>(
        &self,
        count: usize,
        exclude: &HashSet<(usize, usize)>,
        rng: &mut R,
    ) -> Result<Vec<(usize, usize)>> {
        let available = self.candidate_pairs() - exclude.len();
        if count > available {
            return Err(HofmError::invalid(format!(
                "requested {count} negative pairs but only {available} candidates exist"
            )));
        }
        if count.saturating_mul(2) > available {
            let pool: Vec<(usize, usize)> =
                self.all_pairs().filter(|p| !exclude.contains(p)).collect();
            return Ok(pool.choose_multiple(rng, count).copied().collect());
        }
        let mut chosen = Vec::with_capacity(count);
        let mut taken = HashSet::with_capacity(count);
        while chosen.len() < count {
            let pair = self.random_pair(rng);
            if !exclude.contains(&pair) && taken.insert(pair) {
                chosen.push(pair);
            }
        }
        Ok(chosen)
    }

    fn build_samples(&self, pairs: &[(usize, usize)]) -> SampleMatrix {
        let mut matrix = SampleMatrix::empty(self.pair_dim());
        for &(i, j) in pairs {
            matrix
                .push_row(&self.pair_sample(i, j))
                .expect("pair samples have the pair dimension");
        }
        matrix
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SplitOptions {
    pub train_fraction: f64,
    /// Target for negative pairs: 0 for squared loss, -1 for logistic.
    pub negative_label: f64,
    /// Upper bound on test negatives; `None` keeps all of them.
    pub test_negative_cap: Option<usize>,
}

impl Default for SplitOptions {
    fn default() -> Self {
        SplitOptions {
            train_fraction: 0.5,
            negative_label: 0.0,
            test_negative_cap: Some(200_000),
        }
    }
}

#[derive(Debug, Clone)]
pub struct LinkSplit {
    pub train: SampleMatrix,
    pub train_targets: Vec<f64>,
    pub train_pairs: Vec<(usize, usize)>,
    pub test: SampleMatrix,
    pub test_targets: Vec<f64>,
    pub test_pairs: Vec<(usize, usize)>,
    pub train_positives: usize,
    pub test_positives: usize,
    /// Non-positive pairs left after drawing the training negatives.
    pub test_negatives_available: usize,
    pub test_negative_cap: Option<usize>,
}

/// Splits the positives by a seeded shuffle, draws as many training
/// negatives as training positives, and tests on the held-out positives
/// plus the remaining negatives (subsampled down to the cap).
pub fn split_links<R: Rng>(
    ld: &LinkDataset,
    options: &SplitOptions,
    rng: &mut R,
) -> Result<LinkSplit> {
    let fraction = options.train_fraction;
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(HofmError::invalid(format!(
            "train fraction must lie in (0, 1), got {fraction}"
        )));
    }
    let mut positives = ld.positives.clone();
    positives.shuffle(rng);
    let n_train = ((positives.len() as f64) * fraction).round() as usize;
    let n_train = n_train.min(positives.len());
    let (train_pos, test_pos) = positives.split_at(n_train);

    let positive_set: HashSet<(usize, usize)> = ld.positives.iter().copied().collect();
    let train_neg = ld.sample_pairs(n_train, &positive_set, rng)?;

    let mut used = positive_set;
    used.extend(train_neg.iter().copied());
    let available = ld.candidate_pairs() - used.len();
    let mut test_neg = match options.test_negative_cap {
        Some(cap) if cap < available => ld.sample_pairs(cap, &used, rng)?,
        _ => ld.all_pairs().filter(|p| !used.contains(p)).collect(),
    };
    test_neg.sort_unstable();

    let label = |n_pos: usize, n_neg: usize| -> Vec<f64> {
        std::iter::repeat_n(1.0, n_pos)
            .chain(std::iter::repeat_n(options.negative_label, n_neg))
            .collect()
    };
    let train_pairs: Vec<(usize, usize)> = train_pos.iter().chain(&train_neg).copied().collect();
    let test_pairs: Vec<(usize, usize)> = test_pos.iter().chain(&test_neg).copied().collect();

    Ok(LinkSplit {
        train: ld.build_samples(&train_pairs),
        train_targets: label(train_pos.len(), train_neg.len()),
        test: ld.build_samples(&test_pairs),
        test_targets: label(test_pos.len(), test_neg.len()),
        train_pairs,
        test_pairs,
        train_positives: train_pos.len(),
        test_positives: test_pos.len(),
        test_negatives_available: available,
        test_negative_cap: options.test_negative_cap,
    })
}

/// Reads `i j` lines (0-based node indices), checking them against the node
/// counts.
pub fn load_pairs<R: BufRead>(source: R, n_a: usize, n_b: usize) -> Result<Vec<(usize, usize)>> {
    let mut pairs = Vec::new();
    for (line_idx, line) in source.lines().enumerate() {
        let line_no = line_idx + 1;
        let line = line?;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let fields: Vec<&str> = content.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(HofmError::parse(line_no, "expected two node indices `i j`"));
        }
        let parse = |tok: &str| -> Result<usize> {
            tok.parse()
                .map_err(|_| HofmError::parse(line_no, format!("bad node index `{tok}`")))
        };
        let (i, j) = (parse(fields[0])?, parse(fields[1])?);
        if i >= n_a || j >= n_b {
            return Err(HofmError::parse(
                line_no,
                format!("pair ({i}, {j}) out of range for {n_a} x {n_b} nodes"),
            ));
        }
        pairs.push((i, j));
    }
    Ok(pairs)
}

/// Loads node features (svmlight rows, labels ignored) and the pair list.
pub fn load_link_dataset(
    left: impl AsRef<Path>,
    right: Option<&Path>,
    pairs: impl AsRef<Path>,
) -> Result<LinkDataset> {
    let (a, _) = load_svmlight_file(left, None)?;
    let b = match right {
        Some(path) => Some(load_svmlight_file(path, None)?.0),
        None => None,
    };
    let n_a = a.n_samples();
    let n_b = b.as_ref().map_or(n_a, SampleMatrix::n_samples);
    let positives = load_pairs(BufReader::new(File::open(pairs)?), n_a, n_b)?;
    LinkDataset::new(a, b, positives)
}
