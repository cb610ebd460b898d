mod common;

use common::*;
use hofm::kernels::anova_eval;
use hofm::model::*;
use hofm::SparseVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_model<R: Rng>(rng: &mut R, variant: Variant, d: usize, m: usize, k: usize) -> HofmModel {
    let mut model = HofmModel::zeros(variant, d, m, k).unwrap();
    model.set_bias(rng.random_range(-1.0..1.0));
    if variant.has_linear() {
        model.set_linear(random_dense(rng, d)).unwrap();
    }
    for b in 0..model.blocks().len() {
        let f = model.factor_mut(b);
        for s in 0..f.cols() {
            for j in 0..f.rows() {
                f.set(j, s, rng.random_range(-1.0..1.0));
            }
        }
    }
    model
}

#[test]
fn separate_prediction_is_sum_of_blocks() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..100 {
        let d = rng.random_range(2..=8);
        let m = rng.random_range(2..=4);
        let model = random_model(&mut rng, Variant::Separate, d, m, 2);
        let x = random_sparse(&mut rng, d, 0.7);
        let mut want = model.bias() + x.dense_dot(model.linear().unwrap());
        for (b, block) in model.blocks().iter().enumerate() {
            for col in block.matrix.columns() {
                want += brute_anova(col, &x, b + 2);
            }
        }
        assert!(rel_err(model.predict(&x).unwrap(), want, 1.0) <= 1e-10);
    }
}

trait DenseDot {
    fn dense_dot(&self, w: &[f64]) -> f64;
}

impl DenseDot for SparseVector {
    fn dense_dot(&self, w: &[f64]) -> f64 {
        self.iter().map(|(j, v)| w[j] * v).sum()
    }
}

#[test]
fn fast_path_matches_dp() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..200 {
        let d = rng.random_range(1..=20);
        let model = random_model(&mut rng, Variant::Fm2, d, 2, 3);
        let x = random_sparse(&mut rng, d, 0.4);
        let slow = model.predict(&x).unwrap();
        let fast = model.predict_fm2_fast(&x).unwrap();
        assert!(rel_err(fast, slow, 1.0) <= 1e-8);
    }
}

#[test]
fn augmentation_mixes_lower_degrees() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..200 {
        let d = rng.random_range(1..=8);
        let m = rng.random_range(2..=4);
        let model = random_model(&mut rng, Variant::SharedAugmented, d, m, 1);
        let x = random_sparse(&mut rng, d, 0.7);
        let column = model.blocks()[0].matrix.column(0);
        let aug = augment_input(&x, m);
        let direct = anova_eval(column, &aug, m).unwrap().0;
        let theta = model.theta(0).unwrap().theta;
        let feature_part = &column[m - 1..];
        let expected: f64 = (1..=m)
            .map(|t| theta[t - 1] * brute_anova(feature_part, &x, t))
            .sum();
        assert!(rel_err(direct, expected, 1.0) <= 1e-8);
        assert!(rel_err(model.predict(&x).unwrap(), model.bias() + direct, 1.0) <= 1e-12);
    }
}

#[test]
fn theta_is_elementary_symmetric() {
    let gamma = [0.5, -2.0, 3.0];
    let theta = gamma_to_theta(&gamma).theta;
    assert_eq!(theta.len(), 4);
    // theta_t = e_{m - t}(gamma)
    let e3 = 0.5 * -2.0 * 3.0;
    let e2 = 0.5 * -2.0 + 0.5 * 3.0 + -2.0 * 3.0;
    let e1 = 0.5 - 2.0 + 3.0;
    assert_eq!(theta, vec![e3, e2, e1, 1.0]);
}

#[test]
fn file_round_trip_is_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let dir = tempfile::tempdir().unwrap();
    for variant in [
        Variant::Separate,
        Variant::SharedAugmented,
        Variant::AllSubsets,
        Variant::Fm2,
    ] {
        let m = if variant == Variant::Fm2 { 2 } else { 3 };
        let model = random_model(&mut rng, variant, 5, m, 2);
        let path = dir.path().join(format!("{variant}.txt"));
        save_model_file(&model, &path).unwrap();
        let back = load_model_file(&path).unwrap();
        assert_eq!(back, model);
        let x = random_sparse(&mut rng, 5, 0.8);
        assert_eq!(
            back.predict(&x).unwrap().to_bits(),
            model.predict(&x).unwrap().to_bits()
        );
    }
}
