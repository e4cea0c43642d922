//! Reverse-mode gradients against central finite differences.

use fama_lnn::nn::{backward_gradients, forward_batch, loss, Activation, Batch, LossKind, ModelSpec, Weights};
use fama_lnn::rng::stream_rng;
use rand::Rng;

const STEP: f64 = 1e-5;
/// Absolute floor on the relative-error denominator, so parameters with
/// vanishing gradients are judged on absolute error.
const FLOOR: f64 = 1e-7;

fn batch(spec: &ModelSpec, n: usize, steps: usize, seed: u64) -> Batch {
    let mut rng = stream_rng(seed, 0);
    let xs: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..steps * spec.input_dim).map(|_| rng.gen_range(-2.0..2.0)).collect())
        .collect();
    let ys: Vec<Vec<u8>> = (0..n)
        .map(|_| (0..spec.output_dim).map(|_| rng.gen_bool(0.3) as u8).collect())
        .collect();
    Batch::from_sequences(&xs, spec.input_dim, Some(&ys)).unwrap()
}

fn perturbed(spec: &ModelSpec, w: &Weights) -> Weights {
    // move away from the symmetric initialization so every path is exercised
    let mut w = w.clone();
    let mut rng = stream_rng(99, 1);
    if let Some(l) = &mut w.ltc {
        l.amplitude.mapv_inplace(|a| a + rng.gen_range(-0.5..0.5));
        l.tau.mapv_inplace(|t| t + rng.gen_range(0.0..1.0));
        l.bias.mapv_inplace(|_| rng.gen_range(-0.3..0.3));
        l.input_kernel.mapv_inplace(|v| v * 5.0);
        l.recurrent_kernel.mapv_inplace(|v| v * 5.0);
    }
    for d in &mut w.dense {
        d.bias.mapv_inplace(|_| rng.gen_range(-0.2..0.2));
    }
    w.check(spec).unwrap();
    w
}

fn max_relative_error(spec: &ModelSpec, w: &Weights, b: &Batch, kind: LossKind) -> (f64, usize) {
    let (_, grads) = backward_gradients(spec, w, b, kind).unwrap();
    let analytic = grads.flatten();
    let base = w.flatten();
    let labels = b.labels.as_ref().unwrap();
    let eval = |flat: &[f64]| {
        let w = Weights::from_flat(spec, flat).unwrap();
        loss(&forward_batch(spec, &w, &b.steps).unwrap(), labels, kind)
    };
    let mut worst: f64 = 0.0;
    for i in 0..base.len() {
        let mut up = base.clone();
        up[i] += STEP;
        let mut dn = base.clone();
        dn[i] -= STEP;
        let numeric = (eval(&up) - eval(&dn)) / (2.0 * STEP);
        let err = (numeric - analytic[i]).abs() / numeric.abs().max(analytic[i].abs()).max(FLOOR);
        worst = worst.max(err);
    }
    (worst, base.len())
}

#[test]
fn ltc_dense_gradients_match_finite_differences() {
    for (activation, kind) in [
        (Activation::Tanh, LossKind::Bce),
        (Activation::Tanh, LossKind::SoftF1),
        (Activation::Relu, LossKind::Bce),
    ] {
        let spec = ModelSpec {
            activation,
            ..ModelSpec::ltc(2, 3, vec![5], 6)
        };
        let w = perturbed(&spec, &Weights::init(&spec, 7).unwrap());
        let b = batch(&spec, 5, 4, 3);
        let (err, count) = max_relative_error(&spec, &w, &b, kind);
        assert!(count >= 80);
        assert!(err <= 1e-4, "{activation:?}/{kind:?}: max relative error {err:e}");
    }
}

#[test]
fn wide_model_covers_two_hundred_parameters() {
    let spec = ModelSpec {
        activation: Activation::Tanh,
        ..ModelSpec::ltc(2, 6, vec![8, 5], 6)
    };
    let w = perturbed(&spec, &Weights::init(&spec, 1).unwrap());
    let b = batch(&spec, 4, 4, 8);
    let (err, count) = max_relative_error(&spec, &w, &b, LossKind::Bce);
    assert!(count >= 200, "{count}");
    assert!(err <= 1e-4, "max relative error {err:e}");
}

#[test]
fn dense_baseline_gradients() {
    let spec = ModelSpec {
        activation: Activation::Tanh,
        ..ModelSpec::ltc(8, 0, vec![6, 4], 6)
    };
    let w = perturbed(&spec, &Weights::init(&spec, 2).unwrap());
    let b = batch(&spec, 6, 1, 5);
    let (err, _) = max_relative_error(&spec, &w, &b, LossKind::SoftF1);
    assert!(err <= 1e-4, "max relative error {err:e}");
}
