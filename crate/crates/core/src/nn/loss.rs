use ndarray::{Array2, Zip};
use serde::{Deserialize, Serialize};

const P_CLAMP: f64 = 1e-7;
const F1_EPS: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    #[default]
    Bce,
    SoftF1,
}

/// Mean loss over a `B × N` batch of probabilities.
///
/// BCE averages over every element with `p` clamped to `[1e-7, 1 - 1e-7]`.
/// Soft-F1 is `1 - 2 Σ p y / (Σ p + Σ y + 1e-7)` per sample, averaged over
/// the batch.
pub fn loss(pred: &Array2<f64>, labels: &Array2<f64>, kind: LossKind) -> f64 {
    loss_and_logit_grad(pred, labels, kind).0
}

/// Loss value and its gradient with respect to the pre-sigmoid logits.
pub fn loss_and_logit_grad(
    pred: &Array2<f64>,
    labels: &Array2<f64>,
    kind: LossKind,
) -> (f64, Array2<f64>) {
    assert_eq!(pred.dim(), labels.dim(), "prediction and label shapes differ");
    let (batch, _) = pred.dim();
    let mut grad = Array2::zeros(pred.raw_dim());
    match kind {
        LossKind::Bce => {
            let count = pred.len() as f64;
            let mut total = 0.0;
            Zip::from(&mut grad)
                .and(pred)
                .and(labels)
                .for_each(|g, &p, &y| {
                    let pc = p.clamp(P_CLAMP, 1.0 - P_CLAMP);
                    total -= y * pc.ln() + (1.0 - y) * (1.0 - pc).ln();
                    // d/dlogit through the sigmoid; zero where the clamp is active
                    if p > P_CLAMP && p < 1.0 - P_CLAMP {
                        *g = (p - y) / count;
                    }
                });
            (total / count, grad)
        }
        LossKind::SoftF1 => {
            let mut total = 0.0;
            for ((p_row, y_row), mut g_row) in pred
                .outer_iter()
                .zip(labels.outer_iter())
                .zip(grad.outer_iter_mut())
            {
                let tp: f64 = p_row.iter().zip(&y_row).map(|(p, y)| p * y).sum();
                let denom = p_row.sum() + y_row.sum() + F1_EPS;
                total += 1.0 - 2.0 * tp / denom;
                for ((g, &p), &y) in g_row.iter_mut().zip(&p_row).zip(&y_row) {
                    let d_p = -2.0 * (y * denom - tp) / (denom * denom);
                    *g = d_p * p * (1.0 - p) / batch as f64;
                }
            }
            (total / batch as f64, grad)
        }
    }
}
