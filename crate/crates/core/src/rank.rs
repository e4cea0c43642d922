//! Ranking rule shared by labels, predictions and port selection: larger
//! values first, ties toward the lower index, NaN last.

use std::cmp::Ordering;

fn descending(values: &[f64], a: usize, b: usize) -> Ordering {
    let (x, y) = (values[a], values[b]);
    match (x.is_nan(), y.is_nan()) {
        (true, true) => a.cmp(&b),
        (true, false) => Ordering::Greater,
        (false, true) => Ordering::Less,
        _ => y.partial_cmp(&x).unwrap_or(Ordering::Equal).then(a.cmp(&b)),
    }
}

/// Indices of the `k` largest entries of `values`, best first.
pub fn top_k_indices(values: &[f64], k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    let k = k.min(values.len());
    if k < values.len() && k > 0 {
        idx.select_nth_unstable_by(k - 1, |&a, &b| descending(values, a, b));
        idx.truncate(k);
    }
    idx.sort_by(|&a, &b| descending(values, a, b));
    idx.truncate(k);
    idx
}

/// Same rule restricted to `candidates`.
pub fn top_k_among(values: &[f64], candidates: &[usize], k: usize) -> Vec<usize> {
    let mut idx = candidates.to_vec();
    idx.sort_by(|&a, &b| descending(values, a, b));
    idx.truncate(k);
    idx
}

/// Best index among `candidates`; `None` when empty.
pub fn argmax_among(values: &[f64], candidates: impl IntoIterator<Item = usize>) -> Option<usize> {
    candidates
        .into_iter()
        .min_by(|&a, &b| descending(values, a, b))
}
