use crate::{Error, Result};

/// Line-level binary metrics with chorus as the positive class.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub tn: usize,
}

/// Precision (recall) is 0 when nothing is predicted (present) positive;
/// F1 is 0 when both are 0.
pub fn evaluate(predicted: &[bool], labels: &[bool]) -> Result<Metrics> {
    if predicted.len() != labels.len() {
        return Err(Error::LengthMismatch {
            left: predicted.len(),
            right: labels.len(),
        });
    }
    let (mut tp, mut fp, mut fn_, mut tn) = (0, 0, 0, 0);
    for (&p, &y) in predicted.iter().zip(labels) {
        match (p, y) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            (false, false) => tn += 1,
        }
    }
    let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fn_);
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    Ok(Metrics {
        accuracy: ratio(tp + tn, labels.len()),
        precision,
        recall,
        f1,
        tp,
        fp,
        fn_,
        tn,
    })
}
