//! Logits to ranked, labeled confidences.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::labels::{LabelTable, NUM_CLASSES};

/// Raw model outputs, index = class id. Always finite.
#[derive(Debug, Clone, PartialEq)]
pub struct LogitVector(Vec<f64>);

impl LogitVector {
    /// Requires exactly [`NUM_CLASSES`] finite values.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() != NUM_CLASSES {
            return Err(Error::shape(
                format!("{NUM_CLASSES} logits"),
                format!("{} logits", values.len()),
            ));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Numeric(format!("logit {i} is {}", values[i])));
        }
        Ok(Self(values))
    }

    pub fn from_f32(values: &[f32]) -> Result<Self> {
        Self::new(values.iter().map(|&v| v as f64).collect())
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn argmax(&self) -> usize {
        argmax(&self.0)
    }
}

/// Index of the largest value; the lowest index wins ties.
pub fn argmax(values: &[f64]) -> usize {
    values
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, &v)| {
            if v > bv {
                (i, v)
            } else {
                (bi, bv)
            }
        })
        .0
}

/// Max-shifted softmax: `exp(l_i - max) / sum_k exp(l_k - max)`.
pub fn softmax(logits: &[f64]) -> Result<Vec<f64>> {
    if logits.is_empty() {
        return Err(Error::Numeric("softmax of an empty vector".into()));
    }
    if let Some(i) = logits.iter().position(|v| !v.is_finite()) {
        return Err(Error::Numeric(format!("logit {i} is {}", logits[i])));
    }
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&l| (l - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    Ok(exps.into_iter().map(|e| e / total).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationResult {
    pub class_index: usize,
    pub label: String,
    /// Softmax probability as a fraction in `[0, 1]`.
    pub confidence: f64,
}

impl ClassificationResult {
    /// Confidence as a percentage rounded to one decimal, e.g. `"48.7%"`.
    pub fn percent(&self) -> String {
        format!("{:.1}%", (self.confidence * 1000.0).round() / 10.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationResponse {
    /// Descending confidence, ties by ascending class index.
    pub top: Vec<ClassificationResult>,
    pub model_id: String,
    pub inference_millis: f64,
}

impl ClassificationResponse {
    pub fn top1(&self) -> &ClassificationResult {
        &self.top[0]
    }

    /// Same model and same ranked results, ignoring timing.
    pub fn same_result(&self, other: &Self) -> bool {
        self.model_id == other.model_id && self.top == other.top
    }
}

/// The `k` most probable classes, descending, ties broken by ascending class index.
pub fn top_k(probs: &[f64], k: usize, labels: &LabelTable) -> Result<Vec<ClassificationResult>> {
    if k == 0 || k > probs.len() {
        return Err(Error::Argument(format!(
            "k must be in 1..={}, got {k}",
            probs.len()
        )));
    }
    if probs.len() != labels.len() {
        return Err(Error::shape(
            format!("{} probabilities (one per label)", labels.len()),
            probs.len(),
        ));
    }
    let mut order: Vec<usize> = (0..probs.len()).collect();
    let by_rank = |&a: &usize, &b: &usize| -> Ordering {
        probs[b].total_cmp(&probs[a]).then(a.cmp(&b))
    };
    if k < order.len() {
        order.select_nth_unstable_by(k - 1, by_rank);
        order.truncate(k);
    }
    order.sort_by(by_rank);
    Ok(order
        .into_iter()
        .map(|i| ClassificationResult {
            class_index: i,
            label: labels.name(i).unwrap_or_default().to_string(),
            confidence: probs[i],
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn uniform_pair() {
        assert!(close(&softmax(&[0.0, 0.0]).unwrap(), &[0.5, 0.5], 1e-12));
    }

    #[test]
    fn ln2_pair() {
        let p = softmax(&[2f64.ln(), 0.0]).unwrap();
        assert!(close(&p, &[2.0 / 3.0, 1.0 / 3.0], 1e-12));
    }

    #[test]
    fn constant_vector_is_uniform() {
        let p = softmax(&vec![-7.25; 1000]).unwrap();
        assert!(p.iter().all(|&v| (v - 1e-3).abs() < 1e-12));
    }

    #[test]
    fn large_logits_do_not_overflow() {
        let p = softmax(&[1000.0, 999.0, -1000.0]).unwrap();
        assert!(p.iter().all(|v| v.is_finite()));
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn non_finite_is_rejected() {
        assert!(matches!(softmax(&[0.0, f64::NAN]), Err(Error::Numeric(_))));
        assert!(matches!(softmax(&[f64::INFINITY]), Err(Error::Numeric(_))));
        assert!(softmax(&[]).is_err());
        let mut v = vec![0.0; 1000];
        v[3] = f64::NAN;
        assert!(matches!(LogitVector::new(v), Err(Error::Numeric(_))));
        assert!(matches!(LogitVector::new(vec![0.0; 10]), Err(Error::Shape { .. })));
    }

    #[test]
    fn top1_picks_unique_max() {
        let labels = LabelTable::imagenet();
        let mut p = vec![0.0005; 1000];
        p[207] = 0.5;
        let top = top_k(&p, 1, &labels).unwrap();
        assert_eq!(top.len(), 1);
        assert_eq!(top[0].class_index, 207);
        assert_eq!(top[0].label, "golden retriever");
    }

    #[test]
    fn ties_break_by_index() {
        let labels = LabelTable::imagenet();
        let top = top_k(&[1e-3; 1000], 3, &labels).unwrap();
        let idx: Vec<usize> = top.iter().map(|r| r.class_index).collect();
        assert_eq!(idx, vec![0, 1, 2]);
    }

    #[test]
    fn k_out_of_range() {
        let labels = LabelTable::imagenet();
        let p = vec![1e-3; 1000];
        assert!(matches!(top_k(&p, 0, &labels), Err(Error::Argument(_))));
        assert!(matches!(top_k(&p, 1001, &labels), Err(Error::Argument(_))));
        assert_eq!(top_k(&p, 1000, &labels).unwrap().len(), 1000);
    }

    #[test]
    fn percent_has_one_decimal() {
        let r = ClassificationResult {
            class_index: 0,
            label: "x".into(),
            confidence: 0.48749,
        };
        assert_eq!(r.percent(), "48.7%");
        let r = ClassificationResult { confidence: 1.0, ..r };
        assert_eq!(r.percent(), "100.0%");
    }

    proptest! {
        #[test]
        fn top_k_is_sorted_and_consistent(p in proptest::collection::vec(0u8..20, 1000), k in 1usize..50) {
            let probs: Vec<f64> = p.iter().map(|&v| v as f64 / 100.0).collect();
            let top = top_k(&probs, k, &LabelTable::imagenet()).unwrap();
            prop_assert_eq!(top.len(), k);
            for w in top.windows(2) {
                prop_assert!(w[0].confidence > w[1].confidence
                    || (w[0].confidence == w[1].confidence && w[0].class_index < w[1].class_index));
            }
            // nothing outside the list beats the last entry
            let last = top.last().unwrap();
            for (i, &v) in probs.iter().enumerate() {
                if top.iter().all(|r| r.class_index != i) {
                    prop_assert!(v < last.confidence || (v == last.confidence && i > last.class_index));
                }
            }
        }

        #[test]
        fn softmax_is_order_preserving(l in proptest::collection::vec(-30.0f64..30.0, 2..64)) {
            let p = softmax(&l).unwrap();
            for i in 0..l.len() {
                for j in 0..l.len() {
                    if l[i] > l[j] {
                        prop_assert!(p[i] > p[j]);
                    }
                }
            }
        }
    }
}
