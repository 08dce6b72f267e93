//! Confusion matrices, ROC curves with AUC, and reliability diagrams.
//! Clickbait is the positive class throughout.

mod plots;

pub use plots::{render_plots, PlotFile};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learners::ModelKind;

pub const DEFAULT_RELIABILITY_BINS: usize = 10;

/// AUC values reported in the original study for each classifier.
pub fn published_auc(kind: ModelKind) -> f64 {
    match kind {
        ModelKind::Svm => 0.99,
        ModelKind::Tree => 0.94,
        ModelKind::Forest => 0.96,
    }
}

fn check_lengths<A, B>(a: &[A], b: &[B]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch(a.len(), b.len()));
    }
    if a.is_empty() {
        return Err(Error::Parameter("cannot evaluate an empty set".into()));
    }
    Ok(())
}

// ============================================================================
// Confusion matrix
// ============================================================================

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl ConfusionMatrix {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }

    pub fn accuracy(&self) -> f64 {
        ratio(self.tp + self.tn, self.total())
    }

    /// 0 when nothing was predicted positive.
    pub fn precision(&self) -> f64 {
        ratio(self.tp, self.tp + self.fp)
    }

    /// 0 when there are no positives.
    pub fn recall(&self) -> f64 {
        ratio(self.tp, self.tp + self.fn_)
    }

    pub fn f1(&self) -> f64 {
        ratio(2 * self.tp, 2 * self.tp + self.fp + self.fn_)
    }
}

/// Tally predictions against truth (`true` = clickbait).
pub fn confusion(truth: &[bool], predicted: &[bool]) -> Result<ConfusionMatrix> {
    check_lengths(truth, predicted)?;
    let mut m = ConfusionMatrix::default();
    for (&t, &p) in truth.iter().zip(predicted) {
        match (t, p) {
            (true, true) => m.tp += 1,
            (false, true) => m.fp += 1,
            (false, false) => m.tn += 1,
            (true, false) => m.fn_ += 1,
        }
    }
    Ok(m)
}

// ============================================================================
// ROC
// ============================================================================

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub fpr: f64,
    pub tpr: f64,
    /// Scores ≥ this threshold are called positive; `None` for the origin.
    pub threshold: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    pub points: Vec<RocPoint>,
    pub auc: f64,
}

/// Trapezoidal area under a polyline of (fpr, tpr) points.
pub fn trapezoid_area(points: &[(f64, f64)]) -> f64 {
    points
        .windows(2)
        .map(|w| (w[1].0 - w[0].0) * (w[0].1 + w[1].1) / 2.0)
        .sum()
}

/// Sweep thresholds over the distinct scores in descending order. Tied
/// scores move the curve in one diagonal step.
pub fn roc(truth: &[bool], scores: &[f64]) -> Result<RocCurve> {
    check_lengths(truth, scores)?;
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::Parameter("scores must not be NaN".into()));
    }
    let pos = truth.iter().filter(|&&t| t).count();
    let neg = truth.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::SingleClass("AUC is undefined without both classes"));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut points = vec![RocPoint {
        fpr: 0.0,
        tpr: 0.0,
        threshold: None,
    }];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut k = 0;
    while k < order.len() {
        let threshold = scores[order[k]];
        while k < order.len() && scores[order[k]] == threshold {
            if truth[order[k]] {
                tp += 1;
            } else {
                fp += 1;
            }
            k += 1;
        }
        points.push(RocPoint {
            fpr: fp as f64 / neg as f64,
            tpr: tp as f64 / pos as f64,
            threshold: Some(threshold),
        });
    }
    let xy: Vec<(f64, f64)> = points.iter().map(|p| (p.fpr, p.tpr)).collect();
    Ok(RocCurve {
        auc: trapezoid_area(&xy),
        points,
    })
}

// ============================================================================
// Reliability
// ============================================================================

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReliabilityBin {
    pub lower: f64,
    pub upper: f64,
    pub count: usize,
    /// Absent for empty bins.
    pub mean_predicted: Option<f64>,
    pub fraction_positive: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReliabilityDiagram {
    pub bins: Vec<ReliabilityBin>,
}

impl ReliabilityDiagram {
    pub fn total(&self) -> usize {
        self.bins.iter().map(|b| b.count).sum()
    }

    /// Count-weighted mean |fraction positive − mean predicted| over bins.
    pub fn expected_calibration_error(&self) -> f64 {
        let n = self.total() as f64;
        self.bins
            .iter()
            .filter_map(|b| Some(b.count as f64 * (b.fraction_positive? - b.mean_predicted?).abs()))
            .sum::<f64>()
            / n
    }
}

/// Index of the equal-width bin holding `p`: bins are [a, b) except the last,
/// which also includes 1.
pub fn bin_index(p: f64, bins: usize) -> usize {
    ((p * bins as f64).floor() as usize).min(bins - 1)
}

pub fn reliability(truth: &[bool], probabilities: &[f64], bins: usize) -> Result<ReliabilityDiagram> {
    check_lengths(truth, probabilities)?;
    if bins < 2 {
        return Err(Error::Parameter(format!("need at least 2 bins, got {bins}")));
    }
    if let Some(&bad) = probabilities.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::ProbabilityRange(bad));
    }
    let mut sums = vec![0.0; bins];
    let mut positives = vec![0usize; bins];
    let mut counts = vec![0usize; bins];
    for (&t, &p) in truth.iter().zip(probabilities) {
        let b = bin_index(p, bins);
        sums[b] += p;
        positives[b] += usize::from(t);
        counts[b] += 1;
    }
    let bins = (0..bins)
        .map(|b| {
            let c = counts[b];
            ReliabilityBin {
                lower: b as f64 / bins as f64,
                upper: (b + 1) as f64 / bins as f64,
                count: c,
                mean_predicted: (c > 0).then(|| sums[b] / c as f64),
                fraction_positive: (c > 0).then(|| positives[b] as f64 / c as f64),
            }
        })
        .collect();
    Ok(ReliabilityDiagram { bins })
}

/// Map classifier scores to [0, 1]. SVM margins go through the logistic
/// function, an uncalibrated squashing; tree and forest scores already are
/// frequencies and pass through.
pub fn score_to_probability(kind: ModelKind, scores: &[f64]) -> Vec<f64> {
    match kind {
        ModelKind::Svm => scores.iter().map(|s| 1.0 / (1.0 + (-s).exp())).collect(),
        ModelKind::Tree | ModelKind::Forest => scores.to_vec(),
    }
}

pub fn probability_mapping(kind: ModelKind) -> &'static str {
    match kind {
        ModelKind::Svm => "logistic of the raw margin (uncalibrated)",
        ModelKind::Tree => "leaf class frequency",
        ModelKind::Forest => "fraction of trees voting clickbait",
    }
}

// ============================================================================
// Per-classifier evaluation
// ============================================================================

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierEvaluation {
    pub kind: ModelKind,
    /// Feature groups the classifier used, e.g. ["category_flags"].
    pub groups: Vec<String>,
    pub n: usize,
    pub confusion: ConfusionMatrix,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub roc: RocCurve,
    pub published_auc: f64,
    pub reliability: ReliabilityDiagram,
    pub probability_mapping: String,
}

/// Evaluate scores of one classifier against truth.
pub fn evaluate(
    kind: ModelKind,
    groups: Vec<String>,
    truth: &[bool],
    scores: &[f64],
    bins: usize,
) -> Result<ClassifierEvaluation> {
    let predicted: Vec<bool> = scores.iter().map(|&s| s >= kind.threshold()).collect();
    let confusion = confusion(truth, &predicted)?;
    let roc = roc(truth, scores)?;
    let reliability = reliability(truth, &score_to_probability(kind, scores), bins)?;
    Ok(ClassifierEvaluation {
        kind,
        groups,
        n: truth.len(),
        accuracy: confusion.accuracy(),
        precision: confusion.precision(),
        recall: confusion.recall(),
        f1: confusion.f1(),
        confusion,
        roc,
        published_auc: published_auc(kind),
        reliability,
        probability_mapping: probability_mapping(kind).to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn confusion_cases() {
        let truth: Vec<bool> = (0..10).map(|i| i < 6).collect();
        let m = confusion(&truth, &truth).unwrap();
        assert_eq!((m.tp, m.tn, m.fp, m.fn_), (6, 4, 0, 0));
        assert_eq!(m.accuracy(), 1.0);
        let m = confusion(&truth, &[false; 10]).unwrap();
        assert_eq!((m.tp, m.fn_, m.tn), (0, 6, 4));
        assert_eq!(m.recall(), 0.0);
        assert_eq!(m.precision(), 0.0);
        assert!(confusion(&truth, &truth[..3]).is_err());
    }

    #[test]
    fn roc_extremes() {
        let truth = [true, true, false, false];
        let r = roc(&truth, &[0.9, 0.8, 0.2, 0.1]).unwrap();
        assert_eq!(r.auc, 1.0);
        let r = roc(&truth, &[0.5; 4]).unwrap();
        assert_eq!(r.points.len(), 2);
        assert_eq!((r.points[1].fpr, r.points[1].tpr), (1.0, 1.0));
        assert_eq!(r.auc, 0.5);
        assert!(matches!(roc(&[true, true], &[0.1, 0.2]), Err(Error::SingleClass(_))));
    }

    #[test]
    fn roc_curve_is_monotone() {
        let truth = [true, false, true, true, false, false, true, false];
        let scores = [0.9, 0.9, 0.7, 0.4, 0.4, 0.3, 0.2, 0.1];
        let r = roc(&truth, &scores).unwrap();
        for w in r.points.windows(2) {
            assert!(w[1].fpr >= w[0].fpr && w[1].tpr >= w[0].tpr);
        }
        let last = r.points.last().unwrap();
        assert_eq!((last.fpr, last.tpr), (1.0, 1.0));
    }

    #[test]
    fn reliability_cases() {
        let truth: Vec<bool> = (0..10).map(|i| i % 2 == 0).collect();
        let d = reliability(&truth, &[0.9; 10], 10).unwrap();
        let filled: Vec<&ReliabilityBin> = d.bins.iter().filter(|b| b.count > 0).collect();
        assert_eq!(filled.len(), 1);
        assert!((filled[0].mean_predicted.unwrap() - 0.9).abs() < 1e-12);
        assert_eq!(filled[0].fraction_positive, Some(0.5));
        assert_eq!(bin_index(1.0, 10), 9);
        assert_eq!(bin_index(0.1, 10), 1);
        assert_eq!(bin_index(0.0, 10), 0);
        assert!(matches!(reliability(&truth, &[1.5; 10], 10), Err(Error::ProbabilityRange(_))));
        assert!(reliability(&truth, &[0.5; 10], 1).is_err());
    }

    #[test]
    fn probability_mapping_values() {
        assert_eq!(score_to_probability(ModelKind::Svm, &[0.0]), vec![0.5]);
        assert!((score_to_probability(ModelKind::Svm, &[4.0])[0] - 0.982).abs() < 1e-3);
        assert_eq!(score_to_probability(ModelKind::Forest, &[0.7]), vec![0.7]);
    }

    proptest::proptest! {
        #[test]
        fn monotone_transform_preserves_roc(
            data in proptest::collection::vec((proptest::bool::ANY, 0u8..20), 2..40)
        ) {
            let truth: Vec<bool> = data.iter().map(|d| d.0).collect();
            proptest::prop_assume!(truth.iter().any(|&t| t) && truth.iter().any(|&t| !t));
            let scores: Vec<f64> = data.iter().map(|d| f64::from(d.1)).collect();
            let transformed: Vec<f64> = scores.iter().map(|s| (s * 0.3).exp() - 7.0).collect();
            let a = roc(&truth, &scores).unwrap();
            let b = roc(&truth, &transformed).unwrap();
            proptest::prop_assert_eq!(a.auc, b.auc);
            let pa: Vec<(f64, f64)> = a.points.iter().map(|p| (p.fpr, p.tpr)).collect();
            let pb: Vec<(f64, f64)> = b.points.iter().map(|p| (p.fpr, p.tpr)).collect();
            proptest::prop_assert_eq!(pa, pb);
        }

        #[test]
        fn reliability_bins_partition(probs in proptest::collection::vec(0.0f64..=1.0, 1..60), bins in 2usize..15) {
            let truth: Vec<bool> = probs.iter().map(|p| *p > 0.4).collect();
            let d = reliability(&truth, &probs, bins).unwrap();
            proptest::prop_assert_eq!(d.total(), probs.len());
            for b in &d.bins {
                proptest::prop_assert_eq!(b.count == 0, b.mean_predicted.is_none());
            }
        }
    }
}
