//! Evaluation harness: stratified K-fold splits, confusion matrices, the
//! standard metric set, ROC/AUC by threshold sweep, cross-validation with
//! per-fold model fitting, and descriptive statistics for the report
//! plots. HGG is the positive class.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::classifiers::Classifier;
use crate::error::{Error, Result};
use crate::volume::Grade;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: usize,
    pub fn_: usize,
    pub fp: usize,
    pub tn: usize,
}

impl ConfusionMatrix {
    pub fn total(&self) -> usize {
        self.tp + self.fn_ + self.fp + self.tn
    }

    pub fn add(&mut self, other: &ConfusionMatrix) {
        self.tp += other.tp;
        self.fn_ += other.fn_;
        self.fp += other.fp;
        self.tn += other.tn;
    }
}

/// Tabulates predictions against truth with HGG as the positive class.
pub fn confusion(pred: &[Grade], truth: &[Grade]) -> Result<ConfusionMatrix> {
    if pred.len() != truth.len() || pred.is_empty() {
        return Err(Error::LengthMismatch(pred.len(), truth.len()));
    }
    let mut cm = ConfusionMatrix {
        tp: 0,
        fn_: 0,
        fp: 0,
        tn: 0,
    };
    for (p, t) in pred.iter().zip(truth) {
        match (t, p) {
            (Grade::Hgg, Grade::Hgg) => cm.tp += 1,
            (Grade::Hgg, Grade::Lgg) => cm.fn_ += 1,
            (Grade::Lgg, Grade::Hgg) => cm.fp += 1,
            (Grade::Lgg, Grade::Lgg) => cm.tn += 1,
        }
    }
    Ok(cm)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSet {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub specificity: f64,
    pub auc: f64,
    /// Metrics zeroed because their denominator was zero.
    pub undefined: Vec<String>,
}

/// Computes the metric set from a confusion matrix, optionally filling AUC
/// from scores. Zero-denominator ratios become 0 and are flagged.
pub fn metrics(cm: &ConfusionMatrix, scored: Option<(&[f64], &[Grade])>) -> Result<MetricSet> {
    let total = cm.total();
    if total == 0 {
        return Err(Error::TooFew { needed: 1, got: 0 });
    }
    let mut undefined = Vec::new();
    let mut ratio = |name: &str, num: usize, den: usize| {
        if den == 0 {
            undefined.push(name.to_string());
            0.0
        } else {
            num as f64 / den as f64
        }
    };
    let accuracy = (cm.tp + cm.tn) as f64 / total as f64;
    let precision = ratio("precision", cm.tp, cm.tp + cm.fp);
    let recall = ratio("recall", cm.tp, cm.tp + cm.fn_);
    let specificity = ratio("specificity", cm.tn, cm.tn + cm.fp);
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        undefined.push("f1".to_string());
        0.0
    };
    let auc = match scored {
        Some((scores, truth)) => match roc_auc(scores, truth) {
            Ok((_, auc)) => auc,
            Err(_) => {
                undefined.push("auc".to_string());
                0.0
            }
        },
        None => {
            undefined.push("auc".to_string());
            0.0
        }
    };
    Ok(MetricSet {
        accuracy,
        precision,
        recall,
        f1,
        specificity,
        auc,
        undefined,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub fpr: f64,
    pub tpr: f64,
    pub threshold: f64,
}

/// Threshold sweep over the unique scores (ties grouped into one step),
/// plus the trapezoidal AUC.
pub fn roc_auc(scores: &[f64], truth: &[Grade]) -> Result<(Vec<RocPoint>, f64)> {
    if scores.len() != truth.len() {
        return Err(Error::LengthMismatch(scores.len(), truth.len()));
    }
    let pos = truth.iter().filter(|&&g| g == Grade::Hgg).count();
    let neg = truth.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::OneClassOnly);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).unwrap().then(a.cmp(&b)));

    // origin threshold sits one unit above the top score (kept finite so
    // reports serialize round-trip)
    let top = scores[order[0]];
    let mut points = vec![RocPoint {
        fpr: 0.0,
        tpr: 0.0,
        threshold: top + 1.0,
    }];
    // trapezoid area accumulated in integer units (2 * pos * neg * area),
    // divided once at the end, so the result is exactly the Mann-Whitney
    // pairwise concordance
    let mut area2 = 0u64;
    let (mut tp, mut fp) = (0u64, 0u64);
    let mut idx = 0;
    while idx < order.len() {
        let score = scores[order[idx]];
        let (tp_prev, fp_prev) = (tp, fp);
        // absorb the whole tie group in one step
        while idx < order.len() && scores[order[idx]] == score {
            if truth[order[idx]] == Grade::Hgg {
                tp += 1;
            } else {
                fp += 1;
            }
            idx += 1;
        }
        area2 += (fp - fp_prev) * (tp + tp_prev);
        points.push(RocPoint {
            fpr: fp as f64 / neg as f64,
            tpr: tp as f64 / pos as f64,
            threshold: score,
        });
    }
    let auc = area2 as f64 / (2 * pos as u64 * neg as u64) as f64;
    Ok((points, auc))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Folds {
    /// Row indices per fold; a partition of 0..n.
    pub assignments: Vec<Vec<usize>>,
}

/// Seeded per-class shuffle followed by round-robin assignment, so each
/// fold's class counts deviate from exact proportionality by at most one.
pub fn stratified_kfold(labels: &[Grade], k: usize, seed: u64) -> Result<Folds> {
    if k < 2 {
        return Err(Error::InvalidConfig(format!("k must be >= 2, got {k}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignments = vec![Vec::new(); k];
    for class in [Grade::Hgg, Grade::Lgg] {
        let mut idx: Vec<usize> = labels
            .iter()
            .enumerate()
            .filter_map(|(i, &g)| (g == class).then_some(i))
            .collect();
        if idx.len() < k {
            return Err(Error::ClassTooSmall { size: idx.len(), k });
        }
        idx.shuffle(&mut rng);
        for (pos, row) in idx.into_iter().enumerate() {
            assignments[pos % k].push(row);
        }
    }
    for fold in assignments.iter_mut() {
        fold.sort_unstable();
    }
    Ok(Folds { assignments })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FoldResult {
    pub fold: usize,
    pub confusion: ConfusionMatrix,
    pub metrics: MetricSet,
    pub test_rows: Vec<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CvReport {
    pub folds: Vec<FoldResult>,
    /// Field-wise mean of the fold metrics.
    pub mean: MetricSet,
    pub pooled_confusion: ConfusionMatrix,
    pub pooled_roc: Vec<RocPoint>,
    pub pooled_auc: f64,
    pub k: usize,
    pub seed: u64,
}

fn mean_metrics(folds: &[FoldResult]) -> MetricSet {
    let n = folds.len() as f64;
    let avg = |get: fn(&MetricSet) -> f64| folds.iter().map(|f| get(&f.metrics)).sum::<f64>() / n;
    MetricSet {
        accuracy: avg(|m| m.accuracy),
        precision: avg(|m| m.precision),
        recall: avg(|m| m.recall),
        f1: avg(|m| m.f1),
        specificity: avg(|m| m.specificity),
        auc: avg(|m| m.auc),
        undefined: folds
            .iter()
            .flat_map(|f| f.metrics.undefined.iter().cloned())
            .collect::<std::collections::BTreeSet<_>>()
            .into_iter()
            .collect(),
    }
}

/// Stratified K-fold cross-validation. `fit` sees only the training rows of
/// each fold (any inner reduction such as PCA must happen inside it); the
/// held-out rows are scored with the returned model.
pub fn cross_validate<M, F>(
    x: &[Vec<f64>],
    y: &[Grade],
    k: usize,
    seed: u64,
    fit: F,
) -> Result<CvReport>
where
    M: Classifier,
    F: Fn(&[Vec<f64>], &[Grade]) -> Result<M>,
{
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(x.len(), y.len()));
    }
    let folds = stratified_kfold(y, k, seed)?;
    let mut results = Vec::with_capacity(k);
    let mut pooled_scores = Vec::new();
    let mut pooled_truth = Vec::new();
    let mut pooled_cm = ConfusionMatrix {
        tp: 0,
        fn_: 0,
        fp: 0,
        tn: 0,
    };
    for (fold_idx, test_rows) in folds.assignments.iter().enumerate() {
        let in_test: std::collections::BTreeSet<usize> = test_rows.iter().copied().collect();
        let train_x: Vec<Vec<f64>> = x
            .iter()
            .enumerate()
            .filter(|(i, _)| !in_test.contains(i))
            .map(|(_, r)| r.clone())
            .collect();
        let train_y: Vec<Grade> = y
            .iter()
            .enumerate()
            .filter_map(|(i, &g)| (!in_test.contains(&i)).then_some(g))
            .collect();
        let model = fit(&train_x, &train_y)?;

        let mut scores = Vec::with_capacity(test_rows.len());
        let mut pred = Vec::with_capacity(test_rows.len());
        let mut truth = Vec::with_capacity(test_rows.len());
        for &row in test_rows {
            let p = model.predict_proba(&x[row])?;
            scores.push(p);
            pred.push(if p >= 0.5 { Grade::Hgg } else { Grade::Lgg });
            truth.push(y[row]);
        }
        let cm = confusion(&pred, &truth)?;
        pooled_cm.add(&cm);
        let m = metrics(&cm, Some((&scores, &truth)))?;
        pooled_scores.extend(scores);
        pooled_truth.extend(truth);
        results.push(FoldResult {
            fold: fold_idx,
            confusion: cm,
            metrics: m,
            test_rows: test_rows.clone(),
        });
    }
    let (pooled_roc, pooled_auc) = roc_auc(&pooled_scores, &pooled_truth)?;
    Ok(CvReport {
        mean: mean_metrics(&results),
        folds: results,
        pooled_confusion: pooled_cm,
        pooled_roc,
        pooled_auc,
        k,
        seed,
    })
}

/// Product-moment correlation; errors on zero variance.
pub fn pearson_r(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 2 {
        return Err(Error::TooFew {
            needed: 2,
            got: x.len(),
        });
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (&a, &b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::ZeroVariance);
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DescriptiveStats {
    pub mean: f64,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub iqr: f64,
    /// Adjusted Fisher-Pearson sample skewness (0 when n < 3 or variance 0).
    pub skewness: f64,
    /// Whisker ends: most extreme values within 1.5 IQR of the quartiles.
    pub whisker_low: f64,
    pub whisker_high: f64,
    pub outliers: Vec<f64>,
}

/// Box-plot style summary with linear-interpolation quartiles and Tukey
/// whiskers.
pub fn descriptive_stats(values: &[f64]) -> Result<DescriptiveStats> {
    if values.len() < 2 {
        return Err(Error::TooFew {
            needed: 2,
            got: values.len(),
        });
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len() as f64;
    let pct = |q: f64| {
        let h = (n - 1.0) * q;
        let lo = h.floor() as usize;
        let frac = h - lo as f64;
        if lo + 1 < sorted.len() {
            sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
        } else {
            sorted[sorted.len() - 1]
        }
    };
    let q1 = pct(0.25);
    let median = pct(0.5);
    let q3 = pct(0.75);
    let iqr = q3 - q1;
    let mean = sorted.iter().sum::<f64>() / n;
    let m2 = sorted.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let m3 = sorted.iter().map(|v| (v - mean).powi(3)).sum::<f64>() / n;
    let skewness = if m2 > 0.0 && sorted.len() >= 3 {
        (m3 / m2.powf(1.5)) * (n * (n - 1.0)).sqrt() / (n - 2.0)
    } else {
        0.0
    };
    let lo_fence = q1 - 1.5 * iqr;
    let hi_fence = q3 + 1.5 * iqr;
    let whisker_low = sorted
        .iter()
        .copied()
        .find(|&v| v >= lo_fence)
        .unwrap_or(sorted[0]);
    let whisker_high = sorted
        .iter()
        .rev()
        .copied()
        .find(|&v| v <= hi_fence)
        .unwrap_or(sorted[sorted.len() - 1]);
    let outliers = sorted
        .iter()
        .copied()
        .filter(|&v| v < lo_fence || v > hi_fence)
        .collect();
    Ok(DescriptiveStats {
        mean,
        median,
        q1,
        q3,
        iqr,
        skewness,
        whisker_low,
        whisker_high,
        outliers,
    })
}
