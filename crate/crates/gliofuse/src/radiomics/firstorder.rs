//! First-order intensity statistics over the masked voxels.
//!
//! Entropy and Uniformity read the discretized histogram; everything else
//! works on the raw intensities. Percentiles interpolate linearly between
//! order statistics. Skewness is plain Fisher-Pearson and Kurtosis is
//! non-excess; both are defined as 0 when the variance vanishes.

use crate::roi::MaskedVolume;

use super::{entropy_term, DiscretizedRoi};

pub const NAMES: [&str; 18] = [
    "10Percentile",
    "90Percentile",
    "Energy",
    "Entropy",
    "InterquartileRange",
    "Kurtosis",
    "Maximum",
    "Mean",
    "MeanAbsoluteDeviation",
    "Median",
    "Minimum",
    "Range",
    "RobustMeanAbsoluteDeviation",
    "RootMeanSquared",
    "Skewness",
    "TotalEnergy",
    "Uniformity",
    "Variance",
];

/// Linear-interpolation percentile of an ascending-sorted slice, q in [0,1].
pub fn percentile_sorted(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * q;
    let lo = h.floor() as usize;
    let frac = h - lo as f64;
    if lo + 1 < n {
        sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
    } else {
        sorted[n - 1]
    }
}

pub fn compute(mv: &MaskedVolume, d: &DiscretizedRoi) -> Vec<f64> {
    let values = mv.values();
    let n = values.len() as f64;
    let mut sorted = values.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let minimum = sorted[0];
    let maximum = sorted[sorted.len() - 1];
    let mean = values.iter().sum::<f64>() / n;
    let energy: f64 = values.iter().map(|v| v * v).sum();
    let m2 = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let m3 = values.iter().map(|v| (v - mean).powi(3)).sum::<f64>() / n;
    let m4 = values.iter().map(|v| (v - mean).powi(4)).sum::<f64>() / n;
    let (skewness, kurtosis) = if m2 > 0.0 {
        (m3 / m2.powf(1.5), m4 / (m2 * m2))
    } else {
        (0.0, 0.0)
    };

    let p10 = percentile_sorted(&sorted, 0.10);
    let p25 = percentile_sorted(&sorted, 0.25);
    let median = percentile_sorted(&sorted, 0.50);
    let p75 = percentile_sorted(&sorted, 0.75);
    let p90 = percentile_sorted(&sorted, 0.90);

    let mad = values.iter().map(|v| (v - mean).abs()).sum::<f64>() / n;
    let band: Vec<f64> = values
        .iter()
        .copied()
        .filter(|&v| v >= p10 && v <= p90)
        .collect();
    let rmad = if band.is_empty() {
        0.0
    } else {
        let bm = band.iter().sum::<f64>() / band.len() as f64;
        band.iter().map(|v| (v - bm).abs()).sum::<f64>() / band.len() as f64
    };

    let hist = d.histogram();
    let total = d.n_voxels as f64;
    let mut entropy = 0.0;
    let mut uniformity = 0.0;
    for &c in &hist {
        let p = c as f64 / total;
        entropy += entropy_term(p);
        uniformity += p * p;
    }

    let voxel_volume = d.spacing.0 * d.spacing.1 * d.spacing.2;

    vec![
        p10,
        p90,
        energy,
        entropy,
        p75 - p25,
        kurtosis,
        maximum,
        mean,
        mad,
        median,
        minimum,
        maximum - minimum,
        rmad,
        (energy / n).sqrt(),
        skewness,
        energy * voxel_volume,
        uniformity,
        m2,
    ]
}
