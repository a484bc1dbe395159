//! Gray-level co-occurrence features.
//!
//! Symmetric co-occurrence counts are built per direction at Chebyshev
//! distance 1 (13 unique 3-D directions); each direction's matrix is
//! normalized and the feature values are averaged over the directions that
//! produced at least one pair. Degenerate cases (single gray level, or a
//! mask with no adjacent voxel pairs) fall back to the diagonal
//! distribution, which makes Contrast 0, JointEnergy 1 on a constant ROI,
//! and fixes Correlation = 1, IMC1 = IMC2 = 0, MCC = 1.

use crate::linalg::eigen_symmetric;

use super::{entropy_term, DiscretizedRoi, DIRECTIONS_13};

pub const NAMES: [&str; 24] = [
    "Autocorrelation",
    "ClusterProminence",
    "ClusterShade",
    "ClusterTendency",
    "Contrast",
    "Correlation",
    "DifferenceAverage",
    "DifferenceEntropy",
    "DifferenceVariance",
    "Id",
    "Idm",
    "Idmn",
    "Idn",
    "Imc1",
    "Imc2",
    "InverseVariance",
    "JointAverage",
    "JointEnergy",
    "JointEntropy",
    "Mcc",
    "MaximumProbability",
    "SumAverage",
    "SumEntropy",
    "SumSquares",
];

/// Symmetric co-occurrence counts for one direction; `None` when the mask
/// holds no voxel pair along it.
pub fn direction_matrix(d: &DiscretizedRoi, dir: (i64, i64, i64)) -> Option<Vec<Vec<f64>>> {
    let (nx, ny, nz) = d.dims;
    let ng = d.ng;
    let mut cells = vec![vec![0.0; ng]; ng];
    let mut total = 0.0;
    for z in 0..nz {
        for y in 0..ny {
            for x in 0..nx {
                let a = d.label(x, y, z);
                if a == 0 {
                    continue;
                }
                let (qx, qy, qz) = (x as i64 + dir.0, y as i64 + dir.1, z as i64 + dir.2);
                if qx < 0 || qy < 0 || qz < 0 {
                    continue;
                }
                let (qx, qy, qz) = (qx as usize, qy as usize, qz as usize);
                if qx >= nx || qy >= ny || qz >= nz {
                    continue;
                }
                let b = d.label(qx, qy, qz);
                if b == 0 {
                    continue;
                }
                cells[(a - 1) as usize][(b - 1) as usize] += 1.0;
                cells[(b - 1) as usize][(a - 1) as usize] += 1.0;
                total += 2.0;
            }
        }
    }
    (total > 0.0).then_some(cells)
}

fn normalize(cells: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let total: f64 = cells.iter().flat_map(|r| r.iter()).sum();
    cells
        .iter()
        .map(|r| r.iter().map(|&c| c / total).collect())
        .collect()
}

// Second-largest |eigenvalue| of S = D^-1/2 P D^-1/2 restricted to occupied
// levels; the eigenvalues of the MCC matrix Q are the squares of S's, so
// this equals sqrt(second-largest eigenvalue of Q).
fn mcc(p: &[Vec<f64>], px: &[f64]) -> f64 {
    let occupied: Vec<usize> = (0..px.len()).filter(|&i| px[i] > 0.0).collect();
    if occupied.len() <= 1 {
        return 1.0;
    }
    let m = occupied.len();
    let mut s = vec![vec![0.0; m]; m];
    for (si, &i) in occupied.iter().enumerate() {
        for (sj, &j) in occupied.iter().enumerate() {
            s[si][sj] = p[i][j] / (px[i] * px[j]).sqrt();
        }
    }
    let eig = eigen_symmetric(&s);
    let mut mags: Vec<f64> = eig.values.iter().map(|v| v.abs()).collect();
    mags.sort_by(|a, b| b.partial_cmp(a).unwrap());
    mags[1].min(1.0)
}

/// Feature values of one normalized symmetric matrix.
pub fn matrix_features(p: &[Vec<f64>]) -> Vec<f64> {
    let ng = p.len();
    let level = |i: usize| (i + 1) as f64;

    let mut px = vec![0.0; ng];
    for i in 0..ng {
        for j in 0..ng {
            px[i] += p[i][j];
        }
    }
    let mu: f64 = (0..ng).map(|i| level(i) * px[i]).sum();
    let sigma2: f64 = (0..ng).map(|i| (level(i) - mu).powi(2) * px[i]).sum();

    // p_{x+y}(k), k = 2..=2ng and p_{x-y}(k), k = 0..ng
    let mut psum = vec![0.0; 2 * ng + 1];
    let mut pdiff = vec![0.0; ng];
    for i in 0..ng {
        for j in 0..ng {
            psum[i + j + 2] += p[i][j];
            pdiff[i.abs_diff(j)] += p[i][j];
        }
    }

    let mut autocorrelation = 0.0;
    let mut contrast = 0.0;
    let mut cluster2 = 0.0;
    let mut cluster3 = 0.0;
    let mut cluster4 = 0.0;
    let mut id = 0.0;
    let mut idm = 0.0;
    let mut idmn = 0.0;
    let mut idn = 0.0;
    let mut joint_energy = 0.0;
    let mut joint_entropy = 0.0;
    let mut max_prob = 0.0f64;
    let mut sum_squares = 0.0;
    let mut hxy1 = 0.0;
    for i in 0..ng {
        for j in 0..ng {
            let pij = p[i][j];
            let (li, lj) = (level(i), level(j));
            let diff = li - lj;
            autocorrelation += pij * li * lj;
            contrast += pij * diff * diff;
            let dev = li + lj - 2.0 * mu;
            cluster2 += pij * dev * dev;
            cluster3 += pij * dev * dev * dev;
            cluster4 += pij * dev * dev * dev * dev;
            id += pij / (1.0 + diff.abs());
            idm += pij / (1.0 + diff * diff);
            idmn += pij / (1.0 + diff * diff / (ng * ng) as f64);
            idn += pij / (1.0 + diff.abs() / ng as f64);
            joint_energy += pij * pij;
            joint_entropy += entropy_term(pij);
            max_prob = max_prob.max(pij);
            sum_squares += pij * (li - mu).powi(2);
            if pij > 0.0 && px[i] > 0.0 && px[j] > 0.0 {
                hxy1 -= pij * (px[i] * px[j]).log2();
            }
        }
    }

    let correlation = if sigma2 > 1e-15 {
        (autocorrelation - mu * mu) / sigma2
    } else {
        1.0
    };

    let diff_avg: f64 = pdiff.iter().enumerate().map(|(k, &q)| k as f64 * q).sum();
    let diff_entropy: f64 = pdiff.iter().map(|&q| entropy_term(q)).sum();
    let diff_var: f64 = pdiff
        .iter()
        .enumerate()
        .map(|(k, &q)| (k as f64 - diff_avg).powi(2) * q)
        .sum();
    let inverse_variance: f64 = pdiff
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, &q)| q / (k * k) as f64)
        .sum();

    let sum_avg: f64 = psum.iter().enumerate().map(|(k, &q)| k as f64 * q).sum();
    let sum_entropy: f64 = psum.iter().map(|&q| entropy_term(q)).sum();

    let hx: f64 = px.iter().map(|&q| entropy_term(q)).sum();
    let mut hxy2 = 0.0;
    for i in 0..ng {
        for j in 0..ng {
            let q = px[i] * px[j];
            hxy2 += entropy_term(q);
        }
    }
    let imc1 = if hx > 0.0 {
        (joint_entropy - hxy1) / hx
    } else {
        0.0
    };
    let imc2 = (1.0 - (-2.0 * (hxy2 - joint_entropy)).exp()).max(0.0).sqrt();

    vec![
        autocorrelation,
        cluster4,
        cluster3,
        cluster2,
        contrast,
        correlation,
        diff_avg,
        diff_entropy,
        diff_var,
        id,
        idm,
        idmn,
        idn,
        imc1,
        imc2,
        inverse_variance,
        mu,
        joint_energy,
        joint_entropy,
        mcc(p, &px),
        max_prob,
        sum_avg,
        sum_entropy,
        sum_squares,
    ]
}

/// Direction-averaged GLCM feature set.
pub fn compute(d: &DiscretizedRoi) -> Vec<f64> {
    let mut acc = vec![0.0; NAMES.len()];
    let mut used = 0usize;
    for dir in DIRECTIONS_13 {
        if let Some(cells) = direction_matrix(d, dir) {
            let feats = matrix_features(&normalize(&cells));
            for (a, f) in acc.iter_mut().zip(feats) {
                *a += f;
            }
            used += 1;
        }
    }
    if used == 0 {
        // no adjacent pairs at all (isolated voxels): fall back to the
        // diagonal distribution of the level histogram
        let hist = d.histogram();
        let total = d.n_voxels as f64;
        let mut p = vec![vec![0.0; d.ng]; d.ng];
        for (i, &c) in hist.iter().enumerate() {
            p[i][i] = c as f64 / total;
        }
        return matrix_features(&p);
    }
    for a in acc.iter_mut() {
        *a /= used as f64;
    }
    acc
}
