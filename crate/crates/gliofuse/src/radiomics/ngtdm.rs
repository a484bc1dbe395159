//! Neighboring gray-tone difference features (Amadasun-King).
//!
//! For each present level i: n_i is its voxel count, p_i = n_i / Nv, and
//! s_i sums |i - A| over its voxels, where A is the mean level of the
//! voxel's in-mask 26-neighbors (voxels with no in-mask neighbor contribute
//! nothing to s_i). Degenerate denominators: Coarseness is pinned to 1e6
//! when sum(p_i s_i) = 0, Busyness and Strength fall to 0.

use super::{neighborhood_26, DiscretizedRoi};

pub const NAMES: [&str; 5] = ["Busyness", "Coarseness", "Complexity", "Contrast", "Strength"];

pub const COARSENESS_CAP: f64 = 1e6;

/// Per-level columns (n_i, p_i, s_i), indexed by label - 1.
pub fn tone_table(d: &DiscretizedRoi) -> Vec<(f64, f64, f64)> {
    let (nx, ny, nz) = d.dims;
    let offsets = neighborhood_26();
    let mut n = vec![0.0f64; d.ng];
    let mut s = vec![0.0f64; d.ng];
    for z in 0..nz {
        for y in 0..ny {
            for x in 0..nx {
                let a = d.label(x, y, z);
                if a == 0 {
                    continue;
                }
                n[(a - 1) as usize] += 1.0;
                let mut sum = 0.0;
                let mut cnt = 0usize;
                for &(dx, dy, dz) in &offsets {
                    let (qx, qy, qz) = (x as i64 + dx, y as i64 + dy, z as i64 + dz);
                    if qx < 0 || qy < 0 || qz < 0 {
                        continue;
                    }
                    let (qx, qy, qz) = (qx as usize, qy as usize, qz as usize);
                    if qx >= nx || qy >= ny || qz >= nz {
                        continue;
                    }
                    let b = d.label(qx, qy, qz);
                    if b > 0 {
                        sum += b as f64;
                        cnt += 1;
                    }
                }
                if cnt > 0 {
                    s[(a - 1) as usize] += (a as f64 - sum / cnt as f64).abs();
                }
            }
        }
    }
    let nv = d.n_voxels as f64;
    n.iter()
        .zip(&s)
        .map(|(&ni, &si)| (ni, ni / nv, si))
        .collect()
}

/// The five features from the per-level table.
pub fn table_features(table: &[(f64, f64, f64)], nv: usize) -> Vec<f64> {
    let present: Vec<(f64, f64, f64)> = table
        .iter()
        .enumerate()
        .filter(|(_, &(n, _, _))| n > 0.0)
        .map(|(i, &(_, p, s))| ((i + 1) as f64, p, s))
        .collect();
    let ngp = present.len() as f64;
    let nv = nv as f64;

    let sum_ps: f64 = present.iter().map(|&(_, p, s)| p * s).sum();
    let sum_s: f64 = present.iter().map(|&(_, _, s)| s).sum();

    let coarseness = if sum_ps == 0.0 { COARSENESS_CAP } else { 1.0 / sum_ps };

    let mut contrast = 0.0;
    let mut busyness_den = 0.0;
    let mut complexity = 0.0;
    let mut strength_num = 0.0;
    for &(i, pi, si) in &present {
        for &(j, pj, sj) in &present {
            let diff = i - j;
            contrast += pi * pj * diff * diff;
            busyness_den += (i * pi - j * pj).abs();
            complexity += diff.abs() * (pi * si + pj * sj) / (pi + pj);
            strength_num += (pi + pj) * diff * diff;
        }
    }
    let contrast = if ngp > 1.0 {
        contrast / (ngp * (ngp - 1.0)) * (sum_s / nv)
    } else {
        0.0
    };
    let busyness = if busyness_den == 0.0 { 0.0 } else { sum_ps / busyness_den };
    let complexity = complexity / nv;
    let strength = if sum_s == 0.0 { 0.0 } else { strength_num / sum_s };

    vec![busyness, coarseness, complexity, contrast, strength]
}

pub fn compute(d: &DiscretizedRoi) -> Vec<f64> {
    table_features(&tone_table(d), d.n_voxels)
}
