//! Gray-level run-length features.
//!
//! Runs are maximal colinear sequences of equal-level mask voxels. Matrices
//! are built per direction (13 unique 3-D directions) and feature values are
//! averaged over directions; every direction has at least one run for a
//! nonempty mask, so no direction is skipped.

use super::{entropy_term, DiscretizedRoi, DIRECTIONS_13};

pub const NAMES: [&str; 16] = [
    "GrayLevelNonUniformity",
    "GrayLevelNonUniformityNormalized",
    "GrayLevelVariance",
    "HighGrayLevelRunEmphasis",
    "LongRunEmphasis",
    "LongRunHighGrayLevelEmphasis",
    "LongRunLowGrayLevelEmphasis",
    "LowGrayLevelRunEmphasis",
    "RunEntropy",
    "RunLengthNonUniformity",
    "RunLengthNonUniformityNormalized",
    "RunPercentage",
    "RunVariance",
    "ShortRunEmphasis",
    "ShortRunHighGrayLevelEmphasis",
    "ShortRunLowGrayLevelEmphasis",
];

#[inline]
fn label_at(d: &DiscretizedRoi, x: i64, y: i64, z: i64) -> u32 {
    let (nx, ny, nz) = d.dims;
    if x < 0 || y < 0 || z < 0 || x as usize >= nx || y as usize >= ny || z as usize >= nz {
        0
    } else {
        d.label(x as usize, y as usize, z as usize)
    }
}

/// Run-length counts for one direction: rows are gray levels 1..=ng,
/// columns are run lengths 1..=max observed.
pub fn direction_matrix(d: &DiscretizedRoi, dir: (i64, i64, i64)) -> Vec<Vec<f64>> {
    let (nx, ny, nz) = d.dims;
    let mut runs: Vec<(u32, usize)> = Vec::new();
    let mut max_len = 1usize;
    for z in 0..nz as i64 {
        for y in 0..ny as i64 {
            for x in 0..nx as i64 {
                let a = label_at(d, x, y, z);
                if a == 0 {
                    continue;
                }
                // run starts where the previous voxel along dir differs
                if label_at(d, x - dir.0, y - dir.1, z - dir.2) == a {
                    continue;
                }
                let mut len = 1usize;
                let (mut qx, mut qy, mut qz) = (x + dir.0, y + dir.1, z + dir.2);
                while label_at(d, qx, qy, qz) == a {
                    len += 1;
                    qx += dir.0;
                    qy += dir.1;
                    qz += dir.2;
                }
                max_len = max_len.max(len);
                runs.push((a, len));
            }
        }
    }
    let mut cells = vec![vec![0.0; max_len]; d.ng];
    for (level, len) in runs {
        cells[(level - 1) as usize][len - 1] += 1.0;
    }
    cells
}

/// Features of one run-length matrix; `np` is the mask voxel count.
pub fn matrix_features(cells: &[Vec<f64>], np: usize) -> Vec<f64> {
    let nr: f64 = cells.iter().flat_map(|r| r.iter()).sum();
    let nl = cells.first().map(|r| r.len()).unwrap_or(0);

    let mut mu_i = 0.0;
    let mut mu_l = 0.0;
    let mut entropy = 0.0;
    for (i, row) in cells.iter().enumerate() {
        for (j, &c) in row.iter().enumerate() {
            let p = c / nr;
            mu_i += p * (i + 1) as f64;
            mu_l += p * (j + 1) as f64;
            entropy += entropy_term(p);
        }
    }

    let mut sre = 0.0;
    let mut lre = 0.0;
    let mut lglre = 0.0;
    let mut hglre = 0.0;
    let mut srlgle = 0.0;
    let mut srhgle = 0.0;
    let mut lrlgle = 0.0;
    let mut lrhgle = 0.0;
    let mut gl_var = 0.0;
    let mut run_var = 0.0;
    for (i, row) in cells.iter().enumerate() {
        let li = (i + 1) as f64;
        for (j, &c) in row.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            let p = c / nr;
            let l = (j + 1) as f64;
            sre += p / (l * l);
            lre += p * l * l;
            lglre += p / (li * li);
            hglre += p * li * li;
            srlgle += p / (li * li * l * l);
            srhgle += p * li * li / (l * l);
            lrlgle += p * l * l / (li * li);
            lrhgle += p * li * li * l * l;
            gl_var += p * (li - mu_i).powi(2);
            run_var += p * (l - mu_l).powi(2);
        }
    }

    let mut gln = 0.0;
    for row in cells {
        let ri: f64 = row.iter().sum();
        gln += ri * ri;
    }
    let glnn = gln / (nr * nr);
    let gln = gln / nr;

    let mut rln = 0.0;
    for j in 0..nl {
        let cj: f64 = cells.iter().map(|row| row[j]).sum();
        rln += cj * cj;
    }
    let rlnn = rln / (nr * nr);
    let rln = rln / nr;

    vec![
        gln,
        glnn,
        gl_var,
        hglre,
        lre,
        lrhgle,
        lrlgle,
        lglre,
        entropy,
        rln,
        rlnn,
        nr / np as f64,
        run_var,
        sre,
        srhgle,
        srlgle,
    ]
}

/// Direction-averaged GLRLM feature set.
pub fn compute(d: &DiscretizedRoi) -> Vec<f64> {
    let mut acc = vec![0.0; NAMES.len()];
    for dir in DIRECTIONS_13 {
        let feats = matrix_features(&direction_matrix(d, dir), d.n_voxels);
        for (a, f) in acc.iter_mut().zip(feats) {
            *a += f;
        }
    }
    for a in acc.iter_mut() {
        *a /= DIRECTIONS_13.len() as f64;
    }
    acc
}
