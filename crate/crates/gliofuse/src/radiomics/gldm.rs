//! Gray-level dependence features.
//!
//! Cell (i, j) of the dependence matrix counts mask voxels of level i whose
//! 26-neighborhood contains exactly j dependent neighbors (equal level,
//! similarity threshold 0). Feature formulas weight by the dependence size
//! j + 1, which counts the center voxel and keeps every emphasis finite for
//! isolated voxels.

use super::{entropy_term, neighborhood_26, DiscretizedRoi};

pub const NAMES: [&str; 14] = [
    "DependenceEntropy",
    "DependenceNonUniformity",
    "DependenceNonUniformityNormalized",
    "DependenceVariance",
    "GrayLevelNonUniformity",
    "GrayLevelVariance",
    "HighGrayLevelEmphasis",
    "LargeDependenceEmphasis",
    "LargeDependenceHighGrayLevelEmphasis",
    "LargeDependenceLowGrayLevelEmphasis",
    "LowGrayLevelEmphasis",
    "SmallDependenceEmphasis",
    "SmallDependenceHighGrayLevelEmphasis",
    "SmallDependenceLowGrayLevelEmphasis",
];

/// Dependence counts: rows are gray levels 1..=ng, columns are dependent
/// neighbor counts 0..=26.
pub fn dependence_matrix(d: &DiscretizedRoi) -> Vec<Vec<f64>> {
    let (nx, ny, nz) = d.dims;
    let offsets = neighborhood_26();
    let mut cells = vec![vec![0.0; 27]; d.ng];
    for z in 0..nz {
        for y in 0..ny {
            for x in 0..nx {
                let a = d.label(x, y, z);
                if a == 0 {
                    continue;
                }
                let mut dep = 0usize;
                for &(dx, dy, dz) in &offsets {
                    let (qx, qy, qz) = (x as i64 + dx, y as i64 + dy, z as i64 + dz);
                    if qx < 0 || qy < 0 || qz < 0 {
                        continue;
                    }
                    let (qx, qy, qz) = (qx as usize, qy as usize, qz as usize);
                    if qx >= nx || qy >= ny || qz >= nz {
                        continue;
                    }
                    if d.label(qx, qy, qz) == a {
                        dep += 1;
                    }
                }
                cells[(a - 1) as usize][dep] += 1.0;
            }
        }
    }
    cells
}

/// Features of a dependence count matrix.
pub fn matrix_features(cells: &[Vec<f64>]) -> Vec<f64> {
    let nz: f64 = cells.iter().flat_map(|r| r.iter()).sum();
    let ng = cells.len();
    let nd = cells.first().map(|r| r.len()).unwrap_or(0);

    let mut entropy = 0.0;
    let mut gl_var = 0.0;
    let mut dep_var = 0.0;
    let mut mu_i = 0.0;
    let mut mu_s = 0.0;
    for (i, row) in cells.iter().enumerate() {
        for (j, &c) in row.iter().enumerate() {
            let p = c / nz;
            mu_i += p * (i + 1) as f64;
            mu_s += p * (j + 1) as f64;
            entropy += entropy_term(p);
        }
    }

    let mut sde = 0.0;
    let mut lde = 0.0;
    let mut lgle = 0.0;
    let mut hgle = 0.0;
    let mut sdlgle = 0.0;
    let mut sdhgle = 0.0;
    let mut ldlgle = 0.0;
    let mut ldhgle = 0.0;
    for (i, row) in cells.iter().enumerate() {
        let li = (i + 1) as f64;
        for (j, &c) in row.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            let p = c / nz;
            let s = (j + 1) as f64;
            sde += p / (s * s);
            lde += p * s * s;
            lgle += p / (li * li);
            hgle += p * li * li;
            sdlgle += p / (li * li * s * s);
            sdhgle += p * li * li / (s * s);
            ldlgle += p * s * s / (li * li);
            ldhgle += p * li * li * s * s;
            gl_var += p * (li - mu_i).powi(2);
            dep_var += p * (s - mu_s).powi(2);
        }
    }

    let mut gln = 0.0;
    for row in cells {
        let ri: f64 = row.iter().sum();
        gln += ri * ri;
    }
    gln /= nz;

    let mut dnn = 0.0;
    for j in 0..nd {
        let cj: f64 = (0..ng).map(|i| cells[i][j]).sum();
        dnn += cj * cj;
    }
    let dn = dnn / nz;
    let dnn = dnn / (nz * nz);

    vec![
        entropy, dn, dnn, dep_var, gln, gl_var, hgle, lde, ldhgle, ldlgle, lgle, sde, sdhgle,
        sdlgle,
    ]
}

pub fn compute(d: &DiscretizedRoi) -> Vec<f64> {
    matrix_features(&dependence_matrix(d))
}
