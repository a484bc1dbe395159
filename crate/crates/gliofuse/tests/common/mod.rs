#![allow(clippy::needless_range_loop)]

//! Shared test support: brute-force oracles kept independent of the library
//! implementation paths they check, plus random-input generators.

#![allow(dead_code)]

use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use gliofuse::radiomics::DiscretizedRoi;
use gliofuse::roi::Mask;
use gliofuse::volume::Volume;

pub type Named = BTreeMap<&'static str, f64>;

// ---------------------------------------------------------------------------
// generators
// ---------------------------------------------------------------------------

/// Random masked label volume with values in 1..=ng, discretization-ready
/// (FixedBinWidth(1.0) reproduces the integer labels).
pub fn random_labeled_roi(rng: &mut ChaCha8Rng, max_dim: usize, ng: usize) -> (Volume, Mask) {
    loop {
        let dims = (
            rng.gen_range(2..=max_dim),
            rng.gen_range(2..=max_dim),
            rng.gen_range(2..=max_dim),
        );
        let n = dims.0 * dims.1 * dims.2;
        let data: Vec<f64> = (0..n).map(|_| rng.gen_range(1..=ng) as f64).collect();
        let bits: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.7)).collect();
        if bits.iter().any(|&b| b) {
            let vol = Volume::new(dims, (1.0, 1.0, 1.0), data).unwrap();
            return (vol, Mask { dims, bits });
        }
    }
}

/// |a - b| within tol relative to the larger magnitude (floor 1).
pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

// ---------------------------------------------------------------------------
// independent symmetric eigensolver: classical Jacobi with max-pivot search
// (the library uses cyclic sweeps)
// ---------------------------------------------------------------------------

pub fn classical_jacobi(matrix: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = matrix.len();
    let mut a: Vec<Vec<f64>> = matrix.to_vec();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    for _ in 0..100 * n * n {
        // largest off-diagonal element
        let (mut p, mut q, mut big) = (0, 1, 0.0f64);
        for i in 0..n {
            for j in (i + 1)..n {
                if a[i][j].abs() > big {
                    big = a[i][j].abs();
                    p = i;
                    q = j;
                }
            }
        }
        if n < 2 || big < 1e-14 {
            break;
        }
        let theta = 0.5 * (2.0 * a[p][q]).atan2(a[p][p] - a[q][q]);
        let (s, c) = theta.sin_cos();
        let (app, aqq, apq) = (a[p][p], a[q][q], a[p][q]);
        a[p][p] = c * c * app + 2.0 * s * c * apq + s * s * aqq;
        a[q][q] = s * s * app - 2.0 * s * c * apq + c * c * aqq;
        a[p][q] = 0.0;
        a[q][p] = 0.0;
        for k in 0..n {
            if k != p && k != q {
                let akp = a[k][p];
                let akq = a[k][q];
                a[k][p] = c * akp + s * akq;
                a[p][k] = a[k][p];
                a[k][q] = -s * akp + c * akq;
                a[q][k] = a[k][q];
            }
        }
        for row in v.iter_mut() {
            let vp = row[p];
            let vq = row[q];
            row[p] = c * vp + s * vq;
            row[q] = -s * vp + c * vq;
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j][j].partial_cmp(&a[i][i]).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| a[i][i]).collect();
    let vectors: Vec<Vec<f64>> = order
        .iter()
        .map(|&col| (0..n).map(|row| v[row][col]).collect())
        .collect();
    (values, vectors)
}

// ---------------------------------------------------------------------------
// texture-matrix oracles
// ---------------------------------------------------------------------------

fn label(d: &DiscretizedRoi, x: i64, y: i64, z: i64) -> u32 {
    let (nx, ny, nz) = d.dims;
    if x < 0 || y < 0 || z < 0 || x as usize >= nx || y as usize >= ny || z as usize >= nz {
        0
    } else {
        d.label(x as usize, y as usize, z as usize)
    }
}

fn voxel_list(d: &DiscretizedRoi) -> Vec<(i64, i64, i64, u32)> {
    let (nx, ny, nz) = d.dims;
    let mut out = Vec::new();
    for z in 0..nz {
        for y in 0..ny {
            for x in 0..nx {
                let l = d.label(x, y, z);
                if l > 0 {
                    out.push((x as i64, y as i64, z as i64, l));
                }
            }
        }
    }
    out
}

/// All 13 per-direction symmetric co-occurrence matrices at once, counted by
/// classifying every ordered voxel pair.
pub fn oracle_glcm_matrices(d: &DiscretizedRoi) -> Vec<Option<Vec<Vec<f64>>>> {
    let dirs = gliofuse::radiomics::DIRECTIONS_13;
    let voxels = voxel_list(d);
    let ng = d.ng;
    let mut mats = vec![vec![vec![0.0; ng]; ng]; dirs.len()];
    let mut totals = vec![0.0f64; dirs.len()];
    for &(ax, ay, az, la) in &voxels {
        for &(bx, by, bz, lb) in &voxels {
            let delta = (bx - ax, by - ay, bz - az);
            for (k, &(dx, dy, dz)) in dirs.iter().enumerate() {
                if delta == (dx, dy, dz) || delta == (-dx, -dy, -dz) {
                    mats[k][(la - 1) as usize][(lb - 1) as usize] += 1.0;
                    totals[k] += 1.0;
                }
            }
        }
    }
    mats.into_iter()
        .zip(totals)
        .map(|(m, t)| (t > 0.0).then_some(m))
        .collect()
}

/// GLCM features from one normalized matrix, evaluated by direct double
/// sums over joint cells (no marginal shortcuts).
pub fn oracle_glcm_features(p: &[Vec<f64>]) -> Named {
    let ng = p.len();
    let lv = |i: usize| (i + 1) as f64;
    let mut f = Named::new();

    let sum2 = |g: &dyn Fn(f64, f64, f64) -> f64| -> f64 {
        let mut s = 0.0;
        for i in 0..ng {
            for j in 0..ng {
                s += g(lv(i), lv(j), p[i][j]);
            }
        }
        s
    };

    let mu_x = sum2(&|i, _, pij| i * pij);
    let mu_y = sum2(&|_, j, pij| j * pij);
    let sigma_x = sum2(&|i, _, pij| (i - mu_x).powi(2) * pij).sqrt();
    let sigma_y = sum2(&|_, j, pij| (j - mu_y).powi(2) * pij).sqrt();

    f.insert("Autocorrelation", sum2(&|i, j, pij| i * j * pij));
    f.insert(
        "ClusterProminence",
        sum2(&|i, j, pij| (i + j - mu_x - mu_y).powi(4) * pij),
    );
    f.insert(
        "ClusterShade",
        sum2(&|i, j, pij| (i + j - mu_x - mu_y).powi(3) * pij),
    );
    f.insert(
        "ClusterTendency",
        sum2(&|i, j, pij| (i + j - mu_x - mu_y).powi(2) * pij),
    );
    f.insert("Contrast", sum2(&|i, j, pij| (i - j).powi(2) * pij));
    let correlation = if sigma_x > 1e-12 && sigma_y > 1e-12 {
        sum2(&|i, j, pij| (i - mu_x) * (j - mu_y) * pij) / (sigma_x * sigma_y)
    } else {
        1.0
    };
    f.insert("Correlation", correlation);
    let da = sum2(&|i, j, pij| (i - j).abs() * pij);
    f.insert("DifferenceAverage", da);
    // p_{x-y}
    let mut pdiff = vec![0.0; ng];
    for i in 0..ng {
        for j in 0..ng {
            pdiff[i.abs_diff(j)] += p[i][j];
        }
    }
    f.insert(
        "DifferenceEntropy",
        pdiff.iter().filter(|&&q| q > 0.0).map(|&q| -q * q.log2()).sum(),
    );
    f.insert(
        "DifferenceVariance",
        sum2(&|i, j, pij| ((i - j).abs() - da).powi(2) * pij),
    );
    f.insert("Id", sum2(&|i, j, pij| pij / (1.0 + (i - j).abs())));
    f.insert("Idm", sum2(&|i, j, pij| pij / (1.0 + (i - j).powi(2))));
    f.insert(
        "Idmn",
        sum2(&|i, j, pij| pij / (1.0 + (i - j).powi(2) / (ng * ng) as f64)),
    );
    f.insert(
        "Idn",
        sum2(&|i, j, pij| pij / (1.0 + (i - j).abs() / ng as f64)),
    );

    let mut px = vec![0.0; ng];
    let mut py = vec![0.0; ng];
    for i in 0..ng {
        for j in 0..ng {
            px[i] += p[i][j];
            py[j] += p[i][j];
        }
    }
    let ent = |q: f64| if q > 0.0 { -q * q.log2() } else { 0.0 };
    let hx: f64 = px.iter().map(|&q| ent(q)).sum();
    let hy: f64 = py.iter().map(|&q| ent(q)).sum();
    let hxy = sum2(&|_, _, pij| ent(pij));
    let mut hxy1 = 0.0;
    let mut hxy2 = 0.0;
    for i in 0..ng {
        for j in 0..ng {
            let q = px[i] * py[j];
            if q > 0.0 {
                if p[i][j] > 0.0 {
                    hxy1 -= p[i][j] * q.log2();
                }
                hxy2 -= q * q.log2();
            }
        }
    }
    let denom = hx.max(hy);
    f.insert("Imc1", if denom > 0.0 { (hxy - hxy1) / denom } else { 0.0 });
    f.insert("Imc2", (1.0 - (-2.0 * (hxy2 - hxy)).exp()).max(0.0).sqrt());
    f.insert(
        "InverseVariance",
        sum2(&|i, j, pij| if i != j { pij / (i - j).powi(2) } else { 0.0 }),
    );
    f.insert("JointAverage", mu_x);
    f.insert("JointEnergy", sum2(&|_, _, pij| pij * pij));
    f.insert("JointEntropy", hxy);

    // MCC: sqrt of second-largest eigenvalue of Q, via the symmetric
    // similarity S = D^-1/2 P D^-1/2 and the max-pivot Jacobi above
    let occupied: Vec<usize> = (0..ng).filter(|&i| px[i] > 0.0).collect();
    let mcc = if occupied.len() <= 1 {
        1.0
    } else {
        let m = occupied.len();
        let mut s = vec![vec![0.0; m]; m];
        for (a, &i) in occupied.iter().enumerate() {
            for (b, &j) in occupied.iter().enumerate() {
                s[a][b] = p[i][j] / (px[i] * px[j]).sqrt();
            }
        }
        let (vals, _) = classical_jacobi(&s);
        let mut mags: Vec<f64> = vals.iter().map(|v| v.abs()).collect();
        mags.sort_by(|a, b| b.partial_cmp(a).unwrap());
        mags[1].min(1.0)
    };
    f.insert("Mcc", mcc);

    f.insert(
        "MaximumProbability",
        p.iter().flat_map(|r| r.iter()).fold(0.0f64, |a, &b| a.max(b)),
    );
    f.insert("SumAverage", sum2(&|i, j, pij| (i + j) * pij));
    let mut psum = vec![0.0; 2 * ng + 1];
    for i in 0..ng {
        for j in 0..ng {
            psum[i + j + 2] += p[i][j];
        }
    }
    f.insert("SumEntropy", psum.iter().map(|&q| ent(q)).sum());
    f.insert("SumSquares", sum2(&|i, _, pij| (i - mu_x).powi(2) * pij));
    f
}

/// Direction-averaged GLCM oracle, mirroring the diagonal fallback when no
/// direction holds a pair.
pub fn oracle_glcm(d: &DiscretizedRoi) -> Named {
    let mats = oracle_glcm_matrices(d);
    let present: Vec<&Vec<Vec<f64>>> = mats.iter().flatten().collect();
    if present.is_empty() {
        let voxels = voxel_list(d);
        let mut p = vec![vec![0.0; d.ng]; d.ng];
        for &(_, _, _, l) in &voxels {
            p[(l - 1) as usize][(l - 1) as usize] += 1.0 / voxels.len() as f64;
        }
        return oracle_glcm_features(&p);
    }
    let mut acc = Named::new();
    for m in &present {
        let total: f64 = m.iter().flat_map(|r| r.iter()).sum();
        let p: Vec<Vec<f64>> = m
            .iter()
            .map(|r| r.iter().map(|&c| c / total).collect())
            .collect();
        for (k, v) in oracle_glcm_features(&p) {
            *acc.entry(k).or_insert(0.0) += v;
        }
    }
    for v in acc.values_mut() {
        *v /= present.len() as f64;
    }
    acc
}

/// Dependence counts (level, dependent-neighbor count).
pub fn oracle_gldm_matrix(d: &DiscretizedRoi) -> Vec<Vec<f64>> {
    let voxels = voxel_list(d);
    let mut cells = vec![vec![0.0; 27]; d.ng];
    for &(x, y, z, l) in &voxels {
        let mut dep = 0usize;
        for dz in -1i64..=1 {
            for dy in -1i64..=1 {
                for dx in -1i64..=1 {
                    if (dx, dy, dz) == (0, 0, 0) {
                        continue;
                    }
                    if label(d, x + dx, y + dy, z + dz) == l {
                        dep += 1;
                    }
                }
            }
        }
        cells[(l - 1) as usize][dep] += 1.0;
    }
    cells
}

pub fn oracle_gldm(d: &DiscretizedRoi) -> Named {
    let cells = oracle_gldm_matrix(d);
    let nz: f64 = cells.iter().flat_map(|r| r.iter()).sum();
    let mut f = Named::new();
    // dependence size s = dependent neighbors + 1 (center included)
    let each = |g: &dyn Fn(f64, f64, f64) -> f64| -> f64 {
        let mut sum = 0.0;
        for (i, row) in cells.iter().enumerate() {
            for (j, &c) in row.iter().enumerate() {
                if c > 0.0 {
                    sum += g((i + 1) as f64, (j + 1) as f64, c / nz);
                }
            }
        }
        sum
    };
    let mu_i = each(&|i, _, p| i * p);
    let mu_s = each(&|_, s, p| s * p);
    f.insert("DependenceEntropy", each(&|_, _, p| -p * p.log2()));
    let col_sum: Vec<f64> = (0..27)
        .map(|j| cells.iter().map(|row| row[j]).sum::<f64>())
        .collect();
    let dn: f64 = col_sum.iter().map(|&c| c * c).sum::<f64>();
    f.insert("DependenceNonUniformity", dn / nz);
    f.insert("DependenceNonUniformityNormalized", dn / (nz * nz));
    f.insert("DependenceVariance", each(&|_, s, p| (s - mu_s).powi(2) * p));
    let row_sum: Vec<f64> = cells.iter().map(|row| row.iter().sum()).collect();
    f.insert(
        "GrayLevelNonUniformity",
        row_sum.iter().map(|&c| c * c).sum::<f64>() / nz,
    );
    f.insert("GrayLevelVariance", each(&|i, _, p| (i - mu_i).powi(2) * p));
    f.insert("HighGrayLevelEmphasis", each(&|i, _, p| i * i * p));
    f.insert("LargeDependenceEmphasis", each(&|_, s, p| s * s * p));
    f.insert(
        "LargeDependenceHighGrayLevelEmphasis",
        each(&|i, s, p| i * i * s * s * p),
    );
    f.insert(
        "LargeDependenceLowGrayLevelEmphasis",
        each(&|i, s, p| s * s * p / (i * i)),
    );
    f.insert("LowGrayLevelEmphasis", each(&|i, _, p| p / (i * i)));
    f.insert("SmallDependenceEmphasis", each(&|_, s, p| p / (s * s)));
    f.insert(
        "SmallDependenceHighGrayLevelEmphasis",
        each(&|i, s, p| i * i * p / (s * s)),
    );
    f.insert(
        "SmallDependenceLowGrayLevelEmphasis",
        each(&|i, s, p| p / (i * i * s * s)),
    );
    f
}

/// Run-length counts per direction by walking whole grid lines.
pub fn oracle_glrlm_matrix(d: &DiscretizedRoi, dir: (i64, i64, i64)) -> Vec<Vec<f64>> {
    let (nx, ny, nz) = d.dims;
    let mut runs: Vec<(u32, usize)> = Vec::new();
    // line starts: grid voxels whose predecessor along dir is off-grid
    for z in 0..nz as i64 {
        for y in 0..ny as i64 {
            for x in 0..nx as i64 {
                let (px, py, pz) = (x - dir.0, y - dir.1, z - dir.2);
                let off_grid = px < 0
                    || py < 0
                    || pz < 0
                    || px >= nx as i64
                    || py >= ny as i64
                    || pz >= nz as i64;
                if !off_grid {
                    continue;
                }
                // walk the full line, splitting runs on label change or 0
                let (mut cx, mut cy, mut cz) = (x, y, z);
                let mut current: Option<(u32, usize)> = None;
                while cx >= 0
                    && cy >= 0
                    && cz >= 0
                    && cx < nx as i64
                    && cy < ny as i64
                    && cz < nz as i64
                {
                    let l = label(d, cx, cy, cz);
                    current = match current.take() {
                        Some((cl, len)) if cl == l => Some((cl, len + 1)),
                        Some((cl, len)) => {
                            if cl > 0 {
                                runs.push((cl, len));
                            }
                            Some((l, 1))
                        }
                        None => Some((l, 1)),
                    };
                    cx += dir.0;
                    cy += dir.1;
                    cz += dir.2;
                }
                if let Some((cl, len)) = current {
                    if cl > 0 {
                        runs.push((cl, len));
                    }
                }
            }
        }
    }
    let max_len = runs.iter().map(|&(_, l)| l).max().unwrap_or(1);
    let mut cells = vec![vec![0.0; max_len]; d.ng];
    for (l, len) in runs {
        cells[(l - 1) as usize][len - 1] += 1.0;
    }
    cells
}

fn run_zone_features(cells: &[Vec<f64>], np: usize, scheme: &[&'static str; 16]) -> Named {
    let nr: f64 = cells.iter().flat_map(|r| r.iter()).sum();
    let each = |g: &dyn Fn(f64, f64, f64) -> f64| -> f64 {
        let mut sum = 0.0;
        for (i, row) in cells.iter().enumerate() {
            for (j, &c) in row.iter().enumerate() {
                if c > 0.0 {
                    sum += g((i + 1) as f64, (j + 1) as f64, c / nr);
                }
            }
        }
        sum
    };
    let mu_i = each(&|i, _, p| i * p);
    let mu_j = each(&|_, j, p| j * p);
    let row_sum: Vec<f64> = cells.iter().map(|r| r.iter().sum()).collect();
    let ncols = cells.first().map(|r| r.len()).unwrap_or(0);
    let col_sum: Vec<f64> = (0..ncols)
        .map(|j| cells.iter().map(|r| r[j]).sum::<f64>())
        .collect();
    let gln: f64 = row_sum.iter().map(|&c| c * c).sum();
    let jln: f64 = col_sum.iter().map(|&c| c * c).sum();
    let mut f = Named::new();
    f.insert(scheme[0], gln / nr);
    f.insert(scheme[1], gln / (nr * nr));
    f.insert(scheme[2], each(&|i, _, p| (i - mu_i).powi(2) * p));
    f.insert(scheme[3], each(&|i, _, p| i * i * p));
    f.insert(scheme[4], each(&|_, j, p| j * j * p));
    f.insert(scheme[5], each(&|i, j, p| i * i * j * j * p));
    f.insert(scheme[6], each(&|i, j, p| j * j * p / (i * i)));
    f.insert(scheme[7], each(&|i, _, p| p / (i * i)));
    f.insert(scheme[8], each(&|_, _, p| -p * p.log2()));
    f.insert(scheme[9], jln / nr);
    f.insert(scheme[10], jln / (nr * nr));
    f.insert(scheme[11], nr / np as f64);
    f.insert(scheme[12], each(&|_, j, p| (j - mu_j).powi(2) * p));
    f.insert(scheme[13], each(&|_, j, p| p / (j * j)));
    f.insert(scheme[14], each(&|i, j, p| i * i * p / (j * j)));
    f.insert(scheme[15], each(&|i, j, p| p / (i * i * j * j)));
    f
}

pub fn oracle_glrlm(d: &DiscretizedRoi) -> Named {
    let scheme = [
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
    let dirs = gliofuse::radiomics::DIRECTIONS_13;
    let mut acc = Named::new();
    for dir in dirs {
        let cells = oracle_glrlm_matrix(d, dir);
        for (k, v) in run_zone_features(&cells, d.n_voxels, &scheme) {
            *acc.entry(k).or_insert(0.0) += v;
        }
    }
    for v in acc.values_mut() {
        *v /= dirs.len() as f64;
    }
    acc
}

/// Zone counts via union-find over equal-label 26-neighbors.
pub fn oracle_glszm_matrix(d: &DiscretizedRoi) -> Vec<Vec<f64>> {
    let voxels = voxel_list(d);
    let n = voxels.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], i: usize) -> usize {
        let mut root = i;
        while parent[root] != root {
            root = parent[root];
        }
        let mut cur = i;
        while parent[cur] != root {
            let next = parent[cur];
            parent[cur] = root;
            cur = next;
        }
        root
    }
    let index: std::collections::HashMap<(i64, i64, i64), usize> = voxels
        .iter()
        .enumerate()
        .map(|(k, &(x, y, z, _))| ((x, y, z), k))
        .collect();
    for (k, &(x, y, z, l)) in voxels.iter().enumerate() {
        for dz in -1i64..=1 {
            for dy in -1i64..=1 {
                for dx in -1i64..=1 {
                    if (dx, dy, dz) == (0, 0, 0) {
                        continue;
                    }
                    if let Some(&other) = index.get(&(x + dx, y + dy, z + dz)) {
                        if voxels[other].3 == l {
                            let ra = find(&mut parent, k);
                            let rb = find(&mut parent, other);
                            if ra != rb {
                                parent[ra] = rb;
                            }
                        }
                    }
                }
            }
        }
    }
    let mut sizes: std::collections::HashMap<usize, (u32, usize)> = std::collections::HashMap::new();
    for k in 0..n {
        let root = find(&mut parent, k);
        let e = sizes.entry(root).or_insert((voxels[k].3, 0));
        e.1 += 1;
    }
    let max_size = sizes.values().map(|&(_, s)| s).max().unwrap_or(1);
    let mut cells = vec![vec![0.0; max_size]; d.ng];
    for (_, (l, s)) in sizes {
        cells[(l - 1) as usize][s - 1] += 1.0;
    }
    cells
}

pub fn oracle_glszm(d: &DiscretizedRoi) -> Named {
    // names in the generic evaluator's semantic slot order
    let scheme = [
        "GrayLevelNonUniformity",
        "GrayLevelNonUniformityNormalized",
        "GrayLevelVariance",
        "HighGrayLevelZoneEmphasis",
        "LargeAreaEmphasis",
        "LargeAreaHighGrayLevelEmphasis",
        "LargeAreaLowGrayLevelEmphasis",
        "LowGrayLevelZoneEmphasis",
        "ZoneEntropy",
        "SizeZoneNonUniformity",
        "SizeZoneNonUniformityNormalized",
        "ZonePercentage",
        "ZoneVariance",
        "SmallAreaEmphasis",
        "SmallAreaHighGrayLevelEmphasis",
        "SmallAreaLowGrayLevelEmphasis",
    ];
    run_zone_features(&oracle_glszm_matrix(d), d.n_voxels, &scheme)
}

/// Per-level (n_i, p_i, s_i) rows, recomputed from scratch.
pub fn oracle_ngtdm_table(d: &DiscretizedRoi) -> Vec<(f64, f64, f64)> {
    let voxels = voxel_list(d);
    let mut n = vec![0.0; d.ng];
    let mut s = vec![0.0; d.ng];
    for &(x, y, z, l) in &voxels {
        n[(l - 1) as usize] += 1.0;
        let mut neigh = Vec::new();
        for dz in -1i64..=1 {
            for dy in -1i64..=1 {
                for dx in -1i64..=1 {
                    if (dx, dy, dz) == (0, 0, 0) {
                        continue;
                    }
                    let lb = label(d, x + dx, y + dy, z + dz);
                    if lb > 0 {
                        neigh.push(lb as f64);
                    }
                }
            }
        }
        if !neigh.is_empty() {
            let avg = neigh.iter().sum::<f64>() / neigh.len() as f64;
            s[(l - 1) as usize] += (l as f64 - avg).abs();
        }
    }
    let nv = d.n_voxels as f64;
    n.iter().zip(&s).map(|(&ni, &si)| (ni, ni / nv, si)).collect()
}

pub fn oracle_ngtdm(d: &DiscretizedRoi) -> Named {
    let table = oracle_ngtdm_table(d);
    let nv = d.n_voxels as f64;
    let present: Vec<(f64, f64, f64)> = table
        .iter()
        .enumerate()
        .filter(|(_, t)| t.0 > 0.0)
        .map(|(i, t)| ((i + 1) as f64, t.1, t.2))
        .collect();
    let ngp = present.len() as f64;
    let sum_ps: f64 = present.iter().map(|t| t.1 * t.2).sum();
    let sum_s: f64 = present.iter().map(|t| t.2).sum();
    let mut contrast = 0.0;
    let mut busy_den = 0.0;
    let mut complexity = 0.0;
    let mut strength_num = 0.0;
    for &(i, pi, si) in &present {
        for &(j, pj, sj) in &present {
            contrast += pi * pj * (i - j) * (i - j);
            busy_den += (i * pi - j * pj).abs();
            complexity += (i - j).abs() * (pi * si + pj * sj) / (pi + pj);
            strength_num += (pi + pj) * (i - j) * (i - j);
        }
    }
    let mut f = Named::new();
    f.insert("Busyness", if busy_den == 0.0 { 0.0 } else { sum_ps / busy_den });
    f.insert("Coarseness", if sum_ps == 0.0 { 1e6 } else { 1.0 / sum_ps });
    f.insert("Complexity", complexity / nv);
    f.insert(
        "Contrast",
        if ngp > 1.0 {
            contrast / (ngp * (ngp - 1.0)) * (sum_s / nv)
        } else {
            0.0
        },
    );
    f.insert("Strength", if sum_s == 0.0 { 0.0 } else { strength_num / sum_s });
    f
}

// ---------------------------------------------------------------------------
// first-order and shape oracles
// ---------------------------------------------------------------------------

fn oracle_percentile(values: &[f64], q: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n == 1 {
        return v[0];
    }
    let pos = q * (n - 1) as f64;
    let below = pos.floor() as usize;
    let above = pos.ceil() as usize;
    if below == above {
        v[below]
    } else {
        v[below] * (above as f64 - pos) + v[above] * (pos - below as f64)
    }
}

pub fn oracle_firstorder(values: &[f64], hist: &[usize], voxel_volume: f64) -> Named {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let central = |k: i32| values.iter().map(|v| (v - mean).powi(k)).sum::<f64>() / n;
    let m2 = central(2);
    let energy: f64 = values.iter().map(|v| v * v).sum();
    let total: usize = hist.iter().sum();
    let probs: Vec<f64> = hist.iter().map(|&c| c as f64 / total as f64).collect();
    let p10 = oracle_percentile(values, 0.10);
    let p90 = oracle_percentile(values, 0.90);
    let band: Vec<f64> = values.iter().copied().filter(|&v| v >= p10 && v <= p90).collect();
    let band_mean = band.iter().sum::<f64>() / band.len() as f64;

    let mut f = Named::new();
    f.insert("10Percentile", p10);
    f.insert("90Percentile", p90);
    f.insert("Energy", energy);
    f.insert(
        "Entropy",
        probs.iter().filter(|&&p| p > 0.0).map(|&p| -p * p.log2()).sum(),
    );
    f.insert(
        "InterquartileRange",
        oracle_percentile(values, 0.75) - oracle_percentile(values, 0.25),
    );
    f.insert("Kurtosis", if m2 > 0.0 { central(4) / (m2 * m2) } else { 0.0 });
    f.insert("Maximum", values.iter().cloned().fold(f64::NEG_INFINITY, f64::max));
    f.insert("Mean", mean);
    f.insert(
        "MeanAbsoluteDeviation",
        values.iter().map(|v| (v - mean).abs()).sum::<f64>() / n,
    );
    f.insert("Median", oracle_percentile(values, 0.5));
    f.insert("Minimum", values.iter().cloned().fold(f64::INFINITY, f64::min));
    f.insert("Range", f["Maximum"] - f["Minimum"]);
    f.insert(
        "RobustMeanAbsoluteDeviation",
        band.iter().map(|v| (v - band_mean).abs()).sum::<f64>() / band.len() as f64,
    );
    f.insert("RootMeanSquared", (energy / n).sqrt());
    f.insert(
        "Skewness",
        if m2 > 0.0 { central(3) / m2.powf(1.5) } else { 0.0 },
    );
    f.insert("TotalEnergy", energy * voxel_volume);
    f.insert("Uniformity", probs.iter().map(|&p| p * p).sum());
    f.insert("Variance", m2);
    f
}

/// Closed-form eigenvalues of a symmetric 3x3 matrix (trigonometric method),
/// descending.
pub fn eig3_closed_form(a: &[[f64; 3]; 3]) -> [f64; 3] {
    let p1 = a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2];
    if p1 == 0.0 {
        let mut d = [a[0][0], a[1][1], a[2][2]];
        d.sort_by(|x, y| y.partial_cmp(x).unwrap());
        return d;
    }
    let q = (a[0][0] + a[1][1] + a[2][2]) / 3.0;
    let p2 = (a[0][0] - q).powi(2) + (a[1][1] - q).powi(2) + (a[2][2] - q).powi(2) + 2.0 * p1;
    let p = (p2 / 6.0).sqrt();
    let mut b = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            b[i][j] = (a[i][j] - if i == j { q } else { 0.0 }) / p;
        }
    }
    let det_b = b[0][0] * (b[1][1] * b[2][2] - b[1][2] * b[2][1])
        - b[0][1] * (b[1][0] * b[2][2] - b[1][2] * b[2][0])
        + b[0][2] * (b[1][0] * b[2][1] - b[1][1] * b[2][0]);
    let r = (det_b / 2.0).clamp(-1.0, 1.0);
    let phi = r.acos() / 3.0;
    let e1 = q + 2.0 * p * phi.cos();
    let e3 = q + 2.0 * p * (phi + 2.0 * std::f64::consts::PI / 3.0).cos();
    let e2 = 3.0 * q - e1 - e3;
    [e1, e2, e3]
}

pub fn oracle_shape(mask: &Mask, spacing: (f64, f64, f64)) -> Named {
    let (nx, ny, nz) = mask.dims;
    let (sx, sy, sz) = spacing;
    let mut pts: Vec<(f64, f64, f64)> = Vec::new();
    let mut surface = 0.0;
    let mut boundary: Vec<(f64, f64, f64)> = Vec::new();
    let inside = |x: i64, y: i64, z: i64| {
        x >= 0
            && y >= 0
            && z >= 0
            && (x as usize) < nx
            && (y as usize) < ny
            && (z as usize) < nz
            && mask.get(x as usize, y as usize, z as usize)
    };
    for z in 0..nz {
        for y in 0..ny {
            for x in 0..nx {
                if !mask.get(x, y, z) {
                    continue;
                }
                pts.push((x as f64 * sx, y as f64 * sy, z as f64 * sz));
                let mut exposed = false;
                for (dx, dy, dz, area) in [
                    (-1, 0, 0, sy * sz),
                    (1, 0, 0, sy * sz),
                    (0, -1, 0, sx * sz),
                    (0, 1, 0, sx * sz),
                    (0, 0, -1, sx * sy),
                    (0, 0, 1, sx * sy),
                ] {
                    if !inside(x as i64 + dx, y as i64 + dy, z as i64 + dz) {
                        surface += area;
                        exposed = true;
                    }
                }
                if exposed {
                    boundary.push((x as f64 * sx, y as f64 * sy, z as f64 * sz));
                }
            }
        }
    }
    let n = pts.len() as f64;
    let volume = n * sx * sy * sz;
    let mean = pts.iter().fold((0.0, 0.0, 0.0), |acc, p| {
        (acc.0 + p.0 / n, acc.1 + p.1 / n, acc.2 + p.2 / n)
    });
    let mut cov = [[0.0f64; 3]; 3];
    if pts.len() > 1 {
        for p in &pts {
            let d = [p.0 - mean.0, p.1 - mean.1, p.2 - mean.2];
            for i in 0..3 {
                for j in 0..3 {
                    cov[i][j] += d[i] * d[j] / (n - 1.0);
                }
            }
        }
    }
    let lam = eig3_closed_form(&cov).map(|l| l.max(0.0));

    // brute-force farthest pairs over boundary voxels
    let dist2 = |a: (f64, f64, f64), b: (f64, f64, f64)| {
        (a.0 - b.0).powi(2) + (a.1 - b.1).powi(2) + (a.2 - b.2).powi(2)
    };
    let mut d3 = 0.0f64;
    let mut d_slice = 0.0f64;
    let mut d_col = 0.0f64;
    let mut d_row = 0.0f64;
    for i in 0..boundary.len() {
        for j in (i + 1)..boundary.len() {
            let (a, b) = (boundary[i], boundary[j]);
            let d2 = dist2(a, b);
            d3 = d3.max(d2);
            if a.2 == b.2 {
                d_slice = d_slice.max(d2);
            }
            if a.0 == b.0 {
                d_col = d_col.max(d2);
            }
            if a.1 == b.1 {
                d_row = d_row.max(d2);
            }
        }
    }

    let mut f = Named::new();
    f.insert(
        "Elongation",
        if lam[0] > 0.0 { (lam[1] / lam[0]).sqrt() } else { 1.0 },
    );
    f.insert(
        "Flatness",
        if lam[0] > 0.0 { (lam[2] / lam[0]).sqrt() } else { 1.0 },
    );
    f.insert("LeastAxisLength", 4.0 * lam[2].sqrt());
    f.insert("MajorAxisLength", 4.0 * lam[0].sqrt());
    f.insert("Maximum2DDiameterColumn", d_col.sqrt());
    f.insert("Maximum2DDiameterRow", d_row.sqrt());
    f.insert("Maximum2DDiameterSlice", d_slice.sqrt());
    f.insert("Maximum3DDiameter", d3.sqrt());
    f.insert("MeshVolume", volume);
    f.insert("MinorAxisLength", 4.0 * lam[1].sqrt());
    f.insert(
        "Sphericity",
        std::f64::consts::PI.powf(1.0 / 3.0) * (6.0 * volume).powf(2.0 / 3.0) / surface,
    );
    f.insert("SurfaceArea", surface);
    f.insert("SurfaceVolumeRatio", surface / volume);
    f.insert("VoxelVolume", volume);
    f
}

// ---------------------------------------------------------------------------
// evaluation oracles
// ---------------------------------------------------------------------------

/// AUC as the Mann-Whitney pairwise concordance (ties count one half),
/// accumulated in integer half-units so the division is exact.
pub fn mann_whitney_auc(scores: &[f64], positive: &[bool]) -> f64 {
    let mut concordant2 = 0u64;
    let mut pairs = 0u64;
    for (i, (&si, &pi)) in scores.iter().zip(positive).enumerate() {
        for (j, (&sj, &pj)) in scores.iter().zip(positive).enumerate() {
            if i == j || !pi || pj {
                continue;
            }
            pairs += 1;
            if si > sj {
                concordant2 += 2;
            } else if si == sj {
                concordant2 += 1;
            }
        }
    }
    concordant2 as f64 / (2 * pairs) as f64
}

/// The 24 proper axis-aligned rotations as (axis permutation, sign flips).
pub fn rotations_24() -> Vec<([usize; 3], [bool; 3])> {
    let perms = [
        [0, 1, 2],
        [0, 2, 1],
        [1, 0, 2],
        [1, 2, 0],
        [2, 0, 1],
        [2, 1, 0],
    ];
    let perm_sign = |p: &[usize; 3]| -> f64 {
        let mut m = [[0.0; 3]; 3];
        for (i, &pi) in p.iter().enumerate() {
            m[i][pi] = 1.0;
        }
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let mut out = Vec::with_capacity(24);
    for p in perms {
        for bits in 0..8u8 {
            let flips = [bits & 1 != 0, bits & 2 != 0, bits & 4 != 0];
            let flip_sign = flips.iter().fold(1.0, |s, &f| if f { -s } else { s });
            if perm_sign(&p) * flip_sign > 0.0 {
                out.push((p, flips));
            }
        }
    }
    assert_eq!(out.len(), 24);
    out
}

/// Applies one rotation to a volume/mask pair.
pub fn rotate_grid(
    vol: &Volume,
    mask: &Mask,
    perm: [usize; 3],
    flips: [bool; 3],
) -> (Volume, Mask) {
    let src_dims = [vol.dims().0, vol.dims().1, vol.dims().2];
    let dims = (src_dims[perm[0]], src_dims[perm[1]], src_dims[perm[2]]);
    let mut data = vec![0.0; vol.data().len()];
    let mut bits = vec![false; vol.data().len()];
    for z in 0..src_dims[2] {
        for y in 0..src_dims[1] {
            for x in 0..src_dims[0] {
                let src = [x, y, z];
                let mut t = [0usize; 3];
                for i in 0..3 {
                    let c = src[perm[i]];
                    let extent = src_dims[perm[i]];
                    t[i] = if flips[i] { extent - 1 - c } else { c };
                }
                let dst = t[0] + dims.0 * (t[1] + dims.1 * t[2]);
                data[dst] = vol.get(x, y, z);
                bits[dst] = mask.get(x, y, z);
            }
        }
    }
    (
        Volume::new(dims, vol.spacing(), data).unwrap(),
        Mask { dims, bits },
    )
}
