//! Gray-level size-zone features.
//!
//! Zones are 26-connected components of equal gray level inside the mask;
//! the matrix is direction-free.

use super::{entropy_term, neighborhood_26, DiscretizedRoi};

pub const NAMES: [&str; 16] = [
    "GrayLevelNonUniformity",
    "GrayLevelNonUniformityNormalized",
    "GrayLevelVariance",
    "HighGrayLevelZoneEmphasis",
    "LargeAreaEmphasis",
    "LargeAreaHighGrayLevelEmphasis",
    "LargeAreaLowGrayLevelEmphasis",
    "LowGrayLevelZoneEmphasis",
    "SizeZoneNonUniformity",
    "SizeZoneNonUniformityNormalized",
    "SmallAreaEmphasis",
    "SmallAreaHighGrayLevelEmphasis",
    "SmallAreaLowGrayLevelEmphasis",
    "ZoneEntropy",
    "ZonePercentage",
    "ZoneVariance",
];

/// Zone counts: rows are gray levels 1..=ng, columns are zone sizes
/// 1..=max observed. Zones found by breadth-first flood fill.
pub fn zone_matrix(d: &DiscretizedRoi) -> Vec<Vec<f64>> {
    let (nx, ny, nz) = d.dims;
    let offsets = neighborhood_26();
    let mut visited = vec![false; d.labels.len()];
    let mut zones: Vec<(u32, usize)> = Vec::new();
    let mut max_size = 1usize;
    let mut queue = Vec::new();
    for z in 0..nz {
        for y in 0..ny {
            for x in 0..nx {
                let idx = x + nx * (y + ny * z);
                let level = d.labels[idx];
                if level == 0 || visited[idx] {
                    continue;
                }
                visited[idx] = true;
                queue.clear();
                queue.push((x as i64, y as i64, z as i64));
                let mut size = 0usize;
                while let Some((cx, cy, cz)) = queue.pop() {
                    size += 1;
                    for &(dx, dy, dz) in &offsets {
                        let (qx, qy, qz) = (cx + dx, cy + dy, cz + dz);
                        if qx < 0 || qy < 0 || qz < 0 {
                            continue;
                        }
                        let (ux, uy, uz) = (qx as usize, qy as usize, qz as usize);
                        if ux >= nx || uy >= ny || uz >= nz {
                            continue;
                        }
                        let qidx = ux + nx * (uy + ny * uz);
                        if !visited[qidx] && d.labels[qidx] == level {
                            visited[qidx] = true;
                            queue.push((qx, qy, qz));
                        }
                    }
                }
                max_size = max_size.max(size);
                zones.push((level, size));
            }
        }
    }
    let mut cells = vec![vec![0.0; max_size]; d.ng];
    for (level, size) in zones {
        cells[(level - 1) as usize][size - 1] += 1.0;
    }
    cells
}

/// Features of one zone matrix; `np` is the mask voxel count.
pub fn matrix_features(cells: &[Vec<f64>], np: usize) -> Vec<f64> {
    let nz: f64 = cells.iter().flat_map(|r| r.iter()).sum();
    let ns = cells.first().map(|r| r.len()).unwrap_or(0);

    let mut mu_i = 0.0;
    let mut mu_s = 0.0;
    let mut entropy = 0.0;
    for (i, row) in cells.iter().enumerate() {
        for (j, &c) in row.iter().enumerate() {
            let p = c / nz;
            mu_i += p * (i + 1) as f64;
            mu_s += p * (j + 1) as f64;
            entropy += entropy_term(p);
        }
    }

    let mut sae = 0.0;
    let mut lae = 0.0;
    let mut lglze = 0.0;
    let mut hglze = 0.0;
    let mut salgle = 0.0;
    let mut sahgle = 0.0;
    let mut lalgle = 0.0;
    let mut lahgle = 0.0;
    let mut gl_var = 0.0;
    let mut zone_var = 0.0;
    for (i, row) in cells.iter().enumerate() {
        let li = (i + 1) as f64;
        for (j, &c) in row.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            let p = c / nz;
            let s = (j + 1) as f64;
            sae += p / (s * s);
            lae += p * s * s;
            lglze += p / (li * li);
            hglze += p * li * li;
            salgle += p / (li * li * s * s);
            sahgle += p * li * li / (s * s);
            lalgle += p * s * s / (li * li);
            lahgle += p * li * li * s * s;
            gl_var += p * (li - mu_i).powi(2);
            zone_var += p * (s - mu_s).powi(2);
        }
    }

    let mut gln = 0.0;
    for row in cells {
        let ri: f64 = row.iter().sum();
        gln += ri * ri;
    }
    let glnn = gln / (nz * nz);
    let gln = gln / nz;

    let mut szn = 0.0;
    for j in 0..ns {
        let cj: f64 = cells.iter().map(|row| row[j]).sum();
        szn += cj * cj;
    }
    let sznn = szn / (nz * nz);
    let szn = szn / nz;

    vec![
        gln,
        glnn,
        gl_var,
        hglze,
        lae,
        lahgle,
        lalgle,
        lglze,
        szn,
        sznn,
        sae,
        sahgle,
        salgle,
        entropy,
        nz / np as f64,
        zone_var,
    ]
}

pub fn compute(d: &DiscretizedRoi) -> Vec<f64> {
    matrix_features(&zone_matrix(d), d.n_voxels)
}

#[cfg(test)]
mod tests {
    use super::super::{discretize, DiscretizationPolicy};
    use super::*;
    use crate::roi::{superimpose, Mask};
    use crate::volume::Volume;

    fn named(vals: Vec<f64>) -> std::collections::BTreeMap<&'static str, f64> {
        NAMES.iter().copied().zip(vals).collect()
    }

    fn slice_2x2(values: [f64; 4]) -> DiscretizedRoi {
        let vol = Volume::new((2, 2, 1), (1.0, 1.0, 1.0), values.to_vec()).unwrap();
        let mask = Mask {
            dims: (2, 2, 1),
            bits: vec![true; 4],
        };
        let mv = superimpose(&vol, &mask).unwrap();
        discretize(&mv, DiscretizationPolicy::FixedBinWidth(1.0))
    }

    #[test]
    fn constant_roi_is_one_zone() {
        let d = slice_2x2([1.0; 4]);
        let cells = zone_matrix(&d);
        assert_eq!(cells[0][3], 1.0);
        let f = named(matrix_features(&cells, d.n_voxels));
        assert_eq!(f["ZonePercentage"], 0.25);
    }

    #[test]
    fn checkerboard_diagonals_connect() {
        // 26-connectivity joins equal diagonal cells: two zones of size 2
        let d = slice_2x2([1.0, 2.0, 2.0, 1.0]);
        let cells = zone_matrix(&d);
        assert_eq!(cells[0][1], 1.0);
        assert_eq!(cells[1][1], 1.0);
        let f = named(matrix_features(&cells, d.n_voxels));
        assert_eq!(f["SizeZoneNonUniformity"], 2.0);
    }

    #[test]
    fn all_distinct_levels_give_unit_small_area_emphasis() {
        let d = slice_2x2([1.0, 2.0, 3.0, 4.0]);
        let f = named(matrix_features(&zone_matrix(&d), d.n_voxels));
        assert_eq!(f["SmallAreaEmphasis"], 1.0);
        assert_eq!(f["ZonePercentage"], 1.0);
    }

    #[test]
    fn zones_do_not_cross_mask_gaps() {
        let vol = Volume::new((3, 1, 1), (1.0, 1.0, 1.0), vec![1.0, 1.0, 1.0]).unwrap();
        let mask = Mask {
            dims: (3, 1, 1),
            bits: vec![true, false, true],
        };
        let mv = superimpose(&vol, &mask).unwrap();
        let d = discretize(&mv, DiscretizationPolicy::FixedBinWidth(1.0));
        let cells = zone_matrix(&d);
        // two isolated single-voxel zones
        assert_eq!(cells[0][0], 2.0);
    }
}
