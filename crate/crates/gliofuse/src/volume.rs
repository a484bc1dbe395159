//! 3-D scalar volumes and the per-subject case bundle.
//!
//! A [`Volume`] is a row-major grid of f64 values with voxel spacing in mm.
//! It carries one MRI sequence, a fused image, or a segmentation mask.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Interpolation used when resampling a volume in-plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Interp {
    /// Bilinear, for intensity images. Output is a convex combination of
    /// inputs, so values never overshoot the source range.
    Bilinear,
    /// Nearest-neighbor, for label masks. Output values are a subset of the
    /// input values.
    Nearest,
}

/// Binary tumor grade.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Grade {
    /// High-grade glioma (the positive class).
    Hgg,
    /// Low-grade glioma.
    Lgg,
}

impl Grade {
    pub fn as_str(&self) -> &'static str {
        match self {
            Grade::Hgg => "HGG",
            Grade::Lgg => "LGG",
        }
    }

    pub fn parse(s: &str) -> Option<Grade> {
        match s {
            "HGG" => Some(Grade::Hgg),
            "LGG" => Some(Grade::Lgg),
            _ => None,
        }
    }
}

/// 3-D scalar grid with voxel spacing.
///
/// Data is stored row-major: index `(x, y, z)` maps to `x + nx*(y + ny*z)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Volume {
    dims: (usize, usize, usize),
    spacing: (f64, f64, f64),
    data: Vec<f64>,
}

impl Volume {
    /// Builds a volume, checking the size/spacing/finiteness invariants.
    pub fn new(
        dims: (usize, usize, usize),
        spacing: (f64, f64, f64),
        data: Vec<f64>,
    ) -> Result<Volume> {
        let (nx, ny, nz) = dims;
        if nx == 0 || ny == 0 || nz == 0 || data.is_empty() {
            return Err(Error::EmptyVolume);
        }
        if data.len() != nx * ny * nz {
            return Err(Error::DimMismatch(format!(
                "data length {} != {}x{}x{}",
                data.len(),
                nx,
                ny,
                nz
            )));
        }
        if spacing.0 <= 0.0 || spacing.1 <= 0.0 || spacing.2 <= 0.0 {
            return Err(Error::DimMismatch(format!("non-positive spacing {spacing:?}")));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteData);
        }
        Ok(Volume { dims, spacing, data })
    }

    /// All-zero volume with unit spacing.
    pub fn zeros(dims: (usize, usize, usize)) -> Volume {
        Volume {
            dims,
            spacing: (1.0, 1.0, 1.0),
            data: vec![0.0; dims.0 * dims.1 * dims.2],
        }
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        self.dims
    }

    pub fn spacing(&self) -> (f64, f64, f64) {
        self.spacing
    }

    /// Volume of one voxel in mm^3.
    pub fn voxel_volume(&self) -> f64 {
        self.spacing.0 * self.spacing.1 * self.spacing.2
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize, z: usize) -> usize {
        x + self.dims.0 * (y + self.dims.1 * z)
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, z: usize) -> f64 {
        self.data[self.index(x, y, z)]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, z: usize, v: f64) {
        let i = self.index(x, y, z);
        self.data[i] = v;
    }

    pub fn with_spacing(mut self, spacing: (f64, f64, f64)) -> Volume {
        self.spacing = spacing;
        self
    }

    /// Copies axial slice `z` into a row-major nx*ny buffer.
    pub fn slice(&self, z: usize) -> Vec<f64> {
        let (nx, ny, _) = self.dims;
        let start = nx * ny * z;
        self.data[start..start + nx * ny].to_vec()
    }

    pub fn set_slice(&mut self, z: usize, slice: &[f64]) {
        let (nx, ny, _) = self.dims;
        let start = nx * ny * z;
        self.data[start..start + nx * ny].copy_from_slice(slice);
    }

    pub fn min_max(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &v in &self.data {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        (lo, hi)
    }
}

/// Resamples each axial slice of `v` to `target` = (nx, ny); nz is unchanged.
///
/// In-plane spacing is rescaled by the dimension ratio so the physical field
/// of view is preserved. Bilinear sampling uses pixel-center alignment with
/// source coordinates clamped to the grid, so output values stay within the
/// source min/max.
pub fn resize_volume(v: &Volume, target: (usize, usize), interp: Interp) -> Result<Volume> {
    let (nx, ny, nz) = v.dims;
    let (tx, ty) = target;
    if tx == 0 || ty == 0 {
        return Err(Error::EmptyVolume);
    }
    if (tx, ty) == (nx, ny) {
        return Ok(v.clone());
    }
    let sx = nx as f64 / tx as f64;
    let sy = ny as f64 / ty as f64;
    let mut out = vec![0.0; tx * ty * nz];
    for z in 0..nz {
        for j in 0..ty {
            // pixel-center mapping: dst center (j+0.5) lands at src (j+0.5)*scale
            let fy = ((j as f64 + 0.5) * sy - 0.5).clamp(0.0, (ny - 1) as f64);
            for i in 0..tx {
                let fx = ((i as f64 + 0.5) * sx - 0.5).clamp(0.0, (nx - 1) as f64);
                let val = match interp {
                    Interp::Bilinear => {
                        let x0 = fx.floor() as usize;
                        let y0 = fy.floor() as usize;
                        let x1 = (x0 + 1).min(nx - 1);
                        let y1 = (y0 + 1).min(ny - 1);
                        let dx = fx - x0 as f64;
                        let dy = fy - y0 as f64;
                        let v00 = v.get(x0, y0, z);
                        let v10 = v.get(x1, y0, z);
                        let v01 = v.get(x0, y1, z);
                        let v11 = v.get(x1, y1, z);
                        v00 * (1.0 - dx) * (1.0 - dy)
                            + v10 * dx * (1.0 - dy)
                            + v01 * (1.0 - dx) * dy
                            + v11 * dx * dy
                    }
                    Interp::Nearest => {
                        let xi = fx.round() as usize;
                        let yi = fy.round() as usize;
                        v.get(xi.min(nx - 1), yi.min(ny - 1), z)
                    }
                };
                out[i + tx * (j + ty * z)] = val;
            }
        }
    }
    let spacing = (v.spacing.0 * sx, v.spacing.1 * sy, v.spacing.2);
    Volume::new((tx, ty, nz), spacing, out)
}

/// Min-max normalization to [0, 1] over the nonzero (brain) voxels.
///
/// Skull-stripped backgrounds are exactly 0 and stay 0; a constant nonzero
/// foreground maps to all-1.
pub fn normalize_volume(v: &Volume) -> Result<Volume> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &x in &v.data {
        if x != 0.0 {
            lo = lo.min(x);
            hi = hi.max(x);
        }
    }
    if lo > hi {
        // all-zero volume
        return Ok(v.clone());
    }
    let range = hi - lo;
    let data = v
        .data
        .iter()
        .map(|&x| {
            if x == 0.0 {
                0.0
            } else if range == 0.0 {
                1.0
            } else {
                (x - lo) / range
            }
        })
        .collect();
    Volume::new(v.dims, v.spacing, data)
}

/// One subject: four MRI sequences, the segmentation mask, and the grade.
#[derive(Debug, Clone)]
pub struct SubjectCase {
    pub id: String,
    pub flair: Volume,
    pub t1: Volume,
    pub t1ce: Volume,
    pub t2: Volume,
    pub seg: Volume,
    pub grade: Grade,
}

impl SubjectCase {
    /// The four modality volumes in fixed order (FLAIR, T1, T1CE, T2).
    pub fn modalities(&self) -> [&Volume; 4] {
        [&self.flair, &self.t1, &self.t1ce, &self.t2]
    }

    /// Checks that all five volumes share dims and spacing and that the
    /// segmentation uses only labels {0, 1, 2, 4}.
    pub fn validate(&self) -> Result<()> {
        let dims = self.flair.dims();
        let spacing = self.flair.spacing();
        for v in [&self.t1, &self.t1ce, &self.t2, &self.seg] {
            if v.dims() != dims {
                return Err(Error::DimMismatch(format!(
                    "subject {}: volume dims {:?} != {:?}",
                    self.id,
                    v.dims(),
                    dims
                )));
            }
            if v.spacing() != spacing {
                return Err(Error::DimMismatch(format!(
                    "subject {}: volume spacing {:?} != {:?}",
                    self.id,
                    v.spacing(),
                    spacing
                )));
            }
        }
        for &s in self.seg.data() {
            if s != 0.0 && s != 1.0 && s != 2.0 && s != 4.0 {
                return Err(Error::DimMismatch(format!(
                    "subject {}: segmentation label {} outside {{0,1,2,4}}",
                    self.id, s
                )));
            }
        }
        Ok(())
    }
}
