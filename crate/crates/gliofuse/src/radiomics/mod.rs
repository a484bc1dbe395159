//! Radiomics feature extraction: shape, first-order intensity statistics and
//! the five texture-matrix families, computed per ROI on the fused volume
//! and assembled into a fixed 321-entry feature vector (107 features x 3
//! ROIs).
//!
//! Texture matrices are built in 3-D: co-occurrence and run-length over the
//! 13 unique axis/diagonal directions, dependence and gray-tone difference
//! over the 26-neighborhood, size zones over 26-connected components.

pub mod firstorder;
pub mod glcm;
pub mod gldm;
pub mod glrlm;
pub mod glszm;
pub mod ngtdm;
pub mod shape;

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::roi::{superimpose, MaskedVolume, RoiSet};
use crate::volume::Volume;

/// Gray-level discretization rule applied to masked intensities before any
/// texture matrix is built.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiscretizationPolicy {
    /// Split [min, max] of the masked intensities into `n` equal bins, top
    /// edge inclusive.
    FixedBinCount(usize),
    /// Bin label = floor((v - min)/w) + 1.
    FixedBinWidth(f64),
}

impl Default for DiscretizationPolicy {
    fn default() -> Self {
        DiscretizationPolicy::FixedBinCount(32)
    }
}

/// A masked ROI mapped to integer gray levels 1..=ng (0 outside the mask).
#[derive(Debug, Clone)]
pub struct DiscretizedRoi {
    pub dims: (usize, usize, usize),
    /// Per-voxel labels; 0 marks voxels outside the mask.
    pub labels: Vec<u32>,
    pub ng: usize,
    pub bin_edges: Vec<f64>,
    pub n_voxels: usize,
    pub spacing: (f64, f64, f64),
}

impl DiscretizedRoi {
    #[inline]
    pub fn label(&self, x: usize, y: usize, z: usize) -> u32 {
        self.labels[x + self.dims.0 * (y + self.dims.1 * z)]
    }

    /// Histogram of in-mask labels, indexed 0..ng (index = label - 1).
    pub fn histogram(&self) -> Vec<usize> {
        let mut hist = vec![0usize; self.ng];
        for &l in &self.labels {
            if l > 0 {
                hist[(l - 1) as usize] += 1;
            }
        }
        hist
    }
}

/// Maps masked intensities to gray levels per the given policy.
/// A constant-intensity ROI collapses to a single level.
pub fn discretize(mv: &MaskedVolume, policy: DiscretizationPolicy) -> DiscretizedRoi {
    let dims = mv.image.dims();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (&v, &inside) in mv.image.data().iter().zip(&mv.mask.bits) {
        if inside {
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    let n = dims.0 * dims.1 * dims.2;
    let mut labels = vec![0u32; n];
    let (ng, bin_edges) = match policy {
        DiscretizationPolicy::FixedBinCount(count) => {
            let count = count.max(1);
            if hi == lo {
                for (l, &inside) in labels.iter_mut().zip(&mv.mask.bits) {
                    if inside {
                        *l = 1;
                    }
                }
                (1, vec![lo, hi])
            } else {
                let width = (hi - lo) / count as f64;
                for (i, (&v, &inside)) in mv.image.data().iter().zip(&mv.mask.bits).enumerate() {
                    if inside {
                        let bin = (((v - lo) / width).floor() as usize).min(count - 1);
                        labels[i] = (bin + 1) as u32;
                    }
                }
                let edges = (0..=count).map(|i| lo + i as f64 * width).collect();
                (count, edges)
            }
        }
        DiscretizationPolicy::FixedBinWidth(width) => {
            let width = if width > 0.0 { width } else { 1.0 };
            let mut ng = 1;
            for (i, (&v, &inside)) in mv.image.data().iter().zip(&mv.mask.bits).enumerate() {
                if inside {
                    let bin = ((v - lo) / width).floor() as usize + 1;
                    labels[i] = bin as u32;
                    ng = ng.max(bin);
                }
            }
            let edges = (0..=ng).map(|i| lo + i as f64 * width).collect();
            (ng, edges)
        }
    };
    DiscretizedRoi {
        dims,
        labels,
        ng,
        bin_edges,
        n_voxels: mv.voxel_count,
        spacing: mv.image.spacing(),
    }
}

/// The 13 unique Chebyshev-distance-1 directions in 3-D (one per +/- pair).
pub const DIRECTIONS_13: [(i64, i64, i64); 13] = [
    (1, 0, 0),
    (0, 1, 0),
    (0, 0, 1),
    (1, 1, 0),
    (1, -1, 0),
    (1, 0, 1),
    (1, 0, -1),
    (0, 1, 1),
    (0, 1, -1),
    (1, 1, 1),
    (1, 1, -1),
    (1, -1, 1),
    (1, -1, -1),
];

/// All 26 neighbor offsets at Chebyshev distance 1.
pub fn neighborhood_26() -> Vec<(i64, i64, i64)> {
    let mut out = Vec::with_capacity(26);
    for dz in -1i64..=1 {
        for dy in -1i64..=1 {
            for dx in -1i64..=1 {
                if (dx, dy, dz) != (0, 0, 0) {
                    out.push((dx, dy, dz));
                }
            }
        }
    }
    out
}

/// xlog2x with the 0 log 0 = 0 convention used by every entropy here.
#[inline]
pub(crate) fn entropy_term(p: f64) -> f64 {
    if p > 0.0 {
        -p * p.log2()
    } else {
        0.0
    }
}

pub const FAMILY_NAMES: [(&str, &[&str]); 7] = [
    ("shape", &shape::NAMES),
    ("firstorder", &firstorder::NAMES),
    ("glcm", &glcm::NAMES),
    ("gldm", &gldm::NAMES),
    ("glrlm", &glrlm::NAMES),
    ("glszm", &glszm::NAMES),
    ("ngtdm", &ngtdm::NAMES),
];

/// Features per ROI (14 shape + 18 first-order + 24 GLCM + 14 GLDM +
/// 16 GLRLM + 16 GLSZM + 5 NGTDM).
pub const FEATURES_PER_ROI: usize = 107;
/// Total vector length across the three ROIs.
pub const FEATURE_COUNT: usize = 3 * FEATURES_PER_ROI;
/// Bumped whenever the name list or ordering changes.
pub const MANIFEST_VERSION: u32 = 1;

/// The frozen column order: ROI1 block, then ROI2, then ROI3; within each
/// block the families in [`FAMILY_NAMES`] order.
pub fn feature_manifest() -> &'static [String] {
    static MANIFEST: OnceLock<Vec<String>> = OnceLock::new();
    MANIFEST.get_or_init(|| {
        let mut names = Vec::with_capacity(FEATURE_COUNT);
        for roi in 1..=3 {
            for (family, features) in FAMILY_NAMES {
                for f in features {
                    names.push(format!("{family}_{f}_ROI{roi}"));
                }
            }
        }
        assert_eq!(names.len(), FEATURE_COUNT);
        names
    })
}

/// One subject's ordered feature values, aligned with [`feature_manifest`].
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    values: Vec<f64>,
}

impl FeatureVector {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        feature_manifest()
            .iter()
            .position(|n| n == name)
            .map(|i| self.values[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&'static str, f64)> + '_ {
        feature_manifest()
            .iter()
            .map(|s| s.as_str())
            .zip(self.values.iter().copied())
    }
}

/// Extraction knobs shared by all texture families.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ExtractionConfig {
    #[serde(default)]
    pub discretization: DiscretizationPolicy,
}

/// Computes the 107-feature set on one masked ROI.
pub fn roi_features(mv: &MaskedVolume, cfg: &ExtractionConfig) -> Vec<f64> {
    let d = discretize(mv, cfg.discretization);
    let mut out = Vec::with_capacity(FEATURES_PER_ROI);
    out.extend(shape::compute(mv.mask, mv.image.spacing()));
    out.extend(firstorder::compute(mv, &d));
    out.extend(glcm::compute(&d));
    out.extend(gldm::compute(&d));
    out.extend(glrlm::compute(&d));
    out.extend(glszm::compute(&d));
    out.extend(ngtdm::compute(&d));
    debug_assert_eq!(out.len(), FEATURES_PER_ROI);
    out
}

/// Assembles the full per-subject vector: the 107 features of each ROI,
/// concatenated in ROI1/ROI2/ROI3 order.
pub fn extract_feature_vector(
    fused: &Volume,
    rois: &RoiSet,
    cfg: &ExtractionConfig,
) -> Result<FeatureVector> {
    let mut values = Vec::with_capacity(FEATURE_COUNT);
    for k in 1..=3u8 {
        let mv = superimpose(fused, rois.mask(k)).map_err(|e| match e {
            Error::EmptyMask => Error::EmptyRoi(k),
            other => other,
        })?;
        values.extend(roi_features(&mv, cfg));
    }
    debug_assert_eq!(values.len(), FEATURE_COUNT);
    if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::DimMismatch(format!(
            "non-finite feature {}",
            feature_manifest()[bad]
        )));
    }
    Ok(FeatureVector { values })
}
