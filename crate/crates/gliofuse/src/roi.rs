//! Region-of-interest derivation from segmentation labels.
//!
//! Three regions feed feature extraction: ROI1 is healthy brain (nonzero
//! brain tissue with label 0), ROI2 is the necrotic/non-enhancing core
//! (label 1), ROI3 is the whole tumor (labels 1, 2 and 4). The numeric
//! labels follow the BraTS convention: 1 = necrotic/non-enhancing,
//! 2 = peritumoral edema, 4 = enhancing tumor.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::volume::Volume;

/// Binary voxel mask with the same dims as its source volume.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask {
    pub dims: (usize, usize, usize),
    pub bits: Vec<bool>,
}

impl Mask {
    pub fn new(dims: (usize, usize, usize)) -> Mask {
        Mask {
            dims,
            bits: vec![false; dims.0 * dims.1 * dims.2],
        }
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, z: usize) -> bool {
        self.bits[x + self.dims.0 * (y + self.dims.1 * z)]
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_subset_of(&self, other: &Mask) -> bool {
        self.dims == other.dims
            && self.bits.iter().zip(&other.bits).all(|(&a, &b)| !a || b)
    }

    pub fn intersects(&self, other: &Mask) -> bool {
        self.bits.iter().zip(&other.bits).any(|(&a, &b)| a && b)
    }

    /// Renders the mask as a 0/1-valued volume (for NIfTI export).
    pub fn to_volume(&self, spacing: (f64, f64, f64)) -> Volume {
        let data = self.bits.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
        Volume::new(self.dims, spacing, data).expect("mask dims are valid")
    }
}

/// Which segmentation labels feed each region, kept for auditability.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RoiLabelMap {
    pub roi1: String,
    pub roi2: Vec<u8>,
    pub roi3: Vec<u8>,
}

/// The three derived region masks.
#[derive(Debug, Clone)]
pub struct RoiSet {
    pub roi1: Mask,
    pub roi2: Mask,
    pub roi3: Mask,
    pub label_map: RoiLabelMap,
}

impl RoiSet {
    pub fn mask(&self, k: u8) -> &Mask {
        match k {
            1 => &self.roi1,
            2 => &self.roi2,
            3 => &self.roi3,
            _ => panic!("ROI index must be 1, 2 or 3"),
        }
    }
}

/// Derives the three ROIs from a segmentation volume and a brain-extent
/// volume (any modality; brain tissue is wherever it is nonzero).
///
/// `roi3_labels` defaults to {1, 2, 4}; a {2, 4} variant is accepted for
/// sensitivity runs. Returns `EmptyRoi(k)` for the first empty region, which
/// marks the subject unusable for per-ROI features.
pub fn derive_rois(seg: &Volume, brain: &Volume, roi3_labels: &[u8]) -> Result<RoiSet> {
    if seg.dims() != brain.dims() {
        return Err(Error::DimMismatch(format!(
            "seg dims {:?} != brain dims {:?}",
            seg.dims(),
            brain.dims()
        )));
    }
    let dims = seg.dims();
    let mut roi1 = Mask::new(dims);
    let mut roi2 = Mask::new(dims);
    let mut roi3 = Mask::new(dims);
    let labels: BTreeSet<u8> = roi3_labels.iter().copied().collect();
    for (i, (&s, &b)) in seg.data().iter().zip(brain.data()).enumerate() {
        let label = s as u8;
        roi1.bits[i] = b != 0.0 && label == 0;
        roi2.bits[i] = label == 1;
        roi3.bits[i] = label != 0 && labels.contains(&label);
    }
    for (k, m) in [(1u8, &roi1), (2, &roi2), (3, &roi3)] {
        if m.count() == 0 {
            return Err(Error::EmptyRoi(k));
        }
    }
    Ok(RoiSet {
        roi1,
        roi2,
        roi3,
        label_map: RoiLabelMap {
            roi1: "brain>0 & seg==0".into(),
            roi2: vec![1],
            roi3: roi3_labels.to_vec(),
        },
    })
}

/// A fused image paired with the mask that limits feature extraction.
#[derive(Debug, Clone)]
pub struct MaskedVolume<'a> {
    pub image: &'a Volume,
    pub mask: &'a Mask,
    pub voxel_count: usize,
}

/// Pairs an image with a mask; downstream feature code reads only the
/// masked voxels.
pub fn superimpose<'a>(image: &'a Volume, mask: &'a Mask) -> Result<MaskedVolume<'a>> {
    if image.dims() != mask.dims {
        return Err(Error::DimMismatch(format!(
            "image dims {:?} != mask dims {:?}",
            image.dims(),
            mask.dims
        )));
    }
    let voxel_count = mask.count();
    if voxel_count == 0 {
        return Err(Error::EmptyMask);
    }
    Ok(MaskedVolume {
        image,
        mask,
        voxel_count,
    })
}

impl MaskedVolume<'_> {
    /// The masked intensities, in voxel index order.
    pub fn values(&self) -> Vec<f64> {
        self.image
            .data()
            .iter()
            .zip(&self.mask.bits)
            .filter_map(|(&v, &b)| b.then_some(v))
            .collect()
    }
}
