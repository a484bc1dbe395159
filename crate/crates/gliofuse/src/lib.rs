#![allow(clippy::needless_range_loop)]

//! Glioma grading from multi-sequence MRI: single-level wavelet fusion of
//! FLAIR/T1/T1CE/T2, radiomics feature extraction on three tumor regions
//! (107 features each), PCA reduction, and HGG/LGG classification with
//! gradient-boosted trees, an RBF SVC and a random forest under stratified
//! 5-fold cross-validation.
//!
//! Module map:
//! - [`volume`], [`nifti`], [`synth`]: volumes, NIfTI-1 I/O, resize and
//!   normalization, and the deterministic phantom cohort generator.
//! - [`wavelet`]: db1 analysis/synthesis per slice, mean-value subband
//!   fusion, grayscale rescale.
//! - [`roi`]: region masks derived from segmentation labels.
//! - [`radiomics`]: shape, first-order and the five texture-matrix families,
//!   assembled into the fixed 321-column feature vector.
//! - [`pca`], [`table`]: feature table persistence and the eigendecomposition
//!   of its covariance.
//! - [`classifiers`], [`eval`]: the three models plus the cross-validation
//!   and metric machinery.
//! - [`config`], [`pipeline`]: the JSON-configured end-to-end run behind the
//!   `gliofuse` binary.

pub mod classifiers;
pub mod config;
pub mod error;
pub mod eval;
pub mod linalg;
pub mod nifti;
pub mod pca;
pub mod pipeline;
pub mod radiomics;
pub mod roi;
pub mod synth;
pub mod table;
pub mod volume;
pub mod wavelet;

pub use error::{Error, Result};
