//! Pipeline configuration: a single JSON document, schema-checked on load.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::classifiers::{GbtConfig, RfConfig, SvcConfig};
use crate::error::{Error, Result};
use crate::radiomics::DiscretizationPolicy;
use crate::wavelet::FusionConfig;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataSource {
    /// Cohort regenerated from a synthetic manifest (ids, seeds, grades).
    Synthetic { manifest: PathBuf },
    /// Directory of per-subject NIfTI folders laid out as
    /// `<id>/<id>_{flair,t1,t1ce,t2,seg}.nii[.gz]`.
    Directory {
        path: PathBuf,
        /// Optional filename override with `{id}` and `{seq}` placeholders.
        #[serde(default)]
        pattern: Option<String>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureMode {
    /// Classifiers consume PC scores at the variance threshold (default).
    PcScores,
    /// Classifiers consume the single core-energy feature.
    EnergyRoi2,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PcaSettings {
    #[serde(default = "default_true")]
    pub standardize: bool,
    #[serde(default = "default_variance_threshold")]
    pub variance_threshold: f64,
    #[serde(default = "default_feature_mode")]
    pub feature_mode: FeatureMode,
}

fn default_true() -> bool {
    true
}

fn default_variance_threshold() -> f64 {
    0.85
}

fn default_feature_mode() -> FeatureMode {
    FeatureMode::PcScores
}

impl Default for PcaSettings {
    fn default() -> Self {
        PcaSettings {
            standardize: true,
            variance_threshold: 0.85,
            feature_mode: FeatureMode::PcScores,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CvSettings {
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_k() -> usize {
    5
}

impl Default for CvSettings {
    fn default() -> Self {
        CvSettings { k: 5, seed: 0 }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ClassifierSettings {
    #[serde(default)]
    pub gbt: GbtConfig,
    #[serde(default)]
    pub svc: SvcConfig,
    #[serde(default)]
    pub rf: RfConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub data: DataSource,
    #[serde(default = "default_resize")]
    pub resize: (usize, usize),
    #[serde(default)]
    pub wavelet: FusionConfig,
    #[serde(default)]
    pub discretization: DiscretizationPolicy,
    #[serde(default = "default_roi3_labels")]
    pub roi3_labels: Vec<u8>,
    #[serde(default)]
    pub pca: PcaSettings,
    #[serde(default)]
    pub classifiers: ClassifierSettings,
    #[serde(default)]
    pub cv: CvSettings,
    pub output_dir: PathBuf,
}

fn default_resize() -> (usize, usize) {
    (128, 128)
}

fn default_roi3_labels() -> Vec<u8> {
    vec![1, 2, 4]
}

impl PipelineConfig {
    /// Parses and validates a config file; JSON syntax errors keep their
    /// line/column positions.
    pub fn load(path: &Path) -> Result<PipelineConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|_| Error::MissingInput(path.display().to_string()))?;
        let cfg: PipelineConfig = serde_json::from_str(&text)
            .map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.cv.k < 2 {
            return Err(Error::InvalidConfig(format!(
                "cv.k must be >= 2, got {}",
                self.cv.k
            )));
        }
        if !(self.pca.variance_threshold > 0.0 && self.pca.variance_threshold <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "pca.variance_threshold must be in (0, 1], got {}",
                self.pca.variance_threshold
            )));
        }
        if self.resize.0 == 0 || self.resize.1 == 0 {
            return Err(Error::InvalidConfig("resize dims must be >= 1".into()));
        }
        if self.wavelet.levels == 0 {
            return Err(Error::InvalidConfig("wavelet.levels must be >= 1".into()));
        }
        if self.roi3_labels.is_empty()
            || self.roi3_labels.iter().any(|l| ![1, 2, 4].contains(l))
        {
            return Err(Error::InvalidConfig(format!(
                "roi3_labels must be a nonempty subset of {{1,2,4}}, got {:?}",
                self.roi3_labels
            )));
        }
        match &self.data {
            DataSource::Synthetic { manifest } => {
                if !manifest.exists() {
                    return Err(Error::InvalidConfig(format!(
                        "synthetic manifest {} does not exist",
                        manifest.display()
                    )));
                }
            }
            DataSource::Directory { path, .. } => {
                if !path.is_dir() {
                    return Err(Error::InvalidConfig(format!(
                        "data directory {} does not exist",
                        path.display()
                    )));
                }
            }
        }
        Ok(())
    }

    /// Canonical JSON used for the reproducibility hash in run manifests.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal_config(dir: &Path) -> PipelineConfig {
        let manifest = dir.join("cohort.json");
        std::fs::write(
            &manifest,
            serde_json::to_string(&crate::synth::CohortManifest::generate(3, 3, 0)).unwrap(),
        )
        .unwrap();
        PipelineConfig {
            data: DataSource::Synthetic { manifest },
            resize: default_resize(),
            wavelet: FusionConfig::default(),
            discretization: DiscretizationPolicy::default(),
            roi3_labels: default_roi3_labels(),
            pca: PcaSettings::default(),
            classifiers: ClassifierSettings::default(),
            cv: CvSettings::default(),
            output_dir: dir.join("out"),
        }
    }

    #[test]
    fn k_below_two_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = minimal_config(dir.path());
        cfg.cv.k = 1;
        assert!(matches!(cfg.validate(), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn defaults_fill_in_from_minimal_json() {
        let dir = tempfile::tempdir().unwrap();
        let manifest = dir.path().join("cohort.json");
        std::fs::write(
            &manifest,
            serde_json::to_string(&crate::synth::CohortManifest::generate(2, 2, 0)).unwrap(),
        )
        .unwrap();
        let path = dir.path().join("config.json");
        std::fs::write(
            &path,
            format!(
                r#"{{"data":{{"synthetic":{{"manifest":{:?}}}}},"output_dir":{:?}}}"#,
                manifest.display().to_string(),
                dir.path().join("out").display().to_string()
            ),
        )
        .unwrap();
        let cfg = PipelineConfig::load(&path).unwrap();
        assert_eq!(cfg.cv.k, 5);
        assert_eq!(cfg.resize, (128, 128));
        assert_eq!(cfg.pca.feature_mode, FeatureMode::PcScores);
    }

    #[test]
    fn syntax_errors_carry_positions() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.json");
        std::fs::write(&path, "{\n  \"data\": {\n").unwrap();
        match PipelineConfig::load(&path) {
            Err(Error::InvalidConfig(msg)) => assert!(msg.contains("line"), "{msg}"),
            other => panic!("expected InvalidConfig, got {other:?}"),
        }
    }
}
