//! End-to-end orchestration: ingest or synthesize a cohort, fuse, derive
//! ROIs, extract features, persist the feature table, reduce with PCA,
//! cross-validate the three classifiers, and emit CSV/JSON reports.
//!
//! Stage outputs are cached by a content hash of their inputs, so re-runs
//! skip completed stages and deleting a downstream artifact reproduces it
//! bit-identically from the cached upstream ones.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::classifiers::{
    train_gbt, train_rf, train_svc, Classifier, ModelFile, TrainSet,
};
use crate::config::{DataSource, FeatureMode, PipelineConfig};
use crate::error::{Error, Result};
use crate::eval::{confusion, cross_validate, descriptive_stats, metrics, pearson_r, CvReport, DescriptiveStats, MetricSet};
use crate::nifti::read_nifti_file;
use crate::pca::{fit_pca, PcaModel};
use crate::radiomics::{extract_feature_vector, feature_manifest, ExtractionConfig, MANIFEST_VERSION};
use crate::roi::derive_rois;
use crate::synth::CohortManifest;
use crate::table::{read_feature_table, write_feature_table, FeatureTable};
use crate::volume::{normalize_volume, resize_volume, Grade, Interp, SubjectCase, Volume};
use crate::wavelet::fuse_subject;

pub const CLASSIFIER_NAMES: [&str; 3] = ["gbt", "svc", "rf"];

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SubjectStatus {
    pub id: String,
    pub grade: Grade,
    pub status: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub config_sha256: String,
    pub code_version: String,
    pub feature_manifest_version: u32,
    pub cv_seed: u64,
    pub subjects: Vec<SubjectStatus>,
    pub outputs: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct ReportBundle {
    pub features_csv: PathBuf,
    pub scree_csv: PathBuf,
    pub loadings_csv: PathBuf,
    pub report_paths: BTreeMap<String, PathBuf>,
    pub roc_paths: BTreeMap<String, PathBuf>,
    pub manifest_path: PathBuf,
    pub skipped: Vec<SubjectStatus>,
}

fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    hex_string(&hasher.finalize())
}

fn hex_string(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

// Stage cache: skip a stage when its input hash matches and every output
// exists.
fn stage_fresh(cache_file: &Path, input_hash: &str, outputs: &[&Path]) -> bool {
    outputs.iter().all(|p| p.exists())
        && std::fs::read_to_string(cache_file)
            .map(|h| h.trim() == input_hash)
            .unwrap_or(false)
}

fn mark_stage(cache_file: &Path, input_hash: &str) -> Result<()> {
    if let Some(dir) = cache_file.parent() {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(cache_file, input_hash)?;
    Ok(())
}

/// Loads the cohort named by the config. Directory subjects are resized to
/// the pipeline dims and modality volumes are min-max normalized; synthetic
/// phantoms are generated at pipeline dims already.
pub fn load_cohort(cfg: &PipelineConfig, subject_filter: Option<&str>) -> Result<Vec<SubjectCase>> {
    let mut cohort = match &cfg.data {
        DataSource::Synthetic { manifest } => {
            let text = std::fs::read_to_string(manifest)
                .map_err(|_| Error::MissingInput(manifest.display().to_string()))?;
            let manifest: CohortManifest = serde_json::from_str(&text)
                .map_err(|e| Error::InvalidConfig(format!("cohort manifest: {e}")))?;
            let mut cases: Vec<SubjectCase> = manifest
                .subjects
                .par_iter()
                .map(|spec| {
                    let mut case = manifest.realize(spec);
                    for vol in [&mut case.flair, &mut case.t1, &mut case.t1ce, &mut case.t2] {
                        *vol = normalize_volume(vol)?;
                    }
                    Ok(case)
                })
                .collect::<Result<_>>()?;
            cases.sort_by(|a, b| a.id.cmp(&b.id));
            cases
        }
        DataSource::Directory { path, pattern } => {
            let mut ids: Vec<String> = std::fs::read_dir(path)?
                .filter_map(|e| e.ok())
                .filter(|e| e.path().is_dir())
                .map(|e| e.file_name().to_string_lossy().into_owned())
                .collect();
            ids.sort();
            ids.par_iter()
                .map(|id| load_directory_subject(path, id, pattern.as_deref(), cfg.resize))
                .collect::<Result<_>>()?
        }
    };
    if let Some(filter) = subject_filter {
        cohort.retain(|c| glob_match(filter, &c.id));
    }
    if cohort.is_empty() {
        return Err(Error::MissingInput("no subjects matched the data source".into()));
    }
    Ok(cohort)
}

// Minimal glob: '*' matches any run of characters.
fn glob_match(pattern: &str, text: &str) -> bool {
    let parts: Vec<&str> = pattern.split('*').collect();
    if parts.len() == 1 {
        return pattern == text;
    }
    let mut pos = 0usize;
    for (i, part) in parts.iter().enumerate() {
        if part.is_empty() {
            continue;
        }
        match text[pos..].find(part) {
            Some(found) => {
                if i == 0 && found != 0 {
                    return false;
                }
                pos += found + part.len();
            }
            None => return false,
        }
    }
    parts.last().map(|p| p.is_empty() || text.ends_with(p)).unwrap_or(true)
}

fn find_sequence_file(dir: &Path, id: &str, seq: &str, pattern: Option<&str>) -> Result<PathBuf> {
    let candidates: Vec<PathBuf> = match pattern {
        Some(p) => {
            let name = p.replace("{id}", id).replace("{seq}", seq);
            vec![dir.join(id).join(&name)]
        }
        None => vec![
            dir.join(id).join(format!("{id}_{seq}.nii.gz")),
            dir.join(id).join(format!("{id}_{seq}.nii")),
        ],
    };
    candidates
        .into_iter()
        .find(|p| p.exists())
        .ok_or_else(|| Error::MissingInput(format!("{id}: no {seq} volume found")))
}

fn load_directory_subject(
    root: &Path,
    id: &str,
    pattern: Option<&str>,
    resize: (usize, usize),
) -> Result<SubjectCase> {
    let read = |seq: &str| -> Result<Volume> {
        read_nifti_file(&find_sequence_file(root, id, seq, pattern)?)
    };
    let prep = |v: Volume| -> Result<Volume> {
        normalize_volume(&resize_volume(&v, resize, Interp::Bilinear)?)
    };
    let grade_file = root.join(id).join("grade.txt");
    let grade = std::fs::read_to_string(&grade_file)
        .ok()
        .and_then(|s| Grade::parse(s.trim()))
        .ok_or_else(|| Error::MissingInput(format!("{id}: grade.txt with HGG or LGG")))?;
    let case = SubjectCase {
        id: id.to_string(),
        flair: prep(read("flair")?)?,
        t1: prep(read("t1")?)?,
        t1ce: prep(read("t1ce")?)?,
        t2: prep(read("t2")?)?,
        seg: resize_volume(&read("seg")?, resize, Interp::Nearest)?,
        grade,
    };
    case.validate()?;
    Ok(case)
}

/// Fuse + derive ROIs + extract the 321-feature vector for one subject.
/// An empty ROI is a per-subject skip, not a pipeline failure.
pub fn process_subject(
    case: &SubjectCase,
    cfg: &PipelineConfig,
) -> std::result::Result<Vec<f64>, String> {
    let fused = fuse_subject(case, &cfg.wavelet).map_err(|e| e.to_string())?;
    let rois = derive_rois(&case.seg, &case.flair, &cfg.roi3_labels).map_err(|e| e.to_string())?;
    let extraction = ExtractionConfig {
        discretization: cfg.discretization,
    };
    extract_feature_vector(&fused, &rois, &extraction)
        .map(|fv| fv.values().to_vec())
        .map_err(|e| e.to_string())
}

fn cohort_identity(cfg: &PipelineConfig) -> Result<Vec<u8>> {
    match &cfg.data {
        DataSource::Synthetic { manifest } => Ok(std::fs::read(manifest)?),
        DataSource::Directory { path, .. } => {
            let mut listing: Vec<String> = Vec::new();
            for entry in walk_files(path)? {
                let len = entry.metadata().map(|m| m.len()).unwrap_or(0);
                listing.push(format!("{}:{len}", entry.display()));
            }
            listing.sort();
            Ok(listing.join("\n").into_bytes())
        }
    }
}

fn walk_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir)? {
        let path = entry?.path();
        if path.is_dir() {
            out.extend(walk_files(&path)?);
        } else {
            out.push(path);
        }
    }
    Ok(out)
}

/// Feature-extraction stage: returns the table plus per-subject statuses,
/// writing features.csv (cached on the cohort + preprocessing config).
pub fn stage_features(
    cfg: &PipelineConfig,
    subject_filter: Option<&str>,
) -> Result<(FeatureTable, Vec<SubjectStatus>)> {
    let out_dir = &cfg.output_dir;
    let features_csv = out_dir.join("features.csv");
    let statuses_json = out_dir.join("cache").join("subject_status.json");
    let hash_input = {
        let mut h = cohort_identity(cfg)?;
        let knobs = serde_json::json!({
            "resize": cfg.resize,
            "wavelet": cfg.wavelet,
            "discretization": cfg.discretization,
            "roi3_labels": cfg.roi3_labels,
            "filter": subject_filter,
            "manifest_version": MANIFEST_VERSION,
        });
        h.extend_from_slice(knobs.to_string().as_bytes());
        h
    };
    let hash = sha256_hex(&hash_input);
    let cache_file = out_dir.join("cache").join("features.hash");
    if stage_fresh(&cache_file, &hash, &[&features_csv, &statuses_json]) {
        log::info!("features stage cached, skipping");
        let table = read_feature_table(&features_csv)?;
        let statuses: Vec<SubjectStatus> =
            serde_json::from_str(&std::fs::read_to_string(&statuses_json)?)?;
        return Ok((table, statuses));
    }

    let cohort = load_cohort(cfg, subject_filter)?;
    let results: Vec<(String, Grade, std::result::Result<Vec<f64>, String>)> = cohort
        .par_iter()
        .map(|case| (case.id.clone(), case.grade, process_subject(case, cfg)))
        .collect();

    let mut table = FeatureTable::new(feature_manifest().to_vec());
    let mut statuses = Vec::with_capacity(results.len());
    for (id, grade, outcome) in results {
        match outcome {
            Ok(values) => {
                table.push(id.clone(), grade, values)?;
                statuses.push(SubjectStatus {
                    id,
                    grade,
                    status: "ok".into(),
                });
            }
            Err(reason) => {
                log::warn!("skipping subject {id}: {reason}");
                statuses.push(SubjectStatus {
                    id,
                    grade,
                    status: format!("skipped: {reason}"),
                });
            }
        }
    }
    std::fs::create_dir_all(out_dir)?;
    write_feature_table(&table, &features_csv)?;
    std::fs::create_dir_all(statuses_json.parent().unwrap())?;
    std::fs::write(&statuses_json, serde_json::to_string_pretty(&statuses)?)?;
    std::fs::write(
        out_dir.join("feature_manifest.txt"),
        format!(
            "version {MANIFEST_VERSION}\n{}\n",
            feature_manifest().join("\n")
        ),
    )?;
    mark_stage(&cache_file, &hash)?;
    Ok((table, statuses))
}

fn write_scree_and_loadings(out_dir: &Path, table: &FeatureTable, standardize: bool) -> Result<(PathBuf, PathBuf)> {
    let scree_csv = out_dir.join("scree.csv");
    let loadings_csv = out_dir.join("loadings.csv");
    let model = fit_pca(table, standardize)?;
    let mut scree = String::from("component,explained_ratio,cumulative\n");
    for (c, ratio, cum) in model.scree_report() {
        scree.push_str(&format!("{c},{ratio:.16e},{cum:.16e}\n"));
    }
    std::fs::write(&scree_csv, scree)?;

    let mut loadings = String::from("component,feature,loading\n");
    for component in 1..=model.n_components().min(2) {
        for (name, value) in model.top_loadings(component, 10) {
            loadings.push_str(&format!("{component},{name},{value:.16e}\n"));
        }
    }
    std::fs::write(&loadings_csv, loadings)?;
    std::fs::write(
        out_dir.join("pca_model.json"),
        serde_json::to_string(&model)?,
    )?;

    // per-grade loading reports where each grade has enough rows
    for grade in [Grade::Hgg, Grade::Lgg] {
        let rows: Vec<usize> = (0..table.n_rows())
            .filter(|&i| table.grades[i] == grade)
            .collect();
        if rows.len() < 2 {
            continue;
        }
        let mut sub = FeatureTable::new(table.column_names.clone());
        for &i in &rows {
            sub.push(
                table.subject_ids[i].clone(),
                table.grades[i],
                table.rows[i].clone(),
            )?;
        }
        let m = fit_pca(&sub, standardize)?;
        let mut text = String::from("component,feature,loading\n");
        for component in 1..=m.n_components().min(2) {
            for (name, value) in m.top_loadings(component, 10) {
                text.push_str(&format!("{component},{name},{value:.16e}\n"));
            }
        }
        std::fs::write(out_dir.join(format!("loadings_{}.csv", grade.as_str())), text)?;
    }
    Ok((scree_csv, loadings_csv))
}

/// PCA (or single-feature) reduction fitted on training rows only, wrapped
/// around a classifier so cross-validation cannot leak held-out rows.
#[derive(Serialize, Deserialize)]
pub struct ReducedModel<M> {
    pub reducer: Reducer,
    pub inner: M,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reducer {
    Pca { model: PcaModel, k: usize },
    SingleColumn { index: usize, width: usize },
}

impl Reducer {
    pub fn input_width(&self) -> usize {
        match self {
            Reducer::Pca { model, .. } => model.mean.len(),
            Reducer::SingleColumn { width, .. } => *width,
        }
    }

    pub fn reduce(&self, row: &[f64]) -> Vec<f64> {
        match self {
            Reducer::Pca { model, k } => model.transform_row(row, *k),
            Reducer::SingleColumn { index, .. } => vec![row[*index]],
        }
    }
}

impl<M: Classifier> Classifier for ReducedModel<M> {
    fn n_features(&self) -> usize {
        self.reducer.input_width()
    }

    fn predict_proba(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.reducer.input_width() {
            return Err(Error::WidthMismatch {
                expected: self.reducer.input_width(),
                got: x.len(),
            });
        }
        self.inner.predict_proba(&self.reducer.reduce(x))
    }
}

/// Builds the per-fold reducer+classifier fit for one classifier kind.
pub fn fit_reduced(
    cfg: &PipelineConfig,
    kind: &str,
    x: &[Vec<f64>],
    y: &[Grade],
) -> Result<ReducedModel<ModelFile>> {
    let reducer = match cfg.pca.feature_mode {
        FeatureMode::EnergyRoi2 => {
            let index = feature_manifest()
                .iter()
                .position(|n| n == "firstorder_Energy_ROI2")
                .expect("manifest contains the core energy feature");
            Reducer::SingleColumn {
                index,
                width: feature_manifest().len(),
            }
        }
        FeatureMode::PcScores => {
            let mut table = FeatureTable::new(feature_manifest().to_vec());
            for (i, (row, &grade)) in x.iter().zip(y).enumerate() {
                table.push(format!("row{i}"), grade, row.clone())?;
            }
            let model = fit_pca(&table, cfg.pca.standardize)?;
            let k = model.select_components(cfg.pca.variance_threshold);
            Reducer::Pca { model, k }
        }
    };
    let reduced_x: Vec<Vec<f64>> = x.iter().map(|r| reducer.reduce(r)).collect();
    let set = TrainSet::new(reduced_x, y.to_vec())?;
    let inner = match kind {
        "gbt" => ModelFile::Gbt(train_gbt(&set, &cfg.classifiers.gbt)?),
        "svc" => ModelFile::Svc(train_svc(&set, &cfg.classifiers.svc)?),
        "rf" => ModelFile::Rf(train_rf(&set, &cfg.classifiers.rf)?),
        other => return Err(Error::InvalidConfig(format!("unknown classifier {other}"))),
    };
    Ok(ReducedModel { reducer, inner })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassifierReport {
    pub classifier: String,
    pub feature_mode: String,
    pub training: MetricSet,
    pub training_confusion: crate::eval::ConfusionMatrix,
    pub cross_validation: CvReport,
}

fn classifier_report(
    cfg: &PipelineConfig,
    kind: &str,
    table: &FeatureTable,
) -> Result<ClassifierReport> {
    let x = &table.rows;
    let y = &table.grades;

    // training block: fit on everything, evaluate on everything
    let full = fit_reduced(cfg, kind, x, y)?;
    let mut scores = Vec::with_capacity(x.len());
    let mut pred = Vec::with_capacity(x.len());
    for row in x {
        let p = full.predict_proba(row)?;
        scores.push(p);
        pred.push(if p >= 0.5 { Grade::Hgg } else { Grade::Lgg });
    }
    let train_cm = confusion(&pred, y)?;
    let training = metrics(&train_cm, Some((&scores, y)))?;

    let cross_validation = cross_validate(x, y, cfg.cv.k, cfg.cv.seed, |fx, fy| {
        fit_reduced(cfg, kind, fx, fy)
    })?;

    std::fs::write(
        cfg.output_dir.join(format!("model_{kind}.json")),
        serde_json::to_string(&full)?,
    )?;

    Ok(ClassifierReport {
        classifier: kind.to_string(),
        feature_mode: match cfg.pca.feature_mode {
            FeatureMode::PcScores => "pc_scores".into(),
            FeatureMode::EnergyRoi2 => "energy_roi2".into(),
        },
        training,
        training_confusion: train_cm,
        cross_validation,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnergyStats {
    pub hgg: DescriptiveStats,
    pub lgg: DescriptiveStats,
    /// Correlation between the rank-paired core energies of the two grades
    /// (paired up to the smaller cohort, ids sorted).
    pub pearson_r: Option<f64>,
}

fn energy_stats(table: &FeatureTable) -> Result<Option<EnergyStats>> {
    let idx = match table.column_index("firstorder_Energy_ROI2") {
        Some(i) => i,
        None => return Ok(None),
    };
    let mut hgg: Vec<f64> = Vec::new();
    let mut lgg: Vec<f64> = Vec::new();
    for (row, grade) in table.rows.iter().zip(&table.grades) {
        match grade {
            Grade::Hgg => hgg.push(row[idx]),
            Grade::Lgg => lgg.push(row[idx]),
        }
    }
    if hgg.len() < 2 || lgg.len() < 2 {
        return Ok(None);
    }
    let n = hgg.len().min(lgg.len());
    let r = pearson_r(&hgg[..n], &lgg[..n]).ok();
    Ok(Some(EnergyStats {
        hgg: descriptive_stats(&hgg)?,
        lgg: descriptive_stats(&lgg)?,
        pearson_r: r,
    }))
}

/// Cross-validation + report stage for all three classifiers (cached on the
/// feature table and the model/CV config).
pub fn stage_evaluate(cfg: &PipelineConfig, table: &FeatureTable) -> Result<BTreeMap<String, ClassifierReport>> {
    let out_dir = &cfg.output_dir;
    let hash_input = {
        let mut h = std::fs::read(out_dir.join("features.csv")).unwrap_or_default();
        let knobs = serde_json::json!({
            "pca": {"standardize": cfg.pca.standardize, "threshold": cfg.pca.variance_threshold,
                     "mode": match cfg.pca.feature_mode { FeatureMode::PcScores => "pc", FeatureMode::EnergyRoi2 => "energy" }},
            "classifiers": cfg.classifiers,
            "cv": {"k": cfg.cv.k, "seed": cfg.cv.seed},
        });
        h.extend_from_slice(knobs.to_string().as_bytes());
        h
    };
    let hash = sha256_hex(&hash_input);
    let cache_file = out_dir.join("cache").join("evaluate.hash");
    let report_paths: Vec<PathBuf> = CLASSIFIER_NAMES
        .iter()
        .map(|k| out_dir.join(format!("report_{k}.json")))
        .collect();
    let outputs: Vec<&Path> = report_paths.iter().map(|p| p.as_path()).collect();
    if stage_fresh(&cache_file, &hash, &outputs) {
        log::info!("evaluate stage cached, skipping");
        let mut reports = BTreeMap::new();
        for (kind, path) in CLASSIFIER_NAMES.iter().zip(&report_paths) {
            reports.insert(
                kind.to_string(),
                serde_json::from_str(&std::fs::read_to_string(path)?)?,
            );
        }
        return Ok(reports);
    }

    let mut reports = BTreeMap::new();
    for kind in CLASSIFIER_NAMES {
        let report = classifier_report(cfg, kind, table)?;
        std::fs::write(
            out_dir.join(format!("report_{kind}.json")),
            serde_json::to_string_pretty(&report)?,
        )?;
        let mut roc = String::from("fpr,tpr,threshold\n");
        for p in &report.cross_validation.pooled_roc {
            roc.push_str(&format!("{:.16e},{:.16e},{:.16e}\n", p.fpr, p.tpr, p.threshold));
        }
        std::fs::write(out_dir.join(format!("roc_{kind}.csv")), roc)?;
        let mut folds = String::from(
            "fold,tp,fn,fp,tn,accuracy,precision,recall,f1,specificity,auc\n",
        );
        for f in &report.cross_validation.folds {
            folds.push_str(&format!(
                "{},{},{},{},{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
                f.fold,
                f.confusion.tp,
                f.confusion.fn_,
                f.confusion.fp,
                f.confusion.tn,
                f.metrics.accuracy,
                f.metrics.precision,
                f.metrics.recall,
                f.metrics.f1,
                f.metrics.specificity,
                f.metrics.auc
            ));
        }
        std::fs::write(out_dir.join(format!("folds_{kind}.csv")), folds)?;
        reports.insert(kind.to_string(), report);
    }
    if let Some(stats) = energy_stats(table)? {
        std::fs::write(
            out_dir.join("energy_stats.json"),
            serde_json::to_string_pretty(&stats)?,
        )?;
    }
    mark_stage(&cache_file, &hash)?;
    Ok(reports)
}

/// Runs every stage and writes the run manifest. `force` clears a manifest
/// recorded under a different config hash; without it such a rerun errors.
pub fn run_pipeline(
    cfg: &PipelineConfig,
    force: bool,
    subject_filter: Option<&str>,
) -> Result<ReportBundle> {
    cfg.validate()?;
    let out_dir = &cfg.output_dir;
    std::fs::create_dir_all(out_dir)?;
    let config_hash = sha256_hex(cfg.canonical_json().as_bytes());
    let manifest_path = out_dir.join("manifest.json");
    if manifest_path.exists() {
        let existing: RunManifest =
            serde_json::from_str(&std::fs::read_to_string(&manifest_path)?)?;
        if existing.config_sha256 != config_hash {
            if !force {
                return Err(Error::InvalidConfig(format!(
                    "{} holds a run with a different config hash; rerun with --force or use a fresh directory",
                    out_dir.display()
                )));
            }
            std::fs::remove_dir_all(out_dir.join("cache")).ok();
        }
    }

    let (table, statuses) = stage_features(cfg, subject_filter)?;
    if table.n_rows() < 2 {
        return Err(Error::TooFewRows(table.n_rows()));
    }
    let (scree_csv, loadings_csv) = write_scree_and_loadings(out_dir, &table, cfg.pca.standardize)?;
    let reports = stage_evaluate(cfg, &table)?;

    let mut outputs = vec![
        "features.csv".to_string(),
        "feature_manifest.txt".to_string(),
        "scree.csv".to_string(),
        "loadings.csv".to_string(),
        "pca_model.json".to_string(),
    ];
    let mut report_paths = BTreeMap::new();
    let mut roc_paths = BTreeMap::new();
    for kind in reports.keys() {
        outputs.push(format!("report_{kind}.json"));
        outputs.push(format!("roc_{kind}.csv"));
        outputs.push(format!("model_{kind}.json"));
        report_paths.insert(kind.clone(), out_dir.join(format!("report_{kind}.json")));
        roc_paths.insert(kind.clone(), out_dir.join(format!("roc_{kind}.csv")));
    }
    let manifest = RunManifest {
        config_sha256: config_hash,
        code_version: env!("CARGO_PKG_VERSION").to_string(),
        feature_manifest_version: MANIFEST_VERSION,
        cv_seed: cfg.cv.seed,
        subjects: statuses.clone(),
        outputs,
    };
    std::fs::write(&manifest_path, serde_json::to_string_pretty(&manifest)?)?;

    Ok(ReportBundle {
        features_csv: out_dir.join("features.csv"),
        scree_csv,
        loadings_csv,
        report_paths,
        roc_paths,
        manifest_path,
        skipped: statuses
            .into_iter()
            .filter(|s| s.status != "ok")
            .collect(),
    })
}

/// Training-only stage: fit the three full-data models, persist them, and
/// report training metrics (no cross-validation).
pub fn stage_train(
    cfg: &PipelineConfig,
    table: &FeatureTable,
) -> Result<BTreeMap<String, MetricSet>> {
    std::fs::create_dir_all(&cfg.output_dir)?;
    let mut out = BTreeMap::new();
    for kind in CLASSIFIER_NAMES {
        let full = fit_reduced(cfg, kind, &table.rows, &table.grades)?;
        let mut scores = Vec::with_capacity(table.n_rows());
        let mut pred = Vec::with_capacity(table.n_rows());
        for row in &table.rows {
            let p = full.predict_proba(row)?;
            scores.push(p);
            pred.push(if p >= 0.5 { Grade::Hgg } else { Grade::Lgg });
        }
        let cm = confusion(&pred, &table.grades)?;
        let m = metrics(&cm, Some((&scores, &table.grades)))?;
        std::fs::write(
            cfg.output_dir.join(format!("model_{kind}.json")),
            serde_json::to_string(&full)?,
        )?;
        out.insert(kind.to_string(), m);
    }
    std::fs::write(
        cfg.output_dir.join("training_metrics.json"),
        serde_json::to_string_pretty(&out)?,
    )?;
    Ok(out)
}

/// Reads the features.csv produced by an earlier stage, failing with
/// MissingInput when absent.
pub fn load_features(cfg: &PipelineConfig) -> Result<FeatureTable> {
    let path = cfg.output_dir.join("features.csv");
    if !path.exists() {
        return Err(Error::MissingInput(format!(
            "{} (run the extract stage first)",
            path.display()
        )));
    }
    read_feature_table(&path)
}
