//! Command-line front end for the glioma-grading pipeline.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use gliofuse::config::PipelineConfig;
use gliofuse::error::Result;
use gliofuse::nifti::{write_nifti_file, WriteDatatype};
use gliofuse::pipeline::{
    load_cohort, load_features, run_pipeline, stage_evaluate, stage_features, stage_train,
};
use gliofuse::synth::CohortManifest;
use gliofuse::table::write_feature_table;
use gliofuse::wavelet::{dwt2_level1, dump_subbands, fuse_subject, WaveletFilter};

#[derive(Parser)]
#[command(name = "gliofuse", version, about = "Wavelet-fusion radiomics pipeline for HGG/LGG grading")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct StageArgs {
    /// Pipeline config (JSON)
    #[arg(long)]
    config: PathBuf,
    /// Override the config's output directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the cross-validation seed
    #[arg(long)]
    seed: Option<u64>,
    /// Only process subject ids matching this glob (e.g. "synth_hgg_*")
    #[arg(long)]
    subjects: Option<String>,
}

impl StageArgs {
    fn load(&self) -> Result<PipelineConfig> {
        let mut cfg = PipelineConfig::load(&self.config)?;
        if let Some(out) = &self.out {
            cfg.output_dir = out.clone();
        }
        if let Some(seed) = self.seed {
            cfg.cv.seed = seed;
        }
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic cohort manifest (and optionally NIfTI volumes)
    Synth {
        /// Output directory for the manifest
        #[arg(long)]
        out: PathBuf,
        /// Number of high-grade subjects
        #[arg(long, default_value_t = 30)]
        hgg: usize,
        /// Number of low-grade subjects
        #[arg(long, default_value_t = 10)]
        lgg: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also write each phantom as NIfTI files (BraTS-style layout)
        #[arg(long)]
        write_nifti: bool,
    },
    /// Fuse each subject's four sequences and write the fused volumes
    Fuse {
        #[command(flatten)]
        stage: StageArgs,
        /// Dump the four subband grids of the first slice of each subject
        #[arg(long)]
        dump_subbands: bool,
        /// Also export the three ROI masks as uint8 NIfTI volumes
        #[arg(long)]
        export_rois: bool,
    },
    /// Extract the per-subject feature vectors into features.csv
    Extract {
        #[command(flatten)]
        stage: StageArgs,
    },
    /// Fit PCA on a saved feature table; write scree and loading reports
    Pca {
        #[command(flatten)]
        stage: StageArgs,
    },
    /// Train the three classifiers on the full feature table
    Train {
        #[command(flatten)]
        stage: StageArgs,
    },
    /// Cross-validate the three classifiers and write reports
    Evaluate {
        #[command(flatten)]
        stage: StageArgs,
    },
    /// Run every stage end to end
    Pipeline {
        #[command(flatten)]
        stage: StageArgs,
        /// Allow reusing an output directory recorded under a different config
        #[arg(long)]
        force: bool,
    },
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Synth {
            out,
            hgg,
            lgg,
            seed,
            write_nifti,
        } => {
            std::fs::create_dir_all(&out)?;
            let manifest = CohortManifest::generate(hgg, lgg, seed);
            let path = out.join("cohort.json");
            std::fs::write(&path, serde_json::to_string_pretty(&manifest)?)?;
            println!("wrote {} ({} subjects)", path.display(), manifest.subjects.len());
            if write_nifti {
                for spec in &manifest.subjects {
                    let case = manifest.realize(spec);
                    let dir = out.join(&case.id);
                    std::fs::create_dir_all(&dir)?;
                    for (seq, vol) in [
                        ("flair", &case.flair),
                        ("t1", &case.t1),
                        ("t1ce", &case.t1ce),
                        ("t2", &case.t2),
                    ] {
                        write_nifti_file(
                            &dir.join(format!("{}_{seq}.nii.gz", case.id)),
                            vol,
                            WriteDatatype::Float64,
                        )?;
                    }
                    write_nifti_file(
                        &dir.join(format!("{}_seg.nii.gz", case.id)),
                        &case.seg,
                        WriteDatatype::Uint8,
                    )?;
                    std::fs::write(dir.join("grade.txt"), case.grade.as_str())?;
                }
                println!("wrote NIfTI volumes under {}", out.display());
            }
        }
        Command::Fuse {
            stage,
            dump_subbands: dump,
            export_rois,
        } => {
            let cfg = stage.load()?;
            let cohort = load_cohort(&cfg, stage.subjects.as_deref())?;
            let fused_dir = cfg.output_dir.join("fused");
            std::fs::create_dir_all(&fused_dir)?;
            for case in &cohort {
                let fused = fuse_subject(case, &cfg.wavelet)?;
                write_nifti_file(
                    &fused_dir.join(format!("{}.nii.gz", case.id)),
                    &fused,
                    WriteDatatype::Float64,
                )?;
                if dump {
                    let (nx, ny, _) = case.flair.dims();
                    let sb = dwt2_level1(&case.flair.slice(0), (nx, ny), &WaveletFilter::db1())?;
                    dump_subbands(&cfg.output_dir.join("subbands").join(&case.id), &sb)?;
                }
                if export_rois {
                    let rois = gliofuse::roi::derive_rois(&case.seg, &case.flair, &cfg.roi3_labels)?;
                    let roi_dir = cfg.output_dir.join("rois");
                    std::fs::create_dir_all(&roi_dir)?;
                    for k in 1..=3u8 {
                        write_nifti_file(
                            &roi_dir.join(format!("{}_roi{k}.nii.gz", case.id)),
                            &rois.mask(k).to_volume(case.seg.spacing()),
                            WriteDatatype::Uint8,
                        )?;
                    }
                }
            }
            println!("fused {} subjects into {}", cohort.len(), fused_dir.display());
        }
        Command::Extract { stage } => {
            let cfg = stage.load()?;
            let (table, statuses) = stage_features(&cfg, stage.subjects.as_deref())?;
            write_feature_table(&table, &cfg.output_dir.join("features.csv"))?;
            let skipped = statuses.iter().filter(|s| s.status != "ok").count();
            println!(
                "extracted {} rows x {} features ({} skipped)",
                table.n_rows(),
                table.n_cols(),
                skipped
            );
        }
        Command::Pca { stage } => {
            let cfg = stage.load()?;
            let table = load_features(&cfg)?;
            let model = gliofuse::pca::fit_pca(&table, cfg.pca.standardize)?;
            let k = model.select_components(cfg.pca.variance_threshold);
            let mut scree = String::from("component,explained_ratio,cumulative\n");
            for (c, ratio, cum) in model.scree_report() {
                scree.push_str(&format!("{c},{ratio:.16e},{cum:.16e}\n"));
            }
            std::fs::write(cfg.output_dir.join("scree.csv"), scree)?;
            let mut loadings = String::from("component,feature,loading\n");
            for component in 1..=model.n_components().min(2) {
                for (name, value) in model.top_loadings(component, 10) {
                    loadings.push_str(&format!("{component},{name},{value:.16e}\n"));
                }
            }
            std::fs::write(cfg.output_dir.join("loadings.csv"), loadings)?;
            std::fs::write(
                cfg.output_dir.join("pca_model.json"),
                serde_json::to_string(&model)?,
            )?;
            println!(
                "fitted {} components; {k} reach the {:.0}% threshold",
                model.n_components(),
                cfg.pca.variance_threshold * 100.0
            );
        }
        Command::Train { stage } => {
            let cfg = stage.load()?;
            let table = load_features(&cfg)?;
            let trained = stage_train(&cfg, &table)?;
            for (kind, m) in &trained {
                println!("{kind}: training acc {:.4}, auc {:.4}", m.accuracy, m.auc);
            }
        }
        Command::Evaluate { stage } => {
            let cfg = stage.load()?;
            let table = load_features(&cfg)?;
            let reports = stage_evaluate(&cfg, &table)?;
            for (kind, report) in &reports {
                println!(
                    "{kind}: training acc {:.4}, cv acc {:.4}, cv auc {:.4}",
                    report.training.accuracy,
                    report.cross_validation.mean.accuracy,
                    report.cross_validation.pooled_auc
                );
            }
        }
        Command::Pipeline { stage, force } => {
            let cfg = stage.load()?;
            let bundle = run_pipeline(&cfg, force, stage.subjects.as_deref())?;
            println!("pipeline complete: {}", bundle.manifest_path.display());
            for (kind, path) in &bundle.report_paths {
                println!("  {kind}: {}", path.display());
            }
            if !bundle.skipped.is_empty() {
                println!("  skipped {} subjects", bundle.skipped.len());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
