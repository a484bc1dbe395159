//! Deterministic synthetic subject phantoms.
//!
//! Real multi-center cohorts are license-gated, so tests and demos run on
//! generated 128x128x16 phantoms: an ellipsoidal brain containing a nested
//! tumor with necrotic core (label 1), enhancing rim (label 4) and edema
//! shell (label 2). High-grade phantoms get a larger necrotic fraction and
//! higher core intensity variance than low-grade ones, so the downstream
//! core-energy feature separates the grades. Identical seeds produce
//! bit-identical cases.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::volume::{Grade, SubjectCase, Volume};

pub const DEFAULT_DIMS: (usize, usize, usize) = (128, 128, 16);
const SPACING: (f64, f64, f64) = (1.875, 1.875, 1.0);

/// One line of a synthetic cohort manifest.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SubjectSpec {
    pub id: String,
    pub seed: u64,
    pub grade: Grade,
}

/// JSON manifest describing a reproducible cohort.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CohortManifest {
    pub subjects: Vec<SubjectSpec>,
    /// Slice count for every phantom (the in-plane size is fixed at 128).
    #[serde(default = "default_depth")]
    pub depth: usize,
}

fn default_depth() -> usize {
    DEFAULT_DIMS.2
}

impl CohortManifest {
    /// Builds a manifest of `n_hgg` + `n_lgg` subjects with per-subject
    /// seeds derived from `base_seed`.
    pub fn generate(n_hgg: usize, n_lgg: usize, base_seed: u64) -> CohortManifest {
        let mut subjects = Vec::with_capacity(n_hgg + n_lgg);
        for i in 0..n_hgg {
            let seed = base_seed.wrapping_add(i as u64);
            subjects.push(SubjectSpec {
                id: format!("synth_hgg_{seed:05}"),
                seed,
                grade: Grade::Hgg,
            });
        }
        for i in 0..n_lgg {
            let seed = base_seed.wrapping_add(1000 + i as u64);
            subjects.push(SubjectSpec {
                id: format!("synth_lgg_{seed:05}"),
                seed,
                grade: Grade::Lgg,
            });
        }
        CohortManifest {
            subjects,
            depth: DEFAULT_DIMS.2,
        }
    }

    pub fn realize(&self, spec: &SubjectSpec) -> SubjectCase {
        let mut case = synth_subject_with_depth(spec.seed, spec.grade, self.depth);
        case.id = spec.id.clone();
        case
    }
}

struct TumorGeometry {
    center: (f64, f64, f64),
    core: (f64, f64, f64),
    enhancing: (f64, f64, f64),
    edema: (f64, f64, f64),
    core_sigma: f64,
}

fn ellipsoid_rho(p: (f64, f64, f64), c: (f64, f64, f64), r: (f64, f64, f64)) -> f64 {
    let dx = (p.0 - c.0) / r.0;
    let dy = (p.1 - c.1) / r.1;
    let dz = (p.2 - c.2) / r.2;
    (dx * dx + dy * dy + dz * dz).sqrt()
}

// Box-Muller draw; two uniforms in, one standard normal out.
fn normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

fn sample_geometry(rng: &mut ChaCha8Rng, grade: Grade, dims: (usize, usize, usize)) -> TumorGeometry {
    let cx = dims.0 as f64 / 2.0 + rng.gen_range(-10.0..10.0);
    let cy = dims.1 as f64 / 2.0 + rng.gen_range(-10.0..10.0);
    let cz = dims.2 as f64 / 2.0 + rng.gen_range(-0.5..0.5);
    let (core_xy, core_z, core_sigma) = match grade {
        Grade::Hgg => (
            rng.gen_range(8.0..11.0),
            rng.gen_range(2.2..3.0),
            0.16,
        ),
        Grade::Lgg => (
            rng.gen_range(3.5..5.0),
            rng.gen_range(1.3..1.8),
            0.03,
        ),
    };
    let enh_xy = core_xy + 2.5;
    let enh_z = core_z + 0.8;
    TumorGeometry {
        center: (cx, cy, cz),
        core: (core_xy, core_xy, core_z),
        enhancing: (enh_xy, enh_xy, enh_z),
        edema: (enh_xy + 5.0, enh_xy + 5.0, enh_z + 1.2),
        core_sigma,
    }
}

// Base intensity per (modality, tissue) pair; the fixed contrast transforms
// that make the four sequences differ. Tissue order: parenchyma, edema,
// enhancing rim, necrotic core.
const BASE: [[f64; 4]; 4] = [
    [0.45, 0.85, 0.65, 0.35], // FLAIR
    [0.60, 0.45, 0.55, 0.30], // T1
    [0.55, 0.50, 0.95, 0.25], // T1CE
    [0.40, 0.90, 0.60, 0.70], // T2
];
// Per-modality noise weight.
const NOISE_W: [f64; 4] = [1.0, 0.8, 1.1, 0.9];

/// Generates one deterministic phantom at the default 128x128x16 size.
pub fn synth_subject(seed: u64, grade: Grade) -> SubjectCase {
    synth_subject_with_depth(seed, grade, DEFAULT_DIMS.2)
}

/// Same as [`synth_subject`] with a configurable slice count.
pub fn synth_subject_with_depth(seed: u64, grade: Grade, depth: usize) -> SubjectCase {
    let dims = (DEFAULT_DIMS.0, DEFAULT_DIMS.1, depth.max(4));
    let grade_tag = match grade {
        Grade::Hgg => 0x4847_4700,
        Grade::Lgg => 0x4c47_4700,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ grade_tag);
    let geom = sample_geometry(&mut rng, grade, dims);

    let brain_c = (dims.0 as f64 / 2.0, dims.1 as f64 / 2.0, dims.2 as f64 / 2.0);
    let brain_r = (0.42 * dims.0 as f64, 0.46 * dims.1 as f64, 0.44 * dims.2 as f64);

    let n = dims.0 * dims.1 * dims.2;
    let mut seg = vec![0.0; n];
    let mut modal = [vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]];

    let mut idx = 0;
    for z in 0..dims.2 {
        for y in 0..dims.1 {
            for x in 0..dims.0 {
                let p = (x as f64, y as f64, z as f64);
                if ellipsoid_rho(p, brain_c, brain_r) > 1.0 {
                    idx += 1;
                    continue;
                }
                // tissue: 0 parenchyma, 1 edema, 2 enhancing, 3 core
                let tissue = if ellipsoid_rho(p, geom.center, geom.core) <= 1.0 {
                    seg[idx] = 1.0;
                    3
                } else if ellipsoid_rho(p, geom.center, geom.enhancing) <= 1.0 {
                    seg[idx] = 4.0;
                    2
                } else if ellipsoid_rho(p, geom.center, geom.edema) <= 1.0 {
                    seg[idx] = 2.0;
                    1
                } else {
                    0
                };
                let eps = normal(&mut rng);
                let amp = if tissue == 3 { geom.core_sigma } else { 0.02 };
                // smooth deterministic shading so slices are not flat
                let shade = 0.03 * (0.11 * p.0 + 0.07 * p.1 + 0.31 * p.2).sin();
                for (m, vol) in modal.iter_mut().enumerate() {
                    let v = BASE[m][tissue] + NOISE_W[m] * amp * eps + shade;
                    vol[idx] = v.clamp(0.02, 1.0);
                }
                idx += 1;
            }
        }
    }

    let mk = |data: Vec<f64>| Volume::new(dims, SPACING, data).expect("phantom volume is valid");
    let [flair, t1, t1ce, t2] = modal;
    SubjectCase {
        id: format!("synth_{}_{seed:05}", grade.as_str().to_lowercase()),
        flair: mk(flair),
        t1: mk(t1),
        t1ce: mk(t1ce),
        t2: mk(t2),
        seg: mk(seg),
        grade,
    }
}
