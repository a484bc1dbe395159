//! Binary HGG/LGG classifiers: gradient-boosted trees with a logistic
//! objective, an RBF-kernel soft-margin SVC with Platt-scaled probabilities,
//! and a Gini random forest. All three are trained from scratch on dense
//! feature matrices; HGG is the positive class throughout and exact 0.5
//! probabilities resolve to HGG.

pub mod forest;
pub mod gbt;
pub mod svc;

pub use forest::{train_rf, RfConfig, RfModel};
pub use gbt::{train_gbt, train_gbt_traced, GbtConfig, GbtModel};
pub use svc::{train_svc, GammaRule, SvcConfig, SvcModel};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::volume::Grade;

/// Training rows: one feature vector per subject plus the grade label.
#[derive(Debug, Clone)]
pub struct TrainSet {
    pub x: Vec<Vec<f64>>,
    pub y: Vec<Grade>,
}

impl TrainSet {
    pub fn new(x: Vec<Vec<f64>>, y: Vec<Grade>) -> Result<TrainSet> {
        if x.len() != y.len() {
            return Err(Error::LengthMismatch(x.len(), y.len()));
        }
        if x.len() < 2 {
            return Err(Error::TooFewRows(x.len()));
        }
        let width = x[0].len();
        for row in &x {
            if row.len() != width {
                return Err(Error::WidthMismatch {
                    expected: width,
                    got: row.len(),
                });
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFiniteData);
            }
        }
        if !(y.contains(&Grade::Hgg) && y.contains(&Grade::Lgg)) {
            return Err(Error::DegenerateLabels);
        }
        Ok(TrainSet { x, y })
    }

    pub fn n_rows(&self) -> usize {
        self.x.len()
    }

    pub fn n_features(&self) -> usize {
        self.x[0].len()
    }

    /// Labels as 0/1 with HGG = 1.
    pub fn binary_labels(&self) -> Vec<f64> {
        self.y
            .iter()
            .map(|g| if *g == Grade::Hgg { 1.0 } else { 0.0 })
            .collect()
    }
}

/// Common prediction surface for the three model kinds.
pub trait Classifier {
    fn n_features(&self) -> usize;

    /// Probability of the positive (HGG) class, always in [0, 1].
    fn predict_proba(&self, x: &[f64]) -> Result<f64>;

    /// Thresholds [`Classifier::predict_proba`] at 0.5; exact ties go to HGG.
    fn predict(&self, x: &[f64]) -> Result<Grade> {
        Ok(if self.predict_proba(x)? >= 0.5 {
            Grade::Hgg
        } else {
            Grade::Lgg
        })
    }
}

pub(crate) fn check_width(expected: usize, x: &[f64]) -> Result<()> {
    if x.len() != expected {
        return Err(Error::WidthMismatch {
            expected,
            got: x.len(),
        });
    }
    Ok(())
}

#[inline]
pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Self-describing JSON model container, tagged by classifier kind.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelFile {
    Gbt(GbtModel),
    Svc(SvcModel),
    Rf(RfModel),
}

impl Classifier for ModelFile {
    fn n_features(&self) -> usize {
        match self {
            ModelFile::Gbt(m) => m.n_features(),
            ModelFile::Svc(m) => m.n_features(),
            ModelFile::Rf(m) => m.n_features(),
        }
    }

    fn predict_proba(&self, x: &[f64]) -> Result<f64> {
        match self {
            ModelFile::Gbt(m) => m.predict_proba(x),
            ModelFile::Svc(m) => m.predict_proba(x),
            ModelFile::Rf(m) => m.predict_proba(x),
        }
    }
}

/// Deterministic 2-D two-cluster sample used by tests and demos: `n` points
/// per class around ±(2, 2) with unit-variance noise.
pub fn gaussian_clusters(n_per_class: usize, seed: u64) -> TrainSet {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let normal = |rng: &mut rand_chacha::ChaCha8Rng| {
        let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
        let u2: f64 = rng.gen_range(0.0..1.0);
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    };
    let mut x = Vec::with_capacity(2 * n_per_class);
    let mut y = Vec::with_capacity(2 * n_per_class);
    for _ in 0..n_per_class {
        x.push(vec![2.0 + normal(&mut rng), 2.0 + normal(&mut rng)]);
        y.push(Grade::Hgg);
    }
    for _ in 0..n_per_class {
        x.push(vec![-2.0 + normal(&mut rng), -2.0 + normal(&mut rng)]);
        y.push(Grade::Lgg);
    }
    TrainSet::new(x, y).expect("generated set is valid")
}
