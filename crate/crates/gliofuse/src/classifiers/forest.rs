//! Random forest with Gini splits: fully grown trees on bootstrap resamples,
//! sqrt(d) candidate features per node, majority vote across trees.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;

use super::{check_width, Classifier, TrainSet};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RfConfig {
    pub n_trees: usize,
    pub min_split: usize,
    pub min_leaf: usize,
    pub seed: u64,
}

impl Default for RfConfig {
    fn default() -> Self {
        RfConfig {
            n_trees: 1000,
            min_split: 2,
            min_leaf: 1,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum ClsNode {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        /// true = HGG
        vote: bool,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClsTree {
    pub nodes: Vec<ClsNode>,
    pub bootstrap_seed: u64,
}

impl ClsTree {
    pub fn vote(&self, x: &[f64]) -> bool {
        let mut idx = 0usize;
        loop {
            match &self.nodes[idx] {
                ClsNode::Leaf { vote } => return *vote,
                ClsNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => idx = if x[*feature] < *threshold { *left } else { *right },
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RfModel {
    pub trees: Vec<ClsTree>,
    pub n_features: usize,
}

impl Classifier for RfModel {
    fn n_features(&self) -> usize {
        self.n_features
    }

    /// Fraction of trees voting HGG.
    fn predict_proba(&self, x: &[f64]) -> Result<f64> {
        check_width(self.n_features, x)?;
        let votes = self.trees.iter().filter(|t| t.vote(x)).count();
        Ok(votes as f64 / self.trees.len() as f64)
    }
}

/// Gini impurity of a (negative, positive) count split.
pub fn gini(neg: f64, pos: f64) -> f64 {
    let total = neg + pos;
    if total == 0.0 {
        return 0.0;
    }
    let p = pos / total;
    let q = neg / total;
    1.0 - p * p - q * q
}

struct TreeBuilder<'a> {
    x: &'a [Vec<f64>],
    y: &'a [f64],
    cfg: &'a RfConfig,
    max_features: usize,
    nodes: Vec<ClsNode>,
}

impl TreeBuilder<'_> {
    fn leaf(&mut self, rows: &[usize]) -> usize {
        let pos = rows.iter().filter(|&&i| self.y[i] > 0.5).count();
        let neg = rows.len() - pos;
        // ties resolve toward the positive class
        self.nodes.push(ClsNode::Leaf { vote: pos >= neg });
        self.nodes.len() - 1
    }

    fn build(&mut self, rows: &[usize], rng: &mut ChaCha8Rng) -> usize {
        let pos = rows.iter().filter(|&&i| self.y[i] > 0.5).count();
        if pos == 0 || pos == rows.len() || rows.len() < self.cfg.min_split {
            return self.leaf(rows);
        }
        let d = self.x[0].len();
        let mut candidates: Vec<usize> = (0..d).collect();
        candidates.shuffle(rng);
        candidates.truncate(self.max_features);
        candidates.sort_unstable(); // deterministic evaluation order

        let parent = gini((rows.len() - pos) as f64, pos as f64) * rows.len() as f64;
        let mut best: Option<(f64, usize, f64)> = None;
        let mut order = rows.to_vec();
        for &feature in &candidates {
            order.sort_by(|&a, &b| {
                self.x[a][feature]
                    .partial_cmp(&self.x[b][feature])
                    .unwrap()
                    .then(a.cmp(&b))
            });
            let mut pos_l = 0.0;
            for w in 0..order.len() - 1 {
                if self.y[order[w]] > 0.5 {
                    pos_l += 1.0;
                }
                let n_l = (w + 1) as f64;
                let n_r = (order.len() - w - 1) as f64;
                if (n_l as usize) < self.cfg.min_leaf || (n_r as usize) < self.cfg.min_leaf {
                    continue;
                }
                let v = self.x[order[w]][feature];
                let v_next = self.x[order[w + 1]][feature];
                if v == v_next {
                    continue;
                }
                let pos_r = pos as f64 - pos_l;
                let child = gini(n_l - pos_l, pos_l) * n_l + gini(n_r - pos_r, pos_r) * n_r;
                let decrease = parent - child;
                if decrease > best.map(|b| b.0).unwrap_or(1e-12) {
                    best = Some((decrease, feature, 0.5 * (v + v_next)));
                }
            }
        }
        match best {
            None => self.leaf(rows),
            Some((_, feature, threshold)) => {
                let (l, r): (Vec<usize>, Vec<usize>) =
                    rows.iter().partition(|&&i| self.x[i][feature] < threshold);
                let idx = self.nodes.len();
                self.nodes.push(ClsNode::Leaf { vote: false });
                let left = self.build(&l, rng);
                let right = self.build(&r, rng);
                self.nodes[idx] = ClsNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                };
                idx
            }
        }
    }
}

/// Grows the forest; trees train in parallel but seeds are assigned up
/// front, so results are identical regardless of scheduling.
pub fn train_rf(data: &TrainSet, cfg: &RfConfig) -> Result<RfModel> {
    let y = data.binary_labels();
    let n = data.n_rows();
    let d = data.n_features();
    let max_features = (d as f64).sqrt().floor().max(1.0) as usize;

    let mut master = ChaCha8Rng::seed_from_u64(cfg.seed);
    let tree_seeds: Vec<u64> = (0..cfg.n_trees).map(|_| master.gen()).collect();

    let trees: Vec<ClsTree> = tree_seeds
        .par_iter()
        .map(|&seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let rows: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
            let mut builder = TreeBuilder {
                x: &data.x,
                y: &y,
                cfg,
                max_features,
                nodes: Vec::new(),
            };
            builder.build(&rows, &mut rng);
            ClsTree {
                nodes: builder.nodes,
                bootstrap_seed: seed,
            }
        })
        .collect();

    Ok(RfModel {
        trees,
        n_features: d,
    })
}

/// One tree's accuracy on its own bootstrap sample (used by invariants).
pub fn bootstrap_accuracy(tree: &ClsTree, data: &TrainSet) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(tree.bootstrap_seed);
    let n = data.n_rows();
    let rows: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
    let y = data.binary_labels();
    let hits = rows
        .iter()
        .filter(|&&i| tree.vote(&data.x[i]) == (y[i] > 0.5))
        .count();
    hits as f64 / rows.len() as f64
}

#[cfg(test)]
mod tests {
    use super::super::gaussian_clusters;
    use super::*;
    use crate::volume::Grade;

    fn small_cfg(n_trees: usize) -> RfConfig {
        RfConfig {
            n_trees,
            ..RfConfig::default()
        }
    }

    #[test]
    fn gini_endpoints() {
        assert_eq!(gini(4.0, 0.0), 0.0);
        assert_eq!(gini(2.0, 2.0), 0.5);
    }

    #[test]
    fn separable_clusters_reach_perfect_training_accuracy() {
        let data = gaussian_clusters(100, 0);
        let model = train_rf(&data, &small_cfg(200)).unwrap();
        let correct = data
            .x
            .iter()
            .zip(&data.y)
            .filter(|(row, want)| model.predict(row).unwrap() == **want)
            .count();
        assert_eq!(correct, data.n_rows());
    }

    #[test]
    fn same_seed_reproduces_identical_forest() {
        let data = gaussian_clusters(40, 1);
        let a = serde_json::to_string(&train_rf(&data, &small_cfg(50)).unwrap()).unwrap();
        let b = serde_json::to_string(&train_rf(&data, &small_cfg(50)).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn trees_fit_their_bootstrap_samples() {
        use rand::{Rng, SeedableRng};
        // distinct feature values guarantee purity is reachable
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let x: Vec<Vec<f64>> = (0..50).map(|_| vec![rng.gen::<f64>(), rng.gen::<f64>()]).collect();
        let y: Vec<Grade> = (0..50)
            .map(|i| if i % 2 == 0 { Grade::Hgg } else { Grade::Lgg })
            .collect();
        let data = TrainSet::new(x, y).unwrap();
        let model = train_rf(&data, &small_cfg(25)).unwrap();
        for tree in &model.trees {
            assert_eq!(bootstrap_accuracy(tree, &data), 1.0);
        }
    }

    #[test]
    fn proba_is_the_vote_fraction() {
        let data = gaussian_clusters(20, 2);
        let model = train_rf(&data, &small_cfg(10)).unwrap();
        let x = &data.x[0];
        let votes = model.trees.iter().filter(|t| t.vote(x)).count();
        assert_eq!(model.predict_proba(x).unwrap(), votes as f64 / 10.0);
    }
}
