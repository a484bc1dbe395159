//! Gradient-boosted regression trees on the logistic loss.
//!
//! Each round fits one tree to the first- and second-order gradients of the
//! logistic loss by exact greedy splitting, then adds its shrunken leaf
//! values to the running margins. The base score is the log-odds of the
//! positive-class prior. Training is fully deterministic (no subsampling).

use serde::{Deserialize, Serialize};

use crate::error::Result;

use super::{check_width, sigmoid, Classifier, TrainSet};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GbtConfig {
    pub n_rounds: usize,
    pub learning_rate: f64,
    pub max_depth: usize,
    /// L2 regularization on leaf weights.
    pub lambda: f64,
    /// Minimum gain to accept a split.
    pub min_split_loss: f64,
}

impl Default for GbtConfig {
    fn default() -> Self {
        GbtConfig {
            n_rounds: 1000,
            learning_rate: 0.3,
            max_depth: 6,
            lambda: 1.0,
            min_split_loss: 0.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum TreeNode {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        // shrunken weight (learning rate already applied)
        weight: f64,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegressionTree {
    pub nodes: Vec<TreeNode>,
}

impl RegressionTree {
    pub fn eval(&self, x: &[f64]) -> f64 {
        let mut idx = 0usize;
        loop {
            match &self.nodes[idx] {
                TreeNode::Leaf { weight } => return *weight,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    idx = if x[*feature] < *threshold { *left } else { *right };
                }
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GbtModel {
    pub base_score: f64,
    pub learning_rate: f64,
    pub trees: Vec<RegressionTree>,
    pub n_features: usize,
}

impl GbtModel {
    pub fn margin(&self, x: &[f64]) -> f64 {
        self.base_score + self.trees.iter().map(|t| t.eval(x)).sum::<f64>()
    }
}

impl Classifier for GbtModel {
    fn n_features(&self) -> usize {
        self.n_features
    }

    fn predict_proba(&self, x: &[f64]) -> Result<f64> {
        check_width(self.n_features, x)?;
        Ok(sigmoid(self.margin(x)))
    }
}

struct TreeBuilder<'a> {
    x: &'a [Vec<f64>],
    grad: &'a [f64],
    hess: &'a [f64],
    cfg: &'a GbtConfig,
    nodes: Vec<TreeNode>,
}

impl TreeBuilder<'_> {
    // Returns the node index; rows are the sample indices reaching it.
    fn build(&mut self, rows: &[usize], depth: usize) -> usize {
        let g_sum: f64 = rows.iter().map(|&i| self.grad[i]).sum();
        let h_sum: f64 = rows.iter().map(|&i| self.hess[i]).sum();
        let leaf = |nodes: &mut Vec<TreeNode>| {
            let weight = -g_sum / (h_sum + self.cfg.lambda);
            nodes.push(TreeNode::Leaf { weight });
            nodes.len() - 1
        };
        if depth >= self.cfg.max_depth || rows.len() < 2 {
            return leaf(&mut self.nodes);
        }

        let parent_score = g_sum * g_sum / (h_sum + self.cfg.lambda);
        let mut best: Option<(f64, usize, f64)> = None; // (gain, feature, threshold)
        let n_features = self.x[0].len();
        let mut order: Vec<usize> = rows.to_vec();
        for feature in 0..n_features {
            order.sort_by(|&a, &b| {
                self.x[a][feature]
                    .partial_cmp(&self.x[b][feature])
                    .unwrap()
                    .then(a.cmp(&b))
            });
            let mut gl = 0.0;
            let mut hl = 0.0;
            for w in 0..order.len() - 1 {
                let i = order[w];
                gl += self.grad[i];
                hl += self.hess[i];
                let v = self.x[i][feature];
                let v_next = self.x[order[w + 1]][feature];
                if v == v_next {
                    continue;
                }
                let gr = g_sum - gl;
                let hr = h_sum - hl;
                let gain = 0.5
                    * (gl * gl / (hl + self.cfg.lambda) + gr * gr / (hr + self.cfg.lambda)
                        - parent_score)
                    - self.cfg.min_split_loss;
                if gain > best.map(|b| b.0).unwrap_or(1e-12) {
                    best = Some((gain, feature, 0.5 * (v + v_next)));
                }
            }
        }

        match best {
            None => leaf(&mut self.nodes),
            Some((_, feature, threshold)) => {
                let (left_rows, right_rows): (Vec<usize>, Vec<usize>) =
                    rows.iter().partition(|&&i| self.x[i][feature] < threshold);
                let idx = self.nodes.len();
                self.nodes.push(TreeNode::Leaf { weight: 0.0 }); // placeholder
                let left = self.build(&left_rows, depth + 1);
                let right = self.build(&right_rows, depth + 1);
                self.nodes[idx] = TreeNode::Split {
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

/// Trains the booster and records the training logloss after every round.
pub fn train_gbt_traced(data: &TrainSet, cfg: &GbtConfig) -> Result<(GbtModel, Vec<f64>)> {
    let y = data.binary_labels();
    let n = data.n_rows();
    let pos = y.iter().sum::<f64>();
    let prior = (pos / n as f64).clamp(1e-12, 1.0 - 1e-12);
    let base_score = (prior / (1.0 - prior)).ln();

    let mut margins = vec![base_score; n];
    let mut trees = Vec::with_capacity(cfg.n_rounds);
    let mut history = Vec::with_capacity(cfg.n_rounds);
    let mut grad = vec![0.0; n];
    let mut hess = vec![0.0; n];
    let all_rows: Vec<usize> = (0..n).collect();

    for _ in 0..cfg.n_rounds {
        for i in 0..n {
            let p = sigmoid(margins[i]);
            grad[i] = p - y[i];
            hess[i] = (p * (1.0 - p)).max(1e-16);
        }
        let mut builder = TreeBuilder {
            x: &data.x,
            grad: &grad,
            hess: &hess,
            cfg,
            nodes: Vec::new(),
        };
        builder.build(&all_rows, 0);
        // bake the learning rate into the leaves
        let mut tree = RegressionTree { nodes: builder.nodes };
        for node in tree.nodes.iter_mut() {
            if let TreeNode::Leaf { weight } = node {
                *weight *= cfg.learning_rate;
            }
        }
        for (i, m) in margins.iter_mut().enumerate() {
            *m += tree.eval(&data.x[i]);
        }
        trees.push(tree);

        let logloss = margins
            .iter()
            .zip(&y)
            .map(|(&m, &t)| {
                let p = sigmoid(m).clamp(1e-15, 1.0 - 1e-15);
                -(t * p.ln() + (1.0 - t) * (1.0 - p).ln())
            })
            .sum::<f64>()
            / n as f64;
        history.push(logloss);
    }

    Ok((
        GbtModel {
            base_score,
            learning_rate: cfg.learning_rate,
            trees,
            n_features: data.n_features(),
        },
        history,
    ))
}

pub fn train_gbt(data: &TrainSet, cfg: &GbtConfig) -> Result<GbtModel> {
    train_gbt_traced(data, cfg).map(|(m, _)| m)
}
