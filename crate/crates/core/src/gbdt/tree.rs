//! Regression trees grown on gradient/hessian histograms.

use alloc::vec;
use alloc::vec::Vec;

use super::bins::{BinMapper, BinnedMatrix};
use super::TrainParams;
use crate::math::abs;

/// `sign(g) * max(|g| - alpha, 0)`.
#[inline]
fn soft_threshold(g: f64, alpha: f64) -> f64 {
    let shrunk = abs(g) - alpha;
    if shrunk <= 0.0 {
        0.0
    } else if g > 0.0 {
        shrunk
    } else {
        -shrunk
    }
}

#[inline]
fn score(g: f64, h: f64, reg_lambda: f64, reg_alpha: f64) -> f64 {
    let denom = h + reg_lambda;
    if denom <= 0.0 {
        return 0.0;
    }
    let t = soft_threshold(g, reg_alpha);
    t * t / denom
}

/// Second-order split gain with L1 soft-thresholding and L2 shrinkage.
pub fn split_gain(gl: f64, hl: f64, gr: f64, hr: f64, reg_lambda: f64, reg_alpha: f64) -> f64 {
    0.5 * (score(gl, hl, reg_lambda, reg_alpha) + score(gr, hr, reg_lambda, reg_alpha)
        - score(gl + gr, hl + hr, reg_lambda, reg_alpha))
}

/// Newton leaf value `-T(G) / (H + lambda)`.
pub fn leaf_weight(g: f64, h: f64, reg_lambda: f64, reg_alpha: f64) -> f64 {
    let denom = h + reg_lambda;
    if denom <= 0.0 {
        return 0.0;
    }
    -soft_threshold(g, reg_alpha) / denom
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    /// Rows with `bin <= threshold` go left.
    Split {
        feature: usize,
        threshold: u8,
        left: usize,
        right: usize,
        gain: f64,
    },
    Leaf {
        weight: f64,
    },
}

/// A binary tree stored as a node array with the root at index 0.
#[derive(Debug, Clone, PartialEq)]
pub struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    pub fn leaf(weight: f64) -> Self {
        Self { nodes: vec![Node::Leaf { weight }] }
    }

    /// Checks that the array forms a single tree rooted at 0 in which every
    /// node is reachable exactly once.
    pub fn from_nodes(nodes: Vec<Node>) -> Option<Self> {
        if nodes.is_empty() {
            return None;
        }
        let mut visited = vec![false; nodes.len()];
        let mut stack = vec![0usize];
        while let Some(i) = stack.pop() {
            if i >= nodes.len() || visited[i] {
                return None;
            }
            visited[i] = true;
            if let Node::Split { left, right, .. } = nodes[i] {
                stack.push(right);
                stack.push(left);
            }
        }
        visited.iter().all(|&v| v).then_some(Self { nodes })
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count()
    }

    pub fn is_leaf(&self) -> bool {
        self.nodes.len() == 1
    }

    #[inline]
    fn walk(&self, mut bin_of: impl FnMut(usize) -> u8) -> f64 {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf { weight } => return weight,
                Node::Split { feature, threshold, left, right, .. } => {
                    i = if bin_of(feature) <= threshold { left } else { right };
                }
            }
        }
    }

    pub fn predict_binned(&self, binned: &BinnedMatrix, row: usize) -> f64 {
        self.walk(|f| binned.get(row, f))
    }

    pub fn predict_row(&self, mapper: &BinMapper, row: &[f64]) -> f64 {
        self.walk(|f| mapper.bin(f, row[f]))
    }

    /// Adds `delta` to every leaf weight.
    pub fn shift_leaves(&mut self, delta: f64) {
        for node in &mut self.nodes {
            if let Node::Leaf { weight } = node {
                *weight += delta;
            }
        }
    }
}

/// The winning split of one node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitCandidate {
    pub feature: usize,
    pub threshold: u8,
    pub gain: f64,
    pub left_grad: f64,
    pub left_hess: f64,
}

struct NodeStats<'a> {
    rows: &'a [u32],
    grad: f64,
    hess: f64,
}

fn best_split_for_feature(
    binned: &BinnedMatrix,
    feature: usize,
    node: &NodeStats<'_>,
    grads: &[f64],
    hess: &[f64],
    params: &TrainParams,
) -> Option<SplitCandidate> {
    let n_bins = binned.bin_count(feature);
    if n_bins < 2 {
        return None;
    }
    let column = binned.column(feature);
    let mut hist_g = vec![0.0; n_bins];
    let mut hist_h = vec![0.0; n_bins];
    let mut hist_n = vec![0u32; n_bins];
    for &r in node.rows {
        let r = r as usize;
        let b = column[r] as usize;
        hist_g[b] += grads[r];
        hist_h[b] += hess[r];
        hist_n[b] += 1;
    }
    let total_n = node.rows.len() as u32;
    let (mut gl, mut hl, mut nl) = (0.0, 0.0, 0u32);
    let mut best: Option<SplitCandidate> = None;
    for t in 0..n_bins - 1 {
        gl += hist_g[t];
        hl += hist_h[t];
        nl += hist_n[t];
        if hist_n[t] == 0 || nl == 0 || nl == total_n {
            continue;
        }
        let gr = node.grad - gl;
        let hr = node.hess - hl;
        if hl < params.min_child_hessian || hr < params.min_child_hessian {
            continue;
        }
        let gain = split_gain(gl, hl, gr, hr, params.reg_lambda, params.reg_alpha);
        if !(gain > 0.0) || gain < params.min_split_gain {
            continue;
        }
        if best.is_none_or(|b| gain > b.gain) {
            best = Some(SplitCandidate { feature, threshold: t as u8, gain, left_grad: gl, left_hess: hl });
        }
    }
    best
}

/// Scans every feature and returns the max-gain split, preferring the lower
/// feature index and then the lower threshold on exact ties.
fn find_best_split(
    binned: &BinnedMatrix,
    node: &NodeStats<'_>,
    grads: &[f64],
    hess: &[f64],
    params: &TrainParams,
) -> Option<SplitCandidate> {
    let n_features = binned.feature_count();
    #[cfg(feature = "parallel")]
    let per_feature: Vec<Option<SplitCandidate>> = {
        use rayon::prelude::*;
        (0..n_features).into_par_iter().map(|f| best_split_for_feature(binned, f, node, grads, hess, params)).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let per_feature: Vec<Option<SplitCandidate>> =
        (0..n_features).map(|f| best_split_for_feature(binned, f, node, grads, hess, params)).collect();

    per_feature.into_iter().flatten().fold(None, |best: Option<SplitCandidate>, c| match best {
        Some(b) if b.gain >= c.gain => Some(b),
        _ => Some(c),
    })
}

/// Root split of the given rows, exposed for oracle comparisons.
pub fn best_root_split(
    binned: &BinnedMatrix,
    grads: &[f64],
    hess: &[f64],
    params: &TrainParams,
) -> Option<SplitCandidate> {
    let rows: Vec<u32> = (0..binned.row_count() as u32).collect();
    let node = NodeStats { rows: &rows, grad: grads.iter().sum(), hess: hess.iter().sum() };
    find_best_split(binned, &node, grads, hess, params)
}

/// Grows one tree depth-first. Returns the tree and the split gain
/// attributed to each feature.
pub fn build_tree(binned: &BinnedMatrix, grads: &[f64], hess: &[f64], params: &TrainParams) -> (Tree, Vec<f64>) {
    assert_eq!(grads.len(), binned.row_count());
    assert_eq!(hess.len(), binned.row_count());
    let mut builder =
        Builder { binned, grads, hess, params, nodes: Vec::new(), gains: vec![0.0; binned.feature_count()] };
    let mut rows: Vec<u32> = (0..binned.row_count() as u32).collect();
    let grad = grads.iter().sum();
    let hess_sum = hess.iter().sum();
    builder.grow(&mut rows, grad, hess_sum, 0);
    (Tree { nodes: builder.nodes }, builder.gains)
}

struct Builder<'a> {
    binned: &'a BinnedMatrix,
    grads: &'a [f64],
    hess: &'a [f64],
    params: &'a TrainParams,
    nodes: Vec<Node>,
    gains: Vec<f64>,
}

impl Builder<'_> {
    fn grow(&mut self, rows: &mut [u32], grad: f64, hess: f64, depth: usize) -> usize {
        let id = self.nodes.len();
        let leaf = Node::Leaf { weight: leaf_weight(grad, hess, self.params.reg_lambda, self.params.reg_alpha) };
        self.nodes.push(leaf);
        if depth >= self.params.max_depth || rows.len() < 2 {
            return id;
        }
        let node = NodeStats { rows, grad, hess };
        let Some(split) = find_best_split(self.binned, &node, self.grads, self.hess, self.params) else {
            return id;
        };
        let column = self.binned.column(split.feature);
        let mut left_rows: Vec<u32> = Vec::new();
        let mut right_rows: Vec<u32> = Vec::new();
        for &r in rows.iter() {
            if column[r as usize] <= split.threshold {
                left_rows.push(r);
            } else {
                right_rows.push(r);
            }
        }
        self.gains[split.feature] += split.gain;
        let left = self.grow(&mut left_rows, split.left_grad, split.left_hess, depth + 1);
        let right = self.grow(&mut right_rows, grad - split.left_grad, hess - split.left_hess, depth + 1);
        self.nodes[id] =
            Node::Split { feature: split.feature, threshold: split.threshold, left, right, gain: split.gain };
        id
    }
}
