//! Histogram gradient boosting for binary logistic loss.
//!
//! Trees are grown depth-first on quantile bins with the usual second-order
//! gain, an L1 soft-threshold (`reg_alpha`), L2 shrinkage (`reg_lambda`) and
//! a minimum accepted gain (`min_split_gain`). Training can start from
//! arbitrary per-row margins, which is how a model is continued on new data:
//! the existing model's margins become the starting point and new trees are
//! appended.

pub mod bins;
pub mod loss;
pub mod tree;

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

pub use bins::{BinMapper, BinnedMatrix};
pub use loss::logistic_grad_hess;
pub use tree::{build_tree, leaf_weight, split_gain, Node, Tree};

use crate::encode::FeatureMatrix;
use crate::error::{Error, Result};
use crate::math::sigmoid;
use crate::metrics::auc;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainParams {
    /// Per-tree shrinkage.
    pub learning_rate: f64,
    /// Upper bound on trees added by one training call.
    pub num_iterations_max: usize,
    /// Validation rounds without AUC improvement before stopping; 0 disables.
    pub early_stopping_rounds: usize,
    pub reg_alpha: f64,
    pub reg_lambda: f64,
    pub min_split_gain: f64,
    pub max_depth: usize,
    pub min_child_hessian: f64,
    pub max_bins: usize,
    pub seed: u64,
}

impl Default for TrainParams {
    fn default() -> Self {
        Self {
            learning_rate: 0.1,
            num_iterations_max: 100,
            early_stopping_rounds: 20,
            reg_alpha: 0.0,
            reg_lambda: 1.0,
            min_split_gain: 0.0,
            max_depth: 6,
            min_child_hessian: 1e-3,
            max_bins: 255,
            seed: 0,
        }
    }
}

impl TrainParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: String| Err(Error::InvalidParam(what));
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return bad(format!("learning_rate must lie in (0, 1], got {}", self.learning_rate));
        }
        for (name, value) in [
            ("reg_alpha", self.reg_alpha),
            ("reg_lambda", self.reg_lambda),
            ("min_split_gain", self.min_split_gain),
            ("min_child_hessian", self.min_child_hessian),
        ] {
            if !(value >= 0.0) || value.is_infinite() {
                return bad(format!("{} must be a finite value >= 0, got {}", name, value));
            }
        }
        if self.max_depth < 1 {
            return bad("max_depth must be >= 1".into());
        }
        if !(2..=255).contains(&self.max_bins) {
            return bad(format!("max_bins must lie in 2..=255, got {}", self.max_bins));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoostedTree {
    pub tree: Tree,
    pub shrinkage: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GbdtModel {
    bin_mapper: BinMapper,
    trees: Vec<BoostedTree>,
    importances: Vec<f64>,
    feature_names: Vec<String>,
}

/// Optional held-out slice used for early stopping.
#[derive(Debug, Clone, Copy)]
pub struct ValidSet<'a> {
    pub matrix: &'a FeatureMatrix,
    pub labels: &'a [bool],
    pub init_margins: &'a [f64],
}

impl GbdtModel {
    /// A model with no trees over the given bins.
    pub fn empty(bin_mapper: BinMapper, feature_names: Vec<String>) -> Result<Self> {
        Self::from_parts(bin_mapper, Vec::new(), feature_names)
    }

    /// Reassembles a model; importances are re-derived from the trees.
    pub fn from_parts(bin_mapper: BinMapper, trees: Vec<BoostedTree>, feature_names: Vec<String>) -> Result<Self> {
        let width = bin_mapper.feature_count();
        if feature_names.len() != width {
            return Err(Error::FeatureMismatch { expected: width, found: feature_names.len() });
        }
        for t in &trees {
            for node in t.tree.nodes() {
                if let Node::Split { feature, threshold, .. } = node {
                    if *feature >= width || (*threshold as usize) >= bin_mapper.bin_count(*feature) {
                        return Err(Error::LayoutMismatch(format!(
                            "split on feature {} bin {} is outside the bin layout",
                            feature, threshold
                        )));
                    }
                }
            }
        }
        let mut model = Self { bin_mapper, trees: Vec::new(), importances: vec![0.0; width], feature_names };
        for t in trees {
            model.push_tree(t.tree, t.shrinkage);
        }
        Ok(model)
    }

    pub fn bin_mapper(&self) -> &BinMapper {
        &self.bin_mapper
    }

    pub fn trees(&self) -> &[BoostedTree] {
        &self.trees
    }

    pub fn tree_count(&self) -> usize {
        self.trees.len()
    }

    /// Accumulated split gain per feature.
    pub fn importances(&self) -> &[f64] {
        &self.importances
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn feature_count(&self) -> usize {
        self.feature_names.len()
    }

    fn push_tree(&mut self, tree: Tree, shrinkage: f64) {
        for node in tree.nodes() {
            if let Node::Split { feature, gain, .. } = node {
                self.importances[*feature] += gain;
            }
        }
        self.trees.push(BoostedTree { tree, shrinkage });
    }

    fn truncate(&mut self, len: usize) {
        if len >= self.trees.len() {
            return;
        }
        let kept: Vec<BoostedTree> = self.trees.drain(..).take(len).collect();
        self.importances.iter_mut().for_each(|v| *v = 0.0);
        for t in kept {
            self.push_tree(t.tree, t.shrinkage);
        }
    }

    fn check_width(&self, matrix: &FeatureMatrix) -> Result<()> {
        if matrix.feature_count() != self.feature_count() {
            return Err(Error::FeatureMismatch { expected: self.feature_count(), found: matrix.feature_count() });
        }
        Ok(())
    }

    /// Raw additive score `Σ shrinkage · tree(row)`.
    pub fn predict_margin(&self, matrix: &FeatureMatrix) -> Result<Vec<f64>> {
        self.check_width(matrix)?;
        let binned = self.bin_mapper.bin_matrix(matrix);
        let mut margins = vec![0.0; matrix.row_count()];
        for t in &self.trees {
            for (r, m) in margins.iter_mut().enumerate() {
                *m += t.shrinkage * t.tree.predict_binned(&binned, r);
            }
        }
        Ok(margins)
    }

    pub fn predict_proba(&self, matrix: &FeatureMatrix) -> Result<Vec<f64>> {
        Ok(self.predict_margin(matrix)?.into_iter().map(sigmoid).collect())
    }
}

pub fn predict_margin(model: &GbdtModel, matrix: &FeatureMatrix) -> Result<Vec<f64>> {
    model.predict_margin(matrix)
}

pub fn predict_proba(model: &GbdtModel, matrix: &FeatureMatrix) -> Result<Vec<f64>> {
    model.predict_proba(matrix)
}

/// Trains a fresh model starting from `init_margins` (all zeros for a cold
/// start). Bins are fitted on `matrix`.
pub fn train(
    matrix: &FeatureMatrix,
    labels: &[bool],
    init_margins: &[f64],
    params: &TrainParams,
    valid: Option<ValidSet<'_>>,
) -> Result<GbdtModel> {
    train_guarded(matrix, labels, init_margins, params, valid, &mut |_| true)
}

/// [`train`] with a hook consulted before every boosting round; returning
/// `false` ends training with the trees built so far.
pub fn train_guarded(
    matrix: &FeatureMatrix,
    labels: &[bool],
    init_margins: &[f64],
    params: &TrainParams,
    valid: Option<ValidSet<'_>>,
    keep_going: &mut dyn FnMut(usize) -> bool,
) -> Result<GbdtModel> {
    params.validate()?;
    check_inputs(matrix, labels, init_margins)?;
    let mapper = BinMapper::fit(matrix, params.max_bins);
    let mut model = GbdtModel::empty(mapper, matrix.feature_names().to_vec())?;
    boost(&mut model, matrix, labels, init_margins.to_vec(), params, valid, keep_going)?;
    Ok(model)
}

/// Appends trees fitted to `matrix` starting from the model's own margins.
/// The bin layout of `model` is reused.
pub fn continue_training(
    model: &GbdtModel,
    matrix: &FeatureMatrix,
    labels: &[bool],
    params: &TrainParams,
    valid: Option<ValidSet<'_>>,
) -> Result<GbdtModel> {
    continue_training_guarded(model, matrix, labels, params, valid, &mut |_| true)
}

pub fn continue_training_guarded(
    model: &GbdtModel,
    matrix: &FeatureMatrix,
    labels: &[bool],
    params: &TrainParams,
    valid: Option<ValidSet<'_>>,
    keep_going: &mut dyn FnMut(usize) -> bool,
) -> Result<GbdtModel> {
    params.validate()?;
    let init = model.predict_margin(matrix)?;
    check_inputs(matrix, labels, &init)?;
    let mut next = model.clone();
    boost(&mut next, matrix, labels, init, params, valid, keep_going)?;
    Ok(next)
}

fn check_inputs(matrix: &FeatureMatrix, labels: &[bool], init_margins: &[f64]) -> Result<()> {
    if matrix.row_count() == 0 {
        return Err(Error::EmptyData);
    }
    if labels.len() != matrix.row_count() {
        return Err(Error::LengthMismatch { expected: matrix.row_count(), found: labels.len() });
    }
    if init_margins.len() != matrix.row_count() {
        return Err(Error::LengthMismatch { expected: matrix.row_count(), found: init_margins.len() });
    }
    Ok(())
}

struct Validation<'a> {
    binned: BinnedMatrix,
    labels: &'a [bool],
    margins: Vec<f64>,
    patience: usize,
}

fn boost(
    model: &mut GbdtModel,
    matrix: &FeatureMatrix,
    labels: &[bool],
    mut margins: Vec<f64>,
    params: &TrainParams,
    valid: Option<ValidSet<'_>>,
    keep_going: &mut dyn FnMut(usize) -> bool,
) -> Result<()> {
    let binned = model.bin_mapper.bin_matrix(matrix);
    let base_len = model.trees.len();

    let mut validation = match valid {
        Some(v) if params.early_stopping_rounds > 0 => {
            model.check_width(v.matrix)?;
            check_inputs(v.matrix, v.labels, v.init_margins)?;
            let has_pos = v.labels.iter().any(|&l| l);
            let has_neg = v.labels.iter().any(|&l| !l);
            if !(has_pos && has_neg) {
                return Err(Error::DegenerateValidation);
            }
            Some(Validation {
                binned: model.bin_mapper.bin_matrix(v.matrix),
                labels: v.labels,
                margins: v.init_margins.to_vec(),
                patience: params.early_stopping_rounds,
            })
        }
        Some(v) => {
            model.check_width(v.matrix)?;
            None
        }
        None => None,
    };
    let mut best_round = 0;
    let mut best_auc = match &validation {
        Some(v) => auc(&v.margins, v.labels)?,
        None => f64::NEG_INFINITY,
    };

    let n = labels.len();
    let mut grads = vec![0.0; n];
    let mut hess = vec![0.0; n];
    for round in 0..params.num_iterations_max {
        if !keep_going(round) {
            break;
        }
        for r in 0..n {
            let (g, h) = logistic_grad_hess(margins[r], labels[r]);
            grads[r] = g;
            hess[r] = h;
        }
        let (tree, _) = build_tree(&binned, &grads, &hess, params);
        // no split met the gain/hessian gates: nothing left to learn
        if tree.is_leaf() {
            break;
        }
        for (r, m) in margins.iter_mut().enumerate() {
            *m += params.learning_rate * tree.predict_binned(&binned, r);
        }
        if let Some(v) = validation.as_mut() {
            for (r, m) in v.margins.iter_mut().enumerate() {
                *m += params.learning_rate * tree.predict_binned(&v.binned, r);
            }
        }
        model.push_tree(tree, params.learning_rate);

        if let Some(v) = &validation {
            let score = auc(&v.margins, v.labels)?;
            if score > best_auc {
                best_auc = score;
                best_round = round + 1;
            } else if round + 1 - best_round >= v.patience {
                break;
            }
        }
    }
    if validation.is_some() {
        model.truncate(base_len + best_round);
    }
    Ok(())
}
