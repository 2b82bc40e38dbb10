#![allow(dead_code)]

pub mod invariants;
pub mod oracles;

use driftboost_core::gbdt::tree::Node;
use driftboost_core::gbdt::{build_tree, BinMapper, TrainParams};
use driftboost_core::schema::{Batch, ColumnData, ColumnSpec, FeatureSchema, Role};
use driftboost_core::FeatureMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use oracles::exhaustive_root_split;

pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// 2,000 rows by 20 features; the label depends non-linearly on five of them.
pub fn warm_start_data() -> (FeatureMatrix, Vec<bool>) {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut rows = Vec::with_capacity(2000);
    let mut labels = Vec::with_capacity(2000);
    for _ in 0..2000 {
        let x: Vec<f64> = (0..20).map(|_| rng.random_range(-3.0..3.0)).collect();
        let m = 1.2 * x[0] - 0.8 * x[3] + x[7] * x[8] * 0.5 + if x[12] > 1.0 { 1.5 } else { -0.5 };
        labels.push(rng.random::<f64>() < sigmoid(m));
        rows.push(x);
    }
    (FeatureMatrix::from_rows(&rows).unwrap(), labels)
}

pub fn constant_rate_params(rounds: usize) -> TrainParams {
    TrainParams { learning_rate: 0.1, num_iterations_max: rounds, early_stopping_rounds: 0, ..TrainParams::default() }
}

/// One root-split oracle instance: raw feature columns, gradients, hessians
/// and the regularization to use.
#[derive(Debug, Clone)]
pub struct SplitInstance {
    pub columns: Vec<Vec<f64>>,
    pub grads: Vec<f64>,
    pub hess: Vec<f64>,
    pub params: TrainParams,
}

impl SplitInstance {
    pub fn random(rng: &mut impl Rng) -> Self {
        let rows = rng.random_range(2..=64);
        let features = rng.random_range(1..=3);
        let columns = (0..features)
            .map(|_| {
                let levels = rng.random_range(1..=40);
                (0..rows).map(|_| f64::from(rng.random_range(0..levels)) * 0.25 - 3.0).collect()
            })
            .collect();
        let grads = (0..rows).map(|_| rng.random_range(-1.0..1.0)).collect();
        let hess = (0..rows).map(|_| rng.random_range(0.01..0.25)).collect();
        let params = TrainParams {
            reg_lambda: rng.random_range(0.0..2.0),
            reg_alpha: if rng.random_bool(0.5) { 0.0 } else { rng.random_range(0.0..0.5) },
            min_child_hessian: rng.random_range(0.0..0.3),
            max_depth: 1,
            ..TrainParams::default()
        };
        Self { columns, grads, hess, params }
    }

    /// Compares the root of `build_tree` with exhaustive search; `Ok(true)`
    /// when the root splits.
    pub fn check(&self) -> Result<bool, String> {
        let rows = self.grads.len();
        let matrix_rows: Vec<Vec<f64>> = (0..rows).map(|r| self.columns.iter().map(|c| c[r]).collect()).collect();
        let matrix = FeatureMatrix::from_rows(&matrix_rows).unwrap();
        let mapper = BinMapper::fit(&matrix, 255);
        let binned = mapper.bin_matrix(&matrix);
        let (tree, _) = build_tree(&binned, &self.grads, &self.hess, &self.params);
        let oracle = exhaustive_root_split(&self.columns, &self.grads, &self.hess, &self.params, 1e-9);
        match (&tree.nodes()[0], oracle) {
            (Node::Leaf { .. }, None) => Ok(false),
            (Node::Leaf { .. }, Some(o)) if o.gain <= 1e-9 => Ok(false),
            (Node::Leaf { .. }, Some(o)) => Err(format!("tree is a leaf but a cut gains {}", o.gain)),
            (Node::Split { gain, .. }, None) if *gain <= 1e-9 => Ok(true),
            (Node::Split { gain, .. }, None) => Err(format!("tree splits with gain {gain}, oracle finds none")),
            (&Node::Split { feature, threshold, gain, .. }, Some(o)) => {
                if (gain - o.gain).abs() > 1e-9 {
                    return Err(format!("gain {gain} vs oracle {}", o.gain));
                }
                let left: Vec<bool> = (0..rows).map(|r| binned.get(r, feature) <= threshold).collect();
                if o.winners.contains(&left) {
                    Ok(true)
                } else {
                    Err(format!("feature {feature} bin {threshold} is not among the best cuts"))
                }
            }
        }
    }
}

/// A labeled batch of NUM columns where only `informative` carry signal.
pub fn sparse_signal_batch(
    index: u32,
    schema: &FeatureSchema,
    rows: usize,
    informative: [usize; 2],
    rng: &mut impl Rng,
) -> Batch {
    let width = schema.len();
    let x: Vec<Vec<f64>> = (0..width).map(|_| (0..rows).map(|_| rng.random_range(-2.0..2.0)).collect()).collect();
    let labels = (0..rows)
        .map(|r| rng.random::<f64>() < sigmoid(2.5 * x[informative[0]][r] - 2.5 * x[informative[1]][r]))
        .collect();
    let columns = x.into_iter().map(|c| ColumnData::Num(c.into_iter().map(Some).collect())).collect();
    Batch::new(index, schema, columns, Some(labels)).unwrap()
}

pub fn numeric_schema(width: usize) -> FeatureSchema {
    FeatureSchema::new((0..width).map(|i| ColumnSpec::new(format!("x{i}"), Role::Num)).collect(), "y", "1").unwrap()
}
