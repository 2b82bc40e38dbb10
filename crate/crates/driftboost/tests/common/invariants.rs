//! Property suites, one per documented invariant. Each randomized suite runs
//! 100 cases and panics with the first (shrunk) counterexample.

use std::collections::BTreeMap;

use driftboost::model::{read_gbdt, read_predictor, write_gbdt, write_predictor};
use driftboost::tsv::{read_batch, write_batch};
use driftboost_core::encode::{ColumnEncoder, FeatureKind};
use driftboost_core::gbdt::tree::Node;
use driftboost_core::gbdt::{self, build_tree, logistic_grad_hess, BinMapper, GbdtModel, TrainParams};
use driftboost_core::metrics::auc;
use driftboost_core::pipeline::{
    decide_mode, BudgetClock, FrozenTime, LearnMode, LrSchedule, Pipeline, PipelineConfig, RetrainPolicy, SAFETY_FACTOR,
};
use driftboost_core::schema::{
    fill_missing, subsample_rows, Batch, ColumnData, ColumnSpec, FeatureSchema, Role, WindowStats,
};
use driftboost_core::synth::{generate, DriftKind, DriftSpec};
use driftboost_core::{fit_encoders, FeatureMatrix};
use proptest::prelude::*;
use proptest::test_runner::Config;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::oracles::{auc_all_pairs, central_first, central_second, logistic_loss};
use super::SplitInstance;

pub const CASES: u32 = 100;

fn config() -> Config {
    Config { cases: CASES, failure_persistence: None, ..Config::default() }
}

pub type Suite = (&'static str, fn());

pub const SUITES: &[Suite] = &[
    ("schema: fill_missing is idempotent", fill_missing_is_idempotent),
    ("schema: subsample keeps exactly min(cap, total) rows", subsample_count_is_exact),
    ("schema: TSV round trip is byte exact", tsv_round_trip_is_exact),
    ("encode: fit and transform are pure, width is fixed", encoders_are_pure_and_width_invariant),
    ("encode: seen tokens encode >= 1, unseen as (0, 0)", ordinal_frequency_consistency),
    ("encode: row permutation only reorders ordinal ids", permutation_only_moves_ordinals),
    ("gbdt: warm start equals monolithic training", warm_start_equivalence),
    ("gbdt: root split equals exhaustive search", root_split_matches_exhaustive),
    ("gbdt: splits respect min_split_gain", splits_respect_min_split_gain),
    ("gbdt: worker count does not change the model", thread_count_does_not_change_the_model),
    ("gbdt: importances re-derive from the trees", importances_rederive),
    ("gbdt: logistic gradient matches finite differences", gradient_matches_finite_differences),
    ("metrics: auc is invariant to increasing transforms", auc_rank_invariant),
    ("metrics: auc plus flipped-label auc is 1", auc_flip_sums_to_one),
    ("metrics: auc ignores row order and matches all pairs", auc_permutation_and_oracle),
    ("pipeline: learning-rate schedule matches its closed form", lr_closed_form),
    ("pipeline: window, selection and unlabeled batches", pipeline_state_invariants),
    ("pipeline: ALWAYS replays identically", pipeline_replay_is_deterministic),
    ("pipeline: decide_mode is a pure function", decide_mode_is_pure),
    ("cli: model files round trip exactly", model_file_round_trip),
    ("synth: generation is deterministic and balanced", synth_is_deterministic_and_balanced),
];

// ---- strategies ----

const ROLES: [Role; 4] = [Role::Cat, Role::Num, Role::Mvc, Role::Time];

fn arb_schema() -> impl Strategy<Value = FeatureSchema> {
    prop::collection::vec(prop::sample::select(ROLES.to_vec()), 1..5).prop_map(|roles| {
        let columns = roles.iter().enumerate().map(|(i, &r)| ColumnSpec::new(format!("col{i}"), r)).collect();
        FeatureSchema::new(columns, "label", "1").unwrap()
    })
}

fn arb_column(role: Role, rows: usize) -> BoxedStrategy<ColumnData> {
    use prop::collection::vec;
    use prop::option::weighted;
    let token = "[a-e]{1,2}";
    match role {
        Role::Cat => vec(weighted(0.8, token), rows).prop_map(ColumnData::Cat).boxed(),
        Role::Num => {
            let value = prop_oneof![(-4i32..4).prop_map(f64::from), -1e6..1e6f64];
            vec(weighted(0.8, value), rows).prop_map(ColumnData::Num).boxed()
        }
        Role::Mvc => vec(weighted(0.8, vec(token, 1..4)), rows).prop_map(ColumnData::Mvc).boxed(),
        Role::Time => vec(weighted(0.8, -2_000_000_000i64..4_000_000_000), rows).prop_map(ColumnData::Time).boxed(),
    }
}

fn arb_batch(schema: FeatureSchema, index: u32, rows: std::ops::Range<usize>) -> impl Strategy<Value = Batch> {
    rows.prop_flat_map(move |n| {
        let schema = schema.clone();
        let columns: Vec<_> = schema.columns().iter().map(|c| arb_column(c.role, n)).collect();
        let labels = prop::option::of(prop::collection::vec(any::<bool>(), n));
        (columns, labels).prop_map(move |(columns, labels)| Batch::new(index, &schema, columns, labels).unwrap())
    })
}

/// A schema, a fit-window batch and a second batch to transform.
fn arb_window_and_batch() -> impl Strategy<Value = (FeatureSchema, Batch, Batch)> {
    arb_schema().prop_flat_map(|s| (Just(s.clone()), arb_batch(s.clone(), 1, 0..20), arb_batch(s, 2, 0..20)))
}

/// A small numeric training set with some signal and many tied values.
fn arb_dataset() -> impl Strategy<Value = (FeatureMatrix, Vec<bool>)> {
    (10usize..80, 1usize..4).prop_flat_map(|(rows, features)| {
        let row = prop::collection::vec((-6i32..6).prop_map(|v| f64::from(v) * 0.5), features);
        (prop::collection::vec(row, rows), prop::collection::vec(any::<bool>(), rows)).prop_map(|(x, noise)| {
            let labels = x.iter().zip(&noise).map(|(r, &n)| (r[0] > 0.0) ^ (n && r[0].abs() < 1.0)).collect();
            (FeatureMatrix::from_rows(&x).unwrap(), labels)
        })
    })
}

fn small_params(rounds: usize) -> TrainParams {
    TrainParams { num_iterations_max: rounds, early_stopping_rounds: 0, max_depth: 3, ..TrainParams::default() }
}

// ---- schema_ingest ----

pub fn fill_missing_is_idempotent() {
    proptest!(config(), |((schema, window, batch) in arb_window_and_batch())| {
        let stats = WindowStats::compute(std::slice::from_ref(&window), &schema);
        let once = fill_missing(&batch, &schema, &stats);
        prop_assert_eq!(once.missing_count(), 0);
        prop_assert_eq!(fill_missing(&once, &schema, &stats), once);
    });
}

pub fn subsample_count_is_exact() {
    let schema = FeatureSchema::new(vec![ColumnSpec::new("row", Role::Num)], "y", "1").unwrap();
    proptest!(config(), |(sizes in prop::collection::vec(0usize..150, 1..5), cap in 1usize..400, seed: u64)| {
        let batches: Vec<Batch> = sizes
            .iter()
            .enumerate()
            .map(|(i, &n)| {
                let ids = ColumnData::Num((0..n).map(|r| Some(r as f64)).collect());
                Batch::new(i as u32 + 1, &schema, vec![ids], None).unwrap()
            })
            .collect();
        let out = subsample_rows(&batches, cap, seed);
        let total: usize = sizes.iter().sum();
        prop_assert_eq!(out.iter().map(Batch::row_count).sum::<usize>(), cap.min(total));
        prop_assert_eq!(out.len(), batches.len());
        for (kept, original) in out.iter().zip(&batches) {
            prop_assert_eq!(kept.index(), original.index());
            let ColumnData::Num(ids) = &kept.columns()[0] else { unreachable!() };
            prop_assert!(ids.windows(2).all(|w| w[0] < w[1]), "row order not preserved");
        }
        prop_assert_eq!(subsample_rows(&batches, cap, seed), out);
    });
}

pub fn tsv_round_trip_is_exact() {
    let strategy = arb_schema().prop_flat_map(|s| (Just(s.clone()), arb_batch(s, 1, 0..25)));
    proptest!(config(), |((schema, batch) in strategy)| {
        let mut first = Vec::new();
        write_batch(&mut first, &batch, &schema).unwrap();
        let back = read_batch(first.as_slice(), &schema, 1, "buffer").unwrap();
        prop_assert_eq!(&back, &batch);
        let mut second = Vec::new();
        write_batch(&mut second, &back, &schema).unwrap();
        prop_assert_eq!(first, second);
    });
}

// ---- encode ----

pub fn encoders_are_pure_and_width_invariant() {
    proptest!(config(), |((schema, window, batch) in arb_window_and_batch())| {
        let stats = WindowStats::compute(std::slice::from_ref(&window), &schema);
        let window = fill_missing(&window, &schema, &stats);
        let batch = fill_missing(&batch, &schema, &stats);
        let state = fit_encoders(std::slice::from_ref(&window), &schema).unwrap();
        prop_assert_eq!(&fit_encoders(std::slice::from_ref(&window), &schema).unwrap(), &state);
        let a = state.transform(&batch, &schema).unwrap();
        prop_assert_eq!(&state.transform(&batch, &schema).unwrap(), &a);
        let b = state.transform(&window, &schema).unwrap();
        prop_assert_eq!(a.feature_count(), state.layout().len());
        prop_assert_eq!(b.feature_count(), state.layout().len());
    });
}

fn cell_tokens(data: &ColumnData, row: usize) -> Vec<String> {
    match data {
        ColumnData::Cat(v) => v[row].iter().cloned().collect(),
        ColumnData::Mvc(v) => v[row].clone().unwrap_or_default(),
        _ => Vec::new(),
    }
}

pub fn ordinal_frequency_consistency() {
    proptest!(config(), |((schema, window, batch) in arb_window_and_batch())| {
        let stats = WindowStats::compute(std::slice::from_ref(&window), &schema);
        let window = fill_missing(&window, &schema, &stats);
        let batch = fill_missing(&batch, &schema, &stats);
        let state = fit_encoders(std::slice::from_ref(&window), &schema).unwrap();
        let m = state.transform(&batch, &schema).unwrap();
        for (col, spec) in schema.columns().iter().enumerate() {
            let seen: Vec<String> = (0..window.row_count()).flat_map(|r| cell_tokens(&window.columns()[col], r)).collect();
            let feature = |kind| state.layout().iter().position(|e| e.source == col && e.kind == kind).unwrap();
            for r in 0..batch.row_count() {
                let tokens = cell_tokens(&batch.columns()[col], r);
                match spec.role {
                    Role::Cat => {
                        let (ord, freq) = (m.get(r, feature(FeatureKind::Ordinal)), m.get(r, feature(FeatureKind::Frequency)));
                        if seen.contains(&tokens[0]) {
                            prop_assert!(ord >= 1.0 && freq >= 1.0);
                        } else {
                            prop_assert_eq!((ord, freq), (0.0, 0.0));
                        }
                    }
                    Role::Mvc => {
                        let max = m.get(r, feature(FeatureKind::MaxTokenFrequency));
                        prop_assert_eq!(max >= 1.0, tokens.iter().any(|t| seen.contains(t)));
                    }
                    _ => {}
                }
            }
        }
    });
}

pub fn permutation_only_moves_ordinals() {
    let strategy = arb_schema().prop_flat_map(|s| (Just(s.clone()), arb_batch(s, 1, 0..25))).prop_flat_map(|(s, b)| {
        let order: Vec<usize> = (0..b.row_count()).collect();
        (Just(s), Just(b), Just(order).prop_shuffle())
    });
    proptest!(config(), |((schema, batch, order) in strategy)| {
        let stats = WindowStats::compute(std::slice::from_ref(&batch), &schema);
        let batch = fill_missing(&batch, &schema, &stats);
        let permuted = batch.select_rows(&order);
        let a = fit_encoders(std::slice::from_ref(&batch), &schema).unwrap();
        let b = fit_encoders(std::slice::from_ref(&permuted), &schema).unwrap();
        for (col, (ea, eb)) in a.columns().iter().zip(b.columns()).enumerate() {
            match (ea, eb) {
                (ColumnEncoder::Cat { counts: ca, .. }, ColumnEncoder::Cat { ordinal, counts: cb }) => {
                    prop_assert_eq!(ca, cb);
                    let mut first_seen = BTreeMap::new();
                    for r in 0..permuted.row_count() {
                        for t in cell_tokens(&permuted.columns()[col], r) {
                            let next = first_seen.len() as u32 + 1;
                            first_seen.entry(t).or_insert(next);
                        }
                    }
                    prop_assert_eq!(ordinal, &first_seen);
                }
                (ColumnEncoder::Mvc { counts: ca }, ColumnEncoder::Mvc { counts: cb }) => prop_assert_eq!(ca, cb),
                (x, y) => prop_assert_eq!(x, y),
            }
        }
    });
}

// ---- gbdt_core ----

pub fn warm_start_equivalence() {
    proptest!(config(), |((x, y) in arb_dataset(), (n, m) in (1usize..6, 1usize..6), (probe, _) in arb_dataset())| {
        prop_assume!(probe.feature_count() == x.feature_count());
        let zeros = vec![0.0; x.row_count()];
        let mono = gbdt::train(&x, &y, &zeros, &small_params(n + m), None).unwrap();
        let first = gbdt::train(&x, &y, &zeros, &small_params(n), None).unwrap();
        let both = gbdt::continue_training(&first, &x, &y, &small_params(m), None).unwrap();
        for data in [&x, &probe] {
            let (a, b) = (mono.predict_margin(data).unwrap(), both.predict_margin(data).unwrap());
            for (p, q) in a.iter().zip(&b) {
                prop_assert!((p - q).abs() <= 1e-9, "{} vs {}", p, q);
            }
        }
    });
}

pub fn root_split_matches_exhaustive() {
    proptest!(config(), |(seed: u64)| {
        let instance = SplitInstance::random(&mut ChaCha8Rng::seed_from_u64(seed));
        if let Err(e) = instance.check() {
            prop_assert!(false, "{}", e);
        }
    });
}

fn split_gains(model: &GbdtModel) -> impl Iterator<Item = (usize, f64)> + '_ {
    model.trees().iter().flat_map(|t| t.tree.nodes()).filter_map(|n| match *n {
        Node::Split { feature, gain, .. } => Some((feature, gain)),
        Node::Leaf { .. } => None,
    })
}

pub fn splits_respect_min_split_gain() {
    proptest!(config(), |((x, y) in arb_dataset(), min_gain in 0.0..3.0f64)| {
        let zeros = vec![0.0; x.row_count()];
        let params = TrainParams { min_split_gain: min_gain, ..small_params(5) };
        let model = gbdt::train(&x, &y, &zeros, &params, None).unwrap();
        for (_, gain) in split_gains(&model) {
            prop_assert!(gain >= min_gain);
        }
        let blocked = TrainParams { min_split_gain: 1e12, ..small_params(5) };
        prop_assert_eq!(gbdt::train(&x, &y, &zeros, &blocked, None).unwrap().tree_count(), 0);
        let binned = BinMapper::fit(&x, 255).bin_matrix(&x);
        let grads: Vec<f64> = y.iter().map(|&l| logistic_grad_hess(0.0, l).0).collect();
        let hess = vec![0.25; x.row_count()];
        prop_assert!(build_tree(&binned, &grads, &hess, &blocked).0.is_leaf());
    });
}

pub fn thread_count_does_not_change_the_model() {
    let pools: Vec<rayon::ThreadPool> =
        [1, 4].iter().map(|&n| rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap()).collect();
    proptest!(config(), |((x, y) in arb_dataset())| {
        let zeros = vec![0.0; x.row_count()];
        let files: Vec<String> = pools
            .iter()
            .map(|pool| pool.install(|| write_gbdt(&gbdt::train(&x, &y, &zeros, &small_params(6), None).unwrap(), &small_params(6))))
            .collect();
        prop_assert_eq!(&files[0], &files[1]);
    });
}

pub fn importances_rederive() {
    proptest!(config(), |((x, y) in arb_dataset())| {
        let model = gbdt::train(&x, &y, &vec![0.0; x.row_count()], &small_params(8), None).unwrap();
        let mut walked = vec![0.0; model.feature_count()];
        for (feature, gain) in split_gains(&model) {
            walked[feature] += gain;
        }
        prop_assert_eq!(walked.as_slice(), model.importances());
    });
}

pub fn gradient_matches_finite_differences() {
    proptest!(config(), |(margin in -20.0..20.0f64, label: bool)| {
        let (g, h) = logistic_grad_hess(margin, label);
        let loss = |m| logistic_loss(m, label);
        let fd_g = central_first(loss, margin, 1e-5);
        let fd_h = central_second(loss, margin, 1e-4);
        prop_assert!((g - fd_g).abs() <= 1e-6, "grad {} vs {}", g, fd_g);
        prop_assert!((h - fd_h).abs() <= 1e-4, "hess {} vs {}", h, fd_h);
    });
}

// ---- metrics_eval ----

fn arb_scored() -> impl Strategy<Value = (Vec<f64>, Vec<bool>)> {
    prop::collection::vec(((-300i32..300).prop_map(f64::from), any::<bool>()), 2..200)
        .prop_filter("both classes", |v| v.iter().any(|p| p.1) && v.iter().any(|p| !p.1))
        .prop_map(|v| v.into_iter().unzip())
}

pub fn auc_rank_invariant() {
    proptest!(config(), |((s, y) in arb_scored())| {
        let base = auc(&s, &y).unwrap();
        let cubic: Vec<f64> = s.iter().map(|&x| x * x * x + 2.0 * x).collect();
        let affine: Vec<f64> = s.iter().map(|&x| 0.5 * x - 7.0).collect();
        prop_assert_eq!(auc(&cubic, &y).unwrap(), base);
        prop_assert_eq!(auc(&affine, &y).unwrap(), base);
    });
}

pub fn auc_flip_sums_to_one() {
    proptest!(config(), |((s, y) in arb_scored())| {
        let flipped: Vec<bool> = y.iter().map(|l| !l).collect();
        prop_assert_eq!(auc(&s, &y).unwrap() + auc(&s, &flipped).unwrap(), 1.0);
    });
}

pub fn auc_permutation_and_oracle() {
    let strategy = arb_scored().prop_flat_map(|(s, y)| {
        let pairs: Vec<(f64, bool)> = s.into_iter().zip(y).collect();
        (Just(pairs.clone()), Just(pairs).prop_shuffle())
    });
    proptest!(config(), |((pairs, shuffled) in strategy)| {
        let (s, y): (Vec<f64>, Vec<bool>) = pairs.into_iter().unzip();
        let (s2, y2): (Vec<f64>, Vec<bool>) = shuffled.into_iter().unzip();
        let a = auc(&s, &y).unwrap();
        prop_assert_eq!(auc(&s2, &y2).unwrap(), a);
        prop_assert!((a - auc_all_pairs(&s, &y)).abs() <= 1e-12);
    });
}

// ---- drift_pipeline ----

pub fn lr_closed_form() {
    proptest!(config(), |(p0 in 0.01..1.0f64, step in 0.0..0.05f64, t in 0u32..2000)| {
        let mut schedule = LrSchedule::new(p0, step);
        for _ in 0..t {
            schedule.advance();
        }
        let closed = p0 + step * f64::from(t) * f64::from(t + 1) / 2.0;
        let tol = 4.0 * f64::EPSILON * f64::from(t.max(1)) * closed;
        prop_assert!((schedule.current() - closed).abs() <= tol, "{} vs {}", schedule.current(), closed);
        prop_assert_eq!(schedule.batches_seen(), t);
    });
}

fn tiny_schema() -> FeatureSchema {
    FeatureSchema::new(
        vec![ColumnSpec::new("x", Role::Num), ColumnSpec::new("c", Role::Cat), ColumnSpec::new("t", Role::Time)],
        "y",
        "1",
    )
    .unwrap()
}

/// A short stream of tiny batches, each labeled with probability 0.7.
fn arb_stream() -> impl Strategy<Value = Vec<Batch>> {
    prop::collection::vec((8usize..24, prop::bool::weighted(0.7), any::<u64>()), 2..8).prop_map(|specs| {
        let schema = tiny_schema();
        specs
            .into_iter()
            .enumerate()
            .map(|(i, (rows, labeled, seed))| {
                use rand::Rng;
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let x: Vec<f64> = (0..rows).map(|_| rng.random_range(-2.0..2.0)).collect();
                let c = (0..rows).map(|_| Some(format!("k{}", rng.random_range(0..4)))).collect();
                let t = (0..rows).map(|r| Some((i * 100 + r) as i64)).collect();
                let y: Vec<bool> = x.iter().map(|&v| v + rng.random_range(-1.0..1.0) > 0.0).collect();
                let columns =
                    vec![ColumnData::Num(x.into_iter().map(Some).collect()), ColumnData::Cat(c), ColumnData::Time(t)];
                Batch::new(i as u32 + 1, &schema, columns, labeled.then_some(y)).unwrap()
            })
            .collect()
    })
}

fn tiny_config(window: usize, tenths: u32, policy: RetrainPolicy) -> PipelineConfig {
    PipelineConfig {
        window_batches: window,
        select_proportion: f64::from(tenths) / 10.0,
        pretrain_rounds: 3,
        full_retrain: policy,
        train: TrainParams { num_iterations_max: 5, early_stopping_rounds: 2, max_depth: 3, ..TrainParams::default() },
        ..PipelineConfig::default()
    }
}

pub fn pipeline_state_invariants() {
    let policies = vec![RetrainPolicy::Always, RetrainPolicy::Budgeted, RetrainPolicy::Never];
    proptest!(config(), |(stream in arb_stream(), window in 1usize..4, tenths in 1u32..=10, policy in prop::sample::select(policies.clone()))| {
        let config = tiny_config(window, tenths, policy);
        let mut pipeline = Pipeline::new(tiny_schema(), config, 1e9, stream.len(), FrozenTime).unwrap();
        let mut labeled = Vec::new();
        for batch in &stream {
            let before = (pipeline.predictor().cloned(), pipeline.encoders().cloned(), pipeline.window().to_vec(), *pipeline.schedule());
            let outcome = pipeline.process_batch(batch).unwrap();
            prop_assert_eq!(outcome.predictions.len(), batch.row_count());
            if batch.is_labeled() {
                labeled.push(batch.index());
            } else {
                prop_assert_eq!(outcome.mode, None);
                let after = (pipeline.predictor().cloned(), pipeline.encoders().cloned(), pipeline.window().to_vec(), *pipeline.schedule());
                prop_assert!(before == after, "unlabeled batch {} changed pipeline state", batch.index());
            }
            let held: Vec<u32> = pipeline.window().iter().map(Batch::index).collect();
            prop_assert!(held.len() <= window);
            prop_assert_eq!(&held[..], &labeled[labeled.len().saturating_sub(window)..]);
            if let Some(p) = pipeline.predictor() {
                let total = p.encoders.feature_count() as u32;
                let expected = (tenths * total).div_ceil(10) as usize;
                prop_assert_eq!(p.mask.iter().filter(|&&m| m).count(), expected);
            }
        }
    });
}

pub fn pipeline_replay_is_deterministic() {
    proptest!(config(), |(stream in arb_stream(), tenths in 1u32..=10)| {
        let run = || {
            let mut p = Pipeline::new(tiny_schema(), tiny_config(99, tenths, RetrainPolicy::Always), 1e9, stream.len(), FrozenTime).unwrap();
            stream.iter().map(|b| p.process_batch(b).unwrap().predictions).collect::<Vec<_>>()
        };
        let (a, b) = (run(), run());
        let bits = |v: &Vec<Vec<f64>>| v.iter().flatten().map(|x| x.to_bits()).collect::<Vec<_>>();
        prop_assert_eq!(bits(&a), bits(&b));
    });
}

pub fn decide_mode_is_pure() {
    let policies = vec![RetrainPolicy::Always, RetrainPolicy::Budgeted, RetrainPolicy::Never];
    proptest!(config(), |(policy in prop::sample::select(policies.clone()), budget in 1.0..1000.0f64, used in 0.0..1.2f64, remaining in 1usize..20, cost in prop::option::of(0.0..200.0f64))| {
        let clock = BudgetClock { budget_seconds: budget, consumed_seconds: used * budget, batches_remaining: remaining };
        let mode = decide_mode(policy, &clock, cost);
        prop_assert_eq!(decide_mode(policy, &clock, cost), mode);
        let expected = match (policy, cost) {
            (_, None) | (RetrainPolicy::Always, _) => LearnMode::Full,
            (RetrainPolicy::Never, _) => LearnMode::Incremental,
            (RetrainPolicy::Budgeted, Some(c)) => {
                if (budget - used * budget) / remaining as f64 >= SAFETY_FACTOR * c { LearnMode::Full } else { LearnMode::Incremental }
            }
        };
        prop_assert_eq!(mode, expected);
    });
}

// ---- cli ----

pub fn model_file_round_trip() {
    proptest!(config(), |(stream in arb_stream(), (x, y) in arb_dataset(), (probe, _) in arb_dataset())| {
        let params = small_params(6);
        let model = gbdt::train(&x, &y, &vec![0.0; x.row_count()], &params, None).unwrap();
        let (back, back_params) = read_gbdt(&write_gbdt(&model, &params)).unwrap();
        prop_assert_eq!(&back_params, &params);
        if probe.feature_count() == x.feature_count() {
            prop_assert_eq!(back.predict_margin(&probe).unwrap(), model.predict_margin(&probe).unwrap());
        }
        prop_assert_eq!(back, model);

        let mut pipeline = Pipeline::new(tiny_schema(), tiny_config(2, 7, RetrainPolicy::Budgeted), 1e9, stream.len(), FrozenTime).unwrap();
        for b in &stream {
            pipeline.process_batch(b).unwrap();
        }
        if let Some(predictor) = pipeline.predictor() {
            let (loaded, _) = read_predictor(&write_predictor(predictor, &params)).unwrap();
            prop_assert_eq!(&loaded, predictor);
            for b in &stream {
                let (p, q) = (predictor.predict_proba(b).unwrap(), loaded.predict_proba(b).unwrap());
                for (a, c) in p.iter().zip(&q) {
                    prop_assert!((a - c).abs() <= 1e-12);
                }
            }
        }
    });
}

// ---- synth_drift ----

pub fn synth_is_deterministic_and_balanced() {
    let kinds = vec![DriftKind::Flip, DriftKind::Rotate, DriftKind::Shift];
    proptest!(config(), |(seed: u64, kind in prop::sample::select(kinds.clone()), drift_at in 1u32..=11)| {
        let spec = DriftSpec { rows_per_batch: 1_000, drift_kind: kind, drift_at, seed, ..DriftSpec::default() };
        let stream = generate(&spec).unwrap();
        prop_assert_eq!(&generate(&spec).unwrap().batches, &stream.batches);
        for b in &stream.batches {
            let y = b.labels().unwrap();
            let rate = y.iter().filter(|&&l| l).count() as f64 / y.len() as f64;
            prop_assert!((0.2..=0.8).contains(&rate), "batch {} rate {}", b.index(), rate);
        }
    });
}
