//! Reference implementations that share no code with the library.

use driftboost_core::gbdt::TrainParams;

/// All-pairs AUC: wins plus half the ties over positive/negative pairs.
pub fn auc_all_pairs(scores: &[f64], labels: &[bool]) -> f64 {
    let mut credit = 0.0;
    let mut pairs = 0.0;
    for (i, &si) in scores.iter().enumerate() {
        if !labels[i] {
            continue;
        }
        for (j, &sj) in scores.iter().enumerate() {
            if labels[j] {
                continue;
            }
            pairs += 1.0;
            if si > sj {
                credit += 1.0;
            } else if si == sj {
                credit += 0.5;
            }
        }
    }
    credit / pairs
}

/// `-[y log p + (1-y) log(1-p)]` with `p = sigmoid(m)`, via softplus.
pub fn logistic_loss(margin: f64, label: bool) -> f64 {
    let softplus = margin.max(0.0) + (-margin.abs()).exp().ln_1p();
    if label {
        softplus - margin
    } else {
        softplus
    }
}

pub fn central_first(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

pub fn central_second(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h)
}

fn shrink(g: f64, alpha: f64) -> f64 {
    if g > alpha {
        g - alpha
    } else if g < -alpha {
        g + alpha
    } else {
        0.0
    }
}

fn score(g: f64, h: f64, p: &TrainParams) -> f64 {
    let t = shrink(g, p.reg_alpha);
    t * t / (h + p.reg_lambda)
}

/// Best root partitions found by trying every `x <= v` cut of every feature.
#[derive(Debug, Clone)]
pub struct ExhaustiveSplit {
    pub gain: f64,
    /// Left-row sets of every cut whose gain is within `tie` of the best.
    pub winners: Vec<Vec<bool>>,
}

pub fn exhaustive_root_split(
    columns: &[Vec<f64>],
    grads: &[f64],
    hess: &[f64],
    params: &TrainParams,
    tie: f64,
) -> Option<ExhaustiveSplit> {
    let (g, h): (f64, f64) = (grads.iter().sum(), hess.iter().sum());
    let mut cuts: Vec<(f64, Vec<bool>)> = Vec::new();
    for col in columns {
        let mut values = col.clone();
        values.sort_by(f64::total_cmp);
        values.dedup();
        for &v in &values[..values.len().saturating_sub(1)] {
            let left: Vec<bool> = col.iter().map(|&x| x <= v).collect();
            let (mut gl, mut hl) = (0.0, 0.0);
            for r in 0..col.len() {
                if left[r] {
                    gl += grads[r];
                    hl += hess[r];
                }
            }
            let (gr, hr) = (g - gl, h - hl);
            if hl < params.min_child_hessian || hr < params.min_child_hessian {
                continue;
            }
            let gain = 0.5 * (score(gl, hl, params) + score(gr, hr, params) - score(g, h, params));
            if gain > 0.0 && gain >= params.min_split_gain {
                cuts.push((gain, left));
            }
        }
    }
    let best = cuts.iter().map(|c| c.0).fold(f64::NEG_INFINITY, f64::max);
    if cuts.is_empty() {
        return None;
    }
    let winners = cuts.into_iter().filter(|c| c.0 >= best - tie).map(|c| c.1).collect();
    Some(ExhaustiveSplit { gain: best, winners })
}
