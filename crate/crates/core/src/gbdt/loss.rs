//! Binary logistic loss.

use crate::math::sigmoid;

/// Hessians are clamped below at this value so saturated margins never
/// divide by zero.
pub const HESSIAN_FLOOR: f64 = 1e-16;

/// First and second derivative of the logistic loss with respect to the
/// margin: `grad = p - y`, `hess = p (1 - p)` with `p = sigmoid(margin)`.
#[inline]
pub fn logistic_grad_hess(margin: f64, label: bool) -> (f64, f64) {
    // p (1 - p) and p - 1 written without cancellation
    let p = sigmoid(margin);
    let q = sigmoid(-margin);
    let grad = if label { -q } else { p };
    (grad, (p * q).max(HESSIAN_FLOOR))
}
