//! Float helpers that work without `std`.

#[inline]
pub(crate) fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub(crate) fn abs(x: f64) -> f64 {
    libm::fabs(x)
}

#[inline]
pub(crate) fn floor(x: f64) -> f64 {
    libm::floor(x)
}

#[inline]
pub(crate) fn sigmoid(margin: f64) -> f64 {
    1.0 / (1.0 + exp(-margin))
}

/// `⌈x⌉`, except that values within `1e-9` of an integer snap to it, so
/// `0.3 * 10.0` counts as 3 rather than 4.
pub(crate) fn ceil_snapped(x: f64) -> f64 {
    let nearest = libm::round(x);
    if abs(x - nearest) <= 1e-9 {
        nearest
    } else {
        libm::ceil(x)
    }
}
