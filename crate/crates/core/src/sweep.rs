//! Trajectory rules for truncation sweeps.
//!
//! A quantity evaluated along increasing truncation sizes is *bounded* when
//! its last value is within [`GROWTH_FACTOR`] of its first, *grows* when it is
//! nondecreasing and ends at least that factor higher, and *decays* when it is
//! nonincreasing and ends at least that factor lower.

pub const GROWTH_FACTOR: f64 = 10.0;

const MONOTONE_SLACK: f64 = 1e-9;

fn endpoints(values: &[f64]) -> Option<(f64, f64)> {
    Some((*values.first()?, *values.last()?))
}

pub fn stays_bounded(values: &[f64]) -> bool {
    match endpoints(values) {
        Some((first, last)) => {
            if values.iter().any(|v| !v.is_finite()) {
                return false;
            }
            // zero stays zero
            last <= GROWTH_FACTOR * first || last <= f64::MIN_POSITIVE
        }
        None => true,
    }
}

pub fn grows(values: &[f64]) -> bool {
    match endpoints(values) {
        Some((first, last)) if values.len() > 1 => {
            values.windows(2).all(|w| w[1] >= w[0] * (1.0 - MONOTONE_SLACK))
                && (!last.is_finite() || last >= GROWTH_FACTOR * first)
        }
        _ => false,
    }
}

pub fn decays(values: &[f64]) -> bool {
    match endpoints(values) {
        Some((first, last)) if values.len() > 1 => {
            values.windows(2).all(|w| w[1] <= w[0] * (1.0 + MONOTONE_SLACK))
                && last * GROWTH_FACTOR <= first
        }
        _ => false,
    }
}

pub fn bounded_below(values: &[f64]) -> bool {
    match endpoints(values) {
        Some((first, last)) => first > 0.0 && last * GROWTH_FACTOR >= first,
        None => false,
    }
}
