//! The diagonal alignment prior.
//!
//! For a source sentence of `n` words and a target sentence of `m` words,
//! target position `j` (1-based) links to the NULL word with probability
//! `p0` and to source position `i` (1-based) with probability
//!
//! ```text
//! (1 - p0) * exp(lambda * h(i, j)) / Z(j),   h(i, j) = -|i/n - j/m|
//! ```
//!
//! where `Z(j)` normalizes over `i = 1..n`. With `lambda = 0` this is the
//! uniform distortion of IBM Model 1.

use std::collections::BTreeMap;

use super::{DiagonalParams, ModelKind};
use crate::error::{Error, Result};

pub const LAMBDA_MIN: f64 = 0.0;
pub const LAMBDA_MAX: f64 = 20.0;
pub const LAMBDA_TOLERANCE: f64 = 1e-3;

#[inline]
pub(crate) fn feature(i: usize, j: usize, n: usize, m: usize) -> f64 {
    -((i as f64) / (n as f64) - (j as f64) / (m as f64)).abs()
}

/// Fills `out[i]` for `i = 0..=n` with the link probabilities of target
/// position `j` (1-based). `out[0]` is the NULL probability.
pub(crate) fn fill_row(j: usize, n: usize, m: usize, params: &DiagonalParams, out: &mut [f64]) {
    debug_assert_eq!(out.len(), n + 1);
    out[0] = params.p0;
    let mass = 1.0 - params.p0;
    match params.kind {
        ModelKind::Model1 => {
            let w = mass / n as f64;
            out[1..].iter_mut().for_each(|x| *x = w);
        }
        ModelKind::Diagonal => {
            let mut z = 0.0;
            for i in 1..=n {
                let e = (params.lambda * feature(i, j, n, m)).exp();
                out[i] = e;
                z += e;
            }
            for x in &mut out[1..] {
                *x = mass * *x / z;
            }
        }
    }
}

/// Prior probability that target position `j` links to source position `i`
/// (`i = 0` is NULL). Positions are 1-based.
pub fn diag_weight(i: usize, j: usize, n: usize, m: usize, params: &DiagonalParams) -> Result<f64> {
    if n == 0 || m == 0 {
        return Err(Error::config("sentence lengths must be positive"));
    }
    if j == 0 || j > m {
        return Err(Error::config(format!("target position {j} outside 1..={m}")));
    }
    if i > n {
        return Err(Error::config(format!("source position {i} outside 0..={n}")));
    }
    let mut row = vec![0.0; n + 1];
    fill_row(j, n, m, params, &mut row);
    Ok(row[i])
}

/// Sufficient statistics of the expected complete-data log prior as a
/// function of lambda.
#[derive(Debug, Default, Clone)]
pub(crate) struct TensionStats {
    /// Sum over links of posterior * h(i, j).
    pub weighted_feature: f64,
    /// Non-NULL posterior mass per (n, m, j).
    pub mass: BTreeMap<(usize, usize, usize), f64>,
}

impl TensionStats {
    /// `lambda * H - sum W(n,m,j) * log Z(lambda; j, n, m)`, i.e. the part of
    /// the expected log prior that depends on lambda.
    pub fn objective(&self, lambda: f64) -> f64 {
        let mut total = lambda * self.weighted_feature;
        for (&(n, m, j), &w) in &self.mass {
            if w == 0.0 {
                continue;
            }
            let z: f64 = (1..=n).map(|i| (lambda * feature(i, j, n, m)).exp()).sum();
            total -= w * z.ln();
        }
        total
    }
}

/// Golden-section maximization of a unimodal function on `[lo, hi]` until
/// the bracket is narrower than `tol`. Returns the bracket midpoint.
pub(crate) fn golden_section_max(f: impl Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while b - a > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Re-fits lambda against the collected statistics. The current value is
/// kept unless the search finds one at least as good, so the objective
/// never decreases.
pub(crate) fn refit_lambda(stats: &TensionStats, current: f64) -> f64 {
    let found = golden_section_max(|l| stats.objective(l), LAMBDA_MIN, LAMBDA_MAX, LAMBDA_TOLERANCE);
    if stats.objective(found) >= stats.objective(current) {
        found
    } else {
        current
    }
}
