//! Exact-series evaluation of the moment inequalities behind the coupling
//! argument.

use crate::dist::CellDistribution;
use crate::error::{Error, Result};

use super::{exact_mean, exact_var, Count, Law};

/// `|E R*_{P(n+t),k} - E R*_{P(n),k}| <= (2|t|/n) E R*_{P(n),k}` for `|t| < n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lemma2Check {
    pub n: f64,
    pub t: f64,
    pub k: u32,
    pub lhs: f64,
    pub rhs: f64,
    /// Combined truncation error of the two means.
    pub error: f64,
    pub holds: bool,
}

pub fn lemma2_check(d: &CellDistribution, n: f64, t: f64, k: u32) -> Result<Lemma2Check> {
    if !(n > 0.0) || !(t.abs() < n) {
        return Err(Error::InvalidArgument(format!("need |t| < n, got n = {n}, t = {t}")));
    }
    let base = exact_mean(d, n, k, Count::AtLeast, Law::Poisson)?;
    let moved = exact_mean(d, n + t, k, Count::AtLeast, Law::Poisson)?;
    let lhs = (moved.value - base.value).abs();
    let rhs = 2.0 * t.abs() / n * base.value;
    let error = base.truncation_error + moved.truncation_error;
    Ok(Lemma2Check {
        n,
        t,
        k,
        lhs,
        rhs,
        error,
        holds: lhs <= rhs + error,
    })
}

/// The chain `B*_{n,k} >= 2^-k E R_{P(2n),k}`, `B*_{n,k} <= k E R_{P(n),k}`,
/// `B_{n,k} < E R_{P(n),k}`, each as a margin (positive when it holds).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lemma5Check {
    pub n: f64,
    pub k: u32,
    pub b_star: f64,
    pub b: f64,
    pub mean: f64,
    pub mean_double: f64,
    pub lower_margin: f64,
    pub upper_margin: f64,
    pub strict_margin: f64,
    pub error: f64,
}

impl Lemma5Check {
    pub fn holds(&self) -> bool {
        self.lower_margin >= -self.error && self.upper_margin >= -self.error && self.strict_margin > 0.0
    }
}

pub fn lemma5_check(d: &CellDistribution, n: f64, k: u32) -> Result<Lemma5Check> {
    let b_star = exact_var(d, n, k, Count::AtLeast)?;
    let b = exact_var(d, n, k, Count::Exactly)?;
    let mean = exact_mean(d, n, k, Count::Exactly, Law::Poisson)?;
    let mean_double = exact_mean(d, 2.0 * n, k, Count::Exactly, Law::Poisson)?;
    let scale = 2f64.powi(-(k as i32));
    Ok(Lemma5Check {
        n,
        k,
        b_star: b_star.value,
        b: b.value,
        mean: mean.value,
        mean_double: mean_double.value,
        lower_margin: b_star.value - scale * mean_double.value,
        upper_margin: k as f64 * mean.value - b_star.value,
        strict_margin: mean.value - b.value,
        error: b_star.truncation_error
            + b.truncation_error
            + k as f64 * mean.truncation_error
            + mean_double.truncation_error,
    })
}
