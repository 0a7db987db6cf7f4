//! Exact means and variances of occupancy counts as sums over cells.
//!
//! Every moment here has the form `sum_j h(c p_j)` with `c = t` (Poisson) or
//! `c = n` (fixed `n`) and `h` entire with `h(0) = 0`. Cells with
//! `c p_j > EPS` are summed one by one; for the rest `h` is replaced by its
//! Maclaurin series, which turns the infinite remainder into a short
//! combination of power tail sums `sum_{j>J} p_j^m`.

use crate::dist::{CellDistribution, KahanSum, EM_CUTOFF};
use crate::error::{Error, Result};

use super::tails::{binom_pmf, binom_split, poisson_pmf, poisson_split};

/// Cells with `c p_j` at or below this go into the series remainder.
const EPS: f64 = 1.0 / 16.0;
/// Highest power kept in the remainder series.
const ORDER: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Law {
    /// `P(t)` balls, cells independent Poisson.
    Poisson,
    /// Exactly `n` balls.
    Binomial,
}

/// Which count: cells with at least `k` balls (`R*`) or exactly `k` (`R`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Count {
    AtLeast,
    Exactly,
}

impl Count {
    pub fn is_star(self) -> bool {
        self == Count::AtLeast
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesValue {
    pub value: f64,
    /// Bound on the error from truncating and summing the remainder series,
    /// plus rounding in the head.
    pub truncation_error: f64,
}

#[derive(Debug, Clone, Copy)]
enum Term {
    Mean,
    Variance,
}

#[derive(Debug, Clone, Copy)]
struct CellTerm {
    law: Law,
    count: Count,
    k: u64,
    n: u64,
    scale: f64,
    kind: Term,
}

impl CellTerm {
    /// `(q, 1 - q)` for the cell indicator, each side accurate on its own.
    fn indicator(&self, p: f64) -> (f64, f64) {
        match (self.law, self.count) {
            (Law::Poisson, Count::AtLeast) => {
                let (lo, hi) = poisson_split(self.scale * p, self.k);
                (hi, lo)
            }
            (Law::Poisson, Count::Exactly) => {
                let q = poisson_pmf(self.scale * p, self.k);
                (q, 1.0 - q)
            }
            (Law::Binomial, Count::AtLeast) => {
                let (lo, hi) = binom_split(self.n, p, self.k);
                (hi, lo)
            }
            (Law::Binomial, Count::Exactly) => {
                let q = binom_pmf(self.n, p, self.k);
                (q, 1.0 - q)
            }
        }
    }

    fn eval(&self, p: f64) -> f64 {
        let (q, c) = self.indicator(p);
        match self.kind {
            Term::Mean => q,
            Term::Variance => q * c,
        }
    }

    /// Coefficients `a_m` of the indicator probability in `x = scale * p`,
    /// for `m = 0..=order`.
    fn indicator_coefficients(&self, order: usize) -> Vec<f64> {
        let k = self.k as usize;
        let mut a = vec![0.0; order + 1];
        // falling(m) = prod_{i<m} (n - i) / n, the binomial analogue of 1
        let falling = |m: usize| -> f64 {
            (0..m).fold(1.0, |acc, i| {
                acc * (self.n as f64 - i as f64).max(0.0) / self.n as f64
            })
        };
        let mut fact = vec![1.0f64; order + 1];
        for m in 1..=order {
            fact[m] = fact[m - 1] * m as f64;
        }
        for m in k..=order {
            let r = m - k;
            let sign = if r % 2 == 0 { 1.0 } else { -1.0 };
            let base = match self.count {
                // (-1)^{m-k} C(m-1, k-1) / m!
                Count::AtLeast => sign * choose(m - 1, k - 1) / fact[m],
                // (-1)^r / (k! r!)
                Count::Exactly => sign / (fact[k] * fact[r]),
            };
            a[m] = match self.law {
                Law::Poisson => base,
                Law::Binomial => base * falling(m),
            };
        }
        a
    }

    fn coefficients(&self, order: usize) -> Vec<f64> {
        let a = self.indicator_coefficients(order);
        match self.kind {
            Term::Mean => a,
            Term::Variance => {
                let mut v = a.clone();
                for i in 0..=order {
                    for j in 0..=order - i {
                        v[i + j] -= a[i] * a[j];
                    }
                }
                v
            }
        }
    }
}

fn choose(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn sum_over_cells(d: &CellDistribution, term: CellTerm) -> SeriesValue {
    if term.scale == 0.0 {
        return SeriesValue {
            value: 0.0,
            truncation_error: 0.0,
        };
    }
    let j_min = if d.theta() > 0.0 { EM_CUTOFF } else { 1 };
    let cut = d.alpha(term.scale / EPS).max(j_min);

    let mut head = KahanSum::default();
    let mut magnitude = 0.0;
    for j in 1..=cut {
        let v = term.eval(d.p(j));
        head.add(v);
        magnitude += v.abs();
    }

    let a = term.coefficients(ORDER + 1);
    let mut tail = KahanSum::default();
    let mut error = 0.0;
    for (m, &am) in a.iter().enumerate().take(ORDER + 1).skip(1) {
        if am == 0.0 {
            continue;
        }
        let s = d.power_tail_sum(cut, m as u32);
        let w = am * term.scale.powi(m as i32);
        tail.add(w * s.value);
        error += (w * s.error).abs();
    }
    // first dropped power, doubled
    let s = d.power_tail_sum(cut, ORDER as u32 + 1);
    error += 2.0 * (a[ORDER + 1] * term.scale.powi(ORDER as i32 + 1) * s.value).abs();
    // per-term evaluation and summation rounding
    error += 1e-15 * magnitude + 4.0 * f64::EPSILON * tail.value().abs();

    SeriesValue {
        value: head.value() + tail.value(),
        truncation_error: error,
    }
}

fn make_term(t: f64, k: u32, count: Count, law: Law, kind: Term) -> Result<CellTerm> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be >= 1".into()));
    }
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::InvalidArgument(format!("t must be finite and >= 0, got {t}")));
    }
    let n = match law {
        Law::Poisson => 0,
        Law::Binomial => {
            if t.fract() != 0.0 || t > 9.0e15 {
                return Err(Error::InvalidArgument(format!(
                    "fixed-n moments need an integer n, got {t}"
                )));
            }
            t as u64
        }
    };
    Ok(CellTerm {
        law,
        count,
        k: k as u64,
        n,
        scale: t,
        kind,
    })
}

/// `E R*_{t,k}` (`Count::AtLeast`) or `E R_{t,k}` (`Count::Exactly`) under
/// Poisson(`t`) or fixed-`t` sampling.
pub fn exact_mean(d: &CellDistribution, t: f64, k: u32, count: Count, law: Law) -> Result<SeriesValue> {
    Ok(sum_over_cells(d, make_term(t, k, count, law, Term::Mean)?))
}

/// Variance of the count under Poisson(`t`) sampling, `B*_{t,k}` or `B_{t,k}`:
/// the cells are independent, so it is `sum_j q_j (1 - q_j)`.
pub fn exact_var(d: &CellDistribution, t: f64, k: u32, count: Count) -> Result<SeriesValue> {
    Ok(sum_over_cells(d, make_term(t, k, count, Law::Poisson, Term::Variance)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::{build_distribution, DistributionSpec};

    // Oracle: direct sum over cells until the remaining mass cannot matter.
    fn brute(d: &CellDistribution, t: f64, k: u32, count: Count, law: Law, var: bool) -> f64 {
        let term = make_term(t, k, count, law, if var { Term::Variance } else { Term::Mean }).unwrap();
        let mut acc = KahanSum::default();
        let mut j = 1u64;
        loop {
            let p = d.p(j);
            acc.add(term.eval(p));
            if t * p < 1e-300 || (j > 1000 && (t * p).powi(k as i32) * j as f64 * 8.0 < 1e-17) {
                break;
            }
            j += 1;
        }
        acc.value()
    }

    #[test]
    fn geometric_matches_direct_sum() {
        let d = build_distribution(DistributionSpec::geometric(0.5)).unwrap();
        for law in [Law::Poisson, Law::Binomial] {
            for count in [Count::AtLeast, Count::Exactly] {
                for k in 1..4 {
                    for t in [0.0, 1.0, 10.0, 1000.0, 1e6] {
                        for var in [false, true] {
                            let term = if var { Term::Variance } else { Term::Mean };
                            let got = sum_over_cells(&d, make_term(t, k, count, law, term).unwrap());
                            let want = brute(&d, t, k, count, law, var);
                            assert!(
                                (got.value - want).abs() <= 1e-11 * want.max(1.0),
                                "{law:?} {count:?} k={k} t={t} var={var}: {} vs {want}",
                                got.value
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn coefficient_series_reproduce_the_indicator() {
        for law in [Law::Poisson, Law::Binomial] {
            for count in [Count::AtLeast, Count::Exactly] {
                for k in 1..4 {
                    for kind in [Term::Mean, Term::Variance] {
                        let term = make_term(500.0, k, count, law, kind).unwrap();
                        let a = term.coefficients(ORDER);
                        let x: f64 = 0.05;
                        let series: f64 = a.iter().enumerate().map(|(m, c)| c * x.powi(m as i32)).sum();
                        let direct = term.eval(x / 500.0);
                        assert!((series - direct).abs() < 1e-16 + 1e-12 * direct.abs());
                    }
                }
            }
        }
    }

    #[test]
    fn zero_t_gives_zero() {
        let d = build_distribution(DistributionSpec::zipf(2.0)).unwrap();
        let v = exact_mean(&d, 0.0, 1, Count::AtLeast, Law::Poisson).unwrap();
        assert_eq!(v.value, 0.0);
    }

    #[test]
    fn bad_arguments() {
        let d = build_distribution(DistributionSpec::zipf(2.0)).unwrap();
        assert!(exact_mean(&d, 10.0, 0, Count::AtLeast, Law::Poisson).is_err());
        assert!(exact_mean(&d, 10.5, 1, Count::AtLeast, Law::Binomial).is_err());
        assert!(exact_mean(&d, -1.0, 1, Count::AtLeast, Law::Poisson).is_err());
    }
}
