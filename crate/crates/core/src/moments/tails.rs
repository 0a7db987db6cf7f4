//! Poisson and binomial tail probabilities, accurate in absolute terms.
//!
//! Each tail is summed from whichever side is small: the upper tail directly
//! when the mean is below `k`, otherwise the lower tail, with the other side
//! taken as its complement.

use statrs::function::factorial::{ln_binomial, ln_factorial};

/// `(P(X < k), P(X >= k))` for `X ~ Poisson(lambda)`.
pub fn poisson_split(lambda: f64, k: u64) -> (f64, f64) {
    if k == 0 {
        return (0.0, 1.0);
    }
    if lambda <= 0.0 {
        return (1.0, 0.0);
    }
    let ln_l = lambda.ln();
    if lambda < k as f64 {
        let mut term = (-lambda + k as f64 * ln_l - ln_factorial(k)).exp();
        let mut upper = 0.0;
        let mut s = k;
        while term > 0.0 {
            upper += term;
            s += 1;
            term *= lambda / s as f64;
            if term < 1e-18 * upper {
                break;
            }
        }
        (1.0 - upper, upper)
    } else {
        let mut lt = -lambda;
        let mut lower = 0.0;
        for s in 0..k {
            if s > 0 {
                lt += ln_l - (s as f64).ln();
            }
            lower += lt.exp();
        }
        (lower, 1.0 - lower)
    }
}

/// `P(Poisson(lambda) < k)`.
pub fn poisson_cdf_lt(lambda: f64, k: u64) -> f64 {
    poisson_split(lambda, k).0
}

/// `P(Poisson(lambda) >= k)`.
pub fn poisson_tail_ge(lambda: f64, k: u64) -> f64 {
    poisson_split(lambda, k).1
}

/// `P(Poisson(lambda) = k)`.
pub fn poisson_pmf(lambda: f64, k: u64) -> f64 {
    if lambda <= 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    (-lambda + k as f64 * lambda.ln() - ln_factorial(k)).exp()
}

/// `ln C(n, k)`; exact products for small `min(k, n-k)`.
pub fn ln_choose(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    let k = k.min(n - k);
    if k > 1000 {
        return ln_binomial(n, k);
    }
    (0..k).map(|i| ((n - i) as f64 / (i + 1) as f64).ln()).sum()
}

/// `(P(X < k), P(X >= k))` for `X ~ Binomial(n, p)`.
pub fn binom_split(n: u64, p: f64, k: u64) -> (f64, f64) {
    if k == 0 {
        return (0.0, 1.0);
    }
    if k > n || p <= 0.0 {
        return (1.0, 0.0);
    }
    if p >= 1.0 {
        return (0.0, 1.0);
    }
    let ln_p = p.ln();
    let ln_q = (-p).ln_1p();
    if (n as f64) * p < k as f64 {
        let mut lt = ln_choose(n, k) + k as f64 * ln_p + (n - k) as f64 * ln_q;
        let mut upper = 0.0;
        let mut i = k;
        loop {
            let term = lt.exp();
            upper += term;
            if i == n || term < 1e-18 * upper || term == 0.0 {
                break;
            }
            lt += ((n - i) as f64 / (i + 1) as f64).ln() + ln_p - ln_q;
            i += 1;
        }
        (1.0 - upper, upper)
    } else {
        let mut lt = n as f64 * ln_q;
        let mut lower = 0.0;
        for i in 0..k {
            if i > 0 {
                lt += ((n - i + 1) as f64 / i as f64).ln() + ln_p - ln_q;
            }
            lower += lt.exp();
        }
        (lower, 1.0 - lower)
    }
}

/// `P(Binomial(n, p) >= k)`.
pub fn binom_tail_ge(n: u64, p: f64, k: u64) -> f64 {
    binom_split(n, p, k).1
}

/// `P(Binomial(n, p) = k)`.
pub fn binom_pmf(n: u64, p: f64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    if p <= 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    if p >= 1.0 {
        return if k == n { 1.0 } else { 0.0 };
    }
    (ln_choose(n, k) + k as f64 * p.ln() + (n - k) as f64 * (-p).ln_1p()).exp()
}
