//! The normalizing sequence `b_n` under which the fixed-`n` and Poissonized
//! counts merge almost surely, and the companion window `t'_n`.
//!
//! ```text
//! theta = 1, k = 1:   b_n = (n L*(n) lnln n)^{-1/2}
//! theta = 1, k >= 2:  b_n = (n L(n) lnln n)^{-1/2}
//! theta < 1:          b_n = min{n^{1/2-theta} / (L(n) lnln n), 1/ln n} / lnln n
//! ```
//!
//! For `theta < 1` only the order `o(min{..})` is prescribed; the extra
//! `1/lnln n` is the concrete choice used here.

use crate::dist::RegVarProfile;
use crate::error::{Error, Result};

/// Smallest `n` for which `lnln n` is comfortably positive.
pub const MIN_N: f64 = 16.0;

#[derive(Debug, Clone, Copy)]
pub struct Normalizer<'a> {
    profile: RegVarProfile<'a>,
    k: u32,
}

pub fn normalizer(profile: RegVarProfile<'_>, k: u32) -> Result<Normalizer<'_>> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be >= 1".into()));
    }
    let theta = profile.theta();
    if !(0.0..=1.0).contains(&theta) {
        return Err(Error::InvalidArgument(format!("theta must lie in [0, 1], got {theta}")));
    }
    Ok(Normalizer { profile, k })
}

impl<'a> Normalizer<'a> {
    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn theta(&self) -> f64 {
        self.profile.theta()
    }

    fn domain(n: f64) -> Result<f64> {
        if !(n >= MIN_N) || !n.is_finite() {
            return Err(Error::NormalizerDomain(n));
        }
        Ok(n.ln().ln())
    }

    /// `L*(n)` for `k = 1`, `L(n)` otherwise.
    fn slowly_varying(&self, n: f64) -> Result<f64> {
        if self.k == 1 {
            Ok(self.profile.lstar(n)?.value)
        } else {
            Ok(self.profile.l(n))
        }
    }

    pub fn b(&self, n: f64) -> Result<f64> {
        let lnln = Self::domain(n)?;
        let theta = self.theta();
        if theta == 1.0 {
            let l = self.slowly_varying(n)?;
            return Ok(1.0 / (n * l * lnln).sqrt());
        }
        let inner = n.powf(0.5 - theta) / (self.profile.l(n) * lnln);
        Ok(inner.min(1.0 / n.ln()) / lnln)
    }

    /// `t'_n`: `sqrt(n lnln n) L*(n)^{-1/4}` (`theta = 1, k = 1`),
    /// `sqrt(n lnln n) L(n)^{-1/4}` (`theta = 1, k >= 2`), `sqrt(n) lnln n`
    /// otherwise.
    pub fn t_prime(&self, n: f64) -> Result<f64> {
        let lnln = Self::domain(n)?;
        if self.theta() == 1.0 {
            let l = self.slowly_varying(n)?;
            Ok((n * lnln).sqrt() * l.powf(-0.25))
        } else {
            Ok(n.sqrt() * lnln)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::{build_distribution, DistributionSpec};

    #[test]
    fn domain_is_enforced() {
        let d = build_distribution(DistributionSpec::zipf(2.0)).unwrap();
        let nz = normalizer(RegVarProfile::of(&d), 1).unwrap();
        assert!(matches!(nz.b(15.0), Err(Error::NormalizerDomain(_))));
        assert!(nz.b(16.0).is_ok());
    }

    #[test]
    fn theta_half_is_log_limited() {
        // for theta = 1/2 the first branch grows like 1/lnln n, so 1/ln n wins
        let d = build_distribution(DistributionSpec::zipf(2.0)).unwrap();
        let nz = normalizer(RegVarProfile::of(&d), 2).unwrap();
        let n: f64 = 1e6;
        let want = 1.0 / (n.ln() * n.ln().ln());
        assert!((nz.b(n).unwrap() - want).abs() < 1e-15);
    }

    #[test]
    fn theta_one_uses_lstar_only_for_k_one() {
        let p = RegVarProfile::power_law(1.0, 0.5);
        let n: f64 = 1e4;
        let lnln = n.ln().ln();
        let lstar = p.lstar(n).unwrap().value;
        let b1 = normalizer(p, 1).unwrap().b(n).unwrap();
        assert!((b1 - 1.0 / (n * lstar * lnln).sqrt()).abs() < 1e-12 * b1);
        let b2 = normalizer(p, 2).unwrap().b(n).unwrap();
        assert!((b2 - 1.0 / (n * p.l(n) * lnln).sqrt()).abs() < 1e-12 * b2);
    }

    #[test]
    fn decreasing_on_a_grid() {
        for spec in [DistributionSpec::zipf(2.0), DistributionSpec::theta_one_log(), DistributionSpec::geometric(0.5)] {
            let d = build_distribution(spec).unwrap();
            for k in 1..3 {
                let nz = normalizer(RegVarProfile::of(&d), k).unwrap();
                let mut prev = f64::INFINITY;
                let mut n: f64 = 100.0;
                while n <= 1e9 {
                    let b = nz.b(n).unwrap();
                    assert!(b > 0.0 && b < prev, "{:?} k={k} n={n}", d.family());
                    prev = b;
                    n *= 10.0;
                }
            }
        }
    }
}
