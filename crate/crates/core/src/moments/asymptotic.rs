//! Leading-order behaviour of the Poissonized moments as `t -> inf`.
//!
//! For `0 < theta < 1` every moment is a constant times `alpha(t)`. At
//! `theta = 1, k = 1` the constants blow up and the scale becomes `t L*(t)`;
//! at `theta = 0` the counts of cells with exactly `k` balls are `o(alpha)`.

use statrs::function::gamma::gamma;

use crate::dist::{CellDistribution, RegVarProfile};
use crate::error::{Error, Result};

use super::Count;

/// What a moment is asymptotic to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AsymptoticScale {
    /// `c * alpha(t)`.
    Alpha(f64),
    /// `t L*(t)`.
    TLstar,
    /// `alpha(2t) - alpha(t)`.
    AlphaIncrement,
}

impl AsymptoticScale {
    /// The constant in front of `alpha(t)`, if the scale is of that form.
    pub fn coefficient(&self) -> Option<f64> {
        match *self {
            AsymptoticScale::Alpha(c) => Some(c),
            _ => None,
        }
    }

    pub fn evaluate(&self, d: &CellDistribution, t: f64) -> Result<f64> {
        match *self {
            AsymptoticScale::Alpha(c) => Ok(c * d.alpha(t) as f64),
            AsymptoticScale::TLstar => Ok(t * RegVarProfile::of(d).lstar(t)?.value),
            AsymptoticScale::AlphaIncrement => Ok(d.alpha(2.0 * t) as f64 - d.alpha(t) as f64),
        }
    }
}

fn check(theta: f64, k: u32) -> Result<()> {
    if !(0.0..=1.0).contains(&theta) {
        return Err(Error::InvalidArgument(format!("theta must lie in [0, 1], got {theta}")));
    }
    if k == 0 {
        return Err(Error::InvalidArgument("k must be >= 1".into()));
    }
    Ok(())
}

fn factorial(k: u32) -> f64 {
    (1..=k).map(f64::from).product()
}

/// `theta sum_{i >= k} Gamma(i - theta) / i!`, which telescopes to
/// `Gamma(k - theta) / (k - 1)!` for `k >= 2` (and `theta < 1` at `k = 1`).
pub fn star_mean_constant(theta: f64, k: u32) -> f64 {
    gamma(k as f64 - theta) / factorial(k - 1)
}

/// Coefficient of the mean of `R*_{P(t),k}` or `R_{P(t),k}`.
pub fn asym_mean_coeff(theta: f64, k: u32, count: Count) -> Result<AsymptoticScale> {
    check(theta, k)?;
    let scale = match count {
        Count::Exactly if theta == 0.0 => AsymptoticScale::Alpha(0.0),
        Count::Exactly if theta == 1.0 && k == 1 => AsymptoticScale::TLstar,
        Count::Exactly => AsymptoticScale::Alpha(theta * gamma(k as f64 - theta) / factorial(k)),
        Count::AtLeast if theta == 0.0 => AsymptoticScale::Alpha(1.0),
        Count::AtLeast if theta == 1.0 && k == 1 => AsymptoticScale::TLstar,
        Count::AtLeast => AsymptoticScale::Alpha(star_mean_constant(theta, k)),
    };
    Ok(scale)
}

/// Coefficient of the variance of `R*_{P(t),k}` or `R_{P(t),k}`.
pub fn asym_var_coeff(theta: f64, k: u32, count: Count) -> Result<AsymptoticScale> {
    check(theta, k)?;
    if theta == 1.0 && k == 1 {
        return Ok(AsymptoticScale::TLstar);
    }
    if theta == 0.0 {
        return match (count, k) {
            (Count::AtLeast, 1) => Ok(AsymptoticScale::AlphaIncrement),
            _ => Err(Error::NoAsymptotic(format!(
                "no variance constant for theta = 0 and {count:?} k = {k}"
            ))),
        };
    }
    let kf = k as f64;
    let c = match count {
        Count::Exactly => {
            theta / factorial(k)
                * (gamma(kf - theta)
                    - gamma(2.0 * kf - theta) / (2f64.powf(2.0 * kf - theta) * factorial(k)))
        }
        Count::AtLeast if k == 1 => gamma(1.0 - theta) * (2f64.powf(theta) - 1.0),
        Count::AtLeast => {
            let mut cross = 0.0;
            for s in 0..k {
                for m in 0..k {
                    if s + m >= 2 {
                        let i = (s + m) as f64;
                        cross += gamma(i - theta)
                            / (2f64.powf(i - theta) * factorial(s) * factorial(m));
                    }
                }
            }
            2f64.powf(theta) * gamma(2.0 - theta) - star_mean_constant(theta, k) - theta * cross
        }
    };
    Ok(AsymptoticScale::Alpha(c))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coeff(s: AsymptoticScale) -> f64 {
        s.coefficient().unwrap()
    }

    #[test]
    fn theta_half_constants() {
        let pi = std::f64::consts::PI;
        // Gamma(1/2) = sqrt(pi)
        let m1 = coeff(asym_mean_coeff(0.5, 1, Count::AtLeast).unwrap());
        assert!((m1 - pi.sqrt()).abs() < 1e-14);
        let r1 = coeff(asym_mean_coeff(0.5, 1, Count::Exactly).unwrap());
        assert!((r1 - 0.5 * pi.sqrt()).abs() < 1e-14);
        let v1 = coeff(asym_var_coeff(0.5, 1, Count::AtLeast).unwrap());
        assert!((v1 - pi.sqrt() * (2f64.sqrt() - 1.0)).abs() < 1e-14);
    }

    #[test]
    fn theta_one_star_constants() {
        for (k, want) in [(2, 0.5), (3, 0.1875)] {
            let v = coeff(asym_var_coeff(1.0, k, Count::AtLeast).unwrap());
            assert!((v - want).abs() < 1e-14, "k {k}: {v}");
        }
        assert_eq!(coeff(asym_mean_coeff(1.0, 3, Count::AtLeast).unwrap()), 0.5);
    }

    #[test]
    fn regime_flags() {
        assert_eq!(asym_mean_coeff(1.0, 1, Count::AtLeast).unwrap(), AsymptoticScale::TLstar);
        assert_eq!(asym_var_coeff(1.0, 1, Count::Exactly).unwrap(), AsymptoticScale::TLstar);
        assert_eq!(asym_var_coeff(0.0, 1, Count::AtLeast).unwrap(), AsymptoticScale::AlphaIncrement);
        assert_eq!(asym_mean_coeff(0.0, 2, Count::Exactly).unwrap(), AsymptoticScale::Alpha(0.0));
        assert!(matches!(asym_var_coeff(0.0, 2, Count::Exactly), Err(Error::NoAsymptotic(_))));
        assert!(asym_mean_coeff(1.5, 1, Count::AtLeast).is_err());
        assert!(asym_mean_coeff(0.5, 0, Count::AtLeast).is_err());
    }

    // Oracle: partial sums of the exactly-i constants, ratio by ratio, closed
    // with the integral of the power-law tail.
    fn star_sum_oracle(theta: f64, k: u32) -> f64 {
        let terms = 10_000_000u64;
        let mut term = theta * gamma(k as f64 - theta) / factorial(k);
        let mut sum = 0.0;
        let mut i = k as f64;
        for _ in 0..terms {
            sum += term;
            term *= (i - theta) / (i + 1.0);
            i += 1.0;
        }
        // term is now the first omitted one, at index i ~ term (i/x)^{1+theta}
        sum + term * i / theta + term / 2.0
    }

    #[test]
    fn star_constant_equals_sum_of_exact_constants() {
        for &theta in &[0.3, 0.5, 0.8] {
            for k in 1..4 {
                let got = star_mean_constant(theta, k);
                let want = star_sum_oracle(theta, k);
                assert!((got - want).abs() < 1e-8, "theta {theta} k {k}: {got} vs {want}");
            }
        }
    }
}
