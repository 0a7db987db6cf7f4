//! Tabulated exact and asymptotic moments.

use std::io::Write;

use serde::Serialize;

use crate::dist::CellDistribution;
use crate::error::{Error, Result};

use super::{asym_mean_coeff, asym_var_coeff, exact_mean, exact_var, Count, Law};

/// One row of `exact_mean`, `exact_var` and their leading-order
/// approximations. `exact_var` is always the Poisson variance; the mean
/// follows `law`. Asymptotic columns are `None` where no constant exists.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentReport {
    pub t: f64,
    pub k: u32,
    pub star: bool,
    pub law: Law,
    pub exact_mean: f64,
    pub exact_var: f64,
    pub asym_mean: Option<f64>,
    pub asym_var: Option<f64>,
    pub trunc_err: f64,
}

pub fn moment_report(d: &CellDistribution, t: f64, k: u32, count: Count, law: Law) -> Result<MomentReport> {
    let mean = exact_mean(d, t, k, count, law)?;
    let var = exact_var(d, t, k, count)?;
    let theta = d.theta();
    let asym = |scale: Result<_>| -> Result<Option<f64>> {
        match scale {
            Ok(s) => {
                let s: super::AsymptoticScale = s;
                if t < 1.0 {
                    return Ok(None);
                }
                Ok(Some(s.evaluate(d, t)?))
            }
            Err(Error::NoAsymptotic(_)) => Ok(None),
            Err(e) => Err(e),
        }
    };
    Ok(MomentReport {
        t,
        k,
        star: count.is_star(),
        law,
        exact_mean: mean.value,
        exact_var: var.value,
        asym_mean: asym(asym_mean_coeff(theta, k, count))?,
        asym_var: asym(asym_var_coeff(theta, k, count))?,
        trunc_err: mean.truncation_error.max(var.truncation_error),
    })
}

#[derive(Serialize)]
struct CsvRow {
    t: f64,
    k: u32,
    star: bool,
    exact_mean: f64,
    exact_var: f64,
    asym_mean: Option<f64>,
    asym_var: Option<f64>,
    trunc_err: f64,
}

/// Writes `t,k,star,exact_mean,exact_var,asym_mean,asym_var,trunc_err`;
/// missing asymptotic values are empty fields.
pub fn write_reports_csv<W: Write>(reports: &[MomentReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in reports {
        w.serialize(CsvRow {
            t: r.t,
            k: r.k,
            star: r.star,
            exact_mean: r.exact_mean,
            exact_var: r.exact_var,
            asym_mean: r.asym_mean,
            asym_var: r.asym_var,
            trunc_err: r.trunc_err,
        })?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::{build_distribution, DistributionSpec};

    #[test]
    fn csv_leaves_missing_asymptotics_empty() {
        let d = build_distribution(DistributionSpec::geometric(0.5)).unwrap();
        let r = moment_report(&d, 100.0, 2, Count::Exactly, Law::Poisson).unwrap();
        assert!(r.asym_var.is_none());
        let mut buf = Vec::new();
        write_reports_csv(&[r], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "t,k,star,exact_mean,exact_var,asym_mean,asym_var,trunc_err"
        );
        let fields: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(fields[6], "");
    }
}
