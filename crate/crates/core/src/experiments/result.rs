//! Study output: quantile series across seeds and pass/fail checks.

use std::io::Write;

use serde::Serialize;

use crate::error::Result;

pub const SCHEMA_VERSION: u32 = 1;

/// Median and 5%/95% quantiles of one statistic at one checkpoint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Quantiles {
    pub n: f64,
    pub median: f64,
    pub q05: f64,
    pub q95: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Series {
    pub name: String,
    pub points: Vec<Quantiles>,
}

impl Series {
    /// A deterministic series: every quantile is the value itself.
    pub fn exact(name: impl Into<String>, ns: &[f64], values: &[f64]) -> Self {
        Series {
            name: name.into(),
            points: ns
                .iter()
                .zip(values)
                .map(|(&n, &v)| Quantiles {
                    n,
                    median: v,
                    q05: v,
                    q95: v,
                })
                .collect(),
        }
    }

    pub fn medians(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.median).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub threshold: f64,
    /// Distance to the threshold, positive on the passing side.
    pub margin: f64,
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Check {
            name: name.into(),
            passed: value <= threshold,
            value,
            threshold,
            margin: threshold - value,
        }
    }

    pub fn at_least(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Check {
            name: name.into(),
            passed: value >= threshold,
            value,
            threshold,
            margin: value - threshold,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudyResult {
    pub study: String,
    pub series: Vec<Series>,
    pub checks: Vec<Check>,
}

#[derive(Serialize)]
struct CsvRow<'a> {
    study: &'a str,
    series: &'a str,
    n: f64,
    median: f64,
    q05: f64,
    q95: f64,
}

#[derive(Serialize)]
struct Summary<'a> {
    schema_version: u32,
    study: &'a str,
    passed: bool,
    checks: &'a [Check],
}

impl StudyResult {
    pub fn new(study: impl Into<String>) -> Self {
        StudyResult {
            study: study.into(),
            series: Vec::new(),
            checks: Vec::new(),
        }
    }

    /// True when there is at least one check and all pass.
    pub fn passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.passed)
    }

    pub fn series(&self, name: &str) -> Option<&Series> {
        self.series.iter().find(|s| s.name == name)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn merge(&mut self, other: StudyResult) {
        self.series.extend(other.series);
        self.checks.extend(other.checks);
    }

    /// `study,series,n,median,q05,q95`, one row per checkpoint per series.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for s in &self.series {
            for p in &s.points {
                w.serialize(CsvRow {
                    study: &self.study,
                    series: &s.name,
                    n: p.n,
                    median: p.median,
                    q05: p.q05,
                    q95: p.q95,
                })?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn summary_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&Summary {
            schema_version: SCHEMA_VERSION,
            study: &self.study,
            passed: self.passed(),
            checks: &self.checks,
        })?)
    }
}

/// Statistic values of one seed, one per checkpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct SeedRow {
    pub index: u64,
    pub values: Vec<f64>,
}

/// Linear-interpolation quantile of sorted data.
fn quantile(sorted: &[f64], p: f64) -> f64 {
    let h = p * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Per-checkpoint quantiles across seeds. Rows are put in index order first.
pub fn aggregate(name: impl Into<String>, ns: &[f64], rows: &[SeedRow]) -> Series {
    assert!(!rows.is_empty(), "aggregate needs at least one row");
    let mut ordered: Vec<&SeedRow> = rows.iter().collect();
    ordered.sort_by_key(|r| r.index);
    let points = ns
        .iter()
        .enumerate()
        .map(|(i, &n)| {
            let mut col: Vec<f64> = ordered.iter().map(|r| r.values[i]).collect();
            col.sort_by(f64::total_cmp);
            Quantiles {
                n,
                median: quantile(&col, 0.5),
                q05: quantile(&col, 0.05),
                q95: quantile(&col, 0.95),
            }
        })
        .collect();
    Series {
        name: name.into(),
        points,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn single_row_is_its_own_quantiles() {
        let s = aggregate("x", &[1.0, 2.0], &[SeedRow { index: 0, values: vec![3.0, 4.0] }]);
        assert_eq!(s.points[0], Quantiles { n: 1.0, median: 3.0, q05: 3.0, q95: 3.0 });
        assert_eq!(s.points[1].q95, 4.0);
    }

    #[test]
    fn median_of_even_count_interpolates() {
        let rows: Vec<SeedRow> = (0..4).map(|i| SeedRow { index: i, values: vec![i as f64] }).collect();
        assert_eq!(aggregate("x", &[1.0], &rows).points[0].median, 1.5);
    }

    #[test]
    fn summary_has_schema_version() {
        let mut r = StudyResult::new("demo");
        r.checks.push(Check::at_most("c", 1.0, 2.0));
        let v: serde_json::Value = serde_json::from_str(&r.summary_json().unwrap()).unwrap();
        assert_eq!(v["schema_version"], 1);
        assert_eq!(v["passed"], true);
        assert_eq!(v["checks"][0]["margin"], 1.0);
    }

    #[test]
    fn no_checks_is_not_a_pass() {
        assert!(!StudyResult::new("empty").passed());
    }

    proptest! {
        #[test]
        fn quantiles_ordered_and_permutation_invariant(
            values in prop::collection::vec(prop::collection::vec(-1e6f64..1e6, 3), 1..40),
            seed in any::<u64>(),
        ) {
            let rows: Vec<SeedRow> = values.iter().enumerate()
                .map(|(i, v)| SeedRow { index: i as u64, values: v.clone() }).collect();
            let ns = [1.0, 2.0, 3.0];
            let a = aggregate("s", &ns, &rows);
            let mut shuffled = rows.clone();
            // deterministic shuffle driven by the seed
            let len = shuffled.len();
            for i in 0..len {
                let j = (seed.wrapping_mul(i as u64 + 1) % len as u64) as usize;
                shuffled.swap(i, j);
            }
            prop_assert_eq!(&a, &aggregate("s", &ns, &shuffled));
            for p in &a.points {
                prop_assert!(p.q05 <= p.median && p.median <= p.q95);
            }
        }

        #[test]
        fn constant_rows_have_no_spread(c in -10.0f64..10.0, n in 1usize..20) {
            let rows: Vec<SeedRow> = (0..n).map(|i| SeedRow { index: i as u64, values: vec![c] }).collect();
            let p = aggregate("c", &[5.0], &rows).points[0];
            prop_assert_eq!(p.q05, p.q95);
        }
    }
}
