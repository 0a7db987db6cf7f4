//! Study configuration: built-in defaults per study, overridable from a flat
//! TOML file and then from command-line flags.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dist::{DistributionSpec, Family};
use crate::error::{Error, Result};
use crate::sim::DEFAULT_K_MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Study {
    Theorem1,
    Corollary1,
    Lemma2,
    Lemma5,
    Prop1,
    Remark1,
}

impl Study {
    pub const ALL: [Study; 6] = [
        Study::Theorem1,
        Study::Corollary1,
        Study::Lemma2,
        Study::Lemma5,
        Study::Prop1,
        Study::Remark1,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Study::Theorem1 => "theorem1",
            Study::Corollary1 => "corollary1",
            Study::Lemma2 => "lemma2",
            Study::Lemma5 => "lemma5",
            Study::Prop1 => "prop1",
            Study::Remark1 => "remark1",
        }
    }
}

impl fmt::Display for Study {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Study {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Study::ALL
            .into_iter()
            .find(|st| st.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown study `{s}`")))
    }
}

/// Pass thresholds. Each study reads the ones it needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Largest allowed ratio of the final to the initial median.
    pub decay_factor: f64,
    /// Largest allowed final median of the scaled gap.
    pub absolute_threshold: f64,
    /// Allowed excess of the normalized deviation over 1.
    pub slack: f64,
    /// Fraction of seeds that must stay within `1 + slack`.
    pub pass_rate: f64,
    /// Checkpoints below this are ignored by the checks.
    pub n_floor: u64,
    pub prop1_exponent: f64,
    pub prop1_times: Vec<f64>,
    pub prop1_threshold: f64,
    /// Largest allowed ratio of the final to the initial moment gap.
    pub moment_decay: f64,
    /// Exact over asymptotic mean must lie within `1 +- ratio_band` at `n_max`.
    pub ratio_band: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            decay_factor: 0.5,
            absolute_threshold: 0.5,
            slack: 0.1,
            pass_rate: 0.95,
            n_floor: 1000,
            prop1_exponent: 0.6,
            prop1_times: vec![1e4, 1e6, 1e8],
            prop1_threshold: 0.05,
            moment_decay: 0.1,
            ratio_band: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub study: Study,
    pub distribution: DistributionSpec,
    pub n_min: u64,
    pub n_max: u64,
    /// Number of log-spaced checkpoints.
    pub points: usize,
    pub k: Vec<u32>,
    pub seeds: u64,
    pub master_seed: u64,
    pub k_max: usize,
    pub tolerances: Tolerances,
    pub output_csv: Option<PathBuf>,
    pub output_json: Option<PathBuf>,
}

impl ExperimentConfig {
    /// The built-in configuration of a study.
    pub fn default_for(study: Study) -> Self {
        let (n_min, n_max, points, k) = match study {
            Study::Theorem1 => (10_000, 10_000_000, 13, vec![1, 2]),
            Study::Corollary1 => (1000, 1_000_000, 31, vec![1, 2]),
            Study::Lemma2 => (1000, 10_000_000, 17, vec![1, 2, 3]),
            Study::Lemma5 => (100, 1_000_000, 17, vec![1, 2, 3]),
            Study::Prop1 => (10_000, 100_000_000, 3, vec![1]),
            Study::Remark1 => (1000, 10_000_000, 17, vec![1, 2, 3]),
        };
        ExperimentConfig {
            study,
            distribution: DistributionSpec::zipf(2.0),
            n_min,
            n_max,
            points,
            k,
            seeds: 100,
            master_seed: 1,
            k_max: DEFAULT_K_MAX,
            tolerances: Tolerances::default(),
            output_csv: None,
            output_json: None,
        }
    }

    /// Defaults for `study` with the overrides in `text` applied.
    pub fn from_toml(study: Study, text: &str) -> Result<Self> {
        let file: ConfigOverrides = toml::from_str(text)?;
        let mut cfg = Self::default_for(study);
        cfg.apply(file)?;
        Ok(cfg)
    }

    pub fn apply(&mut self, o: ConfigOverrides) -> Result<()> {
        if let Some(study) = o.study {
            if study != self.study {
                return Err(Error::Config(format!(
                    "config is for study {study}, running {}",
                    self.study
                )));
            }
        }
        if let Some(family) = o.family {
            if family != self.distribution.family {
                self.distribution = DistributionSpec {
                    family,
                    s: None,
                    a: None,
                    q: None,
                    normalization_tolerance: self.distribution.normalization_tolerance,
                };
            }
        }
        let d = &mut self.distribution;
        d.s = o.s.or(d.s);
        d.a = o.a.or(d.a);
        d.q = o.q.or(d.q);
        if let Some(t) = o.normalization_tolerance {
            d.normalization_tolerance = t;
        }
        macro_rules! set {
            ($($field:ident),*) => { $( if let Some(v) = o.$field { self.$field = v; } )* };
        }
        set!(n_min, n_max, points, k, seeds, master_seed, k_max);
        let t = &mut self.tolerances;
        macro_rules! set_tol {
            ($($field:ident),*) => { $( if let Some(v) = o.$field { t.$field = v; } )* };
        }
        set_tol!(
            decay_factor,
            absolute_threshold,
            slack,
            pass_rate,
            n_floor,
            prop1_exponent,
            prop1_times,
            prop1_threshold,
            moment_decay,
            ratio_band
        );
        if o.output_csv.is_some() {
            self.output_csv = o.output_csv;
        }
        if o.output_json.is_some() {
            self.output_json = o.output_json;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        self.distribution
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        if self.n_min < 16 {
            return bad(format!("n_min must be >= 16, got {}", self.n_min));
        }
        if self.n_max < self.n_min {
            return bad(format!("n_max {} is below n_min {}", self.n_max, self.n_min));
        }
        if self.points == 0 {
            return bad("points must be >= 1".into());
        }
        if self.seeds == 0 {
            return bad("seeds must be >= 1".into());
        }
        if self.k.is_empty() || self.k.contains(&0) {
            return bad("k must list values >= 1".into());
        }
        let k_top = *self.k.iter().max().unwrap() as usize;
        if self.k_max < k_top {
            return bad(format!("k_max {} is below the largest k {k_top}", self.k_max));
        }
        let t = &self.tolerances;
        for (name, v) in [
            ("decay_factor", t.decay_factor),
            ("absolute_threshold", t.absolute_threshold),
            ("slack", t.slack),
            ("pass_rate", t.pass_rate),
            ("prop1_exponent", t.prop1_exponent),
            ("prop1_threshold", t.prop1_threshold),
            ("moment_decay", t.moment_decay),
            ("ratio_band", t.ratio_band),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("{name} must be positive, got {v}"));
            }
        }
        if t.pass_rate > 1.0 {
            return bad(format!("pass_rate must be <= 1, got {}", t.pass_rate));
        }
        if t.prop1_times.is_empty() || t.prop1_times.iter().any(|&x| !(x >= 1.0 && x.is_finite())) {
            return bad("prop1_times must be a nonempty list of values >= 1".into());
        }
        Ok(())
    }

    pub fn family(&self) -> Family {
        self.distribution.family
    }
}

/// Keys accepted in a config file; every one optional.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigOverrides {
    pub study: Option<Study>,
    pub family: Option<Family>,
    pub s: Option<f64>,
    pub a: Option<f64>,
    pub q: Option<f64>,
    pub normalization_tolerance: Option<f64>,
    pub n_min: Option<u64>,
    pub n_max: Option<u64>,
    pub points: Option<usize>,
    pub k: Option<Vec<u32>>,
    pub seeds: Option<u64>,
    pub master_seed: Option<u64>,
    pub k_max: Option<usize>,
    pub decay_factor: Option<f64>,
    pub absolute_threshold: Option<f64>,
    pub slack: Option<f64>,
    pub pass_rate: Option<f64>,
    pub n_floor: Option<u64>,
    pub prop1_exponent: Option<f64>,
    pub prop1_times: Option<Vec<f64>>,
    pub prop1_threshold: Option<f64>,
    pub moment_decay: Option<f64>,
    pub ratio_band: Option<f64>,
    pub output_csv: Option<PathBuf>,
    pub output_json: Option<PathBuf>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        for study in Study::ALL {
            ExperimentConfig::default_for(study).validate().unwrap();
            assert_eq!(study.as_str().parse::<Study>().unwrap(), study);
        }
    }

    #[test]
    fn file_overrides_defaults() {
        let text = r#"
family = "theta_one_log"
n_max = 100000
k = [1]
decay_factor = 0.7
"#;
        let cfg = ExperimentConfig::from_toml(Study::Theorem1, text).unwrap();
        assert_eq!(cfg.distribution, DistributionSpec::theta_one_log());
        assert_eq!(cfg.n_max, 100_000);
        assert_eq!(cfg.n_min, 10_000);
        assert_eq!(cfg.k, vec![1]);
        assert_eq!(cfg.tolerances.decay_factor, 0.7);
        cfg.validate().unwrap();
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(ExperimentConfig::from_toml(Study::Lemma2, "bogus = 3").is_err());
        assert!(ExperimentConfig::from_toml(Study::Lemma2, "study = \"prop1\"").is_err());
        for text in ["n_min = 10", "seeds = 0", "k = []", "slack = 0.0", "k = [7]", "pass_rate = 1.5"] {
            let cfg = ExperimentConfig::from_toml(Study::Corollary1, text).unwrap();
            assert!(cfg.validate().is_err(), "{text}");
        }
    }
}
