//! Exact and asymptotic moments of the occupancy counts.

mod asymptotic;
mod checks;
mod normalizer;
mod report;
mod series;
mod tails;

pub use asymptotic::{asym_mean_coeff, asym_var_coeff, star_mean_constant, AsymptoticScale};
pub use checks::{lemma2_check, lemma5_check, Lemma2Check, Lemma5Check};
pub use normalizer::{normalizer, Normalizer, MIN_N};
pub use report::{moment_report, write_reports_csv, MomentReport};
pub use series::{exact_mean, exact_var, Count, Law, SeriesValue};
pub use tails::{
    binom_pmf, binom_split, binom_tail_ge, ln_choose, poisson_cdf_lt, poisson_pmf, poisson_split,
    poisson_tail_ge,
};
