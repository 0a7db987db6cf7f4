use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use crate::dist::{build_distribution, CellDistribution, RegVarProfile};
use crate::error::{Error, Result};
use crate::moments::{
    asym_mean_coeff, exact_mean, exact_var, lemma2_check, lemma5_check, normalizer, Count, Law,
};
use crate::sim::{run_many, trajectory_seed, CheckpointGrid, Trajectory};

use super::config::{ExperimentConfig, Study};
use super::result::{aggregate, Check, SeedRow, Series, StudyResult};

pub fn run_study(cfg: &ExperimentConfig) -> Result<StudyResult> {
    cfg.validate()?;
    match cfg.study {
        Study::Theorem1 => study_theorem1(cfg),
        Study::Corollary1 => study_corollary1(cfg),
        Study::Lemma2 => study_lemma2(cfg),
        Study::Lemma5 => study_lemma5(cfg),
        Study::Prop1 => study_prop1(cfg),
        Study::Remark1 => study_moment_convergence(cfg),
    }
}

fn grid_of(cfg: &ExperimentConfig) -> Result<CheckpointGrid> {
    CheckpointGrid::log_spaced(cfg.n_min, cfg.n_max, cfg.points, cfg.k_max)
}

fn as_f64(points: &[u64]) -> Vec<f64> {
    points.iter().map(|&n| n as f64).collect()
}

/// `b(n_i) |R*_{n_i,k} - R*_{P(n_i),k}|` along one trajectory.
pub fn scaled_gaps(tr: &Trajectory, k: usize, b: &[f64]) -> Vec<f64> {
    tr.checkpoints
        .iter()
        .zip(b)
        .map(|(c, &b)| b * c.rstar_gap(k) as f64)
        .collect()
}

/// Checkpoints where `|R*_{n,k} - R*_{P(n),k}| > |P(n) - n|` for some
/// `k <= k_max`.
pub fn coupling_violations(runs: &[Trajectory], k_max: usize) -> u64 {
    runs.iter()
        .flat_map(|tr| &tr.checkpoints)
        .map(|c| (1..=k_max).filter(|&k| c.rstar_gap(k) > c.count_gap()).count() as u64)
        .sum()
}

/// Decay of the scaled gap between fixed-`n` and Poissonized `R*_{n,k}`.
pub fn study_theorem1(cfg: &ExperimentConfig) -> Result<StudyResult> {
    let d = build_distribution(cfg.distribution.clone())?;
    let grid = grid_of(cfg)?;
    let runs = run_many(&d, &grid, cfg.master_seed, cfg.seeds);
    theorem1_from_runs(cfg, &d, &grid, &runs)
}

/// The theorem1 statistics for trajectories already simulated on `grid`.
pub fn theorem1_from_runs(
    cfg: &ExperimentConfig,
    d: &CellDistribution,
    grid: &CheckpointGrid,
    runs: &[Trajectory],
) -> Result<StudyResult> {
    let ns = as_f64(grid.points());
    let tol = &cfg.tolerances;
    let mut out = StudyResult::new(Study::Theorem1.as_str());
    for &k in &cfg.k {
        let nz = normalizer(RegVarProfile::of(d), k)?;
        let b = ns.iter().map(|&n| nz.b(n)).collect::<Result<Vec<_>>>()?;
        let rows: Vec<SeedRow> = runs
            .iter()
            .enumerate()
            .map(|(i, tr)| SeedRow {
                index: i as u64,
                values: scaled_gaps(tr, k as usize, &b),
            })
            .collect();
        let series = aggregate(format!("scaled_gap_k{k}"), &ns, &rows);
        let med = series.medians();
        let (first, last) = (med[0], med[med.len() - 1]);
        out.checks.push(Check::at_most(
            format!("decay_k{k}"),
            last,
            tol.decay_factor * first,
        ));
        out.checks.push(Check::at_most(
            format!("absolute_k{k}"),
            last,
            tol.absolute_threshold,
        ));
        out.series.push(series);

        // the a.s. bound |K - n| b(n), for reference
        let bound_rows: Vec<SeedRow> = runs
            .iter()
            .enumerate()
            .map(|(i, tr)| SeedRow {
                index: i as u64,
                values: tr
                    .checkpoints
                    .iter()
                    .zip(&b)
                    .map(|(c, &b)| b * c.count_gap() as f64)
                    .collect(),
            })
            .collect();
        out.series
            .push(aggregate(format!("coupling_bound_k{k}"), &ns, &bound_rows));
    }
    out.checks.push(Check::at_most(
        "coupling_bound_violations",
        coupling_violations(runs, grid.k_max()) as f64,
        0.0,
    ));
    Ok(out)
}

/// Normalized deviations of the fixed-`n` counts from their exact means.
pub fn study_corollary1(cfg: &ExperimentConfig) -> Result<StudyResult> {
    let d = build_distribution(cfg.distribution.clone())?;
    if d.theta() == 0.0 {
        return Err(Error::Precondition(
            "needs theta > 0: for theta = 0 the mean counts grow no faster than ln n".into(),
        ));
    }
    let grid = grid_of(cfg)?;
    let runs = run_many(&d, &grid, cfg.master_seed, cfg.seeds);
    let tol = &cfg.tolerances;
    let kept: Vec<usize> = (0..grid.len())
        .filter(|&i| grid.points()[i] >= tol.n_floor)
        .collect();
    if kept.is_empty() {
        return Err(Error::Config(format!("no checkpoint at or above n_floor {}", tol.n_floor)));
    }
    let ns: Vec<f64> = kept.iter().map(|&i| grid.points()[i] as f64).collect();

    let mut out = StudyResult::new(Study::Corollary1.as_str());
    for &k in &cfg.k {
        for count in [Count::AtLeast, Count::Exactly] {
            let tag = if count.is_star() { "star" } else { "plain" };
            let mut centre = Vec::with_capacity(ns.len());
            let mut scale = Vec::with_capacity(ns.len());
            for &n in &ns {
                centre.push(exact_mean(&d, n, k, count, Law::Binomial)?.value);
                let var = exact_var(&d, n, k, count)?.value;
                scale.push((2.0 * var * n.ln()).sqrt());
            }
            let rows: Vec<SeedRow> = runs
                .iter()
                .enumerate()
                .map(|(s, tr)| SeedRow {
                    index: s as u64,
                    values: kept
                        .iter()
                        .enumerate()
                        .map(|(j, &i)| {
                            let snap = &tr.checkpoints[i].fixed;
                            let r = match count {
                                Count::AtLeast => snap.rstar(k as usize),
                                Count::Exactly => snap.r(k as usize),
                            };
                            (r as f64 - centre[j]).abs() / scale[j]
                        })
                        .collect(),
                })
                .collect();
            let within = rows
                .iter()
                .filter(|r| r.values.iter().cloned().fold(0.0, f64::max) <= 1.0 + tol.slack)
                .count();
            out.checks.push(Check::at_least(
                format!("{tag}_k{k}_pass_rate"),
                within as f64 / rows.len() as f64,
                tol.pass_rate,
            ));
            out.series
                .push(aggregate(format!("normalized_deviation_{tag}_k{k}"), &ns, &rows));
        }
    }
    Ok(out)
}

/// `max_w |(P(t + w) - P(t)) / w - 1|` over `w = v, 2v, 4v, ...` below `t`,
/// plus `w = t`, with `v = t^exponent`. `increment(from, to)` supplies
/// `P(t + to) - P(t + from)`.
pub fn sup_deviation<F: FnMut(f64, f64) -> f64>(t: f64, exponent: f64, mut increment: F) -> f64 {
    let v = t.powf(exponent);
    let mut widths = Vec::new();
    let mut w = v;
    while w < t {
        widths.push(w);
        w *= 2.0;
    }
    widths.push(t);
    let mut total = 0.0;
    let mut prev = 0.0;
    let mut worst: f64 = 0.0;
    for w in widths {
        total += increment(prev, w);
        prev = w;
        worst = worst.max((total / w - 1.0).abs());
    }
    worst
}

/// Ratio of Poisson-process increments to their length over long windows.
pub fn study_prop1(cfg: &ExperimentConfig) -> Result<StudyResult> {
    let tol = &cfg.tolerances;
    let times = &tol.prop1_times;
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(times.len());
    for (ti, &t) in times.iter().enumerate() {
        let stream = trajectory_seed(cfg.master_seed, ti as u64);
        let col = (0..cfg.seeds)
            .map(|s| {
                let mut rng = ChaCha8Rng::seed_from_u64(trajectory_seed(stream, s));
                sup_deviation(t, tol.prop1_exponent, |from, to| {
                    Poisson::new(to - from).expect("positive width").sample(&mut rng)
                })
            })
            .collect();
        cols.push(col);
    }
    let rows: Vec<SeedRow> = (0..cfg.seeds as usize)
        .map(|s| SeedRow {
            index: s as u64,
            values: cols.iter().map(|c| c[s]).collect(),
        })
        .collect();
    let series = aggregate("sup_deviation", times, &rows);
    let med = series.medians();
    let mut out = StudyResult::new(Study::Prop1.as_str());
    // largest ratio of consecutive medians; decreasing means below 1
    let worst_step = med
        .windows(2)
        .map(|w| w[1] / w[0])
        .fold(0.0, f64::max);
    let mut decreasing = Check::at_most("medians_decreasing", worst_step, 1.0);
    decreasing.passed = med.windows(2).all(|w| w[1] < w[0]);
    out.checks.push(decreasing);
    out.checks.push(Check::at_most(
        "final_median",
        *med.last().unwrap(),
        tol.prop1_threshold,
    ));
    out.series.push(series);
    Ok(out)
}

/// Fixed-`n` minus Poissonized exact means, and exact over asymptotic means.
pub fn study_moment_convergence(cfg: &ExperimentConfig) -> Result<StudyResult> {
    let d = build_distribution(cfg.distribution.clone())?;
    let grid = CheckpointGrid::log_spaced(cfg.n_min, cfg.n_max, cfg.points, cfg.k_max)?;
    let ns = as_f64(grid.points());
    let tol = &cfg.tolerances;
    let mut out = StudyResult::new(Study::Remark1.as_str());

    let mut targets = vec![(1, Count::AtLeast)];
    for &k in &cfg.k {
        targets.push((k, Count::Exactly));
        if k >= 2 {
            targets.push((k, Count::AtLeast));
        }
    }
    for &(k, count) in &targets {
        let name = match count {
            Count::AtLeast => format!("mean_gap_at_least_k{k}"),
            Count::Exactly => format!("mean_gap_exactly_k{k}"),
        };
        let mut gaps = Vec::with_capacity(ns.len());
        let mut errs = Vec::with_capacity(ns.len());
        for &n in &ns {
            let fixed = exact_mean(&d, n, k, count, Law::Binomial)?;
            let pois = exact_mean(&d, n, k, count, Law::Poisson)?;
            gaps.push((fixed.value - pois.value).abs());
            errs.push(fixed.truncation_error + pois.truncation_error);
        }
        let idx: Vec<usize> = (0..ns.len()).filter(|&i| ns[i] >= tol.n_floor as f64).collect();
        if let (Some(&first), Some(&last)) = (idx.first(), idx.last()) {
            // largest increase between consecutive checkpoints beyond the error bars
            let rise = idx
                .windows(2)
                .map(|w| gaps[w[1]] - gaps[w[0]] - errs[w[1]] - errs[w[0]])
                .fold(f64::NEG_INFINITY, f64::max)
                .max(0.0);
            out.checks.push(Check::at_most(format!("{name}_nonincreasing"), rise, 0.0));
            out.checks.push(Check::at_most(
                format!("{name}_decay"),
                gaps[last],
                tol.moment_decay * gaps[first],
            ));
        }
        out.series.push(Series::exact(name, &ns, &gaps));
    }

    // exact over leading-order means
    let theta = d.theta();
    let mut ratio_targets = vec![(1, Count::AtLeast)];
    ratio_targets.extend(cfg.k.iter().map(|&k| (k, Count::Exactly)));
    for (k, count) in ratio_targets {
        let scale = asym_mean_coeff(theta, k, count)?;
        let tag = if count.is_star() { "at_least" } else { "exactly" };
        let name = format!("mean_ratio_{tag}_k{k}");
        if scale.coefficient() == Some(0.0) {
            // o(alpha): exact mean over alpha should fall
            let vals = ns
                .iter()
                .map(|&n| Ok(exact_mean(&d, n, k, count, Law::Poisson)?.value / d.alpha(n) as f64))
                .collect::<Result<Vec<f64>>>()?;
            out.checks.push(Check::at_most(
                format!("{name}_falls"),
                *vals.last().unwrap(),
                vals[0],
            ));
            out.series.push(Series::exact(name, &ns, &vals));
            continue;
        }
        let vals = ns
            .iter()
            .map(|&n| Ok(exact_mean(&d, n, k, count, Law::Poisson)?.value / scale.evaluate(&d, n)?))
            .collect::<Result<Vec<f64>>>()?;
        let top = *vals.last().unwrap();
        out.checks.push(Check::at_most(
            format!("{name}_band"),
            (top - 1.0).abs(),
            tol.ratio_band,
        ));
        out.series.push(Series::exact(name, &ns, &vals));
    }
    Ok(out)
}

/// Names of the `t_n` choices for the mean-continuity inequality.
pub const LEMMA2_WINDOWS: [&str; 3] = ["sqrt", "pow06", "n_over_ln"];

/// `t_n` for window `i` of [`LEMMA2_WINDOWS`]: `sqrt(n)`, `n^0.6`, `n / ln n`.
pub fn lemma2_window(i: usize, n: f64) -> f64 {
    match i {
        0 => n.sqrt(),
        1 => n.powf(0.6),
        _ => n / n.ln(),
    }
}

/// Mean continuity: `|E R*_{P(n+t)} - E R*_{P(n)}| <= (2|t|/n) E R*_{P(n)}`.
pub fn study_lemma2(cfg: &ExperimentConfig) -> Result<StudyResult> {
    let d = build_distribution(cfg.distribution.clone())?;
    let grid = CheckpointGrid::log_spaced(cfg.n_min, cfg.n_max, cfg.points, cfg.k_max)?;
    let ns: Vec<f64> = as_f64(grid.points())
        .into_iter()
        .filter(|&n| n >= cfg.tolerances.n_floor as f64)
        .collect();
    let mut out = StudyResult::new(Study::Lemma2.as_str());
    let mut violations = 0u64;
    for &k in &cfg.k {
        for (w, label) in LEMMA2_WINDOWS.iter().enumerate() {
            for sign in [1.0, -1.0] {
                let mut ratios = Vec::with_capacity(ns.len());
                for &n in &ns {
                    let t = sign * lemma2_window(w, n);
                    let c = lemma2_check(&d, n, t, k)?;
                    violations += u64::from(!c.holds);
                    ratios.push(c.lhs / c.rhs);
                }
                let dir = if sign > 0.0 { "plus" } else { "minus" };
                out.series
                    .push(Series::exact(format!("lhs_over_rhs_k{k}_{label}_{dir}"), &ns, &ratios));
            }
        }
    }
    out.checks.push(Check::at_most("violations", violations as f64, 0.0));
    Ok(out)
}

/// The variance sandwich `2^-k E R_{P(2n),k} <= B*_{n,k} <= k E R_{P(n),k}`
/// and `B_{n,k} < E R_{P(n),k}`.
pub fn study_lemma5(cfg: &ExperimentConfig) -> Result<StudyResult> {
    let d = build_distribution(cfg.distribution.clone())?;
    let grid = CheckpointGrid::log_spaced(cfg.n_min, cfg.n_max, cfg.points, cfg.k_max)?;
    let ns = as_f64(grid.points());
    let mut out = StudyResult::new(Study::Lemma5.as_str());
    let mut violations = 0u64;
    for &k in &cfg.k {
        let mut lower = Vec::new();
        let mut upper = Vec::new();
        let mut strict = Vec::new();
        for &n in &ns {
            let c = lemma5_check(&d, n, k)?;
            violations += u64::from(!c.holds());
            lower.push(c.lower_margin / c.b_star);
            upper.push(c.upper_margin / c.b_star);
            strict.push(c.strict_margin / c.mean);
        }
        out.series.push(Series::exact(format!("lower_margin_rel_k{k}"), &ns, &lower));
        out.series.push(Series::exact(format!("upper_margin_rel_k{k}"), &ns, &upper));
        out.series.push(Series::exact(format!("strict_margin_rel_k{k}"), &ns, &strict));
    }
    out.checks.push(Check::at_most("violations", violations as f64, 0.0));
    Ok(out)
}

/// Both moment inequalities on one configuration.
pub fn study_inequalities(cfg: &ExperimentConfig) -> Result<StudyResult> {
    let mut out = study_lemma2(cfg)?;
    let five = study_lemma5(cfg)?;
    out.study = "inequalities".into();
    for c in &mut out.checks {
        c.name = format!("lemma2_{}", c.name);
    }
    let mut five_checks = five.checks;
    for c in &mut five_checks {
        c.name = format!("lemma5_{}", c.name);
    }
    out.series.extend(five.series);
    out.checks.extend(five_checks);
    Ok(out)
}

/// `ln R*_{n,1} / ln n` at the last checkpoint of the fixed-`n` sample.
pub fn estimate_theta(tr: &Trajectory) -> Result<f64> {
    let last = tr
        .checkpoints
        .last()
        .ok_or_else(|| Error::InvalidArgument("empty trajectory".into()))?;
    if last.n < 100 {
        return Err(Error::InvalidArgument(format!(
            "final checkpoint n = {} is below 100",
            last.n
        )));
    }
    Ok((last.fixed.rstar(1) as f64).ln() / (last.n as f64).ln())
}
