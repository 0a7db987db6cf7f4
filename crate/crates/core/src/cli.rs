//! Command-line front end.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::dist::{build_distribution, DistributionSpec, Family, RegVarProfile};
use crate::error::{Error, Result};
use crate::experiments::{estimate_theta, run_study, ConfigOverrides, ExperimentConfig, Study};
use crate::moments::{moment_report, normalizer, write_reports_csv, Count, Law};
use crate::sim::{run_many, Checkpoint, CheckpointGrid, OccupancySnapshot, Trajectory};

/// Relative output paths resolve against this directory when it is set.
pub const OUT_DIR_ENV: &str = "OCCUPANCY_OUT_DIR";

pub const EXIT_PASS: u8 = 0;
pub const EXIT_FAIL: u8 = 1;
pub const EXIT_ERROR: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "occupancy", version, about = "Occupancy counts of infinite urn schemes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact and asymptotic moments of one count.
    Moments(MomentsArgs),
    /// Simulate coupled trajectories and write them as CSV.
    Simulate(SimulateArgs),
    /// Run a verification study; exits 0 iff every check passes.
    Verify(VerifyArgs),
    /// Estimate theta from a trajectory CSV.
    EstimateTheta(EstimateArgs),
}

#[derive(Debug, Clone, Args)]
pub struct DistArgs {
    #[arg(long, value_parser = parse_family)]
    pub family: Option<Family>,
    #[arg(long)]
    pub s: Option<f64>,
    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long)]
    pub q: Option<f64>,
}

impl DistArgs {
    fn spec(&self) -> Result<DistributionSpec> {
        let family = self
            .family
            .ok_or_else(|| Error::Config("--family is required".into()))?;
        let spec = DistributionSpec {
            family,
            s: self.s,
            a: self.a,
            q: self.q,
            normalization_tolerance: crate::dist::DEFAULT_NORMALIZATION_TOLERANCE,
        };
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LawArg {
    Poisson,
    Binomial,
}

#[derive(Debug, Args)]
pub struct MomentsArgs {
    #[command(flatten)]
    pub dist: DistArgs,
    #[arg(long, value_parser = parse_real)]
    pub t: f64,
    #[arg(long)]
    pub k: u32,
    /// Count cells with at least k balls instead of exactly k.
    #[arg(long)]
    pub star: bool,
    #[arg(long, value_enum, default_value = "poisson")]
    pub law: LawArg,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub dist: DistArgs,
    #[arg(long, value_parser = parse_count, default_value = "100")]
    pub n_min: u64,
    #[arg(long, value_parser = parse_count)]
    pub n_max: u64,
    #[arg(long, default_value_t = 40)]
    pub points: usize,
    #[arg(long, value_parser = parse_count, default_value = "100")]
    pub seeds: u64,
    #[arg(long, default_value_t = crate::sim::DEFAULT_K_MAX)]
    pub k_max: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(value_parser = parse_study)]
    pub study: Study,
    /// Config file, or `default` for the built-in one.
    #[arg(long, default_value = "default")]
    pub config: String,
    #[command(flatten)]
    pub dist: DistArgs,
    #[arg(long, value_parser = parse_count)]
    pub n_min: Option<u64>,
    #[arg(long, value_parser = parse_count)]
    pub n_max: Option<u64>,
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub k: Option<Vec<u32>>,
    #[arg(long, value_parser = parse_count)]
    pub seeds: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Result table (CSV).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON summary; printed to stdout when no path is given.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[arg(long)]
    pub input: PathBuf,
}

fn parse_real(s: &str) -> std::result::Result<f64, String> {
    s.parse::<f64>().map_err(|e| format!("`{s}`: {e}"))
}

/// Accepts `1e7` as well as `10000000`.
fn parse_count(s: &str) -> std::result::Result<u64, String> {
    if let Ok(v) = s.parse::<u64>() {
        return Ok(v);
    }
    let x = parse_real(s)?;
    if x >= 0.0 && x.fract() == 0.0 && x < 1.8e19 {
        Ok(x as u64)
    } else {
        Err(format!("`{s}` is not a nonnegative integer"))
    }
}

fn parse_family(s: &str) -> std::result::Result<Family, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_study(s: &str) -> std::result::Result<Study, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Parses `args` (program name first), runs the command and maps the outcome
/// to an exit status.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_PASS };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::from(EXIT_PASS),
        Ok(false) => ExitCode::from(EXIT_FAIL),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}

/// Runs a parsed command. `Ok(false)` means a study ran and failed a check.
pub fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Moments(a) => moments(a).map(|_| true),
        Command::Simulate(a) => simulate(a).map(|_| true),
        Command::Verify(a) => verify(a),
        Command::EstimateTheta(a) => estimate(a).map(|_| true),
    }
}

fn resolve(path: &Path) -> PathBuf {
    match std::env::var_os(OUT_DIR_ENV) {
        Some(dir) if path.is_relative() => Path::new(&dir).join(path),
        _ => path.to_path_buf(),
    }
}

fn default_output(name: &str) -> Option<PathBuf> {
    std::env::var_os(OUT_DIR_ENV).map(|dir| Path::new(&dir).join(name))
}

/// Writes through a sibling `.partial` file renamed into place on success;
/// nothing is left behind on failure.
fn write_atomically<F>(path: &Path, body: F) -> Result<()>
where
    F: FnOnce(&mut BufWriter<File>) -> Result<()>,
{
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".partial");
    let tmp = PathBuf::from(tmp);
    let outcome = (|| {
        let mut w = BufWriter::new(File::create(&tmp)?);
        body(&mut w)?;
        w.flush()?;
        Ok(())
    })();
    match outcome {
        Ok(()) => {
            fs::rename(&tmp, path)?;
            Ok(())
        }
        Err(e) => {
            let _ = fs::remove_file(&tmp);
            Err(e)
        }
    }
}

fn moments(a: MomentsArgs) -> Result<()> {
    let d = build_distribution(a.dist.spec()?)?;
    let count = if a.star { Count::AtLeast } else { Count::Exactly };
    let law = match a.law {
        LawArg::Poisson => Law::Poisson,
        LawArg::Binomial => Law::Binomial,
    };
    let report = moment_report(&d, a.t, a.k, count, law)?;
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match a.format {
        Format::Csv => write_reports_csv(&[report], &mut out)?,
        Format::Json => {
            serde_json::to_writer_pretty(&mut out, &report)?;
            writeln!(out)?;
        }
    }
    Ok(())
}

/// One line of the trajectory table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub seed: u64,
    pub n: u64,
    #[serde(rename = "K")]
    pub poisson_count: u64,
    pub k: usize,
    pub rstar_fixed: u64,
    pub rstar_poisson: u64,
    pub r_fixed: u64,
    pub r_poisson: u64,
    pub b_n: f64,
    pub scaled_diff: f64,
}

/// Rows for every trajectory, checkpoint and `k = 1..=k_max`, with the
/// scaled gap `b_n |R*_{n,k} - R*_{P(n),k}|`.
pub fn trajectory_rows(
    runs: &[Trajectory],
    profile: RegVarProfile<'_>,
    grid: &CheckpointGrid,
) -> Result<Vec<TrajectoryRow>> {
    let k_max = grid.k_max();
    let mut b = vec![Vec::with_capacity(grid.len()); k_max + 1];
    for (k, bk) in b.iter_mut().enumerate().skip(1) {
        let nz = normalizer(profile, k as u32)?;
        for &n in grid.points() {
            bk.push(if (n as f64) >= crate::moments::MIN_N {
                nz.b(n as f64)?
            } else {
                f64::NAN
            });
        }
    }
    let mut rows = Vec::new();
    for tr in runs {
        for (i, c) in tr.checkpoints.iter().enumerate() {
            for k in 1..=k_max {
                let b_n = b[k][i];
                rows.push(TrajectoryRow {
                    seed: tr.seed,
                    n: c.n,
                    poisson_count: c.poisson_count,
                    k,
                    rstar_fixed: c.fixed.rstar(k),
                    rstar_poisson: c.poissonized.rstar(k),
                    r_fixed: c.fixed.r(k),
                    r_poisson: c.poissonized.r(k),
                    b_n,
                    scaled_diff: b_n * c.rstar_gap(k) as f64,
                });
            }
        }
    }
    Ok(rows)
}

pub fn write_trajectory_csv<W: Write>(rows: &[TrajectoryRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Rebuilds trajectories from table rows, in order of first appearance.
pub fn trajectories_from_rows(rows: &[TrajectoryRow]) -> Result<Vec<Trajectory>> {
    let mut order: Vec<u64> = Vec::new();
    let mut by_seed: BTreeMap<u64, BTreeMap<u64, Vec<&TrajectoryRow>>> = BTreeMap::new();
    for r in rows {
        if !by_seed.contains_key(&r.seed) {
            order.push(r.seed);
        }
        by_seed.entry(r.seed).or_default().entry(r.n).or_default().push(r);
    }
    order
        .into_iter()
        .map(|seed| {
            let checkpoints = by_seed[&seed]
                .iter()
                .map(|(&n, ks)| {
                    let mut ks = ks.clone();
                    ks.sort_by_key(|r| r.k);
                    if ks.iter().enumerate().any(|(i, r)| r.k != i + 1) {
                        return Err(Error::InvalidArgument(format!(
                            "seed {seed}, n {n}: k values must run 1, 2, ..."
                        )));
                    }
                    let snap = |at: fn(&TrajectoryRow) -> u64, ex: fn(&TrajectoryRow) -> u64, balls| {
                        OccupancySnapshot {
                            balls,
                            at_least: ks.iter().map(|r| at(r)).collect(),
                            exactly: ks.iter().map(|r| ex(r)).collect(),
                        }
                    };
                    let k_count = ks[0].poisson_count;
                    Ok(Checkpoint {
                        n,
                        poisson_count: k_count,
                        fixed: snap(|r| r.rstar_fixed, |r| r.r_fixed, n),
                        poissonized: snap(|r| r.rstar_poisson, |r| r.r_poisson, k_count),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(Trajectory { seed, checkpoints })
        })
        .collect()
}

fn simulate(a: SimulateArgs) -> Result<()> {
    let d = build_distribution(a.dist.spec()?)?;
    if a.seeds == 0 {
        return Err(Error::Config("--seeds must be >= 1".into()));
    }
    let grid = CheckpointGrid::log_spaced(a.n_min, a.n_max, a.points, a.k_max)?;
    let runs = run_many(&d, &grid, a.seed, a.seeds);
    let rows = trajectory_rows(&runs, RegVarProfile::of(&d), &grid)?;
    match a.out.map(|p| resolve(&p)).or_else(|| default_output("trajectories.csv")) {
        Some(path) => write_atomically(&path, |w| write_trajectory_csv(&rows, w)),
        None => write_trajectory_csv(&rows, io::stdout().lock()),
    }
}

fn verify(a: VerifyArgs) -> Result<bool> {
    let mut cfg = if a.config == "default" {
        ExperimentConfig::default_for(a.study)
    } else {
        let text = fs::read_to_string(&a.config)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", a.config)))?;
        ExperimentConfig::from_toml(a.study, &text)?
    };
    cfg.apply(ConfigOverrides {
        family: a.dist.family,
        s: a.dist.s,
        a: a.dist.a,
        q: a.dist.q,
        n_min: a.n_min,
        n_max: a.n_max,
        points: a.points,
        k: a.k,
        seeds: a.seeds,
        master_seed: a.seed,
        output_csv: a.out,
        output_json: a.json,
        ..ConfigOverrides::default()
    })?;
    cfg.validate()?;

    let result = run_study(&cfg)?;
    for c in &result.checks {
        eprintln!(
            "{} {}: value {} threshold {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.value,
            c.threshold
        );
    }
    let name = cfg.study.as_str();
    if let Some(path) = cfg
        .output_csv
        .as_deref()
        .map(resolve)
        .or_else(|| default_output(&format!("{name}.csv")))
    {
        write_atomically(&path, |w| result.write_csv(w))?;
    }
    let summary = result.summary_json()?;
    match cfg
        .output_json
        .as_deref()
        .map(resolve)
        .or_else(|| default_output(&format!("{name}.json")))
    {
        Some(path) => write_atomically(&path, |w| Ok(writeln!(w, "{summary}")?))?,
        None => println!("{summary}"),
    }
    Ok(result.passed())
}

fn estimate(a: EstimateArgs) -> Result<()> {
    let mut reader = csv::Reader::from_path(&a.input)?;
    let rows = reader
        .deserialize()
        .collect::<std::result::Result<Vec<TrajectoryRow>, _>>()?;
    let trajectories = trajectories_from_rows(&rows)?;
    if trajectories.is_empty() {
        return Err(Error::InvalidArgument("no trajectories in input".into()));
    }
    let mut w = csv::Writer::from_writer(io::stdout().lock());
    w.write_record(["seed", "n", "theta_hat"])?;
    let mut sum = 0.0;
    for tr in &trajectories {
        let est = estimate_theta(tr)?;
        sum += est;
        let n = tr.checkpoints.last().map_or(0, |c| c.n);
        w.write_record([tr.seed.to_string(), n.to_string(), est.to_string()])?;
    }
    w.flush()?;
    eprintln!("mean theta_hat {} over {} trajectories", sum / trajectories.len() as f64, trajectories.len());
    Ok(())
}
