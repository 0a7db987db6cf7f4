//! Coupled fixed-`n` and Poissonized samples.
//!
//! One i.i.d. stream of cell draws serves both schemes: the fixed sample of
//! size `n_i` is its first `n_i` draws and the Poisson sample is its first
//! `K_i` draws, where `K_1 <= K_2 <= ...` is a Poisson process read at the
//! checkpoints. Every trajectory therefore satisfies
//! `|R*_{n,k} - R*_{K,k}| <= |K - n|`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use statrs::function::gamma::gamma;

use crate::dist::CellDistribution;
use crate::error::{Error, Result};

use super::seed::trajectory_seed;
use super::state::{OccupancySnapshot, OccupancyState};

/// Strictly increasing sample sizes at which both schemes are recorded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckpointGrid {
    points: Vec<u64>,
    k_max: usize,
}

impl CheckpointGrid {
    pub fn new(points: Vec<u64>, k_max: usize) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidGrid("no checkpoints".into()));
        }
        if points[0] == 0 {
            return Err(Error::InvalidGrid("checkpoints start at 1".into()));
        }
        if let Some(w) = points.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::InvalidGrid(format!(
                "checkpoints must increase strictly, got {} then {}",
                w[0], w[1]
            )));
        }
        if k_max == 0 {
            return Err(Error::InvalidGrid("k_max must be >= 1".into()));
        }
        Ok(CheckpointGrid { points, k_max })
    }

    /// About `count` points spaced evenly in `ln n` from `n_min` to `n_max`,
    /// rounded, with duplicates dropped.
    pub fn log_spaced(n_min: u64, n_max: u64, count: usize, k_max: usize) -> Result<Self> {
        if n_min == 0 || n_max < n_min {
            return Err(Error::InvalidGrid(format!("bad range [{n_min}, {n_max}]")));
        }
        if count == 0 {
            return Err(Error::InvalidGrid("no checkpoints".into()));
        }
        let mut points = Vec::with_capacity(count);
        if count == 1 || n_min == n_max {
            points.push(n_max);
        } else {
            let (lo, hi) = ((n_min as f64).ln(), (n_max as f64).ln());
            for i in 0..count {
                let x = (lo + (hi - lo) * i as f64 / (count - 1) as f64).exp().round() as u64;
                let x = x.clamp(n_min, n_max);
                if points.last().is_none_or(|&p| x > p) {
                    points.push(x);
                }
            }
            *points.last_mut().unwrap() = n_max;
        }
        Self::new(points, k_max)
    }

    pub fn points(&self) -> &[u64] {
        &self.points
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// `K_i = P(n_i)` at every checkpoint, built from independent Poisson
/// increments over `(n_{i-1}, n_i]`.
pub fn poisson_increments<R: Rng + ?Sized>(grid: &CheckpointGrid, rng: &mut R) -> Vec<u64> {
    let mut prev = 0u64;
    let mut total = 0u64;
    grid.points
        .iter()
        .map(|&n| {
            let lambda = (n - prev) as f64;
            prev = n;
            let step: f64 = Poisson::new(lambda).expect("positive rate").sample(rng);
            total += step as u64;
            total
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Checkpoint {
    pub n: u64,
    /// `K = P(n)`.
    pub poisson_count: u64,
    pub fixed: OccupancySnapshot,
    pub poissonized: OccupancySnapshot,
}

impl Checkpoint {
    /// `|R*_{n,k} - R*_{P(n),k}|`.
    pub fn rstar_gap(&self, k: usize) -> u64 {
        self.fixed.rstar(k).abs_diff(self.poissonized.rstar(k))
    }

    pub fn r_gap(&self, k: usize) -> u64 {
        self.fixed.r(k).abs_diff(self.poissonized.r(k))
    }

    pub fn count_gap(&self) -> u64 {
        self.n.abs_diff(self.poisson_count)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trajectory {
    pub seed: u64,
    pub checkpoints: Vec<Checkpoint>,
}

/// Rough count of distinct cells after `n` draws, for sizing the count map.
fn expected_cells(d: &CellDistribution, n: u64) -> usize {
    let a = d.alpha(n as f64) as f64;
    let theta = d.theta();
    let guess = if theta == 1.0 {
        a * (n as f64).ln()
    } else if theta > 0.0 {
        a * gamma(1.0 - theta)
    } else {
        a + 1.0
    };
    guess.min(n as f64) as usize
}

/// Streams draws once, snapshotting at each checkpoint `n_i` and each
/// Poisson count `K_i`.
fn stream(d: &CellDistribution, grid: &CheckpointGrid, rng: &mut ChaCha8Rng, counts: &[u64]) -> Vec<Checkpoint> {
    // (position, checkpoint index, is_poisson)
    let mut marks: Vec<(u64, usize, bool)> = Vec::with_capacity(2 * grid.len());
    for (i, (&n, &k)) in grid.points.iter().zip(counts).enumerate() {
        marks.push((n, i, false));
        marks.push((k, i, true));
    }
    marks.sort_unstable();
    let last = marks.last().map_or(0, |m| m.0);

    let mut state = OccupancyState::with_capacity(grid.k_max, expected_cells(d, last));
    let mut fixed = vec![None; grid.len()];
    let mut poissonized = vec![None; grid.len()];
    for (pos, i, is_poisson) in marks {
        while state.ball_count() < pos {
            state.add_draw(d.sample_cell(rng));
        }
        let slot = if is_poisson { &mut poissonized[i] } else { &mut fixed[i] };
        *slot = Some(state.snapshot());
    }
    grid.points
        .iter()
        .zip(counts)
        .zip(fixed.into_iter().zip(poissonized))
        .map(|((&n, &k), (f, p))| Checkpoint {
            n,
            poisson_count: k,
            fixed: f.expect("snapshot taken"),
            poissonized: p.expect("snapshot taken"),
        })
        .collect()
}

/// One coupled trajectory from a ChaCha8 stream seeded with `seed`: first the
/// Poisson counts, then the cell draws.
pub fn run_coupled(d: &CellDistribution, grid: &CheckpointGrid, seed: u64) -> Trajectory {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let counts = poisson_increments(grid, &mut rng);
    Trajectory {
        seed,
        checkpoints: stream(d, grid, &mut rng, &counts),
    }
}

/// As [`run_coupled`] but with the Poisson counts supplied, one per checkpoint.
pub fn run_coupled_with_counts(
    d: &CellDistribution,
    grid: &CheckpointGrid,
    seed: u64,
    counts: &[u64],
) -> Result<Trajectory> {
    if counts.len() != grid.len() {
        return Err(Error::InvalidArgument(format!(
            "{} counts for {} checkpoints",
            counts.len(),
            grid.len()
        )));
    }
    if counts.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidArgument("counts must be nondecreasing".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(Trajectory {
        seed,
        checkpoints: stream(d, grid, &mut rng, counts),
    })
}

/// Trajectories `0..count` of a run, in index order. Trajectory `i` is seeded
/// with `trajectory_seed(master_seed, i)`.
pub fn run_many(d: &CellDistribution, grid: &CheckpointGrid, master_seed: u64, count: u64) -> Vec<Trajectory> {
    (0..count)
        .into_par_iter()
        .map(|i| run_coupled(d, grid, trajectory_seed(master_seed, i)))
        .collect()
}
