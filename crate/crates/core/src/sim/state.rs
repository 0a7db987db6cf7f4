use rustc_hash::FxHashMap;

use crate::dist::CellDraw;

pub const DEFAULT_K_MAX: usize = 5;

/// Cells below this index are counted in a flat array.
const DENSE_CELLS: usize = 1 << 16;

/// Occupancy counts of one growing sample, with `R*_k` (cells holding at
/// least `k` balls) kept current for `k = 1..=k_max + 1`.
#[derive(Debug, Clone)]
pub struct OccupancyState {
    dense: Vec<u32>,
    sparse: FxHashMap<u64, u32>,
    // far draws: each a distinct singleton cell
    far: u64,
    balls: u64,
    k_max: usize,
    // index k holds R*_k; index 0 unused
    at_least: Vec<u64>,
}

/// `R*_k` and `R_k` for `k = 1..=k_max` after `balls` balls.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OccupancySnapshot {
    pub balls: u64,
    pub at_least: Vec<u64>,
    pub exactly: Vec<u64>,
}

impl OccupancySnapshot {
    /// `R*_k`, `k >= 1`.
    pub fn rstar(&self, k: usize) -> u64 {
        self.at_least[k - 1]
    }

    /// `R_k`, `k >= 1`.
    pub fn r(&self, k: usize) -> u64 {
        self.exactly[k - 1]
    }
}

impl OccupancyState {
    pub fn new(k_max: usize) -> Self {
        Self::with_capacity(k_max, 0)
    }

    /// `expected_cells` sizes the map for cells beyond the dense block.
    pub fn with_capacity(k_max: usize, expected_cells: usize) -> Self {
        assert!(k_max >= 1, "k_max must be at least 1");
        OccupancyState {
            dense: vec![0; DENSE_CELLS],
            sparse: FxHashMap::with_capacity_and_hasher(expected_cells, Default::default()),
            far: 0,
            balls: 0,
            k_max,
            at_least: vec![0; k_max + 2],
        }
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    pub fn ball_count(&self) -> u64 {
        self.balls
    }

    #[inline]
    fn bump(&mut self, new_count: u32) {
        let c = new_count as usize;
        if c < self.at_least.len() {
            self.at_least[c] += 1;
        }
    }

    /// Drops a ball into `cell` (`cell >= 1`).
    #[inline]
    pub fn add_ball(&mut self, cell: u64) {
        debug_assert!(cell >= 1);
        let idx = (cell - 1) as usize;
        let count = if idx < DENSE_CELLS {
            let slot = &mut self.dense[idx];
            *slot += 1;
            *slot
        } else {
            let slot = self.sparse.entry(cell).or_insert(0);
            *slot += 1;
            *slot
        };
        self.balls += 1;
        self.bump(count);
    }

    #[inline]
    pub fn add_draw(&mut self, draw: CellDraw) {
        match draw {
            CellDraw::Cell(j) => self.add_ball(j),
            CellDraw::Far => {
                self.far += 1;
                self.balls += 1;
                self.bump(1);
            }
        }
    }

    /// Balls in `cell`; far draws are not addressable.
    pub fn count(&self, cell: u64) -> u32 {
        if cell == 0 {
            return 0;
        }
        let idx = (cell - 1) as usize;
        if idx < DENSE_CELLS {
            self.dense[idx]
        } else {
            self.sparse.get(&cell).copied().unwrap_or(0)
        }
    }

    pub fn rstar(&self, k: usize) -> u64 {
        assert!((1..=self.k_max + 1).contains(&k), "k out of tracked range");
        self.at_least[k]
    }

    pub fn r(&self, k: usize) -> u64 {
        assert!((1..=self.k_max).contains(&k), "k out of tracked range");
        self.at_least[k] - self.at_least[k + 1]
    }

    pub fn snapshot(&self) -> OccupancySnapshot {
        let at_least = self.at_least[1..=self.k_max].to_vec();
        let exactly = (1..=self.k_max).map(|k| self.r(k)).collect();
        OccupancySnapshot {
            balls: self.balls,
            at_least,
            exactly,
        }
    }

    /// Number of occupied cells holding exactly `c` balls, for every `c`.
    /// Walks all counts; for checks, not the hot path.
    pub fn count_histogram(&self) -> std::collections::BTreeMap<u32, u64> {
        let mut h = std::collections::BTreeMap::new();
        for &c in self.dense.iter().chain(self.sparse.values()) {
            if c > 0 {
                *h.entry(c).or_insert(0) += 1;
            }
        }
        if self.far > 0 {
            *h.entry(1).or_insert(0) += self.far;
        }
        h
    }
}
