//! Partition sequences of [0, T].
//!
//! Two schemes: uniform dyadic (2^n equal intervals) and the dyadic Lebesgue
//! partition generated by a scalar path, whose stopping times are the exact
//! hitting times of the grid 2^{-n} Z by the linear interpolant. Grid values
//! are dyadic rationals, so the index arithmetic below is exact in binary
//! floating point.

use crate::error::{Error, Result};
use crate::paths::SampledPath;
use serde::{Deserialize, Serialize};
use std::io::Write;

/// Partition scheme selector used across the experiment drivers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    UniformDyadic,
    LebesgueDyadic,
}

#[derive(Debug, Clone)]
pub enum PartitionKind {
    Uniform {
        level: u32,
    },
    Lebesgue {
        level: u32,
        /// path values at the partition times; interior stops sit exactly on
        /// the grid, the first and last legs may be fractional
        values: Vec<f64>,
        /// whether every sample increment was below the cell size 2^-level
        resolved: bool,
    },
    Custom,
}

/// Ordered times 0 = t_0 < ... < t_m = T.
#[derive(Debug, Clone)]
pub struct Partition {
    times: Vec<f64>,
    kind: PartitionKind,
}

impl Partition {
    pub fn from_times(times: Vec<f64>) -> Result<Self> {
        if times.len() < 2 {
            return Err(Error::EmptyPartition);
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter("partition times must increase".into()));
        }
        Ok(Partition { times, kind: PartitionKind::Custom })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn kind(&self) -> &PartitionKind {
        &self.kind
    }

    pub fn num_intervals(&self) -> usize {
        self.times.len() - 1
    }

    pub fn horizon(&self) -> f64 {
        *self.times.last().unwrap()
    }

    pub fn mesh(&self) -> f64 {
        self.times.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
    }

    /// Path values at partition times for Lebesgue partitions.
    pub fn values(&self) -> Option<&[f64]> {
        match &self.kind {
            PartitionKind::Lebesgue { values, .. } => Some(values),
            _ => None,
        }
    }

    pub fn level(&self) -> Option<u32> {
        match &self.kind {
            PartitionKind::Uniform { level } => Some(*level),
            PartitionKind::Lebesgue { level, .. } => Some(*level),
            PartitionKind::Custom => None,
        }
    }

    pub fn resolved(&self) -> bool {
        match &self.kind {
            PartitionKind::Lebesgue { resolved, .. } => *resolved,
            _ => true,
        }
    }

    /// One `t` column, matching the path CSV convention.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "t")?;
        for t in &self.times {
            writeln!(w, "{t}")?;
        }
        Ok(())
    }
}

/// Uniform dyadic partition with 2^n + 1 points.
pub fn uniform_dyadic(level: u32, horizon: f64) -> Partition {
    let m = 1usize << level;
    let times = (0..=m).map(|k| k as f64 * horizon / m as f64).collect();
    Partition { times, kind: PartitionKind::Uniform { level } }
}

/// Dyadic Lebesgue partition generated by a scalar path; errors when a sample
/// increment reaches the cell size 2^-n, which would let the underlying path
/// cross several cells inside one sample step.
pub fn lebesgue_dyadic(path: &SampledPath, level: u32) -> Result<Partition> {
    let max_inc = path.max_abs_increment()?;
    let h = 0.5f64.powi(level as i32);
    if max_inc >= h {
        return Err(Error::ResolutionGuard { level, max_increment: max_inc });
    }
    Ok(lebesgue_dyadic_unchecked(path, level).expect("scalar checked above"))
}

/// Same construction without the resolution guard; the partition is still the
/// exact Lebesgue partition of the interpolant, and `resolved()` records
/// whether the guard would have passed.
pub fn lebesgue_dyadic_unchecked(path: &SampledPath, level: u32) -> Result<Partition> {
    let xs = path.scalar()?;
    let n = xs.len();
    let horizon = path.horizon();
    let dt = path.dt();
    let scale = (1u64 << level) as f64; // 2^n
    let h = 1.0 / scale;

    let mut times = Vec::new();
    let mut values = Vec::new();
    times.push(0.0);
    values.push(xs[0]);
    let start_scaled = xs[0] * scale;
    let mut last_grid: Option<i64> =
        if start_scaled == start_scaled.floor() { Some(start_scaled as i64) } else { None };
    let mut max_inc = 0.0f64;

    for i in 0..n - 1 {
        let a = xs[i];
        let b = xs[i + 1];
        max_inc = max_inc.max((b - a).abs());
        if a == b {
            continue;
        }
        let t0 = i as f64 * dt;
        let seg = b - a;
        let a_s = a * scale;
        let b_s = b * scale;
        if b > a {
            let mut k = a_s.floor() as i64 + 1;
            let k_end = b_s.floor() as i64;
            while k <= k_end {
                if last_grid != Some(k) {
                    let g = k as f64 * h;
                    times.push(t0 + (g - a) / seg * dt);
                    values.push(g);
                    last_grid = Some(k);
                }
                k += 1;
            }
        } else {
            let mut k = a_s.ceil() as i64 - 1;
            let k_end = b_s.ceil() as i64;
            while k >= k_end {
                if last_grid != Some(k) {
                    let g = k as f64 * h;
                    times.push(t0 + (g - a) / seg * dt);
                    values.push(g);
                    last_grid = Some(k);
                }
                k -= 1;
            }
        }
    }

    if *times.last().unwrap() < horizon {
        times.push(horizon);
        values.push(xs[n - 1]);
    }
    // a single-point partition can happen for constant paths; keep {0, T}
    if times.len() == 1 {
        times.push(horizon);
        values.push(xs[n - 1]);
    }
    Ok(Partition {
        times,
        kind: PartitionKind::Lebesgue { level, values, resolved: max_inc < h },
    })
}

/// max over partition intervals of the interpolant's range on that interval.
pub fn oscillation(path: &SampledPath, partition: &Partition) -> Result<f64> {
    let xs = path.scalar()?;
    let dt = path.dt();
    let mut worst = 0.0f64;
    for w in partition.times().windows(2) {
        let (t0, t1) = (w[0], w[1]);
        let v0 = path.value_at(0, t0);
        let v1 = path.value_at(0, t1);
        let mut lo = v0.min(v1);
        let mut hi = v0.max(v1);
        // interior samples
        let first = (t0 / dt).ceil() as usize;
        let last = (t1 / dt).floor() as usize;
        for i in first..=last.min(xs.len() - 1) {
            let t = i as f64 * dt;
            if t > t0 && t < t1 {
                lo = lo.min(xs[i]);
                hi = hi.max(xs[i]);
            }
        }
        worst = worst.max(hi - lo);
    }
    Ok(worst)
}

/// Up/down-crossing counts of the dyadic cells, read off the Lebesgue legs.
#[derive(Debug, Clone)]
pub struct CrossingTable {
    level: u32,
    k_min: i64,
    up: Vec<u64>,
    down: Vec<u64>,
}

impl CrossingTable {
    pub fn level(&self) -> u32 {
        self.level
    }

    /// Completed upcrossings of the cell (k 2^-n, (k+1) 2^-n].
    pub fn up(&self, k: i64) -> u64 {
        if k < self.k_min || k - self.k_min >= self.up.len() as i64 {
            0
        } else {
            self.up[(k - self.k_min) as usize]
        }
    }

    pub fn down(&self, k: i64) -> u64 {
        if k < self.k_min || k - self.k_min >= self.down.len() as i64 {
            0
        } else {
            self.down[(k - self.k_min) as usize]
        }
    }

    pub fn total(&self, k: i64) -> u64 {
        self.up(k) + self.down(k)
    }

    /// Range of cell indices with at least one crossing.
    pub fn active_cells(&self) -> impl Iterator<Item = i64> + '_ {
        (self.k_min..self.k_min + self.up.len() as i64)
            .filter(move |&k| self.total(k) > 0)
    }

    pub fn max_total(&self) -> u64 {
        self.up.iter().zip(&self.down).map(|(u, d)| u + d).max().unwrap_or(0)
    }
}

/// Counts completed cell crossings by time `t` from a Lebesgue partition.
pub fn crossings_by_cell(partition: &Partition, t: f64) -> Result<CrossingTable> {
    let (level, values) = match &partition.kind {
        PartitionKind::Lebesgue { level, values, .. } => (*level, values),
        _ => {
            return Err(Error::InvalidParameter(
                "crossing counts need a Lebesgue partition".into(),
            ))
        }
    };
    let scale = (1u64 << level) as f64;
    let times = partition.times();
    let grid_index = |v: f64| -> Option<i64> {
        let s = v * scale;
        if s == s.floor() {
            Some(s as i64)
        } else {
            None
        }
    };
    let mut events: Vec<(i64, bool)> = Vec::new(); // (cell, is_up)
    let mut k_lo = i64::MAX;
    let mut k_hi = i64::MIN;
    for j in 0..times.len() - 1 {
        if times[j + 1] > t {
            break;
        }
        let (ka, kb) = match (grid_index(values[j]), grid_index(values[j + 1])) {
            (Some(a), Some(b)) => (a, b),
            _ => continue, // fractional first leg or terminal stub
        };
        if kb == ka + 1 {
            events.push((ka, true));
            k_lo = k_lo.min(ka);
            k_hi = k_hi.max(ka);
        } else if kb + 1 == ka {
            events.push((kb, false));
            k_lo = k_lo.min(kb);
            k_hi = k_hi.max(kb);
        }
        // legs that move by more than one cell cannot occur: consecutive
        // Lebesgue stops differ by exactly one grid step
    }
    if events.is_empty() {
        return Ok(CrossingTable { level, k_min: 0, up: Vec::new(), down: Vec::new() });
    }
    let width = (k_hi - k_lo + 1) as usize;
    let mut up = vec![0u64; width];
    let mut down = vec![0u64; width];
    for (k, is_up) in events {
        let slot = (k - k_lo) as usize;
        if is_up {
            up[slot] += 1;
        } else {
            down[slot] += 1;
        }
    }
    Ok(CrossingTable { level, k_min: k_lo, up, down })
}

/// (U, D, N) for one cell, building the Lebesgue partition under the
/// resolution guard.
pub fn crossing_counts(
    path: &SampledPath,
    level: u32,
    cell: i64,
    t: f64,
) -> Result<(u64, u64, u64)> {
    let partition = lebesgue_dyadic(path, level)?;
    let table = crossings_by_cell(&partition, t)?;
    Ok((table.up(cell), table.down(cell), table.total(cell)))
}

/// A family of partitions indexed by refinement level.
#[derive(Debug, Clone)]
pub struct PartitionSequence {
    pub scheme: Scheme,
    pub n_min: u32,
    pub n_max: u32,
}

impl PartitionSequence {
    pub fn new(scheme: Scheme, n_min: u32, n_max: u32) -> Result<Self> {
        if n_min > n_max {
            return Err(Error::InvalidParameter(format!(
                "level range {n_min}:{n_max} is empty"
            )));
        }
        Ok(PartitionSequence { scheme, n_min, n_max })
    }

    pub fn levels(&self) -> impl Iterator<Item = u32> {
        self.n_min..=self.n_max
    }

    /// Builds the level-n partition; `strict` applies the resolution guard
    /// for the Lebesgue scheme.
    pub fn build(&self, path: &SampledPath, level: u32, strict: bool) -> Result<Partition> {
        match self.scheme {
            Scheme::UniformDyadic => Ok(uniform_dyadic(level, path.horizon())),
            Scheme::LebesgueDyadic => {
                if strict {
                    lebesgue_dyadic(path, level)
                } else {
                    lebesgue_dyadic_unchecked(path, level)
                }
            }
        }
    }
}
