//! Order-p pathwise local times and the exact Tanaka-type identity.
//!
//! The raw local time along a partition clips every interval at t, takes the
//! value pair (a, b) = (S(t_j∧t), S(t_{j+1}∧t)) and accumulates
//!
//! ```text
//! L_t(x) += sign(b-a)^p 1_{(a∧b, a∨b]}(x) |b - x|^{p-1},
//! ```
//!
//! so for even p every term is nonnegative. On the dyadic Lebesgue partition
//! most legs run between adjacent grid values, which yields the upcrossing
//! representation and the cell-averaged variant
//! `tilde L_t(x) = 2^{-n(p-1)} U_t(I^n_k)` for x in I^n_k.
//!
//! The identity
//!
//! ```text
//! f(S(t)) - f(S(0)) = CRS_n(t) + (1/(p-1)!) ∫ L_t(x) df^{(p-1)}(x)
//! ```
//!
//! holds exactly at every level when the last integral is computed exactly,
//! which is possible whenever df^{(p-1)} is a combination of point masses and
//! indicator densities (the ramp family) or has a smooth density (quadrature
//! per leg).
//!
//! Spatial grids are aligned so that every dyadic cell (k 2^-n, (k+1) 2^-n]
//! holds the same number of nodes, each node standing for the half-open slab
//! (x - δ, x]. Cell integrals below are rectangle sums over those slabs; this
//! makes the dyadic averaging operator exactly idempotent.

use crate::ensemble::{median, run_ensemble_with_threads, stream_seed};
use crate::error::{Error, Result};
use crate::fbm::generate_fbm;
use crate::functions::{ScalarFunction, StieltjesMeasure};
use crate::partitions::{crossings_by_cell, lebesgue_dyadic_unchecked, Partition};
use crate::paths::SampledPath;
use crate::variation::GuardMode;
use serde::Serialize;
use std::io::Write;

/// Which construction produced a spatial profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LocalTimeFlavor {
    Raw,
    UpcrossingAvg,
    Occupation,
}

/// A spatial profile on a uniform grid at a fixed level and time.
#[derive(Debug, Clone)]
pub struct LocalTimeGrid {
    pub level: u32,
    pub t: f64,
    pub p: u32,
    pub xs: Vec<f64>,
    pub values: Vec<f64>,
    pub flavor: LocalTimeFlavor,
    /// set when the requested grid does not cover the path range
    pub truncated_support: bool,
    /// set when the path range does not even span one dyadic cell
    pub degenerate: bool,
}

impl LocalTimeGrid {
    pub fn spacing(&self) -> f64 {
        if self.xs.len() >= 2 {
            self.xs[1] - self.xs[0]
        } else {
            0.0
        }
    }

    /// Rectangle-rule mass Σ values · δ (each node stands for (x-δ, x]).
    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.spacing()
    }

    /// `x,L` CSV form.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "x,L")?;
        for (x, v) in self.xs.iter().zip(&self.values) {
            writeln!(w, "{x},{v}")?;
        }
        Ok(())
    }
}

/// Aligned spatial grid for level n: spacing 2^{-n-3} (eight nodes per dyadic
/// cell), covering the path range plus one cell on each side. The leftmost
/// node sits one spacing above a cell boundary so every cell is complete.
pub fn spatial_grid(path: &SampledPath, level: u32) -> Result<Vec<f64>> {
    let xs = path.scalar()?;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in xs {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    let delta = 0.5f64.powi(level as i32 + 3);
    let scale = 1.0 / delta;
    // snap outward to cell boundaries (multiples of 8 in node index)
    let lo_idx = ((lo * scale).floor() as i64 / 8 - 1) * 8 - 8;
    let hi_idx = (((hi * scale).ceil() as i64 + 7) / 8 + 1) * 8 + 8;
    Ok(((lo_idx + 1)..=hi_idx).map(|i| i as f64 * delta).collect())
}

/// Value pairs of the partition intervals clipped at t, skipping flat legs.
fn clipped_legs(path: &SampledPath, partition: &Partition, t: f64) -> Vec<(f64, f64)> {
    let times = partition.times();
    let values = partition.values();
    let mut out = Vec::with_capacity(times.len());
    for j in 0..times.len() - 1 {
        if times[j] >= t {
            break;
        }
        let a = match values {
            Some(v) => v[j],
            None => path.value_at(0, times[j]),
        };
        let b = if times[j + 1] <= t {
            match values {
                Some(v) => v[j + 1],
                None => path.value_at(0, times[j + 1]),
            }
        } else {
            path.value_at(0, t)
        };
        if a != b {
            out.push((a, b));
        }
    }
    out
}

/// sign(b-a)^p; identically 1 for even p, kept for the odd-p exploration.
#[inline]
fn sign_pow(delta: f64, p: u32) -> f64 {
    if p % 2 == 0 || delta >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// Pointwise raw local time on a sorted grid.
pub fn local_time_raw(
    path: &SampledPath,
    partition: &Partition,
    p: u32,
    t: f64,
    xs: &[f64],
) -> Result<LocalTimeGrid> {
    if p % 2 != 0 {
        return Err(Error::OddOrder(p as usize));
    }
    if xs.len() < 2 {
        return Err(Error::InvalidParameter("spatial grid needs at least two nodes".into()));
    }
    let legs = clipped_legs(path, partition, t);
    let mut values = vec![0.0; xs.len()];
    let mut truncated = false;
    for &(a, b) in &legs {
        let lo = a.min(b);
        let hi = a.max(b);
        if lo < xs[0] - (xs[1] - xs[0]) || hi > *xs.last().unwrap() {
            truncated = true;
        }
        let s = sign_pow(b - a, p);
        let i0 = xs.partition_point(|&x| x <= lo);
        let i1 = xs.partition_point(|&x| x <= hi);
        for i in i0..i1 {
            values[i] += s * (b - xs[i]).abs().powi(p as i32 - 1);
        }
    }
    Ok(LocalTimeGrid {
        level: partition.level().unwrap_or(0),
        t,
        p,
        xs: xs.to_vec(),
        values,
        flavor: LocalTimeFlavor::Raw,
        truncated_support: truncated,
        degenerate: false,
    })
}

/// Raw local time at a single point, exact (no grid).
pub fn local_time_raw_at(
    path: &SampledPath,
    partition: &Partition,
    p: u32,
    t: f64,
    x: f64,
) -> f64 {
    let mut acc = 0.0;
    for (a, b) in clipped_legs(path, partition, t) {
        let lo = a.min(b);
        let hi = a.max(b);
        if x > lo && x <= hi {
            acc += sign_pow(b - a, p) * (b - x).abs().powi(p as i32 - 1);
        }
    }
    acc
}

/// Cell-averaged upcrossing local time
/// `tilde L_t(x) = 2^{-n(p-1)} U_t(I^n_k) 1_{I^n_k}(x)`.
pub fn local_time_upcrossing(
    path: &SampledPath,
    level: u32,
    p: u32,
    t: f64,
    xs: &[f64],
    guard: GuardMode,
) -> Result<LocalTimeGrid> {
    let partition = match guard {
        GuardMode::Strict => crate::partitions::lebesgue_dyadic(path, level)?,
        GuardMode::Relaxed => lebesgue_dyadic_unchecked(path, level)?,
    };
    local_time_upcrossing_from(&partition, p, t, xs)
}

/// Same computation from an existing Lebesgue partition.
pub fn local_time_upcrossing_from(
    partition: &Partition,
    p: u32,
    t: f64,
    xs: &[f64],
) -> Result<LocalTimeGrid> {
    if p % 2 != 0 {
        return Err(Error::OddOrder(p as usize));
    }
    let level = partition
        .level()
        .ok_or_else(|| Error::InvalidParameter("partition has no level tag".into()))?;
    let table = crossings_by_cell(partition, t)?;
    let weight = 0.5f64.powi((level * (p - 1)) as i32);
    let scale = (1u64 << level) as f64;
    let values = xs
        .iter()
        .map(|&x| {
            let cell = (x * scale).ceil() as i64 - 1;
            weight * table.up(cell) as f64
        })
        .collect();
    Ok(LocalTimeGrid {
        level,
        t,
        p,
        xs: xs.to_vec(),
        values,
        flavor: LocalTimeFlavor::UpcrossingAvg,
        truncated_support: false,
        degenerate: false,
    })
}

/// Dyadic averaging: replace f on each cell (k 2^-n, (k+1) 2^-n] by its
/// cell mean, computed as the rectangle sum over the node slabs. Exactly
/// idempotent on aligned grids and preserves the rectangle-rule integral.
pub fn averaging_operator(xs: &[f64], values: &[f64], level: u32) -> Result<Vec<f64>> {
    if xs.len() != values.len() || xs.len() < 2 {
        return Err(Error::InvalidParameter("grid/value length mismatch".into()));
    }
    let delta = xs[1] - xs[0];
    for w in xs.windows(2) {
        if ((w[1] - w[0]) / delta - 1.0).abs() > 1e-9 {
            return Err(Error::UnderResolvedGrid {
                level,
                reason: "grid is not uniform".into(),
            });
        }
    }
    let cell = 0.5f64.powi(level as i32);
    let ratio = cell / delta;
    let m = ratio.round() as usize;
    if m < 4 || (ratio - m as f64).abs() > 1e-9 {
        return Err(Error::UnderResolvedGrid {
            level,
            reason: format!("need >= 4 aligned nodes per cell, spacing gives {ratio}"),
        });
    }
    // first node must sit one spacing above a cell boundary
    let offset = xs[0] / delta;
    let k0 = offset.round();
    if (offset - k0).abs() > 1e-6 || (k0 as i64 - 1).rem_euclid(m as i64) != 0 {
        return Err(Error::UnderResolvedGrid {
            level,
            reason: "grid nodes are not aligned to the dyadic cells".into(),
        });
    }
    if xs.len() % m != 0 {
        return Err(Error::UnderResolvedGrid {
            level,
            reason: "grid does not hold a whole number of cells".into(),
        });
    }
    let mut out = vec![0.0; values.len()];
    for chunk in 0..values.len() / m {
        let slice = &values[chunk * m..(chunk + 1) * m];
        // pairwise summation keeps the mean of a constant slice bit-exact,
        // which is what makes double averaging idempotent
        let mean = pairwise_sum(slice) / m as f64;
        for v in out[chunk * m..(chunk + 1) * m].iter_mut() {
            *v = mean;
        }
    }
    Ok(out)
}

fn pairwise_sum(v: &[f64]) -> f64 {
    match v.len() {
        0 => 0.0,
        1 => v[0],
        2 => v[0] + v[1],
        n => pairwise_sum(&v[..n / 2]) + pairwise_sum(&v[n / 2..]),
    }
}

/// Test functions for weak-convergence diagnostics.
#[derive(Debug, Clone, Serialize)]
pub enum TestFn {
    /// exp(-(x-c)^2 / (2 s^2))
    GaussBump { center: f64, width: f64 },
    /// 1_{(lo, hi]}
    Indicator { lo: f64, hi: f64 },
    /// max(0, 1 - |x-c|/halfwidth)
    TriangularRamp { center: f64, halfwidth: f64 },
}

impl TestFn {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            TestFn::GaussBump { center, width } => {
                let z = (x - center) / width;
                (-0.5 * z * z).exp()
            }
            TestFn::Indicator { lo, hi } => {
                if x > *lo && x <= *hi {
                    1.0
                } else {
                    0.0
                }
            }
            TestFn::TriangularRamp { center, halfwidth } => {
                (1.0 - (x - center).abs() / halfwidth).max(0.0)
            }
        }
    }
}

/// The fixed five-function panel spanning [lo, hi]: three bumps, one
/// indicator, one ramp.
pub fn test_panel(lo: f64, hi: f64) -> Vec<TestFn> {
    let range = hi - lo;
    let width = range / 8.0;
    vec![
        TestFn::GaussBump { center: lo + 0.3 * range, width },
        TestFn::GaussBump { center: lo + 0.5 * range, width },
        TestFn::GaussBump { center: lo + 0.7 * range, width },
        TestFn::Indicator { lo: lo + 0.25 * range, hi: lo + 0.75 * range },
        TestFn::TriangularRamp { center: lo + 0.5 * range, halfwidth: 0.5 * range },
    ]
}

/// Trapezoid pairing ∫ L(x) g(x) dx on the profile's grid.
pub fn weak_pairing(profile: &LocalTimeGrid, g: &TestFn) -> f64 {
    let delta = profile.spacing();
    let prods: Vec<f64> =
        profile.xs.iter().zip(&profile.values).map(|(&x, &v)| v * g.eval(x)).collect();
    let mut acc = 0.0;
    for w in prods.windows(2) {
        acc += 0.5 * (w[0] + w[1]) * delta;
    }
    acc
}

// Gauss-Legendre nodes/weights on [-1, 1] via Newton on the recurrence.
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            // P_n(x) and P_n'(x)
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let pk = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = pk;
            }
            let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let step = p1 / dp;
            x -= step;
            if step.abs() < 1e-15 {
                break;
            }
        }
        let mut p0 = 1.0;
        let mut p1 = x;
        for k in 2..=n {
            let pk = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
            p0 = p1;
            p1 = pk;
        }
        let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

/// Exact/quadrature evaluation of ∫ L_t(x) df^{(p-1)}(x) from the legs.
fn stieltjes_against_local_time(
    f: &ScalarFunction,
    p: u32,
    legs: &[(f64, f64)],
    measure: &StieltjesMeasure,
) -> f64 {
    match *measure {
        StieltjesMeasure::Zero => 0.0,
        StieltjesMeasure::Atom { at, weight } => {
            let mut acc = 0.0;
            for &(a, b) in legs {
                let lo = a.min(b);
                let hi = a.max(b);
                if at > lo && at <= hi {
                    acc += sign_pow(b - a, p) * (b - at).abs().powi(p as i32 - 1);
                }
            }
            weight * acc
        }
        StieltjesMeasure::IndicatorDensity { from, weight } => {
            // per leg: ∫_{(lo∨from, hi]} |b-x|^{p-1} dx, exact antiderivative
            let mut acc = 0.0;
            let pf = p as f64;
            for &(a, b) in legs {
                let s = sign_pow(b - a, p);
                if b >= a {
                    let c = a.max(from);
                    if c < b {
                        acc += s * (b - c).powi(p as i32) / pf;
                    }
                } else {
                    let c = b.max(from);
                    if c < a {
                        acc += s * ((a - b).powi(p as i32) - (c - b).powi(p as i32)) / pf;
                    }
                }
            }
            weight * acc
        }
        StieltjesMeasure::SmoothDensity => {
            // ∫ L_t f^{(p)} dx leg by leg with Gauss-Legendre
            let (nodes, weights) = gauss_legendre(12);
            let mut acc = 0.0;
            for &(a, b) in legs {
                let lo = a.min(b);
                let hi = a.max(b);
                let mid = 0.5 * (lo + hi);
                let half = 0.5 * (hi - lo);
                let s = sign_pow(b - a, p);
                let mut leg = 0.0;
                for (x, w) in nodes.iter().zip(&weights) {
                    let xx = mid + half * x;
                    leg += w * f.deriv(p, xx) * (b - xx).abs().powi(p as i32 - 1);
                }
                acc += s * leg * half;
            }
            acc
        }
    }
}

/// Residual of the exact local-time identity at time t along one partition.
pub fn tanaka_residual(
    f: &ScalarFunction,
    path: &SampledPath,
    partition: &Partition,
    p: u32,
    t: f64,
) -> Result<f64> {
    if p % 2 != 0 {
        return Err(Error::OddOrder(p as usize));
    }
    let measure = f.stieltjes_measure(p)?;
    let legs = clipped_legs(path, partition, t);
    // compensated sum over the clipped legs
    let mut crs = 0.0;
    for &(a, b) in &legs {
        let delta = b - a;
        let mut dk = 1.0;
        let mut fact = 1.0;
        for k in 1..p {
            dk *= delta;
            fact *= k as f64;
            crs += f.deriv(k, a) * dk / fact;
        }
    }
    let fact_pm1: f64 = (1..p).map(|k| k as f64).product();
    let lt_term = stieltjes_against_local_time(f, p, &legs, &measure) / fact_pm1;
    let s_t = path.value_at(0, t);
    let s_0 = path.value_at(0, 0.0);
    Ok(f.eval(s_t) - f.eval(s_0) - crs - lt_term)
}

/// Occupation density: 2^n times the exact sojourn of the interpolant in
/// each dyadic cell up to t, evaluated on the grid.
pub fn occupation_density(path: &SampledPath, t: f64, level: u32) -> Result<LocalTimeGrid> {
    let xs_path = path.scalar()?;
    let grid = spatial_grid(path, level)?;
    let delta_grid = grid[1] - grid[0];
    let cell = 0.5f64.powi(level as i32);
    let scale = 1.0 / cell;
    let cell_of = |v: f64| (v * scale).ceil() as i64 - 1;
    let k_lo = cell_of(grid[0]);
    let k_hi = cell_of(*grid.last().unwrap());
    let width = (k_hi - k_lo + 1) as usize;
    let mut sojourn = vec![0.0; width];
    let dt = path.dt();
    let n = xs_path.len();
    let steps = ((t / dt).ceil() as usize).min(n - 1);
    for i in 0..steps {
        let t0 = i as f64 * dt;
        let t1 = ((i + 1) as f64 * dt).min(t);
        if t1 <= t0 {
            break;
        }
        let a = xs_path[i];
        let b = path.value_at(0, t1);
        let seg_dt = t1 - t0;
        if a == b {
            let k = cell_of(a);
            if k >= k_lo && k <= k_hi {
                sojourn[(k - k_lo) as usize] += seg_dt;
            }
            continue;
        }
        let lo = a.min(b);
        let hi = a.max(b);
        let span = hi - lo;
        let mut k = cell_of(lo.max(grid[0]));
        // the value lo itself belongs to cell_of(lo); iterate cells overlapped
        if lo * scale == (lo * scale).floor() {
            // exactly on a boundary: the open interval starts in the cell above
            k = (lo * scale) as i64;
        }
        while k <= k_hi {
            let c_lo = k as f64 * cell;
            let c_hi = (k + 1) as f64 * cell;
            if c_lo >= hi {
                break;
            }
            let overlap = (hi.min(c_hi) - lo.max(c_lo)).max(0.0);
            if overlap > 0.0 && k >= k_lo {
                sojourn[(k - k_lo) as usize] += seg_dt * overlap / span;
            }
            k += 1;
        }
    }
    let mut range_lo = f64::INFINITY;
    let mut range_hi = f64::NEG_INFINITY;
    for &v in xs_path {
        range_lo = range_lo.min(v);
        range_hi = range_hi.max(v);
    }
    let values: Vec<f64> = grid
        .iter()
        .map(|&x| {
            let k = cell_of(x);
            if k >= k_lo && k <= k_hi {
                sojourn[(k - k_lo) as usize] * scale
            } else {
                0.0
            }
        })
        .collect();
    let _ = delta_grid;
    Ok(LocalTimeGrid {
        level,
        t,
        p: 0,
        xs: grid,
        values,
        flavor: LocalTimeFlavor::Occupation,
        truncated_support: false,
        degenerate: range_hi - range_lo < cell,
    })
}

/// E|Z|^p for standard normal Z and even p: (p-1)!!.
pub fn gaussian_abs_moment(p: u32) -> Result<f64> {
    if p == 0 || p % 2 != 0 {
        return Err(Error::OddOrder(p as usize));
    }
    Ok((1..=p / 2).map(|m| (2 * m - 1) as f64).product())
}

/// Per-level summary of the crossing-vs-occupation comparison.
#[derive(Debug, Clone, Serialize)]
pub struct ConjectureLevel {
    pub level: u32,
    /// median over the ensemble of sup_x |2 tilde L_T(x)/E - occupation(x)|
    pub sup_gap_median: f64,
    /// median of mu^n([0,T]) / T (should drift toward E|Z|^{1/H})
    pub mu_over_t_median: f64,
    pub resolved: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConjectureReport {
    pub hurst: f64,
    pub p: u32,
    pub moment: f64,
    pub num_steps: usize,
    pub ensemble: usize,
    pub levels: Vec<ConjectureLevel>,
    pub degenerate: bool,
}

/// Numerical comparison of the normalized crossing local time with the
/// occupation density over an ensemble of fractional Brownian paths. Trends
/// are reported, nothing is asserted.
#[allow(clippy::too_many_arguments)]
pub fn conjecture_experiment(
    hurst: f64,
    horizon: f64,
    num_steps: usize,
    ensemble: usize,
    n_range: (u32, u32),
    master_seed: u64,
    threads: usize,
) -> Result<ConjectureReport> {
    let inv = 1.0 / hurst;
    let p = inv.round() as u32;
    if (inv - p as f64).abs() > 1e-9 || p % 2 != 0 {
        return Err(Error::InvalidParameter(format!(
            "1/H must be an even integer, got H={hurst}"
        )));
    }
    let moment = gaussian_abs_moment(p)?;
    if n_range.0 > n_range.1 {
        return Err(Error::InvalidParameter("empty level range".into()));
    }
    let levels: Vec<u32> = (n_range.0..=n_range.1).collect();
    let per_path: Vec<Vec<(f64, f64, bool)>> =
        run_ensemble_with_threads(ensemble, master_seed, threads, |_, seed| {
            let path = generate_fbm(hurst, horizon, num_steps, seed, 1).expect("fbm params");
            levels
                .iter()
                .map(|&n| {
                    let partition = lebesgue_dyadic_unchecked(&path, n).expect("scalar path");
                    let grid = spatial_grid(&path, n).expect("scalar path");
                    let tilde = local_time_upcrossing_from(&partition, p, horizon, &grid)
                        .expect("tilde local time");
                    let occ = occupation_density(&path, horizon, n).expect("occupation");
                    let sup_gap = tilde
                        .values
                        .iter()
                        .zip(&occ.values)
                        .map(|(l, o)| (2.0 * l / moment - o).abs())
                        .fold(0.0, f64::max);
                    // mu^n counts completed crossing legs only
                    let table = crossings_by_cell(&partition, horizon).expect("lebesgue");
                    let crossings: u64 =
                        table.active_cells().map(|k| table.total(k)).sum();
                    let mu = 0.5f64.powi((n * p) as i32) * crossings as f64;
                    (sup_gap, mu / horizon, partition.resolved())
                })
                .collect()
        });
    let mut out = Vec::new();
    let mut degenerate = false;
    for (idx, &n) in levels.iter().enumerate() {
        let gaps: Vec<f64> = per_path.iter().map(|v| v[idx].0).collect();
        let mus: Vec<f64> = per_path.iter().map(|v| v[idx].1).collect();
        if mus.iter().all(|&m| m == 0.0) {
            degenerate = true;
        }
        out.push(ConjectureLevel {
            level: n,
            sup_gap_median: median(&gaps),
            mu_over_t_median: median(&mus),
            resolved: per_path.iter().all(|v| v[idx].2),
        });
    }
    Ok(ConjectureReport {
        hurst,
        p,
        moment,
        num_steps,
        ensemble,
        levels: out,
        degenerate,
    })
}

/// Convenience: a deterministic Brownian fixture for the experiments.
pub fn brownian_fixture(num_steps: usize, seed: u64) -> SampledPath {
    generate_fbm(0.5, 1.0, num_steps, stream_seed(seed, 0), 1).expect("valid parameters")
}
