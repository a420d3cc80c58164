//! Path-dependent calculus for cylindrical functionals.
//!
//! A cylindrical functional is F(t, ω) = g(t, ω(t), ∫_0^t h(ω(s)) ds) with g
//! polynomial in (t, y, z) and h a built-in scalar function. Its Dupire-type
//! derivatives are closed-form:
//!
//! * horizontal: extend the stopped path flat, so DF = ∂_t g + h(ω(t)) ∂_z g;
//! * vertical:   bump the endpoint, so ∇_ω^k F = ∂_y^k g
//!
//! (a point bump at t does not move the running integral). The level-n sums
//! evaluate vertical derivatives on the piecewise-constant approximation
//! stopped right before t_j, whose endpoint value is S(t_j) and whose running
//! integral is the right-endpoint step rule Σ_{i<j} h(S(t_{i+1})) Δt_i.

use crate::error::{Error, Result};
use crate::functions::ScalarFunction;
use crate::partitions::{PartitionSequence, Scheme};
use crate::paths::SampledPath;
use crate::variation::GuardMode;
use serde::{Deserialize, Serialize};

/// One monomial c · t^i y^j z^k of the cylinder function g.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GTerm {
    pub coef: f64,
    pub t_pow: u32,
    pub y_pow: u32,
    pub z_pow: u32,
}

impl GTerm {
    pub fn new(coef: f64, t_pow: u32, y_pow: u32, z_pow: u32) -> Self {
        GTerm { coef, t_pow, y_pow, z_pow }
    }
}

fn falling(m: u32, k: u32) -> f64 {
    (0..k).map(|i| (m - i) as f64).product()
}

/// F(t, ω) = g(t, ω(t), ∫_0^t h(ω(s)) ds) with polynomial g.
#[derive(Debug, Clone)]
pub struct CylindricalFunctional {
    terms: Vec<GTerm>,
    kernel: ScalarFunction,
}

impl CylindricalFunctional {
    pub fn new(terms: Vec<GTerm>, kernel: ScalarFunction) -> Self {
        CylindricalFunctional { terms, kernel }
    }

    /// g(t, y) with no running-integral dependence; the kernel is unused.
    pub fn state_only(terms: Vec<GTerm>) -> Self {
        CylindricalFunctional { terms, kernel: ScalarFunction::Constant { c: 0.0 } }
    }

    /// F(t, ω) = ω(t).
    pub fn endpoint() -> Self {
        Self::state_only(vec![GTerm::new(1.0, 0, 1, 0)])
    }

    /// F(t, ω) = ω(t)^m.
    pub fn endpoint_power(m: u32) -> Self {
        Self::state_only(vec![GTerm::new(1.0, 0, m, 0)])
    }

    /// F(t, ω) = ∫_0^t h(ω(s)) ds.
    pub fn running_integral(kernel: ScalarFunction) -> Self {
        CylindricalFunctional { terms: vec![GTerm::new(1.0, 0, 0, 1)], kernel }
    }

    pub fn kernel(&self) -> &ScalarFunction {
        &self.kernel
    }

    pub fn terms(&self) -> &[GTerm] {
        &self.terms
    }

    /// Largest y-power appearing in g (all higher vertical derivatives vanish).
    pub fn max_y_power(&self) -> u32 {
        self.terms.iter().map(|t| t.y_pow).max().unwrap_or(0)
    }

    pub fn scale(&self, s: f64) -> Self {
        CylindricalFunctional {
            terms: self
                .terms
                .iter()
                .map(|t| GTerm::new(s * t.coef, t.t_pow, t.y_pow, t.z_pow))
                .collect(),
            kernel: self.kernel.clone(),
        }
    }

    pub fn g(&self, t: f64, y: f64, z: f64) -> f64 {
        self.terms
            .iter()
            .map(|m| {
                m.coef * t.powi(m.t_pow as i32) * y.powi(m.y_pow as i32) * z.powi(m.z_pow as i32)
            })
            .sum()
    }

    pub fn dg_dt(&self, t: f64, y: f64, z: f64) -> f64 {
        self.terms
            .iter()
            .filter(|m| m.t_pow >= 1)
            .map(|m| {
                m.coef
                    * m.t_pow as f64
                    * t.powi(m.t_pow as i32 - 1)
                    * y.powi(m.y_pow as i32)
                    * z.powi(m.z_pow as i32)
            })
            .sum()
    }

    /// ∂_y^k g.
    pub fn dg_dy(&self, k: u32, t: f64, y: f64, z: f64) -> f64 {
        self.terms
            .iter()
            .filter(|m| m.y_pow >= k)
            .map(|m| {
                m.coef
                    * falling(m.y_pow, k)
                    * t.powi(m.t_pow as i32)
                    * y.powi((m.y_pow - k) as i32)
                    * z.powi(m.z_pow as i32)
            })
            .sum()
    }

    pub fn dg_dz(&self, t: f64, y: f64, z: f64) -> f64 {
        self.terms
            .iter()
            .filter(|m| m.z_pow >= 1)
            .map(|m| {
                m.coef
                    * m.z_pow as f64
                    * t.powi(m.t_pow as i32)
                    * y.powi(m.y_pow as i32)
                    * z.powi(m.z_pow as i32 - 1)
            })
            .sum()
    }

    /// Horizontal derivative at state (t, y, z).
    pub fn horizontal(&self, t: f64, y: f64, z: f64) -> f64 {
        self.dg_dt(t, y, z) + self.kernel.eval(y) * self.dg_dz(t, y, z)
    }

    /// k-th vertical derivative at state (t, y, z).
    pub fn vertical(&self, k: u32, t: f64, y: f64, z: f64) -> f64 {
        self.dg_dy(k, t, y, z)
    }

    /// Binds the functional to a path, precomputing the running integral.
    pub fn on_path<'a>(&'a self, path: &'a SampledPath) -> Result<FunctionalOnPath<'a>> {
        let xs = path.scalar()?;
        let dt = path.dt();
        let mut z_cum = Vec::with_capacity(xs.len());
        z_cum.push(0.0);
        let mut acc = 0.0;
        let mut prev = self.kernel.eval(xs[0]);
        for &x in &xs[1..] {
            let cur = self.kernel.eval(x);
            acc += 0.5 * (prev + cur) * dt;
            z_cum.push(acc);
            prev = cur;
        }
        Ok(FunctionalOnPath { func: self, path, z_cum })
    }
}

/// A cylindrical functional bound to a sampled path, with the running
/// integral ∫ h(S) ds as a trapezoid prefix on the sample grid.
pub struct FunctionalOnPath<'a> {
    func: &'a CylindricalFunctional,
    path: &'a SampledPath,
    z_cum: Vec<f64>,
}

impl FunctionalOnPath<'_> {
    pub fn path(&self) -> &SampledPath {
        self.path
    }

    /// ∫_0^t h(S(s)) ds along the true (interpolated) path.
    pub fn z_at(&self, t: f64) -> f64 {
        let dt = self.path.dt();
        let n = self.z_cum.len();
        if t <= 0.0 {
            return 0.0;
        }
        let pos = (t / dt).min((n - 1) as f64);
        let i = (pos.floor() as usize).min(n - 2);
        let frac = pos - i as f64;
        if frac == 0.0 {
            return self.z_cum[i];
        }
        // partial trapezoid cell
        let xs = self.path.scalar().expect("scalar path");
        let ha = self.func.kernel.eval(xs[i]);
        let hb = self.func.kernel.eval(self.path.value_at(0, t));
        self.z_cum[i] + 0.5 * (ha + hb) * frac * dt
    }

    /// F(t, S_t).
    pub fn value(&self, t: f64) -> f64 {
        self.func.g(t, self.path.value_at(0, t), self.z_at(t))
    }

    /// F on the stopped path extended flat to t + dt (horizontal extension):
    /// the endpoint stays, the running integral grows linearly.
    pub fn value_extended(&self, t: f64, dt: f64) -> f64 {
        let y = self.path.value_at(0, t);
        let z = self.z_at(t) + self.func.kernel.eval(y) * dt;
        self.func.g(t + dt, y, z)
    }

    /// F on the stopped path with the endpoint bumped by `bump`; the running
    /// integral is unchanged because the bump acts on a single time point.
    pub fn value_bumped(&self, t: f64, bump: f64) -> f64 {
        self.func.g(t, self.path.value_at(0, t) + bump, self.z_at(t))
    }

    pub fn horizontal_at(&self, t: f64) -> f64 {
        self.func.horizontal(t, self.path.value_at(0, t), self.z_at(t))
    }

    pub fn vertical_at(&self, k: u32, t: f64) -> f64 {
        self.func.vertical(k, t, self.path.value_at(0, t), self.z_at(t))
    }

    /// Trapezoid cumulative of the horizontal derivative s ↦ DF(s, S_s).
    pub fn horizontal_integral(&self, t: f64) -> f64 {
        let xs = self.path.scalar().expect("scalar path");
        let dt = self.path.dt();
        let n = xs.len();
        let pos = (t.max(0.0) / dt).min((n - 1) as f64);
        let cells = pos.floor() as usize;
        let mut acc = 0.0;
        let mut prev = self.func.horizontal(0.0, xs[0], 0.0);
        for i in 1..=cells.min(n - 1) {
            let cur = self.func.horizontal(i as f64 * dt, xs[i], self.z_cum[i]);
            acc += 0.5 * (prev + cur) * dt;
            prev = cur;
        }
        let frac = pos - cells as f64;
        if frac > 0.0 && cells < n - 1 {
            let cur = self.horizontal_at(t);
            acc += 0.5 * (prev + cur) * frac * dt;
        }
        acc
    }
}

/// Per-level functional compensated sums and residuals.
#[derive(Debug, Clone)]
pub struct FunctionalLevel {
    pub level: u32,
    pub resolved: bool,
    pub values: Vec<f64>,
    pub residuals: Option<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct FunctionalProfile {
    pub p: u32,
    pub scheme: Scheme,
    /// set when the scheme does not guarantee vanishing mesh a priori
    pub mesh_warning: bool,
    pub eval_times: Vec<f64>,
    pub levels: Vec<FunctionalLevel>,
    pub limit_estimate: Vec<f64>,
}

impl FunctionalProfile {
    pub fn finest(&self) -> &FunctionalLevel {
        self.levels.last().expect("at least one level")
    }

    pub fn level(&self, n: u32) -> Option<&FunctionalLevel> {
        self.levels.iter().find(|l| l.level == n)
    }
}

struct FunctionalLevelSums {
    times: Vec<f64>,
    /// step-path running integral at each partition point
    z_step: Vec<f64>,
    crs_prefix: Vec<f64>,
    /// p-th order atoms ∂_y^p g(t_j, ·)(ΔS_j)^p (true-path state)
    pth_prefix: Vec<f64>,
}

fn functional_level_sums(
    bound: &FunctionalOnPath<'_>,
    times: Vec<f64>,
    p: u32,
) -> FunctionalLevelSums {
    let func = bound.func;
    let path = bound.path;
    let m = times.len() - 1;
    let mut z_step = Vec::with_capacity(m + 1);
    z_step.push(0.0);
    let mut acc = 0.0;
    for w in times.windows(2) {
        acc += func.kernel.eval(path.value_at(0, w[1])) * (w[1] - w[0]);
        z_step.push(acc);
    }
    let mut crs_prefix = Vec::with_capacity(m + 1);
    let mut pth_prefix = Vec::with_capacity(m + 1);
    crs_prefix.push(0.0);
    pth_prefix.push(0.0);
    let mut crs = 0.0;
    let mut pth = 0.0;
    for j in 0..m {
        let y = path.value_at(0, times[j]);
        let delta = path.value_at(0, times[j + 1]) - y;
        crs += vertical_taylor(func, times[j], y, z_step[j], delta, p - 1);
        let z_true = bound.z_at(times[j]);
        pth += func.vertical(p, times[j], y, z_true) * delta.powi(p as i32);
        crs_prefix.push(crs);
        pth_prefix.push(pth);
    }
    FunctionalLevelSums { times, z_step, crs_prefix, pth_prefix }
}

fn vertical_taylor(
    func: &CylindricalFunctional,
    t: f64,
    y: f64,
    z: f64,
    delta: f64,
    kmax: u32,
) -> f64 {
    let mut acc = 0.0;
    let mut dk = 1.0;
    let mut fact = 1.0;
    for k in 1..=kmax {
        dk *= delta;
        fact *= k as f64;
        acc += func.vertical(k, t, y, z) * dk / fact;
    }
    acc
}

impl FunctionalLevelSums {
    fn crs_at(&self, bound: &FunctionalOnPath<'_>, p: u32, t: f64) -> f64 {
        let m = self.times.len() - 1;
        let full = self.times[1..].partition_point(|&tj| tj <= t);
        let mut acc = self.crs_prefix[full];
        if full < m && self.times[full] < t {
            let y = bound.path.value_at(0, self.times[full]);
            let delta = bound.path.value_at(0, t) - y;
            acc +=
                vertical_taylor(bound.func, self.times[full], y, self.z_step[full], delta, p - 1);
        }
        acc
    }

    fn pth_at(&self, t: f64) -> f64 {
        let lefts = &self.times[..self.times.len() - 1];
        self.pth_prefix[lefts.partition_point(|&tj| tj <= t)]
    }
}

#[allow(clippy::too_many_arguments)]
fn functional_profile(
    func: &CylindricalFunctional,
    path: &SampledPath,
    scheme: Scheme,
    p: u32,
    levels: (u32, u32),
    eval_times: &[f64],
    guard: GuardMode,
    with_residuals: bool,
) -> Result<FunctionalProfile> {
    if p < 2 || p % 2 != 0 {
        return Err(Error::OddOrder(p as usize));
    }
    let bound = func.on_path(path)?;
    let factorial_p: f64 = (1..=p).map(|k| k as f64).product();
    let seq = PartitionSequence::new(scheme, levels.0, levels.1)?;
    let f0 = bound.value(0.0);
    let mut out = Vec::new();
    for n in seq.levels() {
        let partition = seq.build(path, n, matches!(guard, GuardMode::Strict))?;
        let sums = functional_level_sums(&bound, partition.times().to_vec(), p);
        let values: Vec<f64> = eval_times.iter().map(|&t| sums.crs_at(&bound, p, t)).collect();
        let residuals = if with_residuals {
            Some(
                eval_times
                    .iter()
                    .zip(&values)
                    .map(|(&t, &crs)| {
                        bound.value(t)
                            - f0
                            - bound.horizontal_integral(t)
                            - crs
                            - sums.pth_at(t) / factorial_p
                    })
                    .collect(),
            )
        } else {
            None
        };
        out.push(FunctionalLevel { level: n, resolved: partition.resolved(), values, residuals });
    }
    let limit_estimate = out.last().expect("levels nonempty").values.clone();
    Ok(FunctionalProfile {
        p,
        scheme,
        mesh_warning: matches!(scheme, Scheme::LebesgueDyadic),
        eval_times: eval_times.to_vec(),
        levels: out,
        limit_estimate,
    })
}

/// Functional compensated sums Σ_j Σ_{k<p} ∇_ω^k F(t_j, S^n_{t_j-}) (ΔS∧t)^k / k!.
pub fn functional_compensated_integral(
    func: &CylindricalFunctional,
    path: &SampledPath,
    scheme: Scheme,
    p: u32,
    levels: (u32, u32),
    eval_times: &[f64],
    guard: GuardMode,
) -> Result<FunctionalProfile> {
    functional_profile(func, path, scheme, p, levels, eval_times, guard, false)
}

/// Residual of the functional change-of-variable identity
/// `F(t,S_t) = F(0,S_0) + ∫DF ds + CRS_n + (1/p!) Σ ∇_ω^p F (ΔS)^p`.
pub fn functional_change_of_variable_residual(
    func: &CylindricalFunctional,
    path: &SampledPath,
    scheme: Scheme,
    p: u32,
    levels: (u32, u32),
    eval_times: &[f64],
    guard: GuardMode,
) -> Result<FunctionalProfile> {
    functional_profile(func, path, scheme, p, levels, eval_times, guard, true)
}

/// lhs/rhs of the p-th variation identity for t ↦ F(t, S_t).
#[derive(Debug, Clone, Serialize)]
pub struct IsometryLevel {
    pub level: u32,
    /// p-th variation sums of the image path F(·, S)
    pub lhs: Vec<f64>,
    /// Stieltjes sums of |∇_ω F|^p against the level's variation atoms
    pub rhs: Vec<f64>,
    /// sup over eval times of |lhs - rhs|
    pub gap: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct IsometryReport {
    pub p: u32,
    pub eval_times: Vec<f64>,
    pub levels: Vec<IsometryLevel>,
    /// Hölder-exponent constraint of the identity, recorded as metadata only
    pub alpha_threshold: f64,
}

/// Compares the p-th variation of F(·, S) with the |∇_ω F|^p-weighted
/// variation of S, level by level.
pub fn isometry_check(
    func: &CylindricalFunctional,
    path: &SampledPath,
    scheme: Scheme,
    p: u32,
    levels: (u32, u32),
    eval_times: &[f64],
    guard: GuardMode,
) -> Result<IsometryReport> {
    if p < 2 || p % 2 != 0 {
        return Err(Error::OddOrder(p as usize));
    }
    let bound = func.on_path(path)?;
    let seq = PartitionSequence::new(scheme, levels.0, levels.1)?;
    let mut out = Vec::new();
    for n in seq.levels() {
        let partition = seq.build(path, n, matches!(guard, GuardMode::Strict))?;
        let times = partition.times();
        let m = times.len() - 1;
        let mut lhs_prefix = Vec::with_capacity(m + 1);
        let mut rhs_prefix = Vec::with_capacity(m + 1);
        lhs_prefix.push(0.0);
        rhs_prefix.push(0.0);
        let mut lhs = 0.0;
        let mut rhs = 0.0;
        let mut prev_val = bound.value(times[0]);
        for j in 0..m {
            let next_val = bound.value(times[j + 1]);
            lhs += (next_val - prev_val).abs().powi(p as i32);
            let grad = bound.vertical_at(1, times[j]);
            let delta = path.value_at(0, times[j + 1]) - path.value_at(0, times[j]);
            rhs += grad.abs().powi(p as i32) * delta.abs().powi(p as i32);
            lhs_prefix.push(lhs);
            rhs_prefix.push(rhs);
            prev_val = next_val;
        }
        let lefts = &times[..m];
        let at = |prefix: &[f64], t: f64| prefix[lefts.partition_point(|&tj| tj <= t)];
        let lhs_vals: Vec<f64> = eval_times.iter().map(|&t| at(&lhs_prefix, t)).collect();
        let rhs_vals: Vec<f64> = eval_times.iter().map(|&t| at(&rhs_prefix, t)).collect();
        let gap = lhs_vals
            .iter()
            .zip(&rhs_vals)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        out.push(IsometryLevel { level: n, lhs: lhs_vals, rhs: rhs_vals, gap });
    }
    let p_f = p as f64;
    Ok(IsometryReport {
        p,
        eval_times: eval_times.to_vec(),
        levels: out,
        alpha_threshold: ((1.0 + 4.0 / p_f).sqrt() - 1.0) / 2.0,
    })
}

/// One level of the rough-smooth split X = X(0) + A + M.
#[derive(Debug, Clone, Serialize)]
pub struct DecompositionLevel {
    pub level: u32,
    /// compensated-sum component M_n at the eval times
    pub m_values: Vec<f64>,
    /// remainder A_n = F(·,S) - F(0,S_0) - M_n
    pub a_values: Vec<f64>,
    /// p-th variation sums of A_n along the level's partition
    pub a_pvar: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DecompositionReport {
    pub p: u32,
    pub eval_times: Vec<f64>,
    pub levels: Vec<DecompositionLevel>,
    /// proxy for strictly increasing [S]^p: positive increments at every
    /// level and no geometric collapse of the totals across levels
    pub variation_strictly_increasing: bool,
    pub min_variation_increment: f64,
}

/// Splits F(·, S) into the compensated-sum integral M and the residual A,
/// reporting the p-th variation of A along each level.
pub fn rough_smooth_decompose(
    func: &CylindricalFunctional,
    path: &SampledPath,
    scheme: Scheme,
    p: u32,
    levels: (u32, u32),
    eval_times: &[f64],
    guard: GuardMode,
) -> Result<DecompositionReport> {
    if p < 2 || p % 2 != 0 {
        return Err(Error::OddOrder(p as usize));
    }
    let bound = func.on_path(path)?;
    let seq = PartitionSequence::new(scheme, levels.0, levels.1)?;
    let f0 = bound.value(0.0);
    let mut out = Vec::new();
    let mut level_totals = Vec::new();
    let mut min_increment = f64::INFINITY;
    for n in seq.levels() {
        let partition = seq.build(path, n, matches!(guard, GuardMode::Strict))?;
        let times = partition.times().to_vec();
        let m = times.len() - 1;
        let sums = functional_level_sums(&bound, times.clone(), p);
        let m_vals: Vec<f64> = eval_times.iter().map(|&t| sums.crs_at(&bound, p, t)).collect();
        let a_vals: Vec<f64> = eval_times
            .iter()
            .zip(&m_vals)
            .map(|(&t, &mv)| bound.value(t) - f0 - mv)
            .collect();

        // A at the partition points, then its p-th variation sums
        let mut a_prefix = Vec::with_capacity(m + 1);
        a_prefix.push(0.0);
        let mut acc = 0.0;
        let mut prev_a = 0.0; // A(0) = 0
        for j in 1..=m {
            let a_j = bound.value(times[j]) - f0 - sums.crs_prefix[j];
            acc += (a_j - prev_a).abs().powi(p as i32);
            a_prefix.push(acc);
            prev_a = a_j;
        }
        let lefts = &times[..m];
        let a_pvar: Vec<f64> = eval_times
            .iter()
            .map(|&t| a_prefix[lefts.partition_point(|&tj| tj <= t)])
            .collect();

        // variation of S itself for the strict-increase diagnostic
        let mut spath_prefix = Vec::with_capacity(m + 1);
        spath_prefix.push(0.0);
        let mut acc = 0.0;
        for w in times.windows(2) {
            let d = path.value_at(0, w[1]) - path.value_at(0, w[0]);
            acc += d.abs().powi(p as i32);
            spath_prefix.push(acc);
        }
        let svar_at: Vec<f64> = eval_times
            .iter()
            .map(|&t| spath_prefix[lefts.partition_point(|&tj| tj <= t)])
            .collect();
        for w in svar_at.windows(2) {
            min_increment = min_increment.min(w[1] - w[0]);
        }
        level_totals.push(*spath_prefix.last().unwrap());

        out.push(DecompositionLevel { level: n, m_values: m_vals, a_values: a_vals, a_pvar });
    }
    // geometric collapse of the totals signals [S]^p -> 0, which breaks the
    // uniqueness precondition even though every pre-limit sum is positive
    let collapsing =
        level_totals.len() >= 2 && *level_totals.last().unwrap() < 0.25 * level_totals[0];
    Ok(DecompositionReport {
        p,
        eval_times: eval_times.to_vec(),
        levels: out,
        variation_strictly_increasing: min_increment > 0.0 && !collapsing,
        min_variation_increment: min_increment,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::compensated_integral;
    use crate::ensemble::{median, run_ensemble};
    use crate::fbm::generate_fbm;
    use crate::functions::VectorFunction;
    use crate::paths::{generate_analytic, AnalyticKind};

    fn bm(seed: u64, steps: usize) -> SampledPath {
        generate_fbm(0.5, 1.0, steps, seed, 1).unwrap()
    }

    #[test]
    fn dupire_derivatives_match_limit_definitions() {
        // FD through the stopping/extension semantics, not the closed forms
        let path = bm(42, 1 << 12);
        let func = CylindricalFunctional::new(
            vec![GTerm::new(1.0, 0, 2, 0), GTerm::new(0.5, 1, 1, 1), GTerm::new(-0.3, 0, 0, 2)],
            ScalarFunction::Sin { amp: 1.0, freq: 1.0 },
        );
        let bound = func.on_path(&path).unwrap();
        let h = 1e-6;
        for &t in &[0.21, 0.5, 0.83] {
            let fd_h = (bound.value_extended(t, h) - bound.value(t)) / h;
            let exact_h = bound.horizontal_at(t);
            assert!(
                (fd_h - exact_h).abs() <= 1e-6 * (1.0 + exact_h.abs()),
                "horizontal at {t}: {fd_h} vs {exact_h}"
            );
            let fd_v = (bound.value_bumped(t, h) - bound.value_bumped(t, -h)) / (2.0 * h);
            let exact_v = bound.vertical_at(1, t);
            assert!(
                (fd_v - exact_v).abs() <= 1e-6 * (1.0 + exact_v.abs()),
                "vertical at {t}: {fd_v} vs {exact_v}"
            );
            let fd_v2 = (bound.value_bumped(t, h) - 2.0 * bound.value(t)
                + bound.value_bumped(t, -h))
                / (h * h);
            let exact_v2 = bound.vertical_at(2, t);
            assert!(
                (fd_v2 - exact_v2).abs() <= 1e-4 * (1.0 + exact_v2.abs()),
                "second vertical at {t}: {fd_v2} vs {exact_v2}"
            );
        }
    }

    #[test]
    fn endpoint_functional_telescopes() {
        let path = bm(7, 1 << 10);
        let func = CylindricalFunctional::endpoint();
        let eval = [0.33, 0.7, 1.0];
        let prof = functional_compensated_integral(
            &func,
            &path,
            Scheme::UniformDyadic,
            2,
            (2, 8),
            &eval,
            GuardMode::Strict,
        )
        .unwrap();
        for l in &prof.levels {
            for (&t, &v) in eval.iter().zip(&l.values) {
                let want = path.value_at(0, t) - path.value_at(0, 0.0);
                assert!((v - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn endpoint_square_reduces_to_state_function() {
        // F(t,ω)=ω(t)^2 must reproduce the compensated sums of f(x)=x^2
        let path = bm(21, 1 << 12);
        let func = CylindricalFunctional::endpoint_power(2);
        let eval = [0.5, 1.0];
        let fprof = functional_compensated_integral(
            &func,
            &path,
            Scheme::UniformDyadic,
            2,
            (4, 10),
            &eval,
            GuardMode::Strict,
        )
        .unwrap();
        let f = VectorFunction::Scalar1d(ScalarFunction::Monomial { m: 2 });
        let sprof = compensated_integral(
            &f,
            &path,
            Scheme::UniformDyadic,
            2,
            (4, 10),
            &eval,
            GuardMode::Strict,
        )
        .unwrap();
        for (fl, sl) in fprof.levels.iter().zip(&sprof.levels) {
            for (a, b) in fl.values.iter().zip(&sl.values) {
                assert!((a - b).abs() < 1e-10 * (1.0 + b.abs()));
            }
        }
    }

    #[test]
    fn pure_running_integral_has_zero_compensated_sums() {
        let path = bm(9, 1 << 10);
        let func = CylindricalFunctional::running_integral(ScalarFunction::Identity);
        let prof = functional_compensated_integral(
            &func,
            &path,
            Scheme::UniformDyadic,
            2,
            (2, 9),
            &[0.4, 1.0],
            GuardMode::Strict,
        )
        .unwrap();
        for l in &prof.levels {
            for v in &l.values {
                assert_eq!(*v, 0.0);
            }
        }
    }

    #[test]
    fn running_integral_residual_is_quadrature_exact() {
        // F = ∫ h(ω) ds: the value and the DF integral are the same trapezoid
        let path = bm(11, 1 << 10);
        let func = CylindricalFunctional::running_integral(ScalarFunction::Monomial { m: 2 });
        let prof = functional_change_of_variable_residual(
            &func,
            &path,
            Scheme::UniformDyadic,
            2,
            (3, 8),
            &[0.37, 0.8, 1.0],
            GuardMode::Strict,
        )
        .unwrap();
        for l in &prof.levels {
            for r in l.residuals.as_ref().unwrap() {
                assert!(r.abs() < 1e-12, "residual {r}");
            }
        }
    }

    #[test]
    fn endpoint_square_residual_vanishes_at_horizon() {
        // algebraic telescoping: quadratic g, increments compensated at order
        // two, evaluated at the final time
        let path = bm(33, 1 << 12);
        let func = CylindricalFunctional::endpoint_power(2);
        let prof = functional_change_of_variable_residual(
            &func,
            &path,
            Scheme::UniformDyadic,
            2,
            (4, 12),
            &[1.0],
            GuardMode::Strict,
        )
        .unwrap();
        for l in &prof.levels {
            let r = l.residuals.as_ref().unwrap()[0];
            assert!(r.abs() < 1e-11, "level {}: {r}", l.level);
        }
    }

    #[test]
    fn time_times_endpoint_on_line_leaves_left_rule_error() {
        let line =
            generate_analytic(&AnalyticKind::Line { slope: 1.0, intercept: 0.0 }, 1.0, 1 << 12)
                .unwrap();
        let func = CylindricalFunctional::state_only(vec![GTerm::new(1.0, 1, 1, 0)]);
        let prof = functional_change_of_variable_residual(
            &func,
            &line,
            Scheme::UniformDyadic,
            2,
            (2, 10),
            &[1.0],
            GuardMode::Strict,
        )
        .unwrap();
        let res: Vec<f64> =
            prof.levels.iter().map(|l| l.residuals.as_ref().unwrap()[0].abs()).collect();
        for w in res.windows(2) {
            assert!(w[1] < 0.6 * w[0] + 1e-13, "{res:?}");
        }
        assert!(*res.last().unwrap() < 1e-3);
    }

    #[test]
    fn functional_residual_small_for_square_on_brownian() {
        let meds = run_ensemble(8, 900, |_, seed| {
            let path = bm(seed, 1 << 14);
            let func = CylindricalFunctional::endpoint_power(2);
            let prof = functional_change_of_variable_residual(
                &func,
                &path,
                Scheme::UniformDyadic,
                2,
                (12, 12),
                &[0.5, 1.0],
                GuardMode::Strict,
            )
            .unwrap();
            prof.levels[0]
                .residuals
                .as_ref()
                .unwrap()
                .iter()
                .map(|r| r.abs())
                .fold(0.0, f64::max)
        });
        assert!(median(&meds) < 0.01, "residuals {meds:?}");
    }

    #[test]
    fn isometry_for_endpoint_is_exact() {
        let path = bm(3, 1 << 10);
        let func = CylindricalFunctional::endpoint();
        let eval = [0.25, 0.6, 1.0];
        let rep = isometry_check(
            &func,
            &path,
            Scheme::UniformDyadic,
            2,
            (3, 8),
            &eval,
            GuardMode::Strict,
        )
        .unwrap();
        for l in &rep.levels {
            assert!(l.gap < 1e-14, "level {} gap {}", l.level, l.gap);
        }
    }

    #[test]
    fn isometry_scaling_is_exact_for_power_of_two() {
        // F -> 2F scales both sides by 2^p bit-exactly
        let path = bm(13, 1 << 10);
        let func = CylindricalFunctional::endpoint_power(2);
        let scaled = func.scale(2.0);
        let eval = [0.5, 1.0];
        let a =
            isometry_check(&func, &path, Scheme::UniformDyadic, 2, (4, 7), &eval, GuardMode::Strict)
                .unwrap();
        let b = isometry_check(
            &scaled,
            &path,
            Scheme::UniformDyadic,
            2,
            (4, 7),
            &eval,
            GuardMode::Strict,
        )
        .unwrap();
        for (la, lb) in a.levels.iter().zip(&b.levels) {
            for (va, vb) in la.lhs.iter().zip(&lb.lhs) {
                assert_eq!(*vb, 4.0 * *va);
            }
            for (va, vb) in la.rhs.iter().zip(&lb.rhs) {
                assert_eq!(*vb, 4.0 * *va);
            }
        }
    }

    #[test]
    fn isometry_gap_small_for_square_of_brownian() {
        let ratios = run_ensemble(8, 1900, |_, seed| {
            let path = bm(seed, 1 << 14);
            let func = CylindricalFunctional::endpoint_power(2);
            let rep = isometry_check(
                &func,
                &path,
                Scheme::UniformDyadic,
                2,
                (12, 12),
                &[1.0],
                GuardMode::Strict,
            )
            .unwrap();
            let l = &rep.levels[0];
            l.gap / l.rhs[0].max(1e-12)
        });
        assert!(median(&ratios) < 0.05, "gap ratios {ratios:?}");
        let path = bm(5, 1 << 12);
        let rep = isometry_check(
            &CylindricalFunctional::endpoint_power(2),
            &path,
            Scheme::UniformDyadic,
            2,
            (4, 12),
            &[1.0],
            GuardMode::Strict,
        )
        .unwrap();
        assert!((rep.alpha_threshold - ((1.0f64 + 2.0).sqrt() - 1.0) / 2.0).abs() < 1e-15);
    }

    #[test]
    fn decomposition_of_endpoint_is_trivial() {
        let path = bm(17, 1 << 10);
        let func = CylindricalFunctional::endpoint();
        let rep = rough_smooth_decompose(
            &func,
            &path,
            Scheme::UniformDyadic,
            2,
            (3, 8),
            &[0.4, 1.0],
            GuardMode::Strict,
        )
        .unwrap();
        for l in &rep.levels {
            for a in &l.a_values {
                assert!(a.abs() < 1e-12);
            }
            for v in &l.a_pvar {
                assert!(v.abs() < 1e-24);
            }
        }
    }

    #[test]
    fn decomposition_of_square_recovers_quadratic_variation() {
        let finals = run_ensemble(8, 77, |_, seed| {
            let path = bm(seed, 1 << 14);
            let func = CylindricalFunctional::endpoint_power(2);
            let rep = rough_smooth_decompose(
                &func,
                &path,
                Scheme::UniformDyadic,
                2,
                (8, 12),
                &[1.0],
                GuardMode::Strict,
            )
            .unwrap();
            // A_n(T) is the level-n quadratic variation estimate
            let a_final = rep.levels.last().unwrap().a_values[0];
            // p-th variation of A must decrease across levels
            let pvars: Vec<f64> = rep.levels.iter().map(|l| l.a_pvar[0]).collect();
            for w in pvars.windows(2) {
                assert!(w[1] < w[0], "a_pvar not decreasing: {pvars:?}");
            }
            assert!(rep.variation_strictly_increasing);
            a_final
        });
        let med = median(&finals);
        assert!((med - 1.0).abs() < 0.07, "median A(T) {med}");
    }

    #[test]
    fn decomposition_flags_degenerate_variation_on_line() {
        let line =
            generate_analytic(&AnalyticKind::Line { slope: 1.0, intercept: 0.0 }, 1.0, 1 << 12)
                .unwrap();
        let func = CylindricalFunctional::endpoint_power(2);
        let rep = rough_smooth_decompose(
            &func,
            &line,
            Scheme::UniformDyadic,
            2,
            (4, 10),
            &[0.5, 1.0],
            GuardMode::Strict,
        )
        .unwrap();
        assert!(!rep.variation_strictly_increasing);
    }

    #[test]
    fn lebesgue_scheme_sets_mesh_warning() {
        let path = bm(2, 1 << 12);
        let func = CylindricalFunctional::endpoint_power(2);
        let prof = functional_compensated_integral(
            &func,
            &path,
            Scheme::LebesgueDyadic,
            2,
            (2, 3),
            &[1.0],
            GuardMode::Strict,
        )
        .unwrap();
        assert!(prof.mesh_warning);
        let uprof = functional_compensated_integral(
            &func,
            &path,
            Scheme::UniformDyadic,
            2,
            (2, 3),
            &[1.0],
            GuardMode::Strict,
        )
        .unwrap();
        assert!(!uprof.mesh_warning);
    }
}
