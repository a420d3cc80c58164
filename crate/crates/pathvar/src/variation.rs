//! p-th variation along partition sequences.
//!
//! For a level-n partition the cumulative sum at time t is
//! `Σ_{t_j <= t} |S(t_{j+1}) - S(t_j)|^p`, taken over intervals whose *left*
//! endpoint has been reached; the measure-level atom sits at t_j. Tensor
//! variation replaces the p-th power of the increment by its p-fold symmetric
//! power, and odd p gives signed sums along Lebesgue partitions.

use crate::error::{Error, Result};
use crate::partitions::{crossings_by_cell, Partition, PartitionSequence, Scheme};
use crate::paths::SampledPath;
use crate::tensors::SymTensor;
use serde::Serialize;

/// Whether the Lebesgue resolution guard aborts or merely flags.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GuardMode {
    Strict,
    Relaxed,
}

/// Cumulative variation of one refinement level.
#[derive(Debug, Clone)]
pub struct LevelProfile {
    pub level: u32,
    /// false when the Lebesgue resolution guard failed (relaxed mode)
    pub resolved: bool,
    /// partition times t_0..t_m
    pub knot_times: Vec<f64>,
    /// prefix[j] = Σ_{i<j} inc_i (so prefix[0]=0 and prefix[m] is the total)
    pub prefix: Vec<f64>,
    /// cumulative value at each requested eval time
    pub eval_values: Vec<f64>,
}

impl LevelProfile {
    /// Σ over intervals with left endpoint <= t of the stored increments.
    pub fn value_at(&self, t: f64) -> f64 {
        let lefts = &self.knot_times[..self.knot_times.len() - 1];
        let count = lefts.partition_point(|&tj| tj <= t);
        self.prefix[count]
    }

    /// Piecewise-linear monotone interpolation of the cumulative sums between
    /// partition points; additive in (s, t) by construction.
    pub fn cumulative_interp(&self, t: f64) -> f64 {
        interp_monotone(&self.knot_times, &self.prefix, t)
    }
}

fn interp_monotone(times: &[f64], values: &[f64], t: f64) -> f64 {
    if t <= times[0] {
        return values[0];
    }
    let m = times.len();
    if t >= times[m - 1] {
        return values[m - 1];
    }
    let j = times.partition_point(|&tj| tj <= t) - 1;
    let (t0, t1) = (times[j], times[j + 1]);
    let (v0, v1) = (values[j], values[j + 1]);
    v0 + (t - t0) / (t1 - t0) * (v1 - v0)
}

/// Per-level cumulative p-th variation with convergence metadata.
#[derive(Debug, Clone)]
pub struct VariationProfile {
    pub p: u32,
    pub scheme: Scheme,
    pub eval_times: Vec<f64>,
    pub levels: Vec<LevelProfile>,
}

impl VariationProfile {
    pub fn level(&self, n: u32) -> Option<&LevelProfile> {
        self.levels.iter().find(|l| l.level == n)
    }

    pub fn finest(&self) -> &LevelProfile {
        self.levels.last().expect("profile has at least one level")
    }

    /// JSON report per the declared interface.
    pub fn to_json(&self) -> serde_json::Value {
        let levels: Vec<serde_json::Value> = self
            .levels
            .iter()
            .map(|l| {
                serde_json::json!({
                    "n": l.level,
                    "resolved": l.resolved,
                    "times": self.eval_times,
                    "values": l.eval_values,
                })
            })
            .collect();
        let diag = convergence_diagnostic(self).ok();
        serde_json::json!({
            "p": self.p,
            "scheme": self.scheme,
            "levels": levels,
            "diagnostics": diag.map(|d| serde_json::json!({
                "cauchy": d.cauchy,
                "max_jump": d.max_jump,
            })),
        })
    }
}

fn validate_eval_times(eval_times: &[f64], horizon: f64) -> Result<()> {
    if eval_times.is_empty() {
        return Err(Error::InvalidParameter("need at least one eval time".into()));
    }
    for &t in eval_times {
        if !(0.0..=horizon * (1.0 + 1e-12)).contains(&t) {
            return Err(Error::InvalidParameter(format!(
                "eval time {t} outside [0, {horizon}]"
            )));
        }
    }
    Ok(())
}

fn scalar_increments(path: &SampledPath, partition: &Partition) -> Vec<f64> {
    // Lebesgue partitions carry exact grid values; fall back to interpolation
    match partition.values() {
        Some(vals) => vals.windows(2).map(|w| w[1] - w[0]).collect(),
        None => {
            let times = partition.times();
            times
                .windows(2)
                .map(|w| path.value_at(0, w[1]) - path.value_at(0, w[0]))
                .collect()
        }
    }
}

fn level_profile_from_increments(
    partition: &Partition,
    increments: impl Iterator<Item = f64>,
    eval_times: &[f64],
) -> LevelProfile {
    let times = partition.times().to_vec();
    let mut prefix = Vec::with_capacity(times.len());
    prefix.push(0.0);
    let mut acc = 0.0;
    for inc in increments {
        acc += inc;
        prefix.push(acc);
    }
    debug_assert_eq!(prefix.len(), times.len());
    let tmp = LevelProfile {
        level: partition.level().unwrap_or(0),
        resolved: partition.resolved(),
        knot_times: times,
        prefix,
        eval_values: Vec::new(),
    };
    let eval_values = eval_times.iter().map(|&t| tmp.value_at(t)).collect();
    LevelProfile { eval_values, ..tmp }
}

/// Scalar p-th variation (p even) along the given scheme.
pub fn pth_variation_scalar(
    path: &SampledPath,
    scheme: Scheme,
    p: u32,
    levels: (u32, u32),
    eval_times: &[f64],
    guard: GuardMode,
) -> Result<VariationProfile> {
    if p < 2 || p % 2 != 0 {
        return Err(Error::OddOrder(p as usize));
    }
    path.scalar()?;
    validate_eval_times(eval_times, path.horizon())?;
    let seq = PartitionSequence::new(scheme, levels.0, levels.1)?;
    let mut out = Vec::new();
    for n in seq.levels() {
        let partition = seq.build(path, n, matches!(guard, GuardMode::Strict))?;
        let incs = scalar_increments(path, &partition);
        let profile = level_profile_from_increments(
            &partition,
            incs.iter().map(|d| d.abs().powi(p as i32)),
            eval_times,
        );
        out.push(profile);
    }
    Ok(VariationProfile { p, scheme, eval_times: eval_times.to_vec(), levels: out })
}

/// One level of tensor-valued variation.
#[derive(Debug, Clone)]
pub struct TensorLevelProfile {
    pub level: u32,
    pub knot_times: Vec<f64>,
    /// prefix[j] = Σ_{i<j} (ΔS_i)^{⊗p}
    pub prefix: Vec<SymTensor>,
    pub eval_values: Vec<SymTensor>,
}

impl TensorLevelProfile {
    pub fn value_at(&self, t: f64) -> SymTensor {
        let lefts = &self.knot_times[..self.knot_times.len() - 1];
        let count = lefts.partition_point(|&tj| tj <= t);
        self.prefix[count].clone()
    }
}

#[derive(Debug, Clone)]
pub struct TensorVariationProfile {
    pub p: u32,
    pub dim: usize,
    pub eval_times: Vec<f64>,
    pub levels: Vec<TensorLevelProfile>,
}

impl TensorVariationProfile {
    pub fn finest(&self) -> &TensorLevelProfile {
        self.levels.last().expect("profile has at least one level")
    }
}

/// Tensor-valued p-th variation along uniform dyadic partitions. Lebesgue
/// partitions are only defined for scalar paths, so no scheme choice here.
pub fn pth_variation_tensor(
    path: &SampledPath,
    p: u32,
    levels: (u32, u32),
    eval_times: &[f64],
) -> Result<TensorVariationProfile> {
    if p < 2 || p % 2 != 0 {
        return Err(Error::OddOrder(p as usize));
    }
    validate_eval_times(eval_times, path.horizon())?;
    let d = path.dim();
    let seq = PartitionSequence::new(Scheme::UniformDyadic, levels.0, levels.1)?;
    let mut out = Vec::new();
    for n in seq.levels() {
        let partition = seq.build(path, n, true)?;
        let times = partition.times().to_vec();
        let mut prefix = Vec::with_capacity(times.len());
        let mut acc = SymTensor::zero(d, p as usize);
        prefix.push(acc.clone());
        let mut delta = vec![0.0; d];
        for w in times.windows(2) {
            for (c, dv) in delta.iter_mut().enumerate() {
                *dv = path.value_at(c, w[1]) - path.value_at(c, w[0]);
            }
            acc.add_assign(&SymTensor::sym_power(&delta, p as usize));
            prefix.push(acc.clone());
        }
        let tmp = TensorLevelProfile {
            level: n,
            knot_times: times,
            prefix,
            eval_values: Vec::new(),
        };
        let eval_values = eval_times.iter().map(|&t| tmp.value_at(t)).collect();
        out.push(TensorLevelProfile { eval_values, ..tmp });
    }
    Ok(TensorVariationProfile { p, dim: d, eval_times: eval_times.to_vec(), levels: out })
}

/// Signed-sum diagnostics from the appendix-style crossing bound.
#[derive(Debug, Clone, Serialize)]
pub struct SignedLevelDiagnostics {
    pub level: u32,
    /// 2^{-np} (#active cells) + boundary-leg contributions
    pub crossing_bound: f64,
    /// |signed sum - crossing-count reconstruction| at the final time
    pub identity_gap: f64,
}

#[derive(Debug, Clone)]
pub struct SignedVariationProfile {
    pub p: u32,
    pub eval_times: Vec<f64>,
    pub levels: Vec<LevelProfile>,
    pub diagnostics: Vec<SignedLevelDiagnostics>,
}

/// Signed p-th sums (p odd >= 3) along Lebesgue partitions.
pub fn signed_pth_sums(
    path: &SampledPath,
    p: u32,
    levels: (u32, u32),
    eval_times: &[f64],
    guard: GuardMode,
) -> Result<SignedVariationProfile> {
    if p < 3 || p % 2 == 0 {
        return Err(Error::EvenOrder(p as usize));
    }
    validate_eval_times(eval_times, path.horizon())?;
    let seq = PartitionSequence::new(Scheme::LebesgueDyadic, levels.0, levels.1)?;
    let mut out = Vec::new();
    let mut diags = Vec::new();
    for n in seq.levels() {
        let partition = seq.build(path, n, matches!(guard, GuardMode::Strict))?;
        let incs = scalar_increments(path, &partition);
        let profile = level_profile_from_increments(
            &partition,
            incs.iter().map(|d| d.powi(p as i32)),
            eval_times,
        );

        // crossing-count reconstruction of the final value: each up leg adds
        // +h^p, each down leg -h^p, plus the fractional first/last legs
        let t_end = path.horizon();
        let table = crossings_by_cell(&partition, t_end)?;
        let h_p = 0.5f64.powi((n * p) as i32);
        let mut active = 0u64;
        let mut net = 0i64;
        for k in table.active_cells() {
            active += 1;
            net += table.up(k) as i64 - table.down(k) as i64;
        }
        let scale = (1u64 << n) as f64;
        let mut boundary = 0.0;
        let mut boundary_bound = 0.0;
        let vals = partition.values().expect("lebesgue kind");
        let on_grid = |v: f64| (v * scale) == (v * scale).floor();
        if vals.len() >= 2 && !on_grid(vals[0]) {
            boundary += (vals[1] - vals[0]).powi(p as i32);
            boundary_bound += (vals[1] - vals[0]).abs().powi(p as i32);
        }
        if vals.len() >= 2 && !on_grid(vals[vals.len() - 1]) {
            let d = vals[vals.len() - 1] - vals[vals.len() - 2];
            boundary += d.powi(p as i32);
            boundary_bound += d.abs().powi(p as i32);
        }
        let reconstructed = h_p * net as f64 + boundary;
        let total = *profile.prefix.last().unwrap();
        diags.push(SignedLevelDiagnostics {
            level: n,
            crossing_bound: h_p * active as f64 + boundary_bound,
            identity_gap: (total - reconstructed).abs(),
        });
        out.push(profile);
    }
    Ok(SignedVariationProfile { p, eval_times: eval_times.to_vec(), levels: out, diagnostics: diags })
}

/// Cauchy-difference and atom-proxy diagnostics across levels.
#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReport {
    /// sup over eval times of |value_n - value_{n+1}| for consecutive levels
    pub cauchy: Vec<f64>,
    /// finest-level values at the eval times (no extrapolation)
    pub limit_estimate: Vec<f64>,
    /// largest jump of the finest cumulative between adjacent eval times
    pub max_jump: f64,
}

pub fn convergence_diagnostic(profile: &VariationProfile) -> Result<ConvergenceReport> {
    if profile.levels.len() < 2 {
        return Err(Error::NotEnoughLevels(profile.levels.len()));
    }
    let mut cauchy = Vec::new();
    for pair in profile.levels.windows(2) {
        let sup = pair[0]
            .eval_values
            .iter()
            .zip(&pair[1].eval_values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        cauchy.push(sup);
    }
    let finest = profile.finest();
    let max_jump = finest
        .eval_values
        .windows(2)
        .map(|w| (w[1] - w[0]).abs())
        .fold(0.0, f64::max);
    Ok(ConvergenceReport {
        cauchy,
        limit_estimate: finest.eval_values.clone(),
        max_jump,
    })
}

/// Evenly spaced eval times 0, T/k, ..., T.
pub fn uniform_eval_times(horizon: f64, count: usize) -> Vec<f64> {
    let k = count.max(2) - 1;
    (0..=k).map(|i| horizon * i as f64 / k as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::{median, run_ensemble};
    use crate::fbm::generate_fbm;
    use crate::paths::{generate_analytic, AnalyticKind};

    fn line() -> SampledPath {
        generate_analytic(&AnalyticKind::Line { slope: 1.0, intercept: 0.0 }, 1.0, 1 << 12)
            .unwrap()
    }

    #[test]
    fn line_quadratic_variation_halves() {
        let s = line();
        let prof = pth_variation_scalar(
            &s,
            Scheme::UniformDyadic,
            2,
            (1, 6),
            &[0.5, 1.0],
            GuardMode::Strict,
        )
        .unwrap();
        for l in &prof.levels {
            let expect = 0.5f64.powi(l.level as i32);
            let got = l.eval_values[1];
            assert!((got - expect).abs() < 1e-12, "level {}: {got}", l.level);
        }
    }

    #[test]
    fn odd_p_is_rejected_by_scalar_op() {
        let s = line();
        assert!(matches!(
            pth_variation_scalar(&s, Scheme::UniformDyadic, 3, (1, 2), &[1.0], GuardMode::Strict),
            Err(Error::OddOrder(3))
        ));
    }

    #[test]
    fn cumulative_is_monotone_in_time() {
        let path = generate_fbm(0.5, 1.0, 1 << 12, 3, 1).unwrap();
        let eval = uniform_eval_times(1.0, 21);
        let prof = pth_variation_scalar(&path, Scheme::UniformDyadic, 2, (2, 8), &eval, GuardMode::Strict)
            .unwrap();
        for l in &prof.levels {
            for w in l.eval_values.windows(2) {
                assert!(w[1] >= w[0]);
            }
        }
    }

    #[test]
    fn brownian_quadratic_variation_near_t() {
        let vals = run_ensemble(16, 100, |_, seed| {
            let path = generate_fbm(0.5, 1.0, 1 << 14, seed, 1).unwrap();
            let prof = pth_variation_scalar(
                &path,
                Scheme::UniformDyadic,
                2,
                (12, 12),
                &[1.0],
                GuardMode::Strict,
            )
            .unwrap();
            prof.finest().eval_values[0]
        });
        let med = median(&vals);
        assert!((med - 1.0).abs() < 0.08, "median QV {med}");
    }

    #[test]
    fn higher_order_variation_of_bm_vanishes() {
        // q > p forces the q-th sums of a Brownian fixture to zero
        let path = generate_fbm(0.5, 1.0, 1 << 14, 8, 1).unwrap();
        let prof = pth_variation_scalar(
            &path,
            Scheme::UniformDyadic,
            4,
            (6, 13),
            &[1.0],
            GuardMode::Strict,
        )
        .unwrap();
        let totals: Vec<f64> = prof.levels.iter().map(|l| l.eval_values[0]).collect();
        for w in totals.windows(2) {
            assert!(w[1] < w[0], "quartic sums should strictly decrease: {totals:?}");
        }
        assert!(*totals.last().unwrap() < 1e-3);
    }

    #[test]
    fn tensor_variation_of_plane_curve() {
        // S = (t, 2t): increments are rank-one, level-n tensor is
        // 2^-n [[1,2],[2,4]]
        let n_samples = 1 << 10;
        let xs: Vec<f64> = (0..=n_samples).map(|i| i as f64 / n_samples as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x).collect();
        let path = SampledPath::new(1.0, vec![xs, ys]).unwrap();
        let prof = pth_variation_tensor(&path, 2, (3, 6), &[1.0]).unwrap();
        for l in &prof.levels {
            let t = &l.eval_values[0];
            let scale = 0.5f64.powi(l.level as i32);
            assert!((t.coeff(&[2, 0]) - scale).abs() < 1e-12);
            assert!((t.coeff(&[1, 1]) - 2.0 * scale).abs() < 1e-12);
            assert!((t.coeff(&[0, 2]) - 4.0 * scale).abs() < 1e-12);
        }
    }

    #[test]
    fn tensor_scalar_consistency() {
        // pairing with v^{⊗p} reproduces the scalar variation of v·S
        let path = generate_fbm(0.5, 1.0, 1 << 10, 21, 2).unwrap();
        let v = [0.8, -0.6];
        let eval = [0.25, 0.5, 1.0];
        let tensor = pth_variation_tensor(&path, 2, (3, 7), &eval).unwrap();
        let projected = path.project(&v).unwrap();
        let scalar = pth_variation_scalar(
            &projected,
            Scheme::UniformDyadic,
            2,
            (3, 7),
            &eval,
            GuardMode::Strict,
        )
        .unwrap();
        let vp = SymTensor::sym_power(&v, 2);
        for (tl, sl) in tensor.levels.iter().zip(&scalar.levels) {
            for (tv, sv) in tl.eval_values.iter().zip(&sl.eval_values) {
                let paired = tv.pairing(&vp).unwrap();
                assert!(
                    (paired - sv).abs() <= 1e-12 * (1.0 + sv.abs()),
                    "level {}: {paired} vs {sv}",
                    tl.level
                );
            }
        }
    }

    #[test]
    fn tensor_variation_increments_are_positive() {
        // increments of the 2-d quadratic variation tensor are positive in
        // the partial order; oracle: eigenvalues of the 2x2 matrix
        let path = generate_fbm(0.5, 1.0, 1 << 10, 44, 2).unwrap();
        let prof = pth_variation_tensor(&path, 2, (6, 6), &[0.3, 0.8]).unwrap();
        let l = &prof.levels[0];
        let inc = l.eval_values[1].sub(&l.eval_values[0]).unwrap();
        let check = inc.is_positive(256, 9).unwrap();
        assert!(check.nonneg, "witness {:?}", check.witness);
        let a = inc.coeff(&[2, 0]);
        let b = inc.coeff(&[1, 1]);
        let c = inc.coeff(&[0, 2]);
        // 2x2 symmetric PSD iff trace and determinant are nonnegative
        assert!(a >= 0.0 && c >= 0.0 && a * c - b * b >= -1e-15);
    }

    #[test]
    fn tensor_direction_panel_monotone() {
        let path = generate_fbm(0.5, 1.0, 1 << 10, 33, 2).unwrap();
        let eval = uniform_eval_times(1.0, 11);
        let prof = pth_variation_tensor(&path, 2, (4, 6), &eval).unwrap();
        let panel = [[1.0, 0.0], [0.0, 1.0], [0.7, 0.7], [0.6, -0.8]];
        for l in &prof.levels {
            for v in &panel {
                let vp = SymTensor::sym_power(v, 2);
                let series: Vec<f64> =
                    l.eval_values.iter().map(|t| t.pairing(&vp).unwrap()).collect();
                for w in series.windows(2) {
                    assert!(w[1] >= w[0] - 1e-15);
                }
            }
        }
    }

    #[test]
    fn monotone_path_signed_sums_decay() {
        let s = generate_analytic(&AnalyticKind::Line { slope: 1.0, intercept: 0.0 }, 1.0, 1 << 12)
            .unwrap();
        let prof = signed_pth_sums(&s, 3, (1, 5), &[1.0], GuardMode::Strict).unwrap();
        for l in &prof.levels {
            // all increments are +2^-n: value is 2^{-n(p-1)}
            let expect = 0.5f64.powi((2 * l.level) as i32);
            assert!((l.eval_values[0] - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn signed_sums_flip_sign_exactly() {
        let path = generate_fbm(0.5, 1.0, 1 << 12, 17, 1).unwrap();
        let flipped = SampledPath::new(
            1.0,
            vec![path.scalar().unwrap().iter().map(|v| -v).collect()],
        )
        .unwrap();
        let eval = [0.5, 1.0];
        let a = signed_pth_sums(&path, 3, (2, 4), &eval, GuardMode::Relaxed).unwrap();
        let b = signed_pth_sums(&flipped, 3, (2, 4), &eval, GuardMode::Relaxed).unwrap();
        for (la, lb) in a.levels.iter().zip(&b.levels) {
            for (va, vb) in la.eval_values.iter().zip(&lb.eval_values) {
                assert_eq!(*va, -*vb);
            }
        }
    }

    #[test]
    fn signed_sums_obey_crossing_bound_and_identity() {
        let path = generate_fbm(0.5, 1.0, 1 << 13, 29, 1).unwrap();
        let prof = signed_pth_sums(&path, 3, (2, 4), &[1.0], GuardMode::Strict).unwrap();
        for (l, d) in prof.levels.iter().zip(&prof.diagnostics) {
            let total = l.eval_values[0].abs();
            assert!(total <= d.crossing_bound + 1e-15, "level {}", l.level);
            assert!(d.identity_gap <= 1e-12 * (1.0 + total));
        }
    }

    #[test]
    fn even_p_rejected_for_signed_sums() {
        let s = line();
        assert!(matches!(
            signed_pth_sums(&s, 4, (1, 2), &[1.0], GuardMode::Strict),
            Err(Error::EvenOrder(4))
        ));
    }

    #[test]
    fn diagnostics_need_two_levels() {
        let s = line();
        let prof = pth_variation_scalar(&s, Scheme::UniformDyadic, 2, (3, 3), &[1.0], GuardMode::Strict)
            .unwrap();
        assert!(matches!(convergence_diagnostic(&prof), Err(Error::NotEnoughLevels(1))));
    }

    #[test]
    fn line_diagnostics_halve() {
        let s = line();
        let eval = uniform_eval_times(1.0, 11);
        let prof = pth_variation_scalar(&s, Scheme::UniformDyadic, 2, (2, 8), &eval, GuardMode::Strict)
            .unwrap();
        let d = convergence_diagnostic(&prof).unwrap();
        // limit is zero and sup-differences halve
        assert!(d.limit_estimate.iter().all(|v| *v < 5e-3));
        for w in d.cauchy.windows(2) {
            assert!((w[1] / w[0] - 0.5).abs() < 0.05);
        }
    }

    #[test]
    fn brownian_limit_estimate_tracks_t() {
        let path = generate_fbm(0.5, 1.0, 1 << 14, 58, 1).unwrap();
        let eval = uniform_eval_times(1.0, 11);
        let prof = pth_variation_scalar(&path, Scheme::UniformDyadic, 2, (8, 12), &eval, GuardMode::Strict)
            .unwrap();
        let d = convergence_diagnostic(&prof).unwrap();
        for (t, v) in eval.iter().zip(&d.limit_estimate) {
            assert!((v - t).abs() < 0.15, "t={t}: {v}");
        }
    }
}
