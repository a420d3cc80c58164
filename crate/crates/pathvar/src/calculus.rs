//! Compensated Riemann-sum integration and change-of-variable residuals.
//!
//! The level-n integral sum for f against a path S is
//!
//! ```text
//! CRS_n(t) = Σ_j Σ_{k=1}^{p-1} <∇^k f(S(t_j)), (S(t_{j+1}∧t) - S(t_j∧t))^⊗k> / k!
//! ```
//!
//! and the residual subtracts the remaining p-th order term integrated
//! against the same level's variation measure (atoms of mass (ΔS_j)^⊗p at the
//! left endpoints t_j):
//!
//! ```text
//! residual_n(t) = f(S(t)) - f(S(0)) - CRS_n(t) - (1/p!) Σ_{t_j <= t} <∇^p f(S(t_j)), (ΔS_j)^⊗p>.
//! ```
//!
//! For polynomial degree < p the sums telescope exactly; in general the
//! residual is the level's Taylor remainder and shrinks with the oscillation.

use crate::error::{Error, Result};
use crate::functions::VectorFunction;
use crate::partitions::{Partition, PartitionSequence, Scheme};
use crate::paths::SampledPath;
use crate::tensors::SymTensor;
use crate::variation::GuardMode;

/// One refinement level of an integral computation.
#[derive(Debug, Clone)]
pub struct IntegralLevel {
    pub level: u32,
    pub resolved: bool,
    /// compensated sums at the eval times
    pub values: Vec<f64>,
    /// change-of-variable residuals at the eval times, when requested
    pub residuals: Option<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct IntegralProfile {
    pub p: u32,
    pub scheme: Scheme,
    pub eval_times: Vec<f64>,
    pub levels: Vec<IntegralLevel>,
    /// finest-level values (no extrapolation)
    pub limit_estimate: Vec<f64>,
}

impl IntegralProfile {
    pub fn finest(&self) -> &IntegralLevel {
        self.levels.last().expect("at least one level")
    }

    pub fn level(&self, n: u32) -> Option<&IntegralLevel> {
        self.levels.iter().find(|l| l.level == n)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "p": self.p,
            "scheme": self.scheme,
            "eval_times": self.eval_times,
            "levels": self.levels.iter().map(|l| serde_json::json!({
                "n": l.level,
                "resolved": l.resolved,
                "values": l.values,
                "residuals": l.residuals,
            })).collect::<Vec<_>>(),
            "limit_estimate": self.limit_estimate,
        })
    }
}

/// Taylor polynomial increment Σ_{k=1}^{kmax} <∇^k f(x), δ^⊗k>/k!.
fn taylor_sum(f: &VectorFunction, x: &[f64], delta: &[f64], kmax: u32) -> f64 {
    if f.dim() == 1 {
        // scalar fast path, no tensor allocation
        let mut acc = 0.0;
        let mut dk = 1.0;
        let mut fact = 1.0;
        for k in 1..=kmax {
            dk *= delta[0];
            fact *= k as f64;
            acc += f.grad_scalar(k, x[0]) * dk / fact;
        }
        acc
    } else {
        let mut acc = 0.0;
        let mut fact = 1.0;
        for k in 1..=kmax {
            fact *= k as f64;
            let g = f.grad(k as usize, x);
            let pw = SymTensor::sym_power(delta, k as usize);
            acc += g.pairing(&pw).expect("matching orders") / fact;
        }
        acc
    }
}

/// p-th order term <∇^p f(x), δ^⊗p>.
fn pth_term(f: &VectorFunction, x: &[f64], delta: &[f64], p: u32) -> f64 {
    if f.dim() == 1 {
        f.grad_scalar(p, x[0]) * delta[0].powi(p as i32)
    } else {
        let g = f.grad(p as usize, x);
        let pw = SymTensor::sym_power(delta, p as usize);
        g.pairing(&pw).expect("matching orders")
    }
}

struct LevelSums {
    /// prefix[j] = CRS over the first j full intervals
    crs_prefix: Vec<f64>,
    /// prefix of the p-th order atoms
    pth_prefix: Vec<f64>,
    times: Vec<f64>,
}

fn level_sums(f: &VectorFunction, path: &SampledPath, partition: &Partition, p: u32) -> LevelSums {
    let times = partition.times().to_vec();
    let d = path.dim();
    let m = times.len() - 1;
    let mut crs_prefix = Vec::with_capacity(m + 1);
    let mut pth_prefix = Vec::with_capacity(m + 1);
    crs_prefix.push(0.0);
    pth_prefix.push(0.0);
    let mut crs = 0.0;
    let mut pth = 0.0;
    let mut x = vec![0.0; d];
    let mut delta = vec![0.0; d];
    for j in 0..m {
        for c in 0..d {
            x[c] = path.value_at(c, times[j]);
            delta[c] = path.value_at(c, times[j + 1]) - x[c];
        }
        crs += taylor_sum(f, &x, &delta, p - 1);
        pth += pth_term(f, &x, &delta, p);
        crs_prefix.push(crs);
        pth_prefix.push(pth);
    }
    LevelSums { crs_prefix, pth_prefix, times }
}

impl LevelSums {
    /// CRS with increments truncated at t: full intervals plus one partial.
    fn crs_at(&self, f: &VectorFunction, path: &SampledPath, p: u32, t: f64) -> f64 {
        let m = self.times.len() - 1;
        let full = self.times[1..].partition_point(|&tj| tj <= t);
        let mut acc = self.crs_prefix[full];
        if full < m && self.times[full] < t {
            let d = path.dim();
            let x: Vec<f64> = (0..d).map(|c| path.value_at(c, self.times[full])).collect();
            let delta: Vec<f64> = (0..d).map(|c| path.value_at(c, t) - x[c]).collect();
            acc += taylor_sum(f, &x, &delta, p - 1);
        }
        acc
    }

    /// Σ_{t_j <= t} of the p-th order atoms (full increments).
    fn pth_at(&self, t: f64) -> f64 {
        let lefts = &self.times[..self.times.len() - 1];
        let count = lefts.partition_point(|&tj| tj <= t);
        self.pth_prefix[count]
    }
}

#[allow(clippy::too_many_arguments)]
fn integral_profile(
    f: &VectorFunction,
    path: &SampledPath,
    scheme: Scheme,
    p: u32,
    levels: (u32, u32),
    eval_times: &[f64],
    guard: GuardMode,
    with_residuals: bool,
) -> Result<IntegralProfile> {
    if p < 2 || p % 2 != 0 {
        return Err(Error::OddOrder(p as usize));
    }
    if f.dim() != path.dim() {
        return Err(Error::DimensionMismatch { expected: path.dim(), got: f.dim() });
    }
    if matches!(scheme, Scheme::LebesgueDyadic) {
        path.scalar()?;
    }
    let factorial_p: f64 = (1..=p).map(|k| k as f64).product();
    let seq = PartitionSequence::new(scheme, levels.0, levels.1)?;
    let mut out = Vec::new();
    for n in seq.levels() {
        let partition = seq.build(path, n, matches!(guard, GuardMode::Strict))?;
        let sums = level_sums(f, path, &partition, p);
        let values: Vec<f64> = eval_times.iter().map(|&t| sums.crs_at(f, path, p, t)).collect();
        let residuals = if with_residuals {
            Some(
                eval_times
                    .iter()
                    .zip(&values)
                    .map(|(&t, &crs)| {
                        let x_t = path.vector_at(t);
                        let x_0 = path.vector_at(0.0);
                        f.eval(&x_t) - f.eval(&x_0) - crs - sums.pth_at(t) / factorial_p
                    })
                    .collect(),
            )
        } else {
            None
        };
        out.push(IntegralLevel { level: n, resolved: partition.resolved(), values, residuals });
    }
    let limit_estimate = out.last().expect("levels nonempty").values.clone();
    Ok(IntegralProfile { p, scheme, eval_times: eval_times.to_vec(), levels: out, limit_estimate })
}

/// Compensated Riemann sums of ∇f against the path across levels.
pub fn compensated_integral(
    f: &VectorFunction,
    path: &SampledPath,
    scheme: Scheme,
    p: u32,
    levels: (u32, u32),
    eval_times: &[f64],
    guard: GuardMode,
) -> Result<IntegralProfile> {
    integral_profile(f, path, scheme, p, levels, eval_times, guard, false)
}

/// Change-of-variable residuals: the defect of
/// `f(S(t)) - f(S(0)) = CRS_n(t) + (1/p!) ∫ <∇^p f(S), d[S]^p_n>`
/// at each level, with the d[S]^p term realized against the same level's
/// variation atoms.
pub fn change_of_variable_residual(
    f: &VectorFunction,
    path: &SampledPath,
    scheme: Scheme,
    p: u32,
    levels: (u32, u32),
    eval_times: &[f64],
    guard: GuardMode,
) -> Result<IntegralProfile> {
    integral_profile(f, path, scheme, p, levels, eval_times, guard, true)
}

impl VectorFunction {
    /// Scalar k-th derivative for d = 1 functions (hot path of the sums).
    pub fn grad_scalar(&self, k: u32, x: f64) -> f64 {
        match self {
            VectorFunction::Scalar1d(f) => f.deriv(k, x),
            _ => {
                debug_assert_eq!(self.dim(), 1);
                self.grad(k as usize, &[x]).coeffs()[0]
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::{median, run_ensemble};
    use crate::fbm::generate_fbm;
    use crate::functions::ScalarFunction;
    use crate::paths::{generate_analytic, AnalyticKind};

    fn scalar(f: ScalarFunction) -> VectorFunction {
        VectorFunction::Scalar1d(f)
    }

    #[test]
    fn telescoping_is_exact_at_every_level() {
        // Σ_j (f(S(t_{j+1}∧t)) - f(S(t_j∧t))) = f(S(t)) - f(S(0))
        let path = generate_fbm(0.5, 1.0, 1 << 10, 7, 1).unwrap();
        let xs = path.scalar().unwrap();
        let f = ScalarFunction::Cos { amp: 1.0, freq: 1.0 };
        for n in [4u32, 7, 9] {
            let part = crate::partitions::uniform_dyadic(n, 1.0);
            for &t in &[0.4, 1.0] {
                let mut acc = 0.0;
                for w in part.times().windows(2) {
                    let a = path.value_at(0, w[0].min(t));
                    let b = path.value_at(0, w[1].min(t));
                    acc += f.eval(b) - f.eval(a);
                }
                let expect = f.eval(path.value_at(0, t)) - f.eval(xs[0]);
                assert!((acc - expect).abs() < 1e-9 * (1.0 + expect.abs()));
            }
        }
    }

    #[test]
    fn linear_integrand_gives_increment_exactly() {
        let path = generate_fbm(0.5, 1.0, 1 << 10, 7, 1).unwrap();
        let f = scalar(ScalarFunction::Identity);
        let eval = [0.3, 0.5, 0.77, 1.0];
        let prof = compensated_integral(
            &f,
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
                assert!((v - want).abs() < 1e-12, "level {} t {t}", l.level);
            }
        }
    }

    #[test]
    fn low_degree_monomials_are_exact() {
        // degrees <= p-1 telescope exactly at every level and eval time
        let path = generate_fbm(0.25, 1.0, 1 << 10, 19, 1).unwrap();
        let xs = path.scalar().unwrap();
        for (p, m) in [(2u32, 1u32), (4, 2), (4, 3)] {
            let f = scalar(ScalarFunction::Monomial { m });
            let eval = [0.2, 0.65, 1.0];
            let prof = compensated_integral(
                &f,
                &path,
                Scheme::UniformDyadic,
                p,
                (3, 7),
                &eval,
                GuardMode::Strict,
            )
            .unwrap();
            for l in &prof.levels {
                for (&t, &v) in eval.iter().zip(&l.values) {
                    let want = path.value_at(0, t).powi(m as i32) - xs[0].powi(m as i32);
                    assert!(
                        (v - want).abs() < 1e-9 * (1.0 + want.abs()),
                        "p={p} m={m} level {} t={t}: {v} vs {want}",
                        l.level
                    );
                }
            }
        }
    }

    #[test]
    fn degree_p_monomial_exact_modulo_pth_sum() {
        // f = x^p: CRS(t) + Σ (ΔS∧t)^p = f(S(t)) - f(S(0)) exactly, since
        // <∇^p x^p, δ^⊗p>/p! = δ^p
        let path = generate_fbm(0.5, 1.0, 1 << 10, 4, 1).unwrap();
        for p in [2u32, 4] {
            let f = scalar(ScalarFunction::Monomial { m: p });
            for n in [3u32, 6] {
                let part = crate::partitions::uniform_dyadic(n, 1.0);
                for &t in &[0.37, 1.0] {
                    let prof = compensated_integral(
                        &f,
                        &path,
                        Scheme::UniformDyadic,
                        p,
                        (n, n),
                        &[t],
                        GuardMode::Strict,
                    )
                    .unwrap();
                    let crs = prof.levels[0].values[0];
                    let mut psum = 0.0;
                    for w in part.times().windows(2) {
                        let a = path.value_at(0, w[0].min(t));
                        let b = path.value_at(0, w[1].min(t));
                        psum += (b - a).powi(p as i32);
                    }
                    let lhs = crs + psum;
                    let want =
                        path.value_at(0, t).powi(p as i32) - path.value_at(0, 0.0).powi(p as i32);
                    assert!(
                        (lhs - want).abs() < 1e-9 * (1.0 + want.abs()),
                        "p={p} n={n} t={t}: {lhs} vs {want}"
                    );
                }
            }
        }
    }

    #[test]
    fn vector_quadratic_matches_scalar_route() {
        // f(x) = (v·x)^2 on a 2-d path against the same computation on the
        // projected scalar path
        let path = generate_fbm(0.5, 1.0, 1 << 9, 40, 2).unwrap();
        let v = vec![0.6, -1.1];
        let f = VectorFunction::PowerOfForm { v: v.clone(), m: 2 };
        let eval = [0.5, 1.0];
        let prof =
            compensated_integral(&f, &path, Scheme::UniformDyadic, 2, (3, 6), &eval, GuardMode::Strict)
                .unwrap();
        let projected = path.project(&v).unwrap();
        let fs = scalar(ScalarFunction::Monomial { m: 2 });
        let sprof = compensated_integral(
            &fs,
            &projected,
            Scheme::UniformDyadic,
            2,
            (3, 6),
            &eval,
            GuardMode::Strict,
        )
        .unwrap();
        for (l, sl) in prof.levels.iter().zip(&sprof.levels) {
            for (a, b) in l.values.iter().zip(&sl.values) {
                assert!((a - b).abs() < 1e-10 * (1.0 + b.abs()));
            }
        }
    }

    #[test]
    fn cosine_on_line_residual_vanishes() {
        let line = generate_analytic(&AnalyticKind::Line { slope: 1.0, intercept: 0.0 }, 1.0, 1 << 12)
            .unwrap();
        let f = scalar(ScalarFunction::Cos { amp: 1.0, freq: 1.0 });
        let prof = change_of_variable_residual(
            &f,
            &line,
            Scheme::UniformDyadic,
            2,
            (2, 10),
            &[1.0],
            GuardMode::Strict,
        )
        .unwrap();
        let res: Vec<f64> = prof
            .levels
            .iter()
            .map(|l| l.residuals.as_ref().unwrap()[0].abs())
            .collect();
        // second-order decay, comfortably inside O(2^-n)
        for w in res.windows(2) {
            assert!(w[1] < 0.6 * w[0] + 1e-14, "{res:?}");
        }
        assert!(*res.last().unwrap() < 1e-6);
    }

    #[test]
    fn quartic_on_brownian_lebesgue_residual_small() {
        let vals = run_ensemble(8, 500, |_, seed| {
            let path = generate_fbm(0.5, 1.0, 1 << 16, seed, 1).unwrap();
            let f = scalar(ScalarFunction::Monomial { m: 4 });
            let prof = change_of_variable_residual(
                &f,
                &path,
                Scheme::LebesgueDyadic,
                2,
                (12, 12),
                &[1.0],
                GuardMode::Relaxed,
            )
            .unwrap();
            let r = prof.levels[0].residuals.as_ref().unwrap()[0].abs();
            let scale = path.value_at(0, 1.0).powi(4).abs();
            r / (0.01 * scale + 0.01)
        });
        assert!(median(&vals) < 1.0, "normalized residuals {vals:?}");
    }

    #[test]
    fn rough_path_residual_shrinks_for_quartic_variation() {
        // cos against H=1/4 paths with p=4: the finest-level residual sits
        // well below the coarsest one on the ensemble median
        let ratios = run_ensemble(8, 3, |_, seed| {
            let path = generate_fbm(0.25, 1.0, 1 << 14, seed, 1).unwrap();
            let f = scalar(ScalarFunction::Cos { amp: 1.0, freq: 1.0 });
            let prof = change_of_variable_residual(
                &f,
                &path,
                Scheme::UniformDyadic,
                4,
                (6, 12),
                &[1.0],
                GuardMode::Strict,
            )
            .unwrap();
            let first = prof.levels.first().unwrap().residuals.as_ref().unwrap()[0].abs();
            let last = prof.levels.last().unwrap().residuals.as_ref().unwrap()[0].abs();
            last / first
        });
        assert!(median(&ratios) < 0.6, "residual ratios {ratios:?}");
    }

    #[test]
    fn odd_p_rejected() {
        let path = generate_fbm(0.5, 1.0, 256, 1, 1).unwrap();
        let f = scalar(ScalarFunction::Identity);
        assert!(matches!(
            compensated_integral(&f, &path, Scheme::UniformDyadic, 3, (2, 3), &[1.0], GuardMode::Strict),
            Err(Error::OddOrder(3))
        ));
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let path = generate_fbm(0.5, 1.0, 256, 1, 2).unwrap();
        let f = scalar(ScalarFunction::Identity);
        assert!(matches!(
            compensated_integral(&f, &path, Scheme::UniformDyadic, 2, (2, 3), &[1.0], GuardMode::Strict),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
