//! Continuous paths observed on a uniform time grid.
//!
//! A [`SampledPath`] stores d coordinates sampled at `t_i = i*T/(n-1)`. Its
//! continuous-time semantics are linear interpolation between samples; level
//! crossing times and sojourn times are exact for the interpolant.

use crate::error::{Error, Result};
use crate::partitions::Partition;
use std::io::{BufRead, Write};

#[derive(Debug, Clone)]
pub struct SampledPath {
    horizon: f64,
    /// coordinate-major storage: coords[c][i]
    coords: Vec<Vec<f64>>,
}

impl SampledPath {
    pub fn new(horizon: f64, coords: Vec<Vec<f64>>) -> Result<Self> {
        if !(horizon > 0.0) {
            return Err(Error::NonPositiveHorizon(horizon));
        }
        if coords.is_empty() {
            return Err(Error::DimensionMismatch { expected: 1, got: 0 });
        }
        let n = coords[0].len();
        if n < 2 {
            return Err(Error::TooFewSamples(n));
        }
        for c in &coords {
            if c.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: c.len() });
            }
            if c.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFiniteValue);
            }
        }
        Ok(SampledPath { horizon, coords })
    }

    /// Scalar path from a closed-form function sampled on the uniform grid.
    pub fn from_fn(horizon: f64, num_samples: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        if num_samples < 2 {
            return Err(Error::TooFewSamples(num_samples));
        }
        let dt = horizon / (num_samples - 1) as f64;
        let values = (0..num_samples).map(|i| f(i as f64 * dt)).collect();
        SampledPath::new(horizon, vec![values])
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn num_samples(&self) -> usize {
        self.coords[0].len()
    }

    pub fn dt(&self) -> f64 {
        self.horizon / (self.num_samples() - 1) as f64
    }

    pub fn time(&self, i: usize) -> f64 {
        i as f64 * self.horizon / (self.num_samples() - 1) as f64
    }

    pub fn coord(&self, c: usize) -> &[f64] {
        &self.coords[c]
    }

    /// The single coordinate of a scalar path.
    pub fn scalar(&self) -> Result<&[f64]> {
        if self.dim() != 1 {
            return Err(Error::ScalarPathRequired(self.dim()));
        }
        Ok(&self.coords[0])
    }

    /// Linear interpolation of coordinate `c` at time `t` (clamped to [0,T]).
    pub fn value_at(&self, c: usize, t: f64) -> f64 {
        let n = self.num_samples();
        let dt = self.dt();
        if t <= 0.0 {
            return self.coords[c][0];
        }
        if t >= self.horizon {
            return self.coords[c][n - 1];
        }
        let pos = t / dt;
        let i = (pos.floor() as usize).min(n - 2);
        let frac = pos - i as f64;
        let a = self.coords[c][i];
        let b = self.coords[c][i + 1];
        a + frac * (b - a)
    }

    /// All coordinates interpolated at `t`.
    pub fn vector_at(&self, t: f64) -> Vec<f64> {
        (0..self.dim()).map(|c| self.value_at(c, t)).collect()
    }

    /// Largest |increment| between consecutive samples of the scalar path.
    pub fn max_abs_increment(&self) -> Result<f64> {
        let xs = self.scalar()?;
        Ok(xs.windows(2).map(|w| (w[1] - w[0]).abs()).fold(0.0, f64::max))
    }

    /// Applies a linear functional v·S(t) to a vector path, producing the
    /// scalar path t -> v · S(t) on the same grid.
    pub fn project(&self, v: &[f64]) -> Result<SampledPath> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: v.len() });
        }
        let n = self.num_samples();
        let mut out = vec![0.0; n];
        for (c, w) in v.iter().enumerate() {
            for i in 0..n {
                out[i] += w * self.coords[c][i];
            }
        }
        SampledPath::new(self.horizon, vec![out])
    }

    /// Writes the `t,x1[,x2,...]` CSV form.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let header: Vec<String> = std::iter::once("t".to_string())
            .chain((1..=self.dim()).map(|c| format!("x{c}")))
            .collect();
        writeln!(w, "{}", header.join(","))?;
        for i in 0..self.num_samples() {
            let mut row = format!("{}", self.time(i));
            for c in 0..self.dim() {
                row.push(',');
                row.push_str(&format!("{}", self.coords[c][i]));
            }
            writeln!(w, "{row}")?;
        }
        Ok(())
    }

    /// Reads the CSV form, validating the uniform grid to relative spacing
    /// tolerance 1e-9.
    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::CsvFormat("empty file".into()))?
            .map_err(Error::Io)?;
        let cols: Vec<&str> = header.trim().split(',').collect();
        if cols.is_empty() || cols[0] != "t" {
            return Err(Error::CsvFormat("header must start with `t`".into()));
        }
        let dim = cols.len() - 1;
        if dim == 0 {
            return Err(Error::CsvFormat("need at least one value column".into()));
        }
        let mut times = Vec::new();
        let mut coords: Vec<Vec<f64>> = vec![Vec::new(); dim];
        for (lineno, line) in lines.enumerate() {
            let line = line.map_err(Error::Io)?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != dim + 1 {
                return Err(Error::CsvFormat(format!(
                    "row {}: expected {} fields, got {}",
                    lineno + 2,
                    dim + 1,
                    fields.len()
                )));
            }
            let parse = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::CsvFormat(format!("row {}: bad float `{s}`", lineno + 2)))
            };
            times.push(parse(fields[0])?);
            for (c, field) in fields[1..].iter().enumerate() {
                coords[c].push(parse(field)?);
            }
        }
        if times.len() < 2 {
            return Err(Error::TooFewSamples(times.len()));
        }
        if times[0].abs() > 1e-12 {
            return Err(Error::CsvFormat("first time must be 0".into()));
        }
        let dt0 = times[1] - times[0];
        if !(dt0 > 0.0) {
            return Err(Error::CsvFormat("times must be strictly increasing".into()));
        }
        for w in times.windows(2) {
            let dt = w[1] - w[0];
            if ((dt - dt0) / dt0).abs() > 1e-9 {
                return Err(Error::CsvFormat(format!(
                    "non-uniform grid: spacing {dt} vs {dt0}"
                )));
            }
        }
        let horizon = *times.last().unwrap();
        SampledPath::new(horizon, coords)
    }
}

/// Right-continuous piecewise-constant path with left limits.
#[derive(Debug, Clone)]
pub struct StepPath {
    /// partition times, first 0, last T
    breakpoints: Vec<f64>,
    /// value on [breakpoints[j], breakpoints[j+1])
    values: Vec<f64>,
    /// value at T itself
    terminal: f64,
}

impl StepPath {
    pub fn horizon(&self) -> f64 {
        *self.breakpoints.last().unwrap()
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn value_at(&self, t: f64) -> f64 {
        let horizon = self.horizon();
        if t >= horizon {
            return self.terminal;
        }
        let j = match self.breakpoints.binary_search_by(|b| b.partial_cmp(&t).unwrap()) {
            Ok(j) => j,
            Err(ins) => ins.saturating_sub(1),
        };
        self.values[j.min(self.values.len() - 1)]
    }

    /// Left limit at `t`; at t=0 this is the initial value.
    pub fn left_limit_at(&self, t: f64) -> f64 {
        if t <= self.breakpoints[0] {
            return self.values[0];
        }
        let j = match self.breakpoints.binary_search_by(|b| b.partial_cmp(&t).unwrap()) {
            Ok(j) => j,       // t is a breakpoint: value on the previous piece
            Err(ins) => ins,  // t inside piece ins-1; left limit is that piece
        };
        if j == 0 {
            self.values[0]
        } else if t >= self.horizon() && t > *self.breakpoints.last().unwrap() {
            self.terminal
        } else {
            self.values[j - 1]
        }
    }

    /// Sup-norm distance to a sampled path, evaluated on a refinement of both
    /// grids (adequate for the piecewise-linear interpolant).
    pub fn sup_distance(&self, path: &SampledPath) -> f64 {
        let xs = path.scalar().expect("scalar path");
        let n = path.num_samples();
        let mut worst = (self.terminal - xs[n - 1]).abs();
        // candidate times: path samples and both sides of each breakpoint
        for i in 0..n {
            let t = path.time(i);
            worst = worst.max((self.value_at(t) - xs[i]).abs());
        }
        for &b in &self.breakpoints {
            let s = path.value_at(0, b);
            worst = worst.max((self.value_at(b) - s).abs());
            worst = worst.max((self.left_limit_at(b) - s).abs());
        }
        worst
    }
}

/// Piecewise-constant approximation along a partition: the value on
/// [t_j, t_{j+1}) is S(t_{j+1}), and the value at T is S(T).
pub fn piecewise_constant_approx(path: &SampledPath, partition: &Partition) -> Result<StepPath> {
    let times = partition.times();
    if times.len() < 2 {
        return Err(Error::EmptyPartition);
    }
    let values: Vec<f64> = times[1..].iter().map(|&t| path.value_at(0, t)).collect();
    Ok(StepPath {
        breakpoints: times.to_vec(),
        terminal: path.value_at(0, *times.last().unwrap()),
        values,
    })
}

/// Closed-form test paths.
#[derive(Debug, Clone)]
pub enum AnalyticKind {
    Line { slope: f64, intercept: f64 },
    /// amp * sin(2π freq t)
    Sine { amp: f64, freq: f64 },
    /// c0 + c1 t + c2 t^2 + ...
    Polynomial { coeffs: Vec<f64> },
    /// Σ_{k<terms} a^k cos(b^k π t)
    Weierstrass { a: f64, b: f64, terms: usize },
}

/// Samples a closed-form path on a uniform grid of `num_samples` points.
pub fn generate_analytic(kind: &AnalyticKind, horizon: f64, num_samples: usize) -> Result<SampledPath> {
    if num_samples < 2 {
        return Err(Error::TooFewSamples(num_samples));
    }
    match kind {
        AnalyticKind::Line { slope, intercept } => {
            let (s, c) = (*slope, *intercept);
            SampledPath::from_fn(horizon, num_samples, |t| c + s * t)
        }
        AnalyticKind::Sine { amp, freq } => {
            let (a, f) = (*amp, *freq);
            SampledPath::from_fn(horizon, num_samples, |t| {
                a * (2.0 * std::f64::consts::PI * f * t).sin()
            })
        }
        AnalyticKind::Polynomial { coeffs } => {
            if coeffs.is_empty() {
                return Err(Error::InvalidParameter("polynomial needs coefficients".into()));
            }
            let cs = coeffs.clone();
            SampledPath::from_fn(horizon, num_samples, move |t| {
                cs.iter().rev().fold(0.0, |acc, &c| acc * t + c)
            })
        }
        AnalyticKind::Weierstrass { a, b, terms } => {
            if !(*a > 0.0 && *a < 1.0) {
                return Err(Error::InvalidParameter(format!("weierstrass a must be in (0,1), got {a}")));
            }
            if !(*b > 1.0) {
                return Err(Error::InvalidParameter(format!("weierstrass b must be > 1, got {b}")));
            }
            if *terms == 0 {
                return Err(Error::InvalidParameter("weierstrass needs at least one term".into()));
            }
            let (a, b, terms) = (*a, *b, *terms);
            SampledPath::from_fn(horizon, num_samples, move |t| {
                let mut acc = 0.0;
                let mut ak = 1.0;
                let mut bk = 1.0;
                for _ in 0..terms {
                    acc += ak * (bk * std::f64::consts::PI * t).cos();
                    ak *= a;
                    bk *= b;
                }
                acc
            })
        }
    }
}
