//! Symmetric tensor algebra over R^d in packed monomial storage.
//!
//! A symmetric tensor of order k on R^d is determined by one coefficient per
//! monomial multi-index α with |α| = k, i.e. C(k+d-1, d-1) slots instead of
//! d^k. The coefficient stored at α is the common value of all dense entries
//! whose index tuple has type α; the number of such tuples is the multinomial
//! weight m(α) = k!/(α_1!···α_d!). The canonical inner product on the dense
//! tensor space then reads
//!
//! ```text
//! <A, B> = Σ_α m(α) a_α b_α,    so that    <v^⊗k, w^⊗k> = (v·w)^k.
//! ```

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// All multi-indices α ∈ N^d with |α| = order, first coordinate decreasing.
pub fn multi_indices(dim: usize, order: usize) -> Vec<Vec<u8>> {
    assert!(dim >= 1);
    let mut out = Vec::with_capacity(packed_len(dim, order));
    let mut cur = vec![0u8; dim];
    fill(dim, order, 0, &mut cur, &mut out);
    out
}

fn fill(dim: usize, rem: usize, slot: usize, cur: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
    if slot == dim - 1 {
        cur[slot] = rem as u8;
        out.push(cur.clone());
        return;
    }
    for v in (0..=rem).rev() {
        cur[slot] = v as u8;
        fill(dim, rem - v, slot + 1, cur, out);
    }
}

/// Number of packed slots, C(order+dim-1, dim-1).
pub fn packed_len(dim: usize, order: usize) -> usize {
    binomial(order + dim - 1, dim - 1)
}

/// Binomial coefficient as usize (exact for every size used here).
pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as usize
}

/// Multinomial weight m(α) = |α|! / Π α_i!.
pub fn multinomial(alpha: &[u8]) -> f64 {
    let k: u32 = alpha.iter().map(|&a| a as u32).sum();
    let mut acc = 1.0f64;
    let mut used = 0u32;
    for &a in alpha {
        for j in 1..=a as u32 {
            used += 1;
            acc *= used as f64 / j as f64;
        }
    }
    debug_assert_eq!(used, k);
    acc
}

/// Position of α in the [`multi_indices`] ordering.
pub fn rank_of(alpha: &[u8]) -> usize {
    let dim = alpha.len();
    let mut rem: usize = alpha.iter().map(|&a| a as usize).sum();
    let mut rank = 0usize;
    for (slot, &a) in alpha.iter().enumerate() {
        if slot == dim - 1 {
            break;
        }
        let a = a as usize;
        // indices with a larger entry in this slot come first
        for v in (a + 1)..=rem {
            rank += packed_len(dim - slot - 1, rem - v);
        }
        rem -= a;
    }
    rank
}

/// Enumerates the (ℓ,k)-shuffles: sequences over {0,..,ℓ+k-1} in which the
/// values below ℓ keep their relative order and so do the values from ℓ up.
/// There are exactly C(ℓ+k, ℓ) of them.
pub fn shuffles(l: usize, k: usize) -> Vec<Vec<usize>> {
    let n = l + k;
    let mut out = Vec::with_capacity(binomial(n, l));
    let mut seq = Vec::with_capacity(n);
    fn rec(seq: &mut Vec<usize>, next_a: usize, next_b: usize, l: usize, n: usize, out: &mut Vec<Vec<usize>>) {
        if seq.len() == n {
            out.push(seq.clone());
            return;
        }
        if next_a < l {
            seq.push(next_a);
            rec(seq, next_a + 1, next_b, l, n, out);
            seq.pop();
        }
        if next_b < n {
            seq.push(next_b);
            rec(seq, next_a, next_b + 1, l, n, out);
            seq.pop();
        }
    }
    rec(&mut seq, 0, l, l, n, &mut out);
    out
}

/// Symmetric order-k tensor on R^d, packed by monomial multi-index.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTensor {
    order: usize,
    dim: usize,
    coeffs: Vec<f64>,
}

impl SymTensor {
    pub fn zero(dim: usize, order: usize) -> Self {
        SymTensor { order, dim, coeffs: vec![0.0; packed_len(dim, order)] }
    }

    /// Order-0 tensor holding a single scalar.
    pub fn scalar(dim: usize, value: f64) -> Self {
        SymTensor { order: 0, dim, coeffs: vec![value] }
    }

    pub fn from_coeffs(dim: usize, order: usize, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != packed_len(dim, order) {
            return Err(Error::InvalidParameter(format!(
                "expected {} coefficients for order {} dim {}, got {}",
                packed_len(dim, order),
                order,
                dim,
                coeffs.len()
            )));
        }
        Ok(SymTensor { order, dim, coeffs })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Coefficient at multi-index α.
    pub fn coeff(&self, alpha: &[u8]) -> f64 {
        self.coeffs[rank_of(alpha)]
    }

    /// k-fold symmetric power v^⊗k.
    pub fn sym_power(v: &[f64], order: usize) -> Self {
        let dim = v.len();
        let table = multi_indices(dim, order);
        let coeffs = table
            .iter()
            .map(|alpha| {
                alpha
                    .iter()
                    .zip(v)
                    .map(|(&a, &x)| x.powi(a as i32))
                    .product()
            })
            .collect();
        SymTensor { order, dim, coeffs }
    }

    /// Symmetrization of a dense order-k tensor given in row-major layout
    /// (slot 0 slowest), i.e. the average over all index permutations.
    pub fn symmetrize(dense: &[f64], dim: usize, order: usize) -> Result<Self> {
        if dense.len() != dim.pow(order as u32) {
            return Err(Error::InvalidParameter(format!(
                "dense tensor needs {} entries, got {}",
                dim.pow(order as u32),
                dense.len()
            )));
        }
        // compensated accumulation keeps the orbit averages within 1 ulp,
        // which makes double symmetrization idempotent at that precision
        let mut sums = vec![0.0; packed_len(dim, order)];
        let mut comp = vec![0.0; sums.len()];
        let mut tuple = vec![0usize; order];
        for (flat, &val) in dense.iter().enumerate() {
            let mut f = flat;
            for slot in (0..order).rev() {
                tuple[slot] = f % dim;
                f /= dim;
            }
            let mut alpha = vec![0u8; dim];
            for &i in &tuple {
                alpha[i] += 1;
            }
            let slot = rank_of(&alpha);
            let s = sums[slot];
            let t = s + val;
            comp[slot] += if s.abs() >= val.abs() { (s - t) + val } else { (val - t) + s };
            sums[slot] = t;
        }
        let table = multi_indices(dim, order);
        for (slot, alpha) in table.iter().enumerate() {
            sums[slot] = (sums[slot] + comp[slot]) / multinomial(alpha);
        }
        Ok(SymTensor { order, dim, coeffs: sums })
    }

    /// Canonical inner product of two tensors of equal order.
    pub fn pairing(&self, other: &SymTensor) -> Result<f64> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: other.dim });
        }
        if self.order != other.order {
            return Err(Error::OrderMismatch { expected: self.order, got: other.order });
        }
        let table = multi_indices(self.dim, self.order);
        Ok(table
            .iter()
            .enumerate()
            .map(|(i, alpha)| multinomial(alpha) * self.coeffs[i] * other.coeffs[i])
            .sum())
    }

    /// Partial contraction of a lower-order tensor against a higher-order one:
    /// for A of order ℓ and B of order k ≥ ℓ this returns the order k-ℓ tensor
    /// with <A.contract(B), w^⊗(k-ℓ)> = <A ⊗ w^⊗(k-ℓ), B>. In particular
    /// u^⊗ℓ.contract(w^⊗k) = (u·w)^ℓ w^⊗(k-ℓ).
    pub fn contract(&self, other: &SymTensor) -> Result<SymTensor> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: other.dim });
        }
        if self.order > other.order {
            return Err(Error::OrderMismatch { expected: self.order, got: other.order });
        }
        let out_order = other.order - self.order;
        let own = multi_indices(self.dim, self.order);
        let out_table = multi_indices(self.dim, out_order);
        let mut coeffs = vec![0.0; out_table.len()];
        let mut gamma = vec![0u8; self.dim];
        for (out_slot, beta) in out_table.iter().enumerate() {
            let mut acc = 0.0;
            for (a_slot, alpha) in own.iter().enumerate() {
                for i in 0..self.dim {
                    gamma[i] = alpha[i] + beta[i];
                }
                acc += multinomial(alpha) * self.coeffs[a_slot] * other.coeffs[rank_of(&gamma)];
            }
            coeffs[out_slot] = acc;
        }
        Ok(SymTensor { order: out_order, dim: self.dim, coeffs })
    }

    /// Symmetrized outer product Sym(A ⊗ B). Bilinear, and
    /// sym_outer(v^⊗ℓ, v^⊗k) = v^⊗(ℓ+k).
    pub fn sym_outer(&self, other: &SymTensor) -> Result<SymTensor> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: other.dim });
        }
        let dim = self.dim;
        let out_order = self.order + other.order;
        let own = multi_indices(dim, self.order);
        let theirs = multi_indices(dim, other.order);
        let out_table = multi_indices(dim, out_order);
        let mut coeffs = vec![0.0; out_table.len()];
        let mut gamma = vec![0u8; dim];
        for (a_slot, alpha) in own.iter().enumerate() {
            let ma = multinomial(alpha) * self.coeffs[a_slot];
            if ma == 0.0 {
                continue;
            }
            for (b_slot, beta) in theirs.iter().enumerate() {
                for i in 0..dim {
                    gamma[i] = alpha[i] + beta[i];
                }
                coeffs[rank_of(&gamma)] += ma * multinomial(beta) * other.coeffs[b_slot];
            }
        }
        for (slot, gamma) in out_table.iter().enumerate() {
            coeffs[slot] /= multinomial(gamma);
        }
        Ok(SymTensor { order: out_order, dim, coeffs })
    }

    /// Frobenius norm induced by the canonical inner product.
    pub fn norm(&self) -> f64 {
        self.pairing(self).expect("self-pairing").sqrt()
    }

    pub fn add(&self, other: &SymTensor) -> Result<SymTensor> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: other.dim });
        }
        if self.order != other.order {
            return Err(Error::OrderMismatch { expected: self.order, got: other.order });
        }
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect();
        Ok(SymTensor { order: self.order, dim: self.dim, coeffs })
    }

    pub fn sub(&self, other: &SymTensor) -> Result<SymTensor> {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, s: f64) -> SymTensor {
        SymTensor {
            order: self.order,
            dim: self.dim,
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    pub fn add_assign(&mut self, other: &SymTensor) {
        debug_assert_eq!(self.order, other.order);
        debug_assert_eq!(self.dim, other.dim);
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += b;
        }
    }

    /// Evaluates the homogeneous form <T, v^⊗k>.
    pub fn apply_power(&self, v: &[f64]) -> f64 {
        debug_assert_eq!(v.len(), self.dim);
        let table = multi_indices(self.dim, self.order);
        table
            .iter()
            .enumerate()
            .map(|(i, alpha)| {
                let mono: f64 = alpha.iter().zip(v).map(|(&a, &x)| x.powi(a as i32)).product();
                multinomial(alpha) * self.coeffs[i] * mono
            })
            .sum()
    }

    /// Refutation-based positivity check for even order: evaluates <T, v^⊗p>
    /// on all coordinate axes and `num_random` seeded unit directions. A
    /// `false` comes with a witness direction; `true` only means no violation
    /// was found.
    pub fn is_positive(&self, num_random: usize, seed: u64) -> Result<PositivityCheck> {
        if self.order % 2 != 0 {
            return Err(Error::OddOrder(self.order));
        }
        use rand::SeedableRng;
        use rand_distr::{Distribution, StandardNormal};
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed);
        let mut min_value = f64::INFINITY;
        let mut witness = None;
        let check = |v: &[f64], min_value: &mut f64, witness: &mut Option<Vec<f64>>| {
            let val = self.apply_power(v);
            if val < *min_value {
                *min_value = val;
                if val < 0.0 && witness.is_none() {
                    *witness = Some(v.to_vec());
                }
            }
        };
        for axis in 0..self.dim {
            let mut v = vec![0.0; self.dim];
            v[axis] = 1.0;
            check(&v, &mut min_value, &mut witness);
        }
        for _ in 0..num_random {
            let mut v: Vec<f64> = (0..self.dim).map(|_| StandardNormal.sample(&mut rng)).collect();
            let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm < 1e-12 {
                continue;
            }
            v.iter_mut().for_each(|x| *x /= norm);
            check(&v, &mut min_value, &mut witness);
        }
        Ok(PositivityCheck { nonneg: witness.is_none(), min_value, witness })
    }

    /// JSON form `{order, dim, coefficients: {"a1.a2...": c}}`.
    pub fn to_json(&self) -> serde_json::Value {
        let table = multi_indices(self.dim, self.order);
        let mut map = serde_json::Map::new();
        for (slot, alpha) in table.iter().enumerate() {
            let key = alpha.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(".");
            map.insert(key, serde_json::json!(self.coeffs[slot]));
        }
        serde_json::json!({ "order": self.order, "dim": self.dim, "coefficients": map })
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self> {
        let bad = |m: &str| Error::InvalidParameter(format!("tensor json: {m}"));
        let order = value["order"].as_u64().ok_or_else(|| bad("missing order"))? as usize;
        let dim = value["dim"].as_u64().ok_or_else(|| bad("missing dim"))? as usize;
        let mut t = SymTensor::zero(dim, order);
        let map = value["coefficients"].as_object().ok_or_else(|| bad("missing coefficients"))?;
        for (key, val) in map {
            let alpha: Vec<u8> = key
                .split('.')
                .map(|s| s.parse::<u8>().map_err(|_| bad("bad multi-index")))
                .collect::<Result<_>>()?;
            if alpha.len() != dim || alpha.iter().map(|&a| a as usize).sum::<usize>() != order {
                return Err(bad("multi-index does not match order/dim"));
            }
            let c = val.as_f64().ok_or_else(|| bad("coefficient not a number"))?;
            t.coeffs[rank_of(&alpha)] = c;
        }
        Ok(t)
    }
}

/// Result of a sampled positivity check.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PositivityCheck {
    pub nonneg: bool,
    pub min_value: f64,
    pub witness: Option<Vec<f64>>,
}

/// Graded element of S_p(R^d) = ⊕_{k=0}^p Sym_k(R^d).
#[derive(Debug, Clone)]
pub struct GradedTensor {
    dim: usize,
    levels: Vec<SymTensor>,
}

impl GradedTensor {
    pub fn zero(dim: usize, top_order: usize) -> Self {
        let levels = (0..=top_order).map(|k| SymTensor::zero(dim, k)).collect();
        GradedTensor { dim, levels }
    }

    pub fn from_levels(levels: Vec<SymTensor>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::InvalidParameter("graded tensor needs level 0".into()));
        }
        let dim = levels[0].dim();
        for (k, t) in levels.iter().enumerate() {
            if t.order() != k {
                return Err(Error::OrderMismatch { expected: k, got: t.order() });
            }
            if t.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: t.dim() });
            }
        }
        Ok(GradedTensor { dim, levels })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn top_order(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn level(&self, k: usize) -> &SymTensor {
        &self.levels[k]
    }

    pub fn level_mut(&mut self, k: usize) -> &mut SymTensor {
        &mut self.levels[k]
    }
}
