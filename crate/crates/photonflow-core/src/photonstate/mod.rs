//! Grid-sampled multi-photon input states.
//!
//! Four classes are supported:
//! - [`FunctionPulse`]: one photon in each of `m` channels, `ψ(t₁,…,t_m)`
//! - [`TensorPulse`]: coefficient tensor with a channel label per time axis
//! - [`MultiplicityPulse`]: `k_i` photons in channel `i`, `N = Σk_i` axes
//! - [`ProductSumPulse`]: `Π_j (Σ_k B_k*(ψ_jk))|0⟩`
//!
//! Sample arrays are row-major with the last time axis fastest. Tensor slots
//! (channel labels) are outermost.

mod ccr;
mod correlation;
pub mod families;

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::linalg::C64;

pub use ccr::{inner_product_ccr, permuted_dot, reduced_state, FockState, LabelPermutations, MAX_PAIRING, MAX_PRODUCT_FACTORS};
pub use correlation::{correlation_kernel, correlation_kernel_with, two_time_correlation, CorrelationKernel, DEFAULT_REDUCTION_BUDGET};

pub(crate) fn ipow(n: usize, k: usize) -> Result<usize> {
    n.checked_pow(k as u32)
        .ok_or_else(|| Error::DimensionBudget { bytes: (n as f64).powi(k as i32) * 16.0, budget: usize::MAX as f64 })
}

/// Row-major multi-index of `flat` for `ways` axes of extent `n`.
pub(crate) fn unravel(mut flat: usize, n: usize, ways: usize, out: &mut [usize]) {
    for p in (0..ways).rev() {
        out[p] = flat % n;
        flat /= n;
    }
}

fn check_len(what: &str, got: usize, want: usize) -> Result<()> {
    if got != want {
        return Err(Error::ShapeMismatch(format!("{what}: {got} samples, expected {want}")));
    }
    Ok(())
}

/// Distinct-channel pulse `ψ(t₁,…,t_m)`; axis `p` is the time argument of
/// the photon in channel `p`.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionPulse {
    grid: TimeGrid,
    m: usize,
    data: Vec<C64>,
    factors: Option<Vec<Vec<C64>>>,
}

impl FunctionPulse {
    pub fn new(grid: TimeGrid, m: usize, data: Vec<C64>) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidInput("pulse needs at least one channel".into()));
        }
        check_len("pulse", data.len(), ipow(grid.n, m)?)?;
        Ok(FunctionPulse { grid, m, data, factors: None })
    }

    /// `ξ₁(t₁)⋯ξ_m(t_m)`, tagged so that reductions can factorize.
    pub fn product(grid: TimeGrid, factors: Vec<Vec<C64>>) -> Result<Self> {
        let m = factors.len();
        if m == 0 {
            return Err(Error::InvalidInput("product pulse needs at least one factor".into()));
        }
        for f in &factors {
            check_len("factor", f.len(), grid.n)?;
        }
        let n = grid.n;
        let total = ipow(n, m)?;
        let mut idx = vec![0usize; m];
        let data = (0..total)
            .map(|flat| {
                unravel(flat, n, m, &mut idx);
                idx.iter().zip(&factors).fold(C64::new(1.0, 0.0), |acc, (&i, f)| acc * f[i])
            })
            .collect();
        Ok(FunctionPulse { grid, m, data, factors: Some(factors) })
    }

    pub fn from_fn(grid: TimeGrid, m: usize, f: impl Fn(&[f64]) -> C64) -> Result<Self> {
        let n = grid.n;
        let total = ipow(n, m)?;
        let mut idx = vec![0usize; m];
        let mut t = vec![0.0; m];
        let data = (0..total)
            .map(|flat| {
                unravel(flat, n, m, &mut idx);
                for (tp, &i) in t.iter_mut().zip(&idx) {
                    *tp = grid.t(i);
                }
                f(&t)
            })
            .collect();
        Self::new(grid, m, data)
    }

    pub fn zeros(grid: TimeGrid, m: usize) -> Result<Self> {
        Self::new(grid, m, vec![C64::new(0.0, 0.0); ipow(grid.n, m)?])
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }
    pub fn m(&self) -> usize {
        self.m
    }
    pub fn samples(&self) -> &[C64] {
        &self.data
    }
    pub fn factors(&self) -> Option<&[Vec<C64>]> {
        self.factors.as_deref()
    }

    /// Multiply by a scalar, preserving the product tag.
    pub fn scaled(&self, s: C64) -> Self {
        let mut out = self.clone();
        out.data.iter_mut().for_each(|z| *z *= s);
        if let Some(f) = out.factors.as_mut() {
            f[0].iter_mut().for_each(|z| *z *= s);
        }
        out
    }

    /// Rescale so that [`norm_distinct`] is one.
    pub fn normalized(&self) -> Result<Self> {
        let nrm = norm_distinct(self);
        if !(nrm > 0.0) {
            return Err(Error::InvalidInput("cannot normalize a zero pulse".into()));
        }
        Ok(self.scaled(C64::new(1.0 / nrm.sqrt(), 0.0)))
    }
}

/// Riemann sum `Σ|ψ|² dt^m`, the squared norm of a distinct-channel pulse.
pub fn norm_distinct(p: &FunctionPulse) -> f64 {
    p.data.iter().map(|z| z.norm_sqr()).sum::<f64>() * p.grid.dt.powi(p.m as i32)
}

/// Coefficient tensor `ψ_{j₁…j_N}(t₁,…,t_N)`; label `j_p` of axis `p` runs
/// over `dims[p]` channels.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorPulse {
    grid: TimeGrid,
    dims: Vec<usize>,
    time_len: usize,
    data: Vec<C64>,
}

impl TensorPulse {
    pub fn new(grid: TimeGrid, dims: Vec<usize>, data: Vec<C64>) -> Result<Self> {
        if dims.iter().any(|&d| d == 0) {
            return Err(Error::InvalidInput("tensor channel dimensions must be positive".into()));
        }
        let time_len = ipow(grid.n, dims.len())?;
        let slots = dims.iter().try_fold(1usize, |a, &d| a.checked_mul(d)).ok_or(Error::DimensionBudget {
            bytes: f64::INFINITY,
            budget: usize::MAX as f64,
        })?;
        let total = slots.checked_mul(time_len).ok_or(Error::DimensionBudget {
            bytes: slots as f64 * time_len as f64 * 16.0,
            budget: usize::MAX as f64,
        })?;
        check_len("tensor", data.len(), total)?;
        Ok(TensorPulse { grid, dims, time_len, data })
    }

    pub fn zeros(grid: TimeGrid, dims: Vec<usize>) -> Result<Self> {
        let total = dims.iter().product::<usize>() * ipow(grid.n, dims.len())?;
        Self::new(grid, dims, vec![C64::new(0.0, 0.0); total])
    }

    /// `m`-way tensor of an `m`-channel system.
    pub fn square(grid: TimeGrid, m: usize) -> Result<Self> {
        Self::zeros(grid, vec![m; m])
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }
    pub fn dims(&self) -> &[usize] {
        &self.dims
    }
    pub fn ways(&self) -> usize {
        self.dims.len()
    }
    pub fn time_len(&self) -> usize {
        self.time_len
    }
    pub fn slot_count(&self) -> usize {
        self.dims.iter().product()
    }
    pub fn data(&self) -> &[C64] {
        &self.data
    }
    pub fn data_mut(&mut self) -> &mut [C64] {
        &mut self.data
    }
    pub fn into_data(self) -> Vec<C64> {
        self.data
    }

    /// Common label range when every axis has the same one.
    pub fn uniform_dim(&self) -> Option<usize> {
        let d = *self.dims.first()?;
        self.dims.iter().all(|&x| x == d).then_some(d)
    }

    pub fn slot_index(&self, labels: &[usize]) -> usize {
        debug_assert_eq!(labels.len(), self.dims.len());
        labels.iter().zip(&self.dims).fold(0, |acc, (&l, &d)| {
            debug_assert!(l < d);
            acc * d + l
        })
    }

    pub fn slot_labels(&self, mut idx: usize) -> Vec<usize> {
        let mut out = vec![0; self.dims.len()];
        for p in (0..self.dims.len()).rev() {
            out[p] = idx % self.dims[p];
            idx /= self.dims[p];
        }
        out
    }

    pub fn slot(&self, labels: &[usize]) -> &[C64] {
        let s = self.slot_index(labels);
        &self.data[s * self.time_len..(s + 1) * self.time_len]
    }

    pub fn slot_mut(&mut self, labels: &[usize]) -> &mut [C64] {
        let s = self.slot_index(labels);
        let t = self.time_len;
        &mut self.data[s * t..(s + 1) * t]
    }

    pub fn slot_by_index(&self, s: usize) -> &[C64] {
        &self.data[s * self.time_len..(s + 1) * self.time_len]
    }

    pub(crate) fn slot_is_zero(&self, s: usize) -> bool {
        self.slot_by_index(s).iter().all(|z| z.re == 0.0 && z.im == 0.0)
    }

    /// Plain `Σ|ψ|² dt^N` over all slots (not the CCR norm).
    pub fn l2_norm_sq(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.grid.dt.powi(self.ways() as i32)
    }

    /// Unique representative of the same state: every slot is moved to its
    /// sorted label order with the time axes permuted along, then averaged
    /// over permutations of axes sharing a label.
    pub fn canonical(&self) -> Result<TensorPulse> {
        let m = self.uniform_dim().ok_or_else(|| Error::ShapeMismatch("canonical form needs uniform labels".into()))?;
        let ways = self.ways();
        let n = self.grid.n;
        let mut sorted = TensorPulse::zeros(self.grid, self.dims.clone())?;
        let strides: Vec<usize> = (0..ways).map(|q| n.pow((ways - 1 - q) as u32)).collect();
        let mut r = vec![0usize; ways];
        for s in 0..self.slot_count() {
            if self.slot_is_zero(s) {
                continue;
            }
            let labels = self.slot_labels(s);
            let mut order: Vec<usize> = (0..ways).collect();
            order.sort_by_key(|&p| labels[p]);
            let target_labels: Vec<usize> = order.iter().map(|&p| labels[p]).collect();
            let target = sorted.slot_index(&target_labels);
            // canonical axis q reads the source axis order[q]
            let src = self.slot_by_index(s);
            let dst = &mut sorted.data[target * self.time_len..(target + 1) * self.time_len];
            for (flat, d) in dst.iter_mut().enumerate() {
                unravel(flat, n, ways, &mut r);
                let mut sf = 0;
                for q in 0..ways {
                    sf += r[q] * strides[order[q]];
                }
                *d += src[sf];
            }
        }
        let mut out = TensorPulse::zeros(self.grid, self.dims.clone())?;
        for s in 0..sorted.slot_count() {
            if sorted.slot_is_zero(s) {
                continue;
            }
            let labels = sorted.slot_labels(s);
            let perms = LabelPermutations::new(&labels, &labels, MAX_PAIRING)?;
            let count = perms.len() as f64;
            let src = sorted.slot_by_index(s);
            let dst_range = s * self.time_len..(s + 1) * self.time_len;
            let mut acc = vec![C64::new(0.0, 0.0); self.time_len];
            for perm in perms.iter() {
                for (flat, a) in acc.iter_mut().enumerate() {
                    unravel(flat, n, ways, &mut r);
                    let mut sf = 0;
                    for q in 0..ways {
                        sf += r[q] * strides[perm[q]];
                    }
                    *a += src[sf];
                }
            }
            for (d, a) in out.data[dst_range].iter_mut().zip(acc) {
                *d = a / count;
            }
        }
        let _ = m;
        Ok(out)
    }
}

/// `k_i` photons in channel `i`; the first `k₁` axes belong to channel 1, the
/// next `k₂` to channel 2, and so on.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiplicityPulse {
    grid: TimeGrid,
    multiplicities: Vec<usize>,
    data: Vec<C64>,
}

impl MultiplicityPulse {
    pub fn new(grid: TimeGrid, multiplicities: Vec<usize>, data: Vec<C64>) -> Result<Self> {
        if multiplicities.is_empty() || multiplicities.iter().any(|&k| k == 0) {
            return Err(Error::InvalidInput("multiplicities must be positive".into()));
        }
        if let Some(&k) = multiplicities.iter().find(|&&k| k > MAX_PAIRING) {
            return Err(Error::TooManyPhotons { count: k, limit: MAX_PAIRING });
        }
        let big_n: usize = multiplicities.iter().sum();
        check_len("multiplicity pulse", data.len(), ipow(grid.n, big_n)?)?;
        Ok(MultiplicityPulse { grid, multiplicities, data })
    }

    pub fn from_fn(grid: TimeGrid, multiplicities: Vec<usize>, f: impl Fn(&[f64]) -> C64) -> Result<Self> {
        let big_n: usize = multiplicities.iter().sum();
        let inner = FunctionPulse::from_fn(grid, big_n.max(1), f)?;
        Self::new(grid, multiplicities, inner.data)
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }
    pub fn multiplicities(&self) -> &[usize] {
        &self.multiplicities
    }
    pub fn m(&self) -> usize {
        self.multiplicities.len()
    }
    pub fn photon_count(&self) -> usize {
        self.multiplicities.iter().sum()
    }
    pub fn samples(&self) -> &[C64] {
        &self.data
    }

    /// Channel label of each time axis.
    pub fn channel_of_axis(&self) -> Vec<usize> {
        self.multiplicities.iter().enumerate().flat_map(|(i, &k)| core::iter::repeat(i).take(k)).collect()
    }

    pub fn scaled(&self, s: C64) -> Self {
        let mut out = self.clone();
        out.data.iter_mut().for_each(|z| *z *= s);
        out
    }

    /// Rescale to unit CCR norm.
    pub fn normalized(&self) -> Result<Self> {
        let nrm = self.inner_ccr(self)?.re;
        if !(nrm > 0.0) {
            return Err(Error::InvalidInput("cannot normalize a zero pulse".into()));
        }
        Ok(self.scaled(C64::new(1.0 / nrm.sqrt(), 0.0)))
    }
}

/// `Π_{j=1}^N (Σ_k B_k*(ψ_jk)) |0⟩`, stored as `factors[j][k][t]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductSumPulse {
    grid: TimeGrid,
    m: usize,
    factors: Vec<Vec<Vec<C64>>>,
}

impl ProductSumPulse {
    pub fn new(grid: TimeGrid, m: usize, factors: Vec<Vec<Vec<C64>>>) -> Result<Self> {
        if m == 0 || factors.is_empty() {
            return Err(Error::InvalidInput("product-sum pulse needs N ≥ 1 and m ≥ 1".into()));
        }
        for row in &factors {
            if row.len() != m {
                return Err(Error::ShapeMismatch(format!("factor has {} channels, expected {m}", row.len())));
            }
            for f in row {
                check_len("product-sum entry", f.len(), grid.n)?;
            }
        }
        Ok(ProductSumPulse { grid, m, factors })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }
    pub fn m(&self) -> usize {
        self.m
    }
    pub fn factor_count(&self) -> usize {
        self.factors.len()
    }
    pub fn factors(&self) -> &[Vec<Vec<C64>>] {
        &self.factors
    }

    pub fn scaled(&self, s: C64) -> Self {
        let mut out = self.clone();
        out.factors[0].iter_mut().flatten().for_each(|z| *z *= s);
        out
    }

    /// Expand into the equivalent `m`-label, `N`-way tensor.
    pub fn to_tensor(&self) -> Result<TensorPulse> {
        let big_n = self.factors.len();
        let n = self.grid.n;
        let mut out = TensorPulse::zeros(self.grid, vec![self.m; big_n])?;
        let tl = out.time_len();
        let mut idx = vec![0usize; big_n];
        for s in 0..out.slot_count() {
            let labels = out.slot_labels(s);
            let rows: Vec<&Vec<C64>> = labels.iter().enumerate().map(|(j, &k)| &self.factors[j][k]).collect();
            if rows.iter().any(|r| r.iter().all(|z| z.re == 0.0 && z.im == 0.0)) {
                continue;
            }
            let dst = &mut out.data[s * tl..(s + 1) * tl];
            for (flat, d) in dst.iter_mut().enumerate() {
                unravel(flat, n, big_n, &mut idx);
                *d = idx.iter().zip(&rows).fold(C64::new(1.0, 0.0), |a, (&i, r)| a * r[i]);
            }
        }
        Ok(out)
    }
}

/// Embed `ψ` into the slot `(1,…,m)` of an `m`-way tensor.
pub fn lift(p: &FunctionPulse) -> TensorPulse {
    let m = p.m;
    let mut out = TensorPulse::zeros(p.grid, vec![m; m]).expect("sizes already validated");
    let labels: Vec<usize> = (0..m).collect();
    out.slot_mut(&labels).copy_from_slice(&p.data);
    out
}

/// Embed a multiplicity pulse into the slot carrying each axis' channel.
pub fn lift_multiplicity(p: &MultiplicityPulse) -> TensorPulse {
    let m = p.m();
    let labels = p.channel_of_axis();
    let mut out = TensorPulse::zeros(p.grid, vec![m; labels.len()]).expect("sizes already validated");
    out.slot_mut(&labels).copy_from_slice(&p.data);
    out
}
