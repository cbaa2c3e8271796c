//! Inner products under the canonical commutation relations.
//!
//! `⟨0| b_{l₁}(r₁)⋯b_{l_N}(r_N) b*_{l'₁}(t₁)⋯b*_{l'_N}(t_N) |0⟩` is the sum, over
//! permutations `σ` with `l'_{σ(p)} = l_p`, of `Π_p δ(r_p − t_{σ(p)})`. All inner
//! products below reduce to weighted sums of permuted grid dot products.

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use super::{ipow, FunctionPulse, MultiplicityPulse, ProductSumPulse, TensorPulse};
use crate::error::{Error, Result};
use crate::linalg::C64;

/// Photons per channel for which pairings are enumerated.
pub const MAX_PAIRING: usize = 6;
/// Factor count for product-sum photon numbers.
pub const MAX_PRODUCT_FACTORS: usize = 4;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// All axis maps `σ` with `labels_b[σ(p)] = labels_a[p]`.
#[derive(Debug, Clone)]
pub struct LabelPermutations {
    perms: Vec<Vec<usize>>,
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, head);
            out.push(tail);
        }
    }
    out
}

impl LabelPermutations {
    pub fn new(labels_a: &[usize], labels_b: &[usize], bound: usize) -> Result<Self> {
        let ways = labels_a.len();
        if labels_b.len() != ways {
            return Ok(LabelPermutations { perms: Vec::new() });
        }
        let top = labels_a.iter().chain(labels_b).copied().max().map_or(0, |x| x + 1);
        let mut perms = vec![vec![usize::MAX; ways]];
        for label in 0..top {
            let pa: Vec<usize> = (0..ways).filter(|&p| labels_a[p] == label).collect();
            let pb: Vec<usize> = (0..ways).filter(|&p| labels_b[p] == label).collect();
            if pa.len() != pb.len() {
                return Ok(LabelPermutations { perms: Vec::new() });
            }
            if pa.is_empty() {
                continue;
            }
            if pa.len() > bound {
                return Err(Error::TooManyPhotons { count: pa.len(), limit: bound });
            }
            let choices = permutations(&pb);
            let mut next = Vec::with_capacity(perms.len() * choices.len());
            for base in &perms {
                for ch in &choices {
                    let mut s = base.clone();
                    for (i, &p) in pa.iter().enumerate() {
                        s[p] = ch[i];
                    }
                    next.push(s);
                }
            }
            perms = next;
        }
        Ok(LabelPermutations { perms })
    }

    pub fn len(&self) -> usize {
        self.perms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &[usize]> {
        self.perms.iter().map(|p| p.as_slice())
    }
}

/// `Σ_r conj(a(r)) b(t)` with `t_{perm[p]} = r_p`, over an `n^ways` grid.
pub fn permuted_dot(a: &[C64], b: &[C64], n: usize, ways: usize, perm: &[usize]) -> C64 {
    if ways == 0 {
        return a[0].conj() * b[0];
    }
    let strides: Vec<usize> = (0..ways).map(|q| n.pow((ways - 1 - q) as u32)).collect();
    let sb: Vec<usize> = (0..ways).map(|p| strides[perm[p]]).collect();
    let inner = sb[ways - 1];
    let outer = n.pow((ways - 1) as u32);
    let mut idx = vec![0usize; ways.saturating_sub(1)];
    let mut base = 0usize;
    let mut acc = ZERO;
    for o in 0..outer {
        let row = &a[o * n..(o + 1) * n];
        let mut off = base;
        for z in row {
            acc += z.conj() * b[off];
            off += inner;
        }
        let mut p = ways - 1;
        while p > 0 {
            p -= 1;
            idx[p] += 1;
            base += sb[p];
            if idx[p] < n {
                break;
            }
            base -= n * sb[p];
            idx[p] = 0;
        }
    }
    acc
}

/// States whose overlaps follow from the CCR.
pub trait FockState {
    fn photon_count(&self) -> usize;
    fn inner_ccr(&self, other: &Self) -> Result<C64>;
    /// Expected photon number per channel, in the normalized state.
    fn channel_photon_numbers(&self) -> Result<Vec<f64>>;
}

pub fn inner_product_ccr<S: FockState>(a: &S, b: &S) -> Result<C64> {
    a.inner_ccr(b)
}

fn same_grid(a: &crate::grid::TimeGrid, b: &crate::grid::TimeGrid) -> Result<()> {
    if a.same_as(b) {
        Ok(())
    } else {
        Err(Error::ShapeMismatch("states live on different grids".into()))
    }
}

impl FockState for FunctionPulse {
    fn photon_count(&self) -> usize {
        self.m
    }

    fn inner_ccr(&self, other: &Self) -> Result<C64> {
        same_grid(&self.grid, &other.grid)?;
        if self.m != other.m {
            return Err(Error::ShapeMismatch("pulses have different channel counts".into()));
        }
        let s: C64 = self.data.iter().zip(&other.data).map(|(a, b)| a.conj() * b).sum();
        Ok(s * self.grid.dt.powi(self.m as i32))
    }

    fn channel_photon_numbers(&self) -> Result<Vec<f64>> {
        Ok(vec![1.0; self.m])
    }
}

impl FockState for TensorPulse {
    fn photon_count(&self) -> usize {
        self.ways()
    }

    fn inner_ccr(&self, other: &Self) -> Result<C64> {
        same_grid(&self.grid, &other.grid)?;
        if self.dims != other.dims {
            return Err(Error::ShapeMismatch("tensors have different label ranges".into()));
        }
        let ways = self.ways();
        let n = self.grid.n;
        let live_a: Vec<usize> = (0..self.slot_count()).filter(|&s| !self.slot_is_zero(s)).collect();
        let live_b: Vec<usize> = (0..other.slot_count()).filter(|&s| !other.slot_is_zero(s)).collect();
        let mut acc = ZERO;
        for &sa in &live_a {
            let la = self.slot_labels(sa);
            for &sb in &live_b {
                let lb = other.slot_labels(sb);
                let perms = LabelPermutations::new(&la, &lb, super::MAX_PAIRING)?;
                for perm in perms.iter() {
                    acc += permuted_dot(self.slot_by_index(sa), other.slot_by_index(sb), n, ways, perm);
                }
            }
        }
        Ok(acc * self.grid.dt.powi(ways as i32))
    }

    fn channel_photon_numbers(&self) -> Result<Vec<f64>> {
        let m = self
            .uniform_dim()
            .ok_or_else(|| Error::ShapeMismatch("photon numbers need uniform labels".into()))?;
        let norm = self.inner_ccr(self)?.re;
        if !(norm > 0.0) {
            return Ok(vec![0.0; m]);
        }
        let mut out = vec![0.0; m];
        for (k, o) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for t in 0..self.grid.n {
                let r = reduced_state(self, k, t)?;
                acc += r.inner_ccr(&r)?.re;
            }
            *o = acc * self.grid.dt / norm;
        }
        Ok(out)
    }
}

impl FockState for MultiplicityPulse {
    fn photon_count(&self) -> usize {
        self.multiplicities.iter().sum()
    }

    fn inner_ccr(&self, other: &Self) -> Result<C64> {
        same_grid(&self.grid, &other.grid)?;
        if self.multiplicities != other.multiplicities {
            return Err(Error::ShapeMismatch("pulses have different multiplicities".into()));
        }
        let labels = self.channel_of_axis();
        let ways = labels.len();
        let perms = LabelPermutations::new(&labels, &labels, MAX_PAIRING)?;
        let mut acc = ZERO;
        for perm in perms.iter() {
            acc += permuted_dot(&self.data, &other.data, self.grid.n, ways, perm);
        }
        Ok(acc * self.grid.dt.powi(ways as i32))
    }

    fn channel_photon_numbers(&self) -> Result<Vec<f64>> {
        Ok(self.multiplicities.iter().map(|&k| k as f64).collect())
    }
}

fn permanent(g: &[Vec<C64>], rows: &[usize], cols: &[usize]) -> C64 {
    if rows.is_empty() {
        return C64::new(1.0, 0.0);
    }
    let r = rows[0];
    let mut acc = ZERO;
    for (i, &c) in cols.iter().enumerate() {
        let mut rest = cols.to_vec();
        rest.remove(i);
        acc += g[r][c] * permanent(g, &rows[1..], &rest);
    }
    acc
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

impl ProductSumPulse {
    /// Single-photon overlaps `⟨ψ_a, ψ'_b⟩ = Σ_k ∫ ψ_ak* ψ'_bk`.
    fn gram(&self, other: &Self) -> Vec<Vec<C64>> {
        let dt = self.grid.dt;
        self.factors
            .iter()
            .map(|fa| {
                other
                    .factors
                    .iter()
                    .map(|fb| fa.iter().zip(fb).map(|(x, y)| dot(x, y)).sum::<C64>() * dt)
                    .collect()
            })
            .collect()
    }
}

impl FockState for ProductSumPulse {
    fn photon_count(&self) -> usize {
        self.factors.len()
    }

    fn inner_ccr(&self, other: &Self) -> Result<C64> {
        same_grid(&self.grid, &other.grid)?;
        if self.m != other.m || self.factors.len() != other.factors.len() {
            return Err(Error::ShapeMismatch("product-sum pulses differ in shape".into()));
        }
        let big_n = self.factors.len();
        if big_n > MAX_PAIRING {
            return Err(Error::TooManyPhotons { count: big_n, limit: MAX_PAIRING });
        }
        let g = self.gram(other);
        let idx: Vec<usize> = (0..big_n).collect();
        Ok(permanent(&g, &idx, &idx))
    }

    fn channel_photon_numbers(&self) -> Result<Vec<f64>> {
        let big_n = self.factors.len();
        if big_n > MAX_PRODUCT_FACTORS {
            return Err(Error::TooManyPhotons { count: big_n, limit: MAX_PRODUCT_FACTORS });
        }
        let g = self.gram(self);
        let all: Vec<usize> = (0..big_n).collect();
        let norm = permanent(&g, &all, &all).re;
        if !(norm > 0.0) {
            return Ok(vec![0.0; self.m]);
        }
        let dt = self.grid.dt;
        let mut out = vec![0.0; self.m];
        for (k, o) in out.iter_mut().enumerate() {
            let mut acc = ZERO;
            for bra in 0..big_n {
                for ket in 0..big_n {
                    let overlap = dot(&self.factors[bra][k], &self.factors[ket][k]) * dt;
                    let rows: Vec<usize> = all.iter().copied().filter(|&j| j != bra).collect();
                    let cols: Vec<usize> = all.iter().copied().filter(|&j| j != ket).collect();
                    acc += overlap * permanent(&g, &rows, &cols);
                }
            }
            *o = acc.re / norm;
        }
        Ok(out)
    }
}

/// `b_l(t_j)|Ψ⟩` as an `(N−1)`-photon tensor: for every axis `p` carrying
/// label `l`, that axis is pinned at `t_j` and removed.
pub fn reduced_state(psi: &TensorPulse, l: usize, tj: usize) -> Result<TensorPulse> {
    let m = psi
        .uniform_dim()
        .ok_or_else(|| Error::ShapeMismatch("reduction needs uniform labels".into()))?;
    let ways = psi.ways();
    if ways == 0 {
        return Err(Error::InvalidInput("vacuum has nothing to annihilate".into()));
    }
    let n = psi.grid.n;
    let mut out = TensorPulse::zeros(psi.grid, vec![m; ways - 1])?;
    let out_tl = out.time_len();
    for s in 0..psi.slot_count() {
        if psi.slot_is_zero(s) {
            continue;
        }
        let labels = psi.slot_labels(s);
        let src = psi.slot_by_index(s);
        for p in (0..ways).filter(|&p| labels[p] == l) {
            let mut rest = labels.clone();
            rest.remove(p);
            let target = out.slot_index(&rest);
            let lo_len = ipow(n, ways - 1 - p)?;
            let dst = &mut out.data[target * out_tl..(target + 1) * out_tl];
            for (flat, d) in dst.iter_mut().enumerate() {
                let hi = flat / lo_len;
                let lo = flat % lo_len;
                *d += src[(hi * n + tj) * lo_len + lo];
            }
        }
    }
    Ok(out)
}
