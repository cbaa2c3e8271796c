//! Input correlation kernel `Λ(t, r)` of a distinct-channel pulse.

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use super::FunctionPulse;
use crate::error::{Error, Result};
use crate::linalg::{CMat, C64};

/// Default cap on complex multiply-adds spent in the general reduction.
pub const DEFAULT_REDUCTION_BUDGET: f64 = 2e10;

/// Diagonal entries `Λ_kk(t_i, r_j)`, one `n x n` block per channel.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationKernel {
    n: usize,
    m: usize,
    data: Vec<C64>,
}

impl CorrelationKernel {
    pub fn zeros(n: usize, m: usize) -> Self {
        CorrelationKernel { n, m, data: vec![C64::new(0.0, 0.0); m * n * n] }
    }
    pub fn n(&self) -> usize {
        self.n
    }
    pub fn m(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn get(&self, k: usize, i: usize, j: usize) -> C64 {
        self.data[(k * self.n + i) * self.n + j]
    }

    /// Row `Λ_kk(t_i, ·)`.
    pub fn row(&self, k: usize, i: usize) -> &[C64] {
        let start = (k * self.n + i) * self.n;
        &self.data[start..start + self.n]
    }

    /// `diag(Λ_11(t_i, r_j), …, Λ_mm(t_i, r_j))`
    pub fn matrix(&self, i: usize, j: usize) -> CMat {
        let mut out = CMat::zeros(self.m, self.m);
        for k in 0..self.m {
            out[(k, k)] = self.get(k, i, j);
        }
        out
    }
}

pub fn correlation_kernel(pulse: &FunctionPulse) -> Result<CorrelationKernel> {
    correlation_kernel_with(pulse, DEFAULT_REDUCTION_BUDGET)
}

/// `Λ_kk(t, r) = ∫ ζ_k(τ, t)* ζ_k(τ, r) dτ`, where `ζ_k` places its second
/// argument on axis `k`. Product-tagged pulses use the factorized form.
pub fn correlation_kernel_with(pulse: &FunctionPulse, budget: f64) -> Result<CorrelationKernel> {
    let n = pulse.grid.n;
    let m = pulse.m;
    let dt = pulse.grid.dt;
    let mut out = CorrelationKernel::zeros(n, m);

    if let Some(factors) = pulse.factors() {
        let norms: Vec<f64> = factors.iter().map(|f| f.iter().map(|z| z.norm_sqr()).sum::<f64>() * dt).collect();
        for k in 0..m {
            let w: f64 = norms.iter().enumerate().filter(|&(i, _)| i != k).map(|(_, x)| x).product();
            let f = &factors[k];
            for i in 0..n {
                let a = f[i].conj() * w;
                for j in 0..n {
                    out.data[(k * n + i) * n + j] = a * f[j];
                }
            }
        }
        return Ok(out);
    }

    let rest = n.pow((m - 1) as u32);
    let ops = m as f64 * (n as f64) * (n as f64) * rest as f64 / 2.0;
    if ops > budget {
        return Err(Error::GridTooLarge { ops, limit: budget });
    }
    let w = dt.powi((m - 1) as i32);
    for k in 0..m {
        // gather axis k as rows of an n x rest matrix
        let lo = n.pow((m - 1 - k) as u32);
        let mut mat = vec![C64::new(0.0, 0.0); n * rest];
        for (flat, z) in pulse.data.iter().enumerate() {
            let hi = flat / (lo * n);
            let ik = (flat / lo) % n;
            let l = flat % lo;
            mat[ik * rest + hi * lo + l] = *z;
        }
        for i in 0..n {
            let ri = &mat[i * rest..(i + 1) * rest];
            for j in i..n {
                let rj = &mat[j * rest..(j + 1) * rest];
                let s: C64 = ri.iter().zip(rj).map(|(a, b)| a.conj() * b).sum::<C64>() * w;
                out.data[(k * n + i) * n + j] = s;
                out.data[(k * n + j) * n + i] = s.conj();
            }
        }
    }
    Ok(out)
}

/// Smooth part `[[Λ(r,t), 0], [0, Λ(t,r)]]` of the two-time input
/// correlation at grid indices `(i, j) = (t, r)`, with a flag telling
/// whether the singular `δ(t − r)` term is present.
pub fn two_time_correlation(kernel: &CorrelationKernel, i: usize, j: usize) -> (CMat, bool) {
    let m = kernel.m;
    let mut out = CMat::zeros(2 * m, 2 * m);
    for k in 0..m {
        out[(k, k)] = kernel.get(k, j, i);
        out[(m + k, m + k)] = kernel.get(k, i, j);
    }
    (out, i == j)
}
