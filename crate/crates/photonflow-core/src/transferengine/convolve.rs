//! Per-fiber channel-mixing kernels: time-domain recursion and FFT multiply.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::fft::{bin_frequency, Fft};
use crate::grid::TimeGrid;
use crate::linalg::{phi_functions, CMat, C64};
use crate::sysmodel::StateSpaceKernel;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Maps `in_dim` sampled signals (rows of length `n`) to `out_dim` signals.
pub trait FiberOp: Sync {
    fn in_dim(&self) -> usize;
    fn out_dim(&self) -> usize;
    fn apply(&self, u: &[C64], y: &mut [C64]);
}

fn row_major(x: &CMat) -> Vec<C64> {
    let mut out = Vec::with_capacity(x.len());
    for i in 0..x.nrows() {
        for j in 0..x.ncols() {
            out.push(x[(i, j)]);
        }
    }
    out
}

/// Coefficients (ascending powers) of the Lagrange basis on `nodes`.
fn lagrange_basis(nodes: &[f64]) -> Vec<Vec<f64>> {
    let s = nodes.len();
    (0..s)
        .map(|i| {
            let mut poly = vec![1.0];
            let mut denom = 1.0;
            for (k, &xk) in nodes.iter().enumerate() {
                if k == i {
                    continue;
                }
                let mut next = vec![0.0; poly.len() + 1];
                for (d, &co) in poly.iter().enumerate() {
                    next[d + 1] += co;
                    next[d] -= xk * co;
                }
                poly = next;
                denom *= nodes[i] - xk;
            }
            poly.into_iter().map(|co| co / denom).collect()
        })
        .collect()
}

/// Causal convolution with a state-space kernel.
///
/// The state `x(t) = ∫_{-∞}^t e^{a(t-r)} b u(r) dr` is advanced one cell at a
/// time with the exponential propagator, integrating the input against a
/// local Lagrange interpolant through `stencil` samples. The exponential is
/// handled exactly, so the error is set by how well the interpolant follows
/// the input: `O(dt^stencil)` for smooth pulses. Samples outside the grid
/// count as zero.
#[derive(Debug, Clone)]
pub struct TimeConvolver {
    n: usize,
    p: usize,
    q: usize,
    s: usize,
    delta: Vec<C64>,
    c: Vec<C64>,
    phi: Vec<C64>,
    offsets: Vec<isize>,
    weights: Vec<Vec<C64>>,
}

impl TimeConvolver {
    pub fn new(kernel: &StateSpaceKernel, grid: &TimeGrid, stencil: usize) -> Result<Self> {
        if stencil < 2 || stencil % 2 != 0 {
            return Err(Error::InvalidInput(alloc::format!("stencil must be even and ≥ 2, got {stencil}")));
        }
        let (p, q, s) = (kernel.outputs(), kernel.inputs(), kernel.order());
        let h = grid.dt;
        let first = -((stencil / 2) as isize - 1);
        let offsets: Vec<isize> = (0..stencil as isize).map(|i| first + i).collect();
        let (phi, weights) = if s == 0 {
            (Vec::new(), Vec::new())
        } else {
            let phis = phi_functions(&(&kernel.a * C64::new(h, 0.0)), stencil);
            let nodes: Vec<f64> = offsets.iter().map(|&o| o as f64).collect();
            let basis = lagrange_basis(&nodes);
            // ∫_0^h e^{a(h-τ)} (τ/h)^k dτ = h k! φ_{k+1}(a h)
            let mut moments = Vec::with_capacity(stencil);
            let mut fact = 1.0;
            for k in 0..stencil {
                if k > 0 {
                    fact *= k as f64;
                }
                moments.push(&phis[k + 1] * C64::new(h * fact, 0.0));
            }
            let weights = basis
                .iter()
                .map(|coef| {
                    let mut w = CMat::zeros(s, s);
                    for (k, &co) in coef.iter().enumerate() {
                        w += &moments[k] * C64::new(co, 0.0);
                    }
                    row_major(&(w * &kernel.b))
                })
                .collect();
            (row_major(&phis[0]), weights)
        };
        Ok(TimeConvolver {
            n: grid.n,
            p,
            q,
            s,
            delta: row_major(&kernel.delta),
            c: row_major(&kernel.c),
            phi,
            offsets,
            weights,
        })
    }
}

impl FiberOp for TimeConvolver {
    fn in_dim(&self) -> usize {
        self.q
    }
    fn out_dim(&self) -> usize {
        self.p
    }

    fn apply(&self, u: &[C64], y: &mut [C64]) {
        let (n, p, q, s) = (self.n, self.p, self.q, self.s);
        debug_assert_eq!(u.len(), q * n);
        debug_assert_eq!(y.len(), p * n);
        let mut x = vec![ZERO; s];
        let mut xn = vec![ZERO; s];
        for k in 0..n {
            for i in 0..p {
                let mut acc = ZERO;
                for j in 0..q {
                    acc += self.delta[i * q + j] * u[j * n + k];
                }
                for l in 0..s {
                    acc += self.c[i * s + l] * x[l];
                }
                y[i * n + k] = acc;
            }
            if s == 0 || k + 1 == n {
                continue;
            }
            for (r, xr) in xn.iter_mut().enumerate() {
                let row = &self.phi[r * s..(r + 1) * s];
                *xr = row.iter().zip(&x).map(|(a, b)| a * b).sum();
            }
            for (w, &off) in self.weights.iter().zip(&self.offsets) {
                let idx = k as isize + off;
                if idx < 0 || idx >= n as isize {
                    continue;
                }
                let idx = idx as usize;
                for j in 0..q {
                    let uj = u[j * n + idx];
                    if uj.re == 0.0 && uj.im == 0.0 {
                        continue;
                    }
                    for r in 0..s {
                        xn[r] += w[r * q + j] * uj;
                    }
                }
            }
            core::mem::swap(&mut x, &mut xn);
        }
    }
}

/// Linear convolution by zero-padding to twice the grid, multiplying bin by
/// bin with a closed-form frequency response and transforming back.
#[derive(Debug, Clone)]
pub struct FrequencyMultiplier {
    n: usize,
    p: usize,
    q: usize,
    fft: Fft,
    response: Vec<C64>,
}

impl FrequencyMultiplier {
    pub fn new(p: usize, q: usize, grid: &TimeGrid, response: impl Fn(f64) -> Result<CMat>) -> Result<Self> {
        if !grid.is_pow2() {
            return Err(Error::GridNotPow2 { n: grid.n });
        }
        let len = 2 * grid.n;
        let mut table = Vec::with_capacity(len * p * q);
        for k in 0..len {
            let g = response(bin_frequency(k, len, grid.dt))?;
            if g.shape() != (p, q) {
                return Err(Error::ShapeMismatch("frequency response has the wrong shape".into()));
            }
            table.extend(row_major(&g));
        }
        Ok(FrequencyMultiplier { n: grid.n, p, q, fft: Fft::new(len), response: table })
    }

    pub fn from_kernel(kernel: &StateSpaceKernel, grid: &TimeGrid) -> Result<Self> {
        Self::new(kernel.outputs(), kernel.inputs(), grid, |w| {
            kernel.frequency_response(w).ok_or(Error::Unstable { margin: 0.0 })
        })
    }
}

impl FiberOp for FrequencyMultiplier {
    fn in_dim(&self) -> usize {
        self.q
    }
    fn out_dim(&self) -> usize {
        self.p
    }

    fn apply(&self, u: &[C64], y: &mut [C64]) {
        let (n, p, q) = (self.n, self.p, self.q);
        let len = 2 * n;
        let mut spectra = vec![ZERO; q * len];
        for j in 0..q {
            let buf = &mut spectra[j * len..(j + 1) * len];
            buf[..n].copy_from_slice(&u[j * n..(j + 1) * n]);
            self.fft.forward(buf);
        }
        let mut out = vec![ZERO; len];
        for i in 0..p {
            for (k, o) in out.iter_mut().enumerate() {
                let g = &self.response[k * p * q + i * q..k * p * q + (i + 1) * q];
                *o = (0..q).map(|j| g[j] * spectra[j * len + k]).sum();
            }
            self.fft.inverse(&mut out);
            y[i * n..(i + 1) * n].copy_from_slice(&out[..n]);
        }
    }
}
