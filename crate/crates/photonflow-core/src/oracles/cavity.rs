//! Two-port cavity `S₋ = I`, `C₋ = [√κ₁; √κ₂]`, `Ω₋ = ω_d` with one photon in
//! each input channel.
//!
//! With `K` the causal convolution against `e^{-αt}`, `α = iω_d + (κ₁+κ₂)/2`,
//! the output slots are
//!
//! ```text
//! (1,1) = √(κ₁κ₂) [κ₁ Φ − Φ₂]
//! (1,2) = ψ − κ₁Φ₁ − κ₂Φ₂ + κ₁κ₂ [Φ(r₁,r₂) + Φ(r₂,r₁)]
//! (2,2) = √(κ₁κ₂) [κ₂ Φ − Φ₁]
//! ```
//!
//! where `Φ₁ = K₁ψ`, `Φ₂ = K₂ψ` and `Φ = K₁K₂ψ`.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::linalg::C64;
use crate::photonstate::{FunctionPulse, ProductSumPulse, TensorPulse};
use crate::sysmodel::{cavity_params, realize, Realization};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavitySpec {
    pub kappa1: f64,
    pub kappa2: f64,
    pub omega_d: f64,
}

impl CavitySpec {
    pub fn new(kappa1: f64, kappa2: f64, omega_d: f64) -> Result<Self> {
        let spec = CavitySpec { kappa1, kappa2, omega_d };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.kappa1 >= 0.0 && self.kappa2 >= 0.0 && self.kappa1 + self.kappa2 > 0.0 && self.omega_d.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(alloc::format!("cavity needs κ ≥ 0 and κ₁+κ₂ > 0, got {self:?}")))
        }
    }

    pub fn alpha(&self) -> C64 {
        C64::new(0.5 * (self.kappa1 + self.kappa2), self.omega_d)
    }

    pub fn realization(&self) -> Result<Realization> {
        realize(&cavity_params(self.kappa1, self.kappa2, self.omega_d)?)
    }
}

/// `∫_{t_0}^{t_k} e^{-α(t_k - r)} f(r) dr` by the cumulative trapezoid rule.
pub fn cumulative_exp(f: &[C64], alpha: C64, h: f64) -> Vec<C64> {
    let decay = (-alpha * h).exp();
    let mut out = Vec::with_capacity(f.len());
    let mut acc = C64::new(0.0, 0.0);
    for (k, &x) in f.iter().enumerate() {
        if k > 0 {
            acc = decay * acc + (decay * f[k - 1] + x) * (0.5 * h);
        }
        out.push(acc);
    }
    out
}

fn along_first(data: &[C64], n: usize, alpha: C64, h: f64) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); n * n];
    let mut col = vec![C64::new(0.0, 0.0); n];
    for j in 0..n {
        for i in 0..n {
            col[i] = data[i * n + j];
        }
        for (i, v) in cumulative_exp(&col, alpha, h).into_iter().enumerate() {
            out[i * n + j] = v;
        }
    }
    out
}

fn along_second(data: &[C64], n: usize, alpha: C64, h: f64) -> Vec<C64> {
    data.chunks(n).flat_map(|row| cumulative_exp(row, alpha, h)).collect()
}

fn require_two(pulse: &FunctionPulse) -> Result<()> {
    if pulse.m() != 2 {
        return Err(Error::ShapeMismatch(alloc::format!("cavity oracle takes 2 channels, got {}", pulse.m())));
    }
    Ok(())
}

/// Output tensor for an entangled two-photon input.
pub fn cavity_two_photon(spec: &CavitySpec, pulse: &FunctionPulse) -> Result<TensorPulse> {
    spec.validate()?;
    require_two(pulse)?;
    let grid = *pulse.grid();
    let (n, h, alpha) = (grid.n, grid.dt, spec.alpha());
    let psi = pulse.samples();
    let phi1 = along_first(psi, n, alpha, h);
    let phi2 = along_second(psi, n, alpha, h);
    let phi = along_second(&phi1, n, alpha, h);
    let (k1, k2) = (spec.kappa1, spec.kappa2);
    let g = (k1 * k2).sqrt();
    let mut out = TensorPulse::square(grid, 2)?;
    {
        let s = out.slot_mut(&[0, 0]);
        for (i, d) in s.iter_mut().enumerate() {
            *d = (phi[i] * k1 - phi2[i]) * g;
        }
    }
    {
        let s = out.slot_mut(&[0, 1]);
        for a in 0..n {
            for b in 0..n {
                let i = a * n + b;
                let swapped = phi[b * n + a];
                s[i] = psi[i] - phi1[i] * k1 - phi2[i] * k2 + (phi[i] + swapped) * (k1 * k2);
            }
        }
    }
    {
        let s = out.slot_mut(&[1, 1]);
        for (i, d) in s.iter_mut().enumerate() {
            *d = (phi[i] * k2 - phi1[i]) * g;
        }
    }
    Ok(out)
}

fn outer(grid: TimeGrid, a: &[C64], b: &[C64]) -> Vec<C64> {
    let mut v = Vec::with_capacity(grid.n * grid.n);
    for x in a {
        for y in b {
            v.push(x * y);
        }
    }
    v
}

/// Per-photon output pulses for the product input `ξ₁ ⊗ ξ₂`:
/// photon 1 leaves as `(ξ₁ − κ₁η₁, −√(κ₁κ₂) η₁)` over the two channels and
/// photon 2 as `(−√(κ₁κ₂) η₂, ξ₂ − κ₂η₂)`, with `η_i = K ξ_i`.
pub fn cavity_product_factors(spec: &CavitySpec, grid: &TimeGrid, xi1: &[C64], xi2: &[C64]) -> Result<ProductSumPulse> {
    spec.validate()?;
    let (alpha, h) = (spec.alpha(), grid.dt);
    let (k1, k2) = (spec.kappa1, spec.kappa2);
    let g = (k1 * k2).sqrt();
    let eta1 = cumulative_exp(xi1, alpha, h);
    let eta2 = cumulative_exp(xi2, alpha, h);
    let f1 = vec![
        xi1.iter().zip(&eta1).map(|(x, e)| x - e * k1).collect(),
        eta1.iter().map(|e| -e * g).collect(),
    ];
    let f2 = vec![
        eta2.iter().map(|e| -e * g).collect(),
        xi2.iter().zip(&eta2).map(|(x, e)| x - e * k2).collect(),
    ];
    ProductSumPulse::new(*grid, 2, vec![f1, f2])
}

/// Product-input shortcut: the same three components, built from the 1-D
/// integrals `η_i` instead of two-dimensional sweeps.
pub fn cavity_two_photon_product(spec: &CavitySpec, grid: &TimeGrid, xi1: &[C64], xi2: &[C64]) -> Result<TensorPulse> {
    spec.validate()?;
    let (alpha, h) = (spec.alpha(), grid.dt);
    let (k1, k2) = (spec.kappa1, spec.kappa2);
    let g = (k1 * k2).sqrt();
    let eta1 = cumulative_exp(xi1, alpha, h);
    let eta2 = cumulative_exp(xi2, alpha, h);
    let out1: Vec<C64> = xi1.iter().zip(&eta1).map(|(x, e)| x - e * k1).collect();
    let out2: Vec<C64> = xi2.iter().zip(&eta2).map(|(x, e)| x - e * k2).collect();
    let mut out = TensorPulse::square(*grid, 2)?;
    for (d, v) in out.slot_mut(&[0, 0]).iter_mut().zip(outer(*grid, &out1, &eta2)) {
        *d = -v * g;
    }
    let cross = outer(*grid, &out1, &out2);
    let swapped = outer(*grid, &eta2, &eta1);
    for ((d, a), b) in out.slot_mut(&[0, 1]).iter_mut().zip(cross).zip(swapped) {
        *d = a + b * (k1 * k2);
    }
    for (d, v) in out.slot_mut(&[1, 1]).iter_mut().zip(outer(*grid, &eta1, &out2)) {
        *d = -v * g;
    }
    Ok(out)
}

/// `κ₁ = 0`, entangled input: only `(1,2) = ψ − κ₂Φ₂` survives.
pub fn cavity_kappa1_zero_entangled(kappa2: f64, pulse: &FunctionPulse) -> Result<TensorPulse> {
    let spec = CavitySpec::new(0.0, kappa2, 0.0)?;
    require_two(pulse)?;
    let grid = *pulse.grid();
    let phi2 = along_second(pulse.samples(), grid.n, spec.alpha(), grid.dt);
    let mut out = TensorPulse::square(grid, 2)?;
    for ((d, p), f) in out.slot_mut(&[0, 1]).iter_mut().zip(pulse.samples()).zip(phi2) {
        *d = p - f * kappa2;
    }
    Ok(out)
}

/// `κ₁ = 0`, product input: the state stays a product `ξ₁ ⊗ (ξ₂ − κ₂η₂)`.
pub fn cavity_kappa1_zero_product(kappa2: f64, grid: &TimeGrid, xi1: &[C64], xi2: &[C64]) -> Result<TensorPulse> {
    let spec = CavitySpec::new(0.0, kappa2, 0.0)?;
    let eta2 = cumulative_exp(xi2, spec.alpha(), grid.dt);
    let out2: Vec<C64> = xi2.iter().zip(&eta2).map(|(x, e)| x - e * kappa2).collect();
    let mut out = TensorPulse::square(*grid, 2)?;
    out.slot_mut(&[0, 1]).copy_from_slice(&outer(*grid, xi1, &out2));
    Ok(out)
}
