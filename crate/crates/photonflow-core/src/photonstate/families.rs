//! Closed-form single-photon wavepackets, each of unit norm.

use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::linalg::C64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shape {
    /// `(πσ²)^(-1/4) exp(-(t-c)²/(2σ²)) e^{iωt}`
    Gaussian { center: f64, sigma: f64, omega: f64 },
    /// `√κ e^{-κ(t-t0)/2}` for `t ≥ t0`
    ExpDecay { kappa: f64, t0: f64 },
    /// `√κ e^{κ(t-t0)/2}` for `t ≤ t0`
    RisingExp { kappa: f64, t0: f64 },
    /// `1/√(b-a)` on `[a, b)`
    Boxcar { start: f64, end: f64 },
}

impl Shape {
    pub fn gaussian(center: f64, sigma: f64) -> Self {
        Shape::Gaussian { center, sigma, omega: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Shape::Gaussian { center, sigma, omega } => sigma > 0.0 && center.is_finite() && omega.is_finite(),
            Shape::ExpDecay { kappa, t0 } | Shape::RisingExp { kappa, t0 } => kappa > 0.0 && t0.is_finite(),
            Shape::Boxcar { start, end } => end > start && start.is_finite() && end.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(alloc::format!("bad pulse shape parameters {self:?}")))
        }
    }

    pub fn eval(&self, t: f64) -> C64 {
        match *self {
            Shape::Gaussian { center, sigma, omega } => {
                let x = (t - center) / sigma;
                let a = (PI * sigma * sigma).powf(-0.25) * (-0.5 * x * x).exp();
                C64::from_polar(a, omega * t)
            }
            Shape::ExpDecay { kappa, t0 } => {
                if t >= t0 {
                    C64::new(kappa.sqrt() * (-0.5 * kappa * (t - t0)).exp(), 0.0)
                } else {
                    C64::new(0.0, 0.0)
                }
            }
            Shape::RisingExp { kappa, t0 } => {
                if t <= t0 {
                    C64::new(kappa.sqrt() * (0.5 * kappa * (t - t0)).exp(), 0.0)
                } else {
                    C64::new(0.0, 0.0)
                }
            }
            Shape::Boxcar { start, end } => {
                if t >= start && t < end {
                    C64::new(1.0 / (end - start).sqrt(), 0.0)
                } else {
                    C64::new(0.0, 0.0)
                }
            }
        }
    }

    pub fn sample(&self, grid: &TimeGrid) -> Vec<C64> {
        (0..grid.n).map(|j| self.eval(grid.t(j))).collect()
    }

    /// Exact `∫|ξ|²` over `[a, b)`; unity when the window covers the support.
    pub fn mass_in(&self, a: f64, b: f64) -> f64 {
        match *self {
            Shape::Gaussian { center, sigma, .. } => {
                0.5 * (libm::erf((b - center) / sigma) - libm::erf((a - center) / sigma))
            }
            Shape::ExpDecay { kappa, t0 } => {
                let lo = a.max(t0);
                if b <= lo {
                    0.0
                } else {
                    (-kappa * (lo - t0)).exp() - (-kappa * (b - t0)).exp()
                }
            }
            Shape::RisingExp { kappa, t0 } => {
                let hi = b.min(t0);
                if hi <= a {
                    0.0
                } else {
                    (kappa * (hi - t0)).exp() - (kappa * (a - t0)).exp()
                }
            }
            Shape::Boxcar { start, end } => {
                let lo = a.max(start);
                let hi = b.min(end);
                ((hi - lo) / (end - start)).max(0.0)
            }
        }
    }
}
