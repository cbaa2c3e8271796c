use alloc::vec::Vec;

use crate::error::{Error, Result};
#[allow(unused_imports)]
use num_traits::Float;

/// Uniform sampling `t_j = t_min + j*dt`, `j = 0..n`.
///
/// The right end `t_min + n*dt` is excluded, so `[t_min, t_max)` split into
/// `n` cells has `dt = (t_max - t_min)/n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub t_min: f64,
    pub dt: f64,
    pub n: usize,
}

impl TimeGrid {
    pub fn new(t_min: f64, dt: f64, n: usize) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() || !t_min.is_finite() {
            return Err(Error::InvalidInput(alloc::format!("grid step {dt} / origin {t_min}")));
        }
        if n < 2 {
            return Err(Error::InvalidInput(alloc::format!("grid needs at least 2 points, got {n}")));
        }
        Ok(TimeGrid { t_min, dt, n })
    }

    pub fn from_range(t_min: f64, t_max: f64, n: usize) -> Result<Self> {
        if !(t_max > t_min) {
            return Err(Error::InvalidInput(alloc::format!("t_max {t_max} must exceed t_min {t_min}")));
        }
        Self::new(t_min, (t_max - t_min) / n as f64, n)
    }

    #[inline]
    pub fn t(&self, j: usize) -> f64 {
        self.t_min + j as f64 * self.dt
    }

    pub fn t_end(&self) -> f64 {
        self.t(self.n)
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.t(j)).collect()
    }

    pub fn is_pow2(&self) -> bool {
        self.n.is_power_of_two()
    }

    pub fn same_as(&self, other: &TimeGrid) -> bool {
        self.n == other.n
            && (self.dt - other.dt).abs() <= 1e-12 * self.dt
            && (self.t_min - other.t_min).abs() <= 1e-12 * self.dt.max(self.t_min.abs())
    }
}
