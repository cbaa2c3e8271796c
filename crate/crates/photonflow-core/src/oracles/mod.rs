//! Closed-form reference outputs for the worked examples.
//!
//! None of these route through the transfer engine except
//! [`separable_transfer`], which is the rank-one assembly on top of the
//! engine's 1-D convolver.

mod beamsplitter;
mod cavity;

pub use beamsplitter::{beamsplitter_three_photon, beamsplitter_two_photon, three_photon_coefficients, three_photon_product};
pub use cavity::{
    cavity_kappa1_zero_entangled, cavity_kappa1_zero_product, cavity_product_factors, cavity_two_photon,
    cavity_two_photon_product, cumulative_exp, CavitySpec,
};

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::linalg::C64;
use crate::photonstate::{ProductSumPulse, TensorPulse};
use crate::sysmodel::Realization;
use crate::transferengine::{transfer_signals, TransferOptions};

const UNIT_NORM_TOL: f64 = 1e-6;

/// Product of independent photons `ξ_1 ⊗ … ⊗ ξ_m`, photon `k` entering
/// channel `k`. Each photon is convolved on its own, then the outputs are
/// multiplied back together.
pub fn separable_transfer(sys: &Realization, grid: &TimeGrid, factors: &[Vec<C64>]) -> Result<TensorPulse> {
    let m = sys.m();
    if factors.len() != m {
        return Err(Error::ShapeMismatch(alloc::format!("{} factors for {m} channels", factors.len())));
    }
    let mut out = Vec::with_capacity(m);
    for (k, xi) in factors.iter().enumerate() {
        if xi.len() != grid.n {
            return Err(Error::ShapeMismatch(alloc::format!("factor {k} has {} samples", xi.len())));
        }
        let nrm: f64 = xi.iter().map(|z| z.norm_sqr()).sum::<f64>() * grid.dt;
        if (nrm - 1.0).abs() > UNIT_NORM_TOL {
            return Err(Error::InvalidInput(alloc::format!("factor {k} has norm² {nrm}, expected 1")));
        }
        let mut u = alloc::vec![C64::new(0.0, 0.0); m * grid.n];
        u[k * grid.n..(k + 1) * grid.n].copy_from_slice(xi);
        let y = transfer_signals(sys, grid, &u, &TransferOptions::default())?;
        out.push(y.chunks(grid.n).map(|r| r.to_vec()).collect());
    }
    ProductSumPulse::new(*grid, m, out)?.to_tensor()
}
