//! Steady-state input to output pulse maps.
//!
//! Every route reduces to one primitive: a channel-mixing causal convolution
//! applied along one time axis of a dense tensor. Tensors are laid out with
//! channel labels outermost and time axes innermost, both row-major.

mod axis;
mod convolve;

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::linalg::{CMat, C64};
use crate::photonstate::{lift, lift_multiplicity, FunctionPulse, MultiplicityPulse, ProductSumPulse, TensorPulse};
use crate::sysmodel::{Realization, StateSpaceKernel};

pub use axis::apply_axis;
pub use convolve::{FiberOp, FrequencyMultiplier, TimeConvolver};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransferMode {
    Time,
    Frequency,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferOptions {
    pub mode: TransferMode,
    /// Bytes allowed for the input and output tensors together.
    pub memory_budget: f64,
    /// Largest fraction of pulse mass allowed in the edge window.
    pub support_tol: f64,
    /// Samples in the local interpolant of the time-domain convolver.
    pub stencil: usize,
    /// Decay time constants of the system that must fit after the pulse.
    pub decay_constants: f64,
}

pub const DEFAULT_MEMORY_BUDGET: f64 = 2.0 * 1024.0 * 1024.0 * 1024.0;

impl Default for TransferOptions {
    fn default() -> Self {
        TransferOptions {
            mode: TransferMode::Time,
            memory_budget: DEFAULT_MEMORY_BUDGET,
            support_tol: 1e-6,
            stencil: 8,
            decay_constants: 5.0,
        }
    }
}

impl TransferOptions {
    pub fn with_mode(mode: TransferMode) -> Self {
        TransferOptions { mode, ..Default::default() }
    }
}

/// Output of a non-passive system: the sign-indexed pulse tensor plus the
/// Gaussian noise spectrum added by the squeezing terms.
///
/// `psi_d` has `m` ways of dimension `2m`; channel index `2j` carries sign
/// `d = -1` on output `j` and `2j + 1` carries `d = +1`.
#[derive(Debug, Clone)]
pub struct NonPassiveOutput {
    pub psi_d: TensorPulse,
    realization: Realization,
}

impl NonPassiveOutput {
    pub fn realization(&self) -> &Realization {
        &self.realization
    }

    /// `R_out[iω] = G[iω] diag(I, 0) G[iω]†`.
    pub fn spectrum(&self, omega: f64) -> Result<CMat> {
        self.realization.output_spectrum(omega)
    }

    pub fn sign_of_channel(c: usize) -> (usize, i8) {
        (c / 2, if c % 2 == 0 { -1 } else { 1 })
    }
}

pub(crate) fn build_op(kernel: &StateSpaceKernel, grid: &TimeGrid, opts: &TransferOptions) -> Result<Box<dyn FiberOp>> {
    Ok(match opts.mode {
        TransferMode::Time => Box::new(TimeConvolver::new(kernel, grid, opts.stencil)?),
        TransferMode::Frequency => Box::new(FrequencyMultiplier::from_kernel(kernel, grid)?),
    })
}

/// Fraction of `|ψ|²` sitting in the first sample or in the trailing window
/// the system needs to ring down, maximized over axes.
pub fn edge_mass_fraction(data: &[C64], grid: &TimeGrid, ways: usize, margin: f64, decay_constants: f64) -> f64 {
    let n = grid.n;
    if ways == 0 || data.is_empty() {
        return 0.0;
    }
    let tail_start = grid.t_end() - decay_constants / margin;
    let edge: Vec<bool> = (0..n).map(|k| k == 0 || k + 1 == n || grid.t(k) > tail_start).collect();
    let tl = crate::photonstate::ipow(n, ways).unwrap_or(usize::MAX);
    let mut total = 0.0;
    let mut per_axis = vec![0.0; ways];
    for (flat, z) in data.iter().enumerate() {
        let w = z.norm_sqr();
        if w == 0.0 {
            continue;
        }
        total += w;
        let mut rest = flat % tl;
        for p in (0..ways).rev() {
            if edge[rest % n] {
                per_axis[p] += w;
            }
            rest /= n;
        }
    }
    if total == 0.0 {
        return 0.0;
    }
    per_axis.into_iter().fold(0.0, f64::max) / total
}

fn check_support(data: &[C64], grid: &TimeGrid, ways: usize, sys: &Realization, opts: &TransferOptions) -> Result<()> {
    let mass = edge_mass_fraction(data, grid, ways, sys.stability_margin(), opts.decay_constants);
    if mass > opts.support_tol {
        return Err(Error::SupportTruncated { mass, limit: opts.support_tol });
    }
    Ok(())
}

fn check_budget(slots: usize, time_len: usize, opts: &TransferOptions) -> Result<()> {
    let bytes = 2.0 * slots as f64 * time_len as f64 * core::mem::size_of::<C64>() as f64;
    if bytes > opts.memory_budget {
        return Err(Error::DimensionBudget { bytes, budget: opts.memory_budget });
    }
    Ok(())
}

fn apply_all_axes(mut psi: TensorPulse, op: &dyn FiberOp) -> Result<TensorPulse> {
    for p in 0..psi.ways() {
        psi = apply_axis(&psi, p, op)?;
    }
    Ok(psi)
}

/// Distinct-channel pulse through a passive system.
pub fn transfer_mm(sys: &Realization, pulse: &FunctionPulse) -> Result<TensorPulse> {
    transfer_mm_with(sys, pulse, &TransferOptions::default())
}

pub fn transfer_mm_with(sys: &Realization, pulse: &FunctionPulse, opts: &TransferOptions) -> Result<TensorPulse> {
    transfer_tensor_with(sys, &lift(pulse), opts)
}

pub fn transfer_tensor(sys: &Realization, pulse: &TensorPulse, mode: TransferMode) -> Result<TensorPulse> {
    transfer_tensor_with(sys, pulse, &TransferOptions::with_mode(mode))
}

/// Any `N`-way tensor whose ways all have dimension `m`.
pub fn transfer_tensor_with(sys: &Realization, pulse: &TensorPulse, opts: &TransferOptions) -> Result<TensorPulse> {
    sys.require_passive()?;
    sys.require_stable()?;
    if pulse.uniform_dim() != Some(sys.m()) {
        return Err(Error::ShapeMismatch(alloc::format!(
            "tensor dims {:?} do not match {} system channels",
            pulse.dims(),
            sys.m()
        )));
    }
    check_budget(pulse.slot_count(), pulse.time_len(), opts)?;
    let op = build_op(&sys.kernel_minus(), pulse.grid(), opts)?;
    check_support(pulse.data(), pulse.grid(), pulse.ways(), sys, opts)?;
    apply_all_axes(pulse.clone(), op.as_ref())
}

pub fn transfer_multiplicity(sys: &Realization, pulse: &MultiplicityPulse) -> Result<TensorPulse> {
    transfer_multiplicity_with(sys, pulse, &TransferOptions::default())
}

pub fn transfer_multiplicity_with(sys: &Realization, pulse: &MultiplicityPulse, opts: &TransferOptions) -> Result<TensorPulse> {
    if pulse.m() != sys.m() {
        return Err(Error::ShapeMismatch("multiplicity vector length differs from channel count".into()));
    }
    let n_ways = pulse.photon_count();
    let slots = crate::photonstate::ipow(sys.m(), n_ways)?;
    let tl = crate::photonstate::ipow(pulse.grid().n, n_ways)?;
    check_budget(slots, tl, opts)?;
    transfer_tensor_with(sys, &lift_multiplicity(pulse), opts)
}

/// Channel-mixing convolution of `m` sampled input signals (`m` rows of
/// length `n`), returning `m` output rows.
pub fn transfer_signals(sys: &Realization, grid: &TimeGrid, signals: &[C64], opts: &TransferOptions) -> Result<Vec<C64>> {
    sys.require_passive()?;
    sys.require_stable()?;
    let (m, n) = (sys.m(), grid.n);
    if signals.len() != m * n {
        return Err(Error::ShapeMismatch(alloc::format!("expected {} samples, got {}", m * n, signals.len())));
    }
    let op = build_op(&sys.kernel_minus(), grid, opts)?;
    check_support(signals, grid, 1, sys, opts)?;
    let mut out = vec![C64::new(0.0, 0.0); m * n];
    op.apply(signals, &mut out);
    Ok(out)
}

pub fn transfer_product_sum(sys: &Realization, pulse: &ProductSumPulse) -> Result<ProductSumPulse> {
    transfer_product_sum_with(sys, pulse, &TransferOptions::default())
}

pub fn transfer_product_sum_with(sys: &Realization, pulse: &ProductSumPulse, opts: &TransferOptions) -> Result<ProductSumPulse> {
    if pulse.m() != sys.m() {
        return Err(Error::ShapeMismatch("product-sum channel count differs from system".into()));
    }
    let grid = *pulse.grid();
    let mut out = Vec::with_capacity(pulse.factor_count());
    for factor in pulse.factors() {
        let flat: Vec<C64> = factor.iter().flatten().copied().collect();
        let y = transfer_signals(sys, &grid, &flat, opts)?;
        out.push(y.chunks(grid.n).map(|r| r.to_vec()).collect());
    }
    ProductSumPulse::new(grid, pulse.m(), out)
}

pub fn nonpassive_output(sys: &Realization, pulse: &FunctionPulse) -> Result<NonPassiveOutput> {
    nonpassive_output_with(sys, pulse, &TransferOptions::default())
}

/// Any stable system. Each axis is convolved against the stacked signed
/// kernel, whose row `2j` is `g₋` and row `2j + 1` is `-g₊^#`.
pub fn nonpassive_output_with(sys: &Realization, pulse: &FunctionPulse, opts: &TransferOptions) -> Result<NonPassiveOutput> {
    sys.require_stable()?;
    let m = sys.m();
    if pulse.m() != m {
        return Err(Error::ShapeMismatch("pulse channel count differs from system".into()));
    }
    let grid = *pulse.grid();
    let slots = crate::photonstate::ipow(2 * m, m)?;
    check_budget(slots, pulse.samples().len(), opts)?;
    let op = build_op(&sys.kernel_signed(), &grid, opts)?;
    check_support(pulse.samples(), &grid, m, sys, opts)?;
    let psi_d = apply_all_axes(lift(pulse), op.as_ref())?;
    Ok(NonPassiveOutput { psi_d, realization: sys.clone() })
}
