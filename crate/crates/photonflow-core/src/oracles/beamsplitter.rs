#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::{unitarity_residual, CMat, C64};
use crate::photonstate::{FockState, FunctionPulse, MultiplicityPulse, TensorPulse};
use crate::sysmodel::Tolerances;

fn check_unitary(s: CMat) -> Result<()> {
    let residual = unitarity_residual(&s);
    if residual > Tolerances::default().unitary {
        return Err(Error::NonUnitaryScattering { residual });
    }
    Ok(())
}

/// `S₋ = [[R, T], [T, R]]` acting on one photon per input port.
///
/// Slot `(1,1)` and `(2,2)` carry `RT·ψ`; slot `(1,2)` carries
/// `R²ψ(r₁,r₂) + T²ψ(r₂,r₁)` and slot `(2,1)` is left empty.
pub fn beamsplitter_two_photon(r: C64, t: C64, pulse: &FunctionPulse) -> Result<TensorPulse> {
    check_unitary(CMat::from_row_slice(2, 2, &[r, t, t, r]))?;
    if pulse.m() != 2 {
        return Err(Error::ShapeMismatch(alloc::format!("two-photon beamsplitter takes 2 channels, got {}", pulse.m())));
    }
    let grid = *pulse.grid();
    let n = grid.n;
    let psi = pulse.samples();
    let mut out = TensorPulse::square(grid, 2)?;
    for (d, p) in out.slot_mut(&[0, 0]).iter_mut().zip(psi) {
        *d = r * t * p;
    }
    let s = out.slot_mut(&[0, 1]);
    for a in 0..n {
        for b in 0..n {
            s[a * n + b] = r * r * psi[a * n + b] + t * t * psi[b * n + a];
        }
    }
    for (d, p) in out.slot_mut(&[1, 1]).iter_mut().zip(psi) {
        *d = r * t * p;
    }
    Ok(out)
}

/// `S₋ = [[R, −T], [T, R]]` with one photon in channel 1 and two in
/// channel 2 (`k = (1, 2)`), writing `ψ(abc)` for `ψ(r_a, r_b, r_c)`:
///
/// ```text
/// (1,1,1) = RT² ψ(123)
/// (1,1,2) = −T [R² ψ(123) + R² ψ(132) − T² ψ(321)]
/// (1,2,2) = −R [T² ψ(213) + T² ψ(321) − R² ψ(123)]
/// (2,2,2) = R²T ψ(123)
/// ```
pub fn beamsplitter_three_photon(r: f64, t: f64, pulse: &MultiplicityPulse) -> Result<TensorPulse> {
    check_unitary(CMat::from_row_slice(2, 2, &[C64::new(r, 0.0), C64::new(-t, 0.0), C64::new(t, 0.0), C64::new(r, 0.0)]))?;
    if pulse.multiplicities() != [1, 2] {
        return Err(Error::ShapeMismatch(alloc::format!("expected multiplicities [1, 2], got {:?}", pulse.multiplicities())));
    }
    let grid = *pulse.grid();
    let n = grid.n;
    let psi = pulse.samples();
    let at = |a: usize, b: usize, c: usize| psi[(a * n + b) * n + c];
    let mut out = TensorPulse::zeros(grid, alloc::vec![2; 3])?;
    let (r2, t2) = (r * r, t * t);
    let mut fill = |labels: [usize; 3], f: &dyn Fn(usize, usize, usize) -> C64| {
        let s = out.slot_mut(&labels);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    s[(i * n + j) * n + k] = f(i, j, k);
                }
            }
        }
    };
    fill([0, 0, 0], &|i, j, k| at(i, j, k) * (r * t2));
    fill([0, 0, 1], &|i, j, k| (at(i, j, k) * r2 + at(i, k, j) * r2 - at(k, j, i) * t2) * -t);
    fill([0, 1, 1], &|i, j, k| (at(j, i, k) * t2 + at(k, j, i) * t2 - at(i, j, k) * r2) * -r);
    fill([1, 1, 1], &|i, j, k| at(i, j, k) * (r2 * t));
    Ok(out)
}

/// Fully factorized components for `ψ = ξ⊗ξ⊗ξ`:
/// `RT²`, `−T(2R² − T²)`, `−R(2T² − R²)` and `R²T` times `ξ⊗ξ⊗ξ`.
pub fn three_photon_product(r: f64, t: f64, pulse: &MultiplicityPulse) -> Result<TensorPulse> {
    let grid = *pulse.grid();
    let mut out = TensorPulse::zeros(grid, alloc::vec![2; 3])?;
    let (r2, t2) = (r * r, t * t);
    for (labels, coef) in [
        ([0, 0, 0], r * t2),
        ([0, 0, 1], -t * (2.0 * r2 - t2)),
        ([0, 1, 1], -r * (2.0 * t2 - r2)),
        ([1, 1, 1], r2 * t),
    ] {
        for (d, p) in out.slot_mut(&labels).iter_mut().zip(pulse.samples()) {
            *d = p * coef;
        }
    }
    Ok(out)
}

/// Overlaps `⟨Π_{30}|Ψ⟩, ⟨Π_{21}|Ψ⟩, ⟨Π_{12}|Ψ⟩, ⟨Π_{03}|Ψ⟩` of a three-way
/// output against the normalized states putting the input shape on
/// `3−k` photons in channel 1 and `k` in channel 2.
pub fn three_photon_coefficients(output: &TensorPulse, input: &MultiplicityPulse) -> Result<[C64; 4]> {
    let grid = *input.grid();
    let mut coeffs = [C64::new(0.0, 0.0); 4];
    let bases: [[usize; 3]; 4] = [[0, 0, 0], [0, 0, 1], [0, 1, 1], [1, 1, 1]];
    for (c, labels) in coeffs.iter_mut().zip(bases) {
        let mut pi = TensorPulse::zeros(grid, alloc::vec![2; 3])?;
        pi.slot_mut(&labels).copy_from_slice(input.samples());
        let nrm = pi.inner_ccr(&pi)?.re;
        if !(nrm > 0.0) {
            return Err(Error::InvalidInput("input pulse has zero norm".into()));
        }
        *c = pi.inner_ccr(output)? / nrm.sqrt();
    }
    Ok(coeffs)
}

