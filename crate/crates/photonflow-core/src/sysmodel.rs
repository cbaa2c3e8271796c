//! Quantum linear systems: parameters, doubled-up realization, kernels and
//! transfer functions.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{dagger, doubled, eigenvalues, expm, flat, j_sign, max_abs, sharp, solve, unitarity_residual, CMat, C64, I};
#[allow(unused_imports)]
use num_traits::Float;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Unitarity and Hermiticity checks on the parameters.
    pub unitary: f64,
    /// Minimum distance of the spectrum of `A` from the imaginary axis.
    pub stability: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { unitary: 1e-10, stability: 1e-9 }
    }
}

/// `(S₋, C₋, C₊, Ω₋, Ω₊)` for `m` field channels and `n` internal modes.
#[derive(Debug, Clone, PartialEq)]
pub struct SlhParams {
    s_minus: CMat,
    c_minus: CMat,
    c_plus: CMat,
    omega_minus: CMat,
    omega_plus: CMat,
    tol: Tolerances,
}

fn check_shape(name: &str, x: &CMat, r: usize, cc: usize) -> Result<()> {
    if x.shape() != (r, cc) {
        return Err(Error::ShapeMismatch(format!(
            "{name} is {}x{}, expected {r}x{cc}",
            x.nrows(),
            x.ncols()
        )));
    }
    if x.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::InvalidInput(format!("{name} has non-finite entries")));
    }
    Ok(())
}

impl SlhParams {
    pub fn new(s_minus: CMat, c_minus: CMat, c_plus: CMat, omega_minus: CMat, omega_plus: CMat) -> Result<Self> {
        Self::with_tolerances(s_minus, c_minus, c_plus, omega_minus, omega_plus, Tolerances::default())
    }

    pub fn with_tolerances(
        s_minus: CMat,
        c_minus: CMat,
        c_plus: CMat,
        omega_minus: CMat,
        omega_plus: CMat,
        tol: Tolerances,
    ) -> Result<Self> {
        let m = s_minus.nrows();
        if m == 0 {
            return Err(Error::ShapeMismatch("S_minus must have at least one channel".into()));
        }
        let n = omega_minus.nrows();
        check_shape("S_minus", &s_minus, m, m)?;
        check_shape("C_minus", &c_minus, m, n)?;
        check_shape("C_plus", &c_plus, m, n)?;
        check_shape("Omega_minus", &omega_minus, n, n)?;
        check_shape("Omega_plus", &omega_plus, n, n)?;
        let residual = unitarity_residual(&s_minus);
        if !(residual <= tol.unitary) {
            return Err(Error::NonUnitaryScattering { residual });
        }
        let herm = max_abs(&(&omega_minus - omega_minus.adjoint()));
        if herm > tol.unitary {
            return Err(Error::NotHermitian { which: "Omega_minus", residual: herm });
        }
        let sym = max_abs(&(&omega_plus - omega_plus.transpose()));
        if sym > tol.unitary {
            return Err(Error::NotHermitian { which: "Omega_plus", residual: sym });
        }
        Ok(SlhParams { s_minus, c_minus, c_plus, omega_minus, omega_plus, tol })
    }

    /// `C₊ = 0`, `Ω₊ = 0`.
    pub fn passive(s_minus: CMat, c_minus: CMat, omega_minus: CMat) -> Result<Self> {
        let (m, n) = (c_minus.nrows(), c_minus.ncols());
        Self::new(s_minus, c_minus, CMat::zeros(m, n), omega_minus, CMat::zeros(n, n))
    }

    /// A scattering-only network without internal modes.
    pub fn static_network(s_minus: CMat) -> Result<Self> {
        let m = s_minus.nrows();
        Self::passive(s_minus, CMat::zeros(m, 0), CMat::zeros(0, 0))
    }

    pub fn m(&self) -> usize {
        self.s_minus.nrows()
    }
    pub fn n(&self) -> usize {
        self.omega_minus.nrows()
    }
    pub fn s_minus(&self) -> &CMat {
        &self.s_minus
    }
    pub fn c_minus(&self) -> &CMat {
        &self.c_minus
    }
    pub fn c_plus(&self) -> &CMat {
        &self.c_plus
    }
    pub fn omega_minus(&self) -> &CMat {
        &self.omega_minus
    }
    pub fn omega_plus(&self) -> &CMat {
        &self.omega_plus
    }
    pub fn tolerances(&self) -> Tolerances {
        self.tol
    }

    pub fn is_passive(&self) -> bool {
        max_abs(&self.c_plus) <= self.tol.unitary && max_abs(&self.omega_plus) <= self.tol.unitary
    }
}

/// Annihilation-only blocks of a passive system.
#[derive(Debug, Clone, PartialEq)]
pub struct PassiveBlocks {
    /// `-iΩ₋ - ½C₋†C₋`
    pub a: CMat,
    /// `-C₋†S₋`
    pub b: CMat,
    /// `C₋`
    pub c: CMat,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Realization {
    params: SlhParams,
    pub a_mat: CMat,
    pub b_mat: CMat,
    pub c_mat: CMat,
    pub s_mat: CMat,
    passive: bool,
    stability_margin: f64,
    blocks: Option<PassiveBlocks>,
}

pub fn realize(params: &SlhParams) -> Result<Realization> {
    let (m, n) = (params.m(), params.n());
    let s_mat = doubled(&params.s_minus, &CMat::zeros(m, m));
    let c_mat = doubled(&params.c_minus, &params.c_plus);
    let c_flat = flat(&c_mat);
    let b_mat = -(&c_flat * &s_mat);
    let a_mat = (&c_flat * &c_mat) * C64::new(-0.5, 0.0)
        - j_sign(n) * doubled(&params.omega_minus, &params.omega_plus) * I;
    let stability_margin = if n == 0 {
        f64::INFINITY
    } else {
        -eigenvalues(&a_mat).iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max)
    };
    let passive = params.is_passive();
    let blocks = passive.then(|| {
        let cm = &params.c_minus;
        PassiveBlocks {
            a: &params.omega_minus * (-I) - (dagger(cm) * cm) * C64::new(0.5, 0.0),
            b: -(dagger(cm) * &params.s_minus),
            c: cm.clone(),
        }
    });
    Ok(Realization { params: params.clone(), a_mat, b_mat, c_mat, s_mat, passive, stability_margin, blocks })
}

/// Kernel `k(t) = δ(t)·delta + 1{t≥0}·c e^{a t} b`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpaceKernel {
    pub delta: CMat,
    pub a: CMat,
    pub b: CMat,
    pub c: CMat,
}

impl StateSpaceKernel {
    pub fn outputs(&self) -> usize {
        self.delta.nrows()
    }
    pub fn inputs(&self) -> usize {
        self.delta.ncols()
    }
    pub fn order(&self) -> usize {
        self.a.nrows()
    }

    /// Smooth part at `t`; zero for `t < 0`.
    pub fn smooth(&self, t: f64) -> CMat {
        if t < 0.0 || self.order() == 0 {
            return CMat::zeros(self.outputs(), self.inputs());
        }
        let e = expm(&(&self.a * C64::new(t, 0.0)));
        &self.c * e * &self.b
    }

    /// `delta + c (iωI - a)^{-1} b`.
    pub fn frequency_response(&self, omega: f64) -> Option<CMat> {
        let q = self.order();
        if q == 0 {
            return Some(self.delta.clone());
        }
        let lhs = CMat::identity(q, q) * C64::new(0.0, omega) - &self.a;
        let x = solve(&lhs, &self.b)?;
        Some(&self.delta + &self.c * x)
    }
}

/// Delta and smooth part of a doubled-up kernel sample.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSample {
    pub delta: CMat,
    pub smooth: CMat,
}

impl Realization {
    pub fn params(&self) -> &SlhParams {
        &self.params
    }
    pub fn m(&self) -> usize {
        self.params.m()
    }
    pub fn n(&self) -> usize {
        self.params.n()
    }
    pub fn is_passive(&self) -> bool {
        self.passive
    }
    pub fn stability_margin(&self) -> f64 {
        self.stability_margin
    }
    pub fn is_stable(&self) -> bool {
        self.stability_margin > self.params.tol.stability
    }
    pub fn passive_blocks(&self) -> Option<&PassiveBlocks> {
        self.blocks.as_ref()
    }

    pub fn require_stable(&self) -> Result<()> {
        if self.is_stable() {
            Ok(())
        } else {
            Err(Error::Unstable { margin: self.stability_margin })
        }
    }

    pub fn require_passive(&self) -> Result<&PassiveBlocks> {
        self.blocks.as_ref().ok_or(Error::NotPassive)
    }

    /// The δ(t) coefficient of `g₋`.
    pub fn impulse_delta(&self) -> &CMat {
        &self.params.s_minus
    }

    /// `[C₋ C₊]`
    fn c_row(&self) -> CMat {
        let (m, n) = (self.m(), self.n());
        let mut r = CMat::zeros(m, 2 * n);
        r.view_mut((0, 0), (m, n)).copy_from(&self.params.c_minus);
        r.view_mut((0, n), (m, n)).copy_from(&self.params.c_plus);
        r
    }

    /// `[C₋†; -C₊†] S₋`
    fn minus_input(&self) -> CMat {
        let (m, n) = (self.m(), self.n());
        let mut x = CMat::zeros(2 * n, m);
        x.view_mut((0, 0), (n, m)).copy_from(&dagger(&self.params.c_minus));
        x.view_mut((n, 0), (n, m)).copy_from(&(-dagger(&self.params.c_plus)));
        x * &self.params.s_minus
    }

    /// `[-C₊ᵀ; C₋ᵀ] S₋^#`
    fn plus_input(&self) -> CMat {
        let (m, n) = (self.m(), self.n());
        let mut x = CMat::zeros(2 * n, m);
        x.view_mut((0, 0), (n, m)).copy_from(&(-self.params.c_plus.transpose()));
        x.view_mut((n, 0), (n, m)).copy_from(&self.params.c_minus.transpose());
        x * sharp(&self.params.s_minus)
    }

    /// Smooth parts `(g₋(t), g₊(t))` from the full doubled-up dynamics.
    pub fn impulse_response(&self, t: f64) -> (CMat, CMat) {
        let m = self.m();
        if t < 0.0 || self.n() == 0 {
            return (CMat::zeros(m, m), CMat::zeros(m, m));
        }
        let e = expm(&(&self.a_mat * C64::new(t, 0.0)));
        let left = -(self.c_row() * e);
        (&left * self.minus_input(), &left * self.plus_input())
    }

    /// Smooth part of the doubled-up kernel `-𝐂 e^{𝐀t} 𝐂♭ 𝐒`.
    pub fn doubled_impulse(&self, t: f64) -> CMat {
        let m = self.m();
        if t < 0.0 || self.n() == 0 {
            return CMat::zeros(2 * m, 2 * m);
        }
        let e = expm(&(&self.a_mat * C64::new(t, 0.0)));
        -(&self.c_mat * e * flat(&self.c_mat) * &self.s_mat)
    }

    /// Kernel of `g₋` as a state-space triple, using the annihilation blocks
    /// when the system is passive.
    pub fn kernel_minus(&self) -> StateSpaceKernel {
        match &self.blocks {
            Some(b) => StateSpaceKernel { delta: self.params.s_minus.clone(), a: b.a.clone(), b: b.b.clone(), c: b.c.clone() },
            None => StateSpaceKernel {
                delta: self.params.s_minus.clone(),
                a: self.a_mat.clone(),
                b: self.minus_input(),
                c: -self.c_row(),
            },
        }
    }

    /// Kernel of `g₊` (no delta part).
    pub fn kernel_plus(&self) -> StateSpaceKernel {
        let m = self.m();
        StateSpaceKernel { delta: CMat::zeros(m, m), a: self.a_mat.clone(), b: self.plus_input(), c: -self.c_row() }
    }

    /// Stacked kernel with output rows `(j, d)` at index `2j + [d = +1]`:
    /// `g₋` rows for `d = -1` and `-g₊^#` rows for `d = +1`.
    pub fn kernel_signed(&self) -> StateSpaceKernel {
        let (m, n) = (self.m(), self.n());
        let q = 2 * n;
        let mut a = CMat::zeros(2 * q, 2 * q);
        a.view_mut((0, 0), (q, q)).copy_from(&self.a_mat);
        a.view_mut((q, q), (q, q)).copy_from(&sharp(&self.a_mat));
        let mut b = CMat::zeros(2 * q, m);
        b.view_mut((0, 0), (q, m)).copy_from(&self.minus_input());
        b.view_mut((q, 0), (q, m)).copy_from(&sharp(&self.plus_input()));
        let row = self.c_row();
        let row_sharp = sharp(&row);
        let mut c = CMat::zeros(2 * m, 2 * q);
        let mut delta = CMat::zeros(2 * m, m);
        for j in 0..m {
            for k in 0..q {
                c[(2 * j, k)] = -row[(j, k)];
                c[(2 * j + 1, q + k)] = row_sharp[(j, k)];
            }
            for k in 0..m {
                delta[(2 * j, k)] = self.params.s_minus[(j, k)];
            }
        }
        StateSpaceKernel { delta, a, b, c }
    }

    /// Smooth part of `g₋` from the annihilation blocks alone.
    pub fn passive_impulse(&self, t: f64) -> Result<CMat> {
        self.require_passive()?;
        Ok(self.kernel_minus().smooth(t))
    }

    /// `G[iω]`: m x m for passive systems, the 2m x 2m doubled-up matrix
    /// otherwise.
    pub fn transfer_function(&self, omega: f64) -> Result<CMat> {
        if self.passive {
            self.passive_transfer(omega)
        } else {
            self.doubled_transfer(omega)
        }
    }

    /// `S₋ - C₋(iωI - A)^{-1} C₋†S₋`
    pub fn passive_transfer(&self, omega: f64) -> Result<CMat> {
        self.require_passive()?;
        self.require_stable()?;
        self.kernel_minus()
            .frequency_response(omega)
            .ok_or(Error::Unstable { margin: self.stability_margin })
    }

    /// `𝐒 - 𝐂(iωI - 𝐀)^{-1} 𝐂♭ 𝐒`
    pub fn doubled_transfer(&self, omega: f64) -> Result<CMat> {
        self.require_stable()?;
        let q = 2 * self.n();
        if q == 0 {
            return Ok(self.s_mat.clone());
        }
        let lhs = CMat::identity(q, q) * C64::new(0.0, omega) - &self.a_mat;
        let rhs = flat(&self.c_mat) * &self.s_mat;
        let x = solve(&lhs, &rhs).ok_or(Error::Unstable { margin: self.stability_margin })?;
        Ok(&self.s_mat - &self.c_mat * x)
    }

    /// `R_out[iω] = G diag(I_m, 0) G†`.
    pub fn output_spectrum(&self, omega: f64) -> Result<CMat> {
        let m = self.m();
        let g = self.doubled_transfer(omega)?;
        let left = g.columns(0, m).into_owned();
        Ok(&left * left.adjoint())
    }

    /// Kernel of `G⁻¹` at `t`: `Δ(g₋(-t)†, -g₊(-t)ᵀ)`, supported on `t ≤ 0`.
    pub fn inverse_impulse(&self, t: f64) -> KernelSample {
        let delta = dagger(&self.s_mat);
        let (gm, gp) = self.impulse_response(-t);
        KernelSample { delta, smooth: doubled(&dagger(&gm), &(-gp.transpose())) }
    }

    /// Sampled `max‖G G† - I‖` over `omegas` (meaningful for passive systems).
    pub fn unitarity_sweep(&self, omegas: &[f64]) -> Result<f64> {
        let mut worst = 0.0f64;
        for &w in omegas {
            worst = worst.max(unitarity_residual(&self.passive_transfer(w)?));
        }
        Ok(worst)
    }
}

/// Frequencies `ω ∈ [-span, span]`, `count` evenly spaced points.
pub fn frequency_sweep(span: f64, count: usize) -> Vec<f64> {
    if count < 2 {
        return alloc::vec![0.0];
    }
    (0..count).map(|k| -span + 2.0 * span * k as f64 / (count - 1) as f64).collect()
}

/// Two-port cavity with couplings `κ₁`, `κ₂` and detuning `ω_d`
/// (`S₋ = I₂`, `C₋ = [√κ₁; √κ₂]`, `Ω₋ = ω_d`).
pub fn cavity_params(kappa1: f64, kappa2: f64, omega_d: f64) -> Result<SlhParams> {
    if !(kappa1 >= 0.0 && kappa2 >= 0.0) {
        return Err(Error::InvalidInput(format!("couplings must be non-negative, got {kappa1}, {kappa2}")));
    }
    let c = CMat::from_column_slice(2, 1, &[C64::new(kappa1.sqrt(), 0.0), C64::new(kappa2.sqrt(), 0.0)]);
    SlhParams::passive(CMat::identity(2, 2), c, CMat::from_element(1, 1, C64::new(omega_d, 0.0)))
}

/// Single-port cavity with decay rate `κ`.
pub fn one_port_cavity_params(kappa: f64, omega_d: f64) -> Result<SlhParams> {
    if !(kappa >= 0.0) {
        return Err(Error::InvalidInput(format!("coupling must be non-negative, got {kappa}")));
    }
    SlhParams::passive(
        CMat::identity(1, 1),
        CMat::from_element(1, 1, C64::new(kappa.sqrt(), 0.0)),
        CMat::from_element(1, 1, C64::new(omega_d, 0.0)),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;
    use proptest::prelude::*;

    fn cavity() -> Realization {
        realize(&cavity_params(1.0, 1.0, 0.0).unwrap()).unwrap()
    }

    #[test]
    fn cavity_blocks() {
        let r = cavity();
        let b = r.passive_blocks().unwrap();
        assert!((b.a[(0, 0)] - c(-1.0, 0.0)).norm() < 1e-15);
        assert!(max_abs(&(&b.b - CMat::from_row_slice(1, 2, &[c(-1.0, 0.0), c(-1.0, 0.0)]))) < 1e-15);
        assert!(r.is_passive() && r.is_stable());
        assert!((r.stability_margin() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cavity_impulse_at_zero() {
        let (gm, gp) = cavity().impulse_response(0.0);
        let want = CMat::from_element(2, 2, c(-1.0, 0.0));
        assert!(max_abs(&(gm - want)) < 1e-14);
        assert!(max_abs(&gp) == 0.0);
    }

    #[test]
    fn causality() {
        let (gm, gp) = cavity().impulse_response(-1.0);
        assert!(max_abs(&gm) == 0.0 && max_abs(&gp) == 0.0);
    }

    #[test]
    fn cavity_dc_transfer() {
        let g = cavity().transfer_function(0.0).unwrap();
        let want = CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(-1.0, 0.0), c(-1.0, 0.0), c(0.0, 0.0)]);
        assert!(max_abs(&(&g - want)) < 1e-14);
        assert!(unitarity_residual(&g) < 1e-14);
    }

    #[test]
    fn dc_transfer_matches_spectrum_of_sampled_impulse() {
        // G[0] = S + ∫ g_smooth(t) dt; trapezoid over [0, 40] with dt = 1e-3
        let r = cavity();
        let dt = 1e-3;
        let steps = 40_000;
        let k = r.kernel_minus();
        let prop = expm(&(&k.a * C64::new(dt, 0.0)));
        let mut e = CMat::identity(1, 1);
        let mut acc = CMat::zeros(2, 2);
        for j in 0..=steps {
            let w = if j == 0 || j == steps { 0.5 } else { 1.0 };
            acc += (&k.c * &e * &k.b) * C64::new(w * dt, 0.0);
            e = &e * &prop;
        }
        let g0 = r.impulse_delta() + acc;
        assert!(max_abs(&(g0 - r.transfer_function(0.0).unwrap())) < 1e-6);
    }

    #[test]
    fn beamsplitter_is_static() {
        let s = CMat::from_row_slice(2, 2, &[c(0.6, 0.0), c(0.0, 0.8), c(0.0, 0.8), c(0.6, 0.0)]);
        let r = realize(&SlhParams::static_network(s.clone()).unwrap()).unwrap();
        assert_eq!(r.a_mat.shape(), (0, 0));
        assert!(r.is_stable() && r.is_passive());
        assert!(max_abs(&(r.transfer_function(3.2).unwrap() - &s)) == 0.0);
        let inv = r.inverse_impulse(0.3);
        assert!(max_abs(&(inv.delta.view((0, 0), (2, 2)) - s.adjoint())) == 0.0);
    }

    #[test]
    fn non_unitary_rejected() {
        // |R|² + |T|² = 1 with both real is not unitary
        let s = CMat::from_row_slice(2, 2, &[c(0.6, 0.0), c(0.8, 0.0), c(0.8, 0.0), c(0.6, 0.0)]);
        assert!(matches!(SlhParams::static_network(s), Err(Error::NonUnitaryScattering { .. })));
    }

    #[test]
    fn parametric_block_is_not_passive() {
        let p = SlhParams::new(
            CMat::identity(1, 1),
            CMat::from_element(1, 1, c(1.0, 0.0)),
            CMat::from_element(1, 1, c(0.3, 0.0)),
            CMat::zeros(1, 1),
            CMat::zeros(1, 1),
        )
        .unwrap();
        let r = realize(&p).unwrap();
        assert!(!r.is_passive());
        assert!(r.is_stable());
        assert!((r.stability_margin() - 0.455).abs() < 1e-12);
    }

    #[test]
    fn passive_inverse_is_anticausal() {
        let r = cavity();
        assert!(max_abs(&r.inverse_impulse(0.5).smooth) == 0.0);
        assert!(max_abs(&r.inverse_impulse(-0.5).smooth) > 0.1);
    }

    #[test]
    fn inverse_sample_uses_conjugate_transpose() {
        let r = cavity();
        let s = r.inverse_impulse(-0.7);
        let g = r.impulse_response(0.7).0;
        assert!(max_abs(&(s.smooth.view((0, 0), (2, 2)) - g.adjoint())) < 1e-15);
    }

    fn arb_c() -> impl Strategy<Value = C64> {
        (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(a, b)| c(a, b))
    }

    fn arb_system(passive: bool) -> impl Strategy<Value = SlhParams> {
        (1usize..=3, 1usize..=3).prop_flat_map(move |(m, n)| {
            (
                proptest::collection::vec(arb_c(), m * m),
                proptest::collection::vec(arb_c(), m * n),
                proptest::collection::vec(arb_c(), m * n),
                proptest::collection::vec(arb_c(), n * n),
                proptest::collection::vec(arb_c(), n * n),
            )
                .prop_map(move |(s, cm, cp, om, op)| {
                    // unitary S from the QR factor of a random matrix
                    let s = CMat::from_row_slice(m, m, &s) + CMat::identity(m, m) * c(2.0, 0.0);
                    let q = s.qr().q();
                    let cm = CMat::from_row_slice(m, n, &cm);
                    let cp = if passive { CMat::zeros(m, n) } else { CMat::from_row_slice(m, n, &cp) * c(0.2, 0.0) };
                    let om = CMat::from_row_slice(n, n, &om);
                    let om = (&om + om.adjoint()) * c(0.5, 0.0);
                    let op = if passive {
                        CMat::zeros(n, n)
                    } else {
                        let op = CMat::from_row_slice(n, n, &op);
                        (&op + op.transpose()) * c(0.05, 0.0)
                    };
                    SlhParams::new(q, cm, cp, om, op).unwrap()
                })
        })
    }

    fn is_doubled(x: &CMat) -> bool {
        let (r, cc) = (x.nrows() / 2, x.ncols() / 2);
        let u = x.view((0, 0), (r, cc)).into_owned();
        let v = x.view((0, cc), (r, cc)).into_owned();
        max_abs(&(x - doubled(&u, &v))) <= 1e-14 * (1.0 + max_abs(x))
    }

    proptest! {
        #[test]
        fn realization_is_doubled_up(p in arb_system(false)) {
            let r = realize(&p).unwrap();
            prop_assert!(is_doubled(&r.a_mat));
            prop_assert!(is_doubled(&r.b_mat));
            prop_assert!(is_doubled(&r.c_mat));
            prop_assert!(is_doubled(&r.s_mat));
        }

        #[test]
        fn splits_of_doubled_kernel_agree(p in arb_system(false), t in 0.0f64..3.0) {
            let r = realize(&p).unwrap();
            let (gm, gp) = r.impulse_response(t);
            let d = r.doubled_impulse(t);
            prop_assert!(max_abs(&(d - doubled(&gm, &gp))) <= 1e-11 * (1.0 + max_abs(&gm)));
        }

        #[test]
        fn passive_reduced_impulse_agrees(p in arb_system(true), t in 0.0f64..3.0) {
            let r = realize(&p).unwrap();
            let (gm, gp) = r.impulse_response(t);
            prop_assert!(max_abs(&gp) == 0.0);
            let red = r.passive_impulse(t).unwrap();
            prop_assert!(max_abs(&(gm - red)) <= 1e-12);
        }

        #[test]
        fn passive_transfer_is_all_pass(p in arb_system(true), x in -1.0f64..1.0) {
            let r = realize(&p).unwrap();
            prop_assume!(r.stability_margin() > 1e-3);
            let a = r.passive_blocks().unwrap().a.clone();
            let span = 10.0 * a.norm();
            let g = r.transfer_function(x * span).unwrap();
            prop_assert!(unitarity_residual(&g) <= 1e-10);
        }

        #[test]
        fn margin_is_spectral_abscissa(p in arb_system(false)) {
            let r = realize(&p).unwrap();
            let q = r.a_mat.nrows();
            let scale = 1.0 + r.a_mat.norm();
            let eig = eigenvalues(&r.a_mat);
            // each reported eigenvalue makes A - λI numerically singular
            for z in &eig {
                let shifted = &r.a_mat - CMat::identity(q, q) * *z;
                let smin = shifted.singular_values().iter().copied().fold(f64::INFINITY, f64::min);
                prop_assert!(smin <= 1e-8 * scale);
            }
            let abscissa = eig.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
            prop_assert!((r.stability_margin() + abscissa).abs() <= 1e-12);
        }

        #[test]
        fn doubled_transfer_matches_passive_block(p in arb_system(true), w in -5.0f64..5.0) {
            let r = realize(&p).unwrap();
            prop_assume!(r.is_stable());
            let g = r.doubled_transfer(w).unwrap();
            let m = r.m();
            let top = g.view((0, 0), (m, m)).into_owned();
            prop_assert!(max_abs(&(top - r.passive_transfer(w).unwrap())) <= 1e-10);
            prop_assert!(max_abs(&g.view((0, m), (m, m)).into_owned()) <= 1e-12);
        }
    }
}
