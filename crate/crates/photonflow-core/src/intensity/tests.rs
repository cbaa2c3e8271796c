use alloc::vec;
use super::*;
use crate::linalg::{c, hermitian_eigenvalues, max_abs};
use crate::photonstate::families::Shape;
use crate::photonstate::lift;
use crate::sysmodel::{cavity_params, one_port_cavity_params, realize, SlhParams};
use crate::transferengine::transfer_mm;

fn cavity2() -> Realization {
    realize(&cavity_params(1.0, 1.0, 0.0).unwrap()).unwrap()
}

fn product_input(g: TimeGrid) -> FunctionPulse {
    FunctionPulse::product(g, vec![Shape::gaussian(-1.5, 1.0).sample(&g), Shape::gaussian(-1.0, 0.8).sample(&g)]).unwrap()
}

/// `f(t)` for `ξ = √γ e^{-γt/2}` from `t = 0` through a one-port cavity:
/// `−√κ γ e^{-γt/2} (e^{at} − e^{-γt/2}) / (a + γ/2)` with `a = −κ/2 − iω_d`.
fn exp_decay_f(kappa: f64, omega_d: f64, gamma: f64, t: f64) -> C64 {
    let a = c(-kappa / 2.0, -omega_d);
    let decay = (-gamma * t / 2.0).exp();
    -(c(0.0, 0.0) + ((a * t).exp() - decay) / (a + gamma / 2.0)) * (kappa.sqrt() * gamma * decay)
}

#[test]
fn vacuum_gives_zero_intensity() {
    let g = TimeGrid::from_range(-8.0, 8.0, 256).unwrap();
    let sys = cavity2();
    let tr = output_intensity(&sys, &FunctionPulse::zeros(g, 2).unwrap()).unwrap();
    assert!(tr.fvals.iter().all(|f| max_abs(f) == 0.0));
    let drift = tr.sigma.iter().map(|s| max_abs(&(s - CMat::identity(1, 1)))).fold(0.0, f64::max);
    assert!(drift <= 1e-10, "{drift}");
    assert!(tr.values.iter().all(|v| max_abs(v) <= 1e-12));
}

#[test]
fn f_vanishes_at_start() {
    let g = TimeGrid::from_range(-8.0, 8.0, 64).unwrap();
    let k = correlation_kernel(&product_input(g)).unwrap();
    assert_eq!(max_abs(&f_kernel(&cavity2(), &k, &g, 0).unwrap()), 0.0);
}

#[test]
fn f_matches_scalar_closed_form() {
    let (kappa, omega_d, gamma) = (1.0, 0.4, 1.5);
    let g = TimeGrid::new(0.0, 1e-3, 10000).unwrap();
    let sys = realize(&one_port_cavity_params(kappa, omega_d).unwrap()).unwrap();
    let xi = Shape::ExpDecay { kappa: gamma, t0: 0.0 }.sample(&g);
    let k = correlation_kernel(&FunctionPulse::product(g, vec![xi]).unwrap()).unwrap();
    let fv = f_values(&sys, &k, &g).unwrap();
    let err = g.times().iter().zip(&fv).map(|(&t, f)| (f[(0, 0)] - exp_decay_f(kappa, omega_d, gamma, t)).norm()).fold(0.0, f64::max);
    assert!(err <= 1e-6, "{err}");
    assert!((f_kernel(&sys, &k, &g, 777).unwrap()[(0, 0)] - fv[777][(0, 0)]).norm() == 0.0);
}

#[test]
fn static_system_has_empty_sigma() {
    let g = TimeGrid::from_range(-8.0, 8.0, 64).unwrap();
    let h = core::f64::consts::FRAC_1_SQRT_2;
    let s = CMat::from_row_slice(2, 2, &[c(h, 0.0), c(0.0, h), c(0.0, h), c(h, 0.0)]);
    let sys = realize(&SlhParams::static_network(s.clone()).unwrap()).unwrap();
    let psi = product_input(g);
    let tr = output_intensity(&sys, &psi).unwrap();
    assert!(tr.sigma.iter().all(|x| x.nrows() == 0));
    let k = correlation_kernel(&psi).unwrap();
    for j in [10, 30, 50] {
        let want = sharp(&s) * k.matrix(j, j) * s.transpose();
        assert!(max_abs(&(&tr.values[j] - want)) < 1e-15);
    }
}

#[test]
fn photon_number_conserved_through_cavity() {
    let g = TimeGrid::from_range(-8.0, 16.0, 1536).unwrap();
    let tr = output_intensity(&cavity2(), &product_input(g)).unwrap();
    let total = tr.total_photons();
    assert!((total - 2.0).abs() <= 0.02, "{total}");
    assert!(tr.hermiticity_residual() <= 1e-9);
    assert!(tr.sigma.iter().all(|s| herm_residual(s) <= 1e-9));
    let worst = tr.values.iter().flat_map(|v| hermitian_eigenvalues(v)).fold(f64::INFINITY, f64::min);
    assert!(worst >= -1e-6, "{worst}");
}

#[test]
fn intensity_agrees_with_wick_of_transferred_state() {
    let g = TimeGrid::from_range(-8.0, 16.0, 768).unwrap();
    let sys = cavity2();
    let psi = FunctionPulse::from_fn(g, 2, |t| {
        let (u, v) = (t[0] + 1.5, t[1] + 1.0);
        c((-(u * u + v * v) / 2.0 - 0.4 * u * v).exp(), 0.0)
    })
    .unwrap()
    .normalized()
    .unwrap();
    let a = output_intensity(&sys, &psi).unwrap();
    let b = wick_intensity(&transfer_mm(&sys, &psi).unwrap()).unwrap();
    let num: f64 = a.values.iter().zip(&b.values).map(|(x, y)| (x - y).iter().map(|z| z.norm()).sum::<f64>()).sum();
    let den: f64 = b.values.iter().map(|y| y.iter().map(|z| z.norm()).sum::<f64>()).sum();
    assert!(num / den <= 0.02, "{}", num / den);
}

#[test]
fn wick_of_input_gives_marginals() {
    let g = TimeGrid::from_range(-6.0, 6.0, 48).unwrap();
    let psi = FunctionPulse::from_fn(g, 2, |t| c((-(t[0] * t[0] + t[1] * t[1]) / 2.0 - 0.3 * t[0] * t[1]).exp(), 0.1 * t[1]))
        .unwrap()
        .normalized()
        .unwrap();
    let k = correlation_kernel(&psi).unwrap();
    let w = wick_intensity(&lift(&psi)).unwrap();
    for j in 0..g.n {
        for ch in 0..2 {
            assert!((w.values[j][(ch, ch)] - k.get(ch, j, j)).norm() < 1e-13);
        }
    }
    let zero = wick_intensity(&TensorPulse::square(g, 2).unwrap()).unwrap();
    assert!(zero.values.iter().all(|v| max_abs(v) == 0.0));
}

#[test]
fn wick_on_hong_ou_mandel_output() {
    let g = TimeGrid::from_range(-8.0, 8.0, 64).unwrap();
    let h = core::f64::consts::FRAC_1_SQRT_2;
    let sys = realize(&SlhParams::static_network(CMat::from_row_slice(2, 2, &[c(h, 0.0), c(0.0, h), c(0.0, h), c(h, 0.0)])).unwrap()).unwrap();
    let xi = Shape::gaussian(0.0, 1.0).sample(&g);
    let out = transfer_mm(&sys, &FunctionPulse::product(g, vec![xi.clone(), xi]).unwrap()).unwrap();
    let w = wick_intensity(&out).unwrap();
    assert!(w.values.iter().all(|v| v[(0, 1)].norm() < 1e-12));
    for total in w.channel_totals() {
        assert!((total - 1.0).abs() < 1e-10, "{total}");
    }
}

#[test]
fn wick_rejects_four_channels() {
    let g = TimeGrid::from_range(-2.0, 2.0, 4).unwrap();
    let t = TensorPulse::zeros(g, vec![4; 1]).unwrap();
    assert!(matches!(wick_intensity(&t), Err(Error::TooManyChannels { m: 4, .. })));
}

#[test]
fn large_step_rejected() {
    let g = TimeGrid::from_range(-8.0, 8.0, 16).unwrap();
    let f = vec![CMat::zeros(1, 2); 16];
    assert!(matches!(evolve_sigma(&cavity2(), &g, &f), Err(Error::StepTooLarge { .. })));
}

fn sigma_with_exact_f(h: f64, t_end: f64) -> Vec<CMat> {
    let (kappa, omega_d, gamma) = (1.0, 0.3, 1.5);
    let n = (t_end / h).round() as usize + 1;
    let g = TimeGrid::new(0.0, h, n).unwrap();
    let sys = realize(&one_port_cavity_params(kappa, omega_d).unwrap()).unwrap();
    let f: Vec<CMat> = g.times().iter().map(|&t| CMat::from_element(1, 1, exp_decay_f(kappa, omega_d, gamma, t))).collect();
    evolve_sigma(&sys, &g, &f).unwrap()
}

fn sigma_error(h: f64, reference: &[CMat], ref_h: f64) -> f64 {
    let coarse = sigma_with_exact_f(h, 8.0);
    let stride = (h / ref_h).round() as usize;
    coarse.iter().enumerate().map(|(j, s)| max_abs(&(s - &reference[j * stride]))).fold(0.0, f64::max)
}

#[test]
fn sigma_matches_fine_reference() {
    let h = 0.01;
    let reference = sigma_with_exact_f(h / 10.0, 8.0);
    let err = sigma_error(h, &reference, h / 10.0);
    assert!(err <= 1e-8, "{err}");
}

#[test]
fn sigma_fourth_order() {
    let h = 0.08;
    let reference = sigma_with_exact_f(h / 20.0, 8.0);
    let e1 = sigma_error(h, &reference, h / 20.0);
    let e2 = sigma_error(h / 2.0, &reference, h / 20.0);
    assert!(e1 / e2 >= 8.0, "{e1} {e2}");
}
