//! Dense complex matrix helpers on top of nalgebra.

use alloc::vec::Vec;
use nalgebra::DMatrix;

pub use num_complex::Complex64 as C64;
#[allow(unused_imports)]
use num_traits::Float;

pub type CMat = DMatrix<C64>;

pub const I: C64 = C64 { re: 0.0, im: 1.0 };

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Entrywise conjugate, written X^# in the doubled-up calculus.
pub fn sharp(x: &CMat) -> CMat {
    x.map(|z| z.conj())
}

pub fn dagger(x: &CMat) -> CMat {
    x.adjoint()
}

/// `[U V; V^# U^#]`
pub fn doubled(u: &CMat, v: &CMat) -> CMat {
    assert_eq!(u.shape(), v.shape());
    let (r, cc) = u.shape();
    let mut out = CMat::zeros(2 * r, 2 * cc);
    out.view_mut((0, 0), (r, cc)).copy_from(u);
    out.view_mut((0, cc), (r, cc)).copy_from(v);
    out.view_mut((r, 0), (r, cc)).copy_from(&sharp(v));
    out.view_mut((r, cc), (r, cc)).copy_from(&sharp(u));
    out
}

/// `diag(I_k, -I_k)`
pub fn j_sign(k: usize) -> CMat {
    CMat::from_fn(2 * k, 2 * k, |i, j| {
        if i != j {
            C64::new(0.0, 0.0)
        } else if i < k {
            C64::new(1.0, 0.0)
        } else {
            C64::new(-1.0, 0.0)
        }
    })
}

/// `X♭ = J_k X† J_j` for `X` of size 2j x 2k.
pub fn flat(x: &CMat) -> CMat {
    let (r, cc) = x.shape();
    assert!(r % 2 == 0 && cc % 2 == 0, "flat needs even dimensions");
    let mut y = x.adjoint();
    for i in 0..cc {
        for j in 0..r {
            let si = if i < cc / 2 { 1.0 } else { -1.0 };
            let sj = if j < r / 2 { 1.0 } else { -1.0 };
            y[(i, j)] *= si * sj;
        }
    }
    y
}

/// Largest entry modulus.
pub fn max_abs(x: &CMat) -> f64 {
    x.iter().fold(0.0, |a, z| a.max(z.norm()))
}

/// `max |X X† - I|`.
pub fn unitarity_residual(x: &CMat) -> f64 {
    let n = x.nrows();
    if n != x.ncols() {
        return f64::INFINITY;
    }
    max_abs(&(x * x.adjoint() - CMat::identity(n, n)))
}

/// Maximum absolute column sum.
pub fn norm1(x: &CMat) -> f64 {
    (0..x.ncols())
        .map(|j| x.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Solve `A X = B`, `None` if `A` is singular.
pub fn solve(a: &CMat, b: &CMat) -> Option<CMat> {
    a.clone().lu().solve(b)
}

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA13: f64 = 5.371920351148152;

/// Matrix exponential by scaling and squaring with the degree-13 Padé
/// approximant.
pub fn expm(a: &CMat) -> CMat {
    let n = a.nrows();
    assert_eq!(n, a.ncols());
    if n == 0 {
        return CMat::zeros(0, 0);
    }
    let eye = CMat::identity(n, n);
    let nrm = norm1(a);
    if nrm == 0.0 {
        return eye;
    }
    let s = if nrm > THETA13 { (nrm / THETA13).log2().ceil() as i32 } else { 0 };
    let scale = C64::new(2f64.powi(-s), 0.0);
    let a = a * scale;
    let b = &PADE13;
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let r = |x: f64| C64::new(x, 0.0);

    let inner_u = &a6 * r(b[13]) + &a4 * r(b[11]) + &a2 * r(b[9]);
    let u = &a * (&a6 * inner_u + &a6 * r(b[7]) + &a4 * r(b[5]) + &a2 * r(b[3]) + &eye * r(b[1]));
    let inner_v = &a6 * r(b[12]) + &a4 * r(b[10]) + &a2 * r(b[8]);
    let v = &a6 * inner_v + &a6 * r(b[6]) + &a4 * r(b[4]) + &a2 * r(b[2]) + &eye * r(b[0]);

    let mut e = solve(&(&v - &u), &(&v + &u)).expect("Padé denominator is singular");
    for _ in 0..s {
        e = &e * &e;
    }
    e
}

/// Returns `[e^X, φ_1(X), …, φ_p(X)]` with `φ_k(X) = ∫_0^1 e^{(1-σ)X} σ^{k-1}/(k-1)! dσ`,
/// read off the first block row of one augmented exponential.
pub fn phi_functions(x: &CMat, p: usize) -> Vec<CMat> {
    let n = x.nrows();
    let size = n * (p + 1);
    let mut aug = CMat::zeros(size, size);
    aug.view_mut((0, 0), (n, n)).copy_from(x);
    for k in 0..p {
        for i in 0..n {
            aug[(k * n + i, (k + 1) * n + i)] = C64::new(1.0, 0.0);
        }
    }
    let e = expm(&aug);
    (0..=p).map(|k| e.view((0, k * n), (n, n)).into_owned()).collect()
}

/// Eigenvalues of a square complex matrix from its Schur form.
pub fn eigenvalues(a: &CMat) -> Vec<C64> {
    if a.nrows() == 0 {
        return Vec::new();
    }
    let (_, t) = a.clone().schur().unpack();
    (0..t.nrows()).map(|i| t[(i, i)]).collect()
}

/// Eigenvalues of a Hermitian matrix (ascending is not guaranteed).
pub fn hermitian_eigenvalues(a: &CMat) -> Vec<f64> {
    if a.nrows() == 0 {
        return Vec::new();
    }
    let h = (a + a.adjoint()) * C64::new(0.5, 0.0);
    h.symmetric_eigenvalues().iter().copied().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn taylor_exp(a: &CMat) -> CMat {
        let n = a.nrows();
        let mut term = CMat::identity(n, n);
        let mut sum = term.clone();
        for k in 1..60 {
            term = &term * a / C64::new(k as f64, 0.0);
            sum += &term;
        }
        sum
    }

    #[test]
    fn expm_matches_taylor_for_small_norm() {
        let a = CMat::from_row_slice(2, 2, &[c(-0.3, 0.2), c(0.1, 0.0), c(0.0, -0.4), c(-0.5, 0.1)]);
        let diff = max_abs(&(expm(&a) - taylor_exp(&a)));
        assert!(diff < 1e-14, "{diff}");
    }

    #[test]
    fn expm_of_scaled_rotation() {
        // exp([[0, -θ], [θ, 0]]) is a rotation by θ; θ large exercises squaring
        let th = 37.0;
        let a = CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(-th, 0.0), c(th, 0.0), c(0.0, 0.0)]);
        let e = expm(&a);
        let want = CMat::from_row_slice(2, 2, &[c(th.cos(), 0.0), c(-th.sin(), 0.0), c(th.sin(), 0.0), c(th.cos(), 0.0)]);
        assert!(max_abs(&(e - want)) < 1e-12);
    }

    #[test]
    fn expm_of_diagonal_and_nilpotent() {
        let a = CMat::from_diagonal(&nalgebra::DVector::from_vec(alloc::vec![c(-2.0, 1.0), c(0.5, -3.0)]));
        let e = expm(&a);
        assert!((e[(0, 0)] - c(-2.0, 1.0).exp()).norm() < 1e-13);
        assert!((e[(1, 1)] - c(0.5, -3.0).exp()).norm() < 1e-13);
        let nil = CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(3.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        let e = expm(&nil);
        assert!((e[(0, 1)] - c(3.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn phi_functions_scalar() {
        let x = c(-0.7, 0.3);
        let phis = phi_functions(&CMat::from_element(1, 1, x), 3);
        let e = x.exp();
        let one = c(1.0, 0.0);
        let p1 = (e - one) / x;
        let p2 = (e - one - x) / (x * x);
        let p3 = (e - one - x - x * x / 2.0) / (x * x * x);
        assert!((phis[0][(0, 0)] - e).norm() < 1e-14);
        assert!((phis[1][(0, 0)] - p1).norm() < 1e-14);
        assert!((phis[2][(0, 0)] - p2).norm() < 1e-13);
        assert!((phis[3][(0, 0)] - p3).norm() < 1e-12);
    }

    #[test]
    fn flat_of_doubled_identity_structure() {
        let u = CMat::from_row_slice(1, 2, &[c(1.0, 2.0), c(0.0, -1.0)]);
        let v = CMat::from_row_slice(1, 2, &[c(0.5, 0.0), c(3.0, 1.0)]);
        let x = doubled(&u, &v);
        let want = j_sign(2) * x.adjoint() * j_sign(1);
        assert!(max_abs(&(flat(&x) - want)) == 0.0);
    }
}
