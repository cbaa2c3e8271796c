//! Iterative radix-2 FFT used by the frequency-domain transfer.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::linalg::C64;
#[allow(unused_imports)]
use num_traits::Float;

/// Precomputed twiddles and bit reversal for one power-of-two length.
#[derive(Debug, Clone)]
pub struct Fft {
    n: usize,
    twiddles: Vec<C64>,
    rev: Vec<usize>,
}

impl Fft {
    pub fn new(n: usize) -> Self {
        assert!(n.is_power_of_two(), "FFT length must be a power of two");
        let bits = n.trailing_zeros();
        let rev = (0..n)
            .map(|i| if bits == 0 { 0 } else { i.reverse_bits() >> (usize::BITS - bits) })
            .collect();
        // each twiddle evaluated directly; a recurrence would drift
        let twiddles = (0..n / 2)
            .map(|k| {
                let a = -2.0 * PI * k as f64 / n as f64;
                C64::new(a.cos(), a.sin())
            })
            .collect();
        Fft { n, twiddles, rev }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Unnormalized forward transform `X_k = Σ x_j e^{-2πi jk/n}`.
    pub fn forward(&self, buf: &mut [C64]) {
        self.run(buf, false);
    }

    /// Inverse transform including the `1/n` factor.
    pub fn inverse(&self, buf: &mut [C64]) {
        self.run(buf, true);
        let s = 1.0 / self.n as f64;
        for z in buf.iter_mut() {
            *z *= s;
        }
    }

    fn run(&self, buf: &mut [C64], inverse: bool) {
        let n = self.n;
        assert_eq!(buf.len(), n);
        for i in 0..n {
            let j = self.rev[i];
            if j > i {
                buf.swap(i, j);
            }
        }
        let mut len = 2;
        while len <= n {
            let half = len / 2;
            let step = n / len;
            for start in (0..n).step_by(len) {
                for k in 0..half {
                    let mut w = self.twiddles[k * step];
                    if inverse {
                        w = w.conj();
                    }
                    let a = buf[start + k];
                    let b = buf[start + k + half] * w;
                    buf[start + k] = a + b;
                    buf[start + k + half] = a - b;
                }
            }
            len <<= 1;
        }
    }
}

/// Angular frequency of DFT bin `k` for length `n` and sample spacing `dt`,
/// with bins at and above `n/2` mapped to negative frequencies.
pub fn bin_frequency(k: usize, n: usize, dt: f64) -> f64 {
    let kk = if k < n / 2 { k as f64 } else { k as f64 - n as f64 };
    2.0 * PI * kk / (n as f64 * dt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rustfft::FftPlanner;

    #[test]
    fn agrees_with_rustfft() {
        for &n in &[1usize, 2, 8, 64, 1024] {
            let data: Vec<C64> = (0..n)
                .map(|j| C64::new((j as f64 * 0.37).sin(), (j as f64 * 1.3).cos() - 0.2))
                .collect();
            let mut ours = data.clone();
            Fft::new(n).forward(&mut ours);
            let mut theirs = data.clone();
            FftPlanner::new().plan_fft_forward(n).process(&mut theirs);
            let err = ours.iter().zip(&theirs).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            assert!(err < 1e-10 * (n as f64).max(1.0), "n={n} err={err}");
        }
    }

    #[test]
    fn inverse_round_trip() {
        let data: Vec<C64> = (0..256).map(|j| C64::new(j as f64, -(j as f64) * 0.5)).collect();
        let f = Fft::new(256);
        let mut buf = data.clone();
        f.forward(&mut buf);
        f.inverse(&mut buf);
        let err = buf.iter().zip(&data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-11);
    }
}
