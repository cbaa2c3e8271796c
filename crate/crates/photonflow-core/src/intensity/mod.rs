//! Time-resolved output intensity `n̄_out(t)` for passive systems driven by
//! distinct-channel photon states, plus a Wick-pairing reference.

#[cfg(test)]
mod tests;

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::linalg::{dagger, expm, sharp, CMat, C64};
use crate::photonstate::{correlation_kernel, reduced_state, CorrelationKernel, FockState, FunctionPulse, TensorPulse};
use crate::sysmodel::Realization;

/// Largest `dt·‖A‖_F` accepted by the fixed-step integrator.
pub const MAX_STEP: f64 = 0.1;
/// Channel cap for the pairing enumeration.
pub const MAX_WICK_CHANNELS: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct IntensityTrace {
    pub grid: TimeGrid,
    pub values: Vec<CMat>,
    pub sigma: Vec<CMat>,
    pub fvals: Vec<CMat>,
}

impl IntensityTrace {
    /// `∫ tr n̄_out(t) dt`.
    pub fn total_photons(&self) -> f64 {
        self.values.iter().map(|v| v.trace().re).sum::<f64>() * self.grid.dt
    }

    /// `∫ n̄_kk(t) dt` per channel.
    pub fn channel_totals(&self) -> Vec<f64> {
        let m = self.values.first().map_or(0, |v| v.nrows());
        (0..m).map(|k| self.values.iter().map(|v| v[(k, k)].re).sum::<f64>() * self.grid.dt).collect()
    }

    pub fn hermiticity_residual(&self) -> f64 {
        self.values.iter().map(|v| herm_residual(v)).fold(0.0, f64::max)
    }
}

fn herm_residual(x: &CMat) -> f64 {
    (x - dagger(x)).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn hermitize(x: CMat) -> CMat {
    (&x + dagger(&x)) * C64::new(0.5, 0.0)
}

/// Precomputed `E_q = e^{Aqh} C₋†S₋`, flattened `n x m` row-major per `q`.
struct Propagated {
    ns: usize,
    m: usize,
    e: Vec<C64>,
}

impl Propagated {
    fn new(sys: &Realization, grid: &TimeGrid) -> Result<Self> {
        let blocks = sys.require_passive()?;
        let (ns, m) = (sys.n(), sys.m());
        let p = expm(&(&blocks.a * C64::new(grid.dt, 0.0)));
        let mut cur = -(&blocks.b);
        let mut e = Vec::with_capacity(grid.n * ns * m);
        for _ in 0..grid.n {
            for a in 0..ns {
                for k in 0..m {
                    e.push(cur[(a, k)]);
                }
            }
            cur = &p * cur;
        }
        Ok(Propagated { ns, m, e })
    }

    fn f_at(&self, kernel: &CorrelationKernel, h: f64, j: usize) -> CMat {
        let (ns, m) = (self.ns, self.m);
        let mut out = CMat::zeros(ns, m);
        if j == 0 {
            return out;
        }
        for k in 0..m {
            let row = kernel.row(k, j);
            for q in 0..=j {
                let lam = row[q] * (h * quad_weight(q, j));
                if lam == C64::new(0.0, 0.0) {
                    continue;
                }
                let e = &self.e[(j - q) * ns * m..(j - q + 1) * ns * m];
                for a in 0..ns {
                    out[(a, k)] -= e[a * m + k] * lam;
                }
            }
        }
        out
    }
}

const GREGORY: [f64; 3] = [3.0 / 8.0, 7.0 / 6.0, 23.0 / 24.0];

/// Trapezoid weights on `0..=j`, with Gregory end corrections once there
/// are enough points so the rule stays fourth order.
fn quad_weight(q: usize, j: usize) -> f64 {
    if j < 2 * GREGORY.len() {
        return if q == 0 || q == j { 0.5 } else { 1.0 };
    }
    let edge = q.min(j - q);
    GREGORY.get(edge).copied().unwrap_or(1.0)
}

fn check_kernel(sys: &Realization, kernel: &CorrelationKernel, grid: &TimeGrid) -> Result<()> {
    if kernel.m() != sys.m() || kernel.n() != grid.n {
        return Err(Error::ShapeMismatch(alloc::format!(
            "kernel is {} channels x {} points, expected {} x {}",
            kernel.m(),
            kernel.n(),
            sys.m(),
            grid.n
        )));
    }
    Ok(())
}

/// `f(t_j) = −∫_{t₀}^{t_j} e^{A(t_j−r)} C₋†S₋ Λ(t_j, r) dr` by end-corrected
/// trapezoid quadrature.
pub fn f_kernel(sys: &Realization, kernel: &CorrelationKernel, grid: &TimeGrid, j: usize) -> Result<CMat> {
    check_kernel(sys, kernel, grid)?;
    if j >= grid.n {
        return Err(Error::InvalidInput(alloc::format!("time index {j} outside grid of {}", grid.n)));
    }
    Ok(Propagated::new(sys, grid)?.f_at(kernel, grid.dt, j))
}

/// [`f_kernel`] at every grid point.
pub fn f_values(sys: &Realization, kernel: &CorrelationKernel, grid: &TimeGrid) -> Result<Vec<CMat>> {
    check_kernel(sys, kernel, grid)?;
    let prop = Propagated::new(sys, grid)?;
    Ok(crate::par::map_range(grid.n, |j| prop.f_at(kernel, grid.dt, j)))
}

/// `f` halfway between samples `j` and `j+1` from a four-point cubic,
/// one-sided near the ends.
fn midpoint(f: &[CMat], j: usize) -> CMat {
    let n = f.len();
    let w = |c: f64| C64::new(c / 16.0, 0.0);
    if n < 4 {
        return (&f[j] + &f[j + 1]) * C64::new(0.5, 0.0);
    }
    if j == 0 {
        &f[0] * w(5.0) + &f[1] * w(15.0) - &f[2] * w(5.0) + &f[3] * w(1.0)
    } else if j + 2 >= n {
        &f[n - 4] * w(1.0) - &f[n - 3] * w(5.0) + &f[n - 2] * w(15.0) + &f[n - 1] * w(5.0)
    } else {
        (&f[j] + &f[j + 1]) * w(9.0) - (&f[j - 1] + &f[j + 2]) * w(1.0)
    }
}

/// `Σ̇ = AΣ + ΣA† + C₋†C₋ − C₋†S₋f† − fS₋†C₋`, `Σ(t₀) = I`, by classical RK4
/// on the grid of `fvals`. Each step is re-symmetrized.
pub fn evolve_sigma(sys: &Realization, grid: &TimeGrid, fvals: &[CMat]) -> Result<Vec<CMat>> {
    let blocks = sys.require_passive()?;
    let ns = sys.n();
    if fvals.len() != grid.n {
        return Err(Error::ShapeMismatch(alloc::format!("{} f samples for {} grid points", fvals.len(), grid.n)));
    }
    if ns == 0 {
        return Ok(vec![CMat::zeros(0, 0); grid.n]);
    }
    let a = &blocks.a;
    let step = grid.dt * a.norm();
    if step > MAX_STEP {
        return Err(Error::StepTooLarge { step, limit: MAX_STEP });
    }
    let ad = dagger(a);
    let g = -(&blocks.b);
    let q = dagger(&blocks.c) * &blocks.c;
    let rhs = |s: &CMat, f: &CMat| -> CMat {
        let cross = &g * dagger(f);
        a * s + s * &ad + &q - &cross - dagger(&cross)
    };
    let h = C64::new(grid.dt, 0.0);
    let half = C64::new(0.5 * grid.dt, 0.0);
    let mut out = Vec::with_capacity(grid.n);
    let mut s = CMat::identity(ns, ns);
    out.push(s.clone());
    for j in 0..grid.n - 1 {
        let fm = midpoint(fvals, j);
        let k1 = rhs(&s, &fvals[j]);
        let k2 = rhs(&(&s + &k1 * half), &fm);
        let k3 = rhs(&(&s + &k2 * half), &fm);
        let k4 = rhs(&(&s + &k3 * h), &fvals[j + 1]);
        s = hermitize(&s + (k1 + (k2 + k3) * C64::new(2.0, 0.0) + k4) * C64::new(grid.dt / 6.0, 0.0));
        out.push(s.clone());
    }
    Ok(out)
}

/// Assemble `n̄_out = S#ΛSᵀ + S#fᵀCᵀ + C#f#Sᵀ − C#Cᵀ + C#ΣᵀCᵀ`.
pub fn assemble_intensity(sys: &Realization, kernel: &CorrelationKernel, grid: &TimeGrid, fvals: Vec<CMat>, sigma: Vec<CMat>) -> Result<IntensityTrace> {
    let blocks = sys.require_passive()?;
    let s = sys.params().s_minus();
    let (ss, st) = (sharp(s), s.transpose());
    let (cs, ct) = (sharp(&blocks.c), blocks.c.transpose());
    let vac = &cs * &ct;
    let values = (0..grid.n)
        .map(|j| {
            let mut v = &ss * kernel.matrix(j, j) * &st;
            if sys.n() > 0 {
                let f = &fvals[j];
                v += &ss * f.transpose() * &ct + &cs * sharp(f) * &st - &vac + &cs * sigma[j].transpose() * &ct;
            }
            hermitize(v)
        })
        .collect();
    Ok(IntensityTrace { grid: *grid, values, sigma, fvals })
}

/// Output intensity of a distinct-channel pulse through a passive, stable
/// system.
pub fn output_intensity(sys: &Realization, pulse: &FunctionPulse) -> Result<IntensityTrace> {
    sys.require_passive()?;
    sys.require_stable()?;
    if pulse.m() != sys.m() {
        return Err(Error::ShapeMismatch(alloc::format!("{}-channel pulse for {}-channel system", pulse.m(), sys.m())));
    }
    let grid = *pulse.grid();
    let kernel = correlation_kernel(pulse)?;
    let fvals = f_values(sys, &kernel, &grid)?;
    let sigma = evolve_sigma(sys, &grid, &fvals)?;
    assemble_intensity(sys, &kernel, &grid, fvals, sigma)
}

/// `n̄_kl(t) = ⟨b_k(t)Ψ | b_l(t)Ψ⟩` from the pairing enumeration of the
/// reduced states. Only `values` is filled.
pub fn wick_intensity(psi: &TensorPulse) -> Result<IntensityTrace> {
    let m = psi
        .uniform_dim()
        .ok_or_else(|| Error::ShapeMismatch("intensity needs uniform labels".into()))?;
    if m > MAX_WICK_CHANNELS {
        return Err(Error::TooManyChannels { m, limit: MAX_WICK_CHANNELS });
    }
    let grid = *psi.grid();
    let rows: Vec<Result<CMat>> = crate::par::map_range(grid.n, |j| {
        let reduced: Vec<TensorPulse> = (0..m).map(|k| reduced_state(psi, k, j)).collect::<Result<_>>()?;
        let mut v = CMat::zeros(m, m);
        for k in 0..m {
            for l in k..m {
                let z = reduced[k].inner_ccr(&reduced[l])?;
                v[(k, l)] = z;
                v[(l, k)] = z.conj();
            }
        }
        Ok(v)
    });
    let values = rows.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(IntensityTrace { grid, values, sigma: Vec::new(), fvals: Vec::new() })
}
