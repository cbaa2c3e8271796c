use alloc::vec;
use alloc::vec::Vec;

use super::convolve::FiberOp;
use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::photonstate::{ipow, TensorPulse};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Apply `op` to every fiber along time axis `axis`, contracting the
/// channel label of the same way. Fibers whose input slots are all zero are
/// skipped and stay zero.
pub fn apply_axis(t: &TensorPulse, axis: usize, op: &dyn FiberOp) -> Result<TensorPulse> {
    let ways = t.ways();
    if axis >= ways {
        return Err(Error::InvalidInput(alloc::format!("axis {axis} out of range for {ways} ways")));
    }
    let dims = t.dims();
    let (d_in, d_out) = (op.in_dim(), op.out_dim());
    if dims[axis] != d_in {
        return Err(Error::ShapeMismatch(alloc::format!("axis {axis} has dimension {}, kernel takes {d_in}", dims[axis])));
    }
    let grid = *t.grid();
    let n = grid.n;
    let tl = t.time_len();
    let ss: usize = dims[axis + 1..].iter().product();
    let hs: usize = dims[..axis].iter().product();
    let ts = ipow(n, ways - 1 - axis)?;
    let ht = ipow(n, axis)?;
    let mut out_dims = dims.to_vec();
    out_dims[axis] = d_out;
    let mut out = TensorPulse::zeros(grid, out_dims)?;
    let data = t.data();

    let zero_slot: Vec<bool> = (0..t.slot_count()).map(|s| t.slot_is_zero(s)).collect();
    let blocks = hs * ss * ht;
    let results = crate::par::map_range(blocks, |b| {
        let hi_s = b / (ss * ht);
        let lo_s = (b / ht) % ss;
        let hi_t = b % ht;
        let slots_in: Vec<usize> = (0..d_in).map(|c| (hi_s * d_in + c) * ss + lo_s).collect();
        if slots_in.iter().all(|&s| zero_slot[s]) {
            return None;
        }
        let mut u = vec![ZERO; d_in * n];
        let mut y = vec![ZERO; d_out * n];
        let mut res = vec![ZERO; d_out * n * ts];
        let mut any = false;
        for lo_t in 0..ts {
            let mut nonzero = false;
            for (c, &s) in slots_in.iter().enumerate() {
                let base = s * tl + hi_t * n * ts + lo_t;
                for k in 0..n {
                    let z = data[base + k * ts];
                    nonzero |= z != ZERO;
                    u[c * n + k] = z;
                }
            }
            if !nonzero {
                continue;
            }
            any = true;
            op.apply(&u, &mut y);
            for c in 0..d_out {
                for k in 0..n {
                    res[(c * n + k) * ts + lo_t] = y[c * n + k];
                }
            }
        }
        any.then_some(res)
    });

    let dst = out.data_mut();
    for (b, res) in results.into_iter().enumerate() {
        let Some(res) = res else { continue };
        let hi_s = b / (ss * ht);
        let lo_s = (b / ht) % ss;
        let hi_t = b % ht;
        for c in 0..d_out {
            let slot = (hi_s * d_out + c) * ss + lo_s;
            for k in 0..n {
                let at = slot * tl + (hi_t * n + k) * ts;
                dst[at..at + ts].copy_from_slice(&res[(c * n + k) * ts..(c * n + k + 1) * ts]);
            }
        }
    }
    Ok(out)
}
