//! Pulse description files and their sampled counterparts.

use std::path::{Path, PathBuf};

use photonflow_core::photonstate::FockState;
use photonflow_core::photonstate::families::Shape;
use photonflow_core::photonstate::LabelPermutations;
use photonflow_core::photonstate::MAX_PAIRING;
use photonflow_core::{FunctionPulse, MultiplicityPulse, ProductSumPulse, TensorPulse, TimeGrid, C64};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::sidecar;
use crate::system::Complex;

/// Single-photon wavepacket families.
#[derive(Debug, Clone, Copy, Deserialize, Serialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ShapeSpec {
    Gaussian {
        center: f64,
        sigma: f64,
        #[serde(default)]
        omega: f64,
    },
    ExpDecay {
        kappa: f64,
        #[serde(default)]
        t0: f64,
    },
    RisingExp {
        kappa: f64,
        #[serde(default)]
        t0: f64,
    },
    Boxcar {
        start: f64,
        end: f64,
    },
}

impl ShapeSpec {
    pub fn shape(&self) -> CliResult<Shape> {
        let s = match *self {
            ShapeSpec::Gaussian { center, sigma, omega } => Shape::Gaussian { center, sigma, omega },
            ShapeSpec::ExpDecay { kappa, t0 } => Shape::ExpDecay { kappa, t0 },
            ShapeSpec::RisingExp { kappa, t0 } => Shape::RisingExp { kappa, t0 },
            ShapeSpec::Boxcar { start, end } => Shape::Boxcar { start, end },
        };
        s.validate()?;
        Ok(s)
    }

    pub fn sample(&self, grid: &TimeGrid) -> CliResult<Vec<C64>> {
        Ok(self.shape()?.sample(grid))
    }
}

#[derive(Debug, Clone, Copy, Deserialize, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum GridClass {
    Function,
    Tensor,
    Multiplicity,
}

/// One entry `a_{jk} ξ_{jk}` of a product-sum factor.
#[derive(Debug, Clone, Deserialize, Serialize, PartialEq)]
pub struct WeightedShape {
    #[serde(flatten)]
    pub shape: ShapeSpec,
    #[serde(default = "one")]
    pub amp: Complex,
}

fn one() -> Complex {
    [1.0, 0.0]
}

#[derive(Debug, Clone, Deserialize, Serialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PulseKind {
    /// One shape, repeated on `m` distinct channels.
    Gaussian {
        center: f64,
        sigma: f64,
        #[serde(default)]
        omega: f64,
        #[serde(default = "one_channel")]
        m: usize,
    },
    ExpDecay {
        kappa: f64,
        #[serde(default)]
        t0: f64,
        #[serde(default = "one_channel")]
        m: usize,
    },
    RisingExp {
        kappa: f64,
        #[serde(default)]
        t0: f64,
        #[serde(default = "one_channel")]
        m: usize,
    },
    Boxcar {
        start: f64,
        end: f64,
        #[serde(default = "one_channel")]
        m: usize,
    },
    Vacuum {
        m: usize,
    },
    /// `ξ_1(t_1)⋯ξ_m(t_m)`, one factor per channel.
    Product {
        factors: Vec<ShapeSpec>,
    },
    /// `Π_j Σ_k a_{jk} ξ_{jk}`; `null` entries are zero.
    ProductSum {
        m: usize,
        factors: Vec<Vec<Option<WeightedShape>>>,
    },
    /// Product of `shapes` symmetrized within each channel block.
    Symmetrized {
        multiplicities: Vec<usize>,
        shapes: Vec<ShapeSpec>,
    },
    /// Samples from a sidecar file.
    Grid {
        path: PathBuf,
        class: GridClass,
        #[serde(default)]
        m: Option<usize>,
        #[serde(default)]
        dims: Option<Vec<usize>>,
        #[serde(default)]
        multiplicities: Option<Vec<usize>>,
    },
}

fn one_channel() -> usize {
    1
}

#[derive(Debug, Clone, Deserialize, Serialize, PartialEq)]
pub struct PulseSpec {
    #[serde(flatten)]
    pub kind: PulseKind,
    /// Rescale to unit CCR norm after sampling.
    #[serde(default)]
    pub normalize: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LoadedPulse {
    Function(FunctionPulse),
    Tensor(TensorPulse),
    Multiplicity(MultiplicityPulse),
    ProductSum(ProductSumPulse),
}

impl LoadedPulse {
    pub fn class(&self) -> &'static str {
        match self {
            LoadedPulse::Function(_) => "function",
            LoadedPulse::Tensor(_) => "tensor",
            LoadedPulse::Multiplicity(_) => "multiplicity",
            LoadedPulse::ProductSum(_) => "product_sum",
        }
    }

    pub fn norm_sq(&self) -> CliResult<f64> {
        Ok(match self {
            LoadedPulse::Function(p) => p.inner_ccr(p)?.re,
            LoadedPulse::Tensor(p) => p.inner_ccr(p)?.re,
            LoadedPulse::Multiplicity(p) => p.inner_ccr(p)?.re,
            LoadedPulse::ProductSum(p) => p.inner_ccr(p)?.re,
        })
    }

    pub fn photon_count(&self) -> usize {
        match self {
            LoadedPulse::Function(p) => p.photon_count(),
            LoadedPulse::Tensor(p) => p.photon_count(),
            LoadedPulse::Multiplicity(p) => p.photon_count(),
            LoadedPulse::ProductSum(p) => p.photon_count(),
        }
    }

    pub fn channel_photon_numbers(&self) -> CliResult<Vec<f64>> {
        Ok(match self {
            LoadedPulse::Function(p) => p.channel_photon_numbers()?,
            LoadedPulse::Tensor(p) => p.channel_photon_numbers()?,
            LoadedPulse::Multiplicity(p) => p.channel_photon_numbers()?,
            LoadedPulse::ProductSum(p) => p.channel_photon_numbers()?,
        })
    }

    fn normalized(self) -> CliResult<Self> {
        let nsq = self.norm_sq()?;
        if !(nsq > 0.0) {
            return Err(CliError::validation("InvalidInput", "cannot normalize a zero pulse"));
        }
        let s = C64::new(1.0 / nsq.sqrt(), 0.0);
        Ok(match self {
            LoadedPulse::Function(p) => LoadedPulse::Function(p.scaled(s)),
            LoadedPulse::Multiplicity(p) => LoadedPulse::Multiplicity(p.scaled(s)),
            LoadedPulse::ProductSum(p) => LoadedPulse::ProductSum(p.scaled(s)),
            LoadedPulse::Tensor(p) => {
                let data = p.data().iter().map(|z| z * s).collect();
                LoadedPulse::Tensor(TensorPulse::new(*p.grid(), p.dims().to_vec(), data)?)
            }
        })
    }
}

/// `Σ_σ Π_p ξ_p(t_{σ(p)})` over the permutations that keep each photon in
/// its channel block.
pub fn symmetrized_pulse(grid: &TimeGrid, multiplicities: Vec<usize>, shapes: &[ShapeSpec]) -> CliResult<MultiplicityPulse> {
    let big_n: usize = multiplicities.iter().sum();
    if shapes.len() != big_n {
        return Err(CliError::validation(
            "ShapeMismatch",
            format!("{} shapes given for {big_n} photons", shapes.len()),
        ));
    }
    let labels: Vec<usize> = multiplicities.iter().enumerate().flat_map(|(c, &k)| std::iter::repeat(c).take(k)).collect();
    let perms = LabelPermutations::new(&labels, &labels, MAX_PAIRING)?;
    let rows = shapes.iter().map(|s| s.sample(grid)).collect::<CliResult<Vec<_>>>()?;
    let n = grid.n;
    let total = n
        .checked_pow(big_n as u32)
        .ok_or_else(|| CliError::validation("DimensionBudget", "pulse grid overflows"))?;
    let mut idx = vec![0usize; big_n];
    let mut data = Vec::with_capacity(total);
    for mut flat in 0..total {
        for q in (0..big_n).rev() {
            idx[q] = flat % n;
            flat /= n;
        }
        let v: C64 = perms
            .iter()
            .map(|perm| (0..big_n).fold(C64::new(1.0, 0.0), |acc, p| acc * rows[p][idx[perm[p]]]))
            .sum();
        data.push(v);
    }
    Ok(MultiplicityPulse::new(*grid, multiplicities, data)?)
}

fn required<T>(v: Option<T>, what: &str) -> CliResult<T> {
    v.ok_or_else(|| CliError::validation("ConfigSchema", format!("grid pulse needs `{what}`")))
}

impl PulseSpec {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Sample on `grid`; sidecar paths resolve against `base`.
    pub fn build(&self, grid: &TimeGrid, base: &Path) -> CliResult<LoadedPulse> {
        let repeated = |shape: ShapeSpec, m: usize| -> CliResult<LoadedPulse> {
            let row = shape.sample(grid)?;
            Ok(LoadedPulse::Function(FunctionPulse::product(*grid, vec![row; m])?))
        };
        let pulse = match &self.kind {
            &PulseKind::Gaussian { center, sigma, omega, m } => repeated(ShapeSpec::Gaussian { center, sigma, omega }, m)?,
            &PulseKind::ExpDecay { kappa, t0, m } => repeated(ShapeSpec::ExpDecay { kappa, t0 }, m)?,
            &PulseKind::RisingExp { kappa, t0, m } => repeated(ShapeSpec::RisingExp { kappa, t0 }, m)?,
            &PulseKind::Boxcar { start, end, m } => repeated(ShapeSpec::Boxcar { start, end }, m)?,
            &PulseKind::Vacuum { m } => LoadedPulse::Function(FunctionPulse::zeros(*grid, m)?),
            PulseKind::Product { factors } => {
                let rows = factors.iter().map(|s| s.sample(grid)).collect::<CliResult<Vec<_>>>()?;
                LoadedPulse::Function(FunctionPulse::product(*grid, rows)?)
            }
            PulseKind::ProductSum { m, factors } => {
                let mut rows = Vec::with_capacity(factors.len());
                for row in factors {
                    let mut entries = Vec::with_capacity(row.len());
                    for e in row {
                        entries.push(match e {
                            None => vec![C64::new(0.0, 0.0); grid.n],
                            Some(w) => {
                                let a = C64::new(w.amp[0], w.amp[1]);
                                w.shape.sample(grid)?.into_iter().map(|z| z * a).collect()
                            }
                        });
                    }
                    rows.push(entries);
                }
                LoadedPulse::ProductSum(ProductSumPulse::new(*grid, *m, rows)?)
            }
            PulseKind::Symmetrized { multiplicities, shapes } => {
                LoadedPulse::Multiplicity(symmetrized_pulse(grid, multiplicities.clone(), shapes)?)
            }
            PulseKind::Grid { path, class, m, dims, multiplicities } => {
                let data = sidecar::read_complex(&base.join(path))?;
                match class {
                    GridClass::Function => LoadedPulse::Function(FunctionPulse::new(*grid, required(*m, "m")?, data)?),
                    GridClass::Tensor => LoadedPulse::Tensor(TensorPulse::new(*grid, required(dims.clone(), "dims")?, data)?),
                    GridClass::Multiplicity => LoadedPulse::Multiplicity(MultiplicityPulse::new(
                        *grid,
                        required(multiplicities.clone(), "multiplicities")?,
                        data,
                    )?),
                }
            }
        };
        if self.normalize {
            pulse.normalized()
        } else {
            Ok(pulse)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> TimeGrid {
        TimeGrid::from_range(-8.0, 8.0, 128).unwrap()
    }

    #[test]
    fn gaussian_pair_is_distinct_channel_product() {
        let spec: PulseSpec = serde_json::from_str(r#"{"kind":"gaussian","center":0,"sigma":1,"m":2}"#).unwrap();
        let LoadedPulse::Function(p) = spec.build(&grid(), Path::new(".")).unwrap() else { panic!() };
        assert_eq!(p.m(), 2);
        assert!(p.factors().is_some());
        assert!((p.inner_ccr(&p).unwrap().re - 1.0).abs() < 1e-10);
    }

    #[test]
    fn product_sum_nulls_are_zero() {
        let text = r#"{"kind":"product_sum","m":2,"factors":[[{"kind":"gaussian","center":0,"sigma":1,"amp":[0.6,0]},{"kind":"gaussian","center":0,"sigma":1,"amp":[0,0.8]}],[null,{"kind":"exp_decay","kappa":1,"t0":-2}]]}"#;
        let spec: PulseSpec = serde_json::from_str(text).unwrap();
        let LoadedPulse::ProductSum(p) = spec.build(&grid(), Path::new(".")).unwrap() else { panic!() };
        assert_eq!(p.factor_count(), 2);
        assert!(p.factors()[1][0].iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn symmetrized_is_invariant_within_block() {
        let text = r#"{"kind":"symmetrized","multiplicities":[2],"shapes":[{"kind":"gaussian","center":-1,"sigma":1},{"kind":"gaussian","center":1,"sigma":0.7}],"normalize":true}"#;
        let spec: PulseSpec = serde_json::from_str(text).unwrap();
        let g = TimeGrid::from_range(-8.0, 8.0, 64).unwrap();
        let LoadedPulse::Multiplicity(p) = spec.build(&g, Path::new(".")).unwrap() else { panic!() };
        let s = p.samples();
        for i in 0..64 {
            for j in 0..64 {
                assert!((s[i * 64 + j] - s[j * 64 + i]).norm() < 1e-15);
            }
        }
        assert!((p.inner_ccr(&p).unwrap().re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn grid_pulse_from_sidecar() {
        let dir = tempfile::tempdir().unwrap();
        let g = TimeGrid::from_range(0.0, 1.0, 8).unwrap();
        let data: Vec<C64> = (0..16).map(|k| C64::new(k as f64, 0.0)).collect();
        sidecar::write_complex(&dir.path().join("psi.bin"), &data).unwrap();
        let spec: PulseSpec = serde_json::from_str(r#"{"kind":"grid","path":"psi.bin","class":"tensor","dims":[2]}"#).unwrap();
        let LoadedPulse::Tensor(t) = spec.build(&g, dir.path()).unwrap() else { panic!() };
        assert_eq!(t.data(), &data[..]);
        let bad: PulseSpec = serde_json::from_str(r#"{"kind":"grid","path":"psi.bin","class":"function","m":2}"#).unwrap();
        assert_eq!(bad.build(&g, dir.path()).unwrap_err().code, 2);
    }

    #[test]
    fn unknown_kind_rejected() {
        assert!(serde_json::from_str::<PulseSpec>(r#"{"kind":"lorentzian"}"#).is_err());
    }
}
