//! Job configuration files.

use std::path::{Path, PathBuf};

use photonflow_core::{TimeGrid, TransferMode};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::pulse::PulseSpec;
use crate::system::SystemSpec;

#[derive(Debug, Clone, Copy, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub t_min: f64,
    pub t_max: f64,
    pub n_points: usize,
}

impl GridSpec {
    pub fn grid(&self) -> CliResult<TimeGrid> {
        if !(self.t_max > self.t_min) {
            return Err(CliError::validation(
                "InvalidGrid",
                format!("t_max {} must exceed t_min {}", self.t_max, self.t_min),
            ));
        }
        if self.n_points < 8 {
            return Err(CliError::validation("InvalidGrid", format!("n_points {} is below 8", self.n_points)));
        }
        Ok(TimeGrid::from_range(self.t_min, self.t_max, self.n_points)?)
    }
}

#[derive(Debug, Clone, Copy, Default, Deserialize, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum ModeSpec {
    #[default]
    Time,
    Frequency,
}

impl From<ModeSpec> for TransferMode {
    fn from(m: ModeSpec) -> Self {
        match m {
            ModeSpec::Time => TransferMode::Time,
            ModeSpec::Frequency => TransferMode::Frequency,
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SpectrumSpec {
    pub omega_min: f64,
    pub omega_max: f64,
    pub count: usize,
}

impl Default for SpectrumSpec {
    fn default() -> Self {
        SpectrumSpec { omega_min: -10.0, omega_max: 10.0, count: 201 }
    }
}

impl SpectrumSpec {
    pub fn omegas(&self) -> CliResult<Vec<f64>> {
        if self.count == 0 || !(self.omega_max >= self.omega_min) {
            return Err(CliError::validation("InvalidInput", "spectrum needs count ≥ 1 and omega_max ≥ omega_min"));
        }
        if self.count == 1 {
            return Ok(vec![self.omega_min]);
        }
        let step = (self.omega_max - self.omega_min) / (self.count - 1) as f64;
        Ok((0..self.count).map(|k| self.omega_min + k as f64 * step).collect())
    }
}

#[derive(Debug, Clone, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct VerifySpec {
    /// Multiplies every acceptance tolerance.
    #[serde(default = "unit_scale")]
    pub tolerance_scale: f64,
    /// Run only these criteria; all of them when absent.
    #[serde(default)]
    pub criteria: Option<Vec<usize>>,
}

fn unit_scale() -> f64 {
    1.0
}

impl Default for VerifySpec {
    fn default() -> Self {
        VerifySpec { tolerance_scale: 1.0, criteria: None }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize, PartialEq)]
#[serde(untagged)]
pub enum PulseRef {
    Path(PathBuf),
    Inline(PulseSpec),
}

#[derive(Debug, Clone, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    pub system: PathBuf,
    #[serde(default)]
    pub pulse: Option<PulseRef>,
    #[serde(default)]
    pub grid: Option<GridSpec>,
    #[serde(default)]
    pub mode: ModeSpec,
    #[serde(default)]
    pub spectrum: SpectrumSpec,
    #[serde(default)]
    pub verify: VerifySpec,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

/// A parsed job with relative paths resolved against the config directory.
#[derive(Debug, Clone)]
pub struct Job {
    pub config: JobConfig,
    pub base: PathBuf,
}

impl Job {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let config: JobConfig = serde_json::from_str(&text)?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        let job = Job { config, base };
        let sys = job.system_path();
        if !sys.is_file() {
            return Err(CliError::validation("MissingFile", format!("system file {} does not exist", sys.display())));
        }
        if let Some(PulseRef::Path(p)) = &job.config.pulse {
            let p = job.base.join(p);
            if !p.is_file() {
                return Err(CliError::validation("MissingFile", format!("pulse file {} does not exist", p.display())));
            }
        }
        if let Some(g) = &job.config.grid {
            g.grid()?;
        }
        Ok(job)
    }

    pub fn system_path(&self) -> PathBuf {
        self.base.join(&self.config.system)
    }

    pub fn system(&self) -> CliResult<SystemSpec> {
        SystemSpec::load(&self.system_path())
    }

    pub fn grid(&self) -> CliResult<TimeGrid> {
        self.config
            .grid
            .as_ref()
            .ok_or_else(|| CliError::validation("ConfigSchema", "this command needs a `grid` section"))?
            .grid()
    }

    /// The pulse description and the directory its sidecar paths are relative to.
    pub fn pulse(&self) -> CliResult<(PulseSpec, PathBuf)> {
        match &self.config.pulse {
            None => Err(CliError::validation("ConfigSchema", "this command needs a `pulse`")),
            Some(PulseRef::Inline(p)) => Ok((p.clone(), self.base.clone())),
            Some(PulseRef::Path(p)) => {
                let path = self.base.join(p);
                let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
                Ok((PulseSpec::load(&path)?, dir))
            }
        }
    }

    pub fn output_dir(&self, cli_out: Option<&Path>) -> PathBuf {
        match (cli_out, &self.config.output) {
            (Some(p), _) => p.to_path_buf(),
            (None, Some(p)) => self.base.join(p),
            (None, None) => PathBuf::from("out"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_invariants() {
        assert_eq!(GridSpec { t_min: 1.0, t_max: 1.0, n_points: 64 }.grid().unwrap_err().code, 2);
        assert_eq!(GridSpec { t_min: 0.0, t_max: 1.0, n_points: 7 }.grid().unwrap_err().code, 2);
        let g = GridSpec { t_min: -8.0, t_max: 8.0, n_points: 1024 }.grid().unwrap();
        assert_eq!(g.dt, 1.0 / 64.0);
    }

    #[test]
    fn inline_and_path_pulses_parse() {
        let a: JobConfig = serde_json::from_str(r#"{"system":"s.json","pulse":"p.json"}"#).unwrap();
        assert!(matches!(a.pulse, Some(PulseRef::Path(_))));
        let b: JobConfig =
            serde_json::from_str(r#"{"system":"s.json","pulse":{"kind":"gaussian","center":0,"sigma":1}}"#).unwrap();
        assert!(matches!(b.pulse, Some(PulseRef::Inline(_))));
    }

    #[test]
    fn missing_system_is_validation_error() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("job.json");
        std::fs::write(&cfg, r#"{"system":"nope.json"}"#).unwrap();
        let e = Job::load(&cfg).unwrap_err();
        assert_eq!((e.kind.as_str(), e.code), ("MissingFile", 2));
    }

    #[test]
    fn spectrum_grid_endpoints() {
        let w = SpectrumSpec { omega_min: -1.0, omega_max: 1.0, count: 5 }.omegas().unwrap();
        assert_eq!(w, vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
    }
}
