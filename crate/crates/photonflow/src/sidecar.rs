//! Raw complex arrays: little-endian float64, interleaved `re, im`, plus a
//! JSON header describing the tensor.

use std::io::{Read, Write};
use std::path::Path;

use photonflow_core::{TensorPulse, TimeGrid, C64};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const INDEX_ORDER: &str = "channel labels outermost, time axes innermost, row-major";
pub const FORMAT: &str = "complex128-le-interleaved";

pub fn read_complex(path: &Path) -> CliResult<Vec<C64>> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| CliError::io(path, e))?;
    if bytes.len() % 16 != 0 {
        return Err(CliError::validation(
            "ShapeMismatch",
            format!("{}: {} bytes is not a whole number of complex samples", path.display(), bytes.len()),
        ));
    }
    Ok(bytes
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().expect("8 bytes"));
            let im = f64::from_le_bytes(c[8..].try_into().expect("8 bytes"));
            C64::new(re, im)
        })
        .collect())
}

pub fn write_complex(path: &Path, data: &[C64]) -> CliResult<()> {
    let mut buf = Vec::with_capacity(16 * data.len());
    for z in data {
        buf.extend_from_slice(&z.re.to_le_bytes());
        buf.extend_from_slice(&z.im.to_le_bytes());
    }
    std::fs::File::create(path)
        .and_then(|mut f| f.write_all(&buf))
        .map_err(|e| CliError::io(path, e))
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct GridHeader {
    pub t_min: f64,
    pub dt: f64,
    pub n_points: usize,
}

impl From<&TimeGrid> for GridHeader {
    fn from(g: &TimeGrid) -> Self {
        GridHeader { t_min: g.t_min, dt: g.dt, n_points: g.n }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct TensorHeader {
    pub format: String,
    pub data: String,
    pub grid: GridHeader,
    /// Label range of each way.
    pub dims: Vec<usize>,
    pub ways: usize,
    /// Full array shape: `dims` followed by `n_points` per way.
    pub shape: Vec<usize>,
    pub index_order: String,
    /// Label meaning, e.g. `channel` or `channel_sign` (`2j + [d = +1]`).
    pub labels: String,
}

/// Write `<stem>.bin` and `<stem>.json` into `dir`.
pub fn write_tensor(dir: &Path, stem: &str, t: &TensorPulse, labels: &str) -> CliResult<TensorHeader> {
    let bin = format!("{stem}.bin");
    write_complex(&dir.join(&bin), t.data())?;
    let mut shape = t.dims().to_vec();
    shape.extend(std::iter::repeat(t.grid().n).take(t.ways()));
    let header = TensorHeader {
        format: FORMAT.into(),
        data: bin,
        grid: t.grid().into(),
        dims: t.dims().to_vec(),
        ways: t.ways(),
        shape,
        index_order: INDEX_ORDER.into(),
        labels: labels.into(),
    };
    let path = dir.join(format!("{stem}.json"));
    let text = serde_json::to_string_pretty(&header).expect("header serializes");
    std::fs::write(&path, text + "\n").map_err(|e| CliError::io(&path, e))?;
    Ok(header)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.bin");
        let data = vec![C64::new(1.5, -2.0), C64::new(0.0, 1e-300), C64::new(-0.0, f64::MAX)];
        write_complex(&p, &data).unwrap();
        assert_eq!(std::fs::metadata(&p).unwrap().len(), 48);
        assert_eq!(read_complex(&p).unwrap(), data);
    }

    #[test]
    fn truncated_file_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.bin");
        std::fs::write(&p, [0u8; 20]).unwrap();
        assert_eq!(read_complex(&p).unwrap_err().code, 2);
    }
}
