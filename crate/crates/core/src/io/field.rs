//! Field snapshots: a text header terminated by a blank line, then a
//! row-major little-endian `f64` payload.
//!
//! ```text
//! geotfield1
//! scheme femn
//! level 1
//! n_angles 42
//! nx 120
//! ny 120
//! dx 0.025
//! dy 0.025
//! origin_x -1.5
//! origin_y -1.5
//! time 1
//! payload E
//!
//! <nx*ny (E) or nx*ny*n_angles (F) little-endian f64>
//! ```
//!
//! `F` payloads store the coefficients of cell `(i, j)` contiguously at
//! `(j * nx + i) * n_angles`.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use crate::dg::{FieldState, SpatialGrid2D};
use crate::error::{Error, Result};

pub const MAGIC: &str = "geotfield1";

const KEYS: [&str; 11] = [
    "scheme", "level", "n_angles", "nx", "ny", "dx", "dy", "origin_x", "origin_y", "time", "payload",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Payload {
    /// Energy density per cell.
    Energy,
    /// All angular coefficients per cell.
    Coefficients,
}

impl fmt::Display for Payload {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Payload::Energy => "E",
            Payload::Coefficients => "F",
        })
    }
}

impl FromStr for Payload {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "E" => Ok(Payload::Energy),
            "F" => Ok(Payload::Coefficients),
            other => Err(Error::format("field file", format!("unknown payload `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FieldFile {
    /// `femn`, `sn`, `fpn` or `oracle`.
    pub scheme: String,
    /// Refinement level or `l_max`.
    pub level: usize,
    pub n_angles: usize,
    pub grid: SpatialGrid2D,
    pub time: f64,
    pub payload: Payload,
    pub data: Vec<f64>,
}

impl FieldFile {
    pub fn energy(scheme: &str, level: usize, n_angles: usize, grid: SpatialGrid2D, time: f64, e: Vec<f64>) -> Result<Self> {
        let f = FieldFile {
            scheme: scheme.to_string(),
            level,
            n_angles,
            grid,
            time,
            payload: Payload::Energy,
            data: e,
        };
        f.check_len()?;
        Ok(f)
    }

    pub fn coefficients(scheme: &str, level: usize, state: &FieldState) -> Self {
        FieldFile {
            scheme: scheme.to_string(),
            level,
            n_angles: state.n,
            grid: state.grid,
            time: state.time,
            payload: Payload::Coefficients,
            data: state.data.clone(),
        }
    }

    fn expected_len(&self) -> Option<usize> {
        let cells = self.grid.nx.checked_mul(self.grid.ny)?;
        match self.payload {
            Payload::Energy => Some(cells),
            Payload::Coefficients => cells.checked_mul(self.n_angles),
        }
    }

    fn check_len(&self) -> Result<()> {
        match self.expected_len() {
            Some(n) if n == self.data.len() => Ok(()),
            _ => Err(Error::Shape(format!(
                "payload of {} values does not match {}x{} cells with {} angles ({})",
                self.data.len(),
                self.grid.nx,
                self.grid.ny,
                self.n_angles,
                self.payload
            ))),
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let g = &self.grid;
        let header = format!(
            "{MAGIC}\nscheme {}\nlevel {}\nn_angles {}\nnx {}\nny {}\ndx {:?}\ndy {:?}\norigin_x {:?}\norigin_y {:?}\ntime {:?}\npayload {}\n\n",
            self.scheme, self.level, self.n_angles, g.nx, g.ny, g.dx, g.dy, g.x0, g.y0, self.time, self.payload
        );
        let mut out = Vec::with_capacity(header.len() + 8 * self.data.len());
        out.extend_from_slice(header.as_bytes());
        for v in &self.data {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let bad = |msg: String| Error::format("field file", msg);
        let end = bytes
            .windows(2)
            .position(|w| w == b"\n\n")
            .ok_or_else(|| bad("missing blank line after header".into()))?;
        let header = std::str::from_utf8(&bytes[..end]).map_err(|_| bad("header is not UTF-8".into()))?;
        let body = &bytes[end + 2..];

        let mut lines = header.lines();
        match lines.next() {
            Some(MAGIC) => {}
            Some(other) => return Err(bad(format!("bad magic `{}`", other.chars().take(32).collect::<String>()))),
            None => return Err(bad("empty header".into())),
        }
        let mut values: [Option<&str>; 11] = [None; 11];
        for line in lines {
            let (key, value) = line
                .split_once(' ')
                .ok_or_else(|| bad(format!("header line without value: `{line}`")))?;
            let slot = KEYS
                .iter()
                .position(|k| *k == key)
                .ok_or_else(|| bad(format!("unknown header key `{key}`")))?;
            if values[slot].replace(value.trim()).is_some() {
                return Err(bad(format!("duplicate header key `{key}`")));
            }
        }
        let get = |slot: usize| values[slot].ok_or_else(|| bad(format!("missing header key `{}`", KEYS[slot])));
        let int = |slot: usize| -> Result<usize> {
            get(slot)?
                .parse()
                .map_err(|_| bad(format!("`{}` is not a non-negative integer", KEYS[slot])))
        };
        let float = |slot: usize| -> Result<f64> {
            get(slot)?
                .parse()
                .map_err(|_| bad(format!("`{}` is not a number", KEYS[slot])))
        };

        let scheme = get(0)?.to_string();
        if scheme.is_empty() || scheme.contains(char::is_whitespace) {
            return Err(bad("empty or malformed scheme".into()));
        }
        let level = int(1)?;
        let n_angles = int(2)?;
        let grid = SpatialGrid2D::new(int(3)?, int(4)?, float(5)?, float(6)?, float(7)?, float(8)?)
            .map_err(|e| bad(format!("invalid grid: {e}")))?;
        let time = float(9)?;
        if !time.is_finite() {
            return Err(bad("non-finite time".into()));
        }
        let payload: Payload = get(10)?.parse()?;
        if payload == Payload::Coefficients && n_angles == 0 {
            return Err(bad("coefficient payload with zero angles".into()));
        }

        let mut file = FieldFile {
            scheme,
            level,
            n_angles,
            grid,
            time,
            payload,
            data: Vec::new(),
        };
        // Compare sizes before allocating anything.
        let expected = file
            .expected_len()
            .and_then(|n| n.checked_mul(8))
            .ok_or_else(|| bad("payload size overflows".into()))?;
        if body.len() != expected {
            return Err(bad(format!("payload has {} bytes, header implies {expected}", body.len())));
        }
        file.data = body
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
            .collect();
        Ok(file)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        f.write_all(&self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }

    /// Energy density per cell, computed from coefficients with the basis
    /// integrals `weights` when the payload is `F`.
    pub fn energy_values(&self, weights: Option<&[f64]>) -> Result<Vec<f64>> {
        match self.payload {
            Payload::Energy => Ok(self.data.clone()),
            Payload::Coefficients => {
                let w = weights.ok_or_else(|| {
                    Error::InvalidArgument("coefficient payload needs basis integrals to form E".into())
                })?;
                if w.len() != self.n_angles {
                    return Err(Error::Shape(format!(
                        "{} basis integrals for {} angles",
                        w.len(),
                        self.n_angles
                    )));
                }
                Ok(self.to_state()?.energy(w))
            }
        }
    }

    pub fn to_state(&self) -> Result<FieldState> {
        if self.payload != Payload::Coefficients {
            return Err(Error::InvalidArgument("field file holds E only, not coefficients".into()));
        }
        self.check_len()?;
        Ok(FieldState {
            grid: self.grid,
            n: self.n_angles,
            time: self.time,
            data: self.data.clone(),
        })
    }
}
