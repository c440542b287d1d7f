//! Lattice: a central emitting square among absorbing squares in a
//! scattering background on `[0, 7]²`.

use std::f64::consts::PI;
use std::str::FromStr;

use crate::dg::SpatialGrid2D;
use crate::error::{Error, Result};
use crate::transport::{MediumCell, MediumMap};

/// Lower-left corners of the eleven unit absorber squares.
pub const ABSORBERS: [(f64, f64); 11] = [
    (1.0, 1.0),
    (1.0, 3.0),
    (1.0, 5.0),
    (2.0, 2.0),
    (2.0, 4.0),
    (3.0, 1.0),
    (4.0, 2.0),
    (4.0, 4.0),
    (5.0, 1.0),
    (5.0, 3.0),
    (5.0, 5.0),
];

pub const SOURCE: (f64, f64) = (3.0, 3.0);

/// Two readings of the scattering coefficients: the figure caption gives
/// background `κ_s = 1` and source `κ_s = 10`; the text gives `κ_s = 10` for
/// both.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LatticeVariant {
    Caption,
    Text,
}

impl LatticeVariant {
    pub fn as_str(self) -> &'static str {
        match self {
            LatticeVariant::Caption => "caption",
            LatticeVariant::Text => "text",
        }
    }
}

impl FromStr for LatticeVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "caption" => Ok(LatticeVariant::Caption),
            "text" => Ok(LatticeVariant::Text),
            other => Err(Error::InvalidArgument(format!("unknown lattice variant `{other}`"))),
        }
    }
}

fn in_unit_square(x: f64, y: f64, corner: (f64, f64)) -> bool {
    x >= corner.0 && x < corner.0 + 1.0 && y >= corner.1 && y < corner.1 + 1.0
}

/// Medium at a point.
pub fn medium_at(x: f64, y: f64, variant: LatticeVariant) -> MediumCell {
    let background_ks = match variant {
        LatticeVariant::Caption => 1.0,
        LatticeVariant::Text => 10.0,
    };
    if in_unit_square(x, y, SOURCE) {
        MediumCell {
            eta: 1.0 / (4.0 * PI),
            kappa_a: 0.0,
            kappa_s: 10.0,
        }
    } else if ABSORBERS.iter().any(|&c| in_unit_square(x, y, c)) {
        MediumCell {
            eta: 0.0,
            kappa_a: 1.0,
            kappa_s: 0.0,
        }
    } else {
        MediumCell {
            eta: 0.0,
            kappa_a: 0.0,
            kappa_s: background_ks,
        }
    }
}

/// Rasterizes the geometry by sampling cell centres.
pub fn medium(grid: &SpatialGrid2D, variant: LatticeVariant) -> Result<MediumMap> {
    MediumMap::from_fn(grid.nx, grid.ny, |i, j| {
        let (x, y) = grid.cell_center(i, j);
        medium_at(x, y, variant)
    })
}

/// Energy at the four boundary mid-edges and the four corners relative to
/// the field maximum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Arrival {
    pub min_mid_edge: f64,
    pub max_corner: f64,
}

impl Arrival {
    pub fn reached_edges_not_corners(&self, threshold: f64) -> bool {
        self.min_mid_edge > threshold && self.max_corner < threshold
    }
}

pub fn arrival(grid: &SpatialGrid2D, energy: &[f64]) -> Arrival {
    let e_max = energy.iter().cloned().fold(f64::MIN_POSITIVE, f64::max);
    let at = |i: usize, j: usize| energy[j * grid.nx + i] / e_max;
    let (nx, ny) = (grid.nx, grid.ny);
    let (mx, my) = (nx / 2, ny / 2);
    // Mid-edge: the two cells straddling the midpoint of each side.
    let mids = [
        0.5 * (at(mx - 1, 0) + at(mx, 0)),
        0.5 * (at(mx - 1, ny - 1) + at(mx, ny - 1)),
        0.5 * (at(0, my - 1) + at(0, my)),
        0.5 * (at(nx - 1, my - 1) + at(nx - 1, my)),
    ];
    let corners = [at(0, 0), at(nx - 1, 0), at(0, ny - 1), at(nx - 1, ny - 1)];
    Arrival {
        min_mid_edge: mids.iter().cloned().fold(f64::INFINITY, f64::min),
        max_corner: corners.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
    }
}
