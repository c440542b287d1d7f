//! Searchlight: two beams entering through the lower boundary of a vacuum.
//!
//! The beams travel in the plane along `(±1, φ, 0)/√(1 + φ²)` with `φ` the
//! golden ratio, polar angles `atan(φ) ≈ 58.28°` and `180° − 58.28°`. Both
//! are vertices of the base icosahedron and therefore of every refined grid.

use std::str::FromStr;

use crate::angular::{real_harmonics_all, AngularBasis};
use crate::dg::{BoundaryChoice, BoundaryConditions, InflowPatch, Side, SpatialGrid2D};
use crate::error::{Error, Result};
use crate::geodesic_grid::{Vec3, GOLDEN};

use super::AngularSetup;

/// Inflow footprint width, 14 cells of the paper-scale grid.
pub const BEAM_WIDTH: f64 = 0.105;

/// Beam origins on the lower boundary.
pub const LEFT_ORIGIN: (f64, f64) = (-0.75, -1.5);
pub const RIGHT_ORIGIN: (f64, f64) = (0.75, -1.5);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Beams {
    Both,
    Left,
    Right,
}

impl FromStr for Beams {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "both" => Ok(Beams::Both),
            "left" => Ok(Beams::Left),
            "right" => Ok(Beams::Right),
            other => Err(Error::InvalidArgument(format!("unknown beam selection `{other}`"))),
        }
    }
}

impl Beams {
    pub fn as_str(self) -> &'static str {
        match self {
            Beams::Both => "both",
            Beams::Left => "left",
            Beams::Right => "right",
        }
    }
}

/// Unit direction of the beam starting at the left (`sign = 1`) or right
/// (`sign = −1`) origin.
pub fn beam_direction(sign: f64) -> Vec3 {
    Vec3::new(sign, GOLDEN, 0.0).normalize()
}

/// Polar angle of the left beam in degrees.
pub fn beam_angle_degrees() -> f64 {
    GOLDEN.atan().to_degrees()
}

/// Angular coefficients of a unit beam along `dir`: one on the nearest
/// vertex for grid bases, the truncated harmonic expansion of a Dirac for
/// FP_N.
pub fn beam_state(basis: &AngularBasis, dir: &Vec3) -> Vec<f64> {
    match basis {
        AngularBasis::Femn(g) | AngularBasis::Sn(g) => {
            let mut s = vec![0.0; g.num_vertices()];
            s[g.nearest_vertex(dir)] = 1.0;
            s
        }
        AngularBasis::Fpn { l_max } => real_harmonics_all(*l_max, dir),
    }
}

/// Cells along the lower boundary whose centres lie within the footprint.
fn footprint(grid: &SpatialGrid2D, x_center: f64, width: f64) -> std::ops::Range<usize> {
    let half = 0.5 * width;
    let inside: Vec<usize> = (0..grid.nx)
        .filter(|&i| (grid.cell_center(i, 0).0 - x_center).abs() <= half + 1e-12)
        .collect();
    match (inside.first(), inside.last()) {
        (Some(&a), Some(&b)) => a..b + 1,
        // Footprint narrower than a cell: take the cell containing the origin.
        _ => {
            let i = (((x_center - grid.x0) / grid.dx).floor().max(0.0) as usize).min(grid.nx - 1);
            i..i + 1
        }
    }
}

/// Inflow patches on top of `base` elsewhere. With the zero-gradient base the
/// copied ghosts feed incoming modes back into the lower rows.
pub fn boundary(
    grid: &SpatialGrid2D,
    ang: &AngularSetup,
    base: BoundaryChoice,
    width: f64,
    beams: Beams,
) -> Result<BoundaryConditions> {
    if !(width > 0.0) {
        return Err(Error::InvalidArgument(format!("beam width {width} must be positive")));
    }
    let mut bc = BoundaryConditions::with_choice(base, &ang.matrices);
    let mut add = |origin: (f64, f64), sign: f64| {
        bc.inflow.push(InflowPatch {
            side: Side::YLow,
            range: footprint(grid, origin.0, width),
            state: beam_state(&ang.basis, &beam_direction(sign)),
        });
    };
    if beams != Beams::Right {
        add(LEFT_ORIGIN, 1.0);
    }
    if beams != Beams::Left {
        add(RIGHT_ORIGIN, -1.0);
    }
    Ok(bc)
}

/// x coordinate of the ray from `origin` along the beam at height `y`.
pub fn ray_x(origin: (f64, f64), sign: f64, y: f64) -> f64 {
    origin.0 + sign * (y - origin.1) / GOLDEN
}

/// Energy-weighted x centroid of each row, `None` for rows without energy.
pub fn row_centroids(grid: &SpatialGrid2D, energy: &[f64]) -> Vec<Option<f64>> {
    (0..grid.ny)
        .map(|j| {
            let row = &energy[j * grid.nx..(j + 1) * grid.nx];
            let total: f64 = row.iter().map(|e| e.max(0.0)).sum();
            (total > 0.0).then(|| {
                row.iter()
                    .enumerate()
                    .map(|(i, e)| e.max(0.0) * grid.cell_center(i, j).0)
                    .sum::<f64>()
                    / total
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angular::BasisKind;
    use crate::geodesic_grid::GeodesicGrid;

    #[test]
    fn beam_angle_is_golden() {
        assert!((beam_angle_degrees() - 58.2825).abs() < 1e-4);
        assert!((58.28f64.to_radians().tan() - GOLDEN).abs() < 1e-3);
    }

    #[test]
    fn beam_directions_are_grid_vertices() {
        for k in 0..=3 {
            let g = GeodesicGrid::with_level(k);
            for sign in [1.0, -1.0] {
                let d = beam_direction(sign);
                let v = g.vertices()[g.nearest_vertex(&d)];
                assert!((v - d).norm() < 1e-15, "k={k}");
            }
        }
    }

    #[test]
    fn footprint_covers_configured_width() {
        let grid = SpatialGrid2D::covering(400, 400, (-1.5, 1.5), (-1.5, 1.5)).unwrap();
        assert_eq!(footprint(&grid, -0.75, BEAM_WIDTH).len(), 14);
        let coarse = SpatialGrid2D::covering(20, 20, (-1.5, 1.5), (-1.5, 1.5)).unwrap();
        assert_eq!(footprint(&coarse, -0.75, 0.01).len(), 1);
    }

    #[test]
    fn beams_selection() {
        let ang = AngularSetup::new(BasisKind::Sn, 0, 0.5).unwrap();
        let grid = SpatialGrid2D::covering(40, 40, (-1.5, 1.5), (-1.5, 1.5)).unwrap();
        assert_eq!(boundary(&grid, &ang, BoundaryChoice::Vacuum, BEAM_WIDTH, Beams::Both).unwrap().inflow.len(), 2);
        let left = boundary(&grid, &ang, BoundaryChoice::Vacuum, BEAM_WIDTH, Beams::Left).unwrap();
        assert_eq!(left.inflow.len(), 1);
        assert_eq!(left.inflow[0].state.iter().sum::<f64>(), 1.0);
        assert!("up".parse::<Beams>().is_err());
    }

    #[test]
    fn fpn_beam_reconstructs_peak_in_beam_direction() {
        let basis = AngularBasis::new(BasisKind::Fpn, 6).unwrap();
        let d = beam_direction(1.0);
        let s = beam_state(&basis, &d);
        let along = basis.reconstruct(&s, &d);
        let across = basis.reconstruct(&s, &Vec3::new(0.0, 0.0, 1.0));
        assert!(along > 5.0 * across.abs());
    }

    #[test]
    fn centroid_of_single_cell() {
        let grid = SpatialGrid2D::covering(4, 2, (0.0, 4.0), (0.0, 2.0)).unwrap();
        let mut e = vec![0.0; 8];
        e[2] = 1.0;
        let c = row_centroids(&grid, &e);
        assert_eq!(c[0], Some(2.5));
        assert_eq!(c[1], None);
        assert!((ray_x(LEFT_ORIGIN, 1.0, -1.5 + GOLDEN) - 0.25).abs() < 1e-15);
    }
}
