//! Homogeneous cylinder: a unit-radius emitting and absorbing disk in vacuum.
//!
//! Along any backward ray the steady intensity is
//! `F = (η/κ_a)(1 − e^{−κ_a s})` with `s` the 3D path length through the
//! cylinder, the planar chord divided by `sin θ`.

use std::collections::HashMap;
use std::f64::consts::PI;

use rayon::prelude::*;

use crate::dg::SpatialGrid2D;
use crate::error::Result;
use crate::quadrature::gauss_legendre_on;
use crate::transport::{MediumCell, MediumMap};

pub const RADIUS: f64 = 1.0;
pub const ETA: f64 = 10.0;
pub const KAPPA_A: f64 = 10.0;

pub fn medium(grid: &SpatialGrid2D) -> Result<MediumMap> {
    let inside = MediumCell::new(ETA, KAPPA_A, 0.0)?;
    MediumMap::from_fn(grid.nx, grid.ny, |i, j| {
        let (x, y) = grid.cell_center(i, j);
        if x * x + y * y < RADIUS * RADIUS {
            inside
        } else {
            MediumCell::VACUUM
        }
    })
}

/// Steady intensity for a 3D path length `s`.
pub fn intensity(s: f64) -> f64 {
    ETA / KAPPA_A * (1.0 - (-KAPPA_A * s).exp())
}

/// Chord of the planar backward ray from distance `r` whose direction makes
/// angle `phi` with the direction to the axis, written as in the original
/// `λ` form: `λ_{1,2} = max((r cos φ ∓ √(R − r² sin² φ)) / sin θ, 0)`,
/// path `λ2 − λ1`, zero where the root is imaginary.
pub fn printed_path(r: f64, phi: f64, theta: f64) -> f64 {
    let root = (RADIUS * RADIUS - r * r * phi.sin().powi(2)).sqrt();
    let l1 = ((r * phi.cos() - root) / theta.sin()).max(0.0);
    let l2 = ((r * phi.cos() + root) / theta.sin()).max(0.0);
    let s = l2 - l1;
    if s.is_nan() {
        0.0
    } else {
        s
    }
}

/// Planar chord of the ray from `p` along the unit vector `d`.
pub fn planar_chord(p: (f64, f64), d: (f64, f64)) -> f64 {
    let b = p.0 * d.0 + p.1 * d.1;
    let c = p.0 * p.0 + p.1 * p.1 - RADIUS * RADIUS;
    let disc = b * b - c;
    if disc <= 0.0 {
        return 0.0;
    }
    let root = disc.sqrt();
    let far = -b + root;
    let near = (-b - root).max(0.0);
    (far - near).max(0.0)
}

/// Polar-angle nodes on `(0, π/2)`; the integrand is even about `π/2`.
fn theta_nodes() -> Vec<(f64, f64)> {
    let panels = 6;
    let h = 0.5 * PI / panels as f64;
    (0..panels)
        .flat_map(|k| gauss_legendre_on(16, k as f64 * h, (k + 1) as f64 * h))
        .collect()
}

const AZIMUTHS: usize = 720;

/// Steady energy density at `(x, y)`.
pub fn energy(x: f64, y: f64) -> f64 {
    let r = (x * x + y * y).sqrt();
    let thetas = theta_nodes();
    let mut total = 0.0;
    if r <= RADIUS {
        // Every backward ray leaves through the boundary: smooth periodic
        // integrand in the azimuth, trapezoidal rule.
        let dpsi = 2.0 * PI / AZIMUTHS as f64;
        let chords: Vec<f64> = (0..AZIMUTHS)
            .map(|k| {
                let psi = (k as f64 + 0.5) * dpsi;
                planar_chord((x, y), (-psi.cos(), -psi.sin()))
            })
            .collect();
        for &(th, wth) in &thetas {
            let st = th.sin();
            let ring: f64 = chords.iter().map(|&c| intensity(c / st)).sum::<f64>() * dpsi;
            total += 2.0 * wth * st * ring;
        }
    } else {
        // Only rays within asin(R/r) of the axis direction cross the disk.
        // With impact parameter r sin φ = R sin χ the chord is 2R cos χ and
        // dφ = R cos χ dχ / √(r² − R² sin² χ).
        let panels = 8;
        let h = PI / panels as f64;
        let chis: Vec<(f64, f64)> = (0..panels)
            .flat_map(|k| gauss_legendre_on(16, -0.5 * PI + k as f64 * h, -0.5 * PI + (k + 1) as f64 * h))
            .collect();
        for &(th, wth) in &thetas {
            let st = th.sin();
            let ring: f64 = chis
                .iter()
                .map(|&(chi, w)| {
                    let (s, c) = chi.sin_cos();
                    let jac = RADIUS * c / (r * r - RADIUS * RADIUS * s * s).sqrt();
                    w * jac * intensity(2.0 * RADIUS * c / st)
                })
                .sum();
            total += 2.0 * wth * st * ring;
        }
    }
    total
}

/// Oracle at every cell centre. Cells related by the square's symmetries
/// share one evaluation.
pub fn oracle_field(grid: &SpatialGrid2D) -> Vec<f64> {
    let key = |i: usize, j: usize| {
        let (x, y) = grid.cell_center(i, j);
        let (a, b) = (x.abs(), y.abs());
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        // Round to absorb last-bit asymmetry of the cell centres.
        ((a * 1e9).round() as i64, (b * 1e9).round() as i64)
    };
    let mut unique: HashMap<(i64, i64), (f64, f64)> = HashMap::new();
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            unique.entry(key(i, j)).or_insert_with(|| grid.cell_center(i, j));
        }
    }
    let points: Vec<((i64, i64), (f64, f64))> = unique.into_iter().collect();
    let values: HashMap<(i64, i64), f64> = points.par_iter().map(|&(k, (x, y))| (k, energy(x, y))).collect();
    (0..grid.ny)
        .flat_map(|j| (0..grid.nx).map(move |i| (i, j)))
        .map(|(i, j)| values[&key(i, j)])
        .collect()
}
