//! Gaussian pulse in a uniform scattering medium. For large `κ_s` the energy
//! density diffuses with `D = 1/(3κ_s)`:
//!
//! ```text
//! E(r, t) = M / (2π s²) e^{−r²/2s²},   s² = w² + 2Dt
//! ```

use std::f64::consts::PI;

use crate::dg::SpatialGrid2D;
use crate::error::{Error, Result};
use crate::transport::{MediumCell, MediumMap};

pub fn medium(grid: &SpatialGrid2D, kappa_s: f64) -> Result<MediumMap> {
    MediumMap::uniform(grid.nx, grid.ny, MediumCell::new(0.0, 0.0, kappa_s)?)
}

/// Unit-mass Gaussian of standard deviation `width`.
pub fn initial_energy(x: f64, y: f64, width: f64) -> f64 {
    let w2 = width * width;
    (-(x * x + y * y) / (2.0 * w2)).exp() / (2.0 * PI * w2)
}

/// Diffusion-limit energy density at `(x, y)`.
pub fn diffusion_energy(x: f64, y: f64, t: f64, width: f64, kappa_s: f64) -> Result<f64> {
    if !(kappa_s > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "diffusion limit needs kappa_s > 0, got {kappa_s}"
        )));
    }
    let d = 1.0 / (3.0 * kappa_s);
    let s2 = width * width + 2.0 * d * t;
    Ok(initial_energy(x, y, s2.sqrt()))
}

pub fn diffusion_field(grid: &SpatialGrid2D, t: f64, width: f64, kappa_s: f64) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(grid.num_cells());
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let (x, y) = grid.cell_center(i, j);
            out.push(diffusion_energy(x, y, t, width, kappa_s)?);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_mass_and_spreading() {
        let grid = SpatialGrid2D::covering(200, 200, (-1.0, 1.0), (-1.0, 1.0)).unwrap();
        for t in [0.0, 1.0, 5.0] {
            let f = diffusion_field(&grid, t, 0.1, 1000.0).unwrap();
            let mass: f64 = f.iter().sum::<f64>() * grid.cell_area();
            assert!((mass - 1.0).abs() < 1e-6, "t={t}: {mass}");
        }
        let a = diffusion_energy(0.0, 0.0, 0.0, 0.1, 1000.0).unwrap();
        let b = diffusion_energy(0.0, 0.0, 10.0, 0.1, 1000.0).unwrap();
        // s² = 0.01 + 2·10/3000.
        assert!((a / b - (0.01 + 20.0 / 3000.0) / 0.01).abs() < 1e-12);
    }

    #[test]
    fn heat_equation_residual() {
        // ∂E/∂t = D ΔE checked by finite differences.
        let (w, ks, t) = (0.1, 500.0, 2.0);
        let d = 1.0 / (3.0 * ks);
        let e = |x: f64, y: f64, t: f64| diffusion_energy(x, y, t, w, ks).unwrap();
        let h = 1e-3;
        let k = 1e-4;
        for &(x, y) in &[(0.0, 0.0), (0.05, 0.1), (0.2, -0.1)] {
            let et = (e(x, y, t + k) - e(x, y, t - k)) / (2.0 * k);
            let lap = (e(x + h, y, t) + e(x - h, y, t) + e(x, y + h, t) + e(x, y - h, t) - 4.0 * e(x, y, t)) / (h * h);
            assert!((et - d * lap).abs() < 1e-3 * et.abs().max(1e-3), "{et} vs {}", d * lap);
        }
    }

    #[test]
    fn rejects_vacuum() {
        assert!(diffusion_energy(0.0, 0.0, 1.0, 0.1, 0.0).is_err());
    }
}
