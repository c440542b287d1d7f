//! Line source: a sharp isotropic Gaussian pulse in vacuum.
//!
//! The free-streaming Green's function for `E` in 2D is
//! `Ẽ(r, t) = H(t − r) / (2π t √(t² − r²))`. The reference solution is its
//! convolution with the initial energy density. Writing the kernel in polar
//! coordinates around the target with `ρ = t sin ϑ`,
//!
//! ```text
//! Ẽ ρ dρ = t sin ϑ dϑ / (2π t)
//! ```
//!
//! removes the inverse square root, so
//! `E(p, t) = (1/2π) ∫_0^{π/2} sin ϑ ∫_0^{2π} E₀(p + t sin ϑ ê(α)) dα dϑ`
//! with a smooth integrand.

use std::collections::HashMap;
use std::f64::consts::PI;

use crate::dg::SpatialGrid2D;
use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre_on;

pub const OMEGA: f64 = 0.03;
pub const FLOOR: f64 = 1e-4;

/// Initial distribution value `max(e^{−r²/2ω²} / (8πω²), floor)`.
pub fn initial_distribution(x: f64, y: f64, omega: f64, floor: f64) -> f64 {
    let r2 = x * x + y * y;
    ((-r2 / (2.0 * omega * omega)).exp() / (8.0 * PI * omega * omega)).max(floor)
}

/// Initial energy density, `4π` times the isotropic distribution.
pub fn initial_energy(x: f64, y: f64, omega: f64, floor: f64) -> f64 {
    4.0 * PI * initial_distribution(x, y, omega, floor)
}

/// Green's function `H(t − r) / (2π t √(t² − r²))`.
pub fn greens_function(r: f64, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::InvalidArgument(format!("line source kernel needs t > 0, got {t}")));
    }
    Ok(if r >= t {
        0.0
    } else {
        1.0 / (2.0 * PI * t * (t * t - r * r).sqrt())
    })
}

#[derive(Clone, Debug)]
pub struct LineSourceOracle {
    omega: f64,
    floor: f64,
    /// Radius beyond which the initial data equals the floor.
    support: f64,
    panels: usize,
}

impl LineSourceOracle {
    pub fn new(omega: f64, floor: f64) -> Result<Self> {
        if !(omega > 0.0 && floor >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "line source needs omega > 0 and floor >= 0 (got {omega}, {floor})"
            )));
        }
        let peak = 1.0 / (8.0 * PI * omega * omega);
        let support = if floor > 0.0 && floor < peak {
            omega * (2.0 * (peak / floor).ln()).sqrt()
        } else if floor >= peak {
            0.0
        } else {
            // No floor: the Gaussian is negligible beyond 12 ω.
            12.0 * omega
        };
        Ok(LineSourceOracle {
            omega,
            floor,
            support,
            panels: 24,
        })
    }

    /// Bump above the floor, `4π (g − floor)_+` as a function of radius.
    fn bump(&self, r2: f64) -> f64 {
        let g = (-r2 / (2.0 * self.omega * self.omega)).exp() / (8.0 * PI * self.omega * self.omega);
        4.0 * PI * (g - self.floor).max(0.0)
    }

    /// Total energy of the bump, `∫ 4π (g − floor)_+ dA`.
    pub fn bump_mass(&self) -> f64 {
        let w2 = self.omega * self.omega;
        let g0 = 1.0 / (8.0 * PI * w2);
        let f = self.floor.min(g0);
        let rc2 = self.support * self.support;
        // 2π ∫_0^{r_c} (g0 e^{−r²/2ω²} − f) r dr, times 4π.
        4.0 * PI * 2.0 * PI * (w2 * g0 * (1.0 - (-rc2 / (2.0 * w2)).exp()) - 0.5 * f * rc2)
    }

    /// Energy density at distance `r` from the origin at time `t`.
    pub fn energy(&self, r: f64, t: f64) -> Result<f64> {
        if !(t > 0.0) {
            return Err(Error::InvalidArgument(format!("line source oracle needs t > 0, got {t}")));
        }
        let background = 4.0 * PI * self.floor;
        let rc = self.support;
        // Rings of radius ρ around the target that touch the bump.
        let rho_lo = (r - rc).max(0.0);
        let rho_hi = (r + rc).min(t);
        if rho_lo >= rho_hi {
            return Ok(background);
        }
        let th_lo = (rho_lo / t).min(1.0).asin();
        let th_hi = (rho_hi / t).min(1.0).asin();
        let mut total = 0.0;
        let width = (th_hi - th_lo) / self.panels as f64;
        for k in 0..self.panels {
            let a = th_lo + k as f64 * width;
            for (th, wth) in gauss_legendre_on(8, a, a + width) {
                let rho = t * th.sin();
                total += wth * th.sin() * self.ring_integral(r, rho);
            }
        }
        Ok(background + total / (2.0 * PI))
    }

    /// `∫_0^{2π} bump(|p + ρ ê(α)|) dα` with `|p| = r`.
    fn ring_integral(&self, r: f64, rho: f64) -> f64 {
        let rc = self.support;
        // Half-angle of the arc inside the support, measured from the
        // direction pointing at the origin.
        let half = if r < 1e-300 || rho < 1e-300 {
            PI
        } else {
            let c = (r * r + rho * rho - rc * rc) / (2.0 * r * rho);
            if c <= -1.0 {
                PI
            } else if c >= 1.0 {
                return 0.0;
            } else {
                c.acos()
            }
        };
        let panels = 8;
        let width = half / panels as f64;
        let mut sum = 0.0;
        for k in 0..panels {
            let a = k as f64 * width;
            for (g, w) in gauss_legendre_on(8, a, a + width) {
                let d2 = r * r + rho * rho - 2.0 * r * rho * g.cos();
                sum += w * self.bump(d2.max(0.0));
            }
        }
        2.0 * sum
    }

    /// Oracle at every cell centre; radii shared by symmetric cells are
    /// evaluated once.
    pub fn field(&self, grid: &SpatialGrid2D, t: f64) -> Result<Vec<f64>> {
        let mut cache: HashMap<u64, f64> = HashMap::new();
        let mut out = Vec::with_capacity(grid.num_cells());
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                let (x, y) = grid.cell_center(i, j);
                let r = (x * x + y * y).sqrt();
                let key = r.to_bits();
                let e = match cache.get(&key) {
                    Some(&e) => e,
                    None => {
                        let e = self.energy(r, t)?;
                        cache.insert(key, e);
                        e
                    }
                };
                out.push(e);
            }
        }
        Ok(out)
    }
}

/// Radius of the largest `E` along the positive x axis, from a radial
/// profile sampled at `(r_k, E_k)` with `r_k` increasing.
pub fn peak_radius(profile: &[(f64, f64)], min_radius: f64) -> Option<f64> {
    profile
        .iter()
        .filter(|(r, _)| *r >= min_radius)
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .map(|p| p.0)
}
