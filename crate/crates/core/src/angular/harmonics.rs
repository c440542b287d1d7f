//! Real spherical harmonics.
//!
//! `P_l^m` carries no Condon-Shortley phase: `P_m^m = (2m-1)!! (1-x^2)^{m/2}`
//! is positive on `(-1, 1)`. With `N_l^m = sqrt((2l+1)(l-m)! / (4π (l+m)!))`
//! the real harmonics are
//!
//! ```text
//! Y_lm = √2 N_l^m cos(mφ) P_l^m(cosθ)        m > 0
//!        N_l^0 P_l(cosθ)                     m = 0
//!        √2 N_l^|m| sin(|m|φ) P_l^|m|(cosθ)  m < 0
//! ```
//!
//! and are orthonormal on the unit sphere. Modes are indexed `l² + l + m`.

use std::f64::consts::{PI, SQRT_2};

use crate::error::{Error, Result};
use crate::geodesic_grid::Vec3;

/// Flat index of mode `(l, m)`.
pub fn mode_index(l: usize, m: i64) -> usize {
    ((l * l + l) as i64 + m) as usize
}

/// `(l, m)` of flat index `a`.
pub fn mode_of(a: usize) -> (usize, i64) {
    let l = (a as f64).sqrt() as usize;
    let l = if (l + 1) * (l + 1) <= a { l + 1 } else if l * l > a { l - 1 } else { l };
    (l, a as i64 - (l * l + l) as i64)
}

/// Normalized associated Legendre values `N_l^m P_l^m(x)` for `0 <= m <= l <= l_max`,
/// stored at `l * (l + 1) / 2 + m`.
fn normalized_legendre(l_max: usize, x: f64) -> Vec<f64> {
    let tri = |l: usize, m: usize| l * (l + 1) / 2 + m;
    let mut out = vec![0.0; (l_max + 1) * (l_max + 2) / 2];
    let s = (1.0 - x * x).max(0.0).sqrt();
    // Diagonal: N_m^m P_m^m built multiplicatively to avoid factorial overflow.
    let mut diag = (1.0 / (4.0 * PI)).sqrt();
    out[0] = diag;
    for m in 1..=l_max {
        let mf = m as f64;
        diag *= s * ((2.0 * mf + 1.0) / (2.0 * mf)).sqrt();
        out[tri(m, m)] = diag;
    }
    for m in 0..=l_max {
        let mf = m as f64;
        if m < l_max {
            out[tri(m + 1, m)] = x * (2.0 * mf + 3.0).sqrt() * out[tri(m, m)];
        }
        for l in (m + 2)..=l_max {
            let lf = l as f64;
            let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
            let b = (((lf - 1.0) * (lf - 1.0) - mf * mf) / (4.0 * (lf - 1.0) * (lf - 1.0) - 1.0)).sqrt();
            out[tri(l, m)] = a * (x * out[tri(l - 1, m)] - b * out[tri(l - 2, m)]);
        }
    }
    out
}

/// All real harmonics up to `l_max` at direction `omega`, indexed by [`mode_index`].
pub fn real_harmonics_all(l_max: usize, omega: &Vec3) -> Vec<f64> {
    let z = omega.z.clamp(-1.0, 1.0);
    let phi = omega.y.atan2(omega.x);
    let p = normalized_legendre(l_max, z);
    let tri = |l: usize, m: usize| l * (l + 1) / 2 + m;
    let mut out = vec![0.0; (l_max + 1) * (l_max + 1)];
    for l in 0..=l_max {
        let base = l * l + l;
        out[base] = p[tri(l, 0)];
        for m in 1..=l {
            let (sin, cos) = (m as f64 * phi).sin_cos();
            out[base + m] = SQRT_2 * p[tri(l, m)] * cos;
            out[base - m] = SQRT_2 * p[tri(l, m)] * sin;
        }
    }
    out
}

/// Single real harmonic `Y_lm(omega)`.
pub fn real_spherical_harmonic(l: usize, m: i64, omega: &Vec3) -> Result<f64> {
    if m.unsigned_abs() as usize > l {
        return Err(Error::InvalidArgument(format!("invalid harmonic (l, m) = ({l}, {m})")));
    }
    Ok(real_harmonics_all(l, omega)[mode_index(l, m)])
}
