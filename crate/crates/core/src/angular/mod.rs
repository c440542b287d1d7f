//! Angular bases: piecewise-linear finite elements (FEM_N) and piecewise
//! constant "honeycomb" cells (S_N) on the geodesic grid, and real spherical
//! harmonics (FP_N).

pub mod harmonics;
mod matrices;

use std::fmt;
use std::str::FromStr;

pub use harmonics::{mode_index, mode_of, real_harmonics_all, real_spherical_harmonic};
pub use matrices::{AngularMatrices, DEFAULT_DISSIPATION};

use crate::error::{Error, Result};
use crate::geodesic_grid::{GeodesicGrid, Vec3};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BasisKind {
    Femn,
    Sn,
    Fpn,
}

impl BasisKind {
    pub fn as_str(self) -> &'static str {
        match self {
            BasisKind::Femn => "femn",
            BasisKind::Sn => "sn",
            BasisKind::Fpn => "fpn",
        }
    }
}

impl fmt::Display for BasisKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BasisKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "femn" => Ok(BasisKind::Femn),
            "sn" => Ok(BasisKind::Sn),
            "fpn" => Ok(BasisKind::Fpn),
            other => Err(Error::InvalidArgument(format!("unknown scheme `{other}`"))),
        }
    }
}

#[derive(Clone, Debug)]
pub enum AngularBasis {
    Femn(GeodesicGrid),
    Sn(GeodesicGrid),
    Fpn { l_max: usize },
}

impl AngularBasis {
    /// `resolution` is the refinement level for FEM_N/S_N and `l_max` for FP_N.
    pub fn new(kind: BasisKind, resolution: usize) -> Result<Self> {
        match kind {
            BasisKind::Femn | BasisKind::Sn if resolution > 6 => Err(Error::InvalidArgument(format!(
                "refinement level {resolution} is beyond the supported range (<= 6)"
            ))),
            BasisKind::Fpn if resolution > 40 => Err(Error::InvalidArgument(format!(
                "l_max = {resolution} is beyond the supported range (<= 40)"
            ))),
            BasisKind::Femn => Ok(AngularBasis::Femn(GeodesicGrid::with_level(resolution))),
            BasisKind::Sn => Ok(AngularBasis::Sn(GeodesicGrid::with_level(resolution))),
            BasisKind::Fpn => Ok(AngularBasis::Fpn { l_max: resolution }),
        }
    }

    pub fn kind(&self) -> BasisKind {
        match self {
            AngularBasis::Femn(_) => BasisKind::Femn,
            AngularBasis::Sn(_) => BasisKind::Sn,
            AngularBasis::Fpn { .. } => BasisKind::Fpn,
        }
    }

    /// Refinement level (FEM_N, S_N) or `l_max` (FP_N).
    pub fn resolution(&self) -> usize {
        match self {
            AngularBasis::Femn(g) | AngularBasis::Sn(g) => g.level(),
            AngularBasis::Fpn { l_max } => *l_max,
        }
    }

    pub fn grid(&self) -> Option<&GeodesicGrid> {
        match self {
            AngularBasis::Femn(g) | AngularBasis::Sn(g) => Some(g),
            AngularBasis::Fpn { .. } => None,
        }
    }

    /// Number of basis functions N.
    pub fn len(&self) -> usize {
        match self {
            AngularBasis::Femn(g) | AngularBasis::Sn(g) => g.num_vertices(),
            AngularBasis::Fpn { l_max } => (l_max + 1) * (l_max + 1),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Values of every basis function at `omega`.
    pub fn eval_all(&self, omega: &Vec3) -> Vec<f64> {
        match self {
            AngularBasis::Femn(g) => {
                let mut out = vec![0.0; g.num_vertices()];
                let (t, xi) = g.locate(omega);
                for (slot, &v) in g.triangles()[t].iter().enumerate() {
                    out[v] = fem_local(xi, slot);
                }
                out
            }
            AngularBasis::Sn(g) => {
                let mut out = vec![0.0; g.num_vertices()];
                out[sn_owner(g, omega)] = 1.0;
                out
            }
            AngularBasis::Fpn { l_max } => real_harmonics_all(*l_max, omega),
        }
    }

    /// Reconstructs `F(omega) = Σ_A F^A Ψ_A(omega)`.
    pub fn reconstruct(&self, coeffs: &[f64], omega: &Vec3) -> f64 {
        self.eval_all(omega).iter().zip(coeffs).map(|(p, c)| p * c).sum()
    }
}

/// `2 xi_a + xi_b + xi_c - 1` for the vertex in `slot`.
fn fem_local(xi: [f64; 3], slot: usize) -> f64 {
    let (a, b, c) = (xi[slot], xi[(slot + 1) % 3], xi[(slot + 2) % 3]);
    2.0 * a + b + c - 1.0
}

/// Continuous piecewise-linear hat function of vertex `a`.
pub fn fem_basis_eval(grid: &GeodesicGrid, a: usize, omega: &Vec3) -> f64 {
    let (t, xi) = grid.locate(omega);
    grid.triangles()[t]
        .iter()
        .position(|&v| v == a)
        .map_or(0.0, |slot| fem_local(xi, slot))
}

/// Vertex whose honeycomb cell contains `omega`.
///
/// Inside the containing triangle, slot `s` owns the point when
/// `xi_s >= xi_{s+1}` and `xi_s > xi_{s+2}` (cyclic). Only the triple tie at
/// the centroid leaves no owner; it goes to the lowest vertex index.
pub fn sn_owner(grid: &GeodesicGrid, omega: &Vec3) -> usize {
    let (t, xi) = grid.locate(omega);
    let tri = grid.triangles()[t];
    (0..3)
        .find(|&s| xi[s] >= xi[(s + 1) % 3] && xi[s] > xi[(s + 2) % 3])
        .map_or_else(|| *tri.iter().min().unwrap(), |s| tri[s])
}

/// Indicator of the honeycomb cell of vertex `a`.
pub fn sn_basis_eval(grid: &GeodesicGrid, a: usize, omega: &Vec3) -> f64 {
    if sn_owner(grid, omega) == a {
        1.0
    } else {
        0.0
    }
}

#[cfg(test)]
pub(crate) mod test_support {
    use super::*;
    use rand::Rng;

    pub fn random_direction<R: Rng>(rng: &mut R) -> Vec3 {
        loop {
            let v = Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let n = v.norm();
            if n > 0.1 && n <= 1.0 {
                return v / n;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::test_support::random_direction;
    use super::*;
    use rand::SeedableRng;
    use std::f64::consts::PI;

    #[test]
    fn fem_hat_is_one_at_its_vertex_and_zero_at_neighbours() {
        let g = GeodesicGrid::with_level(2);
        for a in [0, 11, 57, 161] {
            let va = g.vertices()[a];
            assert!((fem_basis_eval(&g, a, &va) - 1.0).abs() < 1e-12);
            for &b in g.neighbors(a) {
                assert!(fem_basis_eval(&g, a, &g.vertices()[b]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn fem_hats_form_partition_of_unity() {
        let g = GeodesicGrid::with_level(1);
        let basis = AngularBasis::Femn(g);
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        for _ in 0..100 {
            let w = random_direction(&mut rng);
            let vals = basis.eval_all(&w);
            let sum: f64 = vals.iter().sum();
            assert!((sum - 1.0).abs() < 1e-12);
            assert!(vals.iter().all(|&v| v >= -1e-12));
        }
    }

    #[test]
    fn sn_cells_partition_the_sphere() {
        let g = GeodesicGrid::with_level(2);
        for a in [0, 40, 100] {
            let va = g.vertices()[a];
            for b in 0..g.num_vertices() {
                let expect = if a == b { 1.0 } else { 0.0 };
                assert_eq!(sn_basis_eval(&g, b, &va), expect);
            }
        }
        let basis = AngularBasis::Sn(g);
        let mut rng = rand::rngs::StdRng::seed_from_u64(11);
        for _ in 0..100 {
            let w = random_direction(&mut rng);
            assert_eq!(basis.eval_all(&w).iter().sum::<f64>(), 1.0);
        }
    }

    #[test]
    fn sn_centroid_tie_goes_to_lowest_vertex() {
        let g = GeodesicGrid::with_level(1);
        let t = 10;
        let tri = g.triangles()[t];
        let c = g.barycentric_to_unit_vector(t, crate::geodesic_grid::BarycentricPoint::centroid());
        assert_eq!(sn_owner(&g, &c), *tri.iter().min().unwrap());
    }

    #[test]
    fn sn_cell_measure_near_uniform() {
        for k in 2..=3 {
            let basis = AngularBasis::new(BasisKind::Sn, k).unwrap();
            let m = AngularMatrices::assemble(&basis).unwrap();
            let ideal = 4.0 * PI / basis.len() as f64;
            for v in &m.basis_integrals {
                assert!(*v / ideal < 1.3 && ideal / *v < 1.3, "k={k}: {v} vs {ideal}");
            }
        }
    }

    #[test]
    fn kind_parsing() {
        assert_eq!("FEMN".parse::<BasisKind>().unwrap(), BasisKind::Femn);
        assert_eq!(" sn".parse::<BasisKind>().unwrap(), BasisKind::Sn);
        assert!("pn".parse::<BasisKind>().is_err());
    }
}
