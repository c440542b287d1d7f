//! Mass, stiffness, advection and dissipation matrices of an angular basis.
//!
//! With the lumped mass `M̄` positive diagonal, `S̃ = M̄⁻¹S` is similar to the
//! symmetric `B = M̄^{-1/2} S M̄^{-1/2} = QΛQᵀ`, so its eigenvalues are real
//! and the eigenvector matrices are `R = M̄^{-1/2}Q` and `L = QᵀM̄^{1/2} = R⁻¹`.
//! The dissipation matrix is `Ŝ = R max(v, |Λ|) L`.

use nalgebra::{DMatrix, SymmetricEigen};

use super::{fem_local, real_harmonics_all, AngularBasis, BasisKind};
use crate::error::{Error, Result};
use crate::geodesic_grid::{GeodesicGrid, Vec3};
use crate::quadrature::{gauss_legendre, TriangleRule};

/// Default zero-speed dissipation `v = 1/√3`.
pub const DEFAULT_DISSIPATION: f64 = 0.577_350_269_189_625_8;

/// Largest tolerated relative asymmetry of an assembled symmetric matrix.
const SYMMETRY_TOL: f64 = 1e-12;

/// Dense matrices are row-major `n × n`. Second moments are ordered
/// `xx, xy, xz, yy, yz, zz`.
#[derive(Clone, Debug)]
pub struct AngularMatrices {
    pub kind: BasisKind,
    pub resolution: usize,
    pub n: usize,
    pub v: f64,
    pub mass: Vec<f64>,
    pub lumped: Vec<f64>,
    /// `V_A = ∫Ψ_A dΩ`; the energy is `E = Σ V_A F^A`.
    pub basis_integrals: Vec<f64>,
    pub first_moments: [Vec<f64>; 3],
    pub second_moments: [Vec<f64>; 6],
    pub stiffness: [Vec<f64>; 3],
    pub advection: [Vec<f64>; 3],
    pub eigenvalues: [Vec<f64>; 3],
    /// Orthonormal eigenvectors of the symmetrized advection matrix, row-major
    /// with one eigenvector per column.
    sym_eigenvectors: [Vec<f64>; 3],
    pub dissipation: [Vec<f64>; 3],
    /// Largest relative asymmetry seen in M and S before symmetrization.
    pub max_asymmetry: f64,
}

struct Moments {
    n: usize,
    mass: Vec<f64>,
    stiffness: [Vec<f64>; 3],
    integrals: Vec<f64>,
    first: [Vec<f64>; 3],
    second: [Vec<f64>; 6],
}

impl Moments {
    fn new(n: usize) -> Self {
        Moments {
            n,
            mass: vec![0.0; n * n],
            stiffness: std::array::from_fn(|_| vec![0.0; n * n]),
            integrals: vec![0.0; n],
            first: std::array::from_fn(|_| vec![0.0; n]),
            second: std::array::from_fn(|_| vec![0.0; n]),
        }
    }

    /// Adds one quadrature node carrying the non-zero basis values `vals`.
    fn add_node(&mut self, omega: &Vec3, weight: f64, vals: &[(usize, f64)]) {
        let n = self.n;
        let o = [omega.x, omega.y, omega.z];
        let oo = [o[0] * o[0], o[0] * o[1], o[0] * o[2], o[1] * o[1], o[1] * o[2], o[2] * o[2]];
        for &(a, pa) in vals {
            let wa = weight * pa;
            self.integrals[a] += wa;
            for i in 0..3 {
                self.first[i][a] += wa * o[i];
            }
            for i in 0..6 {
                self.second[i][a] += wa * oo[i];
            }
            for &(b, pb) in vals {
                let w = wa * pb;
                self.mass[a * n + b] += w;
                for i in 0..3 {
                    self.stiffness[i][a * n + b] += w * o[i];
                }
            }
        }
    }
}

fn grid_moments(grid: &GeodesicGrid, sn: bool) -> Moments {
    let rule = TriangleRule::default();
    let mut acc = Moments::new(grid.num_vertices());
    const WHOLE: [[f64; 3]; 3] = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    let third = 1.0 / 3.0;
    for (t, tri) in grid.triangles().iter().enumerate() {
        if !sn {
            grid.for_each_node(&rule, t, WHOLE, |omega, xi, w| {
                let vals = [
                    (tri[0], fem_local(*xi, 0)),
                    (tri[1], fem_local(*xi, 1)),
                    (tri[2], fem_local(*xi, 2)),
                ];
                acc.add_node(omega, w, &vals);
            });
            continue;
        }
        // Honeycomb cell of slot s inside this triangle: the quadrilateral
        // vertex, edge midpoint, centroid, other edge midpoint.
        for s in 0..3 {
            let (s1, s2) = ((s + 1) % 3, (s + 2) % 3);
            let mut corner = [0.0; 3];
            corner[s] = 1.0;
            let mut m1 = [0.0; 3];
            m1[s] = 0.5;
            m1[s1] = 0.5;
            let mut m2 = [0.0; 3];
            m2[s] = 0.5;
            m2[s2] = 0.5;
            let centroid = [third; 3];
            for corners in [[corner, m1, centroid], [corner, centroid, m2]] {
                grid.for_each_node(&rule, t, corners, |omega, _, w| {
                    acc.add_node(omega, w, &[(tri[s], 1.0)]);
                });
            }
        }
    }
    acc
}

fn harmonic_moments(l_max: usize) -> Moments {
    let n = (l_max + 1) * (l_max + 1);
    let mut acc = Moments::new(n);
    let (xs, ws) = gauss_legendre(l_max + 2);
    let nphi = 2 * l_max + 4;
    let dphi = 2.0 * std::f64::consts::PI / nphi as f64;
    let mut vals = Vec::with_capacity(n);
    for (&z, &wz) in xs.iter().zip(&ws) {
        let s = (1.0 - z * z).sqrt();
        for k in 0..nphi {
            let phi = dphi * k as f64;
            let omega = Vec3::new(s * phi.cos(), s * phi.sin(), z);
            vals.clear();
            vals.extend(real_harmonics_all(l_max, &omega).into_iter().enumerate());
            acc.add_node(&omega, wz * dphi, &vals);
        }
    }
    acc
}

/// Largest `|A - Aᵀ|` relative to `max |A|`, then replaces `A` by its
/// symmetric part.
fn symmetrize(n: usize, a: &mut [f64]) -> f64 {
    let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    let mut worst = 0.0f64;
    for r in 0..n {
        for c in (r + 1)..n {
            let (x, y) = (a[r * n + c], a[c * n + r]);
            worst = worst.max((x - y).abs() / scale);
            let mean = 0.5 * (x + y);
            a[r * n + c] = mean;
            a[c * n + r] = mean;
        }
    }
    worst
}

fn is_diagonal(n: usize, a: &[f64]) -> bool {
    (0..n).all(|r| (0..n).all(|c| r == c || a[r * n + c] == 0.0))
}

impl AngularMatrices {
    pub fn assemble(basis: &AngularBasis) -> Result<Self> {
        Self::assemble_with(basis, DEFAULT_DISSIPATION)
    }

    pub fn assemble_with(basis: &AngularBasis, v: f64) -> Result<Self> {
        if !(v.is_finite() && v >= 0.0) {
            return Err(Error::InvalidArgument(format!("dissipation v = {v} must be finite and >= 0")));
        }
        let mut mom = match basis {
            AngularBasis::Femn(g) => grid_moments(g, false),
            AngularBasis::Sn(g) => grid_moments(g, true),
            AngularBasis::Fpn { l_max } => harmonic_moments(*l_max),
        };
        let n = mom.n;
        let mut max_asymmetry = symmetrize(n, &mut mom.mass);
        for s in mom.stiffness.iter_mut() {
            max_asymmetry = max_asymmetry.max(symmetrize(n, s));
        }
        if max_asymmetry > SYMMETRY_TOL {
            return Err(Error::Assembly(format!(
                "assembled matrices deviate from symmetry by {max_asymmetry:e}"
            )));
        }

        if basis.kind() == BasisKind::Fpn {
            // Only Y_00 has a non-zero mean; drop quadrature round-off elsewhere.
            mom.integrals.fill(0.0);
            mom.integrals[0] = (4.0 * std::f64::consts::PI).sqrt();
        }
        let lumped: Vec<f64> = match basis.kind() {
            BasisKind::Fpn => vec![1.0; n],
            _ => (0..n).map(|r| mom.mass[r * n..(r + 1) * n].iter().sum()).collect(),
        };
        if let Some(bad) = lumped.iter().position(|&m| !(m > 0.0 && m.is_finite())) {
            return Err(Error::Assembly(format!(
                "lumped mass entry {bad} is {} (must be positive)",
                lumped[bad]
            )));
        }

        let mut advection: [Vec<f64>; 3] = Default::default();
        let mut eigenvalues: [Vec<f64>; 3] = Default::default();
        let mut sym_eigenvectors: [Vec<f64>; 3] = Default::default();
        let mut dissipation: [Vec<f64>; 3] = Default::default();
        let sqrt_m: Vec<f64> = lumped.iter().map(|m| m.sqrt()).collect();
        for i in 0..3 {
            let s = &mom.stiffness[i];
            advection[i] = (0..n * n).map(|k| s[k] / lumped[k / n]).collect();

            if is_diagonal(n, s) {
                eigenvalues[i] = (0..n).map(|a| advection[i][a * n + a]).collect();
                let mut q = vec![0.0; n * n];
                let mut d = vec![0.0; n * n];
                for a in 0..n {
                    q[a * n + a] = 1.0;
                    d[a * n + a] = v.max(eigenvalues[i][a].abs());
                }
                sym_eigenvectors[i] = q;
                dissipation[i] = d;
                continue;
            }

            let b = DMatrix::from_fn(n, n, |r, c| s[r * n + c] / (sqrt_m[r] * sqrt_m[c]));
            let eig = SymmetricEigen::new(b);
            let lam: Vec<f64> = eig.eigenvalues.iter().copied().collect();
            let q = &eig.eigenvectors;
            // Ŝ = M̄^{-1/2} Q diag(μ) Qᵀ M̄^{1/2}
            let mut qmu = q.clone();
            for (c, l) in lam.iter().enumerate() {
                let mu = v.max(l.abs());
                qmu.column_mut(c).scale_mut(mu);
            }
            let core = &qmu * q.transpose();
            dissipation[i] = (0..n * n)
                .map(|k| {
                    let (r, c) = (k / n, k % n);
                    core[(r, c)] * sqrt_m[c] / sqrt_m[r]
                })
                .collect();
            eigenvalues[i] = lam;
            sym_eigenvectors[i] = (0..n * n).map(|k| q[(k / n, k % n)]).collect();
        }

        Ok(AngularMatrices {
            kind: basis.kind(),
            resolution: basis.resolution(),
            n,
            v,
            mass: mom.mass,
            lumped,
            basis_integrals: mom.integrals,
            first_moments: mom.first,
            second_moments: mom.second,
            stiffness: mom.stiffness,
            advection,
            eigenvalues,
            sym_eigenvectors,
            dissipation,
            max_asymmetry,
        })
    }

    /// Right eigenvectors `R = M̄^{-1/2}Q` of `S̃^i`, one per column.
    pub fn right_eigenvectors(&self, i: usize) -> Vec<f64> {
        let n = self.n;
        let q = &self.sym_eigenvectors[i];
        (0..n * n).map(|k| q[k] / self.lumped[k / n].sqrt()).collect()
    }

    /// Left eigenvectors `L = QᵀM̄^{1/2} = R⁻¹`, one per row.
    pub fn left_eigenvectors(&self, i: usize) -> Vec<f64> {
        let n = self.n;
        let q = &self.sym_eigenvectors[i];
        (0..n * n)
            .map(|k| {
                let (r, c) = (k / n, k % n);
                q[c * n + r] * self.lumped[c].sqrt()
            })
            .collect()
    }

    /// Largest `|λ|` over all three advection matrices.
    pub fn spectral_radius(&self) -> f64 {
        self.eigenvalues
            .iter()
            .flatten()
            .fold(0.0f64, |m, l| m.max(l.abs()))
    }
}
