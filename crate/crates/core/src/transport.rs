//! Collision source terms and angular moments.
//!
//! Galerkin projection of `η − κ_a F + κ_s(E/4π − F)` with the lumped mass:
//!
//! ```text
//! e^A   = η u^A
//! P^A_B = (κ_s/4π) u^A V_B − (κ_a + κ_s) δ^A_B,     u = M̄⁻¹V,  V_A = ∫Ψ_A dΩ
//! ```
//!
//! `P` is rank one plus a multiple of the identity and is applied in that
//! form; [`SourceOperator::to_dense`] materializes it for inspection.

use std::f64::consts::PI;

use crate::angular::AngularMatrices;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct MediumCell {
    pub eta: f64,
    pub kappa_a: f64,
    pub kappa_s: f64,
}

impl MediumCell {
    pub const VACUUM: MediumCell = MediumCell {
        eta: 0.0,
        kappa_a: 0.0,
        kappa_s: 0.0,
    };

    pub fn new(eta: f64, kappa_a: f64, kappa_s: f64) -> Result<Self> {
        let c = MediumCell { eta, kappa_a, kappa_s };
        c.validate()?;
        Ok(c)
    }

    fn validate(&self) -> Result<()> {
        for (name, v) in [("eta", self.eta), ("kappa_a", self.kappa_a), ("kappa_s", self.kappa_s)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidArgument(format!("{name} = {v} must be finite and >= 0")));
            }
        }
        Ok(())
    }

    pub fn is_vacuum(&self) -> bool {
        self.eta == 0.0 && self.kappa_a == 0.0 && self.kappa_s == 0.0
    }
}

/// Piecewise-constant medium coefficients, one entry per spatial cell in
/// row-major `(j, i)` order.
#[derive(Clone, Debug)]
pub struct MediumMap {
    pub nx: usize,
    pub ny: usize,
    cells: Vec<MediumCell>,
}

impl MediumMap {
    pub fn uniform(nx: usize, ny: usize, cell: MediumCell) -> Result<Self> {
        cell.validate()?;
        Ok(MediumMap {
            nx,
            ny,
            cells: vec![cell; nx * ny],
        })
    }

    pub fn from_cells(nx: usize, ny: usize, cells: Vec<MediumCell>) -> Result<Self> {
        if cells.len() != nx * ny {
            return Err(Error::Shape(format!(
                "medium has {} cells, grid has {nx}x{ny}",
                cells.len()
            )));
        }
        for c in &cells {
            c.validate()?;
        }
        Ok(MediumMap { nx, ny, cells })
    }

    /// Samples `f` at every cell index.
    pub fn from_fn<F: FnMut(usize, usize) -> MediumCell>(nx: usize, ny: usize, mut f: F) -> Result<Self> {
        let mut cells = Vec::with_capacity(nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                cells.push(f(i, j));
            }
        }
        Self::from_cells(nx, ny, cells)
    }

    pub fn get(&self, i: usize, j: usize) -> MediumCell {
        self.cells[j * self.nx + i]
    }

    pub fn cells(&self) -> &[MediumCell] {
        &self.cells
    }

    pub fn is_vacuum(&self) -> bool {
        self.cells.iter().all(MediumCell::is_vacuum)
    }
}

/// Basis-dependent parts of the source terms, shared by every cell.
#[derive(Clone, Debug)]
pub struct SourceKernel {
    /// `u = M̄⁻¹V`, the coefficients of the isotropic unit-intensity state.
    pub isotropic: Vec<f64>,
    /// `V_A = ∫Ψ_A dΩ`.
    pub weights: Vec<f64>,
}

impl SourceKernel {
    pub fn new(m: &AngularMatrices) -> Self {
        SourceKernel {
            isotropic: m
                .basis_integrals
                .iter()
                .zip(&m.lumped)
                .map(|(v, l)| v / l)
                .collect(),
            weights: m.basis_integrals.clone(),
        }
    }

    /// `out += e + P f` for one cell.
    #[inline]
    pub fn accumulate(&self, cell: &MediumCell, f: &[f64], out: &mut [f64]) {
        if cell.is_vacuum() {
            return;
        }
        let e = energy_with(&self.weights, f);
        let iso = cell.eta + cell.kappa_s / (4.0 * PI) * e;
        let removal = cell.kappa_a + cell.kappa_s;
        for ((o, u), x) in out.iter_mut().zip(&self.isotropic).zip(f) {
            *o += iso * u - removal * x;
        }
    }
}

#[derive(Clone, Debug)]
pub struct SourceOperator {
    pub emission: Vec<f64>,
    scatter: f64,
    removal: f64,
    kernel: SourceKernel,
}

pub fn build_source_operator(cell: &MediumCell, m: &AngularMatrices) -> SourceOperator {
    let kernel = SourceKernel::new(m);
    SourceOperator {
        emission: kernel.isotropic.iter().map(|u| cell.eta * u).collect(),
        scatter: cell.kappa_s / (4.0 * PI),
        removal: cell.kappa_a + cell.kappa_s,
        kernel,
    }
}

impl SourceOperator {
    /// `P f`.
    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        let e = energy_with(&self.kernel.weights, f);
        self.kernel
            .isotropic
            .iter()
            .zip(f)
            .map(|(u, x)| self.scatter * e * u - self.removal * x)
            .collect()
    }

    /// Row-major `P`.
    pub fn to_dense(&self) -> Vec<f64> {
        let n = self.emission.len();
        let mut p = vec![0.0; n * n];
        for a in 0..n {
            for b in 0..n {
                p[a * n + b] = self.scatter * self.kernel.isotropic[a] * self.kernel.weights[b];
            }
            p[a * n + a] -= self.removal;
        }
        p
    }
}

fn energy_with(weights: &[f64], f: &[f64]) -> f64 {
    weights.iter().zip(f).map(|(w, x)| w * x).sum()
}

/// `E = Σ_A F^A V_A`.
pub fn compute_energy(f: &[f64], m: &AngularMatrices) -> f64 {
    energy_with(&m.basis_integrals, f)
}

/// Flux vector `F_i` and pressure tensor `P_ij` of one cell.
pub fn compute_flux_and_pressure(f: &[f64], m: &AngularMatrices) -> ([f64; 3], [[f64; 3]; 3]) {
    let flux = std::array::from_fn(|i| energy_with(&m.first_moments[i], f));
    let s: [f64; 6] = std::array::from_fn(|k| energy_with(&m.second_moments[k], f));
    let p = [[s[0], s[1], s[2]], [s[1], s[3], s[4]], [s[2], s[4], s[5]]];
    (flux, p)
}
