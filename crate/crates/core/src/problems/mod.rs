//! Benchmark problems: initial and boundary data, media, and reference
//! solutions where one exists.

pub mod cylinder;
pub mod lattice;
pub mod line_source;
pub mod pulse;
pub mod searchlight;

use std::fmt;
use std::str::FromStr;

use crate::angular::{AngularBasis, AngularMatrices, BasisKind};
use crate::dg::{BoundaryChoice, BoundaryConditions, FieldState, LimiterMode, SpatialGrid2D};
use crate::error::{Error, Result};
use crate::positivity::unit_isotropic;
use crate::transport::{MediumMap, SourceKernel};

pub use lattice::LatticeVariant;
pub use searchlight::Beams;

/// A basis together with everything derived from it.
#[derive(Clone, Debug)]
pub struct AngularSetup {
    pub basis: AngularBasis,
    pub matrices: AngularMatrices,
    pub kernel: SourceKernel,
    /// Coefficients of the isotropic state with `E = 1`.
    pub unit_isotropic: Vec<f64>,
}

impl AngularSetup {
    pub fn new(kind: BasisKind, resolution: usize, v: f64) -> Result<Self> {
        let basis = AngularBasis::new(kind, resolution)?;
        let matrices = AngularMatrices::assemble_with(&basis, v)?;
        let kernel = SourceKernel::new(&matrices);
        let unit_isotropic = unit_isotropic(&kernel.isotropic, &kernel.weights);
        Ok(AngularSetup {
            basis,
            matrices,
            kernel,
            unit_isotropic,
        })
    }

    pub fn n(&self) -> usize {
        self.matrices.n
    }

    /// Isotropic state with energy density `e(x, y)` at every cell centre.
    pub fn isotropic_state<F: Fn(f64, f64) -> f64>(&self, grid: SpatialGrid2D, e: F) -> FieldState {
        FieldState::from_fn(grid, self.n(), |i, j, c| {
            let (x, y) = grid.cell_center(i, j);
            let ej = e(x, y);
            for (f, u) in c.iter_mut().zip(&self.unit_isotropic) {
                *f = ej * u;
            }
        })
    }

    pub fn energy(&self, state: &FieldState) -> Vec<f64> {
        state.energy(&self.matrices.basis_integrals)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProblemKind {
    LineSource,
    Searchlight,
    Lattice,
    Cylinder,
    GaussianPulse,
}

impl ProblemKind {
    pub const ALL: [ProblemKind; 5] = [
        ProblemKind::LineSource,
        ProblemKind::Searchlight,
        ProblemKind::Lattice,
        ProblemKind::Cylinder,
        ProblemKind::GaussianPulse,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ProblemKind::LineSource => "line_source",
            ProblemKind::Searchlight => "searchlight",
            ProblemKind::Lattice => "lattice",
            ProblemKind::Cylinder => "cylinder",
            ProblemKind::GaussianPulse => "gaussian_pulse",
        }
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ProblemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        ProblemKind::ALL
            .into_iter()
            .find(|k| k.as_str() == key)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown problem `{s}`")))
    }
}

/// Problem-specific knobs. Fields that do not apply to a problem are ignored.
#[derive(Clone, Debug, PartialEq)]
pub struct ProblemParams {
    /// Line source: Gaussian width ω and the floor of the initial `F`.
    pub omega: f64,
    pub floor: f64,
    /// Searchlight: inflow footprint width and which beams are switched on.
    pub beam_width: f64,
    pub beams: Beams,
    pub lattice_variant: LatticeVariant,
    /// Gaussian pulse: standard deviation of the initial `E` and the
    /// scattering opacity of the medium.
    pub pulse_width: f64,
    pub pulse_kappa_s: f64,
}

impl Default for ProblemParams {
    fn default() -> Self {
        ProblemParams {
            omega: line_source::OMEGA,
            floor: line_source::FLOOR,
            beam_width: searchlight::BEAM_WIDTH,
            beams: Beams::Both,
            lattice_variant: LatticeVariant::Caption,
            pulse_width: 0.1,
            pulse_kappa_s: 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProblemSpec {
    pub kind: ProblemKind,
    pub x: (f64, f64),
    pub y: (f64, f64),
    pub nx: usize,
    pub ny: usize,
    pub dt: f64,
    pub t_end: f64,
    pub limiter: LimiterMode,
    pub boundary: BoundaryChoice,
    /// Default effective opacity of the FP_N filter.
    pub sigma_eff: f64,
    pub params: ProblemParams,
}

/// Fully built problem on a concrete grid and basis.
#[derive(Clone, Debug)]
pub struct Setup {
    pub grid: SpatialGrid2D,
    pub medium: MediumMap,
    pub initial: FieldState,
    pub bc: BoundaryConditions,
}

/// Nearest even integer, at least 2; saturates for huge `x`.
fn even(x: f64) -> usize {
    let n = ((x / 2.0).round() as usize).min(usize::MAX / 2) * 2;
    n.max(2)
}

impl ProblemSpec {
    pub fn defaults(kind: ProblemKind) -> Self {
        let params = ProblemParams::default();
        match kind {
            // δ ≈ 0.006 on [−1.5, 1.5]².
            ProblemKind::LineSource => ProblemSpec {
                kind,
                x: (-1.5, 1.5),
                y: (-1.5, 1.5),
                nx: 500,
                ny: 500,
                dt: 0.002,
                t_end: 1.0,
                limiter: LimiterMode::Minmod,
                boundary: BoundaryChoice::ZeroGradient,
                sigma_eff: 20.0,
                params,
            },
            ProblemKind::Searchlight => ProblemSpec {
                kind,
                x: (-1.5, 1.5),
                y: (-1.5, 1.5),
                nx: 400,
                ny: 400,
                dt: 0.0067,
                t_end: 10.0,
                limiter: LimiterMode::ModMinmod2,
                boundary: BoundaryChoice::Vacuum,
                sigma_eff: 30.0,
                params,
            },
            ProblemKind::Lattice => ProblemSpec {
                kind,
                x: (0.0, 7.0),
                y: (0.0, 7.0),
                nx: 350,
                ny: 350,
                dt: 0.0064,
                t_end: 3.2,
                limiter: LimiterMode::SMinmod2,
                boundary: BoundaryChoice::ZeroGradient,
                sigma_eff: 5.0,
                params,
            },
            // Coarsest of the three spatial resolutions, δ ≈ 0.033.
            ProblemKind::Cylinder => ProblemSpec {
                kind,
                x: (-2.5, 2.5),
                y: (-2.5, 2.5),
                nx: 150,
                ny: 150,
                dt: 0.0075,
                t_end: 18.75,
                limiter: LimiterMode::SMinmod2,
                boundary: BoundaryChoice::ZeroGradient,
                sigma_eff: 5.0,
                params,
            },
            ProblemKind::GaussianPulse => ProblemSpec {
                kind,
                x: (-1.0, 1.0),
                y: (-1.0, 1.0),
                nx: 80,
                ny: 80,
                dt: 0.002,
                t_end: 0.5,
                // Smooth data; limiting only flattens the peak.
                limiter: LimiterMode::None,
                boundary: BoundaryChoice::ZeroGradient,
                sigma_eff: 5.0,
                params,
            },
        }
    }

    /// Multiplies the cell counts by `scale` (rounded to even) and divides
    /// the time step by it.
    pub fn scaled(mut self, scale: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::InvalidArgument(format!("scale {scale} must be positive")));
        }
        self.nx = even(self.nx as f64 * scale);
        self.ny = even(self.ny as f64 * scale);
        self.dt /= scale;
        Ok(self)
    }

    /// Sets the cell count along both axes and keeps `dt/δ` fixed.
    pub fn with_cells(mut self, nx: usize, ny: usize) -> Self {
        let ratio = nx as f64 / self.nx as f64;
        self.nx = nx;
        self.ny = ny;
        self.dt /= ratio;
        self
    }

    pub fn grid(&self) -> Result<SpatialGrid2D> {
        SpatialGrid2D::covering(self.nx, self.ny, self.x, self.y)
    }

    pub fn build(&self, ang: &AngularSetup) -> Result<Setup> {
        let grid = self.grid()?;
        let p = &self.params;
        let (medium, initial, bc) = match self.kind {
            ProblemKind::LineSource => (
                MediumMap::uniform(grid.nx, grid.ny, Default::default())?,
                ang.isotropic_state(grid, |x, y| line_source::initial_energy(x, y, p.omega, p.floor)),
                BoundaryConditions::with_choice(self.boundary, &ang.matrices),
            ),
            ProblemKind::Searchlight => (
                MediumMap::uniform(grid.nx, grid.ny, Default::default())?,
                FieldState::zeros(grid, ang.n()),
                searchlight::boundary(&grid, ang, self.boundary, p.beam_width, p.beams)?,
            ),
            ProblemKind::Lattice => (
                lattice::medium(&grid, p.lattice_variant)?,
                FieldState::zeros(grid, ang.n()),
                BoundaryConditions::with_choice(self.boundary, &ang.matrices),
            ),
            ProblemKind::Cylinder => (
                cylinder::medium(&grid)?,
                FieldState::zeros(grid, ang.n()),
                BoundaryConditions::with_choice(self.boundary, &ang.matrices),
            ),
            ProblemKind::GaussianPulse => (
                pulse::medium(&grid, p.pulse_kappa_s)?,
                ang.isotropic_state(grid, |x, y| pulse::initial_energy(x, y, p.pulse_width)),
                BoundaryConditions::with_choice(self.boundary, &ang.matrices),
            ),
        };
        Ok(Setup {
            grid,
            medium,
            initial,
            bc,
        })
    }

    pub fn has_oracle(&self) -> bool {
        match self.kind {
            ProblemKind::LineSource | ProblemKind::Cylinder => true,
            ProblemKind::GaussianPulse => self.params.pulse_kappa_s > 0.0,
            ProblemKind::Searchlight | ProblemKind::Lattice => false,
        }
    }

    /// Reference `E` at every cell centre of `grid` at time `t`.
    pub fn oracle_field(&self, grid: &SpatialGrid2D, t: f64) -> Result<Option<Vec<f64>>> {
        let p = &self.params;
        let field = match self.kind {
            ProblemKind::LineSource => {
                let oracle = line_source::LineSourceOracle::new(p.omega, p.floor)?;
                Some(oracle.field(grid, t)?)
            }
            ProblemKind::Cylinder => Some(cylinder::oracle_field(grid)),
            ProblemKind::GaussianPulse if p.pulse_kappa_s > 0.0 => Some(pulse::diffusion_field(
                grid,
                t,
                p.pulse_width,
                p.pulse_kappa_s,
            )?),
            _ => None,
        };
        Ok(field)
    }
}

/// `(1/N_p) Σ |a − b|`.
pub fn l1_error(numerical: &[f64], exact: &[f64]) -> Result<f64> {
    if numerical.len() != exact.len() || numerical.is_empty() {
        return Err(Error::Shape(format!(
            "cannot compare fields of {} and {} points",
            numerical.len(),
            exact.len()
        )));
    }
    let sum: f64 = numerical.iter().zip(exact).map(|(a, b)| (a - b).abs()).sum();
    Ok(sum / numerical.len() as f64)
}

pub fn linf_error(numerical: &[f64], exact: &[f64]) -> Result<f64> {
    if numerical.len() != exact.len() || numerical.is_empty() {
        return Err(Error::Shape(format!(
            "cannot compare fields of {} and {} points",
            numerical.len(),
            exact.len()
        )));
    }
    Ok(numerical
        .iter()
        .zip(exact)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn l1_error_definition() {
        assert_eq!(l1_error(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert!((l1_error(&[1.5, 2.5, 0.5], &[1.0, 2.0, 0.0]).unwrap() - 0.5).abs() < 1e-15);
        assert!(l1_error(&[1.0], &[1.0, 2.0]).is_err());
        assert_eq!(linf_error(&[0.0, 3.0], &[1.0, 1.0]).unwrap(), 2.0);
    }

    #[test]
    fn paper_defaults() {
        let ls = ProblemSpec::defaults(ProblemKind::LineSource);
        assert!(((ls.x.1 - ls.x.0) / ls.nx as f64 - 0.006).abs() < 1e-12);
        assert_eq!((ls.dt, ls.t_end, ls.sigma_eff), (0.002, 1.0, 20.0));
        let sl = ProblemSpec::defaults(ProblemKind::Searchlight);
        assert!(((sl.x.1 - sl.x.0) / sl.nx as f64 - 0.0075).abs() < 1e-12);
        assert_eq!(sl.limiter, LimiterMode::ModMinmod2);
        let la = ProblemSpec::defaults(ProblemKind::Lattice);
        assert!(((la.x.1 - la.x.0) / la.nx as f64 - 0.02).abs() < 1e-12);
        assert_eq!((la.dt, la.t_end), (0.0064, 3.2));
        let cy = ProblemSpec::defaults(ProblemKind::Cylinder);
        assert_eq!((cy.nx, cy.dt, cy.t_end, cy.sigma_eff), (150, 0.0075, 18.75, 5.0));
    }

    #[test]
    fn scaling_keeps_cells_even() {
        let s = ProblemSpec::defaults(ProblemKind::Lattice).scaled(0.5).unwrap();
        assert_eq!(s.nx, 176);
        assert!((s.dt - 0.0128).abs() < 1e-15);
        let s = ProblemSpec::defaults(ProblemKind::LineSource).scaled(0.25).unwrap();
        assert_eq!(s.nx, 126);
        assert!(ProblemSpec::defaults(ProblemKind::LineSource).scaled(0.0).is_err());
        // Found by fuzzing: the cell count used to overflow.
        let huge = ProblemSpec::defaults(ProblemKind::LineSource).scaled(4.4e37).unwrap();
        assert_eq!(huge.nx, usize::MAX - 1);
    }

    #[test]
    fn kind_round_trip() {
        for k in ProblemKind::ALL {
            assert_eq!(k.as_str().parse::<ProblemKind>().unwrap(), k);
        }
        assert_eq!("line-source".parse::<ProblemKind>().unwrap(), ProblemKind::LineSource);
        assert!("sphere".parse::<ProblemKind>().is_err());
    }

    #[test]
    fn isotropic_states_have_requested_energy() {
        for (kind, res) in [(BasisKind::Femn, 1), (BasisKind::Sn, 1), (BasisKind::Fpn, 2)] {
            let ang = AngularSetup::new(kind, res, crate::angular::DEFAULT_DISSIPATION).unwrap();
            let grid = SpatialGrid2D::covering(4, 4, (0.0, 1.0), (0.0, 1.0)).unwrap();
            let s = ang.isotropic_state(grid, |x, y| x + y);
            let e = ang.energy(&s);
            for j in 0..4 {
                for i in 0..4 {
                    let (x, y) = grid.cell_center(i, j);
                    assert!((e[j * 4 + i] - (x + y)).abs() < 1e-12);
                }
            }
        }
    }
}
