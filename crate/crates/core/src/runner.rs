//! Run orchestration: builds the discretization from a [`RunConfig`],
//! steps it, and writes snapshots, diagnostics and a summary.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::dg::{Discretization, FieldState};
use crate::error::{Error, Result};
use crate::integrator::{apply_hooks, cfl_warning, plan_steps, step_rk2, Hooks, Positivity, Workspace, DEFAULT_CFL};
use crate::io::field::FieldFile;
use crate::io::{PositivityChoice, RunConfig};
use crate::positivity::{ClipStats, FilterSpec, FilterStrength};
use crate::problems::{l1_error, linf_error, AngularSetup, ProblemKind};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    pub time: f64,
    pub indicator: f64,
    pub clip: ClipStats,
    /// `Σ E δxδy` over the domain.
    pub total_energy: f64,
    pub min_energy: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RunStats {
    pub steps: usize,
    pub mean_indicator: f64,
    pub clip: ClipStats,
    /// Smallest cell energy density seen after any step.
    pub min_energy: f64,
}

pub struct Simulation {
    pub config: RunConfig,
    pub angular: AngularSetup,
    pub disc: Discretization,
    pub hooks: Hooks,
    pub state: FieldState,
    steps: Vec<f64>,
    next: usize,
    ws: Workspace,
    indicator_sum: f64,
    stats: RunStats,
}

impl Simulation {
    pub fn new(config: RunConfig) -> Result<Self> {
        let angular = AngularSetup::new(config.scheme, config.resolution, config.dissipation)?;
        Self::with_angular(config, angular)
    }

    /// Reuses an already assembled basis; it must match the config.
    pub fn with_angular(config: RunConfig, angular: AngularSetup) -> Result<Self> {
        if angular.basis.kind() != config.scheme || angular.basis.resolution() != config.resolution {
            return Err(Error::InvalidArgument("angular setup does not match the run config".into()));
        }
        let setup = config.spec.build(&angular)?;
        let positivity = match config.effective_positivity() {
            PositivityChoice::None | PositivityChoice::Auto => Positivity::None,
            PositivityChoice::Clip => Positivity::Clip {
                mass_sums: angular.matrices.basis_integrals.clone(),
                isotropic: angular.unit_isotropic.clone(),
            },
            PositivityChoice::Filter => {
                let strength = match config.filter_strength {
                    Some(s) => FilterStrength::Raw(s),
                    None => FilterStrength::EffectiveOpacity(config.spec.sigma_eff),
                };
                Positivity::Filter(FilterSpec::new(config.resolution, strength)?)
            }
        };
        let hooks = Hooks {
            limiter: config.spec.limiter,
            positivity,
        };
        let disc = Discretization::new(setup.grid, &angular.matrices, setup.medium, setup.bc)?;
        let mut state = setup.initial;
        // Limit the initial data; the filter is tied to a step length and
        // is left out here.
        let initial_hooks = Hooks {
            limiter: hooks.limiter,
            positivity: match &hooks.positivity {
                Positivity::Filter(_) => Positivity::None,
                other => other.clone(),
            },
        };
        apply_hooks(&mut state, &disc, &initial_hooks, config.spec.dt);
        let steps = plan_steps(config.spec.t_end, config.spec.dt)?;
        let min_energy = angular.energy(&state).into_iter().fold(f64::INFINITY, f64::min);
        Ok(Simulation {
            config,
            angular,
            disc,
            hooks,
            state,
            steps,
            next: 0,
            ws: Workspace::default(),
            indicator_sum: 0.0,
            stats: RunStats {
                min_energy,
                ..RunStats::default()
            },
        })
    }

    pub fn total_steps(&self) -> usize {
        self.steps.len()
    }

    pub fn is_finished(&self) -> bool {
        self.next >= self.steps.len()
    }

    pub fn cfl_warning(&self) -> Option<String> {
        let g = self.disc.grid;
        cfl_warning(self.config.spec.dt, g.dx, g.dy, DEFAULT_CFL)
    }

    pub fn energy(&self) -> Vec<f64> {
        self.angular.energy(&self.state)
    }

    /// Advances one step; `None` once `t_end` is reached.
    pub fn step(&mut self) -> Result<Option<StepRecord>> {
        let Some(&dt) = self.steps.get(self.next) else {
            return Ok(None);
        };
        let step = self.next;
        let report = step_rk2(&mut self.state, &self.disc, &self.hooks, dt, step, &mut self.ws)?;
        self.next += 1;
        let e = self.energy();
        let min_energy = e.iter().cloned().fold(f64::INFINITY, f64::min);
        let total_energy = e.iter().sum::<f64>() * self.disc.grid.cell_area();
        self.indicator_sum += report.indicator;
        self.stats.steps = self.next;
        self.stats.mean_indicator = self.indicator_sum / self.next as f64;
        self.stats.clip.merge(report.clip);
        self.stats.min_energy = self.stats.min_energy.min(min_energy);
        Ok(Some(StepRecord {
            step,
            time: self.state.time,
            indicator: report.indicator,
            clip: report.clip,
            total_energy,
            min_energy,
        }))
    }

    pub fn run_to_end<F: FnMut(&StepRecord)>(&mut self, mut on_step: F) -> Result<RunStats> {
        while let Some(r) = self.step()? {
            on_step(&r);
        }
        Ok(self.stats)
    }

    pub fn stats(&self) -> RunStats {
        self.stats
    }

    /// Oracle `E` at the current time, if the problem has one. The cylinder
    /// oracle is the steady state and ignores the time.
    pub fn oracle(&self) -> Result<Option<Vec<f64>>> {
        if self.state.time <= 0.0 && self.config.problem != ProblemKind::Cylinder {
            return Ok(None);
        }
        self.config.spec.oracle_field(&self.disc.grid, self.state.time)
    }

    /// `(L1, L∞)` against the oracle.
    pub fn errors(&self) -> Result<Option<(f64, f64)>> {
        let Some(exact) = self.oracle()? else {
            return Ok(None);
        };
        let e = self.energy();
        Ok(Some((l1_error(&e, &exact)?, linf_error(&e, &exact)?)))
    }

    pub fn energy_file(&self) -> Result<FieldFile> {
        FieldFile::energy(
            self.config.scheme.as_str(),
            self.config.resolution,
            self.angular.n(),
            self.disc.grid,
            self.state.time,
            self.energy(),
        )
    }

    pub fn coefficient_file(&self) -> FieldFile {
        FieldFile::coefficients(self.config.scheme.as_str(), self.config.resolution, &self.state)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunSummary {
    pub stats: RunStats,
    pub final_time: f64,
    pub errors: Option<(f64, f64)>,
    pub snapshots: Vec<PathBuf>,
    pub seconds: f64,
}

fn create(path: &Path) -> Result<fs::File> {
    fs::File::create(path).map_err(|e| Error::io(path, e))
}

fn write_snapshot(sim: &Simulation, dir: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    let index = out.iter().filter(|p| p.file_name().is_some_and(|n| n.to_string_lossy().starts_with("E_"))).count();
    let path = dir.join(format!("E_{index:05}.field"));
    sim.energy_file()?.save(&path)?;
    out.push(path);
    if sim.config.write_coefficients {
        let path = dir.join(format!("F_{index:05}.field"));
        sim.coefficient_file().save(&path)?;
        out.push(path);
    }
    Ok(())
}

/// Runs `config` to completion. Progress and warnings go to `log`; files
/// go to the configured output directory, if any.
pub fn run(config: &RunConfig, log: &mut dyn Write) -> Result<RunSummary> {
    let start = Instant::now();
    let mut sim = Simulation::new(config.clone())?;
    let logio = |e: std::io::Error| Error::io("<log>", e);
    if let Some(w) = sim.cfl_warning() {
        writeln!(log, "warning: {w}").map_err(logio)?;
    }
    let g = sim.disc.grid;
    writeln!(
        log,
        "{} {}({}) N={} grid {}x{} dt={} t_end={} steps={}",
        config.problem,
        config.scheme,
        config.resolution,
        sim.angular.n(),
        g.nx,
        g.ny,
        config.spec.dt,
        config.spec.t_end,
        sim.total_steps()
    )
    .map_err(logio)?;

    let dir = config.output_dir.clone();
    let mut snapshots = Vec::new();
    let mut diag = None;
    if let Some(dir) = &dir {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let path = dir.join("diagnostics.csv");
        let mut f = create(&path)?;
        writeln!(
            f,
            "step,time,indicator,clipped_cells,fallback_cells,zeroed_cells,clipped_energy,total_energy,min_energy"
        )
        .map_err(|e| Error::io(&path, e))?;
        diag = Some((f, path));
        write_snapshot(&sim, dir, &mut snapshots)?;
    }

    let every = config.snapshot_every;
    let mut next_snapshot = every;
    let total = sim.total_steps().max(1);
    let mut last_report = 0;
    while let Some(r) = sim.step()? {
        if let Some((f, path)) = diag.as_mut() {
            writeln!(
                f,
                "{},{:?},{:?},{},{},{},{:?},{:?},{:?}",
                r.step,
                r.time,
                r.indicator,
                r.clip.clipped,
                r.clip.fallback,
                r.clip.zeroed,
                r.clip.clipped_energy,
                r.total_energy,
                r.min_energy
            )
            .map_err(|e| Error::io(&*path, e))?;
        }
        if let Some(dir) = &dir {
            if every > 0.0 && r.time >= next_snapshot * (1.0 - 1e-12) && !sim.is_finished() {
                write_snapshot(&sim, dir, &mut snapshots)?;
                while next_snapshot <= r.time * (1.0 + 1e-12) {
                    next_snapshot += every;
                }
            }
        }
        let pct = (r.step + 1) * 10 / total;
        if pct > last_report {
            last_report = pct;
            writeln!(log, "  step {}/{} t={:.4} E_total={:.6e}", r.step + 1, total, r.time, r.total_energy)
                .map_err(logio)?;
        }
    }

    let errors = sim.errors()?;
    let stats = sim.stats();
    let seconds = start.elapsed().as_secs_f64();
    let mut summary = String::new();
    let _ = writeln!(summary, "problem = {}", config.problem);
    let _ = writeln!(summary, "scheme = {}", config.scheme);
    let _ = writeln!(summary, "resolution = {}", config.resolution);
    let _ = writeln!(summary, "n_angles = {}", sim.angular.n());
    let _ = writeln!(summary, "nx = {}\nny = {}", g.nx, g.ny);
    let _ = writeln!(summary, "dt = {:?}\nfinal_time = {:?}", config.spec.dt, sim.state.time);
    let _ = writeln!(summary, "steps = {}", stats.steps);
    let _ = writeln!(summary, "mean_indicator = {:?}", stats.mean_indicator);
    let _ = writeln!(summary, "clipped_energy = {:?}", stats.clip.clipped_energy);
    let _ = writeln!(summary, "min_energy = {:?}", stats.min_energy);
    if let Some((l1, linf)) = errors {
        let _ = writeln!(summary, "l1_error = {l1:?}\nlinf_error = {linf:?}");
    }
    let _ = writeln!(summary, "seconds = {seconds:.3}");
    log.write_all(summary.as_bytes()).map_err(logio)?;

    if let Some(dir) = &dir {
        write_snapshot(&sim, dir, &mut snapshots)?;
        if let Some(exact) = sim.oracle()? {
            let path = dir.join("oracle.field");
            FieldFile::energy("oracle", 0, 0, g, sim.state.time, exact)?.save(&path)?;
        }
        let path = dir.join("summary.txt");
        fs::write(&path, summary).map_err(|e| Error::io(&path, e))?;
    }

    Ok(RunSummary {
        stats,
        final_time: sim.state.time,
        errors,
        snapshots,
        seconds,
    })
}
