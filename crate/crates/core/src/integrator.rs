//! Second-order Runge-Kutta midpoint stepping.
//!
//! ```text
//! F_{k+1/2} = F_k + (Δt/2) R(F_k)
//! F_{k+1}   = F_k + Δt R(F_{k+1/2})
//! ```
//!
//! The slope limiter and then the positivity fix run on every stage result,
//! so each right-hand side sees a limited state.

use crate::dg::{slope_limit, Discretization, FieldState, LimiterMode};
use crate::error::{Error, Result};
use crate::positivity::{clip_state, filter_state, limiter_indicator, ClipStats, FilterSpec};

/// Default CFL coefficient: `Δt <= C min(δx, δy)` with unit wave speed.
pub const DEFAULT_CFL: f64 = 1.0 / 3.0;

#[derive(Clone, Debug)]
pub enum Positivity {
    None,
    Clip {
        /// Column sums of the consistent mass matrix.
        mass_sums: Vec<f64>,
        /// Unit-energy isotropic state.
        isotropic: Vec<f64>,
    },
    Filter(FilterSpec),
}

#[derive(Clone, Debug)]
pub struct Hooks {
    pub limiter: LimiterMode,
    pub positivity: Positivity,
}

impl Hooks {
    pub fn none() -> Self {
        Hooks {
            limiter: LimiterMode::None,
            positivity: Positivity::None,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct HookReport {
    /// Fraction of negative coefficients seen by the positivity fix.
    pub indicator: f64,
    pub clip: ClipStats,
}

/// Runs the hooks on `state`; `dt` is the length of the sub-step that
/// produced it and scales the filter.
pub fn apply_hooks(state: &mut FieldState, disc: &Discretization, hooks: &Hooks, dt: f64) -> HookReport {
    slope_limit(state, hooks.limiter, &disc.bc);
    let indicator = limiter_indicator(state);
    let clip = match &hooks.positivity {
        Positivity::None => ClipStats::default(),
        Positivity::Clip { mass_sums, isotropic } => clip_state(state, mass_sums, isotropic),
        Positivity::Filter(spec) => {
            filter_state(state, &spec.factors(dt));
            ClipStats::default()
        }
    };
    HookReport { indicator, clip }
}

/// Reusable buffers for [`step_rk2`].
#[derive(Default)]
pub struct Workspace {
    rhs: Vec<f64>,
    half: Option<FieldState>,
}

fn tag_step(e: Error, step: usize) -> Error {
    match e {
        Error::NonFinite { i, j, angle, time, .. } => Error::NonFinite {
            i,
            j,
            angle,
            step,
            time,
        },
        other => other,
    }
}

/// Advances `state` by `dt`. `step` only labels errors.
pub fn step_rk2(
    state: &mut FieldState,
    disc: &Discretization,
    hooks: &Hooks,
    dt: f64,
    step: usize,
    ws: &mut Workspace,
) -> Result<HookReport> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidArgument(format!("time step {dt} must be positive")));
    }
    ws.rhs.resize(state.data.len(), 0.0);

    disc.compute_rhs_into(state, &mut ws.rhs).map_err(|e| tag_step(e, step))?;
    let half = ws.half.get_or_insert_with(|| state.clone());
    half.clone_from(state);
    for (h, r) in half.data.iter_mut().zip(&ws.rhs) {
        *h += 0.5 * dt * r;
    }
    half.time = state.time + 0.5 * dt;
    apply_hooks(half, disc, hooks, 0.5 * dt);

    disc.compute_rhs_into(half, &mut ws.rhs).map_err(|e| tag_step(e, step))?;
    for (f, r) in state.data.iter_mut().zip(&ws.rhs) {
        *f += dt * r;
    }
    state.time += dt;
    let report = apply_hooks(state, disc, hooks, dt);
    if let Some((i, j, angle)) = state.find_non_finite() {
        return Err(Error::NonFinite {
            i,
            j,
            angle,
            step,
            time: state.time,
        });
    }
    Ok(report)
}

/// Step lengths reaching exactly `t_end`: `ceil(t_end/dt)` steps, the last
/// one shortened if needed.
pub fn plan_steps(t_end: f64, dt: f64) -> Result<Vec<f64>> {
    if !(dt > 0.0 && dt.is_finite() && t_end >= 0.0 && t_end.is_finite()) {
        return Err(Error::InvalidArgument(format!("invalid time span t_end = {t_end}, dt = {dt}")));
    }
    let n = ((t_end / dt) * (1.0 - 1e-12)).ceil() as usize;
    let mut steps = vec![dt; n];
    if let Some(last) = steps.last_mut() {
        *last = t_end - (n - 1) as f64 * dt;
    }
    Ok(steps)
}

/// Warning text when `dt` exceeds the CFL bound `c min(δx, δy)`.
pub fn cfl_warning(dt: f64, dx: f64, dy: f64, c: f64) -> Option<String> {
    let bound = c * dx.min(dy);
    (dt > bound * (1.0 + 1e-12)).then(|| {
        format!(
            "time step {dt} exceeds the CFL bound {bound:.6} (C = {c:.4}, min spacing {:.6}); the run may be unstable",
            dx.min(dy)
        )
    })
}
