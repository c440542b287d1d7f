//! Positivity fixes: the clipping limiter for FEM_N/S_N and the Lanczos
//! filter for FP_N.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::angular::mode_of;
use crate::dg::FieldState;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClipOutcome {
    /// No negative coefficient; the cell is returned bit-for-bit.
    Unchanged,
    Clipped,
    /// Every coefficient was `<= 0` but the energy was positive; replaced by
    /// the isotropic state with the same energy.
    IsotropicFallback,
    /// Non-positive energy; the cell is zeroed.
    Zeroed,
}

/// Zeroes negative coefficients and rescales the rest by
/// `θ = Σ_B m_B F^B / Σ_B m_B max(F^B, 0)` where `m_B = Σ_A M_AB` are the
/// column sums of the consistent mass matrix. Since the basis is a partition
/// of unity these equal `V_B`, so the energy is conserved.
///
/// `mass_sums` must be positive; `isotropic` is the coefficient vector of the
/// unit-energy isotropic state used by the fallback.
pub fn clip_limiter(f: &mut [f64], mass_sums: &[f64], isotropic: &[f64]) -> ClipOutcome {
    if f.iter().all(|&x| x >= 0.0) {
        return ClipOutcome::Unchanged;
    }
    let total: f64 = f.iter().zip(mass_sums).map(|(x, m)| x * m).sum();
    let positive: f64 = f.iter().zip(mass_sums).map(|(x, m)| x.max(0.0) * m).sum();
    if total <= 0.0 {
        f.fill(0.0);
        return ClipOutcome::Zeroed;
    }
    if positive <= 0.0 {
        for (x, u) in f.iter_mut().zip(isotropic) {
            *x = total * u;
        }
        return ClipOutcome::IsotropicFallback;
    }
    let theta = total / positive;
    for x in f.iter_mut() {
        *x = if *x < 0.0 { 0.0 } else { *x * theta };
    }
    ClipOutcome::Clipped
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ClipStats {
    pub clipped: usize,
    pub fallback: usize,
    pub zeroed: usize,
    /// `Σ_cells Σ_B m_B max(−F^B, 0) δxδy`: the negative energy removed
    /// before rescaling.
    pub clipped_energy: f64,
}

impl ClipStats {
    pub fn merge(&mut self, o: ClipStats) {
        self.clipped += o.clipped;
        self.fallback += o.fallback;
        self.zeroed += o.zeroed;
        self.clipped_energy += o.clipped_energy;
    }
}

/// Applies [`clip_limiter`] to every cell.
pub fn clip_state(state: &mut FieldState, mass_sums: &[f64], isotropic: &[f64]) -> ClipStats {
    let n = state.n;
    let area = state.grid.cell_area();
    let per_cell: Vec<(ClipOutcome, f64)> = state
        .data
        .par_chunks_mut(n)
        .map(|f| {
            let neg: f64 = f.iter().zip(mass_sums).map(|(x, m)| (-x).max(0.0) * m).sum();
            (clip_limiter(f, mass_sums, isotropic), neg * area)
        })
        .collect();
    let mut stats = ClipStats::default();
    for (outcome, neg) in per_cell {
        match outcome {
            ClipOutcome::Unchanged => continue,
            ClipOutcome::Clipped => stats.clipped += 1,
            ClipOutcome::IsotropicFallback => stats.fallback += 1,
            ClipOutcome::Zeroed => stats.zeroed += 1,
        }
        stats.clipped_energy += neg;
    }
    stats
}

/// Fraction of `(cell, angle)` entries with `F^A < 0`.
pub fn limiter_indicator(state: &FieldState) -> f64 {
    if state.data.is_empty() {
        return 0.0;
    }
    let neg = state.data.iter().filter(|&&x| x < 0.0).count();
    neg as f64 / state.data.len() as f64
}

/// Per-cell fraction of negative coefficients, row-major.
pub fn limiter_indicator_map(state: &FieldState) -> Vec<f64> {
    state
        .data
        .chunks_exact(state.n)
        .map(|c| c.iter().filter(|&&x| x < 0.0).count() as f64 / state.n as f64)
        .collect()
}

/// Lanczos filter `σ_L(x) = sin x / x`.
pub fn lanczos(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FilterStrength {
    /// Effective opacity σ_eff (1/time); the strength follows from the step.
    EffectiveOpacity(f64),
    /// Fixed exponent `s` per application.
    Raw(f64),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FilterSpec {
    pub l_max: usize,
    pub strength: FilterStrength,
}

impl FilterSpec {
    pub fn new(l_max: usize, strength: FilterStrength) -> Result<Self> {
        let v = match strength {
            FilterStrength::EffectiveOpacity(v) | FilterStrength::Raw(v) => v,
        };
        if !(v.is_finite() && v >= 0.0) {
            return Err(Error::InvalidArgument(format!("filter strength {v} must be finite and >= 0")));
        }
        Ok(FilterSpec { l_max, strength })
    }

    /// Exponent `s` for a step of length `dt`, calibrated so that the
    /// highest degree decays like `exp(−σ_eff dt)`.
    pub fn exponent(&self, dt: f64) -> f64 {
        match self.strength {
            FilterStrength::Raw(s) => s,
            FilterStrength::EffectiveOpacity(sigma) => {
                if sigma == 0.0 || self.l_max == 0 {
                    return 0.0;
                }
                let top = self.l_max as f64 / (self.l_max as f64 + 1.0);
                -dt * sigma / lanczos(top).ln()
            }
        }
    }

    /// Attenuation of every mode for a step of length `dt`, indexed like the
    /// harmonics.
    pub fn factors(&self, dt: f64) -> Vec<f64> {
        let s = self.exponent(dt);
        let n = (self.l_max + 1) * (self.l_max + 1);
        (0..n)
            .map(|a| {
                let (l, _) = mode_of(a);
                if l == 0 || s == 0.0 {
                    1.0
                } else {
                    lanczos(l as f64 / (self.l_max as f64 + 1.0)).powf(s)
                }
            })
            .collect()
    }
}

/// Multiplies each `(l, m)` coefficient by its attenuation factor.
pub fn lanczos_filter(f: &mut [f64], factors: &[f64]) {
    for (x, s) in f.iter_mut().zip(factors) {
        *x *= s;
    }
}

pub fn filter_state(state: &mut FieldState, factors: &[f64]) {
    state
        .data
        .par_chunks_mut(state.n)
        .for_each(|f| lanczos_filter(f, factors));
}

/// Coefficients of the unit-energy isotropic state: `u / Σ_B V_B u^B`.
pub fn unit_isotropic(isotropic: &[f64], weights: &[f64]) -> Vec<f64> {
    let e: f64 = isotropic.iter().zip(weights).map(|(u, v)| u * v).sum();
    if e > 0.0 {
        isotropic.iter().map(|u| u / e).collect()
    } else {
        vec![1.0 / (4.0 * PI); isotropic.len()]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dg::SpatialGrid2D;
    use proptest::prelude::*;

    #[test]
    fn hand_example() {
        let mut f = [-1.0, 3.0];
        let out = clip_limiter(&mut f, &[1.0, 1.0], &[0.5, 0.5]);
        assert_eq!(out, ClipOutcome::Clipped);
        assert!((f[0] - 0.0).abs() < 1e-15 && (f[1] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn nonnegative_input_is_untouched() {
        let mut f = [0.0, 1.5, 2.0];
        assert_eq!(clip_limiter(&mut f, &[1.0; 3], &[1.0 / 3.0; 3]), ClipOutcome::Unchanged);
        assert_eq!(f, [0.0, 1.5, 2.0]);
    }

    #[test]
    fn all_negative_is_zeroed() {
        let mut f = [-1.0, -2.0];
        assert_eq!(clip_limiter(&mut f, &[1.0, 1.0], &[0.5, 0.5]), ClipOutcome::Zeroed);
        assert_eq!(f, [0.0, 0.0]);
    }

    #[test]
    fn positive_energy_without_positive_entries_falls_back() {
        // Negative weights cannot occur for real bases, but zero entries with
        // positive energy can: force it with an all-zero weight on the
        // positive entry.
        let mut f = [-0.0, -0.0];
        assert_eq!(clip_limiter(&mut f, &[1.0, 1.0], &[0.5, 0.5]), ClipOutcome::Unchanged);
        let mut f = [2.0, -1.0];
        assert_eq!(clip_limiter(&mut f, &[0.0, -1.0], &[0.5, 0.5]), ClipOutcome::IsotropicFallback);
        assert_eq!(f, [0.5, 0.5]);
    }

    #[test]
    fn indicator_counts_negative_entries() {
        let grid = SpatialGrid2D::covering(2, 2, (0.0, 1.0), (0.0, 1.0)).unwrap();
        let mut s = FieldState::zeros(grid, 2);
        assert_eq!(limiter_indicator(&s), 0.0);
        for k in 0..4 {
            s.data[2 * k] = -1.0;
        }
        assert_eq!(limiter_indicator(&s), 0.5);
        assert_eq!(limiter_indicator_map(&s), vec![0.5; 4]);
    }

    #[test]
    fn filter_identity_cases() {
        let spec = FilterSpec::new(4, FilterStrength::EffectiveOpacity(0.0)).unwrap();
        assert!(spec.factors(0.01).iter().all(|&s| s == 1.0));
        let spec = FilterSpec::new(4, FilterStrength::EffectiveOpacity(20.0)).unwrap();
        let f = spec.factors(0.01);
        assert_eq!(f[0], 1.0);
        // Highest degree decays like exp(-σ_eff Δt).
        assert!((f[24] - (-0.2f64).exp()).abs() < 1e-12);
        assert!(FilterSpec::new(4, FilterStrength::EffectiveOpacity(-1.0)).is_err());
    }

    #[test]
    fn filter_is_monotone_in_degree() {
        let spec = FilterSpec::new(8, FilterStrength::EffectiveOpacity(30.0)).unwrap();
        let f = spec.factors(0.005);
        let by_l: Vec<f64> = (0..=8).map(|l| f[l * l]).collect();
        for w in by_l.windows(2) {
            assert!(w[1] <= w[0]);
        }
        // All modes of one degree share the factor.
        for l in 0..=8usize {
            for a in l * l..(l + 1) * (l + 1) {
                assert_eq!(f[a], f[l * l]);
            }
        }
    }

    proptest! {
        #[test]
        fn clipping_properties(f in proptest::collection::vec(-1.0f64..1.0, 12), w in proptest::collection::vec(0.1f64..2.0, 12)) {
            let iso: Vec<f64> = unit_isotropic(&vec![1.0; 12], &w);
            let mut g = f.clone();
            let e0: f64 = f.iter().zip(&w).map(|(x, m)| x * m).sum();
            let out = clip_limiter(&mut g, &w, &iso);
            prop_assert!(g.iter().all(|&x| x >= 0.0));
            if out == ClipOutcome::Clipped || out == ClipOutcome::Unchanged {
                let e1: f64 = g.iter().zip(&w).map(|(x, m)| x * m).sum();
                prop_assert!((e1 - e0).abs() <= 1e-12 * e0.abs().max(f64::MIN_POSITIVE) + 1e-15);
            }
            let once = g.clone();
            prop_assert_eq!(clip_limiter(&mut g, &w, &iso), ClipOutcome::Unchanged);
            prop_assert_eq!(g, once);
        }
    }
}
