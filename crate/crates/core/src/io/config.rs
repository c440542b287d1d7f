//! Run configuration: flat `key = value` lines, `#` starts a comment.
//! Command-line overrides use the same keys and win over the file.

use std::path::PathBuf;

use crate::angular::{BasisKind, DEFAULT_DISSIPATION};
use crate::dg::{BoundaryChoice, LimiterMode};
use crate::error::{Error, Result};
use crate::problems::{Beams, LatticeVariant, ProblemKind, ProblemSpec};

/// Key/value pairs in file order; later assignments replace earlier ones
/// only through [`ConfigMap::set`], duplicates inside one file are errors.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConfigMap {
    entries: Vec<(String, String)>,
}

impl ConfigMap {
    pub fn parse(text: &str) -> Result<Self> {
        let mut map = ConfigMap::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", n + 1)))?;
            let (k, v) = (k.trim(), v.trim());
            if k.is_empty() || k.contains(char::is_whitespace) {
                return Err(Error::Config(format!("line {}: malformed key `{k}`", n + 1)));
            }
            if map.get(k).is_some() {
                return Err(Error::Config(format!("line {}: duplicate key `{k}`", n + 1)));
            }
            map.entries.push((k.to_string(), v.to_string()));
        }
        Ok(map)
    }

    /// Parses a `key=value` override.
    pub fn apply_override(&mut self, assignment: &str) -> Result<()> {
        let (k, v) = assignment
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("override `{assignment}` is not key=value")))?;
        self.set(k.trim(), v.trim());
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str) {
        match self.entries.iter_mut().find(|(k, _)| k == key) {
            Some(e) => e.1 = value.to_string(),
            None => self.entries.push((key.to_string(), value.to_string())),
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(k, _)| k.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PositivityChoice {
    /// Clipping for FEM_N, the filter for FP_N, nothing for S_N.
    Auto,
    None,
    Clip,
    Filter,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub problem: ProblemKind,
    pub scheme: BasisKind,
    /// Refinement level `k` or `l_max`.
    pub resolution: usize,
    pub spec: ProblemSpec,
    pub positivity: PositivityChoice,
    /// Overrides the `σ_eff`-derived filter strength when set.
    pub filter_strength: Option<f64>,
    pub dissipation: f64,
    pub output_dir: Option<PathBuf>,
    /// Simulated time between snapshots; zero writes only the first and
    /// last state.
    pub snapshot_every: f64,
    pub write_coefficients: bool,
    pub threads: Option<usize>,
}

const MAX_LEVEL: usize = 6;
const MAX_LMAX: usize = 40;
const MAX_CELLS: usize = 20_000;

const KNOWN: &[&str] = &[
    "problem",
    "scheme",
    "k",
    "lmax",
    "resolution",
    "scale",
    "nx",
    "ny",
    "dt",
    "t_end",
    "limiter",
    "boundary",
    "positivity",
    "sigma_eff",
    "filter_strength",
    "dissipation",
    "output_dir",
    "snapshot_every",
    "write_coefficients",
    "threads",
    "omega",
    "floor",
    "beam_width",
    "beams",
    "lattice_variant",
    "pulse_width",
    "pulse_kappa_s",
];

fn value<T: std::str::FromStr>(map: &ConfigMap, key: &str) -> Result<Option<T>> {
    map.get(key)
        .map(|v| {
            v.parse::<T>()
                .map_err(|_| Error::Config(format!("invalid value `{v}` for `{key}`")))
        })
        .transpose()
}

fn positive(map: &ConfigMap, key: &str) -> Result<Option<f64>> {
    let v: Option<f64> = value(map, key)?;
    match v {
        Some(x) if !(x > 0.0 && x.is_finite()) => Err(Error::Config(format!("`{key}` must be positive, got {x}"))),
        _ => Ok(v),
    }
}

fn flag(map: &ConfigMap, key: &str) -> Result<Option<bool>> {
    map.get(key)
        .map(|v| match v.to_ascii_lowercase().as_str() {
            "true" | "yes" | "1" | "on" => Ok(true),
            "false" | "no" | "0" | "off" => Ok(false),
            _ => Err(Error::Config(format!("invalid boolean `{v}` for `{key}`"))),
        })
        .transpose()
}

fn lift<T>(r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::InvalidArgument(m) => Error::Config(m),
        other => other,
    })
}

impl RunConfig {
    pub fn from_text(text: &str) -> Result<Self> {
        Self::from_map(&ConfigMap::parse(text)?)
    }

    pub fn from_map(map: &ConfigMap) -> Result<Self> {
        if let Some(k) = map.keys().find(|k| !KNOWN.contains(k)) {
            return Err(Error::Config(format!("unknown key `{k}`")));
        }
        let problem: ProblemKind = lift(
            map.get("problem")
                .ok_or_else(|| Error::Config("missing `problem`".into()))?
                .parse(),
        )?;
        let scheme: BasisKind = match map.get("scheme") {
            Some(s) => lift(s.parse())?,
            None => BasisKind::Femn,
        };

        let given: Vec<(&str, usize)> = ["k", "lmax", "resolution"]
            .into_iter()
            .filter_map(|key| value::<usize>(map, key).transpose().map(|v| v.map(|v| (key, v))))
            .collect::<Result<_>>()?;
        if given.len() > 1 {
            return Err(Error::Config("give only one of `k`, `lmax`, `resolution`".into()));
        }
        match (given.first(), scheme) {
            (Some(("lmax", _)), BasisKind::Femn | BasisKind::Sn) => {
                return Err(Error::Config(format!("`lmax` does not apply to {scheme}; use `k`")))
            }
            (Some(("k", _)), BasisKind::Fpn) => {
                return Err(Error::Config("`k` does not apply to fpn; use `lmax`".into()))
            }
            _ => {}
        }
        let resolution = given.first().map(|g| g.1).unwrap_or(match scheme {
            BasisKind::Fpn => 3,
            _ => 1,
        });

        let limit = if scheme == BasisKind::Fpn { MAX_LMAX } else { MAX_LEVEL };
        if resolution > limit {
            return Err(Error::Config(format!("resolution {resolution} exceeds {limit} for {scheme}")));
        }

        let mut spec = ProblemSpec::defaults(problem);
        if let Some(s) = positive(map, "scale")? {
            spec = lift(spec.scaled(s))?;
        }
        let nx: Option<usize> = value(map, "nx")?;
        let ny: Option<usize> = value(map, "ny")?;
        if nx.is_some() || ny.is_some() {
            let nx = nx.unwrap_or(spec.nx);
            let ny = ny.unwrap_or(nx);
            spec.nx = nx;
            spec.ny = ny;
        }
        if let Some(dt) = positive(map, "dt")? {
            spec.dt = dt;
        }
        if let Some(t) = value::<f64>(map, "t_end")? {
            if !(t >= 0.0 && t.is_finite()) {
                return Err(Error::Config(format!("`t_end` must be non-negative, got {t}")));
            }
            spec.t_end = t;
        }
        if let Some(l) = map.get("limiter") {
            spec.limiter = lift(l.parse::<LimiterMode>())?;
        }
        if let Some(b) = map.get("boundary") {
            spec.boundary = lift(b.parse::<BoundaryChoice>())?;
        }
        if let Some(s) = positive(map, "sigma_eff")? {
            spec.sigma_eff = s;
        }
        let p = &mut spec.params;
        if let Some(v) = positive(map, "omega")? {
            p.omega = v;
        }
        if let Some(v) = value::<f64>(map, "floor")? {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("`floor` must be non-negative, got {v}")));
            }
            p.floor = v;
        }
        if let Some(v) = positive(map, "beam_width")? {
            p.beam_width = v;
        }
        if let Some(v) = map.get("beams") {
            p.beams = lift(v.parse::<Beams>())?;
        }
        if let Some(v) = map.get("lattice_variant") {
            p.lattice_variant = lift(v.parse::<LatticeVariant>())?;
        }
        if let Some(v) = positive(map, "pulse_width")? {
            p.pulse_width = v;
        }
        if let Some(v) = value::<f64>(map, "pulse_kappa_s")? {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("`pulse_kappa_s` must be non-negative, got {v}")));
            }
            p.pulse_kappa_s = v;
        }
        if spec.nx.max(spec.ny) > MAX_CELLS {
            return Err(Error::Config(format!("at most {MAX_CELLS} cells per axis")));
        }
        lift(spec.grid())?;

        let positivity = match map.get("positivity").map(|s| s.to_ascii_lowercase()) {
            None => PositivityChoice::Auto,
            Some(s) => match s.as_str() {
                "auto" => PositivityChoice::Auto,
                "none" => PositivityChoice::None,
                "clip" | "clipping" => PositivityChoice::Clip,
                "filter" => PositivityChoice::Filter,
                other => return Err(Error::Config(format!("unknown positivity fix `{other}`"))),
            },
        };
        match (positivity, scheme) {
            (PositivityChoice::Clip, BasisKind::Fpn) => {
                return Err(Error::Config("clipping applies to femn and sn only".into()))
            }
            (PositivityChoice::Filter, BasisKind::Femn | BasisKind::Sn) => {
                return Err(Error::Config("the Lanczos filter applies to fpn only".into()))
            }
            _ => {}
        }
        let filter_strength = positive(map, "filter_strength")?;
        if filter_strength.is_some() && scheme != BasisKind::Fpn {
            return Err(Error::Config("`filter_strength` applies to fpn only".into()));
        }
        let dissipation = value::<f64>(map, "dissipation")?.unwrap_or(DEFAULT_DISSIPATION);
        if !(0.0..=1.0).contains(&dissipation) {
            return Err(Error::Config(format!("`dissipation` must lie in [0, 1], got {dissipation}")));
        }
        let snapshot_every = value::<f64>(map, "snapshot_every")?.unwrap_or(0.0);
        if !(snapshot_every >= 0.0 && snapshot_every.is_finite()) {
            return Err(Error::Config(format!("`snapshot_every` must be non-negative, got {snapshot_every}")));
        }
        let threads: Option<usize> = value(map, "threads")?;
        if threads == Some(0) {
            return Err(Error::Config("`threads` must be at least 1".into()));
        }

        Ok(RunConfig {
            problem,
            scheme,
            resolution,
            spec,
            positivity,
            filter_strength,
            dissipation,
            output_dir: map.get("output_dir").filter(|s| !s.is_empty()).map(PathBuf::from),
            snapshot_every,
            write_coefficients: flag(map, "write_coefficients")?.unwrap_or(false),
            threads,
        })
    }

    /// Positivity fix after resolving `auto`.
    pub fn effective_positivity(&self) -> PositivityChoice {
        match (self.positivity, self.scheme) {
            (PositivityChoice::Auto, BasisKind::Femn) => PositivityChoice::Clip,
            (PositivityChoice::Auto, BasisKind::Fpn) => PositivityChoice::Filter,
            (PositivityChoice::Auto, BasisKind::Sn) => PositivityChoice::None,
            (p, _) => p,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn defaults_and_comments() {
        let c = RunConfig::from_text("# line source\nproblem = line_source  # trailing\nscheme=femn\nk = 2\n").unwrap();
        assert_eq!(c.problem, ProblemKind::LineSource);
        assert_eq!(c.resolution, 2);
        assert_eq!(c.spec, ProblemSpec::defaults(ProblemKind::LineSource));
        assert_eq!(c.effective_positivity(), PositivityChoice::Clip);
        assert_eq!(c.dissipation, DEFAULT_DISSIPATION);
    }

    #[test]
    fn overrides_win() {
        let mut m = ConfigMap::parse("problem = cylinder\nscale = 0.5\n").unwrap();
        m.apply_override("nx=40").unwrap();
        m.apply_override("scheme = sn").unwrap();
        let c = RunConfig::from_map(&m).unwrap();
        assert_eq!((c.spec.nx, c.spec.ny), (40, 40));
        assert_eq!(c.scheme, BasisKind::Sn);
        assert!((c.spec.dt - 0.015).abs() < 1e-15);
        assert!(m.apply_override("novalue").is_err());
    }

    #[test]
    fn scheme_compatibility() {
        let err = RunConfig::from_text("problem = cylinder\nscheme = fpn\nlmax = 3\npositivity = clip\n").unwrap_err();
        assert!(matches!(err, Error::Config(_)), "{err}");
        assert!(RunConfig::from_text("problem = cylinder\nscheme = femn\npositivity = filter\n").is_err());
        assert!(RunConfig::from_text("problem = cylinder\nscheme = fpn\nk = 1\n").is_err());
        assert!(RunConfig::from_text("problem = cylinder\nscheme = sn\nlmax = 1\n").is_err());
        let c = RunConfig::from_text("problem = cylinder\nscheme = fpn\nlmax = 5\n").unwrap();
        assert_eq!(c.effective_positivity(), PositivityChoice::Filter);
    }

    #[test]
    fn rejects_bad_input() {
        for text in [
            "scheme = femn\n",
            "problem = moon\n",
            "problem = cylinder\ncolour = red\n",
            "problem = cylinder\nproblem = lattice\n",
            "problem = cylinder\ndt = -1\n",
            "problem = cylinder\nnx = 41\n",
            "problem = cylinder\nlimiter = superbee\n",
            "problem = cylinder\nboundary = mirror\n",
            "problem = cylinder\nthreads = 0\n",
            "problem cylinder\n",
            "problem = cylinder\nwrite_coefficients = maybe\n",
            "problem = line_source\nscale = 4.4e37\n",
        ] {
            assert!(matches!(RunConfig::from_text(text), Err(Error::Config(_))), "{text:?}");
        }
    }

    #[test]
    fn problem_parameters() {
        let c = RunConfig::from_text(
            "problem = searchlight\nbeams = left\nbeam_width = 0.2\nlattice_variant = text\npulse_kappa_s = 5\n",
        )
        .unwrap();
        assert_eq!(c.spec.params.beams, Beams::Left);
        assert_eq!(c.spec.params.beam_width, 0.2);
        assert_eq!(c.spec.params.lattice_variant, LatticeVariant::Text);
    }

    proptest! {
        #[test]
        fn arbitrary_text_never_panics(s in "\\PC{0,200}") {
            let _ = RunConfig::from_text(&s);
        }

        #[test]
        fn arbitrary_assignments_never_panic(k in "[a-z_]{1,16}", v in "\\PC{0,20}") {
            let _ = RunConfig::from_text(&format!("problem = lattice\n{k} = {v}\n"));
        }
    }
}
