//! Run configuration: a small `key = value` format with `[mesh]`, `[time]`,
//! `[physics]`, `[output]` and `[solver]` sections. Keys before the first
//! section header are global (`experiment`). `#` starts a comment.
//!
//! ```text
//! experiment = test2
//!
//! [mesh]
//! family = cartesian
//! n = 32
//!
//! [time]
//! steps = 20
//!
//! [output]
//! dir = out/test2
//! snapshots = 5, 20
//! ```

use crate::error::{Result, VemError};
use crate::mesh::{MeshFamily, Rect};
use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParameters {
    pub nu: f64,
    pub lambda: f64,
    pub gamma: f64,
    pub eps: f64,
}

impl Default for PhysicalParameters {
    fn default() -> Self {
        Self { nu: 1.0, lambda: 1.0, gamma: 1.0, eps: 1.0 }
    }
}

impl PhysicalParameters {
    pub fn test1() -> Self {
        Self::default()
    }

    pub fn test2() -> Self {
        Self { nu: 1.0, lambda: 0.1, gamma: 0.1, eps: 0.02 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Custom,
    Test1,
    Test2,
}

impl FromStr for Experiment {
    type Err = VemError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "custom" | "run" => Ok(Experiment::Custom),
            "test1" => Ok(Experiment::Test1),
            "test2" => Ok(Experiment::Test2),
            o => Err(VemError::config("experiment", format!("unknown experiment `{o}`"))),
        }
    }
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Custom => "custom",
            Experiment::Test1 => "test1",
            Experiment::Test2 => "test2",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonSettings {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_iter: usize,
    pub backtracking: bool,
}

impl Default for NewtonSettings {
    fn default() -> Self {
        Self { rel_tol: 1e-6, abs_tol: 1e-12, max_iter: 25, backtracking: false }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub k: usize,
    pub l: usize,
    pub params: PhysicalParameters,
    pub domain: Rect,
    pub family: MeshFamily,
    pub n: usize,
    pub mesh_file: Option<PathBuf>,
    /// Mesh resolutions of a rate study.
    pub levels: Vec<usize>,
    /// Mesh families of a rate study.
    pub families: Vec<MeshFamily>,
    pub t0: f64,
    pub t_end: f64,
    pub tau: Option<f64>,
    pub steps: Option<usize>,
    pub c_tau: f64,
    pub newton: NewtonSettings,
    pub output_dir: PathBuf,
    pub snapshots: Vec<usize>,
    /// Non-fatal notes produced during validation.
    pub warnings: Vec<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            experiment: Experiment::Custom,
            k: 1,
            l: 2,
            params: PhysicalParameters::default(),
            domain: Rect::unit(),
            family: MeshFamily::Triangular,
            n: 8,
            mesh_file: None,
            levels: vec![4, 8, 16],
            families: vec![MeshFamily::Triangular],
            t0: 0.0,
            t_end: 1.0,
            tau: None,
            steps: None,
            c_tau: 0.1,
            newton: NewtonSettings::default(),
            output_dir: PathBuf::from("output"),
            snapshots: Vec::new(),
            warnings: Vec::new(),
        }
    }
}

fn num<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim().parse().map_err(|_| VemError::config(key, format!("cannot parse `{}`", v.trim())))
}

fn list<T: FromStr>(key: &str, v: &str) -> Result<Vec<T>> {
    v.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty()).map(|s| num(key, s)).collect()
}

fn boolean(key: &str, v: &str) -> Result<bool> {
    match v.trim() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        o => Err(VemError::config(key, format!("expected a boolean, got `{o}`"))),
    }
}

impl RunConfig {
    pub fn test1() -> Self {
        Self {
            experiment: Experiment::Test1,
            families: vec![MeshFamily::Triangular, MeshFamily::Quadrilateral, MeshFamily::Voronoi],
            levels: vec![4, 8, 16, 32],
            output_dir: PathBuf::from("output/test1"),
            ..Self::default()
        }
    }

    pub fn test2() -> Self {
        Self {
            experiment: Experiment::Test2,
            params: PhysicalParameters::test2(),
            domain: Rect::new(-0.4, 0.4, -0.4, 0.4),
            family: MeshFamily::Cartesian,
            n: 64,
            t_end: 2e-4,
            tau: Some(1e-6),
            output_dir: PathBuf::from("output/test2"),
            snapshots: vec![5, 50, 100, 150, 175, 200],
            ..Self::default()
        }
    }

    pub fn preset(e: Experiment) -> Self {
        match e {
            Experiment::Custom => Self::default(),
            Experiment::Test1 => Self::test1(),
            Experiment::Test2 => Self::test2(),
        }
    }

    /// Parses a configuration text. An `experiment` key selects the preset
    /// that the remaining keys override.
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        let mut section = String::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            if line.starts_with('[') {
                if !line.ends_with(']') {
                    return Err(VemError::config(format!("line {}", i + 1), "unterminated section header"));
                }
                section = line[1..line.len() - 1].trim().to_string();
                if !["mesh", "time", "physics", "output", "solver"].contains(&section.as_str()) {
                    return Err(VemError::config(format!("[{section}]"), "unknown section"));
                }
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(VemError::config(format!("line {}", i + 1), "expected `key = value`"));
            };
            let key = if section.is_empty() { k.trim().to_string() } else { format!("{section}.{}", k.trim()) };
            entries.push((key, v.trim().to_string()));
        }
        let experiment = match entries.iter().find(|(k, _)| k == "experiment") {
            Some((_, v)) => v.parse()?,
            None => Experiment::Custom,
        };
        let mut cfg = Self::preset(experiment);
        for (k, v) in &entries {
            cfg.set(k, v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())
            .map_err(|e| VemError::config(path.as_ref().display().to_string(), e.to_string()))?;
        Self::parse(&text)
    }

    /// Applies one `section.key = value` override.
    pub fn set(&mut self, key: &str, v: &str) -> Result<()> {
        match key {
            "experiment" => self.experiment = v.parse()?,
            "mesh.family" => self.family = v.parse()?,
            "mesh.n" => self.n = num(key, v)?,
            "mesh.h" => {
                let h: f64 = num(key, v)?;
                if !(h > 0.0 && h <= 1.0) {
                    return Err(VemError::config(key, "h must lie in (0, 1]"));
                }
                self.n = (1.0 / h).round() as usize;
            }
            "mesh.file" => self.mesh_file = Some(PathBuf::from(v)),
            "mesh.domain" => {
                let d: Vec<f64> = list(key, v)?;
                if d.len() != 4 {
                    return Err(VemError::config(key, "expected `xmin xmax ymin ymax`"));
                }
                self.domain = Rect::new(d[0], d[1], d[2], d[3]);
            }
            "mesh.levels" => self.levels = list(key, v)?,
            "mesh.families" => self.families = list(key, v)?,
            "time.t0" => self.t0 = num(key, v)?,
            "time.T" | "time.t_end" => self.t_end = num(key, v)?,
            "time.tau" => self.tau = Some(num(key, v)?),
            "time.steps" | "time.N" => self.steps = Some(num(key, v)?),
            "time.c_tau" => self.c_tau = num(key, v)?,
            "physics.k" => self.k = num(key, v)?,
            "physics.l" => self.l = num(key, v)?,
            "physics.nu" => self.params.nu = num(key, v)?,
            "physics.lambda" => self.params.lambda = num(key, v)?,
            "physics.gamma" => self.params.gamma = num(key, v)?,
            "physics.eps" | "physics.epsilon" => self.params.eps = num(key, v)?,
            "output.dir" => self.output_dir = PathBuf::from(v),
            "output.snapshots" => self.snapshots = list(key, v)?,
            "solver.rel_tol" => self.newton.rel_tol = num(key, v)?,
            "solver.abs_tol" => self.newton.abs_tol = num(key, v)?,
            "solver.max_iter" => self.newton.max_iter = num(key, v)?,
            "solver.backtracking" => self.newton.backtracking = boolean(key, v)?,
            _ => return Err(VemError::config(key, "unknown key")),
        }
        Ok(())
    }

    pub fn validate(&mut self) -> Result<()> {
        self.warnings.clear();
        if self.k < 1 {
            return Err(VemError::config("physics.k", "k >= 1 required"));
        }
        if self.l < 2 {
            return Err(VemError::config("physics.l", "l >= 2 required"));
        }
        if self.k + 1 < self.l {
            self.warnings.push(format!(
                "k = {} < l - 1 = {}: discrete mass conservation is not guaranteed",
                self.k,
                self.l - 1
            ));
        }
        for (key, v) in [
            ("physics.nu", self.params.nu),
            ("physics.lambda", self.params.lambda),
            ("physics.gamma", self.params.gamma),
            ("physics.eps", self.params.eps),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(VemError::config(key, "must be positive and finite"));
            }
        }
        if !self.domain.is_valid() {
            return Err(VemError::config("mesh.domain", "empty rectangle"));
        }
        if self.n == 0 {
            return Err(VemError::config("mesh.n", "must be positive"));
        }
        if self.levels.contains(&0) || self.levels.is_empty() {
            return Err(VemError::config("mesh.levels", "levels must be positive"));
        }
        if !(self.t_end > self.t0) {
            return Err(VemError::config("time.T", "final time must exceed t0"));
        }
        if let Some(tau) = self.tau {
            if !(tau > 0.0) {
                return Err(VemError::config("time.tau", "must be positive"));
            }
        }
        if self.steps == Some(0) {
            return Err(VemError::config("time.steps", "must be positive"));
        }
        if !(self.c_tau > 0.0) {
            return Err(VemError::config("time.c_tau", "must be positive"));
        }
        // with both tau and N given, N tau must equal T
        if let (Some(tau), Some(n)) = (self.tau, self.steps) {
            let span = self.t_end - self.t0;
            if (tau * n as f64 - span).abs() > 1e-12 * span.max(1.0) {
                if self.experiment == Experiment::Test2 {
                    // an explicit step count shortens the scaled run
                    self.t_end = self.t0 + tau * n as f64;
                } else {
                    return Err(VemError::config(
                        "time.steps",
                        format!("N * tau = {} differs from T - t0 = {span}", tau * n as f64),
                    ));
                }
            }
        } else if let Some(tau) = self.tau {
            let span = self.t_end - self.t0;
            let n = (span / tau).round();
            if n < 1.0 || (n * tau - span).abs() > 1e-12 * span.max(1.0) {
                return Err(VemError::config("time.tau", format!("T - t0 = {span} is not a multiple of tau = {tau}")));
            }
        }
        if !(self.newton.rel_tol > 0.0) || self.newton.max_iter == 0 {
            return Err(VemError::config("solver", "tolerances and max_iter must be positive"));
        }
        Ok(())
    }

    /// Number of steps and step size for mesh resolution `n` (`h = 1/n`).
    pub fn time_grid_for(&self, n: usize) -> (usize, f64) {
        let span = self.t_end - self.t0;
        match (self.tau, self.steps) {
            (_, Some(steps)) => (steps, span / steps as f64),
            (Some(tau), None) => ((span / tau).round() as usize, tau),
            (None, None) => {
                let tau = self.c_tau / n as f64;
                let steps = ((span / tau).round() as usize).max(1);
                (steps, span / steps as f64)
            }
        }
    }

    /// Effective configuration in the input grammar.
    pub fn echo(&self) -> String {
        let mut s = String::new();
        let j = |v: &[usize]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ");
        writeln!(s, "experiment = {}", self.experiment.name()).unwrap();
        writeln!(s, "\n[mesh]").unwrap();
        writeln!(s, "family = {}", self.family).unwrap();
        writeln!(s, "n = {}", self.n).unwrap();
        let d = self.domain;
        writeln!(s, "domain = {:?} {:?} {:?} {:?}", d.xmin, d.xmax, d.ymin, d.ymax).unwrap();
        if let Some(f) = &self.mesh_file {
            writeln!(s, "file = {}", f.display()).unwrap();
        }
        writeln!(s, "levels = {}", j(&self.levels)).unwrap();
        let fams: Vec<String> = self.families.iter().map(|f| f.to_string()).collect();
        writeln!(s, "families = {}", fams.join(", ")).unwrap();
        writeln!(s, "\n[time]").unwrap();
        writeln!(s, "t0 = {:?}", self.t0).unwrap();
        writeln!(s, "T = {:?}", self.t_end).unwrap();
        if let Some(t) = self.tau {
            writeln!(s, "tau = {t:?}").unwrap();
        }
        if let Some(n) = self.steps {
            writeln!(s, "steps = {n}").unwrap();
        }
        writeln!(s, "c_tau = {:?}", self.c_tau).unwrap();
        writeln!(s, "\n[physics]").unwrap();
        writeln!(s, "k = {}\nl = {}", self.k, self.l).unwrap();
        let p = self.params;
        writeln!(s, "nu = {:?}\nlambda = {:?}\ngamma = {:?}\neps = {:?}", p.nu, p.lambda, p.gamma, p.eps).unwrap();
        writeln!(s, "\n[output]").unwrap();
        writeln!(s, "dir = {}", self.output_dir.display()).unwrap();
        writeln!(s, "snapshots = {}", j(&self.snapshots)).unwrap();
        writeln!(s, "\n[solver]").unwrap();
        let nw = &self.newton;
        writeln!(
            s,
            "rel_tol = {:?}\nabs_tol = {:?}\nmax_iter = {}\nbacktracking = {}",
            nw.rel_tol, nw.abs_tol, nw.max_iter, nw.backtracking
        )
        .unwrap();
        s
    }

    pub fn snapshot_set(&self) -> BTreeSet<usize> {
        self.snapshots.iter().copied().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let c = RunConfig::parse("").unwrap();
        assert_eq!((c.k, c.l), (1, 2));
        assert_eq!(c.params, PhysicalParameters { nu: 1.0, lambda: 1.0, gamma: 1.0, eps: 1.0 });
    }

    #[test]
    fn l_one_is_rejected() {
        let e = RunConfig::parse("[physics]\nl = 1\n").unwrap_err();
        assert!(e.to_string().contains("l >= 2"), "{e}");
    }

    #[test]
    fn test2_preset() {
        let c = RunConfig::parse("experiment = test2").unwrap();
        assert_eq!(c.params, PhysicalParameters { nu: 1.0, lambda: 0.1, gamma: 0.1, eps: 0.02 });
        assert_eq!((c.family, c.n), (MeshFamily::Cartesian, 64));
        assert_eq!(c.tau, Some(1e-6));
        assert_eq!(c.t_end, 2e-4);
        assert_eq!(c.time_grid_for(64).0, 200);
    }

    #[test]
    fn unknown_key_is_named() {
        let e = RunConfig::parse("[mesh]\nfoo = 3\n").unwrap_err();
        assert!(e.to_string().contains("mesh.foo"));
    }

    #[test]
    fn inconsistent_time_grid() {
        assert!(RunConfig::parse("[time]\nT = 1\ntau = 0.3\n").is_err());
        assert!(RunConfig::parse("experiment = test1\n[time]\nT = 1\ntau = 0.1\nsteps = 7\n").is_err());
    }

    #[test]
    fn low_velocity_degree_warns() {
        let c = RunConfig::parse("[physics]\nk = 1\nl = 3\n").unwrap();
        assert_eq!(c.warnings.len(), 1);
    }

    #[test]
    fn echo_round_trips() {
        let c = RunConfig::parse("experiment = test2\n[time]\nsteps = 20\n[output]\nsnapshots = 5, 20").unwrap();
        let again = RunConfig::parse(&c.echo()).unwrap();
        assert_eq!(again, c);
    }
}
