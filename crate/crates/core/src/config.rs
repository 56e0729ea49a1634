//! Run configuration: named presets, flat key=value config files, and
//! command-line overrides.
//!
//! A config file must name a `scenario`; every other key overrides that
//! preset's default. The same `key=value` syntax is accepted on the command
//! line, applied after the file. Keys:
//!
//! ```text
//! scenario    shear-flow | explosion | beam | beam-varying-eps | custom
//! solver      kinetic | fluid
//! disc        spectral | scfd
//! flux        vanleer | laxwendroff | upwind       (scfd transport limiter)
//! rank        low-rank rank r
//! nx ny nv    grid sizes (even, >= 4)
//! ax bx ay by av bv    domain bounds
//! eps         constant Knudsen number
//! re          Reynolds number; resolves to eps = v0/re
//! eps0        floor of the tanh epsilon field (selects the varying profile)
//! dt t_end    step size and final time
//! v0 shear_width shear_delta      shear-flow profile parameters
//! radius      explosion overpressure radius
//! beam_n beam_v beam_w beam_t     beam parameters
//! diag_every snap_every           output cadences in steps (snap 0 = final only)
//! track_p1    true|false, record |P1 - sigma(u)| in the diagnostics
//! ref_snapshot    path, enables the moment-error diagnostic column
//! out_dir     output directory
//! ```

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::grid::{make_grids, SpatialGrid, VelocityGrid};
use crate::ksl::{Discretization, ScfdFlux};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scenario {
    ShearFlow,
    Explosion,
    Beam,
    BeamVaryingEps,
    Custom,
}

impl Scenario {
    pub fn name(&self) -> &'static str {
        match self {
            Scenario::ShearFlow => "shear-flow",
            Scenario::Explosion => "explosion",
            Scenario::Beam => "beam",
            Scenario::BeamVaryingEps => "beam-varying-eps",
            Scenario::Custom => "custom",
        }
    }

    pub fn parse(s: &str) -> Result<Scenario> {
        Ok(match s {
            "shear-flow" => Scenario::ShearFlow,
            "explosion" => Scenario::Explosion,
            "beam" => Scenario::Beam,
            "beam-varying-eps" => Scenario::BeamVaryingEps,
            "custom" => Scenario::Custom,
            _ => {
                return Err(Error::Config(format!(
                    "unknown scenario '{s}' (expected shear-flow, explosion, beam, \
                     beam-varying-eps, or custom)"
                )))
            }
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolverKind {
    Kinetic,
    Fluid,
}

/// How the Knudsen number is specified. `Reynolds` resolves against the
/// current `v0` at build time, so overriding either key keeps them coupled.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EpsSpec {
    Constant(f64),
    Reynolds(f64),
    VaryingTanh { eps0: f64 },
}

#[derive(Clone, Debug)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    pub solver: SolverKind,
    pub disc: Discretization,
    pub scfd_flux: ScfdFlux,
    pub rank: usize,
    pub nx: usize,
    pub ny: usize,
    pub nv: usize,
    pub xbounds: (f64, f64, f64, f64),
    pub vbounds: (f64, f64),
    pub eps: EpsSpec,
    pub dt: f64,
    pub t_end: f64,
    pub v0: f64,
    pub shear_width: f64,
    pub shear_delta: f64,
    pub radius: f64,
    pub beam_n: f64,
    pub beam_v: f64,
    pub beam_w: f64,
    pub beam_t: f64,
    pub diag_every: usize,
    pub snap_every: usize,
    pub track_p1: bool,
    pub ref_snapshot: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
}

impl ScenarioConfig {
    pub fn preset(scenario: Scenario) -> ScenarioConfig {
        let mut c = ScenarioConfig {
            scenario,
            solver: SolverKind::Kinetic,
            disc: Discretization::Spectral,
            scfd_flux: ScfdFlux::LaxWendroffVanLeer,
            rank: 2,
            nx: 32,
            ny: 32,
            nv: 32,
            xbounds: (0.0, 1.0, 0.0, 1.0),
            vbounds: (-6.0, 6.0),
            eps: EpsSpec::Constant(1.0),
            dt: 1e-3,
            t_end: 0.1,
            v0: 0.1,
            shear_width: 1.0 / 30.0,
            shear_delta: 5e-3,
            radius: 1e-2,
            beam_n: 1e-3,
            beam_v: 4.0,
            beam_w: 2.0,
            beam_t: 0.1,
            diag_every: 20,
            snap_every: 0,
            track_p1: false,
            ref_snapshot: None,
            out_dir: None,
        };
        match scenario {
            Scenario::ShearFlow => {
                c.rank = 3;
                c.nx = 64;
                c.ny = 64;
                c.eps = EpsSpec::Reynolds(1000.0);
                c.dt = 2e-4;
                c.t_end = 2.0;
            }
            Scenario::Explosion => {
                c.disc = Discretization::Scfd;
                c.rank = 6;
                c.nx = 128;
                c.ny = 128;
                c.xbounds = (-1.5, 1.5, -1.5, 1.5);
                c.eps = EpsSpec::Constant(1e-5);
                c.dt = 2e-4;
                c.t_end = 0.8;
            }
            Scenario::Beam => {
                c.disc = Discretization::Scfd;
                c.rank = 6;
                c.nx = 16;
                c.ny = 16;
                c.nv = 128;
                c.vbounds = (-8.0, 8.0);
                c.eps = EpsSpec::Constant(0.1);
                c.dt = 1e-3;
                c.t_end = 2.0;
            }
            Scenario::BeamVaryingEps => {
                c.disc = Discretization::Scfd;
                c.scfd_flux = ScfdFlux::Upwind;
                c.rank = 10;
                c.nx = 64;
                c.ny = 32;
                c.nv = 128;
                c.xbounds = (-1.0, 1.0, 0.0, 1.0);
                c.vbounds = (-8.0, 8.0);
                c.eps = EpsSpec::VaryingTanh { eps0: 1e-4 };
                c.dt = 5e-5;
                c.t_end = 0.5;
            }
            Scenario::Custom => {}
        }
        c
    }

    /// Apply one `key=value` setting. Used for both config-file lines and
    /// `--override` arguments.
    pub fn apply(&mut self, key: &str, value: &str) -> Result<()> {
        fn num(key: &str, value: &str) -> Result<f64> {
            value
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("key '{key}': '{value}' is not a number")))
        }
        fn int(key: &str, value: &str) -> Result<usize> {
            value
                .parse::<usize>()
                .map_err(|_| Error::Config(format!("key '{key}': '{value}' is not an integer")))
        }
        match key {
            "scenario" => {
                return Err(Error::Config(
                    "the scenario is fixed by the preset and cannot be overridden".into(),
                ))
            }
            "solver" => {
                self.solver = match value {
                    "kinetic" => SolverKind::Kinetic,
                    "fluid" => SolverKind::Fluid,
                    _ => {
                        return Err(Error::Config(format!(
                            "solver must be 'kinetic' or 'fluid', got '{value}'"
                        )))
                    }
                }
            }
            "disc" => {
                self.disc = match value {
                    "spectral" => Discretization::Spectral,
                    "scfd" => Discretization::Scfd,
                    _ => {
                        return Err(Error::Config(format!(
                            "disc must be 'spectral' or 'scfd', got '{value}'"
                        )))
                    }
                }
            }
            "flux" => {
                self.scfd_flux = match value {
                    "vanleer" => ScfdFlux::LaxWendroffVanLeer,
                    "laxwendroff" => ScfdFlux::LaxWendroff,
                    "upwind" => ScfdFlux::Upwind,
                    _ => {
                        return Err(Error::Config(format!(
                            "flux must be 'vanleer', 'laxwendroff', or 'upwind', got '{value}'"
                        )))
                    }
                }
            }
            "rank" => self.rank = int(key, value)?,
            "nx" => self.nx = int(key, value)?,
            "ny" => self.ny = int(key, value)?,
            "nv" => self.nv = int(key, value)?,
            "ax" => self.xbounds.0 = num(key, value)?,
            "bx" => self.xbounds.1 = num(key, value)?,
            "ay" => self.xbounds.2 = num(key, value)?,
            "by" => self.xbounds.3 = num(key, value)?,
            "av" => self.vbounds.0 = num(key, value)?,
            "bv" => self.vbounds.1 = num(key, value)?,
            "eps" => self.eps = EpsSpec::Constant(num(key, value)?),
            "re" => self.eps = EpsSpec::Reynolds(num(key, value)?),
            "eps0" => self.eps = EpsSpec::VaryingTanh { eps0: num(key, value)? },
            "dt" => self.dt = num(key, value)?,
            "t_end" => self.t_end = num(key, value)?,
            "v0" => self.v0 = num(key, value)?,
            "shear_width" => self.shear_width = num(key, value)?,
            "shear_delta" => self.shear_delta = num(key, value)?,
            "radius" => self.radius = num(key, value)?,
            "beam_n" => self.beam_n = num(key, value)?,
            "beam_v" => self.beam_v = num(key, value)?,
            "beam_w" => self.beam_w = num(key, value)?,
            "beam_t" => self.beam_t = num(key, value)?,
            "diag_every" => self.diag_every = int(key, value)?,
            "snap_every" => self.snap_every = int(key, value)?,
            "track_p1" => {
                self.track_p1 = match value {
                    "true" => true,
                    "false" => false,
                    _ => {
                        return Err(Error::Config(format!(
                            "track_p1 must be 'true' or 'false', got '{value}'"
                        )))
                    }
                }
            }
            "ref_snapshot" => self.ref_snapshot = Some(PathBuf::from(value)),
            "out_dir" => self.out_dir = Some(PathBuf::from(value)),
            _ => return Err(Error::Config(format!("unknown config key '{key}'"))),
        }
        Ok(())
    }

    pub fn apply_override(&mut self, spec: &str) -> Result<()> {
        let (k, v) = split_kv(spec)?;
        self.apply(k, v)
    }

    /// Parse a config file: one `key = value` per line, `#` comments, a
    /// mandatory `scenario` key selecting the base preset.
    pub fn from_file(path: &Path) -> Result<ScenarioConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut pairs = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = split_kv(line).map_err(|_| {
                Error::Config(format!(
                    "{}:{}: expected 'key = value', got '{raw}'",
                    path.display(),
                    lineno + 1
                ))
            })?;
            pairs.push((k.to_string(), v.to_string()));
        }
        let mut scenario = None;
        for (k, v) in &pairs {
            if k == "scenario" {
                if scenario.is_some() {
                    return Err(Error::Config("duplicate 'scenario' key".into()));
                }
                scenario = Some(Scenario::parse(v)?);
            }
        }
        let scenario = scenario.ok_or_else(|| {
            Error::Config(format!("{}: missing 'scenario' key", path.display()))
        })?;
        let mut cfg = ScenarioConfig::preset(scenario);
        for (k, v) in &pairs {
            if k != "scenario" {
                cfg.apply(k, v)?;
            }
        }
        Ok(cfg)
    }

    /// Preset name or config-file path, as taken by `run`.
    pub fn from_arg(arg: &str) -> Result<ScenarioConfig> {
        let path = Path::new(arg);
        if path.is_file() {
            ScenarioConfig::from_file(path)
        } else {
            Ok(ScenarioConfig::preset(Scenario::parse(arg)?))
        }
    }

    /// The constant Knudsen number this config resolves to, if it is constant.
    pub fn constant_eps(&self) -> Option<f64> {
        match self.eps {
            EpsSpec::Constant(e) => Some(e),
            EpsSpec::Reynolds(re) => Some(self.v0 / re),
            EpsSpec::VaryingTanh { .. } => None,
        }
    }

    pub fn grids(&self) -> Result<(SpatialGrid, VelocityGrid)> {
        make_grids(self.nx, self.ny, self.xbounds, self.nv, self.vbounds)
    }

    pub fn validate(&self) -> Result<()> {
        self.grids()?;
        if self.rank == 0 {
            return Err(Error::Config("rank must be at least 1".into()));
        }
        if self.rank > self.nx * self.ny || self.rank > self.nv * self.nv {
            return Err(Error::Config(format!(
                "rank {} exceeds a factor dimension",
                self.rank
            )));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Config("dt must be positive".into()));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::Config("t_end must be nonnegative".into()));
        }
        match self.eps {
            EpsSpec::Constant(e) if !(e > 0.0) => {
                return Err(Error::Config("eps must be positive".into()))
            }
            EpsSpec::Reynolds(re) if !(re > 0.0 && self.v0 > 0.0) => {
                return Err(Error::Config("re and v0 must be positive".into()))
            }
            EpsSpec::VaryingTanh { eps0 } if !(eps0 > 0.0) => {
                return Err(Error::Config("eps0 must be positive".into()))
            }
            _ => {}
        }
        if self.solver == SolverKind::Fluid && self.constant_eps().is_none() {
            return Err(Error::Config(
                "the fluid reference solver needs a constant eps".into(),
            ));
        }
        Ok(())
    }
}

fn split_kv(spec: &str) -> Result<(&str, &str)> {
    let (k, v) = spec
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("expected key=value, got '{spec}'")))?;
    let (k, v) = (k.trim(), v.trim());
    if k.is_empty() || v.is_empty() {
        return Err(Error::Config(format!("expected key=value, got '{spec}'")));
    }
    Ok((k, v))
}
