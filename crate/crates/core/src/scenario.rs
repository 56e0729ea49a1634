//! Scenario initial data and run orchestration.
//!
//! Each preset builds (moments, low-rank factors) on its own domain; `Sim`
//! wraps either the kinetic integrator or the MacCormack reference solver
//! behind one `step()`, and `run` drives it to `t_end` writing CSV
//! diagnostics plus binary snapshots.

use std::fs::File;
use std::io::{BufWriter, Write as _};
use std::path::{Path, PathBuf};

use crate::config::{EpsSpec, Scenario, ScenarioConfig, SolverKind};
use crate::error::{Error, Result};
use crate::fft::DerivativeKind;
use crate::fluid::{vorticity, FluidSolver};
use crate::grid::{total_x, ScalarFieldX, SpatialGrid, VelocityGrid};
use crate::ksl::{full_step, Discretization, StepParams};
use crate::lowrank::{init_from_separable, LowRankState, SeparableTerm};
use crate::moments::{
    build_conv_tables, combine_xs, sigma_u, stress_tensor_p1, Knudsen, MomentState,
};
use crate::moment_solver::ConservedState;
use crate::snapshot::{self, Snapshot};

/// Moment fields shared by the kinetic init and the fluid reference.
fn scenario_moments(cfg: &ScenarioConfig, g: &SpatialGrid) -> MomentState {
    match cfg.scenario {
        Scenario::ShearFlow => {
            let (v0, width, delta) = (cfg.v0, cfg.shear_width, cfg.shear_delta);
            MomentState {
                rho: g.from_fn(|_, _| 1.0),
                u: crate::grid::VectorFieldX {
                    x: g.from_fn(|_, y| {
                        if y <= 0.5 {
                            v0 * ((y - 0.25) / width).tanh()
                        } else {
                            v0 * ((0.75 - y) / width).tanh()
                        }
                    }),
                    y: g.from_fn(|x, _| delta * (std::f64::consts::TAU * x).sin()),
                },
            }
        }
        Scenario::Explosion => {
            let r2 = cfg.radius * cfg.radius;
            MomentState {
                rho: g.from_fn(|x, y| if x * x + y * y <= r2 { 1.0 } else { 0.1 }),
                u: crate::grid::VectorFieldX::zeros(g),
            }
        }
        // The beam carries its structure in g; its Maxwellian parameters are
        // uniform. Custom runs start from uniform equilibrium too.
        Scenario::Beam | Scenario::BeamVaryingEps | Scenario::Custom => {
            MomentState::constant(g, 1.0, (0.0, 0.0))
        }
    }
}

fn equilibrium_terms(gx: &SpatialGrid, gv: &VelocityGrid) -> Vec<SeparableTerm> {
    vec![SeparableTerm {
        fx: gx.from_fn(|_, _| 1.0),
        fv: gv.from_fn(|_, _| 1.0),
    }]
}

pub fn shear_flow_init(
    gx: &SpatialGrid,
    gv: &VelocityGrid,
    rank: usize,
    cfg: &ScenarioConfig,
) -> Result<(MomentState, LowRankState)> {
    let mom = scenario_moments(cfg, gx);
    let state = init_from_separable(&equilibrium_terms(gx, gv), rank, gx, gv)?;
    Ok((mom, state))
}

pub fn explosion_init(
    gx: &SpatialGrid,
    gv: &VelocityGrid,
    rank: usize,
    cfg: &ScenarioConfig,
) -> Result<(MomentState, LowRankState)> {
    let mom = scenario_moments(cfg, gx);
    let state = init_from_separable(&equilibrium_terms(gx, gv), rank, gx, gv)?;
    Ok((mom, state))
}

/// Beam distribution g = 1 + n_b exp(-((v-v_b)^2+(w-w_b)^2)/(2T_b) + (v^2+w^2)/2):
/// exactly rank 2, both factors constant in x.
pub fn beam_init(
    gx: &SpatialGrid,
    gv: &VelocityGrid,
    rank: usize,
    cfg: &ScenarioConfig,
) -> Result<(MomentState, LowRankState)> {
    let (nb, vb, wb, tb) = (cfg.beam_n, cfg.beam_v, cfg.beam_w, cfg.beam_t);
    if rank < 2 {
        return Err(Error::Config(
            "the beam initial value needs rank >= 2".into(),
        ));
    }
    let mom = scenario_moments(cfg, gx);
    let mut terms = equilibrium_terms(gx, gv);
    terms.push(SeparableTerm {
        fx: gx.from_fn(|_, _| 1.0),
        fv: gv.from_fn(|v, w| {
            let q = -((v - vb).powi(2) + (w - wb).powi(2)) / (2.0 * tb)
                + 0.5 * (v * v + w * w);
            nb * q.exp()
        }),
    });
    let state = init_from_separable(&terms, rank, gx, gv)?;
    Ok((mom, state))
}

/// Knudsen profile eps0 + tanh(1-11x) + tanh(1+11x): order one mid-domain,
/// eps0 near |x| = 1. Constant in y.
pub fn epsilon_field(g: &SpatialGrid, eps0: f64) -> ScalarFieldX {
    g.from_fn(|x, _| eps0 + (1.0 - 11.0 * x).tanh() + (1.0 + 11.0 * x).tanh())
}

pub fn build_knudsen(cfg: &ScenarioConfig, g: &SpatialGrid) -> Result<Knudsen> {
    Ok(match cfg.eps {
        EpsSpec::Constant(e) => Knudsen::Constant(e),
        EpsSpec::Reynolds(re) => Knudsen::Constant(cfg.v0 / re),
        EpsSpec::VaryingTanh { eps0 } => Knudsen::Field(epsilon_field(g, eps0)),
    })
}

pub fn kinetic_init(cfg: &ScenarioConfig) -> Result<(MomentState, LowRankState)> {
    let (gx, gv) = cfg.grids()?;
    match cfg.scenario {
        Scenario::ShearFlow => shear_flow_init(&gx, &gv, cfg.rank, cfg),
        Scenario::Explosion => explosion_init(&gx, &gv, cfg.rank, cfg),
        Scenario::Beam | Scenario::BeamVaryingEps => beam_init(&gx, &gv, cfg.rank, cfg),
        Scenario::Custom => Ok((
            scenario_moments(cfg, &gx),
            init_from_separable(&equilibrium_terms(&gx, &gv), cfg.rank, &gx, &gv)?,
        )),
    }
}

enum Backend {
    Kinetic {
        state: LowRankState,
        mom: MomentState,
        eps: Knudsen,
    },
    Fluid {
        solver: FluidSolver,
        cons: ConservedState,
    },
}

pub struct Sim {
    pub cfg: ScenarioConfig,
    pub sgrid: SpatialGrid,
    pub time: f64,
    pub steps_taken: usize,
    backend: Backend,
}

impl Sim {
    pub fn new(cfg: &ScenarioConfig) -> Result<Sim> {
        cfg.validate()?;
        let (gx, _) = cfg.grids()?;
        let backend = match cfg.solver {
            SolverKind::Kinetic => {
                let (mom, state) = kinetic_init(cfg)?;
                let eps = build_knudsen(cfg, &gx)?;
                log::info!(
                    "kinetic {} on {}x{} x {}^2, r={}, eps_min={:.3e}",
                    cfg.scenario.name(),
                    cfg.nx,
                    cfg.ny,
                    cfg.nv,
                    cfg.rank,
                    eps.min()
                );
                Backend::Kinetic { state, mom, eps }
            }
            SolverKind::Fluid => {
                let eps = cfg
                    .constant_eps()
                    .ok_or_else(|| Error::Config("fluid solver needs constant eps".into()))?;
                let mom = scenario_moments(cfg, &gx);
                log::info!(
                    "fluid {} on {}x{}, eps={:.3e}",
                    cfg.scenario.name(),
                    cfg.nx,
                    cfg.ny,
                    eps
                );
                Backend::Fluid {
                    solver: FluidSolver::new(gx, eps),
                    cons: ConservedState::from_moments(&mom),
                }
            }
        };
        Ok(Sim {
            cfg: cfg.clone(),
            sgrid: gx,
            time: 0.0,
            steps_taken: 0,
            backend,
        })
    }

    pub fn step(&mut self, dt: f64) -> Result<()> {
        match &mut self.backend {
            Backend::Kinetic { state, mom, eps } => {
                let p = StepParams {
                    dt,
                    t: self.time,
                    disc: self.cfg.disc,
                    scfd_flux: self.cfg.scfd_flux,
                };
                full_step(state, mom, eps, &p)?;
            }
            Backend::Fluid { solver, cons } => {
                *cons = solver.step(cons, dt, self.time)?;
            }
        }
        self.time += dt;
        self.steps_taken += 1;
        Ok(())
    }

    pub fn mom(&self) -> Result<MomentState> {
        match &self.backend {
            Backend::Kinetic { mom, .. } => Ok(mom.clone()),
            Backend::Fluid { cons, .. } => cons.clone().into_moments_checked(self.time),
        }
    }

    pub fn state(&self) -> Option<&LowRankState> {
        match &self.backend {
            Backend::Kinetic { state, .. } => Some(state),
            Backend::Fluid { .. } => None,
        }
    }

    pub fn eps(&self) -> Option<&Knudsen> {
        match &self.backend {
            Backend::Kinetic { eps, .. } => Some(eps),
            Backend::Fluid { .. } => None,
        }
    }

    pub fn max_dev(&self) -> Option<f64> {
        self.state().map(|s| s.deviation_from_equilibrium())
    }

    /// Integrals of rho and rho*u over the domain.
    pub fn mass_momentum(&self) -> (f64, f64, f64) {
        match &self.backend {
            Backend::Kinetic { mom, .. } => {
                let m = total_x(&self.sgrid, &mom.rho);
                let px = total_x(&self.sgrid, &(&mom.rho * &mom.u.x));
                let py = total_x(&self.sgrid, &(&mom.rho * &mom.u.y));
                (m, px, py)
            }
            Backend::Fluid { cons, .. } => (
                total_x(&self.sgrid, &cons.rho),
                total_x(&self.sgrid, &cons.mx),
                total_x(&self.sgrid, &cons.my),
            ),
        }
    }

    pub fn snapshot(&self) -> Result<Snapshot> {
        Ok(match &self.backend {
            Backend::Kinetic { state, mom, .. } => {
                Snapshot::from_kinetic(self.time, state, mom)
            }
            Backend::Fluid { .. } => Snapshot::from_fluid(self.time, &self.sgrid, &self.mom()?),
        })
    }

    fn deriv_kind(&self) -> DerivativeKind {
        match (self.cfg.solver, self.cfg.disc) {
            (SolverKind::Kinetic, Discretization::Spectral) => DerivativeKind::Spectral,
            _ => DerivativeKind::Central,
        }
    }
}

/// Max-norm gap between the kinetic stress correction and the Navier-Stokes
/// stress, both evaluated from the run's own fields.
pub fn p1_sigma_gap(
    state: &LowRankState,
    mom: &MomentState,
    eps: &Knudsen,
    disc: Discretization,
) -> Result<f64> {
    let w = combine_xs(&state.x, &state.s);
    let tables = build_conv_tables(&state.v, &state.vgrid);
    let p1 = stress_tensor_p1(&w, mom, &tables, eps, &state.sgrid)?;
    let kind = match disc {
        Discretization::Spectral => DerivativeKind::Spectral,
        Discretization::Scfd => DerivativeKind::Central,
    };
    let sig = sigma_u(&mom.u, &state.sgrid, kind);
    let mut worst = 0.0f64;
    for (a, b) in [(&p1.xx, &sig.xx), (&p1.xy, &sig.xy), (&p1.yy, &sig.yy)] {
        for (x, y) in a.iter().zip(b.iter()) {
            worst = worst.max((x - y).abs());
        }
    }
    Ok(worst)
}

#[derive(Clone, Copy, Debug)]
pub struct DiagnosticsRecord {
    pub time: f64,
    pub mass: f64,
    pub momentum: (f64, f64),
    pub max_dev: Option<f64>,
    pub moment_err: Option<f64>,
    pub p1_sigma_err: Option<f64>,
}

impl DiagnosticsRecord {
    pub const CSV_HEADER: &'static str =
        "time,mass,momentum_x,momentum_y,max_dev,moment_err,p1_sigma_err";

    pub fn csv_row(&self) -> String {
        fn opt(v: Option<f64>) -> String {
            v.map(|x| format!("{x:.12e}")).unwrap_or_default()
        }
        format!(
            "{:.12e},{:.12e},{:.12e},{:.12e},{},{},{}",
            self.time,
            self.mass,
            self.momentum.0,
            self.momentum.1,
            opt(self.max_dev),
            opt(self.moment_err),
            opt(self.p1_sigma_err),
        )
    }

    pub fn is_finite(&self) -> bool {
        let opts = [self.max_dev, self.moment_err, self.p1_sigma_err];
        self.time.is_finite()
            && self.mass.is_finite()
            && self.momentum.0.is_finite()
            && self.momentum.1.is_finite()
            && opts.iter().flatten().all(|v| v.is_finite())
    }
}

pub fn collect_diagnostics(sim: &Sim, reference: Option<&Snapshot>) -> Result<DiagnosticsRecord> {
    let (mass, px, py) = sim.mass_momentum();
    let max_dev = sim.max_dev();
    // The reference snapshot is a single time point; the column only fills
    // on the row closest to it.
    let moment_err = match reference {
        Some(r) if (r.time - sim.time).abs() <= 0.5 * sim.cfg.dt => {
            Some(snapshot::compare(&sim.snapshot()?, r)?.max_moment_diff())
        }
        _ => None,
    };
    let p1_sigma_err = if sim.cfg.track_p1 {
        match (&sim.backend, sim.eps()) {
            (Backend::Kinetic { state, mom, .. }, Some(eps)) => {
                Some(p1_sigma_gap(state, mom, eps, sim.cfg.disc)?)
            }
            _ => None,
        }
    } else {
        None
    };
    Ok(DiagnosticsRecord {
        time: sim.time,
        mass,
        momentum: (px, py),
        max_dev,
        moment_err,
        p1_sigma_err,
    })
}

/// Output directory precedence: CLI flag, then `LOWRANK_BGK_OUTDIR`, then the
/// config key, then `out-<scenario>` in the working directory.
pub fn resolve_out_dir(cfg: &ScenarioConfig, cli: Option<&Path>) -> PathBuf {
    if let Some(p) = cli {
        return p.to_path_buf();
    }
    if let Some(env) = std::env::var_os("LOWRANK_BGK_OUTDIR") {
        return PathBuf::from(env);
    }
    cfg.out_dir
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("out-{}", cfg.scenario.name())))
}

pub struct RunArtifacts {
    pub out_dir: PathBuf,
    pub diagnostics: PathBuf,
    pub final_snapshot: PathBuf,
    pub steps: usize,
    pub final_record: DiagnosticsRecord,
}

pub fn run(cfg: &ScenarioConfig, out_dir: &Path) -> Result<RunArtifacts> {
    std::fs::create_dir_all(out_dir)?;
    let reference = match &cfg.ref_snapshot {
        Some(p) => Some(snapshot::load(p)?),
        None => None,
    };
    let mut sim = Sim::new(cfg)?;

    let diag_path = out_dir.join("diagnostics.csv");
    let mut diag = BufWriter::new(File::create(&diag_path)?);
    writeln!(diag, "{}", DiagnosticsRecord::CSV_HEADER)?;
    let mut last = collect_diagnostics(&sim, reference.as_ref())?;
    writeln!(diag, "{}", last.csv_row())?;
    diag.flush()?;

    let n_steps = ((cfg.t_end / cfg.dt) - 1e-9).ceil().max(0.0) as usize;
    let progress_every = (n_steps / 10).max(1);
    for k in 1..=n_steps {
        let dt = cfg.dt.min(cfg.t_end - sim.time).max(0.0);
        if dt == 0.0 {
            break;
        }
        sim.step(dt)?;
        if k % cfg.diag_every == 0 || k == n_steps {
            last = collect_diagnostics(&sim, reference.as_ref())?;
            if !last.is_finite() {
                return Err(Error::NonFinite {
                    context: "diagnostics",
                });
            }
            writeln!(diag, "{}", last.csv_row())?;
            diag.flush()?;
        }
        if cfg.snap_every > 0 && k % cfg.snap_every == 0 && k != n_steps {
            snapshot::save(
                &out_dir.join(format!("snapshot_{k:06}.snap")),
                &sim.snapshot()?,
            )?;
        }
        if k % progress_every == 0 {
            log::info!("step {k}/{n_steps}, t = {:.6}", sim.time);
        }
    }

    let final_snapshot = out_dir.join("final.snap");
    snapshot::save(&final_snapshot, &sim.snapshot()?)?;
    write_field_dumps(&sim, out_dir)?;
    Ok(RunArtifacts {
        out_dir: out_dir.to_path_buf(),
        diagnostics: diag_path,
        final_snapshot,
        steps: sim.steps_taken,
        final_record: last,
    })
}

fn write_field_dumps(sim: &Sim, out_dir: &Path) -> Result<()> {
    let mom = sim.mom()?;
    let g = &sim.sgrid;
    let meta = |name: &str| {
        format!(
            "field {name}\nbounds {} {} {} {}\ntime {:.12e}",
            g.ax, g.bx, g.ay, g.by, sim.time
        )
    };
    snapshot::save_field(&out_dir.join("rho.bin"), &mom.rho, &meta("rho"))?;
    snapshot::save_field(&out_dir.join("u1.bin"), &mom.u.x, &meta("u1"))?;
    snapshot::save_field(&out_dir.join("u2.bin"), &mom.u.y, &meta("u2"))?;
    let om = vorticity(&mom.u, g, sim.deriv_kind());
    snapshot::save_field(&out_dir.join("omega.bin"), &om, &meta("omega"))?;
    Ok(())
}
