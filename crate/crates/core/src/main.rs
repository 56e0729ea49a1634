use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use lowrank_bgk::error::{Error, Result};
use lowrank_bgk::scenario::{resolve_out_dir, run};
use lowrank_bgk::snapshot;
use lowrank_bgk::ScenarioConfig;

#[derive(Parser)]
#[command(name = "lowrank-bgk", version, about = "Low-rank BGK kinetic solver")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a preset or a key=value config file to its end time
    Run {
        /// Preset name (shear-flow, explosion, beam, beam-varying-eps,
        /// custom) or a config file path
        config: String,
        /// Extra key=value setting applied on top (repeatable)
        #[arg(long = "override", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        /// Output directory (takes precedence over LOWRANK_BGK_OUTDIR and
        /// the out_dir config key)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print max-norm moment differences between two snapshots
    Compare { a: PathBuf, b: PathBuf },
    /// Extract a slice of g from a snapshot as CSV
    Slice {
        snapshot: PathBuf,
        /// Spatial indices IX,IY: emit g(IX,IY,.,.) over the velocity grid
        #[arg(long = "at-x", value_name = "IX,IY", conflicts_with = "at_v")]
        at_x: Option<String>,
        /// Velocity indices IV,IW: emit g(.,.,IV,IW) over the spatial grid
        #[arg(long = "at-v", value_name = "IV,IW")]
        at_v: Option<String>,
        /// Output file (stdout when omitted)
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            // Reserve exit code 2 for numerical failures; usage problems are
            // configuration errors.
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::Snapshot(_) | Error::Io(_) => 1,
        Error::VelocityDomainOverflow { .. }
        | Error::SStepSingular { .. }
        | Error::DensityPositivity { .. }
        | Error::NonFinite { .. } => 2,
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::Run {
            config,
            overrides,
            out,
        } => {
            let mut cfg = ScenarioConfig::from_arg(&config)?;
            for ov in &overrides {
                cfg.apply_override(ov)?;
            }
            let out_dir = resolve_out_dir(&cfg, out.as_deref());
            let art = run(&cfg, &out_dir)?;
            println!(
                "{}: {} steps to t = {:.6}, outputs in {}",
                cfg.scenario.name(),
                art.steps,
                art.final_record.time,
                art.out_dir.display()
            );
            println!(
                "final mass {:.12e}, momentum ({:.6e}, {:.6e})",
                art.final_record.mass, art.final_record.momentum.0, art.final_record.momentum.1
            );
            if let Some(dev) = art.final_record.max_dev {
                println!("final max|g-1| = {dev:.6e}");
            }
            Ok(())
        }
        Cmd::Compare { a, b } => {
            let sa = snapshot::load(&a)?;
            let sb = snapshot::load(&b)?;
            let rep = snapshot::compare(&sa, &sb)?;
            println!("compared {} shared nodes (t = {:.6} vs {:.6})", rep.nodes, sa.time, sb.time);
            println!("max |d rho|    = {:.6e}", rep.d_rho);
            println!("max |d rho*u1| = {:.6e}", rep.d_mx);
            println!("max |d rho*u2| = {:.6e}", rep.d_my);
            Ok(())
        }
        Cmd::Slice {
            snapshot: path,
            at_x,
            at_v,
            out,
        } => {
            let snap = snapshot::load(&path)?;
            let state = snap.state().ok_or_else(|| {
                Error::Snapshot("snapshot has no kinetic factors to slice".into())
            })?;
            let mut csv = String::new();
            match (at_x, at_v) {
                (Some(spec), None) => {
                    let (i, j) = parse_pair(&spec, "--at-x")?;
                    let g = &state.sgrid;
                    check_index(i, g.nx, "IX")?;
                    check_index(j, g.ny, "IY")?;
                    let slice = state.g_slice_at_x(i, j);
                    let gv = &state.vgrid;
                    csv.push_str("v,w,g\n");
                    for k in 0..gv.nv {
                        for l in 0..gv.nv {
                            csv.push_str(&format!(
                                "{:.12e},{:.12e},{:.12e}\n",
                                gv.v(k),
                                gv.v(l),
                                slice[[k, l]]
                            ));
                        }
                    }
                }
                (None, Some(spec)) => {
                    let (k, l) = parse_pair(&spec, "--at-v")?;
                    let gv = &state.vgrid;
                    check_index(k, gv.nv, "IV")?;
                    check_index(l, gv.nv, "IW")?;
                    let slice = state.g_slice_at_v(k, l);
                    let g = &state.sgrid;
                    csv.push_str("x,y,g\n");
                    for i in 0..g.nx {
                        for j in 0..g.ny {
                            csv.push_str(&format!(
                                "{:.12e},{:.12e},{:.12e}\n",
                                g.x(i),
                                g.y(j),
                                slice[[i, j]]
                            ));
                        }
                    }
                }
                _ => {
                    return Err(Error::Config(
                        "slice needs exactly one of --at-x IX,IY or --at-v IV,IW".into(),
                    ))
                }
            }
            match out {
                Some(p) => std::fs::write(&p, csv)?,
                None => std::io::stdout().write_all(csv.as_bytes())?,
            }
            Ok(())
        }
    }
}

fn parse_pair(spec: &str, flag: &str) -> Result<(usize, usize)> {
    let bad = || Error::Config(format!("{flag} expects two indices like 3,4, got '{spec}'"));
    let (a, b) = spec.split_once(',').ok_or_else(bad)?;
    Ok((
        a.trim().parse().map_err(|_| bad())?,
        b.trim().parse().map_err(|_| bad())?,
    ))
}

fn check_index(i: usize, n: usize, name: &str) -> Result<()> {
    if i >= n {
        return Err(Error::Config(format!(
            "{name} = {i} is out of range for grid size {n}"
        )));
    }
    Ok(())
}
