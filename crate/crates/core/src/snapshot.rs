//! Binary snapshots of a run.
//!
//! Layout (all integers u32 little-endian, all floats f64 little-endian):
//!
//! ```text
//! bytes 0..8    magic "LRBGKSNP"
//! u32           format version (1)
//! u32 x 4       r, nx, ny, nv        (r = 0 for moment-only snapshots)
//! f64 x 7       ax, bx, ay, by, av, bv, time
//! f64 fields    rho, u1, u2          (each nx*ny, row-major, y fastest)
//! f64 fields    X_1..X_r             (each nx*ny)
//! f64 matrix    S                    (r*r, row-major)
//! f64 fields    V_1..V_r             (each nv*nv)
//! ```
//!
//! Moment-only snapshots (the fluid reference solver) simply end after u2.
//! Scalar field dumps written by the `slice` command use the same float
//! encoding: a bare f64 array in `.bin` with a one-line `.txt` sidecar
//! describing shape, bounds and time.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use nalgebra::DMatrix;
use ndarray::Array2;

use crate::error::{Error, Result};
use crate::grid::{make_grids, ScalarFieldV, ScalarFieldX, SpatialGrid, VectorFieldX, VelocityGrid};
use crate::lowrank::LowRankState;
use crate::moments::MomentState;

const MAGIC: &[u8; 8] = b"LRBGKSNP";
const VERSION: u32 = 1;

#[derive(Clone, Debug)]
pub struct Snapshot {
    pub time: f64,
    pub sgrid: SpatialGrid,
    pub mom: MomentState,
    /// Present for kinetic runs: the low-rank factors and their grid.
    pub kinetic: Option<KineticFactors>,
}

#[derive(Clone, Debug)]
pub struct KineticFactors {
    pub vgrid: VelocityGrid,
    pub x: Vec<ScalarFieldX>,
    pub s: DMatrix<f64>,
    pub v: Vec<ScalarFieldV>,
}

impl Snapshot {
    pub fn from_kinetic(time: f64, state: &LowRankState, mom: &MomentState) -> Self {
        Snapshot {
            time,
            sgrid: state.sgrid,
            mom: mom.clone(),
            kinetic: Some(KineticFactors {
                vgrid: state.vgrid,
                x: state.x.clone(),
                s: state.s.clone(),
                v: state.v.clone(),
            }),
        }
    }

    pub fn from_fluid(time: f64, g: &SpatialGrid, mom: &MomentState) -> Self {
        Snapshot {
            time,
            sgrid: *g,
            mom: mom.clone(),
            kinetic: None,
        }
    }

    /// Rebuild a low-rank state (for slicing); moment-only snapshots have none.
    pub fn state(&self) -> Option<LowRankState> {
        self.kinetic.as_ref().map(|k| LowRankState {
            sgrid: self.sgrid,
            vgrid: k.vgrid,
            r: k.x.len(),
            x: k.x.clone(),
            s: k.s.clone(),
            v: k.v.clone(),
        })
    }
}

fn write_u32(w: &mut impl Write, v: u32) -> Result<()> {
    w.write_all(&v.to_le_bytes())?;
    Ok(())
}

fn write_f64(w: &mut impl Write, v: f64) -> Result<()> {
    w.write_all(&v.to_le_bytes())?;
    Ok(())
}

fn write_field(w: &mut impl Write, f: &Array2<f64>) -> Result<()> {
    for v in f.iter() {
        write_f64(w, *v)?;
    }
    Ok(())
}

fn read_u32(r: &mut impl Read) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_f64(r: &mut impl Read) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

fn read_field(r: &mut impl Read, shape: (usize, usize)) -> Result<Array2<f64>> {
    let mut data = Vec::with_capacity(shape.0 * shape.1);
    for _ in 0..shape.0 * shape.1 {
        data.push(read_f64(r)?);
    }
    Array2::from_shape_vec(shape, data).map_err(|e| Error::Snapshot(e.to_string()))
}

pub fn save(path: &Path, snap: &Snapshot) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    write_u32(&mut w, VERSION)?;
    let g = &snap.sgrid;
    let (r, nv, vb) = match &snap.kinetic {
        Some(k) => (k.x.len() as u32, k.vgrid.nv as u32, (k.vgrid.av, k.vgrid.bv)),
        None => (0, 0, (0.0, 0.0)),
    };
    write_u32(&mut w, r)?;
    write_u32(&mut w, g.nx as u32)?;
    write_u32(&mut w, g.ny as u32)?;
    write_u32(&mut w, nv)?;
    for v in [g.ax, g.bx, g.ay, g.by, vb.0, vb.1, snap.time] {
        write_f64(&mut w, v)?;
    }
    write_field(&mut w, &snap.mom.rho)?;
    write_field(&mut w, &snap.mom.u.x)?;
    write_field(&mut w, &snap.mom.u.y)?;
    if let Some(k) = &snap.kinetic {
        for f in &k.x {
            write_field(&mut w, f)?;
        }
        for i in 0..k.x.len() {
            for j in 0..k.x.len() {
                write_f64(&mut w, k.s[(i, j)])?;
            }
        }
        for f in &k.v {
            write_field(&mut w, f)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn load(path: &Path) -> Result<Snapshot> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Snapshot(format!(
            "{}: not a snapshot file (bad magic)",
            path.display()
        )));
    }
    let version = read_u32(&mut r)?;
    if version != VERSION {
        return Err(Error::Snapshot(format!(
            "unsupported snapshot version {version}"
        )));
    }
    let rank = read_u32(&mut r)? as usize;
    let nx = read_u32(&mut r)? as usize;
    let ny = read_u32(&mut r)? as usize;
    let nv = read_u32(&mut r)? as usize;
    let mut b = [0.0; 7];
    for v in b.iter_mut() {
        *v = read_f64(&mut r)?;
    }
    let [ax, bx, ay, by, av, bv, time] = b;
    if rank > 0 {
        // Validates both grids with the shared constructor.
        make_grids(nx, ny, (ax, bx, ay, by), nv, (av, bv))
            .map_err(|e| Error::Snapshot(e.to_string()))?;
    }
    let sgrid = SpatialGrid {
        nx,
        ny,
        ax,
        bx,
        ay,
        by,
    };
    if nx < 4 || ny < 4 || !(bx > ax) || !(by > ay) {
        return Err(Error::Snapshot("invalid spatial grid in snapshot".into()));
    }
    let rho = read_field(&mut r, (nx, ny))?;
    let ux = read_field(&mut r, (nx, ny))?;
    let uy = read_field(&mut r, (nx, ny))?;
    let mom = MomentState {
        rho,
        u: VectorFieldX { x: ux, y: uy },
    };
    let kinetic = if rank > 0 {
        let vgrid = VelocityGrid { nv, av, bv };
        let mut x = Vec::with_capacity(rank);
        for _ in 0..rank {
            x.push(read_field(&mut r, (nx, ny))?);
        }
        let mut s = DMatrix::zeros(rank, rank);
        for i in 0..rank {
            for j in 0..rank {
                s[(i, j)] = read_f64(&mut r)?;
            }
        }
        let mut v = Vec::with_capacity(rank);
        for _ in 0..rank {
            v.push(read_field(&mut r, (nv, nv))?);
        }
        Some(KineticFactors { vgrid, x, s, v })
    } else {
        None
    };
    Ok(Snapshot {
        time,
        sgrid,
        mom,
        kinetic,
    })
}

/// A bare scalar field with a human-readable sidecar, for plotting slices.
pub fn save_field(path: &Path, field: &Array2<f64>, description: &str) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_field(&mut w, field)?;
    w.flush()?;
    let sidecar = path.with_extension("txt");
    let (n0, n1) = field.dim();
    std::fs::write(
        &sidecar,
        format!("shape {n0} {n1}\nlayout row-major f64-le\n{description}\n"),
    )?;
    Ok(())
}

/// Max-norm differences of the moment fields between two snapshots. Grids
/// must either match or nest with integer strides (same bounds); comparison
/// happens on the shared nodes of the coarser grid.
#[derive(Clone, Copy, Debug)]
pub struct CompareReport {
    pub d_rho: f64,
    pub d_mx: f64,
    pub d_my: f64,
    pub nodes: usize,
}

impl CompareReport {
    pub fn max_moment_diff(&self) -> f64 {
        self.d_rho.max(self.d_mx).max(self.d_my)
    }
}

pub fn compare(a: &Snapshot, b: &Snapshot) -> Result<CompareReport> {
    let (ga, gb) = (&a.sgrid, &b.sgrid);
    let bounds_match = ga.ax == gb.ax && ga.bx == gb.bx && ga.ay == gb.ay && ga.by == gb.by;
    if !bounds_match {
        return Err(Error::Snapshot(
            "snapshots cover different spatial domains".into(),
        ));
    }
    // Orient so `fine` has the denser grid.
    let (fine, coarse) = if ga.nx >= gb.nx { (a, b) } else { (b, a) };
    let (gf, gc) = (&fine.sgrid, &coarse.sgrid);
    if gf.nx % gc.nx != 0 || gf.ny % gc.ny != 0 {
        return Err(Error::Snapshot(format!(
            "grids {}x{} and {}x{} do not nest",
            gf.nx, gf.ny, gc.nx, gc.ny
        )));
    }
    let (sx, sy) = (gf.nx / gc.nx, gf.ny / gc.ny);
    let mom_f = &fine.mom;
    let mom_c = &coarse.mom;
    let mut rep = CompareReport {
        d_rho: 0.0,
        d_mx: 0.0,
        d_my: 0.0,
        nodes: gc.nx * gc.ny,
    };
    for i in 0..gc.nx {
        for j in 0..gc.ny {
            let (fi, fj) = (i * sx, j * sy);
            let (rf, rc) = (mom_f.rho[[fi, fj]], mom_c.rho[[i, j]]);
            rep.d_rho = rep.d_rho.max((rf - rc).abs());
            rep.d_mx = rep
                .d_mx
                .max((rf * mom_f.u.x[[fi, fj]] - rc * mom_c.u.x[[i, j]]).abs());
            rep.d_my = rep
                .d_my
                .max((rf * mom_f.u.y[[fi, fj]] - rc * mom_c.u.y[[i, j]]).abs());
        }
    }
    Ok(rep)
}
