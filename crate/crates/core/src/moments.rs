//! Maxwellian-weighted velocity moments of the low-rank factors.
//!
//! Every moment the scheme needs has the form `int q(v) M(v; rho, u) g dv`
//! with q a monomial of degree <= 2. Writing the Maxwellian as a shifted
//! Gaussian turns each of them into `(rho/2pi) sum_j w_j(x) (qV_j * G)(u(x))`
//! where * is convolution with `G = exp(-|.|^2/2)`. The convolutions are
//! evaluated once per step with FFTs on the periodic velocity grid, stored as
//! bicubic spline tables, and interpolated at the local mean velocity. The
//! wrap-around images this introduces are suppressed by the Gaussian decay
//! across half the velocity box (below 2e-8 for a box of half-width 6).

use std::collections::HashMap;
use std::f64::consts::TAU;
use std::sync::{Arc, LazyLock, Mutex};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::fft::{conv2_packed, deriv_x, deriv_y, fft2, DerivativeKind};
use crate::grid::{
    ScalarFieldV, ScalarFieldX, SpatialGrid, SymTensorFieldX, VectorFieldX, VelocityGrid,
};
use crate::spline::{BicubicTable, Stencil};

/// Macroscopic fields carried alongside the low-rank factors.
#[derive(Clone, Debug)]
pub struct MomentState {
    pub rho: ScalarFieldX,
    pub u: VectorFieldX,
}

impl MomentState {
    pub fn constant(g: &SpatialGrid, rho: f64, u: (f64, f64)) -> Self {
        Self {
            rho: g.from_fn(|_, _| rho),
            u: VectorFieldX {
                x: g.from_fn(|_, _| u.0),
                y: g.from_fn(|_, _| u.1),
            },
        }
    }
}

/// Knudsen number, constant or varying in space.
#[derive(Clone, Debug)]
pub enum Knudsen {
    Constant(f64),
    Field(ScalarFieldX),
}

impl Knudsen {
    pub fn at(&self, i: usize, j: usize) -> f64 {
        match self {
            Knudsen::Constant(e) => *e,
            Knudsen::Field(f) => f[[i, j]],
        }
    }

    pub fn min(&self) -> f64 {
        match self {
            Knudsen::Constant(e) => *e,
            Knudsen::Field(f) => f.iter().copied().fold(f64::INFINITY, f64::min),
        }
    }
}

/// Gaussian convolutions of one velocity basis function: `V_j * G`,
/// `(v V_j) * G` (two components) and `((v x v) V_j) * G` (xx, xy, yy).
pub struct BasisConv {
    pub g0: BicubicTable,
    pub g1: [BicubicTable; 2],
    pub g2: [BicubicTable; 3],
}

pub struct ConvTables {
    pub vgrid: VelocityGrid,
    pub per_j: Vec<BasisConv>,
    /// Mean velocities must stay inside `[lo, hi]` in both components; two
    /// grid cells of slack keep the interpolation away from the table edge.
    pub lo: f64,
    pub hi: f64,
}

/// Kernel spectra keyed by grid; the kernel depends only on the grid, not on
/// the basis, so rebuilding it every step would be pure waste.
static KERNEL_SPECTRA: LazyLock<Mutex<HashMap<(usize, u64, u64), Arc<ScalarFieldV>>>> =
    LazyLock::new(|| Mutex::new(HashMap::new()));

fn kernel_spectrum(g: &VelocityGrid) -> Arc<ScalarFieldV> {
    let key = (g.nv, g.av.to_bits(), g.bv.to_bits());
    let mut cache = KERNEL_SPECTRA.lock().unwrap();
    cache
        .entry(key)
        .or_insert_with(|| Arc::new(fft2(&g.gaussian_offset_kernel()).mapv(|z| z.re)))
        .clone()
}

pub fn build_conv_tables(vbasis: &[ScalarFieldV], g: &VelocityGrid) -> ConvTables {
    // The offset kernel is even, so its spectrum is real and two weighted
    // copies of V_j can share each complex transform (see conv2_packed).
    let khat_re = kernel_spectrum(g);
    let dv2 = g.cell_area();
    // Monomial weights with the periodic-seam convention baked in, so that
    // the tables and the plain velocity quadratures use identical moments.
    let vw = [
        g.coord_pow(1, 0),
        g.coord_pow(0, 1),
        g.coord_pow(2, 0),
        g.coord_pow(1, 1),
        g.coord_pow(0, 2),
    ];
    let per_j = vbasis
        .iter()
        .map(|vj| {
            let pair = |a: &ScalarFieldV, b: &ScalarFieldV| {
                let (ca, cb) = conv2_packed(a, b, &khat_re, dv2);
                (BicubicTable::build(ca, g), BicubicTable::build(cb, g))
            };
            let (g0, g1x) = pair(vj, &(&vw[0] * vj));
            let (g1y, g2xx) = pair(&(&vw[1] * vj), &(&vw[2] * vj));
            let (g2xy, g2yy) = pair(&(&vw[3] * vj), &(&vw[4] * vj));
            BasisConv {
                g0,
                g1: [g1x, g1y],
                g2: [g2xx, g2xy, g2yy],
            }
        })
        .collect();
    ConvTables {
        vgrid: *g,
        per_j,
        lo: g.av + 2.0 * g.dv(),
        hi: g.bv - 2.0 * g.dv(),
    }
}

/// `w_j = sum_i X_i S[(i,j)]`, the spatial coefficients of g in the V basis.
pub fn combine_xs(x: &[ScalarFieldX], s: &DMatrix<f64>) -> Vec<ScalarFieldX> {
    let r = x.len();
    (0..r)
        .map(|j| {
            let mut out = ScalarFieldX::zeros(x[0].dim());
            for (i, xi) in x.iter().enumerate() {
                let c = s[(i, j)];
                if c != 0.0 {
                    out.zip_mut_with(xi, |o, v| *o += c * v);
                }
            }
            out
        })
        .collect()
}

fn check_margin(t: &ConvTables, g: &SpatialGrid, i: usize, j: usize, u1: f64, u2: f64) -> Result<()> {
    if !(u1 >= t.lo && u1 <= t.hi && u2 >= t.lo && u2 <= t.hi) {
        return Err(Error::VelocityDomainOverflow {
            u1,
            u2,
            x: g.x(i),
            y: g.y(j),
            lo: t.lo,
            hi: t.hi,
        });
    }
    Ok(())
}

/// First and second Maxwellian-weighted moments of f = M g:
/// `Phi1 = int v M g dv`, `Phi2 = int (v x v) M g dv`.
pub fn maxwellian_flux_fields(
    w: &[ScalarFieldX],
    mom: &MomentState,
    tables: &ConvTables,
    g: &SpatialGrid,
) -> Result<(VectorFieldX, SymTensorFieldX)> {
    let mut phi1 = VectorFieldX::zeros(g);
    let mut phi2 = SymTensorFieldX::zeros(g);
    for i in 0..g.nx {
        for j in 0..g.ny {
            let (u1, u2) = (mom.u.x[[i, j]], mom.u.y[[i, j]]);
            check_margin(tables, g, i, j, u1, u2)?;
            let st = Stencil::new(&tables.vgrid, u1, u2);
            let (mut f1x, mut f1y, mut fxx, mut fxy, mut fyy) = (0.0, 0.0, 0.0, 0.0, 0.0);
            for (jj, bc) in tables.per_j.iter().enumerate() {
                let c = w[jj][[i, j]];
                if c == 0.0 {
                    continue;
                }
                f1x += c * bc.g1[0].eval_at(&st);
                f1y += c * bc.g1[1].eval_at(&st);
                fxx += c * bc.g2[0].eval_at(&st);
                fxy += c * bc.g2[1].eval_at(&st);
                fyy += c * bc.g2[2].eval_at(&st);
            }
            let pref = mom.rho[[i, j]] / TAU;
            phi1.x[[i, j]] = pref * f1x;
            phi1.y[[i, j]] = pref * f1y;
            phi2.xx[[i, j]] = pref * fxx;
            phi2.xy[[i, j]] = pref * fxy;
            phi2.yy[[i, j]] = pref * fyy;
        }
    }
    Ok((phi1, phi2))
}

/// First-order deviation stress
/// `P1 = (1/eps) [rho Id - int (v-u) x (v-u) M g dv]`,
/// which vanishes identically when g = 1. In the fluid limit it approaches
/// the rate-of-strain combination `sigma(u)`.
pub fn stress_tensor_p1(
    w: &[ScalarFieldX],
    mom: &MomentState,
    tables: &ConvTables,
    eps: &Knudsen,
    g: &SpatialGrid,
) -> Result<SymTensorFieldX> {
    let mut p = SymTensorFieldX::zeros(g);
    for i in 0..g.nx {
        for j in 0..g.ny {
            let (u1, u2) = (mom.u.x[[i, j]], mom.u.y[[i, j]]);
            check_margin(tables, g, i, j, u1, u2)?;
            let st = Stencil::new(&tables.vgrid, u1, u2);
            let (mut bxx, mut bxy, mut byy) = (0.0, 0.0, 0.0);
            for (jj, bc) in tables.per_j.iter().enumerate() {
                let c = w[jj][[i, j]];
                if c == 0.0 {
                    continue;
                }
                let g0 = bc.g0.eval_at(&st);
                let g1x = bc.g1[0].eval_at(&st);
                let g1y = bc.g1[1].eval_at(&st);
                bxx += c * (bc.g2[0].eval_at(&st) - 2.0 * u1 * g1x + u1 * u1 * g0);
                bxy += c * (bc.g2[1].eval_at(&st) - u1 * g1y - u2 * g1x + u1 * u2 * g0);
                byy += c * (bc.g2[2].eval_at(&st) - 2.0 * u2 * g1y + u2 * u2 * g0);
            }
            let rho = mom.rho[[i, j]];
            let inv_eps = 1.0 / eps.at(i, j);
            p.xx[[i, j]] = inv_eps * (rho - rho / TAU * bxx);
            p.xy[[i, j]] = inv_eps * (-rho / TAU * bxy);
            p.yy[[i, j]] = inv_eps * (rho - rho / TAU * byy);
        }
    }
    Ok(p)
}

/// Traceless rate-of-strain combination the deviation stress relaxes to:
/// `sigma_xx = du1/dx - du2/dy`, `sigma_xy = du1/dy + du2/dx`,
/// `sigma_yy = -sigma_xx`.
pub fn sigma_u(u: &VectorFieldX, g: &SpatialGrid, kind: DerivativeKind) -> SymTensorFieldX {
    let u1x = deriv_x(&u.x, g, kind);
    let u1y = deriv_y(&u.x, g, kind);
    let u2x = deriv_x(&u.y, g, kind);
    let u2y = deriv_y(&u.y, g, kind);
    SymTensorFieldX {
        xx: &u1x - &u2y,
        xy: &u1y + &u2x,
        yy: &u2y - &u1x,
    }
}
