//! Time integration of the macroscopic moments (rho, rho u).
//!
//! Both paths advance the conservative variables, so mass and momentum are
//! preserved to round-off regardless of the flux closure: a forward-Euler
//! update fed by spectral flux divergences, and a two-half-step staggered
//! central scheme (predictor/corrector with minmod-limited slopes) that needs
//! no Riemann solver and pairs with the finite-difference transport path.

use crate::error::{Error, Result};
use crate::fft::{deriv_x, deriv_y, DerivativeKind};
use crate::grid::{roll, ScalarFieldX, SpatialGrid, SymTensorFieldX, VectorFieldX};
use crate::moments::MomentState;

/// Conserved moment fields: density and the two momentum components.
#[derive(Clone, Debug)]
pub struct ConservedState {
    pub rho: ScalarFieldX,
    pub mx: ScalarFieldX,
    pub my: ScalarFieldX,
}

impl ConservedState {
    pub fn from_moments(mom: &MomentState) -> Self {
        Self {
            rho: mom.rho.clone(),
            mx: &mom.rho * &mom.u.x,
            my: &mom.rho * &mom.u.y,
        }
    }

    /// Back to primitive moments; fails if the density lost positivity.
    pub fn into_moments_checked(self, t: f64) -> Result<MomentState> {
        let min_rho = self.rho.iter().copied().fold(f64::INFINITY, f64::min);
        if !(min_rho > 0.0) {
            return Err(Error::DensityPositivity { min_rho, t });
        }
        let ux = &self.mx / &self.rho;
        let uy = &self.my / &self.rho;
        Ok(MomentState {
            rho: self.rho,
            u: VectorFieldX { x: ux, y: uy },
        })
    }

    fn comps(&self) -> [&ScalarFieldX; 3] {
        [&self.rho, &self.mx, &self.my]
    }

    fn from_comps(mut c: Vec<ScalarFieldX>) -> Self {
        let my = c.pop().unwrap();
        let mx = c.pop().unwrap();
        let rho = c.pop().unwrap();
        Self { rho, mx, my }
    }
}

/// Moment sources from the kinetic fluxes: `I1 = -div Phi1`,
/// `I2 = -div Phi2` (row-wise divergence of the symmetric tensor).
pub fn moment_rhs(
    phi1: &VectorFieldX,
    phi2: &SymTensorFieldX,
    g: &SpatialGrid,
    kind: DerivativeKind,
) -> (ScalarFieldX, VectorFieldX) {
    let (p1x_x, pxx_x) = crate::fft::deriv_x_pair(&phi1.x, &phi2.xx, g, kind);
    let (p1y_y, pyy_y) = crate::fft::deriv_y_pair(&phi1.y, &phi2.yy, g, kind);
    let i1 = -(p1x_x + p1y_y);
    let i2 = VectorFieldX {
        x: -(pxx_x + deriv_y(&phi2.xy, g, kind)),
        y: -(deriv_x(&phi2.xy, g, kind) + pyy_y),
    };
    (i1, i2)
}

/// Forward-Euler step of the conservative variables, then back to (rho, u).
pub fn euler_moment_step(
    mom: &MomentState,
    i1: &ScalarFieldX,
    i2: &VectorFieldX,
    dt: f64,
    t: f64,
) -> Result<MomentState> {
    let cons = ConservedState {
        rho: &mom.rho + &(i1 * dt),
        mx: &(&mom.rho * &mom.u.x) + &(&i2.x * dt),
        my: &(&mom.rho * &mom.u.y) + &(&i2.y * dt),
    };
    cons.into_moments_checked(t)
}

pub fn minmod(a: f64, b: f64) -> f64 {
    if a * b <= 0.0 {
        0.0
    } else {
        a.signum() * a.abs().min(b.abs())
    }
}

fn minmod_slope_x(q: &ScalarFieldX) -> ScalarFieldX {
    let fwd = &roll(q, 1, 0) - q;
    let bwd = q - &roll(q, -1, 0);
    ndarray::Zip::from(&fwd).and(&bwd).map_collect(|&f, &b| minmod(f, b))
}

fn minmod_slope_y(q: &ScalarFieldX) -> ScalarFieldX {
    let fwd = &roll(q, 0, 1) - q;
    let bwd = q - &roll(q, 0, -1);
    ndarray::Zip::from(&fwd).and(&bwd).map_collect(|&f, &b| minmod(f, b))
}

/// One staggered half-step of length `tau`: input lives on the integer grid,
/// output on the cell-center grid shifted by (+1/2, +1/2). The closure
/// returns the x- and y-fluxes of the three conserved components.
pub fn nt2d_half_step<F>(
    u: &ConservedState,
    flux: &mut F,
    tau: f64,
    g: &SpatialGrid,
) -> Result<ConservedState>
where
    F: FnMut(&ConservedState) -> Result<([ScalarFieldX; 3], [ScalarFieldX; 3])>,
{
    let (fx, gy) = flux(u)?;
    let lx = tau / (2.0 * g.dx());
    let ly = tau / (2.0 * g.dy());

    // Predictor: midpoint-in-time values on the integer grid.
    let mut star = Vec::with_capacity(3);
    for (c, q) in u.comps().into_iter().enumerate() {
        let fpx = minmod_slope_x(&fx[c]);
        let gpy = minmod_slope_y(&gy[c]);
        star.push(q - &(fpx * lx) - &(gpy * ly));
    }
    let star = ConservedState::from_comps(star);
    let (fs, gs) = flux(&star)?;

    // Corrector: staggered cell averages plus the predictor fluxes. All four
    // corner contributions telescope over the periodic grid, so each half
    // step conserves the cell sums exactly.
    let mut out = Vec::with_capacity(3);
    for (c, q) in u.comps().into_iter().enumerate() {
        let upx = minmod_slope_x(q);
        let upy = minmod_slope_y(q);
        let q_x = roll(q, 1, 0);
        let q_y = roll(q, 0, 1);
        let q_xy = roll(q, 1, 1);
        let mut o = (q + &q_x + &q_y + &q_xy) * 0.25;
        o += &((&upx - &roll(&upx, 1, 0) + &roll(&upx, 0, 1) - &roll(&upx, 1, 1)) / 16.0);
        o += &((&upy - &roll(&upy, 0, 1) + &roll(&upy, 1, 0) - &roll(&upy, 1, 1)) / 16.0);
        o -= &((&roll(&fs[c], 1, 0) - &fs[c] + &roll(&fs[c], 1, 1) - &roll(&fs[c], 0, 1)) * lx);
        o -= &((&roll(&gs[c], 0, 1) - &gs[c] + &roll(&gs[c], 1, 1) - &roll(&gs[c], 1, 0)) * ly);
        out.push(o);
    }
    Ok(ConservedState::from_comps(out))
}

/// Full staggered step: two half-steps of `dt/2`. The first maps the integer
/// grid to cell centers, the second back; the result is realigned so node
/// `[i][j]` again refers to the original grid point. `flux_half` must be the
/// same closure rebuilt on the half grid (frozen coefficients averaged to
/// cell centers).
pub fn nt_staggered_full_step<F, H>(
    u: &ConservedState,
    flux: &mut F,
    flux_half: &mut H,
    dt: f64,
    g: &SpatialGrid,
) -> Result<ConservedState>
where
    F: FnMut(&ConservedState) -> Result<([ScalarFieldX; 3], [ScalarFieldX; 3])>,
    H: FnMut(&ConservedState) -> Result<([ScalarFieldX; 3], [ScalarFieldX; 3])>,
{
    let half = nt2d_half_step(u, flux, dt / 2.0, g)?;
    let back = nt2d_half_step(&half, flux_half, dt / 2.0, g)?;
    Ok(ConservedState {
        rho: roll(&back.rho, -1, -1),
        mx: roll(&back.mx, -1, -1),
        my: roll(&back.my, -1, -1),
    })
}
