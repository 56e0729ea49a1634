//! Isothermal Navier-Stokes reference solver.
//!
//! MacCormack predictor/corrector on the conserved variables with the
//! pressure law p = rho (unit temperature) and the viscous term
//! `eps div sigma(u)`, which for this sigma equals `eps Lap(u)`. One-sided
//! difference directions alternate every step to cancel their bias; the
//! viscous fluxes stay centered in both stages.

use crate::error::{Error, Result};
use crate::fft::{
    deriv_x, deriv_x_backward, deriv_x_forward, deriv_y, deriv_y_backward, deriv_y_forward,
    DerivativeKind,
};
use crate::grid::{ScalarFieldX, SpatialGrid, VectorFieldX};
use crate::moment_solver::ConservedState;
use crate::moments::sigma_u;

fn fluxes(u: &ConservedState) -> ([ScalarFieldX; 3], [ScalarFieldX; 3]) {
    let u1 = &u.mx / &u.rho;
    let u2 = &u.my / &u.rho;
    let fx = [
        u.mx.clone(),
        &(&u.mx * &u1) + &u.rho,
        &u.mx * &u2,
    ];
    let fy = [
        u.my.clone(),
        &u.my * &u1,
        &(&u.my * &u2) + &u.rho,
    ];
    (fx, fy)
}

/// `eps div sigma(u)` on the momentum components, centered differences.
fn viscous(u: &ConservedState, eps: f64, g: &SpatialGrid) -> (ScalarFieldX, ScalarFieldX) {
    let vel = VectorFieldX {
        x: &u.mx / &u.rho,
        y: &u.my / &u.rho,
    };
    let s = sigma_u(&vel, g, DerivativeKind::Central);
    let vx = (&deriv_x(&s.xx, g, DerivativeKind::Central)
        + &deriv_y(&s.xy, g, DerivativeKind::Central))
        * eps;
    let vy = (&deriv_x(&s.xy, g, DerivativeKind::Central)
        + &deriv_y(&s.yy, g, DerivativeKind::Central))
        * eps;
    (vx, vy)
}

fn rhs(u: &ConservedState, eps: f64, g: &SpatialGrid, forward: bool) -> [ScalarFieldX; 3] {
    let (fx, fy) = fluxes(u);
    type Diff = fn(&ScalarFieldX, &SpatialGrid) -> ScalarFieldX;
    let (dx, dy): (Diff, Diff) = if forward {
        (deriv_x_forward, deriv_y_forward)
    } else {
        (deriv_x_backward, deriv_y_backward)
    };
    let (vx, vy) = viscous(u, eps, g);
    [
        -(dx(&fx[0], g) + dy(&fy[0], g)),
        &vx - &(dx(&fx[1], g) + dy(&fy[1], g)),
        &vy - &(dx(&fx[2], g) + dy(&fy[2], g)),
    ]
}

pub fn maccormack_step(
    u: &ConservedState,
    eps: f64,
    dt: f64,
    g: &SpatialGrid,
    forward_first: bool,
    t: f64,
) -> Result<ConservedState> {
    let r0 = rhs(u, eps, g, forward_first);
    let star = ConservedState {
        rho: &u.rho + &(&r0[0] * dt),
        mx: &u.mx + &(&r0[1] * dt),
        my: &u.my + &(&r0[2] * dt),
    };
    let r1 = rhs(&star, eps, g, !forward_first);
    let out = ConservedState {
        rho: (&u.rho + &star.rho + &(&r1[0] * dt)) * 0.5,
        mx: (&u.mx + &star.mx + &(&r1[1] * dt)) * 0.5,
        my: (&u.my + &star.my + &(&r1[2] * dt)) * 0.5,
    };
    let min_rho = out.rho.iter().copied().fold(f64::INFINITY, f64::min);
    if !(min_rho > 0.0) {
        return Err(Error::DensityPositivity { min_rho, t });
    }
    if out.mx.iter().chain(out.my.iter()).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            context: "fluid step",
        });
    }
    Ok(out)
}

/// Convenience wrapper that flips the sweep parity every step.
pub struct FluidSolver {
    pub g: SpatialGrid,
    pub eps: f64,
    forward_first: bool,
}

impl FluidSolver {
    pub fn new(g: SpatialGrid, eps: f64) -> Self {
        Self {
            g,
            eps,
            forward_first: true,
        }
    }

    pub fn step(&mut self, u: &ConservedState, dt: f64, t: f64) -> Result<ConservedState> {
        let out = maccormack_step(u, self.eps, dt, &self.g, self.forward_first, t);
        self.forward_first = !self.forward_first;
        out
    }
}

/// `omega = d u2 / dx - d u1 / dy`.
pub fn vorticity(u: &VectorFieldX, g: &SpatialGrid, kind: DerivativeKind) -> ScalarFieldX {
    &deriv_x(&u.y, g, kind) - &deriv_y(&u.x, g, kind)
}
